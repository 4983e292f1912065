#pragma once

#include "bilag/bilag.hpp"
#include "bilag/fields.hpp"

namespace bilag {

// Bundle charts over a base chart. Tangent fibers are named v_<coord>,
// cotangent fibers xi_<coord>; fiber boxes default to [-1, 1]. Base
// coordinates come first, fibers follow in base order.
ChartPtr tangent_chart(const ChartPtr& base);
ChartPtr cotangent_chart(const ChartPtr& base);

// Vertical and complete lifts to a tangent-bundle chart. The bundle chart
// must have twice the base dimension and is threaded through explicitly so
// every lifted object shares one chart instance.
ScalarField vlift_fn(const ScalarField& f, ChartPtr tm);
ScalarField clift_fn(const ScalarField& f, ChartPtr tm);
VectorField vlift_vf(const VectorField& X, ChartPtr tm);
VectorField clift_vf(const VectorField& X, ChartPtr tm);
OneForm vlift_form(const OneForm& a, ChartPtr tm);
OneForm clift_form(const OneForm& a, ChartPtr tm);
TwoForm clift_form(const TwoForm& w, ChartPtr tm);
Connection clift_connection(const Connection& nabla, ChartPtr tm);
// frame {X^c} followed by {X^v}; rank doubles
Foliation clift_foliation(const Foliation& F, ChartPtr tm);

// theta = sum xi_i dx_i on a cotangent chart, and d theta
OneForm tautological_form(ChartPtr ctm);
TwoForm canonical_symplectic(ChartPtr ctm);
// pullback of the base form plus d theta; the base form must be symplectic
// on its own box (checked on samples)
TwoForm mixed_form(const TwoForm& base_omega, ChartPtr ctm);
// Conormal foliation of a base foliation spanned by coordinate fields:
// frame {d/dx_c} for the spanned directions plus {d/dxi_d} for the rest.
// Throws DomainError when the base frame is not an adapted coordinate frame.
Foliation conormal_foliation(const Foliation& F, ChartPtr ctm);

// the three prolonged structures
BiLagrangianStructure tangent_structure(const BiLagrangianStructure& S);
BiLagrangianStructure cotangent_structure(const BiLagrangianStructure& S, bool mixed);

// Verifies all three prolongations of S: structure axioms and canonical-
// connection residuals for each, plus the tangent-side identity that the
// connection of the lifted structure is the complete lift of the base
// connection, and flatness of the d-theta prolongation. Check names carry
// the prefixes tangent/, cotangent-dtheta/, cotangent-mixed/.
VerificationReport verify_theorem1(const BiLagrangianStructure& S, const VerifyOptions& opt = {});

} // namespace bilag
