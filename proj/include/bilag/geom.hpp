#pragma once

#include <span>
#include <vector>

#include "bilag/fields.hpp"

namespace bilag {

// [X,Y]^j = X^i d_i Y^j - Y^i d_i X^j, as a field usable at any jet order.
VectorField lie_bracket(const VectorField& X, const VectorField& Y);
std::vector<double> lie_bracket(const VectorField& X, const VectorField& Y,
                                std::span<const double> p);

// (da)_ij = d_i a_j - d_j a_i
TwoForm exterior_derivative(const OneForm& a);

// nabla_X Y with components X^i d_i Y^k + Gamma^k_{ij} X^i Y^j
VectorField covariant_derivative(const Connection& nabla, const VectorField& X,
                                 const VectorField& Y);

// nabla_X Y - nabla_Y X - [X,Y]
VectorField torsion_field(const Connection& nabla, const VectorField& X, const VectorField& Y);
std::vector<double> torsion(const Connection& nabla, const VectorField& X, const VectorField& Y,
                            std::span<const double> p);

// R^l_{kij} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
//           + Gamma^l_{im} Gamma^m_{jk} - Gamma^l_{jm} Gamma^m_{ik},
// flattened as ((l*m + k)*m + i)*m + j; equals R(d_i, d_j) d_k = R^l_{kij} d_l.
std::vector<Jet> curvature_tensor(const Connection& nabla, std::span<const double> p, int order);

// R(X,Y)Z at p, contracted from the tensor above.
std::vector<double> curvature(const Connection& nabla, const VectorField& X, const VectorField& Y,
                              const VectorField& Z, std::span<const double> p);

// (phi_* X)(p) = Dphi(phi_inv(p)) . X(phi_inv(p)), a field on phi's target
// chart. The inverse pair is verified on samples before use.
VectorField pushforward_vf(const Map& phi, const Map& phi_inv, const VectorField& X);

// psi^* w on psi's source chart: entries w_ab(psi(p)) d_i psi^a d_j psi^b.
TwoForm pullback_form(const Map& psi, const TwoForm& w);

// pointwise combinators
VectorField vf_add(const VectorField& X, const VectorField& Y);
VectorField vf_scale(const ScalarField& f, const VectorField& X);
VectorField vf_scale(double c, const VectorField& X);
TwoForm form_add(const TwoForm& a, const TwoForm& b);

// omega(X, Y) evaluated from component jets (all inputs share layout)
Jet contract2(std::span<const Jet> w, std::span<const Jet> X, std::span<const Jet> Y);

// directional derivative X.f of a jet-valued function value f (order >= 1)
Jet directional(std::span<const Jet> X, const Jet& f);

} // namespace bilag
