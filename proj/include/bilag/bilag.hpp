#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bilag/geom.hpp"
#include "bilag/report.hpp"

namespace bilag {

// Rank-k distribution given by a spanning frame. Pointwise independence and
// involutivity are checked properties, not construction invariants.
struct Foliation {
    ChartPtr chart;
    std::string name;
    int rank = 0;
    std::vector<VectorField> frame;
};

Foliation make_foliation(ChartPtr chart, std::string name, std::vector<VectorField> frame);

struct VerifyOptions {
    int samples = 100;
    std::uint64_t seed = 42;
    double tol_closed = 1e-9;      // max |(d omega)_ijk|
    double tol_det = 1e-10;        // min |det omega| must stay above this
    double tol_lagrangian = 1e-9;  // max |omega(frame, frame)|
    double tol_transversal = 1e-8; // min singular value of the joint frame
    double tol_involutive = 1e-8;  // bracket least-squares residual
    double tol_hess = 1e-7;        // torsion / parallel-omega / preservation
    double tol_affine = 1e-6;      // curvature of the Hess connection
    double tol_parakahler = 1e-9;
    double tol_inverse = 1e-8;
};

// closedness + nondegeneracy over the sample box
VerificationReport check_symplectic(const TwoForm& w, const VerifyOptions& opt = {});
// frame independence + stability under the Lie bracket
VerificationReport check_involutive(const Foliation& F, const VerifyOptions& opt = {});
// omega restricted to the frame vanishes; rank must be dim/2
VerificationReport check_lagrangian(const TwoForm& w, const Foliation& F,
                                    const VerifyOptions& opt = {});
// joint frame spans the tangent space with a singular-value floor
VerificationReport check_transversal(const Foliation& F1, const Foliation& F2,
                                     const VerifyOptions& opt = {});

struct BiLagrangianStructure {
    ChartPtr chart;
    std::string name;
    TwoForm omega;
    Foliation f1, f2;
};

// all of the above for one structure
VerificationReport verify_structure(const BiLagrangianStructure& S, const VerifyOptions& opt = {});

// The unique torsion-free connection that parallelizes omega and preserves
// both foliations. Built pointwise from the frames: within a foliation,
// omega(nabla_X Y, .) is solved against the opposite frame from
// X.omega(Y, Z) - omega(Y, [X, Z]); across foliations, nabla_X Y is the
// projection of [X, Y]. Coordinate Christoffels follow by a frame change.
// Samples where the joint frame degenerates raise CheckError naming the point.
Connection hess_connection(const BiLagrangianStructure& S);

// torsion, parallelism of omega, and foliation preservation of the
// connection, measured over frame pairs at sampled points
VerificationReport check_hess_defining(const BiLagrangianStructure& S, const Connection& nabla,
                                       const VerifyOptions& opt = {});

// curvature of the Hess connection over samples and frame triples
VerificationReport check_affine(const BiLagrangianStructure& S, const Connection& nabla,
                                const VerifyOptions& opt = {});

// Pointwise endomorphism F (+1 on f1, -1 on f2) and pseudo-metric
// G(X,Y) = omega(FX, Y). Component evaluators in coordinates.
struct ParaKahlerPair {
    ChartPtr chart;
    TensorEval F; // m*m, F^i_j at (i*m + j)
    TensorEval G; // m*m, G_ij
};

ParaKahlerPair para_kahler(const BiLagrangianStructure& S);
VerificationReport check_para_kahler(const BiLagrangianStructure& S, const ParaKahlerPair& pk,
                                     const VerifyOptions& opt = {});

// ((phi^-1)^* omega, phi_* f1, phi_* f2) on phi's target chart
BiLagrangianStructure pushforward_structure(const Map& phi, const Map& phi_inv,
                                            const BiLagrangianStructure& S);

} // namespace bilag
