#pragma once

#include <cstdint>

#include "cr3bp/dynamics.hpp"

namespace cr3bp {

struct OffBinding : Error {
    explicit OffBinding(const std::string& msg = "OffBinding") : Error(msg) {}
};

// Symmetric 2x2 normal-Hessian block of Q along the binding, in the frame
// (d/deta3, d/dxi3).  Positive definiteness is the boundary-extension
// hypothesis for the return map.
struct NormalHessian {
    double s11 = 0.0, s12 = 0.0, s22 = 0.0;
    double eigen_min = 0.0;
};

// Closed-form entries at a binding state (|xi3|, |eta3| <= 1e-10, else
// OffBinding):
//   S11 = f (f + ||eta||^2 f_eta3eta3)
//   S22 = f ||eta||^2 (L - c + 1/2 - gS/sqrt(D) + P (<w, eta_vec> + eta0^2))
//   S12 = f ||eta||^2 P ((1-xi0) eta0 - <w, xi_vec>),   P = gS (1-xi0)/D^{3/2}.
NormalHessian hessian_S(const RegState& r, const SystemSpec& spec);

// Finite-difference cross-check through the normal linearization of X_Q:
//   S11 = d(xi3')/deta3, S22 = -d(eta3')/dxi3, S12 = (d(xi3')/dxi3 - d(eta3')/deta3)/2.
NormalHessian hessian_S_fd(const RegState& r, const SystemSpec& spec);

struct RotationRates {
    double lambda1 = 1.0;  // exactly 1
    double lambda2 = 0.0;  // mu/||q-m||^3 + (1-mu)/||q-e||^3
};

// Unregularized rotation-rate eigenvalues on the planar set.  Throws
// CollisionInput within 1e-6 of a primary, OffBinding off the planar set.
RotationRates unreg_rotation_rate(const UnregState& s, const SystemSpec& spec);

struct ConvexityReport {
    double eigen_min = 0.0;
    RegState argmin;
    int n_samples = 0;
    bool pass = false;
};

// Samples binding states on Sigma_c (random states plus deterministic
// collision-locus probes) and reports the minimal eigenvalue of S.
ConvexityReport convexity_certificate(const SystemSpec& spec, int n_samples, std::uint64_t seed);

}  // namespace cr3bp
