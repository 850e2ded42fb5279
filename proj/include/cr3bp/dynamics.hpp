#pragma once

#include "cr3bp/phase.hpp"

namespace cr3bp {

// Per-state evaluation of the regularized deformation factor
//   f = 1 + (1 - xi0) b + M,
// together with its pieces and first derivatives with respect to all eight
// coordinates.  D is the squared chart-coordinate distance to the other
// primary, D = || eta_vec (1-xi0) + xi_vec eta0 - d ||^2 with d the offset
// of the other primary; the three-body b carries the -gS/sqrt(D) term.
struct FieldEval {
    double f = 1.0;
    double b = 0.0;
    double M = 0.0;
    double D = 1.0;
    Vec4 f_xi{};   // (df/dxi0, df/dxi1, df/dxi2, df/dxi3)
    Vec4 f_eta{};
};

// Throws OtherPrimaryCollision when sqrt(D) < 1e-12 in three-body mode.
FieldEval eval_field(const RegState& r, const SystemSpec& spec);

// Jacobi Hamiltonian in global rotating coordinates,
// H = 1/2 ||p||^2 - mu/||q-m|| - (1-mu)/||q-e|| + p1 q2 - p2 q1.
// Throws CollisionInput when a primary distance is below 1e-12.
double jacobi_H(const UnregState& s, const SystemSpec& spec);

// Hamiltonian vector field of jacobi_H (q' = dH/dp, p' = -dH/dq).
TangentUnreg X_H(const UnregState& s, const SystemSpec& spec);

// Regularized Hamiltonian Q = 1/2 f^2 ||eta||^2.
double Q_reg(const RegState& r, const SystemSpec& spec);

// Constrained Hamiltonian vector field of Q on T*S^3:
//   xi'  = f ( f eta + ||eta||^2 (f_eta - xi (f_eta . xi)) )
//   eta' = ||eta||^2 f ( eta (f_eta . xi) - f_xi - xi (f + f_eta.eta - f_xi.xi) )
TangentReg X_Q(const RegState& r, const SystemSpec& spec);
TangentReg X_Q(const RegState& r, const FieldEval& fe);

// Angular momentum in regularized coordinates, L = xi2 eta1 - xi1 eta2.
double angular_momentum_reg(const RegState& r);

// Kepler energy K = 1/2 ||p||^2 - 1/||q|| and angular term p1 q2 - p2 q1
// (global coordinates; meaningful for mu = 1 where the primary sits at the
// origin).
double kepler_energy(const UnregState& s);
double angular_term(const UnregState& s);

// Scales ||eta|| along the given direction until Q = g^2/2 (safeguarded
// Newton to 1e-12).  The input eta fixes the direction only.  Returns the
// scaled state; throws SamplingFailure when no crossing is bracketed.
RegState scale_eta_to_level(const RegState& r, const SystemSpec& spec);

// Physical-time rate along X_Q: dt/dtau = g * ||y|| = g (1-xi0) ||eta||.
double physical_time_rate(const RegState& r, const SystemSpec& spec);

// Quantity of Assumption (A4): 1 + b + M - M_xi . xi evaluated at the
// collision locus xi = (1,0,0,0) with the given eta.  For the three-body
// problem this reduces to mu - c - 1/2 (Moon chart) resp. (1-mu) - c - 1/2
// (Earth chart).
double a4_value(const Vec4& eta, const SystemSpec& spec);

}  // namespace cr3bp
