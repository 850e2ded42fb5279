#pragma once

#include "cr3bp/phase.hpp"

namespace cr3bp {

// Closed-form machinery of the integrable rotating Kepler problem (mu = 1):
// the ground truth against which the numerical return map is checked.
struct KeplerContext {
    double c = -2.0;  // Jacobi energy, c < 0

    explicit KeplerContext(double c_) : c(c_) {
        if (!(c < 0.0)) throw OutOfRange("KeplerContext: c must be negative");
    }
};

// Minimal period of a bounded Kepler orbit of energy K < 0:
//   T(K) = 2 pi a^{3/2} with a = -1/(2K), i.e. T = 2 pi (2(-K))^{-3/2}.
// Throws NonNegativeEnergy for K >= 0.
double kepler_period(double K);

// Exact return map on the geodesic page {xi3 = 0, eta3 >= 0}: rotates
// (xi1, xi2) and (eta1, eta2) clockwise by the angle T(c - L), fixing xi0,
// eta0, xi3, eta3.  L = xi2 eta1 - xi1 eta2 is invariant.  Throws
// EnergyDomain when c - L >= 0.
RegState analytic_return(const RegState& r, const KeplerContext& ctx);

// Radii and momentum norms of the planar circular orbits at Jacobi energy c,
// roots of r^3 - c^2 r^2 - c r - 1/4 = 0.  Closed-form Cardano expressions,
// guarded by a bracketed root-finder on -1/(2r) -+ sqrt(r) = c near the
// critical energy where the radicals cancel catastrophically.  Throws
// SupercriticalEnergy for c > -3/2.
struct CircularOrbits {
    double r_dir, r_ret, r_unbounded;
    double p_dir, p_ret;
};
CircularOrbits circular_orbits(double c);

// Invariant circle of the return map over the parallel xi0 = x: the base
// point traverses the parallel while eta keeps its rotation-covariant
// profile, with eta3 >= 0 fixed by membership in Q^{-1}(1/2).  Throws
// OutsidePage when ||eta_fix|| f > 1 at xi0 = x.
class InvariantCircle {
public:
    InvariantCircle(double x, const Vec3& eta_fix, const KeplerContext& ctx);

    RegState at(double t) const;  // t in [0, 2 pi)
    double angular_momentum() const { return L_; }
    double eta3() const { return eta3_; }

private:
    double x_, eta3_, L_;
    Vec3 eta_base_;  // (eta0, eta1, eta2) at the base point, tangency-projected
};

InvariantCircle invariant_circle(double x, const Vec3& eta_fix, const KeplerContext& ctx);

}  // namespace cr3bp
