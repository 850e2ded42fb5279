#include "cr3bp/kepler_oracle.hpp"

#include <cmath>

#include "cr3bp/dynamics.hpp"

namespace cr3bp {

double kepler_period(double K) {
    if (!(K < 0.0)) throw NonNegativeEnergy("kepler_period: K must be negative");
    return 2.0 * kPi * std::pow(2.0 * (-K), -1.5);
}

RegState analytic_return(const RegState& r, const KeplerContext& ctx) {
    const double L = angular_momentum_reg(r);
    const double K = ctx.c - L;
    if (!(K < 0.0)) throw EnergyDomain("analytic_return: c - L must be negative");
    const double phi = kepler_period(K);
    // The rotating frame advances by T while the orbit closes, so both pairs
    // turn clockwise by T.
    const double ca = std::cos(phi), sa = std::sin(phi);
    auto rot = [&](double& a, double& b) {
        const double a2 = ca * a + sa * b;
        const double b2 = -sa * a + ca * b;
        a = a2;
        b = b2;
    };
    RegState out = r;
    rot(out.xi[1], out.xi[2]);
    rot(out.eta[1], out.eta[2]);
    return out;
}

namespace {

// Defining equations of the circular orbits: h_dir(r) = -1/(2r) - sqrt(r),
// h_ret(r) = -1/(2r) + sqrt(r).  h_dir has its maximum -3/2 at r = 1.
double bisect(double lo, double hi, double c, bool retrograde) {
    auto h = [&](double r) { return -0.5 / r + (retrograde ? 1.0 : -1.0) * std::sqrt(r); };
    double flo = h(lo) - c;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = h(mid) - c;
        if ((flo < 0.0) == (fm < 0.0)) { lo = mid; flo = fm; } else { hi = mid; }
        if (hi - lo < 1e-15 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

CircularOrbits circular_orbits(double c) {
    if (c > -1.5) throw SupercriticalEnergy("circular_orbits: requires c <= -3/2");
    CircularOrbits out{};

    const double disc = 24.0 * c * c * c + 81.0;
    if (std::abs(disc) < 1e-8) {
        // Cardano radicals cancel catastrophically at the critical energy,
        // where the cubic has a near-double root.  The retrograde equation
        // stays well-conditioned; the remaining two roots come from Vieta
        // deflation (sum c^2, product 1/4).
        out.r_ret = bisect(1e-6, sqr(1.0 - c), c, true);
        const double sum = c * c - out.r_ret;
        const double prod = 0.25 / out.r_ret;
        const double root = std::sqrt(std::max(0.0, sum * sum - 4.0 * prod));
        out.r_dir = 0.5 * (sum - root);
        out.r_unbounded = 0.5 * (sum + root);
    } else {
        const Complex sq = std::sqrt(Complex(disc, 0.0));
        const double c3 = c * c * c;
        const Complex u = std::pow(Complex(-54.0 - 8.0 * c3, 0.0) + 6.0 * sq, 1.0 / 3.0);
        const Complex v = std::pow(Complex(54.0 + 8.0 * c3, 0.0) + 6.0 * sq, 1.0 / 3.0);
        const Complex ru = u / 6.0 + (2.0 / 3.0) * c * c / u - c / 3.0;
        const Complex rv = v / 6.0 + (2.0 / 3.0) * c * c / v + c / 3.0;
        out.r_unbounded = std::norm(ru);  // (real root)^2; imaginary part cancels
        out.r_ret = std::norm(rv);
        out.r_dir = c * c - out.r_unbounded - out.r_ret;
    }
    out.p_dir = 1.0 / std::sqrt(out.r_dir);
    out.p_ret = 1.0 / std::sqrt(out.r_ret);
    return out;
}

InvariantCircle::InvariantCircle(double x, const Vec3& eta_fix, const KeplerContext& ctx)
    : x_(x) {
    if (!(x >= -1.0 && x <= 1.0)) throw OutOfRange("invariant_circle: x must lie in [-1, 1]");
    const double s1 = std::sqrt(std::max(0.0, 1.0 - x * x));
    // Base point (xi0, xi1, xi2) = (x, sqrt(1-x^2), 0); tangency pins the
    // (eta0, eta1) plane component.
    eta_base_ = eta_fix;
    const double viol = x * eta_base_[0] + s1 * eta_base_[1];
    eta_base_[0] -= viol * x;
    eta_base_[1] -= viol * s1;
    L_ = -s1 * eta_base_[2];

    const double f = 1.0 + (1.0 - x) * (-ctx.c - 0.5 + L_);
    if (!(f > 0.0)) throw OutsidePage("invariant_circle: nonpositive f at this parallel");
    const double e3sq = 1.0 / (f * f) - norm2(eta_base_);
    if (e3sq < -1e-12) throw OutsidePage("invariant_circle: ||eta_fix|| f > 1");
    eta3_ = std::sqrt(std::max(0.0, e3sq));
}

RegState InvariantCircle::at(double t) const {
    const double s1 = std::sqrt(std::max(0.0, 1.0 - x_ * x_));
    const double ct = std::cos(t), st = std::sin(t);
    RegState r;
    r.xi = {x_, s1 * ct, s1 * st, 0.0};
    r.eta = {eta_base_[0], ct * eta_base_[1] - st * eta_base_[2],
             st * eta_base_[1] + ct * eta_base_[2], eta3_};
    return r;
}

InvariantCircle invariant_circle(double x, const Vec3& eta_fix, const KeplerContext& ctx) {
    return InvariantCircle(x, eta_fix, ctx);
}

}  // namespace cr3bp
