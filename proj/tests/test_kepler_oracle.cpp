#include "doctest.h"

#include "cr3bp/flow.hpp"
#include "cr3bp/kepler_oracle.hpp"
#include "cr3bp/rng.hpp"

using namespace cr3bp;

TEST_CASE("kepler_period against a brute-force orbit integration") {
    // Oracle: integrate the plain Kepler problem and measure the radial
    // period directly (time between consecutive perihelion passages).
    const SystemSpec kep = SystemSpec::kepler(-0.5);
    UnregState s;
    s.q = {1.2, 0.0, 0.0};
    s.p = {0.0, std::sqrt(2.0 * (1.0 / 1.2 - 0.5)), 0.0};  // K = -1/2, a = 1
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-14;
    const auto traj = integrate_unreg(s, 13.0, kep, cfg);
    std::vector<double> minima;
    for (std::size_t i = 1; i + 1 < traj.samples.size(); ++i) {
        const double r0 = norm(traj.samples[i - 1].second.q);
        const double r1 = norm(traj.samples[i].second.q);
        const double r2 = norm(traj.samples[i + 1].second.q);
        if (r1 < r0 && r1 <= r2) {
            // parabolic refinement of the minimum
            const double t0 = traj.samples[i - 1].first, t1 = traj.samples[i].first,
                         t2 = traj.samples[i + 1].first;
            const double denom = (r0 - 2 * r1 + r2);
            double t = t1;
            if (std::abs(denom) > 1e-14)
                t = t1 + 0.5 * (r0 - r2) / denom * 0.5 * (t2 - t0);
            minima.push_back(t);
        }
    }
    REQUIRE(minima.size() >= 2);
    const double measured = minima[1] - minima[0];
    CHECK(measured == doctest::Approx(2.0 * kPi).epsilon(1e-6));
    CHECK(kepler_period(-0.5) == doctest::Approx(measured).epsilon(1e-6));

    CHECK(kepler_period(-1.0) == doctest::Approx(2.0 * kPi / (2.0 * std::sqrt(2.0))).epsilon(1e-15));
    CHECK_THROWS_AS(kepler_period(0.0), NonNegativeEnergy);
    CHECK_THROWS_AS(kepler_period(0.3), NonNegativeEnergy);
}

TEST_CASE("analytic_return: invariants and fixed points") {
    const KeplerContext ctx(-2.0);
    SUBCASE("polar points are fixed") {
        RegState xp;
        xp.xi = {1.0, 0.0, 0.0, 0.0};
        xp.eta = {0.0, 0.0, 0.0, 1.0};
        const RegState out = analytic_return(xp, ctx);
        for (int i = 0; i < 4; ++i) {
            CHECK(out.xi[i] == xp.xi[i]);
            CHECK(out.eta[i] == xp.eta[i]);
        }
        RegState xm;
        xm.xi = {-1.0, 0.0, 0.0, 0.0};
        xm.eta = {0.0, 0.0, 0.0, 0.25};  // eta3 = -1/(2c)
        const RegState outm = analytic_return(xm, ctx);
        CHECK(outm.eta[3] == 0.25);
        CHECK(outm.xi[0] == -1.0);
    }
    SUBCASE("L and xi0 invariant; resonance third iterate") {
        // Formula-level check at the L with T(c-L) = 2*pi/3.
        const double K = -std::pow(3.0, 2.0 / 3.0) / 2.0;  // (2(-K))^{3/2} = 3
        const double L = ctx.c - K;
        CHECK(kepler_period(K) == doctest::Approx(2.0 * kPi / 3.0).epsilon(1e-14));
        RegState r;
        r.xi = {0.6, 0.8, 0.0, 0.0};
        // L = xi2 eta1 - xi1 eta2 = -0.8 eta2 -> eta2 = -L/0.8
        Vec4 e{0.0, 0.1, -L / 0.8, 0.4};
        axpy(-dot(r.xi, e), r.xi, e);
        r.eta = e;
        CHECK(angular_momentum_reg(r) == doctest::Approx(L).epsilon(1e-12));
        RegState it = r;
        for (int k = 0; k < 3; ++k) {
            it = analytic_return(it, ctx);
            CHECK(angular_momentum_reg(it) == doctest::Approx(L).epsilon(1e-12));
            CHECK(it.xi[0] == r.xi[0]);
            CHECK(it.eta[3] == r.eta[3]);
        }
        for (int i = 0; i < 4; ++i) {
            CHECK(std::abs(it.xi[i] - r.xi[i]) < 1e-12);
            CHECK(std::abs(it.eta[i] - r.eta[i]) < 1e-12);
        }
    }
    SUBCASE("energy domain guard") {
        RegState r;
        r.xi = {0.0, 1.0, 0.0, 0.0};
        r.eta = {0.0, 0.0, 2.5, 0.0};  // L = -eta2 = -2.5 <= c, so K >= 0
        CHECK(angular_momentum_reg(r) < -2.0);
        CHECK_THROWS_AS(analytic_return(r, ctx), EnergyDomain);
    }
}

TEST_CASE("circular_orbits") {
    SUBCASE("critical energy values via the guarded branch") {
        const CircularOrbits co = circular_orbits(-1.5);
        CHECK(co.r_dir == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(co.r_unbounded == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(co.r_ret == doctest::Approx(0.25).epsilon(1e-10));
        CHECK(co.p_dir == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(co.p_ret == doctest::Approx(2.0).epsilon(1e-10));
    }
    SUBCASE("Cardano vs defining equations, cubic residual") {
        for (double c : {-1.6, -2.0, -2.5, -3.0, -5.0}) {
            const CircularOrbits co = circular_orbits(c);
            // defining equations
            CHECK(-0.5 / co.r_dir - std::sqrt(co.r_dir) == doctest::Approx(c).epsilon(1e-10));
            CHECK(-0.5 / co.r_unbounded - std::sqrt(co.r_unbounded) ==
                  doctest::Approx(c).epsilon(1e-10));
            CHECK(-0.5 / co.r_ret + std::sqrt(co.r_ret) == doctest::Approx(c).epsilon(1e-10));
            // cubic residual, scaled by the polynomial's coefficient size
            for (double r : {co.r_dir, co.r_ret, co.r_unbounded}) {
                const double scale = std::max(1.0, c * c * r * r);
                CHECK(std::abs(r * r * r - c * c * r * r - c * r - 0.25) < 1e-12 * scale);
            }
            CHECK(co.r_ret < co.r_dir);
            CHECK(co.r_dir <= co.r_unbounded);
        }
    }
    SUBCASE("supercritical energies rejected") {
        CHECK_THROWS_AS(circular_orbits(-1.4), SupercriticalEnergy);
    }
}

TEST_CASE("invariant_circle") {
    const KeplerContext ctx(-2.0);
    SUBCASE("degenerate circles are the polar points") {
        const InvariantCircle cp = invariant_circle(1.0, {0.0, 0.0, 0.0}, ctx);
        const RegState xp = cp.at(0.7);
        CHECK(xp.xi[0] == doctest::Approx(1.0));
        CHECK(xp.eta[3] == doctest::Approx(1.0).epsilon(1e-14));
        const InvariantCircle cm = invariant_circle(-1.0, {0.0, 0.0, 0.0}, ctx);
        // south-pole fiber radius -1/(2c)
        CHECK(cm.at(0.0).eta[3] == doctest::Approx(0.25).epsilon(1e-14));
    }
    SUBCASE("membership in Q^{-1}(1/2) and return-map invariance") {
        const SystemSpec spec = SystemSpec::three_body(1.0, ctx.c, Chart::Moon);
        const InvariantCircle circ = invariant_circle(0.35, {0.15, 0.0, 0.3}, ctx);
        for (int k = 0; k < 16; ++k) {
            const double t = 2.0 * kPi * k / 16.0;
            const RegState x = circ.at(t);
            CHECK(constraint_residual(x) < 1e-12);
            CHECK(std::abs(Q_reg(x, spec) - 0.5) < 1e-10);
            // analytic_return maps the circle into itself: the image equals
            // the circle point at parameter t - T(c-L).
            const RegState y = analytic_return(x, ctx);
            const double T = kepler_period(ctx.c - circ.angular_momentum());
            const RegState expect = circ.at(t - T);
            for (int i = 0; i < 4; ++i) {
                CHECK(std::abs(y.xi[i] - expect.xi[i]) < 1e-10);
                CHECK(std::abs(y.eta[i] - expect.eta[i]) < 1e-10);
            }
        }
    }
    SUBCASE("on-surface resonance: sixth iterate closes on the circle") {
        // T(c-L) = 2 pi / 6 needs (2(-K))^{3/2} = 6.
        const double K = -std::pow(6.0, 2.0 / 3.0) / 2.0;
        const double L = ctx.c - K;  // about -0.35
        // Base at x = 0: L = -eta2.
        const InvariantCircle circ = invariant_circle(0.0, {0.2, 0.0, -L}, ctx);
        CHECK(circ.angular_momentum() == doctest::Approx(L).epsilon(1e-12));
        RegState x = circ.at(1.234);
        for (int k = 0; k < 6; ++k) x = analytic_return(x, KeplerContext(ctx.c));
        const RegState x0 = circ.at(1.234);
        for (int i = 0; i < 4; ++i) {
            CHECK(std::abs(x.xi[i] - x0.xi[i]) < 1e-12);
            CHECK(std::abs(x.eta[i] - x0.eta[i]) < 1e-12);
        }
    }
    SUBCASE("outside the page") {
        CHECK_THROWS_AS(invariant_circle(0.0, {0.0, 0.0, 0.9}, ctx), OutsidePage);
    }
}

TEST_CASE("analytic_return commutes with the r-involution") {
    const KeplerContext ctx(-2.0);
    Rng rng(55);
    for (int k = 0; k < 300; ++k) {
        RegState x;
        x.xi = rng.unit_vec<4>();
        Vec4 e = rng.gaussian_vec<4>();
        axpy(-dot(x.xi, e), x.xi, e);
        x.eta = 0.4 * e;
        if (ctx.c - angular_momentum_reg(x) >= 0.0) continue;
        const RegState a = involution(InvolutionKind::r, analytic_return(x, ctx));
        const RegState b = analytic_return(involution(InvolutionKind::r, x), ctx);
        for (int i = 0; i < 4; ++i) {
            CHECK(a.xi[i] == b.xi[i]);
            CHECK(a.eta[i] == b.eta[i]);
        }
    }
}
