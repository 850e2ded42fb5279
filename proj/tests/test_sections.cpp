#include "doctest.h"

#include "cr3bp/equilibria.hpp"
#include "cr3bp/sections.hpp"

using namespace cr3bp;

namespace {

IntegratorConfig tight() {
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-14;
    return cfg;
}

}  // namespace

TEST_CASE("theta_physical") {
    SUBCASE("binding and collision-locus degeneracy") {
        RegState b;
        b.xi = {0.2, 0.6, std::sqrt(1.0 - 0.04 - 0.36), 0.0};
        b.eta = {0.1, -0.2, 0.0, 0.0};
        CHECK(std::abs(theta_physical(b)) == 0.0);

        RegState coll;
        coll.xi = {1.0, 0.0, 0.0, 0.0};
        coll.eta = {0.0, 0.0, 0.0, 1.0};  // off the planar set
        CHECK(std::abs(theta_physical(coll)) == 0.0);  // degenerates at collision
    }
    SUBCASE("angle matches the unregularized map through the chart") {
        const SystemSpec spec = SystemSpec::three_body(0.4, -1.9, Chart::Moon);
        Rng rng(1);
        for (int k = 0; k < 200; ++k) {
            Vec4 xi = rng.unit_vec<4>();
            xi[0] = 0.0;  // xi0 = 0 as in the spec example
            const double n = std::sqrt(norm2(xi));
            for (auto& v : xi) v /= n;
            Vec4 e = rng.gaussian_vec<4>();
            const RegState r = project_to_TS3(xi, e);
            if (sqr(r.xi[3]) + sqr(r.eta[3]) < 1e-4) continue;
            const UnregState u = reg_to_unreg(r, spec);
            // i (q3 + i p3) = -p3 + i q3
            const Complex unreg(-u.p[2], u.q[2]);
            const Complex reg = theta_physical(r);
            double d = std::arg(reg) - std::arg(unreg);
            while (d > kPi) d -= 2.0 * kPi;
            while (d <= -kPi) d += 2.0 * kPi;
            CHECK(std::abs(d) < 1e-10);
        }
    }
}

TEST_CASE("theta_geodesic: binding, Birkhoff page, round-sphere pairing") {
    RegState b;
    b.xi = {0.6, 0.8, 0.0, 0.0};
    b.eta = {0.0, 0.0, 1.0, 0.0};
    CHECK(std::abs(theta_geodesic(b)) == 0.0);

    RegState page;
    page.xi = {0.6, 0.8, 0.0, 0.0};
    page.eta = {0.0, 0.0, 0.0, 1.0};
    CHECK(theta_geodesic(page) == Complex(1.0, 0.0));

    const SystemSpec round = SystemSpec::round_sphere();
    const SectionMap g = SectionMap::geodesic();
    Rng rng(2);
    for (int k = 0; k < 100; ++k) {
        Vec4 xi = rng.unit_vec<4>();
        Vec4 e = rng.gaussian_vec<4>();
        RegState r = project_to_TS3(xi, e);
        r.eta = (1.0 / norm(r.eta)) * r.eta;  // unit cotangent bundle
        const double b2 = sqr(r.xi[3]) + sqr(r.eta[3]);
        if (b2 < 1e-6) continue;
        CHECK(g.pairing(r, round) / b2 == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("theta_interpolated: symmetries, binding characterization, pairing routes") {
    const SystemSpec spec = SystemSpec::three_body(0.5, -1.9, Chart::Moon);
    const CutoffSpec cut{0.4, 0.15, 0.7};
    const SectionMap section = SectionMap::interpolated(cut);
    Rng rng(3);

    SUBCASE("equivariance identities are exact on coordinates") {
        for (int k = 0; k < 1000; ++k) {
            RegState x;
            x.xi = rng.gaussian_vec<4>();
            x.eta = rng.gaussian_vec<4>();
            const Complex t = theta_interpolated_value(x, cut);
            const Complex tr = theta_interpolated_value(involution(InvolutionKind::r, x), cut);
            const Complex t1 = theta_interpolated_value(involution(InvolutionKind::rho1, x), cut);
            const Complex t2 = theta_interpolated_value(involution(InvolutionKind::rho2, x), cut);
            CHECK(tr == -t);
            CHECK(t1 == std::conj(t));
            CHECK(t2 == -std::conj(t));
            // the printed physical map satisfies the same identities
            CHECK(theta_physical(involution(InvolutionKind::r, x)) == -theta_physical(x));
        }
    }
    SUBCASE("theta vanishes exactly on the binding") {
        SigmaSampler sampler(spec);
        int checked = 0;
        while (checked < 2000) {
            RegState s;
            if (!sampler.draw(rng, s)) continue;
            ++checked;
            const double b2 = sqr(s.xi[3]) + sqr(s.eta[3]);
            const double t2 = std::norm(theta_interpolated_value(s, cut));
            if (b2 < 1e-24) CHECK(t2 < 1e-20);
            if (b2 > 1e-12) CHECK(t2 > 0.0);
        }
        // exact binding point
        RegState b;
        b.xi = {0.6, 0.0, 0.8, 0.0};
        b.eta = {0.0, 0.3, 0.0, 0.0};
        CHECK(std::abs(theta_interpolated_value(b, cut)) == 0.0);
    }
    SUBCASE("pairing: analytic contraction = closed-form assembly = flow FD") {
        SigmaSampler sampler(spec);
        int checked = 0;
        while (checked < 60) {
            RegState s;
            if (!sampler.draw(rng, s)) continue;
            if (sqr(s.xi[3]) + sqr(s.eta[3]) < 1e-4) continue;
            ++checked;
            const double direct = section.pairing(s, spec);
            const double assembled = pairing_assembled(s, spec, cut);
            CHECK(std::abs(direct - assembled) < 1e-12 * std::max(1.0, std::abs(direct)));
            const double fd = pairing_flow_fd(s, spec, section, tight());
            CHECK(std::abs(direct - fd) < 1e-6 * std::max(1.0, std::abs(direct)));
        }
    }
    SUBCASE("Omega_p equals (1-xi0)^2 Omega_p^u on matched tangent vectors") {
        const CutoffSpec nocut{0.4, 0.15, 1e-300};  // physical part only
        Rng rng2(4);
        int checked = 0;
        while (checked < 200) {
            Vec4 xi = rng2.unit_vec<4>();
            if (xi[0] > 0.5) continue;  // stay off the cutoff support and collision
            const RegState r = project_to_TS3(xi, rng2.gaussian_vec<4>());
            ++checked;
            TangentReg v;
            v.dxi = rng2.gaussian_vec<4>();
            v.deta = rng2.gaussian_vec<4>();
            // tangent-project
            const double a = dot(r.xi, v.dxi);
            axpy(-a, r.xi, v.dxi);
            const double bb = dot(v.dxi, r.eta) + dot(r.xi, v.deta);
            axpy(-bb, r.xi, v.deta);

            const SectionMap sp = SectionMap::interpolated(nocut);
            const double omega_p_reg = sp.pairing(r, v);
            const UnregState u = reg_to_unreg(r, SystemSpec::three_body(0.5, -1.9, Chart::Moon));
            const TangentUnreg w = reg_to_unreg_tangent(r, v);
            const double omega_p_u = u.p[2] * w.dq[2] - u.q[2] * w.dp[2];
            const double s2 = sqr(1.0 - r.xi[0]);
            CHECK(std::abs(omega_p_reg - s2 * omega_p_u) <
                  1e-10 * std::max(1.0, std::abs(omega_p_reg)));
        }
    }
    SUBCASE("binding pairing reported as a near-binding limit") {
        RegState b;
        b.xi = {0.6, 0.0, 0.8, 0.0};
        b.eta = {0.0, 0.3, 0.0, 0.0};
        const RegState on = scale_eta_to_level(b, spec);
        const SectionValue sv = theta_interpolated(on, spec, cut);
        CHECK(std::abs(sv.theta) == 0.0);
        CHECK(sv.normalized_pairing > 0.0);
    }
}

TEST_CASE("round-sphere pairing bound on the flat-cutoff region") {
    // With f == 1 and amplitude 1, the pairing on {xi0 >= 1-eps} is
    // Omega_p-part + (xi3^2 + eta3^2) >= xi3^2 + eta3^2.
    const SystemSpec round = SystemSpec::round_sphere();
    const CutoffSpec cut{0.4, 0.15, 1.0};
    const SectionMap section = SectionMap::interpolated(cut);
    Rng rng(6);
    int checked = 0;
    while (checked < 500) {
        Vec4 xi = rng.gaussian_vec<4>();
        xi[0] = std::abs(xi[0]) + 4.0;  // push xi0 toward 1 after normalization
        const RegState pre = project_to_TS3(xi, rng.gaussian_vec<4>());
        if (pre.xi[0] < 1.0 - cut.epsilon) continue;
        RegState r = pre;
        r.eta = (1.0 / norm(r.eta)) * r.eta;
        ++checked;
        const double b2 = sqr(r.xi[3]) + sqr(r.eta[3]);
        CHECK(section.pairing(r, round) >= b2 * (1.0 - 1e-12));
    }
}

TEST_CASE("transversality_scan") {
    SUBCASE("rotating Kepler, c = -2") {
        const SystemSpec spec = SystemSpec::three_body(1.0, -2.0, Chart::Moon);
        const CutoffSpec cut = auto_amplitude(spec, 0.4, 0.15, 2000, 11);
        const ScanReport rep = transversality_scan(spec, cut, 10000, 42);
        CHECK(rep.pass);
        CHECK(rep.min_normalized > 0.0);
        CHECK(rep.n_evaluated == 10000);
    }
    SUBCASE("mu = 0.5 below the first critical energy") {
        const LagrangeSet ls = lagrange_points(0.5);
        const SystemSpec spec = SystemSpec::three_body(0.5, ls.values[0] - 0.2, Chart::Moon);
        const CutoffSpec cut = auto_amplitude(spec, 0.4, 0.15, 2000, 12);
        const ScanReport rep = transversality_scan(spec, cut, 10000, 43);
        CHECK(rep.pass);
    }
    SUBCASE("A4 evaluator at the collision locus") {
        const SystemSpec spec = SystemSpec::three_body(0.5, -1.8, Chart::Moon);
        CHECK(std::abs(a4_value({0.0, 0.3, 0.1, 0.2}, spec) - (0.5 + 1.8 - 0.5)) < 1e-12);
    }
}

TEST_CASE("connected-sum section map") {
    const double mu = 0.5;
    const LagrangeSet ls = lagrange_points(mu);
    const double gap = ls.values[1] - ls.values[0];
    const double c = ls.values[0] + 0.25 * gap;
    const SystemSpec spec = SystemSpec::three_body(mu, c, Chart::Moon);
    const CutoffSpec cut{0.15, 0.06, 1.0};

    SUBCASE("planar physical state sits on the binding") {
        TaggedState t;
        t.region = Region::Physical;
        t.u.q = {0.0, 0.55, 0.0};
        t.u.p = {0.3, 0.1, 0.0};
        const SectionValue sv = theta_connected_sum(t, spec, cut);
        CHECK(std::abs(sv.theta) == 0.0);
    }
    SUBCASE("region mismatch paths") {
        TaggedState t;
        t.region = Region::Physical;
        t.u.q = moon_position(mu) + Vec3{1e-9, 0.0, 0.0};
        t.u.p = {0.0, 0.0, 0.0};
        CHECK_THROWS_AS(theta_connected_sum(t, spec, cut), RegionMismatch);

        TaggedState far;
        far.region = Region::MoonChart;
        UnregState u;
        u.q = earth_position(mu) + Vec3{0.05, 0.02, 0.01};
        u.p = {0.1, 0.4, 0.2};
        far.u = u;
        far.r = unreg_to_reg(u, SystemSpec::three_body(mu, c, Chart::Moon));
        CHECK_THROWS_AS(theta_connected_sum(far, spec, cut), RegionMismatch);
    }
    SUBCASE("A4' values at both collision loci") {
        const SystemSpec moon = SystemSpec::three_body(mu, c, Chart::Moon);
        const SystemSpec earth = SystemSpec::three_body(mu, c, Chart::Earth);
        CHECK(std::abs(a4_value({0, 0.1, 0.2, 0.0}, moon) - (mu - c - 0.5)) < 1e-12);
        CHECK(std::abs(a4_value({0, 0.1, 0.2, 0.0}, earth) - ((1.0 - mu) - c - 0.5)) < 1e-12);
        CHECK(a4_value({0, 0.1, 0.2, 0.0}, moon) > 0.0);   // c < -1/2
        CHECK(a4_value({0, 0.1, 0.2, 0.0}, earth) > 0.0);
    }
    SUBCASE("scan: positivity and overlap agreement") {
        const ConnectedSumReport rep = connected_sum_scan(spec, cut, 4000, 77);
        CHECK(rep.scan.pass);
        CHECK(rep.max_overlap_angle_error < 1e-10);
        CHECK(rep.n_moon > 0);
        CHECK(rep.n_earth > 0);
        CHECK(rep.n_physical > 0);
    }
}

TEST_CASE("lefschetz critical points") {
    const auto pts = lefschetz_critical_points(50, 314159);
    REQUIRE(pts.size() == 2);
    for (const RegState& p : pts) {
        CHECK(std::abs(std::abs(p.xi[3]) - 1.0) < 1e-8);
        CHECK(norm(p.eta) < 1e-8);
        for (int i = 0; i < 3; ++i) CHECK(std::abs(p.xi[i]) < 1e-8);
        // critical values +-1
        const Complex val(p.xi[3], p.eta[3]);
        CHECK(std::abs(std::abs(val.real()) - 1.0) < 1e-8);
        // non-degenerate quadratic: full-rank complex Hessian
        CHECK(lefschetz_hessian_det(p) > 1e-3);
    }
    CHECK(pts[0].xi[3] * pts[1].xi[3] < 0.0);  // one at each pole
}

TEST_CASE("binding characterization on 1e5 random ambient states") {
    const CutoffSpec cut{0.4, 0.15, 0.6};
    Rng rng(123);
    for (int k = 0; k < 100000; ++k) {
        RegState x;
        x.xi = rng.unit_vec<4>();
        Vec4 e = rng.gaussian_vec<4>();
        axpy(-dot(x.xi, e), x.xi, e);
        x.eta = e;
        if (k % 7 == 0) { x.xi[3] = 0.0; x.eta[3] = 0.0; }  // exact binding points too
        const double b2 = sqr(x.xi[3]) + sqr(x.eta[3]);
        const double t = std::abs(theta_interpolated_value(x, cut));
        if (b2 == 0.0) {
            CHECK(t == 0.0);
        } else if (b2 > 1e-24) {
            CHECK(t > 0.0);
        }
    }
}
