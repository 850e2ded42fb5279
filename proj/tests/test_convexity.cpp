#include "doctest.h"

#include "cr3bp/convexity.hpp"
#include "cr3bp/equilibria.hpp"
#include "cr3bp/rng.hpp"
#include "cr3bp/section_maps.hpp"

using namespace cr3bp;

namespace {

RegState random_binding_state(Rng& rng, const SystemSpec& spec) {
    while (true) {
        Vec4 xi = rng.gaussian_vec<4>();
        xi[3] = 0.0;
        const double n = norm(xi);
        if (n < 1e-9) continue;
        RegState r;
        r.xi = (1.0 / n) * xi;
        Vec4 e = rng.gaussian_vec<4>();
        e[3] = 0.0;
        axpy(-dot(r.xi, e), r.xi, e);
        if (norm(e) < 1e-9) continue;
        r.eta = e;
        try {
            return scale_eta_to_level(r, spec);
        } catch (const Error&) {
            continue;
        }
    }
}

}  // namespace

TEST_CASE("hessian_S: collision-locus values") {
    const double mu = 0.5, c = -1.8;
    const SystemSpec spec = SystemSpec::three_body(mu, c, Chart::Moon);
    RegState coll;
    coll.xi = {1.0, 0.0, 0.0, 0.0};
    coll.eta = {0.0, 0.3, -0.1, 0.0};
    const NormalHessian H = hessian_S(coll, spec);
    CHECK(std::abs(H.s12) < 1e-15);  // S diagonal on the collision locus
    CHECK(std::abs(H.s11 - 1.0) < 1e-15);
    CHECK(std::abs(H.s22 - norm2(coll.eta) * (-c - 0.5 + mu)) < 1e-14);

    // On Sigma_c the locus has ||eta|| = mu, so S22 = mu^2 (mu - c - 1/2).
    RegState on;
    on.xi = {1.0, 0.0, 0.0, 0.0};
    on.eta = {0.0, mu, 0.0, 0.0};
    CHECK(std::abs(Q_reg(on, spec) - spec.q_level()) < 1e-15);
    const NormalHessian Hs = hessian_S(on, spec);
    CHECK(std::abs(Hs.s22 - mu * mu * (mu - c - 0.5)) < 1e-14);
    CHECK(std::abs(Hs.s11 - 1.0) < 1e-15);
}

TEST_CASE("hessian_S: closed form matches the normal linearization of X_Q") {
    const SystemSpec spec = SystemSpec::three_body(0.5, -1.8, Chart::Moon);
    Rng rng(808);
    for (int k = 0; k < 100; ++k) {
        const RegState b = random_binding_state(rng, spec);
        const NormalHessian A = hessian_S(b, spec);
        const NormalHessian B = hessian_S_fd(b, spec);
        const double scale = std::max({1.0, std::abs(A.s11), std::abs(A.s22)});
        CHECK(std::abs(A.s11 - B.s11) < 1e-5 * scale);
        CHECK(std::abs(A.s22 - B.s22) < 1e-5 * scale);
        CHECK(std::abs(A.s12 - B.s12) < 1e-5 * scale);
    }
    RegState off;
    off.xi = {0.6, 0.8, 0.0, 0.1};
    off.eta = {0.0, 0.0, 0.2, 0.0};
    CHECK_THROWS_AS(hessian_S(off, spec), OffBinding);
}

TEST_CASE("unreg_rotation_rate") {
    const SystemSpec one = SystemSpec::three_body(1.0, -2.0, Chart::Moon);
    UnregState s;
    s.q = {1.0, 0.0, 0.0};
    s.p = {0.2, 0.3, 0.0};
    const RotationRates rr = unreg_rotation_rate(s, one);
    CHECK(rr.lambda1 == 1.0);
    CHECK(rr.lambda2 == doctest::Approx(1.0).epsilon(1e-14));

    const SystemSpec spec = SystemSpec::three_body(0.3, -2.0, Chart::Moon);
    UnregState t;
    t.q = {0.4, 0.5, 0.0};
    t.p = {0.0, 0.0, 0.0};
    const RotationRates r2 = unreg_rotation_rate(t, spec);
    CHECK(r2.lambda2 > 0.0);

    UnregState close;
    close.q = moon_position(0.3) + Vec3{1e-7, 0.0, 0.0};
    close.p = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(unreg_rotation_rate(close, spec), CollisionInput);

    UnregState spatial_state;
    spatial_state.q = {0.4, 0.5, 0.1};
    spatial_state.p = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(unreg_rotation_rate(spatial_state, spec), OffBinding);
}

TEST_CASE("convexity_certificate") {
    SUBCASE("rotating Kepler, c = -2") {
        const SystemSpec spec = SystemSpec::three_body(1.0, -2.0, Chart::Moon);
        const ConvexityReport rep = convexity_certificate(spec, 500, 1);
        CHECK(rep.pass);
        // At the collision locus S22 = g^2 (mu - c - 1/2) = 2.5 with ||eta|| = 1.
        RegState coll;
        coll.xi = {1.0, 0.0, 0.0, 0.0};
        coll.eta = {0.0, 1.0, 0.0, 0.0};
        CHECK(std::abs(hessian_S(coll, spec).s22 - 2.5) < 1e-14);
    }
    SUBCASE("mu = 0.5 just below H(L1)") {
        const LagrangeSet ls = lagrange_points(0.5);
        const SystemSpec spec = SystemSpec::three_body(0.5, ls.values[0] - 0.1, Chart::Moon);
        const ConvexityReport rep = convexity_certificate(spec, 500, 2);
        CHECK(rep.pass);
        CHECK(rep.eigen_min > 0.0);
    }
    SUBCASE("contrived energy above mu - 1/2 fails at the collision locus") {
        const SystemSpec bad = SystemSpec::three_body(0.5, 0.5 - 0.5 + 0.1, Chart::Moon);
        const ConvexityReport rep = convexity_certificate(bad, 200, 3);
        CHECK(!rep.pass);
        CHECK(rep.eigen_min < 0.0);
    }
}

TEST_CASE("positive eigen_min bounds the measured near-binding angular speed") {
    const SystemSpec spec = SystemSpec::three_body(0.5, -1.9, Chart::Moon);
    const SectionMap g = SectionMap::geodesic();
    Rng rng(55);
    for (int k = 0; k < 30; ++k) {
        const RegState b = random_binding_state(rng, spec);
        const NormalHessian H = hessian_S(b, spec);
        REQUIRE(H.eigen_min > 0.0);
        double measured_min = 1e300;
        for (int dir = 0; dir < 12; ++dir) {
            const double a = 2.0 * kPi * dir / 12.0;
            RegState p = b;
            p.xi[3] += 1e-4 * std::cos(a);
            p.eta[3] += 1e-4 * std::sin(a);
            p = project_to_TS3(p.xi, p.eta);
            const double b2 = sqr(p.xi[3]) + sqr(p.eta[3]);
            measured_min = std::min(measured_min, g.pairing(p, spec) / b2);
        }
        CHECK(measured_min >= H.eigen_min - 1e-3);
    }
}
