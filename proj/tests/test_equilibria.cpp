#include "doctest.h"

#include "cr3bp/dynamics.hpp"
#include "cr3bp/equilibria.hpp"

using namespace cr3bp;

namespace {

// Analytic gradient residual of the effective potential.
double grad_residual(const Vec3& q, double mu) {
    const Vec3 rm = q - moon_position(mu);
    const Vec3 re = q - earth_position(mu);
    const double am = mu / std::pow(norm(rm), 3);
    const double ae = (1.0 - mu) / std::pow(norm(re), 3);
    Vec3 g{-q[0], -q[1], 0.0};
    for (int i = 0; i < 3; ++i) g[i] += am * rm[i] + ae * re[i];
    return norm(g);
}

}  // namespace

TEST_CASE("lagrange_points: symmetry values at mu = 1/2") {
    const LagrangeSet ls = lagrange_points(0.5);
    // L1 is the origin by symmetry.
    CHECK(std::abs(ls.points[0][0]) < 1e-12);
    CHECK(std::abs(ls.points[0][1]) < 1e-12);
    CHECK(ls.values[0] == doctest::Approx(-2.0).epsilon(1e-12));
    // Equilateral points at (0, +-sqrt(3)/2, 0) with tiny gradient residual.
    bool found = false;
    for (int i = 3; i < 5; ++i) {
        if (std::abs(ls.points[i][1] - std::sqrt(3.0) / 2.0) < 1e-12 &&
            std::abs(ls.points[i][0]) < 1e-12)
            found = true;
    }
    CHECK(found);
    for (int i = 0; i < 5; ++i) CHECK(grad_residual(ls.points[i], 0.5) < 1e-10);
}

TEST_CASE("lagrange_points: ordering, stored values, H(L1) <= -3/2") {
    for (double mu : {0.1, 0.3, 0.5, 0.7, 0.9, 0.999}) {
        const LagrangeSet ls = lagrange_points(mu);
        const SystemSpec spec = SystemSpec::three_body(mu, -2.0, Chart::Moon);
        for (int i = 0; i < 5; ++i) {
            if (i) CHECK(ls.values[i] >= ls.values[i - 1]);
            CHECK(grad_residual(ls.points[i], mu) < 1e-10);
            // stored value equals jacobi_H at zero rotating-frame velocity
            UnregState s;
            s.q = ls.points[i];
            s.p = zero_velocity_momentum(ls.points[i]);
            CHECK(std::abs(jacobi_H(s, spec) - ls.values[i]) < 1e-12);
        }
        CHECK(ls.values[0] <= -1.5);
        // L4/L5 share their value.
        CHECK(ls.values[4] == doctest::Approx(ls.values[3]).epsilon(1e-13));
    }
    CHECK_THROWS_AS(lagrange_points(0.0), OutOfRange);
    CHECK_THROWS_AS(lagrange_points(1.0), OutOfRange);
}

TEST_CASE("hill_label") {
    const double mu = 0.45;
    const SystemSpec spec = SystemSpec::three_body(mu, -2.0, Chart::Moon);
    const LagrangeSet ls = lagrange_points(mu);
    const double h1 = ls.values[0];

    SUBCASE("near a primary below H(L1)") {
        CHECK(hill_label(moon_position(mu) + Vec3{1e-3, 0.0, 0.0}, h1 - 0.1, spec) ==
              HillLabel::MoonComponent);
        CHECK(hill_label(earth_position(mu) + Vec3{1e-3, 0.0, 0.0}, h1 - 0.1, spec) ==
              HillLabel::EarthComponent);
    }
    SUBCASE("far field is unbounded") {
        CHECK(hill_label({10.0, 0.0, 0.0}, h1 - 0.1, spec) == HillLabel::Unbounded);
    }
    SUBCASE("L1 just above the first critical value sits in the merged lobe") {
        CHECK(hill_label(ls.points[0], h1 + 0.05, spec) == HillLabel::MergedComponent);
    }
    SUBCASE("forbidden zone") {
        // Between the lobes and the outer oval, on the y-axis.
        CHECK(hill_label({0.0, 0.9, 0.0}, h1 - 0.1, spec) == HillLabel::Forbidden);
    }
}
