#include "cr3bp/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "cr3bp/dynamics.hpp"

namespace cr3bp {

double effective_potential(const Vec3& q, double mu) {
    const double dm = norm(q - moon_position(mu));
    const double de = norm(q - earth_position(mu));
    return -0.5 * (q[0] * q[0] + q[1] * q[1]) - mu / dm - (1.0 - mu) / de;
}

namespace {

// x-axis gradient of the effective potential:
//   g(x) = -x + mu (x - m1)/|x - m1|^3 + (1-mu)(x - e1)/|x - e1|^3.
double axis_gradient(double x, double mu) {
    const double m1 = mu - 1.0, e1 = mu;
    const double dm = x - m1, de = x - e1;
    return -x + mu * dm / std::pow(std::abs(dm), 3) + (1.0 - mu) * de / std::pow(std::abs(de), 3);
}

// Bisection on [a, b] (gradient changes sign there), then Newton polish.
double collinear_root(double a, double b, double mu) {
    double fa = axis_gradient(a, mu);
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = axis_gradient(m, mu);
        if ((fa < 0.0) == (fm < 0.0)) { a = m; fa = fm; } else { b = m; }
        if (b - a < 1e-13) break;
    }
    double x = 0.5 * (a + b);
    for (int it = 0; it < 8; ++it) {
        const double h = 1e-7;
        const double g = axis_gradient(x, mu);
        const double dg = (axis_gradient(x + h, mu) - axis_gradient(x - h, mu)) / (2.0 * h);
        const double step = g / dg;
        if (std::abs(step) > 1e-2) break;
        x -= step;
        if (std::abs(step) < 1e-15) break;
    }
    return x;
}

}  // namespace

LagrangeSet lagrange_points(double mu) {
    if (!(mu > 0.0 && mu < 1.0)) throw OutOfRange("lagrange_points: mu must lie in (0,1)");
    const double m1 = mu - 1.0, e1 = mu;
    const double delta = 1e-6;

    std::vector<Vec3> pts;
    pts.push_back({collinear_root(-2.0, m1 - delta, mu), 0.0, 0.0});
    pts.push_back({collinear_root(m1 + delta, e1 - delta, mu), 0.0, 0.0});
    pts.push_back({collinear_root(e1 + delta, 2.0, mu), 0.0, 0.0});
    pts.push_back({mu - 0.5, std::sqrt(3.0) / 2.0, 0.0});
    pts.push_back({mu - 0.5, -std::sqrt(3.0) / 2.0, 0.0});

    std::array<std::pair<double, Vec3>, 5> ranked;
    for (int i = 0; i < 5; ++i) ranked[i] = {effective_potential(pts[i], mu), pts[i]};
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    LagrangeSet out;
    for (int i = 0; i < 5; ++i) {
        out.points[i] = ranked[i].second;
        out.values[i] = ranked[i].first;
    }
    return out;
}

namespace {

// Flood fill of the admissible set { U <= c } on a fixed grid, seeded at
// the two primaries and at the box boundary.  Component ids: 0 unvisited
// admissible, 1.. assigned.
struct HillGrid {
    static constexpr int N1 = 121, N2 = 121, N3 = 61;
    static constexpr double X = 2.5, Z = 1.25;
    std::vector<int> comp;  // -1 forbidden, 0 unvisited, >0 component id
    double mu, c;

    int idx(int i, int j, int k) const { return (i * N2 + j) * N3 + k; }
    Vec3 point(int i, int j, int k) const {
        return {-X + 2.0 * X * i / (N1 - 1), -X + 2.0 * X * j / (N2 - 1),
                -Z + 2.0 * Z * k / (N3 - 1)};
    }
    bool admissible(int i, int j, int k) const {
        return effective_potential(point(i, j, k), mu) <= c;
    }

    HillGrid(double mu_, double c_) : comp(N1 * N2 * N3, 0), mu(mu_), c(c_) {
        for (int i = 0; i < N1; ++i)
            for (int j = 0; j < N2; ++j)
                for (int k = 0; k < N3; ++k)
                    if (!admissible(i, j, k)) comp[idx(i, j, k)] = -1;
    }

    void fill_from(int i0, int j0, int k0, int id) {
        if (comp[idx(i0, j0, k0)] != 0) return;
        std::queue<std::array<int, 3>> q;
        q.push({i0, j0, k0});
        comp[idx(i0, j0, k0)] = id;
        while (!q.empty()) {
            auto [i, j, k] = q.front();
            q.pop();
            const int di[6] = {1, -1, 0, 0, 0, 0};
            const int dj[6] = {0, 0, 1, -1, 0, 0};
            const int dk[6] = {0, 0, 0, 0, 1, -1};
            for (int n = 0; n < 6; ++n) {
                const int a = i + di[n], b = j + dj[n], d = k + dk[n];
                if (a < 0 || a >= N1 || b < 0 || b >= N2 || d < 0 || d >= N3) continue;
                if (comp[idx(a, b, d)] == 0) {
                    comp[idx(a, b, d)] = id;
                    q.push({a, b, d});
                }
            }
        }
    }

    std::array<int, 3> cell(const Vec3& q) const {
        auto clampi = [](int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); };
        const int i = clampi(static_cast<int>(std::lround((q[0] + X) / (2.0 * X) * (N1 - 1))), N1);
        const int j = clampi(static_cast<int>(std::lround((q[1] + X) / (2.0 * X) * (N2 - 1))), N2);
        const int k = clampi(static_cast<int>(std::lround((q[2] + Z) / (2.0 * Z) * (N3 - 1))), N3);
        return {i, j, k};
    }
};

}  // namespace

struct HillClassifier::Impl {
    HillGrid grid;
    int moon_id = 0, earth_id = 0;

    Impl(double mu, double c) : grid(mu, c) {
        const auto mcell = grid.cell(moon_position(mu));
        const auto ecell = grid.cell(earth_position(mu));
        grid.fill_from(mcell[0], mcell[1], mcell[2], 1);
        grid.fill_from(ecell[0], ecell[1], ecell[2], 2);
        // Boundary-connected admissible cells belong to the unbounded region.
        for (int i = 0; i < HillGrid::N1; ++i)
            for (int j = 0; j < HillGrid::N2; ++j)
                for (int k = 0; k < HillGrid::N3; ++k)
                    if (i == 0 || i == HillGrid::N1 - 1 || j == 0 || j == HillGrid::N2 - 1 ||
                        k == 0 || k == HillGrid::N3 - 1)
                        grid.fill_from(i, j, k, 3);
        moon_id = grid.comp[grid.idx(mcell[0], mcell[1], mcell[2])];
        earth_id = grid.comp[grid.idx(ecell[0], ecell[1], ecell[2])];
    }
};

HillClassifier::HillClassifier(double mu, double c) : impl_(new Impl(mu, c)) {}
HillClassifier::~HillClassifier() { delete impl_; }

HillLabel HillClassifier::label(const Vec3& q) const {
    const HillGrid& grid = impl_->grid;
    if (effective_potential(q, grid.mu) > grid.c) return HillLabel::Forbidden;
    if (std::abs(q[0]) > HillGrid::X || std::abs(q[1]) > HillGrid::X ||
        std::abs(q[2]) > HillGrid::Z) {
        return HillLabel::Unbounded;  // admissible outside the box is the far field
    }

    const auto qc = grid.cell(q);
    int id = grid.comp[grid.idx(qc[0], qc[1], qc[2])];
    if (id <= 0) {
        // Cell quantization put an admissible q on a forbidden cell; nudge to
        // the nearest classified neighbour.
        for (int r = 1; r <= 2 && id <= 0; ++r)
            for (int a = -r; a <= r && id <= 0; ++a)
                for (int b = -r; b <= r && id <= 0; ++b)
                    for (int d = -r; d <= r && id <= 0; ++d) {
                        const int i = qc[0] + a, j = qc[1] + b, k = qc[2] + d;
                        if (i < 0 || i >= HillGrid::N1 || j < 0 || j >= HillGrid::N2 || k < 0 ||
                            k >= HillGrid::N3) continue;
                        if (grid.comp[grid.idx(i, j, k)] > 0) id = grid.comp[grid.idx(i, j, k)];
                    }
        if (id <= 0) return HillLabel::Forbidden;
    }

    const bool has_moon = (id == impl_->moon_id);
    const bool has_earth = (id == impl_->earth_id);
    if (has_moon && has_earth) return HillLabel::MergedComponent;
    if (has_moon) return HillLabel::MoonComponent;
    if (has_earth) return HillLabel::EarthComponent;
    return HillLabel::Unbounded;
}

HillLabel hill_label(const Vec3& q, double c, const SystemSpec& spec) {
    return HillClassifier(spec.mu, c).label(q);
}

}  // namespace cr3bp
