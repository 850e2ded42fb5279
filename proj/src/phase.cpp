#include "cr3bp/phase.hpp"

namespace cr3bp {

double SystemSpec::coupling() const {
    if (stark_zeeman) return stark_zeeman->g;
    switch (chart) {
        case Chart::Moon: return mu;
        case Chart::Earth: return 1.0 - mu;
        case Chart::SingleCenter: return mu;
    }
    return mu;
}

double SystemSpec::secondary_coupling() const {
    if (stark_zeeman) return 0.0;
    switch (chart) {
        case Chart::Moon: return 1.0 - mu;
        case Chart::Earth: return mu;
        case Chart::SingleCenter: return 0.0;
    }
    return 0.0;
}

Vec3 SystemSpec::primary() const {
    if (stark_zeeman) return {0.0, 0.0, 0.0};
    switch (chart) {
        case Chart::Moon: return moon_position(mu);
        case Chart::Earth: return earth_position(mu);
        case Chart::SingleCenter: return {0.0, 0.0, 0.0};
    }
    return {0.0, 0.0, 0.0};
}

Vec3 SystemSpec::other_offset() const {
    switch (chart) {
        case Chart::Moon: return {1.0, 0.0, 0.0};    // e - m
        case Chart::Earth: return {-1.0, 0.0, 0.0};  // m - e
        case Chart::SingleCenter: return {0.0, 0.0, 0.0};
    }
    return {0.0, 0.0, 0.0};
}

SystemSpec SystemSpec::three_body(double mu, double c, Chart chart) {
    if (!(mu > 0.0 && mu <= 1.0)) throw OutOfRange("mass ratio must lie in (0, 1]");
    SystemSpec s;
    s.mu = mu;
    s.c = c;
    s.chart = chart;
    return s;
}

SystemSpec SystemSpec::kepler(double c) {
    SystemSpec s;
    s.mu = 1.0;
    s.c = c;
    s.chart = Chart::SingleCenter;
    StarkZeemanSpec sz;
    sz.g = 1.0;
    sz.A = [](const Vec3&) { return Vec3{0.0, 0.0, 0.0}; };
    sz.dA = [](const Vec3&) { return Mat3{Vec3{0, 0, 0}, Vec3{0, 0, 0}, Vec3{0, 0, 0}}; };
    sz.V1 = [](const Vec3&) { return 0.0; };
    sz.dV1 = [](const Vec3&) { return Vec3{0.0, 0.0, 0.0}; };
    s.stark_zeeman = std::move(sz);
    return s;
}

SystemSpec SystemSpec::round_sphere() { return kepler(-0.5); }

RegState project_to_TS3(const Vec4& xi, const Vec4& eta) {
    const double n = norm(xi);
    if (n < 1e-9) throw DegenerateInput("project_to_TS3: ||xi|| < 1e-9");
    RegState r;
    r.xi = (1.0 / n) * xi;
    r.eta = eta;
    axpy(-dot(r.xi, r.eta), r.xi, r.eta);
    axpy(-dot(r.xi, r.eta), r.xi, r.eta);  // second pass clears round-off
    return r;
}

double constraint_residual(const RegState& r) {
    const double a = std::abs(norm2(r.xi) - 1.0);
    const double b = std::abs(dot(r.xi, r.eta));
    return a > b ? a : b;
}

RegState unreg_to_reg(const UnregState& s, const SystemSpec& spec) {
    const Vec3 o = spec.primary();
    const Vec3 y = s.q - o;
    const Vec3 x = -1.0 * s.p;
    const double x2 = norm2(x);
    const double xy = dot(x, y);
    RegState r;
    r.xi[0] = (x2 - 1.0) / (x2 + 1.0);
    const double sx = 2.0 / (x2 + 1.0);
    for (int i = 0; i < 3; ++i) r.xi[i + 1] = sx * x[i];
    r.eta[0] = xy;
    const double sy = 0.5 * (x2 + 1.0);
    for (int i = 0; i < 3; ++i) r.eta[i + 1] = sy * y[i] - xy * x[i];
    return project_to_TS3(r.xi, r.eta);
}

Vec3 chart_position(const RegState& r) {
    const double s = 1.0 - r.xi[0];
    Vec3 y;
    for (int i = 0; i < 3; ++i) y[i] = r.eta[0] * r.xi[i + 1] + s * r.eta[i + 1];
    return y;
}

UnregState reg_to_unreg(const RegState& r, const SystemSpec& spec) {
    const double s = 1.0 - r.xi[0];
    if (s < 1e-9) throw CollisionLocus("reg_to_unreg: state on the collision locus");
    UnregState u;
    const Vec3 o = spec.primary();
    const Vec3 y = chart_position(r);
    for (int i = 0; i < 3; ++i) {
        u.p[i] = -r.xi[i + 1] / s;  // p = -x
        u.q[i] = y[i] + o[i];
    }
    return u;
}

TangentUnreg reg_to_unreg_tangent(const RegState& r, const TangentReg& v) {
    const double s = 1.0 - r.xi[0];
    if (s < 1e-9) throw CollisionLocus("reg_to_unreg_tangent: state on the collision locus");
    TangentUnreg out;
    for (int i = 0; i < 3; ++i) {
        // x_i = xi_i / (1 - xi0), p = -x
        const double dx = (v.dxi[i + 1] * s + r.xi[i + 1] * v.dxi[0]) / (s * s);
        out.dp[i] = -dx;
        // y_i = eta0 xi_i + (1 - xi0) eta_i
        out.dq[i] = v.deta[0] * r.xi[i + 1] + r.eta[0] * v.dxi[i + 1] -
                    v.dxi[0] * r.eta[i + 1] + s * v.deta[i + 1];
    }
    return out;
}

}  // namespace cr3bp
