#include "cr3bp/sections.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "cr3bp/equilibria.hpp"
#include "cr3bp/parallel.hpp"

#include "json.hpp"

namespace cr3bp {

// ---- section values -------------------------------------------------------

Complex theta_physical(const RegState& r) {
    const double s = 1.0 - r.xi[0];
    return Complex(r.xi[3], s * r.eta[0] * r.xi[3] + s * s * r.eta[3]);
}

Complex theta_geodesic(const RegState& r) { return Complex(r.eta[3], r.xi[3]); }

Complex theta_interpolated_value(const RegState& r, const CutoffSpec& cut) {
    const double s = 1.0 - r.xi[0];
    return Complex(r.xi[3],
                   -(s * r.eta[0] * r.xi[3] + (s * s + cut.rho(r.xi[0])) * r.eta[3]));
}

Complex SectionMap::value(const RegState& r) const {
    return kind_ == Kind::Geodesic ? theta_geodesic(r) : theta_interpolated_value(r, cut_);
}

Complex SectionMap::d_value(const RegState& r, const TangentReg& v) const {
    if (kind_ == Kind::Geodesic) return Complex(v.deta[3], v.dxi[3]);
    const double s = 1.0 - r.xi[0];
    const double ds = -v.dxi[0];
    const double dre = v.dxi[3];
    const double dim = -(ds * r.eta[0] * r.xi[3] + s * v.deta[0] * r.xi[3] +
                         s * r.eta[0] * v.dxi[3] +
                         (2.0 * s * ds + cut_.drho(r.xi[0]) * v.dxi[0]) * r.eta[3] +
                         (s * s + cut_.rho(r.xi[0])) * v.deta[3]);
    return Complex(dre, dim);
}

double SectionMap::pairing(const RegState& r, const TangentReg& v) const {
    const Complex th = value(r);
    const Complex dth = d_value(r, v);
    return th.real() * dth.imag() - th.imag() * dth.real();
}

double SectionMap::pairing(const RegState& r, const SystemSpec& spec) const {
    return pairing(r, X_Q(r, spec));
}

double SectionMap::angle(const RegState& r) const {
    double a = std::arg(value(r));
    if (a < 0.0) a += 2.0 * kPi;
    return a;
}

// ---- pairing routes --------------------------------------------------------

namespace {

// Geodesic pairing Omega_g(X_Q) from the closed contraction:
//   f^2 eta3^2 + ||eta||^2 f (f + f_eta.eta - f_xi.xi) xi3^2
//   + ||eta||^2 f (f_eta3 eta3 + f_xi3 xi3 - 2 xi3 eta3 f_eta.xi).
double omega_g_closed(const RegState& r, const FieldEval& fe) {
    const double n2 = norm2(r.eta);
    const double fe_xi = dot(fe.f_eta, r.xi);
    const double fe_eta = dot(fe.f_eta, r.eta);
    const double fx_xi = dot(fe.f_xi, r.xi);
    return fe.f * fe.f * sqr(r.eta[3]) +
           n2 * fe.f * (fe.f + fe_eta - fx_xi) * sqr(r.xi[3]) +
           n2 * fe.f *
               (fe.f_eta[3] * r.eta[3] + fe.f_xi[3] * r.xi[3] -
                2.0 * r.xi[3] * r.eta[3] * fe_xi);
}

// Physical pairing (1-xi0)^2 Omega_p^u(X_Q) written without the collision
// singularity: with y the chart position and g, gS the couplings,
//   g ||eta|| (1-xi0) xi3^2 + g^2 y3^2/||eta||^2
//   + g (1-xi0)^3 ||eta|| y3 dV1/dq3(y).
double omega_p_closed(const RegState& r, const SystemSpec& spec) {
    const double g = spec.coupling();
    const double s = 1.0 - r.xi[0];
    const double en = norm(r.eta);
    const Vec3 y = chart_position(r);
    double dV1_dq3;
    if (spec.stark_zeeman) {
        dV1_dq3 = spec.stark_zeeman->dV1(y)[2];
    } else {
        const Vec3 d = spec.other_offset();
        const Vec3 w = y - d;
        const double dw = norm(w);
        dV1_dq3 = spec.secondary_coupling() * y[2] / (dw * dw * dw);
    }
    return g * en * s * sqr(r.xi[3]) + g * g * sqr(y[2]) / (en * en) +
           g * s * s * s * en * y[2] * dV1_dq3;
}

}  // namespace

double pairing_assembled(const RegState& r, const SystemSpec& spec, const CutoffSpec& cut) {
    const FieldEval fe = eval_field(r, spec);
    const TangentReg v = X_Q(r, fe);
    const double rho = cut.rho(r.xi[0]);
    const double drho_X = cut.drho(r.xi[0]) * v.dxi[0];
    return omega_p_closed(r, spec) + rho * omega_g_closed(r, fe) -
           r.xi[3] * r.eta[3] * drho_X;
}

double pairing_flow_fd(const RegState& r, const SystemSpec& spec, const SectionMap& section,
                       const IntegratorConfig& cfg) {
    const double h = 1e-4;
    const Complex th = section.value(r);
    const Complex thp = section.value(integrate(r, h, spec, cfg).end().state);
    const Complex thm = section.value(integrate(r, -h, spec, cfg).end().state);
    const double dre = (thp.real() - thm.real()) / (2.0 * h);
    const double dim = (thp.imag() - thm.imag()) / (2.0 * h);
    return th.real() * dim - th.imag() * dre;
}

SectionValue theta_interpolated(const RegState& r, const SystemSpec& spec,
                                const CutoffSpec& cut) {
    cut.validate();
    const SectionMap section = SectionMap::interpolated(cut);
    SectionValue out;
    out.theta = section.value(r);
    out.angle = section.angle(r);
    out.pairing = section.pairing(r, spec);
    const double b2 = sqr(r.xi[3]) + sqr(r.eta[3]);
    if (b2 > 1e-12) {
        out.normalized_pairing = out.pairing / b2;
    } else {
        // On the binding the quotient is 0/0; report the two-sided limit
        // from samples at radius 1e-4 in the (xi3, eta3) plane.
        const double rad = 1e-4;
        double acc = 0.0;
        int cnt = 0;
        for (int k = 0; k < 8; ++k) {
            const double a = 2.0 * kPi * k / 8.0;
            RegState p = r;
            p.xi[3] += rad * std::cos(a);
            p.eta[3] += rad * std::sin(a);
            p = project_to_TS3(p.xi, p.eta);
            const double nb = sqr(p.xi[3]) + sqr(p.eta[3]);
            if (nb < 1e-12) continue;
            acc += section.pairing(p, spec) / nb;
            ++cnt;
        }
        out.normalized_pairing = cnt ? acc / cnt : 0.0;
    }
    return out;
}

// ---- Sigma_c sampling ------------------------------------------------------

SigmaSampler::SigmaSampler(const SystemSpec& spec) : spec_(spec) {
    lobe_radius_ = 1e30;
    if (spec.is_three_body()) {
        if (spec.mu < 1.0) {
            const LagrangeSet ls = lagrange_points(spec.mu);
            const double o1 = spec.primary()[0];
            // Collinear saddles adjacent to the chart primary bound the lobe.
            double below = -1e30, above = 1e30;
            for (int i = 0; i < 5; ++i) {
                const Vec3& pt = ls.points[i];
                if (std::abs(pt[1]) > 1e-9) continue;  // triangular points
                if (pt[0] < o1) below = std::max(below, pt[0]);
                if (pt[0] > o1) above = std::min(above, pt[0]);
            }
            lobe_radius_ = 1.05 * std::max(o1 - below, above - o1);
        } else {
            // mu = 1: bisect -r^2/2 - 1/r = c on (0, 1] when c < -3/2.
            if (spec.c < -1.5) {
                double lo = 1e-6, hi = 1.0;
                for (int it = 0; it < 100; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double u = -0.5 * mid * mid - 1.0 / mid;
                    (u <= spec.c ? lo : hi) = mid;
                }
                lobe_radius_ = 1.1 * lo;
            }
        }
    }
}

bool SigmaSampler::draw(Rng& rng, RegState& out) const {
    RegState r;
    r.xi = rng.unit_vec<4>();
    Vec4 ed = rng.gaussian_vec<4>();
    axpy(-dot(r.xi, ed), r.xi, ed);
    const double n = norm(ed);
    if (n < 1e-9) return false;
    r.eta = (1.0 / n) * ed;
    try {
        out = scale_eta_to_level(r, spec_);
    } catch (const Error&) {
        return false;
    }
    if ((1.0 - out.xi[0]) * norm(out.eta) > lobe_radius_) return false;
    return true;
}

// ---- transversality scan ---------------------------------------------------

namespace {

ScanReport reduce_scan(const std::vector<RegState>& states, const std::vector<double>& normalized,
                       int n_requested, int n_failed) {
    ScanReport rep;
    rep.n_requested = n_requested;
    rep.n_evaluated = static_cast<int>(states.size());
    rep.n_failed = n_failed;
    rep.min_normalized = 1e300;
    rep.max_normalized = -1e300;
    int argmin = 0;
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        if (normalized[i] < rep.min_normalized) {
            rep.min_normalized = normalized[i];
            argmin = static_cast<int>(i);
        }
        rep.max_normalized = std::max(rep.max_normalized, normalized[i]);
    }
    if (!states.empty()) rep.argmin = states[argmin];
    rep.hist_lo = rep.min_normalized;
    rep.hist_hi = rep.max_normalized;
    rep.histogram.assign(40, 0);
    const double span = std::max(rep.hist_hi - rep.hist_lo, 1e-300);
    for (double v : normalized) {
        int b = static_cast<int>((v - rep.hist_lo) / span * 40.0);
        b = std::clamp(b, 0, 39);
        ++rep.histogram[b];
    }
    rep.pass = rep.min_normalized > 0.0;
    return rep;
}

}  // namespace

ScanReport transversality_scan(const SystemSpec& spec, const CutoffSpec& cut, int n_samples,
                               std::uint64_t seed) {
    cut.validate();
    Rng rng(seed);
    SigmaSampler sampler(spec);

    std::vector<RegState> states;
    states.reserve(n_samples);
    int failures = 0;
    const int budget = n_samples + std::max(n_samples / 50, 16);
    int attempts = 0;
    while (static_cast<int>(states.size()) < n_samples) {
        if (++attempts > budget)
            throw SamplingFailure("transversality_scan: > 1% of draws rejected");
        RegState s;
        if (sampler.draw(rng, s)) states.push_back(s); else ++failures;
    }
    if (failures > n_samples / 100)
        throw SamplingFailure("transversality_scan: > 1% of draws rejected");

    std::vector<double> normalized(states.size());
    const SectionMap section = SectionMap::interpolated(cut);
    parallel_for(static_cast<int>(states.size()), [&](int i) {
        const RegState& s = states[i];
        const double b2 = sqr(s.xi[3]) + sqr(s.eta[3]);
        normalized[i] = section.pairing(s, spec) / std::max(b2, 1e-300);
    });
    return reduce_scan(states, normalized, n_samples, failures);
}

CutoffSpec auto_amplitude(const SystemSpec& spec, double delta, double epsilon, int presamples,
                          std::uint64_t seed) {
    CutoffSpec cut{delta, epsilon, 1.0};
    cut.validate();
    Rng rng(seed);
    SigmaSampler sampler(spec);
    double c_eps = 1e300;
    double k_max = 0.0;
    int got = 0, guard = 0;
    while (got < presamples && ++guard < 4 * presamples + 64) {
        RegState s;
        if (!sampler.draw(rng, s)) continue;
        ++got;
        const double b2 = sqr(s.xi[3]) + sqr(s.eta[3]);
        if (b2 < 1e-14) continue;
        if (s.xi[0] <= 1.0 - epsilon)
            c_eps = std::min(c_eps, omega_p_closed(s, spec) / b2);
        const TangentReg v = X_Q(s, spec);
        k_max = std::max(k_max, std::abs(cut.drho(s.xi[0]) * v.dxi[0]));
    }
    if (c_eps < 1e300 && c_eps > 0.0 && k_max > 1e-12)
        cut.amplitude = c_eps / k_max;
    return cut;
}

// ---- connected-sum section -------------------------------------------------

namespace {

SystemSpec chart_spec(const SystemSpec& base, Region region) {
    return SystemSpec::three_body(base.mu, base.c,
                                  region == Region::MoonChart ? Chart::Moon : Chart::Earth);
}

Complex physical_value(const UnregState& u) { return Complex(-u.p[2], -u.q[2]); }

}  // namespace

TaggedState tag_state(const UnregState& u, const SystemSpec& spec, double chart_radius) {
    TaggedState t;
    t.u = u;
    const double dm = norm(u.q - moon_position(spec.mu));
    const double de = norm(u.q - earth_position(spec.mu));
    if (dm < chart_radius) {
        t.region = Region::MoonChart;
        t.r = unreg_to_reg(u, chart_spec(spec, Region::MoonChart));
    } else if (de < chart_radius) {
        t.region = Region::EarthChart;
        t.r = unreg_to_reg(u, chart_spec(spec, Region::EarthChart));
    } else {
        t.region = Region::Physical;
    }
    return t;
}

SectionValue theta_connected_sum(const TaggedState& s, const SystemSpec& spec,
                                 const CutoffSpec& cut) {
    cut.validate();
    if (s.region == Region::Physical) {
        const double dm = norm(s.u.q - moon_position(spec.mu));
        const double de = norm(s.u.q - earth_position(spec.mu));
        if (dm < 1e-6 || de < 1e-6)
            throw RegionMismatch("physical tag at a collision locus");
        SectionValue out;
        out.theta = physical_value(s.u);
        double a = std::arg(out.theta);
        if (a < 0.0) a += 2.0 * kPi;
        out.angle = a;
        const double F = spec.mu / (dm * dm * dm) + (1.0 - spec.mu) / (de * de * de);
        const double b2 = sqr(s.u.p[2]) + sqr(s.u.q[2]);
        out.pairing = sqr(s.u.p[2]) + sqr(s.u.q[2]) * F;
        out.normalized_pairing = b2 > 1e-16 ? out.pairing / b2 : 0.5 * (1.0 + F);
        return out;
    }
    const SystemSpec cs = chart_spec(spec, s.region);
    if (1.0 - s.r.xi[0] >= 1e-9) {
        const UnregState u = reg_to_unreg(s.r, cs);
        const double d_own = norm(u.q - cs.primary());
        if (d_own > 0.5) throw RegionMismatch("chart tag far from its primary");
    }
    return theta_interpolated(s.r, cs, cut);
}

ConnectedSumReport connected_sum_scan(const SystemSpec& spec, const CutoffSpec& cut_in,
                                      int n_samples, std::uint64_t seed) {
    const LagrangeSet ls = lagrange_points(spec.mu);
    if (!(spec.c > ls.values[0] && spec.c < ls.values[1]))
        throw ConfigError("connected_sum_scan: c must lie in (H(L1), H(L2))");

    Rng rng(seed);
    const HillClassifier classifier(spec.mu, spec.c);
    const double chart_radius = 0.3;

    std::vector<TaggedState> states;
    states.reserve(n_samples);
    int failures = 0;
    while (static_cast<int>(states.size()) < n_samples) {
        Vec3 q{rng.uniform(-1.6, 1.6), rng.uniform(-1.6, 1.6), rng.uniform(-0.8, 0.8)};
        const double u_eff = effective_potential(q, spec.mu);
        if (u_eff > spec.c) continue;  // plain rejection, not a failure
        if (classifier.label(q) != HillLabel::MergedComponent) continue;
        const Vec3 dir = rng.unit_vec<3>();
        const double vn = std::sqrt(2.0 * (spec.c - u_eff));
        UnregState u;
        u.q = q;
        u.p = vn * dir - Vec3{q[1], -q[0], 0.0};
        try {
            states.push_back(tag_state(u, spec, chart_radius));
        } catch (const Error&) {
            ++failures;
            if (failures > std::max(n_samples / 100, 8))
                throw SamplingFailure("connected_sum_scan: tagging failures exceeded 1%");
        }
    }

    // Cutoff amplitude from the chart-region subpopulation, proof-style.
    CutoffSpec cut = cut_in;
    {
        double c_eps = 1e300, k_max = 0.0;
        CutoffSpec unit = cut_in;
        unit.amplitude = 1.0;
        for (const TaggedState& t : states) {
            if (t.region == Region::Physical) continue;
            const SystemSpec cs = chart_spec(spec, t.region);
            const double b2 = sqr(t.r.xi[3]) + sqr(t.r.eta[3]);
            if (b2 < 1e-14) continue;
            if (t.r.xi[0] <= 1.0 - cut.epsilon)
                c_eps = std::min(c_eps, omega_p_closed(t.r, cs) / b2);
            const TangentReg v = X_Q(t.r, cs);
            k_max = std::max(k_max, std::abs(unit.drho(t.r.xi[0]) * v.dxi[0]));
        }
        if (c_eps < 1e300 && c_eps > 0.0 && k_max > 1e-12) cut.amplitude = c_eps / k_max;
    }

    ConnectedSumReport rep;
    std::vector<double> normalized(states.size());
    std::vector<double> overlap_err(states.size(), 0.0);
    parallel_for(static_cast<int>(states.size()), [&](int i) {
        const TaggedState& t = states[i];
        const SectionValue sv = theta_connected_sum(t, spec, cut);
        normalized[i] = sv.normalized_pairing;
        if (t.region != Region::Physical) {
            // Where the cutoff vanishes, the chart angle must match the
            // physical branch through the chart transition.
            if (cut.rho(t.r.xi[0]) == 0.0) {
                const double a_phys = std::arg(physical_value(t.u));
                double d = std::arg(sv.theta) - a_phys;
                while (d > kPi) d -= 2.0 * kPi;
                while (d <= -kPi) d += 2.0 * kPi;
                overlap_err[i] = std::abs(d);
            }
        }
    });

    std::vector<RegState> reg_states(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        const TaggedState& t = states[i];
        switch (t.region) {
            case Region::Physical: ++rep.n_physical; break;
            case Region::MoonChart: ++rep.n_moon; break;
            case Region::EarthChart: ++rep.n_earth; break;
        }
        reg_states[i] = t.region == Region::Physical
                            ? unreg_to_reg(t.u, chart_spec(spec, Region::MoonChart))
                            : t.r;
    }
    rep.scan = reduce_scan(reg_states, normalized, n_samples, failures);
    rep.max_overlap_angle_error = *std::max_element(overlap_err.begin(), overlap_err.end());
    return rep;
}

// ---- Lefschetz critical points ---------------------------------------------

namespace {

using Vec8 = std::array<double, 8>;

Vec8 pack8(const RegState& r) {
    Vec8 y;
    for (int i = 0; i < 4; ++i) { y[i] = r.xi[i]; y[i + 4] = r.eta[i]; }
    return y;
}

RegState unpack8(const Vec8& y) {
    RegState r;
    for (int i = 0; i < 4; ++i) { r.xi[i] = y[i]; r.eta[i] = y[i + 4]; }
    return r;
}

// Tangential projections of the two coordinate functionals of xi3 + i eta3;
// both vanish exactly at the Lefschetz critical points.
std::array<Vec8, 2> lefschetz_residual(const RegState& r) {
    const double q2 = 1.0 + norm2(r.eta);
    std::array<Vec8, 2> g{};
    for (int i = 0; i < 4; ++i) {
        g[0][i] = (i == 3 ? 1.0 : 0.0) - r.xi[3] * r.xi[i] - (r.eta[3] / q2) * r.eta[i];
        g[0][i + 4] = -(r.eta[3] / q2) * r.xi[i];
        g[1][i] = -(r.xi[3] / q2) * r.eta[i];
        g[1][i + 4] = (i == 3 ? 1.0 : 0.0) - (r.xi[3] / q2) * r.xi[i];
    }
    return g;
}

double lefschetz_merit(const RegState& r) {
    const auto g = lefschetz_residual(r);
    return norm2(g[0]) + norm2(g[1]);
}

RegState lefschetz_retract(const Vec8& y) {
    RegState r = unpack8(y);
    r = project_to_TS3(r.xi, r.eta);
    const double en = norm(r.eta);
    if (en > 1.0) r.eta = (1.0 / en) * r.eta;  // stay in the unit-disk bundle
    return r;
}

}  // namespace

std::vector<RegState> lefschetz_critical_points(int n_starts, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<RegState> found;
    for (int s = 0; s < n_starts; ++s) {
        RegState r;
        r.xi = rng.unit_vec<4>();
        Vec4 e = rng.gaussian_vec<4>();
        axpy(-dot(r.xi, e), r.xi, e);
        const double en = norm(e);
        r.eta = en > 1e-12 ? (rng.uniform() * 0.9 / en) * e : Vec4{};

        // Gauss-Newton on the 16-component residual with FD Jacobian.
        for (int it = 0; it < 120; ++it) {
            const auto g0 = lefschetz_residual(r);
            const double m0 = norm2(g0[0]) + norm2(g0[1]);
            if (m0 < 1e-24) break;
            std::vector<std::vector<double>> J(16, std::vector<double>(8));
            const Vec8 y0 = pack8(r);
            const double h = 1e-7;
            for (int j = 0; j < 8; ++j) {
                Vec8 yp = y0, ym = y0;
                yp[j] += h;
                ym[j] -= h;
                const auto gp = lefschetz_residual(lefschetz_retract(yp));
                const auto gm = lefschetz_residual(lefschetz_retract(ym));
                for (int i = 0; i < 8; ++i) {
                    J[i][j] = (gp[0][i] - gm[0][i]) / (2.0 * h);
                    J[8 + i][j] = (gp[1][i] - gm[1][i]) / (2.0 * h);
                }
            }
            // Normal equations with a small ridge.
            std::array<std::array<double, 8>, 8> A{};
            std::array<double, 8> b{};
            for (int i = 0; i < 16; ++i) {
                const double ri = i < 8 ? g0[0][i] : g0[1][i - 8];
                for (int a = 0; a < 8; ++a) {
                    b[a] -= J[i][a] * ri;
                    for (int c = 0; c < 8; ++c) A[a][c] += J[i][a] * J[i][c];
                }
            }
            for (int a = 0; a < 8; ++a) A[a][a] += 1e-12;
            // Solve A du = b.
            std::array<double, 8> du{};
            {
                auto M = A;
                auto rhs = b;
                for (int c = 0; c < 8; ++c) {
                    int piv = c;
                    for (int r2 = c + 1; r2 < 8; ++r2)
                        if (std::abs(M[r2][c]) > std::abs(M[piv][c])) piv = r2;
                    std::swap(M[piv], M[c]);
                    std::swap(rhs[piv], rhs[c]);
                    for (int r2 = c + 1; r2 < 8; ++r2) {
                        const double f = M[r2][c] / M[c][c];
                        for (int k = c; k < 8; ++k) M[r2][k] -= f * M[c][k];
                        rhs[r2] -= f * rhs[c];
                    }
                }
                for (int c = 7; c >= 0; --c) {
                    double t = rhs[c];
                    for (int k = c + 1; k < 8; ++k) t -= M[c][k] * du[k];
                    du[c] = t / M[c][c];
                }
            }
            double lambda = 1.0;
            bool ok = false;
            for (int back = 0; back < 12; ++back) {
                Vec8 yt = y0;
                for (int j = 0; j < 8; ++j) yt[j] += lambda * du[j];
                const RegState rt = lefschetz_retract(yt);
                if (lefschetz_merit(rt) < m0) {
                    r = rt;
                    ok = true;
                    break;
                }
                lambda *= 0.5;
            }
            if (!ok) break;
        }

        if (lefschetz_merit(r) < 1e-16) {
            bool known = false;
            for (const RegState& f : found) {
                double dist2 = 0.0;
                for (int i = 0; i < 4; ++i)
                    dist2 += sqr(f.xi[i] - r.xi[i]) + sqr(f.eta[i] - r.eta[i]);
                if (dist2 < 1e-8) { known = true; break; }
            }
            if (!known) found.push_back(r);
        }
    }
    return found;
}

double lefschetz_hessian_det(const RegState& crit) {
    // Tangent frame at the critical point.
    std::vector<Vec8> rows;
    Vec8 c1{}, c2{};
    for (int i = 0; i < 4; ++i) {
        c1[i] = crit.xi[i];
        c2[i] = crit.eta[i];
        c2[i + 4] = crit.xi[i];
    }
    rows = {c1, c2};
    std::vector<Vec8> basis;
    {
        std::vector<Vec8> ortho;
        for (Vec8 r : rows) {
            for (const auto& o : ortho) axpy(-dot(r, o), o, r);
            const double n = norm(r);
            if (n > 1e-13) ortho.push_back((1.0 / n) * r);
        }
        for (int seedv = 0; seedv < 8 && basis.size() < 6; ++seedv) {
            Vec8 v{};
            v[seedv] = 1.0;
            for (const auto& o : ortho) axpy(-dot(v, o), o, v);
            for (const auto& o : basis) axpy(-dot(v, o), o, v);
            const double n = norm(v);
            if (n > 1e-6) basis.push_back((1.0 / n) * v);
        }
    }
    auto value = [&](const std::array<double, 6>& u) {
        Vec8 y = pack8(crit);
        for (int j = 0; j < 6; ++j) axpy(u[j], basis[j], y);
        const RegState r = project_to_TS3(unpack8(y).xi, unpack8(y).eta);
        return Complex(r.xi[3], r.eta[3]);
    };

    const double h = 1e-4;
    std::array<std::array<Complex, 6>, 6> H{};
    const Complex f0 = value({});
    for (int i = 0; i < 6; ++i) {
        for (int j = i; j < 6; ++j) {
            std::array<double, 6> u{};
            Complex hij;
            if (i == j) {
                u[i] = h;
                const Complex fp = value(u);
                u[i] = -h;
                const Complex fm = value(u);
                hij = (fp - 2.0 * f0 + fm) / (h * h);
            } else {
                u[i] = h; u[j] = h;
                const Complex fpp = value(u);
                u[j] = -h;
                const Complex fpm = value(u);
                u[i] = -h; u[j] = h;
                const Complex fmp = value(u);
                u[j] = -h;
                const Complex fmm = value(u);
                hij = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            }
            H[i][j] = H[j][i] = hij;
        }
    }
    // |det| via complex LU with partial pivoting.
    Complex det(1.0, 0.0);
    for (int c = 0; c < 6; ++c) {
        int piv = c;
        for (int r = c + 1; r < 6; ++r)
            if (std::abs(H[r][c]) > std::abs(H[piv][c])) piv = r;
        if (piv != c) { std::swap(H[piv], H[c]); det = -det; }
        if (std::abs(H[c][c]) < 1e-300) return 0.0;
        det *= H[c][c];
        for (int r = c + 1; r < 6; ++r) {
            const Complex f = H[r][c] / H[c][c];
            for (int k = c; k < 6; ++k) H[r][k] -= f * H[c][k];
        }
    }
    return std::abs(det);
}

// ---- export ----------------------------------------------------------------

void write_scan_csv(const std::string& path, const std::vector<RegState>& states,
                    const std::vector<double>& pairing, const std::vector<double>& normalized) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path);
    out << "xi0,xi1,xi2,xi3,eta0,eta1,eta2,eta3,pairing,normalized_pairing\n";
    char buf[64];
    auto put = [&](double v, char sep) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf << sep;
    };
    for (std::size_t i = 0; i < states.size(); ++i) {
        for (int k = 0; k < 4; ++k) put(states[i].xi[k], ',');
        for (int k = 0; k < 4; ++k) put(states[i].eta[k], ',');
        put(pairing.empty() ? 0.0 : pairing[i], ',');
        std::snprintf(buf, sizeof buf, "%.17g", normalized[i]);
        out << buf << '\n';
    }
}

void write_scan_json(const std::string& path, const ScanReport& rep) {
    nlohmann::json j;
    j["n_requested"] = rep.n_requested;
    j["n_evaluated"] = rep.n_evaluated;
    j["n_failed"] = rep.n_failed;
    j["min_normalized_pairing"] = rep.min_normalized;
    j["max_normalized_pairing"] = rep.max_normalized;
    j["argmin"] = {{"xi", rep.argmin.xi}, {"eta", rep.argmin.eta}};
    j["histogram"] = rep.histogram;
    j["histogram_range"] = {rep.hist_lo, rep.hist_hi};
    j["pass"] = rep.pass;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path);
    out << j.dump(2) << "\n";
}

}  // namespace cr3bp
