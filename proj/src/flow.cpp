#include "cr3bp/flow.hpp"

#include <algorithm>
#include <cmath>

namespace cr3bp {

namespace {

// Dormand-Prince 5(4) pair with the standard quartic dense-output
// interpolant.  State dimension fixed at compile time.
template <std::size_t N>
struct Dopri5Step {
    double t0 = 0.0, h = 0.0;
    std::array<double, N> y0{}, y1{};
    std::array<double, N> rcont1{}, rcont2{}, rcont3{}, rcont4{}, rcont5{};

    std::array<double, N> dense(double theta) const {
        std::array<double, N> y;
        const double th1 = 1.0 - theta;
        for (std::size_t i = 0; i < N; ++i)
            y[i] = rcont1[i] +
                   theta * (rcont2[i] + th1 * (rcont3[i] + theta * (rcont4[i] + th1 * rcont5[i])));
        return y;
    }
};

template <std::size_t N, typename RHS>
class Dopri5 {
public:
    Dopri5(RHS rhs, const IntegratorConfig& cfg, double direction)
        : rhs_(rhs), cfg_(cfg), dir_(direction) {}

    // One accepted step from (t, y), not exceeding t_end.  k1 may be reused
    // from the previous step (FSAL); pass nullptr on the first call.
    Dopri5Step<N> step(double t, const std::array<double, N>& y, double t_end,
                       const std::array<double, N>* k1_in) {
        std::array<double, N> k1 = k1_in ? *k1_in : rhs_(y);
        for (int attempt = 0; attempt < 200; ++attempt) {
            double h = std::min(std::abs(h_), cfg_.max_step);
            h = std::min(h, std::abs(t_end - t));
            if (h < 1e-14 * std::max(1.0, std::abs(t))) throw StepFailure("step size underflow");
            h *= dir_;

            std::array<double, N> k2, k3, k4, k5, k6, k7, tmp, y1;
            auto stage = [&](const std::array<double, N>& base) { return rhs_(base); };
            auto combine = [&](std::initializer_list<std::pair<double, const std::array<double, N>*>> terms) {
                tmp = y;
                for (const auto& [a, k] : terms) axpy(h * a, *k, tmp);
                return tmp;
            };

            k2 = stage(combine({{1.0 / 5, &k1}}));
            k3 = stage(combine({{3.0 / 40, &k1}, {9.0 / 40, &k2}}));
            k4 = stage(combine({{44.0 / 45, &k1}, {-56.0 / 15, &k2}, {32.0 / 9, &k3}}));
            k5 = stage(combine({{19372.0 / 6561, &k1},
                                {-25360.0 / 2187, &k2},
                                {64448.0 / 6561, &k3},
                                {-212.0 / 729, &k4}}));
            k6 = stage(combine({{9017.0 / 3168, &k1},
                                {-355.0 / 33, &k2},
                                {46732.0 / 5247, &k3},
                                {49.0 / 176, &k4},
                                {-5103.0 / 18656, &k5}}));
            y1 = combine({{35.0 / 384, &k1},
                          {500.0 / 1113, &k3},
                          {125.0 / 192, &k4},
                          {-2187.0 / 6784, &k5},
                          {11.0 / 84, &k6}});
            k7 = stage(y1);

            // Embedded 4th-order error estimate.
            double err = 0.0;
            static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                    e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
            for (std::size_t i = 0; i < N; ++i) {
                const double ei =
                    h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                const double sc =
                    cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y[i]), std::abs(y1[i]));
                err += sqr(ei / sc);
            }
            err = std::sqrt(err / N);

            const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-32), -0.2), 0.2, 10.0);
            if (err <= 1.0) {
                Dopri5Step<N> s;
                s.t0 = t;
                s.h = h;
                s.y0 = y;
                s.y1 = y1;
                // Dense-output coefficients (Hairer's contd5).
                static constexpr double d1 = -12715105075.0 / 11282082432.0,
                                        d3 = 87487479700.0 / 32700410799.0,
                                        d4 = -10690763975.0 / 1880347072.0,
                                        d5 = 701980252875.0 / 199316789632.0,
                                        d6 = -1453857185.0 / 822651844.0,
                                        d7 = 69997945.0 / 29380423.0;
                for (std::size_t i = 0; i < N; ++i) {
                    const double dy = y1[i] - y[i];
                    s.rcont1[i] = y[i];
                    s.rcont2[i] = dy;
                    s.rcont3[i] = h * k1[i] - dy;
                    s.rcont4[i] = dy - h * k7[i] - s.rcont3[i];
                    s.rcont5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                       d6 * k6[i] + d7 * k7[i]);
                }
                k_last_ = k7;
                h_ = std::abs(h) * fac;
                return s;
            }
            h_ = std::abs(h) * fac;
        }
        throw StepFailure("no acceptable step after 200 attempts");
    }

    const std::array<double, N>& last_k() const { return k_last_; }

private:
    RHS rhs_;
    IntegratorConfig cfg_;
    double dir_;
    double h_ = 1e-4;
    std::array<double, N> k_last_{};
};

// 9-component regularized state: (xi, eta, physical time).
using RegY = std::array<double, 9>;

RegY pack(const RegState& r, double t_phys) {
    RegY y;
    for (int i = 0; i < 4; ++i) { y[i] = r.xi[i]; y[i + 4] = r.eta[i]; }
    y[8] = t_phys;
    return y;
}

RegState unpack(const RegY& y) {
    RegState r;
    for (int i = 0; i < 4; ++i) { r.xi[i] = y[i]; r.eta[i] = y[i + 4]; }
    return r;
}

struct RegRhs {
    const SystemSpec* spec;
    RegY operator()(const RegY& y) const {
        const RegState r = unpack(y);
        const TangentReg v = X_Q(r, *spec);
        RegY dy;
        for (int i = 0; i < 4; ++i) { dy[i] = v.dxi[i]; dy[i + 4] = v.deta[i]; }
        dy[8] = physical_time_rate(r, *spec);
        return dy;
    }
};

RegY project_y(const RegY& y) {
    const RegState r = unpack(y);
    const RegState p = project_to_TS3(r.xi, r.eta);
    RegY out = pack(p, y[8]);
    return out;
}

}  // namespace

Trajectory integrate(const RegState& r0, double t_final, const SystemSpec& spec,
                     const IntegratorConfig& cfg) {
    cfg.validate();
    if (std::abs(t_final) > cfg.max_time)
        throw TimeBudgetExceeded("integrate: |t_final| exceeds cfg.max_time");
    Trajectory traj;
    traj.samples.push_back({0.0, 0.0, r0});
    if (t_final == 0.0) return traj;

    const double dir = t_final > 0.0 ? 1.0 : -1.0;
    Dopri5<9, RegRhs> stepper(RegRhs{&spec}, cfg, dir);
    RegY y = pack(r0, 0.0);
    double t = 0.0;
    bool fsal = false;
    while (dir * (t_final - t) > 1e-14 * std::max(1.0, std::abs(t_final))) {
        const auto s = stepper.step(t, y, t_final, fsal ? &stepper.last_k() : nullptr);
        t = s.t0 + s.h;
        y = s.y1;
        if (cfg.projection == IntegratorConfig::Projection::EveryStep) {
            y = project_y(y);
            fsal = false;
        } else {
            fsal = true;
        }
        traj.samples.push_back({t, y[8], unpack(y)});
    }
    return traj;
}

namespace {

struct UnregRhs {
    const SystemSpec* spec;
    std::array<double, 6> operator()(const std::array<double, 6>& y) const {
        UnregState s;
        for (int i = 0; i < 3; ++i) { s.q[i] = y[i]; s.p[i] = y[i + 3]; }
        const TangentUnreg v = X_H(s, *spec);
        std::array<double, 6> dy;
        for (int i = 0; i < 3; ++i) { dy[i] = v.dq[i]; dy[i + 3] = v.dp[i]; }
        return dy;
    }
};

}  // namespace

UnregTrajectory integrate_unreg(const UnregState& s0, double t_final, const SystemSpec& spec,
                                const IntegratorConfig& cfg) {
    cfg.validate();
    UnregTrajectory traj;
    traj.samples.push_back({0.0, s0});
    if (t_final == 0.0) return traj;
    const double dir = t_final > 0.0 ? 1.0 : -1.0;
    Dopri5<6, UnregRhs> stepper(UnregRhs{&spec}, cfg, dir);
    std::array<double, 6> y{s0.q[0], s0.q[1], s0.q[2], s0.p[0], s0.p[1], s0.p[2]};
    double t = 0.0;
    bool fsal = false;
    while (dir * (t_final - t) > 1e-14 * std::max(1.0, std::abs(t_final))) {
        const auto s = stepper.step(t, y, t_final, fsal ? &stepper.last_k() : nullptr);
        t = s.t0 + s.h;
        y = s.y1;
        fsal = true;
        UnregState u;
        for (int i = 0; i < 3; ++i) { u.q[i] = y[i]; u.p[i] = y[i + 3]; }
        traj.samples.push_back({t, u});
    }
    return traj;
}

namespace {

double principal(double a) {
    while (a > kPi) a -= 2.0 * kPi;
    while (a <= -kPi) a += 2.0 * kPi;
    return a;
}

// Lifted angle increment between two nearby section values.
double arg_increment(const Complex& from, const Complex& to) {
    return std::arg(to / from);
}

}  // namespace

ReturnRecord return_map(const RegState& start, const SystemSpec& spec, const SectionMap& section,
                        const IntegratorConfig& cfg, int n_iterates) {
    cfg.validate();
    const Complex theta0 = section.value(start);
    if (std::abs(theta0) < 1e-6) throw OnBinding("return_map: start within 1e-6 of the binding");

    ReturnRecord rec;
    rec.start = start;
    const double final_target = 2.0 * kPi * n_iterates;

    Dopri5<9, RegRhs> stepper(RegRhs{&spec}, cfg, 1.0);
    RegY y = pack(start, 0.0);
    double t = 0.0;
    double lift = 0.0;
    Complex theta_prev = theta0;
    int crossings_found = 0;

    while (t < cfg.max_time) {
        const auto s = stepper.step(t, y, cfg.max_time, nullptr);

        // Walk the dense output so every subinterval turns by well under pi.
        int m = 8;
        for (int refine = 0; refine < 6; ++refine) {
            double worst = 0.0;
            Complex prev = theta_prev;
            for (int j = 1; j <= m; ++j) {
                const Complex th = section.value(unpack(s.dense(static_cast<double>(j) / m)));
                worst = std::max(worst, std::abs(arg_increment(prev, th)));
                prev = th;
            }
            if (worst < 0.5 * kPi) break;
            m *= 2;
        }

        double lift_in = lift;
        Complex prev = theta_prev;
        std::vector<double> crossing_guesses;
        double next_target = 2.0 * kPi * (crossings_found + 1);
        for (int j = 1; j <= m; ++j) {
            const double tj = s.t0 + s.h * j / m;
            const Complex th = section.value(unpack(s.dense(static_cast<double>(j) / m)));
            const double next_lift = lift_in + arg_increment(prev, th);
            if (lift_in < next_target && next_lift >= next_target) {
                const double frac = (next_target - lift_in) / (next_lift - lift_in);
                crossing_guesses.push_back(tj - s.h / m + frac * s.h / m);
                next_target += 2.0 * kPi;
            }
            lift_in = next_lift;
            prev = th;
        }

        for (double crossing_guess : crossing_guesses) {
            // Newton refinement with exact short re-integrations from the
            // step base; the angle rate is the analytic pairing.
            double tc = crossing_guess;
            RegY yc{};
            const RegState base = unpack(s.y0);
            for (int it = 0; it < 8; ++it) {
                const Trajectory seg = integrate(base, tc - s.t0, spec, cfg);
                const RegState xc = seg.end().state;
                yc = pack(xc, s.y0[8] + seg.end().t_phys);
                const Complex th = section.value(xc);
                const double err = principal(std::arg(th) - std::arg(theta0));
                if (std::abs(err) < 1e-12) break;
                const double rate = section.pairing(xc, spec) / std::norm(th);
                tc -= err / rate;
                if (!(tc > s.t0 - std::abs(s.h) && tc < s.t0 + 2.0 * std::abs(s.h)))
                    tc = crossing_guess;  // keep the Newton iterate near the bracket
            }
            ++crossings_found;
            rec.crossings.emplace_back(tc, 2.0 * kPi * crossings_found);
            if (crossings_found == n_iterates) {
                const RegState end_state = project_to_TS3(unpack(yc).xi, unpack(yc).eta);
                rec.end = end_state;
                rec.return_time = tc;
                rec.physical_return_time = yc[8];
                rec.angle_swept =
                    final_target + principal(std::arg(section.value(end_state)) - std::arg(theta0));
                rec.q_drift = std::abs(Q_reg(end_state, spec) - Q_reg(start, spec));
                return rec;
            }
        }

        lift = lift_in;
        theta_prev = prev;
        t = s.t0 + s.h;
        y = s.y1;
        if (cfg.projection == IntegratorConfig::Projection::EveryStep) y = project_y(y);
    }
    throw NoReturn("return_map: flow-time budget exhausted before the page return");
}

RegState involution(InvolutionKind kind, const RegState& x) {
    RegState y = x;
    switch (kind) {
        case InvolutionKind::r:
            y.xi[3] = -x.xi[3];
            y.eta[3] = -x.eta[3];
            break;
        case InvolutionKind::rho1:
            y.xi[1] = -x.xi[1];
            y.eta[0] = -x.eta[0];
            y.eta[2] = -x.eta[2];
            y.eta[3] = -x.eta[3];
            break;
        case InvolutionKind::rho2:
            y.xi[1] = -x.xi[1];
            y.xi[3] = -x.xi[3];
            y.eta[0] = -x.eta[0];
            y.eta[2] = -x.eta[2];
            break;
    }
    return y;
}

namespace {

using Vec8 = std::array<double, 8>;

Vec8 to8(const TangentReg& v) {
    Vec8 w;
    for (int i = 0; i < 4; ++i) { w[i] = v.dxi[i]; w[i + 4] = v.deta[i]; }
    return w;
}

TangentReg from8(const Vec8& w) {
    TangentReg v;
    for (int i = 0; i < 4; ++i) { v.dxi[i] = w[i]; v.deta[i] = w[i + 4]; }
    return v;
}

// Gram-Schmidt kernel basis: orthonormal vectors orthogonal to the rows.
std::vector<Vec8> kernel_basis(const std::vector<Vec8>& rows, int want) {
    std::vector<Vec8> ortho;  // orthonormalized row space
    for (Vec8 r : rows) {
        for (const auto& o : ortho) axpy(-dot(r, o), o, r);
        const double n = norm(r);
        if (n > 1e-13) ortho.push_back((1.0 / n) * r);
    }
    std::vector<Vec8> out;
    for (int seed = 0; seed < 8 && static_cast<int>(out.size()) < want; ++seed) {
        Vec8 v{};
        v[seed] = 1.0;
        for (const auto& o : ortho) axpy(-dot(v, o), o, v);
        for (const auto& o : out) axpy(-dot(v, o), o, v);
        for (const auto& o : ortho) axpy(-dot(v, o), o, v);  // refine
        for (const auto& o : out) axpy(-dot(v, o), o, v);
        const double n = norm(v);
        if (n > 1e-6) out.push_back((1.0 / n) * v);
    }
    return out;
}

Vec8 grad_Q8(const RegState& x, const SystemSpec& spec) {
    // Ambient gradient of Q = 1/2 f^2 ||eta||^2.
    const FieldEval fe = eval_field(x, spec);
    const double n2 = norm2(x.eta);
    Vec8 g;
    for (int i = 0; i < 4; ++i) {
        g[i] = fe.f * n2 * fe.f_xi[i];
        g[i + 4] = fe.f * n2 * fe.f_eta[i] + fe.f * fe.f * x.eta[i];
    }
    return g;
}

Vec8 grad_angle8(const RegState& x, const SectionMap& section) {
    // d(arg Theta) = (Re dIm - Im dRe)/|Theta|^2 via directional derivatives.
    const Complex th = section.value(x);
    Vec8 g;
    for (int i = 0; i < 8; ++i) {
        TangentReg e{};
        if (i < 4) e.dxi[i] = 1.0; else e.deta[i - 4] = 1.0;
        const Complex dth = section.d_value(x, e);
        g[i] = (th.real() * dth.imag() - th.imag() * dth.real()) / std::norm(th);
    }
    return g;
}

}  // namespace

std::array<TangentReg, 4> page_basis(const RegState& x, const SystemSpec& spec,
                                     const SectionMap& section) {
    std::vector<Vec8> rows;
    Vec8 c1{}, c2{};
    for (int i = 0; i < 4; ++i) { c1[i] = x.xi[i]; c2[i] = x.eta[i]; c2[i + 4] = x.xi[i]; }
    rows.push_back(c1);                        // <xi, dxi> = 0
    rows.push_back(c2);                        // <eta, dxi> + <xi, deta> = 0
    rows.push_back(grad_Q8(x, spec));          // dQ = 0
    rows.push_back(grad_angle8(x, section));   // d(arg Theta) = 0
    const auto basis = kernel_basis(rows, 4);
    if (basis.size() != 4) throw DegenerateInput("page_basis: degenerate constraint set");
    std::array<TangentReg, 4> out;
    for (int i = 0; i < 4; ++i) out[i] = from8(basis[i]);
    return out;
}

RegState page_retract(const RegState& x, const SystemSpec& spec, const SectionMap& section,
                      const IntegratorConfig& cfg, double page_angle) {
    RegState y = project_to_TS3(x.xi, x.eta);
    y = scale_eta_to_level(y, spec);
    for (int it = 0; it < 4; ++it) {
        const double err = principal(section.angle(y) - page_angle);
        if (std::abs(err) < 1e-13) break;
        const double rate = section.pairing(y, spec) / std::norm(section.value(y));
        const Trajectory seg = integrate(y, -err / rate, spec, cfg);
        y = seg.end().state;
    }
    return y;
}

double symplectic_form(const TangentReg& u, const TangentReg& v) {
    return dot(u.deta, v.dxi) - dot(u.dxi, v.deta);
}

namespace {

// det of a small matrix by Gaussian elimination with partial pivoting.
double det4(std::array<std::array<double, 4>, 4> a) {
    double det = 1.0;
    for (int c = 0; c < 4; ++c) {
        int piv = c;
        for (int r = c + 1; r < 4; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (piv != c) { std::swap(a[piv], a[c]); det = -det; }
        if (a[c][c] == 0.0) return 0.0;
        det *= a[c][c];
        for (int r = c + 1; r < 4; ++r) {
            const double f = a[r][c] / a[c][c];
            for (int k = c; k < 4; ++k) a[r][k] -= f * a[c][k];
        }
    }
    return det;
}

// Eigenvalues of a 4x4 real matrix: characteristic polynomial by
// Faddeev-LeVerrier, roots by Durand-Kerner.
std::array<Complex, 4> eig4(const std::array<std::array<double, 4>, 4>& a) {
    auto matmul = [](const auto& x, const auto& y) {
        std::array<std::array<double, 4>, 4> z{};
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 4; ++k)
                for (int j = 0; j < 4; ++j) z[i][j] += x[i][k] * y[k][j];
        return z;
    };
    auto trace = [](const auto& x) { return x[0][0] + x[1][1] + x[2][2] + x[3][3]; };

    std::array<double, 5> p{};  // lambda^4 + p1 l^3 + p2 l^2 + p3 l + p4
    std::array<double, 4> s{};
    s[0] = trace(a);
    auto mk = a;
    for (int k = 2; k <= 4; ++k) {
        mk = matmul(mk, a);
        s[k - 1] = trace(mk);
    }
    // Newton's identities.
    p[1] = -s[0];
    p[2] = -0.5 * (s[1] + p[1] * s[0]);
    p[3] = -(s[2] + p[1] * s[1] + p[2] * s[0]) / 3.0;
    p[4] = -(s[3] + p[1] * s[2] + p[2] * s[1] + p[3] * s[0]) / 4.0;

    auto poly = [&](Complex z) {
        return (((z + p[1]) * z + p[2]) * z + p[3]) * z + p[4];
    };
    std::array<Complex, 4> roots;
    for (int i = 0; i < 4; ++i) roots[i] = std::pow(Complex(0.4, 0.9), i);
    for (int it = 0; it < 200; ++it) {
        double change = 0.0;
        for (int i = 0; i < 4; ++i) {
            Complex denom(1.0, 0.0);
            for (int j = 0; j < 4; ++j)
                if (j != i) denom *= roots[i] - roots[j];
            const Complex delta = poly(roots[i]) / denom;
            roots[i] -= delta;
            change = std::max(change, std::abs(delta));
        }
        if (change < 1e-14) break;
    }
    return roots;
}

}  // namespace

PageJacobian return_map_page_jacobian(const RegState& x, const SystemSpec& spec,
                                      const SectionMap& section, const IntegratorConfig& cfg,
                                      double fd_step) {
    const double page_angle = section.angle(x);
    const auto V = page_basis(x, spec, section);
    const ReturnRecord r0 = return_map(x, spec, section, cfg);
    const auto W = page_basis(r0.end, spec, section);

    PageJacobian out;
    std::array<std::array<double, 4>, 4> omega_x{}, omega_y{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            omega_x[i][j] = symplectic_form(V[i], V[j]);
            omega_y[i][j] = symplectic_form(W[i], W[j]);
        }

    for (int j = 0; j < 4; ++j) {
        RegState xp = x, xm = x;
        for (int i = 0; i < 4; ++i) {
            xp.xi[i] += fd_step * V[j].dxi[i];
            xp.eta[i] += fd_step * V[j].deta[i];
            xm.xi[i] -= fd_step * V[j].dxi[i];
            xm.eta[i] -= fd_step * V[j].deta[i];
        }
        const RegState sp = page_retract(xp, spec, section, cfg, page_angle);
        const RegState sm = page_retract(xm, spec, section, cfg, page_angle);
        const ReturnRecord rp = return_map(sp, spec, section, cfg);
        const ReturnRecord rm = return_map(sm, spec, section, cfg);
        TangentReg d;
        for (int i = 0; i < 4; ++i) {
            d.dxi[i] = (rp.end.xi[i] - rm.end.xi[i]) / (2.0 * fd_step);
            d.deta[i] = (rp.end.eta[i] - rm.end.eta[i]) / (2.0 * fd_step);
        }
        for (int i = 0; i < 4; ++i)
            out.J[i][j] = dot(to8(W[i]), to8(d));
    }

    const double dj = det4(out.J);
    out.symplectic_det = std::abs(dj) * std::sqrt(det4(omega_y) / det4(omega_x));
    out.eigenvalues = eig4(out.J);
    return out;
}

namespace {

// Least squares min ||J d - r|| for an m x n system via normal equations.
std::vector<double> solve_least_squares(const std::vector<std::vector<double>>& J,
                                        const std::vector<double>& r) {
    const int m = static_cast<int>(J.size());
    const int n = m > 0 ? static_cast<int>(J[0].size()) : 0;
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    std::vector<double> b(n, 0.0);
    for (int i = 0; i < m; ++i) {
        for (int a = 0; a < n; ++a) {
            b[a] += J[i][a] * r[i];
            for (int c = 0; c < n; ++c) A[a][c] += J[i][a] * J[i][c];
        }
    }
    for (int a = 0; a < n; ++a) A[a][a] += 1e-14;
    // Gaussian elimination with partial pivoting.
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r2 = c + 1; r2 < n; ++r2)
            if (std::abs(A[r2][c]) > std::abs(A[piv][c])) piv = r2;
        std::swap(A[piv], A[c]);
        std::swap(b[piv], b[c]);
        for (int r2 = c + 1; r2 < n; ++r2) {
            const double f = A[r2][c] / A[c][c];
            for (int k = c; k < n; ++k) A[r2][k] -= f * A[c][k];
            b[r2] -= f * b[c];
        }
    }
    std::vector<double> x(n, 0.0);
    for (int c = n - 1; c >= 0; --c) {
        double t = b[c];
        for (int k = c + 1; k < n; ++k) t -= A[c][k] * x[k];
        x[c] = t / A[c][c];
    }
    return x;
}

}  // namespace

RegState fixed_point_search(double page_angle, const RegState& guess, const SystemSpec& spec,
                            const SectionMap& section, const IntegratorConfig& cfg,
                            int max_iter) {
    RegState x = project_to_TS3(guess.xi, guess.eta);
    const double level = spec.q_level();

    auto displacement = [&](const RegState& s) {
        const ReturnRecord r = return_map(s, spec, section, cfg);
        Vec8 d;
        for (int i = 0; i < 4; ++i) {
            d[i] = r.end.xi[i] - s.xi[i];
            d[i + 4] = r.end.eta[i] - s.eta[i];
        }
        return d;
    };

    // Residual: on-shell and page-angle defects plus the 6 tangent
    // components of R(x) - x.
    auto residual = [&](const RegState& s, const std::vector<Vec8>& tb) {
        std::vector<double> F(2 + tb.size());
        F[0] = Q_reg(s, spec) - level;
        F[1] = principal(section.angle(s) - page_angle);
        const Vec8 d = displacement(s);
        for (std::size_t i = 0; i < tb.size(); ++i) F[2 + i] = dot(tb[i], d);
        return F;
    };

    double best_norm = 1e300;
    for (int iter = 0; iter < max_iter; ++iter) {
        const Vec8 disp = displacement(x);
        double dmax = 0.0;
        for (double v : disp) dmax = std::max(dmax, std::abs(v));
        if (dmax < 1e-9 && std::abs(Q_reg(x, spec) - level) < 1e-10 &&
            std::abs(principal(section.angle(x) - page_angle)) < 1e-9)
            return x;

        // Tangent frame at x.
        std::vector<Vec8> rows;
        Vec8 c1{}, c2{};
        for (int i = 0; i < 4; ++i) { c1[i] = x.xi[i]; c2[i] = x.eta[i]; c2[i + 4] = x.xi[i]; }
        rows = {c1, c2};
        const std::vector<Vec8> tb = kernel_basis(rows, 6);

        const std::vector<double> F0 = residual(x, tb);
        double f0 = 0.0;
        for (double v : F0) f0 += v * v;

        const double h = 1e-6;
        std::vector<std::vector<double>> J(F0.size(), std::vector<double>(6));
        for (int j = 0; j < 6; ++j) {
            RegState xp = x;
            for (int i = 0; i < 4; ++i) {
                xp.xi[i] += h * tb[j][i];
                xp.eta[i] += h * tb[j][i + 4];
            }
            const RegState sp = project_to_TS3(xp.xi, xp.eta);
            const std::vector<double> Fp = residual(sp, tb);
            for (std::size_t i = 0; i < F0.size(); ++i) J[i][j] = (Fp[i] - F0[i]) / h;
        }
        std::vector<double> neg(F0.size());
        for (std::size_t i = 0; i < F0.size(); ++i) neg[i] = -F0[i];
        const std::vector<double> du = solve_least_squares(J, neg);

        double lambda = 1.0;
        bool advanced = false;
        for (int back = 0; back < 8; ++back) {
            RegState xt = x;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 6; ++j) {
                    xt.xi[i] += lambda * du[j] * tb[j][i];
                    xt.eta[i] += lambda * du[j] * tb[j][i + 4];
                }
            const RegState st = project_to_TS3(xt.xi, xt.eta);
            try {
                const std::vector<double> Ft = residual(st, tb);
                double ft = 0.0;
                for (double v : Ft) ft += v * v;
                if (ft < f0) {
                    x = st;
                    best_norm = ft;
                    advanced = true;
                    break;
                }
            } catch (const Error&) {
                // step left the admissible region; shrink
            }
            lambda *= 0.5;
        }
        if (!advanced) break;
    }
    (void)best_norm;
    throw NoConvergence("fixed_point_search: displacement did not reach 1e-9");
}

}  // namespace cr3bp
