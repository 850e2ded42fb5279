#include "cr3bp/dynamics.hpp"

#include <cmath>

namespace cr3bp {

namespace {

// Three-body chart closed form.  With s = 1-xi0, L = xi2 eta1 - xi1 eta2,
// o1 the first coordinate of the chart primary and d the other-primary
// offset:
//   b = -(c+1/2) - gS / sqrt(D)
//   M = s L + xi2 o1
//   D = || s eta_vec + eta0 xi_vec - d ||^2
FieldEval eval_field_3bp(const RegState& r, const SystemSpec& spec) {
    const double s = 1.0 - r.xi[0];
    const double gS = spec.secondary_coupling();
    const double o1 = spec.primary()[0];
    const Vec3 d = spec.other_offset();
    const Vec3 xv = spatial(r.xi);
    const Vec3 ev = spatial(r.eta);

    Vec3 w;
    for (int i = 0; i < 3; ++i) w[i] = s * ev[i] + r.eta[0] * xv[i] - d[i];
    const double D = norm2(w);
    if (std::sqrt(D) < 1e-12) throw OtherPrimaryCollision();

    const double L = r.xi[2] * r.eta[1] - r.xi[1] * r.eta[2];
    const double c12 = spec.c + 0.5;
    const double Dm12 = 1.0 / std::sqrt(D);
    const double Dm32 = Dm12 / D;

    FieldEval fe;
    fe.D = D;
    fe.b = -c12 - gS * Dm12;
    fe.M = s * L + r.xi[2] * o1;
    fe.f = 1.0 + s * fe.b + fe.M;

    // D derivatives: D_xi0 = -2<w,eta_vec>, D_xij = 2 w_j eta0,
    //                D_eta0 = 2<w,xi_vec>, D_etaj = 2 w_j s.
    const double wdotev = dot(w, ev);
    const double wdotxv = dot(w, xv);
    const double P = gS * s * Dm32;  // common factor gS s / D^{3/2}

    fe.f_xi[0] = c12 - L + gS * Dm12 + 0.5 * P * (-2.0 * wdotev);
    fe.f_xi[1] = -s * r.eta[2] + 0.5 * P * (2.0 * w[0] * r.eta[0]);
    fe.f_xi[2] = s * r.eta[1] + o1 + 0.5 * P * (2.0 * w[1] * r.eta[0]);
    fe.f_xi[3] = 0.5 * P * (2.0 * w[2] * r.eta[0]);

    fe.f_eta[0] = 0.5 * P * (2.0 * wdotxv);
    fe.f_eta[1] = s * r.xi[2] + 0.5 * P * (2.0 * w[0] * s);
    fe.f_eta[2] = -s * r.xi[1] + 0.5 * P * (2.0 * w[1] * s);
    fe.f_eta[3] = 0.5 * P * (2.0 * w[2] * s);
    return fe;
}

// General Stark-Zeeman chart:
//   b = -(c+1/2) + 1/2 ||A(y)||^2 + V1(y),  M = -<xi_vec, A(y)>,
// pulled back through y = eta0 xi_vec + (1-xi0) eta_vec.
FieldEval eval_field_sz(const RegState& r, const SystemSpec& spec) {
    const StarkZeemanSpec& sz = *spec.stark_zeeman;
    const double s = 1.0 - r.xi[0];
    const Vec3 xv = spatial(r.xi);
    const Vec3 ev = spatial(r.eta);
    const Vec3 y = chart_position(r);

    const Vec3 A = sz.A(y);
    const Mat3 dA = sz.dA(y);
    const double V1 = sz.V1(y);
    const Vec3 dV1 = sz.dV1(y);

    FieldEval fe;
    fe.D = 1.0;
    fe.b = -(spec.c + 0.5) + 0.5 * norm2(A) + V1;
    fe.M = -dot(xv, A);
    fe.f = 1.0 + s * fe.b + fe.M;

    // grad_q b = dA^T A + dV1;  (dA v)_i = sum_j dA[i][j] v_j.
    Vec3 gb;
    for (int j = 0; j < 3; ++j) {
        double t = dV1[j];
        for (int i = 0; i < 3; ++i) t += A[i] * dA[i][j];
        gb[j] = t;
    }
    Vec3 dA_ev{}, dA_xv{}, dAT_xv{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            dA_ev[i] += dA[i][j] * ev[j];
            dA_xv[i] += dA[i][j] * xv[j];
            dAT_xv[j] += xv[i] * dA[i][j];
        }
    }

    // Chain rule through dy/dxi0 = -eta_vec, dy/dxij = eta0 e_j,
    // dy/deta0 = xi_vec, dy/detaj = s e_j.
    const double b_xi0 = -dot(gb, ev);
    const double b_eta0 = dot(gb, xv);
    const double M_xi0 = dot(xv, dA_ev);
    const double M_eta0 = -dot(xv, dA_xv);

    fe.f_xi[0] = -fe.b + s * b_xi0 + M_xi0;
    fe.f_eta[0] = s * b_eta0 + M_eta0;
    for (int j = 0; j < 3; ++j) {
        fe.f_xi[j + 1] = s * (r.eta[0] * gb[j]) + (-A[j] - r.eta[0] * dAT_xv[j]);
        fe.f_eta[j + 1] = s * (s * gb[j]) + (-s * dAT_xv[j]);
    }
    return fe;
}

}  // namespace

FieldEval eval_field(const RegState& r, const SystemSpec& spec) {
    return spec.stark_zeeman ? eval_field_sz(r, spec) : eval_field_3bp(r, spec);
}

double jacobi_H(const UnregState& s, const SystemSpec& spec) {
    if (spec.stark_zeeman) {
        const StarkZeemanSpec& sz = *spec.stark_zeeman;
        const double rq = norm(s.q);
        if (rq < 1e-12) throw CollisionInput();
        const Vec3 v = s.p + sz.A(s.q);
        return 0.5 * norm2(v) - sz.g / rq + sz.V1(s.q);
    }
    const double mu = spec.mu;
    const Vec3 rm = s.q - moon_position(mu);
    const Vec3 re = s.q - earth_position(mu);
    const double dm = norm(rm), de = norm(re);
    if ((mu > 0.0 && dm < 1e-12) || (mu < 1.0 && de < 1e-12)) throw CollisionInput();
    double h = 0.5 * norm2(s.p) + s.p[0] * s.q[1] - s.p[1] * s.q[0];
    if (mu > 0.0) h -= mu / dm;
    if (mu < 1.0) h -= (1.0 - mu) / de;
    return h;
}

TangentUnreg X_H(const UnregState& s, const SystemSpec& spec) {
    TangentUnreg v;
    if (spec.stark_zeeman) {
        const StarkZeemanSpec& sz = *spec.stark_zeeman;
        const double rq = norm(s.q);
        if (rq < 1e-12) throw CollisionInput();
        const Vec3 A = sz.A(s.q);
        const Mat3 dA = sz.dA(s.q);
        const Vec3 dV1 = sz.dV1(s.q);
        const Vec3 u = s.p + A;
        const double r3 = rq * rq * rq;
        for (int i = 0; i < 3; ++i) v.dq[i] = u[i];
        for (int j = 0; j < 3; ++j) {
            double t = sz.g * s.q[j] / r3 + dV1[j];
            for (int i = 0; i < 3; ++i) t += u[i] * dA[i][j];
            v.dp[j] = -t;
        }
        return v;
    }
    const double mu = spec.mu;
    const Vec3 rm = s.q - moon_position(mu);
    const Vec3 re = s.q - earth_position(mu);
    const double dm = norm(rm), de = norm(re);
    if ((mu > 0.0 && dm < 1e-12) || (mu < 1.0 && de < 1e-12)) throw CollisionInput();
    const double am = mu > 0.0 ? mu / (dm * dm * dm) : 0.0;
    const double ae = mu < 1.0 ? (1.0 - mu) / (de * de * de) : 0.0;
    v.dq[0] = s.p[0] + s.q[1];
    v.dq[1] = s.p[1] - s.q[0];
    v.dq[2] = s.p[2];
    v.dp[0] = -am * rm[0] - ae * re[0] + s.p[1];
    v.dp[1] = -am * rm[1] - ae * re[1] - s.p[0];
    v.dp[2] = -am * rm[2] - ae * re[2];
    return v;
}

double Q_reg(const RegState& r, const SystemSpec& spec) {
    const FieldEval fe = eval_field(r, spec);
    return 0.5 * fe.f * fe.f * norm2(r.eta);
}

TangentReg X_Q(const RegState& r, const FieldEval& fe) {
    const double n2 = norm2(r.eta);
    const double fe_xi = dot(fe.f_eta, r.xi);    // f_eta . xi
    const double fe_eta = dot(fe.f_eta, r.eta);  // f_eta . eta
    const double fx_xi = dot(fe.f_xi, r.xi);     // f_xi . xi
    TangentReg v;
    for (int i = 0; i < 4; ++i) {
        v.dxi[i] = fe.f * (fe.f * r.eta[i] + n2 * (fe.f_eta[i] - r.xi[i] * fe_xi));
        v.deta[i] = n2 * fe.f *
                    (r.eta[i] * fe_xi - fe.f_xi[i] - r.xi[i] * (fe.f + fe_eta - fx_xi));
    }
    return v;
}

TangentReg X_Q(const RegState& r, const SystemSpec& spec) {
    return X_Q(r, eval_field(r, spec));
}

double angular_momentum_reg(const RegState& r) {
    return r.xi[2] * r.eta[1] - r.xi[1] * r.eta[2];
}

double kepler_energy(const UnregState& s) {
    return 0.5 * norm2(s.p) - 1.0 / norm(s.q);
}

double angular_term(const UnregState& s) {
    return s.p[0] * s.q[1] - s.p[1] * s.q[0];
}

RegState scale_eta_to_level(const RegState& r, const SystemSpec& spec) {
    const double en = norm(r.eta);
    if (en < 1e-12) throw DegenerateInput("scale_eta_to_level: eta direction is zero");
    RegState unit = r;
    unit.eta = (1.0 / en) * unit.eta;

    const double target = spec.q_level();
    auto Q_of = [&](double sc) {
        RegState t = unit;
        t.eta = sc * unit.eta;
        return Q_reg(t, spec);
    };

    // March out from zero to bracket the first crossing of the level.
    double lo = 0.0, hi = 0.25 * spec.coupling();
    double qhi = Q_of(hi);
    int guard = 0;
    while (qhi < target) {
        lo = hi;
        hi *= 1.5;
        qhi = Q_of(hi);
        if (++guard > 200) throw SamplingFailure("scale_eta_to_level: no level crossing");
    }

    // Safeguarded Newton inside [lo, hi].
    double sc = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
        RegState t = unit;
        t.eta = sc * unit.eta;
        const FieldEval fe = eval_field(t, spec);
        const double q = 0.5 * fe.f * fe.f * sc * sc;
        const double resid = q - target;
        if (std::abs(resid) < 1e-12) {
            return t;
        }
        if (resid > 0.0) hi = sc; else lo = sc;
        const double dfds = dot(fe.f_eta, unit.eta);
        const double dq = fe.f * dfds * sc * sc + fe.f * fe.f * sc;
        double next = sc - resid / dq;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        sc = next;
    }
    throw SamplingFailure("scale_eta_to_level: Newton did not converge");
}

double physical_time_rate(const RegState& r, const SystemSpec& spec) {
    return spec.coupling() * (1.0 - r.xi[0]) * norm(r.eta);
}

double a4_value(const Vec4& eta, const SystemSpec& spec) {
    RegState r;
    r.xi = {1.0, 0.0, 0.0, 0.0};
    r.eta = eta;
    r.eta[0] = 0.0;  // tangency at the pole forces eta0 = 0
    const FieldEval fe = eval_field(r, spec);
    // M_xi . xi vanishes at xi = (1,0,0,0): every term carries a factor of
    // xi_vec or L, both zero there.
    return 1.0 + fe.b + fe.M;
}

}  // namespace cr3bp
