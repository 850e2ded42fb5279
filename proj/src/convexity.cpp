#include "cr3bp/convexity.hpp"

#include <cmath>

#include "cr3bp/rng.hpp"

namespace cr3bp {

namespace {

void require_binding(const RegState& r) {
    if (std::abs(r.xi[3]) > 1e-10 || std::abs(r.eta[3]) > 1e-10)
        throw OffBinding("state not on the binding {xi3 = eta3 = 0}");
}

double eigen_min_2x2(double a, double b, double c) {
    return 0.5 * (a + c) - std::sqrt(sqr(0.5 * (a - c)) + b * b);
}

}  // namespace

NormalHessian hessian_S(const RegState& r, const SystemSpec& spec) {
    require_binding(r);
    if (spec.stark_zeeman) return hessian_S_fd(r, spec);

    const double s = 1.0 - r.xi[0];
    const double gS = spec.secondary_coupling();
    const Vec3 d = spec.other_offset();
    const Vec3 xv = spatial(r.xi);
    const Vec3 ev = spatial(r.eta);
    Vec3 w;
    for (int i = 0; i < 3; ++i) w[i] = s * ev[i] + r.eta[0] * xv[i] - d[i];
    const double D = norm2(w);
    if (std::sqrt(D) < 1e-12) throw OtherPrimaryCollision();

    const FieldEval fe = eval_field(r, spec);
    const double n2 = norm2(r.eta);
    const double L = angular_momentum_reg(r);
    const double P = gS * s / (D * std::sqrt(D));

    NormalHessian H;
    H.s11 = fe.f * (fe.f + n2 * P * s * s);
    H.s22 = fe.f * n2 *
            (L - spec.c + 0.5 - gS / std::sqrt(D) + P * (dot(w, ev) + sqr(r.eta[0])));
    H.s12 = fe.f * n2 * P * (s * r.eta[0] - dot(w, xv));
    H.eigen_min = eigen_min_2x2(H.s11, H.s12, H.s22);
    return H;
}

NormalHessian hessian_S_fd(const RegState& r, const SystemSpec& spec) {
    require_binding(r);
    const double h = 1e-6;
    auto field_at = [&](double dxi3, double deta3) {
        RegState p = r;
        p.xi[3] += dxi3;
        p.eta[3] += deta3;
        return X_Q(p, spec);
    };
    const TangentReg fp_eta = field_at(0.0, h), fm_eta = field_at(0.0, -h);
    const TangentReg fp_xi = field_at(h, 0.0), fm_xi = field_at(-h, 0.0);

    const double dxi3p_deta3 = (fp_eta.dxi[3] - fm_eta.dxi[3]) / (2.0 * h);
    const double deta3p_dxi3 = (fp_xi.deta[3] - fm_xi.deta[3]) / (2.0 * h);
    const double dxi3p_dxi3 = (fp_xi.dxi[3] - fm_xi.dxi[3]) / (2.0 * h);
    const double deta3p_deta3 = (fp_eta.deta[3] - fm_eta.deta[3]) / (2.0 * h);

    NormalHessian H;
    H.s11 = dxi3p_deta3;
    H.s22 = -deta3p_dxi3;
    H.s12 = 0.5 * (dxi3p_dxi3 - deta3p_deta3);
    H.eigen_min = eigen_min_2x2(H.s11, H.s12, H.s22);
    return H;
}

RotationRates unreg_rotation_rate(const UnregState& s, const SystemSpec& spec) {
    if (std::abs(s.q[2]) > 1e-10 || std::abs(s.p[2]) > 1e-10)
        throw OffBinding("state not on the planar set {q3 = p3 = 0}");
    const double mu = spec.mu;
    const double dm = norm(s.q - moon_position(mu));
    const double de = norm(s.q - earth_position(mu));
    if ((mu > 0.0 && dm < 1e-6) || (mu < 1.0 && de < 1e-6)) throw CollisionInput();
    RotationRates out;
    out.lambda1 = 1.0;
    out.lambda2 = (mu > 0.0 ? mu / (dm * dm * dm) : 0.0) +
                  (mu < 1.0 ? (1.0 - mu) / (de * de * de) : 0.0);
    return out;
}

ConvexityReport convexity_certificate(const SystemSpec& spec, int n_samples,
                                      std::uint64_t seed) {
    Rng rng(seed);
    ConvexityReport rep;
    rep.eigen_min = 1e300;
    int failures = 0;

    auto consider = [&](const RegState& s) {
        const NormalHessian H = hessian_S(s, spec);
        if (H.eigen_min < rep.eigen_min) {
            rep.eigen_min = H.eigen_min;
            rep.argmin = s;
        }
        ++rep.n_samples;
    };

    // The collision locus is where S degenerates first; probe it always.
    const double g = spec.coupling();
    for (int k = 0; k < 8; ++k) {
        const double a = 2.0 * kPi * k / 8.0;
        RegState s;
        s.xi = {1.0, 0.0, 0.0, 0.0};
        s.eta = {0.0, g * std::cos(a), g * std::sin(a), 0.0};
        consider(s);
    }

    while (rep.n_samples < n_samples + 8) {
        RegState s;
        Vec4 xi = rng.gaussian_vec<4>();
        xi[3] = 0.0;
        const double n = norm(xi);
        if (n < 1e-9) continue;
        s.xi = (1.0 / n) * xi;
        Vec4 e = rng.gaussian_vec<4>();
        e[3] = 0.0;
        axpy(-dot(s.xi, e), s.xi, e);
        const double en = norm(e);
        if (en < 1e-9) continue;
        s.eta = (1.0 / en) * e;
        try {
            consider(scale_eta_to_level(s, spec));
        } catch (const Error&) {
            if (++failures > std::max(n_samples / 20, 16))
                throw SamplingFailure("convexity_certificate: sampling failures exceeded budget");
        }
    }
    rep.pass = rep.eigen_min > 0.0;
    return rep;
}

}  // namespace cr3bp
