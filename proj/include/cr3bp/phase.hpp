#pragma once

#include <functional>
#include <optional>

#include "cr3bp/errors.hpp"
#include "cr3bp/types.hpp"

namespace cr3bp {

// Point of unregularized phase space T*R^3 in the rotating frame,
// global coordinates (barycenter at the origin).
struct UnregState {
    Vec3 q{};
    Vec3 p{};
};

// Point of T*S^3 = { (xi, eta) : ||xi|| = 1, <xi, eta> = 0 } in T*R^4.
// Conventions: xi = (xi0, xi_vec), eta = (eta0, eta_vec).
struct RegState {
    Vec4 xi{};
    Vec4 eta{};
};

enum class Chart { Moon, Earth, SingleCenter };

using Mat3 = std::array<Vec3, 3>;  // row-major: m[i][j]

// General Stark-Zeeman field data: H = 1/2 ||p + A(q)||^2 - g/||q|| + V1(q),
// with A3 == 0 and A depending only on (q1, q2).  dA[i][j] = dA_i/dq_j.
struct StarkZeemanSpec {
    double g = 1.0;
    std::function<Vec3(const Vec3&)> A;
    std::function<Mat3(const Vec3&)> dA;
    std::function<double(const Vec3&)> V1;
    std::function<Vec3(const Vec3&)> dV1;
};

struct SystemSpec {
    double mu = 1.0;   // mass ratio in (0, 1]
    double c = -2.0;   // Jacobi energy
    Chart chart = Chart::Moon;
    std::optional<StarkZeemanSpec> stark_zeeman;  // only with Chart::SingleCenter

    bool is_three_body() const { return !stark_zeeman.has_value(); }

    // Coulomb coupling of the regularized primary: mu for the Moon chart,
    // 1-mu for the Earth chart.
    double coupling() const;
    // Coupling of the other primary (0 in single-center mode).
    double secondary_coupling() const;
    // Global position of the chart primary.
    Vec3 primary() const;
    // Offset of the other primary in chart coordinates (other - primary).
    Vec3 other_offset() const;
    // Target value of Q on the energy surface: g^2/2.
    double q_level() const { const double g = coupling(); return 0.5 * g * g; }

    static SystemSpec three_body(double mu, double c, Chart chart = Chart::Moon);
    // Kepler problem at energy c (A = 0, V1 = 0, g = 1); c = -1/2 gives f == 1.
    static SystemSpec kepler(double c);
    // Geodesic flow on the round S^3: f == 1 exactly.
    static SystemSpec round_sphere();
};

inline Vec3 moon_position(double mu) { return {mu - 1.0, 0.0, 0.0}; }
inline Vec3 earth_position(double mu) { return {mu, 0.0, 0.0}; }

// Renormalizes (xi, eta) onto T*S^3: xi <- xi/||xi||, eta <- eta - <xi,eta> xi.
// Throws DegenerateInput when ||xi|| < 1e-9.
RegState project_to_TS3(const Vec4& xi, const Vec4& eta);

// Residuals of the T*S^3 constraints: | ||xi||^2 - 1 | and | <xi, eta> |.
double constraint_residual(const RegState& r);

// Moser map, chart translation included: y = q - primary, x = -p, then the
// inverse stereographic formulas.  Total map.
RegState unreg_to_reg(const UnregState& s, const SystemSpec& spec);

// Stereographic projection back to T*R^3.  Throws CollisionLocus when
// 1 - xi0 < 1e-9 (cotangent fiber over the north pole).
UnregState reg_to_unreg(const RegState& r, const SystemSpec& spec);

// Chart position y = eta0 * xi_vec + (1 - xi0) * eta_vec (no translation).
Vec3 chart_position(const RegState& r);

// Pushforward of a tangent vector under reg_to_unreg at r.
struct TangentUnreg {
    Vec3 dq{};
    Vec3 dp{};
};
struct TangentReg {
    Vec4 dxi{};
    Vec4 deta{};
};
TangentUnreg reg_to_unreg_tangent(const RegState& r, const TangentReg& v);

}  // namespace cr3bp
