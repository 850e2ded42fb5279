#pragma once

#include "cr3bp/dynamics.hpp"

namespace cr3bp {

// Smooth non-decreasing cutoff rho(xi0): zero for xi0 <= 1-delta, equal to
// `amplitude` for xi0 >= 1-epsilon, C^2 quintic smoothstep in between.
struct CutoffSpec {
    double delta = 0.4;
    double epsilon = 0.15;
    double amplitude = 1.0;

    void validate() const {
        if (!(epsilon > 0.0 && epsilon <= 0.5 * delta && delta < 2.0 && amplitude > 0.0))
            throw ConfigError("CutoffSpec requires 0 < epsilon <= delta/2 and amplitude > 0");
    }

    double rho(double xi0) const {
        const double lo = 1.0 - delta, hi = 1.0 - epsilon;
        if (xi0 <= lo) return 0.0;
        if (xi0 >= hi) return amplitude;
        const double u = (xi0 - lo) / (hi - lo);
        return amplitude * u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
    }

    double drho(double xi0) const {
        const double lo = 1.0 - delta, hi = 1.0 - epsilon;
        if (xi0 <= lo || xi0 >= hi) return 0.0;
        const double u = (xi0 - lo) / (hi - lo);
        return amplitude * 30.0 * u * u * (1.0 + u * (-2.0 + u)) / (hi - lo);
    }
};

// Physical section value as printed in regularized coordinates:
//   Theta_p = xi3 + i ( (1-xi0) eta0 xi3 + (1-xi0)^2 eta3 ).
// Equal to (1-xi0) * (-p3 + i q3) through stereographic projection.
Complex theta_physical(const RegState& r);

// Geodesic section value Theta_g = eta3 + i xi3.
Complex theta_geodesic(const RegState& r);

// Interpolated section value, oriented so the flow sweeps the angle
// positively (the conjugate of Theta_p glued with the geodesic term):
//   Theta = xi3 - i ( (1-xi0) eta0 xi3 + ((1-xi0)^2 + rho(xi0)) eta3 ).
Complex theta_interpolated_value(const RegState& r, const CutoffSpec& cut);

// Section maps used by the return-map machinery.  `value` must vanish
// exactly on the binding {xi3 = eta3 = 0} and its angle must increase
// along the flow.
class SectionMap {
public:
    enum class Kind { Geodesic, Interpolated };

    static SectionMap geodesic() { return SectionMap(Kind::Geodesic, CutoffSpec{}); }
    static SectionMap interpolated(const CutoffSpec& cut) {
        cut.validate();
        return SectionMap(Kind::Interpolated, cut);
    }

    Kind kind() const { return kind_; }
    const CutoffSpec& cutoff() const { return cut_; }

    Complex value(const RegState& r) const;
    // Directional derivative of the value along a tangent vector.
    Complex d_value(const RegState& r, const TangentReg& v) const;
    // Omega(X) = Re dIm - Im dRe contracted with the given tangent vector.
    double pairing(const RegState& r, const TangentReg& v) const;
    // Omega(X_Q) at r.
    double pairing(const RegState& r, const SystemSpec& spec) const;
    double angle(const RegState& r) const;  // arg in [0, 2*pi)

private:
    SectionMap(Kind k, const CutoffSpec& c) : kind_(k), cut_(c) {}
    Kind kind_;
    CutoffSpec cut_;
};

}  // namespace cr3bp
