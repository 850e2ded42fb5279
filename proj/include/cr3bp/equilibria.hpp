#pragma once

#include "cr3bp/phase.hpp"

namespace cr3bp {

// Lagrange points ordered by critical value, H(L1) <= ... <= H(L5).
struct LagrangeSet {
    std::array<Vec3, 5> points{};
    std::array<double, 5> values{};
};

enum class HillLabel { MoonComponent, EarthComponent, MergedComponent, Unbounded, Forbidden };

// Effective potential -1/2 (q1^2 + q2^2) - mu/||q-m|| - (1-mu)/||q-e||;
// the Hill region of energy c is { U(q) <= c }.
double effective_potential(const Vec3& q, double mu);

// Collinear points by bracketed bisection+Newton, triangular points in
// closed form; values taken at zero rotating-frame velocity p = (-q2, q1, 0).
// Throws OutOfRange for mu outside (0, 1).
LagrangeSet lagrange_points(double mu);

// Connected-component label of q in the Hill region of energy c.
HillLabel hill_label(const Vec3& q, double c, const SystemSpec& spec);

// Grid flood-fill classifier for repeated queries at fixed (mu, c).
class HillClassifier {
public:
    HillClassifier(double mu, double c);
    ~HillClassifier();
    HillClassifier(const HillClassifier&) = delete;
    HillClassifier& operator=(const HillClassifier&) = delete;
    HillLabel label(const Vec3& q) const;

private:
    struct Impl;
    Impl* impl_;
};

// Zero-velocity momentum at q, p = (-q2, q1, 0).
inline Vec3 zero_velocity_momentum(const Vec3& q) { return {-q[1], q[0], 0.0}; }

}  // namespace cr3bp
