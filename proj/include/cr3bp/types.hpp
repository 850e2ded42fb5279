#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace cr3bp {

using Vec3 = std::array<double, 3>;
using Vec4 = std::array<double, 4>;
using Complex = std::complex<double>;

template <std::size_t N>
inline double dot(const std::array<double, N>& a, const std::array<double, N>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
    return s;
}

template <std::size_t N>
inline double norm2(const std::array<double, N>& a) { return dot(a, a); }

template <std::size_t N>
inline double norm(const std::array<double, N>& a) { return std::sqrt(norm2(a)); }

template <std::size_t N>
inline std::array<double, N> operator+(std::array<double, N> a, const std::array<double, N>& b) {
    for (std::size_t i = 0; i < N; ++i) a[i] += b[i];
    return a;
}

template <std::size_t N>
inline std::array<double, N> operator-(std::array<double, N> a, const std::array<double, N>& b) {
    for (std::size_t i = 0; i < N; ++i) a[i] -= b[i];
    return a;
}

template <std::size_t N>
inline std::array<double, N> operator*(double s, std::array<double, N> a) {
    for (std::size_t i = 0; i < N; ++i) a[i] *= s;
    return a;
}

template <std::size_t N>
inline std::array<double, N>& operator+=(std::array<double, N>& a, const std::array<double, N>& b) {
    for (std::size_t i = 0; i < N; ++i) a[i] += b[i];
    return a;
}

// y += s*x
template <std::size_t N>
inline void axpy(double s, const std::array<double, N>& x, std::array<double, N>& y) {
    for (std::size_t i = 0; i < N; ++i) y[i] += s * x[i];
}

// The spatial part xi_vec = (xi1, xi2, xi3) of a 4-vector (xi0, xi1, xi2, xi3).
inline Vec3 spatial(const Vec4& v) { return {v[1], v[2], v[3]}; }

inline double sqr(double x) { return x * x; }

constexpr double kPi = 3.14159265358979323846;

}  // namespace cr3bp
