// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ledcal Authors.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace ledcal {

/// Linear RGB triple (or any 3-vector). Index 0/1/2 = red/green/blue.
using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& v) { return {s * v[0], s * v[1], s * v[2]}; }
inline Vec3 operator*(const Vec3& v, double s) { return s * v; }

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double max_abs(const Vec3& v) { return std::fmax(std::fabs(v[0]), std::fmax(std::fabs(v[1]), std::fabs(v[2]))); }
inline bool all_finite(const Vec3& v) { return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]); }

/// 3x3 real matrix, row-major. For color transforms rows index camera
/// (output) channels and columns index input channels.
class Mat3 {
public:
    constexpr Mat3() = default;
    constexpr explicit Mat3(const std::array<double, 9>& row_major) : m_(row_major) {}

    static constexpr Mat3 identity() { return Mat3({1, 0, 0, 0, 1, 0, 0, 0, 1}); }
    static constexpr Mat3 diagonal(double a, double b, double c) { return Mat3({a, 0, 0, 0, b, 0, 0, 0, c}); }
    static Mat3 from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2);
    static Mat3 from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2);

    double& operator()(std::size_t row, std::size_t col) { return m_[row * 3 + col]; }
    double operator()(std::size_t row, std::size_t col) const { return m_[row * 3 + col]; }

    Vec3 row(std::size_t r) const { return {m_[r * 3], m_[r * 3 + 1], m_[r * 3 + 2]}; }
    Vec3 col(std::size_t c) const { return {m_[c], m_[3 + c], m_[6 + c]}; }
    const std::array<double, 9>& data() const { return m_; }

    Mat3 transpose() const;
    double determinant() const;
    bool is_finite() const;

    /// Inverse by partially pivoted elimination followed by one step of
    /// iterative refinement. Throws SolverError when exactly singular.
    Mat3 inverse() const;

    /// Solves A x = b with partial pivoting. Throws SolverError when singular.
    Vec3 solve(const Vec3& b) const;

    /// Singular values, descending.
    Vec3 singular_values() const;

    /// sigma_max / sigma_min; +inf when sigma_min is zero.
    double condition_number() const;

    /// Maximum absolute row sum.
    double norm_inf() const;
    double norm_frobenius() const;
    double max_abs_entry() const;

    friend Mat3 operator*(const Mat3& a, const Mat3& b);
    friend Vec3 operator*(const Mat3& a, const Vec3& v);
    friend Mat3 operator+(const Mat3& a, const Mat3& b);
    friend Mat3 operator-(const Mat3& a, const Mat3& b);
    friend Mat3 operator*(double s, const Mat3& a);
    friend bool operator==(const Mat3& a, const Mat3& b) = default;

private:
    std::array<double, 9> m_{};
};

}  // namespace ledcal
