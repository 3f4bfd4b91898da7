// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ledcal Authors.

#include "ledcal/color.hpp"

#include <algorithm>
#include <limits>
#include <utility>

#include <Eigen/SVD>

#include "ledcal/error.hpp"

namespace ledcal {

Mat3 Mat3::from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
    return Mat3({c0[0], c1[0], c2[0], c0[1], c1[1], c2[1], c0[2], c1[2], c2[2]});
}

Mat3 Mat3::from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2) {
    return Mat3({r0[0], r0[1], r0[2], r1[0], r1[1], r1[2], r2[0], r2[1], r2[2]});
}

Mat3 Mat3::transpose() const {
    const auto& a = m_;
    return Mat3({a[0], a[3], a[6], a[1], a[4], a[7], a[2], a[5], a[8]});
}

double Mat3::determinant() const {
    const auto& a = m_;
    return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
}

bool Mat3::is_finite() const {
    return std::all_of(m_.begin(), m_.end(), [](double v) { return std::isfinite(v); });
}

namespace {

// LU with partial pivoting of a 3x3 matrix. perm[i] is the source row of row i.
struct Lu3 {
    std::array<double, 9> lu;
    std::array<int, 3> perm{0, 1, 2};
};

Lu3 factor(const std::array<double, 9>& a) {
    Lu3 f{a};
    auto& m = f.lu;
    for (int k = 0; k < 3; ++k) {
        int pivot = k;
        for (int i = k + 1; i < 3; ++i) {
            if (std::fabs(m[i * 3 + k]) > std::fabs(m[pivot * 3 + k])) pivot = i;
        }
        if (m[pivot * 3 + k] == 0.0) throw SolverError("singular 3x3 matrix");
        if (pivot != k) {
            for (int j = 0; j < 3; ++j) std::swap(m[k * 3 + j], m[pivot * 3 + j]);
            std::swap(f.perm[k], f.perm[pivot]);
        }
        for (int i = k + 1; i < 3; ++i) {
            m[i * 3 + k] /= m[k * 3 + k];
            for (int j = k + 1; j < 3; ++j) m[i * 3 + j] -= m[i * 3 + k] * m[k * 3 + j];
        }
    }
    return f;
}

Vec3 substitute(const Lu3& f, const Vec3& b) {
    const auto& m = f.lu;
    Vec3 y{b[f.perm[0]], b[f.perm[1]], b[f.perm[2]]};
    for (int i = 1; i < 3; ++i) {
        for (int j = 0; j < i; ++j) y[i] -= m[i * 3 + j] * y[j];
    }
    for (int i = 2; i >= 0; --i) {
        for (int j = i + 1; j < 3; ++j) y[i] -= m[i * 3 + j] * y[j];
        y[i] /= m[i * 3 + i];
    }
    return y;
}

}  // namespace

Vec3 Mat3::solve(const Vec3& b) const {
    const Lu3 f = factor(m_);
    Vec3 x = substitute(f, b);
    const Vec3 r = b - (*this) * x;
    return x + substitute(f, r);
}

Mat3 Mat3::inverse() const {
    const Lu3 f = factor(m_);
    const Mat3 e = identity();
    Mat3 inv = from_columns(substitute(f, e.col(0)), substitute(f, e.col(1)), substitute(f, e.col(2)));
    // One refinement step: X <- X + X (I - A X).
    const Mat3 residual = e - (*this) * inv;
    return inv + inv * residual;
}

Vec3 Mat3::singular_values() const {
    Eigen::Matrix3d a;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) a(r, c) = (*this)(r, c);
    }
    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(a);
    const auto& s = svd.singularValues();
    return {s(0), s(1), s(2)};
}

double Mat3::condition_number() const {
    const Vec3 s = singular_values();
    if (s[2] == 0.0) return std::numeric_limits<double>::infinity();
    return s[0] / s[2];
}

double Mat3::norm_inf() const {
    double best = 0.0;
    for (int r = 0; r < 3; ++r) {
        best = std::max(best, std::fabs(m_[r * 3]) + std::fabs(m_[r * 3 + 1]) + std::fabs(m_[r * 3 + 2]));
    }
    return best;
}

double Mat3::norm_frobenius() const {
    double s = 0.0;
    for (double v : m_) s += v * v;
    return std::sqrt(s);
}

double Mat3::max_abs_entry() const {
    double best = 0.0;
    for (double v : m_) best = std::max(best, std::fabs(v));
    return best;
}

Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 out;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            out(r, c) = a(r, 0) * b(0, c) + a(r, 1) * b(1, c) + a(r, 2) * b(2, c);
        }
    }
    return out;
}

Vec3 operator*(const Mat3& a, const Vec3& v) {
    return {dot(a.row(0), v), dot(a.row(1), v), dot(a.row(2), v)};
}

Mat3 operator+(const Mat3& a, const Mat3& b) {
    Mat3 out;
    for (int i = 0; i < 9; ++i) out.m_[i] = a.m_[i] + b.m_[i];
    return out;
}

Mat3 operator-(const Mat3& a, const Mat3& b) {
    Mat3 out;
    for (int i = 0; i < 9; ++i) out.m_[i] = a.m_[i] - b.m_[i];
    return out;
}

Mat3 operator*(double s, const Mat3& a) {
    Mat3 out;
    for (int i = 0; i < 9; ++i) out.m_[i] = s * a.m_[i];
    return out;
}

}  // namespace ledcal
