// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ledcal Authors.

#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "ledcal/color.hpp"

namespace ledcal {

/// Unit 3-vector. Axis convention: +y up, +z the frontal direction (towards
/// the calibration panel).
class Direction {
public:
    /// Normalizes `v`; throws InputError for a zero or non-finite vector.
    static Direction normalized(const Vec3& v);
    /// Accepts `v` only if |v| = 1 within 1e-9.
    static Direction unit(const Vec3& v);
    static Direction frontal() { return Direction({0.0, 0.0, 1.0}); }

    const Vec3& vec() const { return v_; }

private:
    explicit Direction(const Vec3& v) : v_(v) {}
    Vec3 v_;
};

/// Latitude-longitude radiance map, width = 2 x height. Row i spans
/// inclination [i, i+1) * pi / height from +y; column k spans azimuth
/// [k, k+1) * 2 pi / width, with the frontal direction (+z) at the image
/// center.
class EnvMap {
public:
    /// Zero radiance map; throws InputError unless height >= 1.
    explicit EnvMap(std::size_t height);
    /// Throws InputError on a width/height mismatch or invalid radiance.
    EnvMap(std::size_t width, std::size_t height, std::vector<Vec3> data);

    std::size_t width() const { return 2 * height_; }
    std::size_t height() const { return height_; }
    Vec3& at(std::size_t x, std::size_t y) { return data_[y * width() + x]; }
    const Vec3& at(std::size_t x, std::size_t y) const { return data_[y * width() + x]; }
    const std::vector<Vec3>& pixels() const { return data_; }

    /// Direction through the texel center.
    Vec3 texel_direction(std::size_t x, std::size_t y) const;
    /// Solid angle of a texel in row y.
    double texel_solid_angle(std::size_t y) const;

    static EnvMap uniform(std::size_t height, const Vec3& radiance);

private:
    std::size_t height_;
    std::vector<Vec3> data_;
};

/// Cosine-weighted integral of `env` over the hemisphere around `normal`,
/// normalized by the same quadrature applied to a unit environment so that
/// uniform radiance v maps to exactly v.
Vec3 diffuse_convolve(const EnvMap& env, const Direction& normal);

/// Unit radiance where a ray from the origin meets the plane z = 1 inside
/// |x|, |y| <= half_extent; zero elsewhere. `resolution` is the map height.
EnvMap build_panel_env(double half_extent, std::size_t resolution);

/// Ratio of the panel's diffuse irradiance at the frontal direction to that
/// of a full, even sphere of illumination.
double compute_beta(double half_extent = 0.6, std::size_t resolution = 1024);

/// Diffuse integral of the hemisphere facing `facing`.
Vec3 w_avg_from_env(const EnvMap& env, const Direction& facing);

/// White patch reading scaled up by the patch reflectance.
Vec3 w_avg_from_white(const Vec3& white_patch, double white_reflectance = 0.9);

EnvMap read_envmap_pfm(const std::filesystem::path& path);
void write_envmap_pfm(const std::filesystem::path& path, const EnvMap& env);

}  // namespace ledcal
