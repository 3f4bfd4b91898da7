// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ledcal Authors.

#include "ledcal/geometry.hpp"

#include <cmath>
#include <numbers>

#include "ledcal/error.hpp"
#include "ledcal/image_io.hpp"

namespace ledcal {

using std::numbers::pi;

Direction Direction::normalized(const Vec3& v) {
    const double n = std::sqrt(dot(v, v));
    if (!std::isfinite(n) || n == 0.0) throw InputError("direction must be a finite non-zero vector");
    return Direction((1.0 / n) * v);
}

Direction Direction::unit(const Vec3& v) {
    const double n = std::sqrt(dot(v, v));
    if (!(std::fabs(n - 1.0) <= 1e-9)) throw InputError("direction is not unit length");
    return Direction(v);
}

EnvMap::EnvMap(std::size_t height) : height_(height), data_(2 * height * height, Vec3{0, 0, 0}) {
    if (height == 0) throw InputError("environment map height must be positive");
}

EnvMap::EnvMap(std::size_t width, std::size_t height, std::vector<Vec3> data)
    : height_(height), data_(std::move(data)) {
    if (height == 0 || width != 2 * height) throw InputError("environment map width must equal 2 x height");
    if (data_.size() != width * height) throw InputError("environment map data size mismatch");
    for (const Vec3& v : data_) {
        for (double c : v) {
            if (!std::isfinite(c) || c < 0.0) throw InputError("environment radiance must be finite and >= 0");
        }
    }
}

EnvMap EnvMap::uniform(std::size_t height, const Vec3& radiance) {
    EnvMap env(height);
    for (Vec3& v : env.data_) v = radiance;
    return env;
}

Vec3 EnvMap::texel_direction(std::size_t x, std::size_t y) const {
    const double theta = (static_cast<double>(y) + 0.5) * pi / static_cast<double>(height_);
    const double phi = (static_cast<double>(x) + 0.5) * 2.0 * pi / static_cast<double>(width());
    const double s = std::sin(theta);
    return {-s * std::sin(phi), std::cos(theta), -s * std::cos(phi)};
}

double EnvMap::texel_solid_angle(std::size_t y) const {
    const double theta = (static_cast<double>(y) + 0.5) * pi / static_cast<double>(height_);
    return (2.0 * pi / static_cast<double>(width())) * (pi / static_cast<double>(height_)) * std::sin(theta);
}

Vec3 diffuse_convolve(const EnvMap& env, const Direction& normal) {
    const Vec3& n = normal.vec();
    const std::size_t w = env.width();
    std::vector<double> sin_phi(w), cos_phi(w);
    for (std::size_t x = 0; x < w; ++x) {
        const double phi = (static_cast<double>(x) + 0.5) * 2.0 * pi / static_cast<double>(w);
        sin_phi[x] = std::sin(phi);
        cos_phi[x] = std::cos(phi);
    }
    Vec3 sum{0, 0, 0};
    double weight_sum = 0.0;
    for (std::size_t y = 0; y < env.height(); ++y) {
        const double theta = (static_cast<double>(y) + 0.5) * pi / static_cast<double>(env.height());
        const double st = std::sin(theta), ct = std::cos(theta);
        const double d_omega = env.texel_solid_angle(y);
        Vec3 row_sum{0, 0, 0};
        double row_weight = 0.0;
        for (std::size_t x = 0; x < w; ++x) {
            const double cosine = -st * sin_phi[x] * n[0] + ct * n[1] - st * cos_phi[x] * n[2];
            if (cosine <= 0.0) continue;
            const Vec3& L = env.at(x, y);
            row_sum[0] += L[0] * cosine;
            row_sum[1] += L[1] * cosine;
            row_sum[2] += L[2] * cosine;
            row_weight += cosine;
        }
        sum = sum + d_omega * row_sum;
        weight_sum += d_omega * row_weight;
    }
    // weight_sum approximates pi, the clamped-cosine integral of a unit sphere.
    return (1.0 / weight_sum) * sum;
}

EnvMap build_panel_env(double half_extent, std::size_t resolution) {
    if (!(half_extent > 0.0)) throw InputError("panel half extent must be positive");
    if (resolution < 64) throw InputError("panel environment resolution must be at least 64");
    // Texel value is the fraction of a 4x4 grid of sub-directions that hits
    // the panel, so edge texels are partially covered.
    constexpr int kSub = 4;
    EnvMap env(resolution);
    const double h = static_cast<double>(env.height());
    const double w = static_cast<double>(env.width());
    auto hits = [half_extent](double theta, double phi) {
        const double st = std::sin(theta);
        const double dx = -st * std::sin(phi), dy = std::cos(theta), dz = -st * std::cos(phi);
        return dz > 0.0 && std::fabs(dx) <= half_extent * dz && std::fabs(dy) <= half_extent * dz;
    };
    for (std::size_t y = 0; y < env.height(); ++y) {
        for (std::size_t x = 0; x < env.width(); ++x) {
            // The panel lies in front; only texels reaching z > 0 can see it.
            if (env.texel_direction(x, y)[2] < -4.0 * pi / h) continue;
            int count = 0;
            for (int sy = 0; sy < kSub; ++sy) {
                const double theta = (static_cast<double>(y) + (sy + 0.5) / kSub) * pi / h;
                for (int sx = 0; sx < kSub; ++sx) {
                    const double phi = (static_cast<double>(x) + (sx + 0.5) / kSub) * 2.0 * pi / w;
                    count += hits(theta, phi) ? 1 : 0;
                }
            }
            const double c = static_cast<double>(count) / (kSub * kSub);
            env.at(x, y) = {c, c, c};
        }
    }
    return env;
}

double compute_beta(double half_extent, std::size_t resolution) {
    return diffuse_convolve(build_panel_env(half_extent, resolution), Direction::frontal())[1];
}

Vec3 w_avg_from_env(const EnvMap& env, const Direction& facing) { return diffuse_convolve(env, facing); }

Vec3 w_avg_from_white(const Vec3& white_patch, double white_reflectance) {
    if (!(white_reflectance > 0.0 && white_reflectance <= 1.0)) {
        throw InputError("white reflectance must be in (0, 1]");
    }
    return {white_patch[0] / white_reflectance, white_patch[1] / white_reflectance,
            white_patch[2] / white_reflectance};
}

EnvMap read_envmap_pfm(const std::filesystem::path& path) {
    LinearImage img = read_pfm(path);
    const std::size_t w = img.width(), h = img.height();
    return EnvMap(w, h, std::move(img.pixels()));
}

void write_envmap_pfm(const std::filesystem::path& path, const EnvMap& env) {
    write_pfm(path, LinearImage(env.width(), env.height(), env.pixels()));
}

}  // namespace ledcal
