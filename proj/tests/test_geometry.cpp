// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ledcal Authors.

#include <cmath>
#include <numbers>

#include <doctest.h>

#include "ledcal/error.hpp"
#include "ledcal/image_io.hpp"
#include "ledcal/geometry.hpp"
#include "test_support.hpp"

using namespace ledcal;

TEST_CASE("analytic form-factor oracle reproduces the frozen values") {
    CHECK(testing::analytic_panel_form_factor(0.6) == doctest::Approx(0.3112771120913329).epsilon(1e-14));
    CHECK(testing::analytic_panel_form_factor(0.5) == doctest::Approx(0.2394564704607735).epsilon(1e-14));
    CHECK(testing::analytic_panel_form_factor(100.0) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("direction validation") {
    CHECK_NOTHROW(Direction::unit({0, 1, 0}));
    CHECK_THROWS_AS(Direction::unit({0, 1.01, 0}), InputError);
    CHECK_THROWS_AS(Direction::normalized({0, 0, 0}), InputError);
    const Direction d = Direction::normalized({0, 3, 4});
    CHECK(d.vec()[2] == doctest::Approx(0.8));
}

TEST_CASE("env map texel layout") {
    const EnvMap env(8);
    CHECK(env.width() == 16);
    // Center of the image looks along +z.
    const Vec3 center = env.texel_direction(8, 4);
    CHECK(center[2] > 0.9);
    CHECK(env.texel_direction(0, 0)[1] > 0.9);  // top row looks up
    double total = 0.0;
    for (std::size_t y = 0; y < env.height(); ++y) total += env.texel_solid_angle(y) * env.width();
    CHECK(total == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-2));
    CHECK_THROWS_AS(EnvMap(10, 4, std::vector<Vec3>(40)), InputError);
}

TEST_CASE("diffuse convolution of uniform and empty environments") {
    for (std::size_t h : {256u, 300u}) {
        const EnvMap env = EnvMap::uniform(h, {0.7, 0.7, 0.7});
        for (const Vec3& n : {Vec3{0, 0, 1}, Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0.3, -0.5, 0.2}}) {
            const Vec3 r = diffuse_convolve(env, Direction::normalized(n));
            for (double c : r) CHECK(std::fabs(c - 0.7) <= 0.002 * 0.7);
        }
    }
    const Vec3 zero = diffuse_convolve(EnvMap(64), Direction::frontal());
    CHECK(zero == Vec3{0, 0, 0});
}

TEST_CASE("frontal hemisphere alone gives full irradiance; the back half gives none") {
    EnvMap front(256), back(256);
    for (std::size_t y = 0; y < front.height(); ++y) {
        for (std::size_t x = 0; x < front.width(); ++x) {
            (front.texel_direction(x, y)[2] > 0 ? front : back).at(x, y) = {1, 1, 1};
        }
    }
    const Vec3 f = diffuse_convolve(front, Direction::frontal());
    const Vec3 b = diffuse_convolve(back, Direction::frontal());
    for (int c = 0; c < 3; ++c) {
        CHECK(f[c] == doctest::Approx(1.0).epsilon(2e-3));
        CHECK(b[c] == 0.0);
    }
    CHECK(w_avg_from_env(back, Direction::frontal()) == Vec3{0, 0, 0});
}

TEST_CASE("diffuse convolution is linear (superposition)") {
    testing::Rng rng(21);
    EnvMap e1(64), e2(64), mix(64);
    const double a = 0.37, b = 2.5;
    for (std::size_t y = 0; y < 64; ++y) {
        for (std::size_t x = 0; x < 128; ++x) {
            e1.at(x, y) = {rng.uniform(0, 3), rng.uniform(0, 3), rng.uniform(0, 3)};
            e2.at(x, y) = {rng.uniform(0, 3), rng.uniform(0, 3), rng.uniform(0, 3)};
            mix.at(x, y) = a * e1.at(x, y) + b * e2.at(x, y);
        }
    }
    const Direction n = Direction::normalized({0.2, 0.4, 0.9});
    const Vec3 lhs = diffuse_convolve(mix, n);
    const Vec3 rhs = a * diffuse_convolve(e1, n) + b * diffuse_convolve(e2, n);
    for (int c = 0; c < 3; ++c) CHECK(std::fabs(lhs[c] - rhs[c]) < 1e-9);
}

TEST_CASE("panel environment geometry") {
    const EnvMap env = build_panel_env(0.5, 256);
    // Lit texels all lie within the 2*atan(0.5) cone footprint of the square.
    double max_angle_x = 0.0;
    for (std::size_t y = 0; y < env.height(); ++y) {
        for (std::size_t x = 0; x < env.width(); ++x) {
            if (env.at(x, y)[0] == 0.0) continue;
            const Vec3 d = env.texel_direction(x, y);
            max_angle_x = std::max(max_angle_x, std::atan2(std::fabs(d[0]), d[2]));
        }
    }
    const double full_angle = 2.0 * max_angle_x * 180.0 / std::numbers::pi;
    CHECK(full_angle == doctest::Approx(53.13010235415598).epsilon(0.02));

    // 0.6 on a 90-degree cube face of half width 1: 54 of 90 pixels.
    CHECK(2.0 * 0.6 / 2.0 * 90.0 == doctest::Approx(54.0));
    CHECK_THROWS_AS(build_panel_env(0.0, 256), InputError);
    CHECK_THROWS_AS(build_panel_env(0.5, 32), InputError);
}

TEST_CASE("beta matches the analytic form factor") {
    for (double h : {0.25, 0.5, 0.6, 1.0}) {
        CHECK(std::fabs(compute_beta(h, 1024) - testing::analytic_panel_form_factor(h)) < 1e-3);
    }
    const double b06 = compute_beta(0.6, 1024);
    CHECK(b06 >= 0.308);
    CHECK(b06 <= 0.314);
    CHECK(std::fabs(b06 - 0.3112771120913329) < 1e-3);
    const double b05 = compute_beta(0.5, 1024);
    CHECK(std::fabs(b05 - 0.2394) < 0.003);
    CHECK(compute_beta(100.0, 512) == doctest::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("beta is monotone, bounded and converges") {
    double prev = 0.0;
    for (double h = 0.1; h < 5.0; h *= 1.35) {
        const double b = compute_beta(h, 256);
        CHECK(b >= prev);
        CHECK(b > 0.0);
        CHECK(b <= 1.0);
        prev = b;
    }
    for (double h : {0.5, 0.6}) CHECK(std::fabs(compute_beta(h, 512) - compute_beta(h, 1024)) < 1e-3);
}

TEST_CASE("w_avg from environment and from white patch") {
    const Vec3 u = w_avg_from_env(EnvMap::uniform(256, {1, 2, 3}), Direction::frontal());
    CHECK(u[0] == doctest::Approx(1).epsilon(2e-3));
    CHECK(u[1] == doctest::Approx(2).epsilon(2e-3));
    CHECK(u[2] == doctest::Approx(3).epsilon(2e-3));

    const double beta = compute_beta(0.6, 512);
    const Vec3 p = w_avg_from_env(build_panel_env(0.6, 512), Direction::frontal());
    for (double c : p) CHECK(c == beta);

    CHECK(w_avg_from_white({0.9, 0.9, 0.9}, 0.9) == Vec3{1, 1, 1});
    const Vec3 w = w_avg_from_white({0.45, 0.36, 0.27}, 0.9);
    CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(w[1] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(w[2] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(w_avg_from_white({0.2, 0.3, 0.4}, 1.0) == Vec3{0.2, 0.3, 0.4});
    CHECK_THROWS_AS(w_avg_from_white({1, 1, 1}, 0.0), InputError);
    CHECK_THROWS_AS(w_avg_from_white({1, 1, 1}, -0.5), InputError);
}

TEST_CASE("env map PFM round trip enforces the 2:1 aspect") {
    const auto dir = testing::fresh_dir("env");
    const EnvMap env = build_panel_env(0.6, 64);
    write_envmap_pfm(dir / "panel.pfm", env);
    const EnvMap back = read_envmap_pfm(dir / "panel.pfm");
    CHECK(back.pixels() == env.pixels());
    write_pfm(dir / "square.pfm", LinearImage(8, 8));
    CHECK_THROWS_AS(read_envmap_pfm(dir / "square.pfm"), InputError);
}
