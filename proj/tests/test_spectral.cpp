// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ledcal Authors.

#include <cmath>

#include <doctest.h>

#include "ledcal/error.hpp"
#include "ledcal/geometry.hpp"
#include "ledcal/spectral.hpp"
#include "test_support.hpp"

using namespace ledcal;
using namespace ledcal::spectral;

namespace {

SpectralCurve random_curve(testing::Rng& rng) {
    std::array<double, kSamples> v{};
    for (double& x : v) x = rng.uniform(0, 1);
    return SpectralCurve(v);
}

}  // namespace

TEST_CASE("grid") {
    CHECK(wavelength(0) == 380.0);
    CHECK(wavelength(80) == 780.0);
    CHECK(nearest_sample(589.0) == nearest_sample(590.0));
    CHECK(wavelength(nearest_sample(589.0)) == 590.0);
    CHECK_THROWS_AS(nearest_sample(200.0), InputError);
    std::array<double, kSamples> bad{};
    bad[3] = -1.0;
    CHECK_THROWS_AS(SpectralCurve{bad}, InputError);
}

TEST_CASE("integrate_response") {
    const CameraCurves cam{make_gaussian_band(600, 70, 1), make_gaussian_band(540, 70, 1),
                           make_gaussian_band(460, 70, 1)};
    CHECK(integrate_response(cam, SpectralCurve::flat(0.0)) == Vec3{0, 0, 0});

    CameraCurves delta{make_line(550, 1.0), SpectralCurve::flat(0.0), SpectralCurve::flat(0.0)};
    std::array<double, kSamples> l{}, r{};
    l[nearest_sample(550)] = 2.0;
    r[nearest_sample(550)] = 0.5;
    const Vec3 v = integrate_response(delta, SpectralCurve(l), SpectralCurve(r));
    CHECK(v[0] == 5.0);
    CHECK(v[1] == 0.0);

    testing::Rng rng(2);
    for (int k = 0; k < 20; ++k) {
        const SpectralCurve l1 = random_curve(rng), l2 = random_curve(rng), refl = random_curve(rng);
        const double a = rng.uniform(0, 3), b = rng.uniform(0, 3);
        const Vec3 lhs = integrate_response(cam, a * l1 + b * l2, refl);
        const Vec3 rhs = a * integrate_response(cam, l1, refl) + b * integrate_response(cam, l2, refl);
        for (int c = 0; c < 3; ++c) CHECK(lhs[c] == doctest::Approx(rhs[c]).epsilon(1e-13));
    }
}

TEST_CASE("gaussian bands") {
    const SpectralCurve zero = make_gaussian_band(550, 30, 0.0);
    CHECK(zero == SpectralCurve::flat(0.0));
    const SpectralCurve g = make_gaussian_band(550, 30, 2.0);
    CHECK(g[nearest_sample(550)] == 2.0);
    CHECK(g[nearest_sample(535)] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g[nearest_sample(565)] == doctest::Approx(1.0).epsilon(1e-12));
    const SpectralCurve h = make_gaussian_band(450, 20, 1.0);
    const SpectralCurve sum = g + h;
    for (std::size_t i = 0; i < kSamples; ++i) CHECK(sum[i] == g[i] + h[i]);
    CHECK_THROWS_AS(make_gaussian_band(550, 0.0, 1.0), InputError);
}

TEST_CASE("scenes are deterministic and valid") {
    for (Scenario s : {Scenario::broad, Scenario::rgb_led, Scenario::monochromatic, Scenario::flat}) {
        const OracleScene a = make_scene(s, 42);
        const OracleScene b = make_scene(s, 42);
        CHECK(a.illuminant == b.illuminant);
        CHECK(a.reflectances == b.reflectances);
        CHECK(a.reflectances[kDefaultWhiteIndex] == SpectralCurve::flat(0.9));
        for (std::size_t k = 0; k < kNeutralRow.size(); ++k) {
            CHECK(a.reflectances[kDefaultWhiteIndex + k] == SpectralCurve::flat(kNeutralRow[k]));
        }
        CHECK(parse_scenario(scenario_name(s)) == s);
    }
    CHECK_FALSE(make_scene(Scenario::broad, 1).reflectances == make_scene(Scenario::broad, 2).reflectances);
    CHECK_THROWS_AS(parse_scenario("tungsten"), InputError);
}

TEST_CASE("oracle calibration structure") {
    const double beta = 0.311;
    const OracleScene scene = make_scene(Scenario::broad, 3);
    const OracleCalibration oc = oracle_calibration(scene, beta);
    for (int c = 0; c < 3; ++c) CHECK(oc.SL.col(c) == integrate_response(scene.camera, scene.leds[c]));
    CHECK(build_SL(oc.SL.col(0), oc.SL.col(1), oc.SL.col(2)) == oc.SL);

    // Neutral patches are flat, so their SRL is beta * r * SL.
    for (std::size_t k = 0; k < kNeutralRow.size(); ++k) {
        const Mat3 expect = (beta * kNeutralRow[k]) * oc.SL;
        CHECK((oc.srl.patches[kDefaultWhiteIndex + k] - expect).max_abs_entry() < 1e-12 * expect.max_abs_entry());
    }
    CHECK_THROWS_AS(oracle_calibration(scene, 0.0), InputError);
}

TEST_CASE("simulated lit chart equals direct spectral integration") {
    const double beta = compute_beta(0.6, 512);
    for (Scenario s : {Scenario::broad, Scenario::rgb_led, Scenario::flat}) {
        const OracleScene scene = make_scene(s, 17);
        const OracleCalibration oc = oracle_calibration(scene, beta);
        const Mat3 M = solve_M(oc.SL);
        const auto simulated = predict_lit_patches(oc.srl, M, oc.w_avg, beta);
        const auto direct = stage_lit_chart(scene, M * oc.w_avg);
        for (std::size_t j = 0; j < kChartPatches; ++j) CHECK(max_abs(simulated[j] - direct[j]) < 1e-9);
    }
}

TEST_CASE("brute_force_Q") {
    testing::Rng rng(6);
    const auto f = testing::random_fixture(rng);
    CHECK((brute_force_Q(f.targets, f.targets) - Mat3::identity()).max_abs_entry() < 1e-12);

    std::array<Vec3, kChartPatches> pred{};
    std::array<Vec3, kChartPatches> tgt{};
    pred[0] = {2, 0, 0};
    pred[1] = {0, 4, 0};
    pred[2] = {0, 0, 5};
    tgt[0] = {1, 0, 0};
    tgt[1] = {0, 1, 0};
    tgt[2] = {0, 0, 1};
    ChartWeights w{};
    w[0] = w[1] = w[2] = 1.0;
    const Mat3 q = brute_force_Q(pred, ChartSamples(tgt), w);
    CHECK((q - Mat3::diagonal(0.5, 0.25, 0.2)).max_abs_entry() < 1e-14);

    std::array<Vec3, kChartPatches> collinear{};
    for (std::size_t j = 0; j < kChartPatches; ++j) collinear[j] = {1.0 * j, 2.0 * j, 0.5 * j};
    CHECK_THROWS_AS(brute_force_Q(collinear, f.targets), SolverError);
}

TEST_CASE("oracle fixtures: rgb-led is near identity, broad improves, monochromatic loses N") {
    const double beta = compute_beta(0.6, 512);
    {
        const OracleCalibration oc = oracle_calibration(make_scene(Scenario::flat, 5), beta);
        const QSolution q = solve_Q(oc.srl, solve_M(oc.SL), oc.w_avg, oc.targets, beta);
        CHECK((q.Q - Mat3::identity()).max_abs_entry() < 1e-9);
        CHECK(q.residual < 1e-18);
    }
    {
        const OracleCalibration oc = oracle_calibration(make_scene(Scenario::rgb_led, 5), beta);
        const QSolution q = solve_Q(oc.srl, solve_M(oc.SL), oc.w_avg, oc.targets, beta);
        CHECK((q.Q - Mat3::identity()).norm_inf() < 0.05);
    }
    {
        const OracleCalibration oc = oracle_calibration(make_scene(Scenario::broad, 5), beta);
        const Mat3 M = solve_M(oc.SL);
        const QSolution q = solve_Q(oc.srl, M, oc.w_avg, oc.targets, beta);
        const auto predicted = predict_lit_patches(oc.srl, M, oc.w_avg, beta);
        const Vec3 e_m = chart_error(oc.targets, simulate_lit_chart(oc.srl, M, oc.w_avg, beta).chart);
        std::array<Vec3, kChartPatches> corrected{};
        for (std::size_t j = 0; j < kChartPatches; ++j) corrected[j] = q.Q * predicted[j];
        const Vec3 e_mq = chart_error(oc.targets, ChartSamples(corrected));
        CHECK(e_mq[0] + e_mq[1] + e_mq[2] < e_m[0] + e_m[1] + e_m[2]);
    }
    {
        const OracleCalibration oc = oracle_calibration(make_scene(Scenario::monochromatic, 5), beta);
        const Mat3 M = solve_M(oc.SL);
        const QSolution q = solve_Q(oc.srl, M, oc.w_avg, oc.targets, beta);
        CHECK(q.Q.condition_number() > 1e4);
        CHECK_FALSE(solve_N(M, q.Q).has_value());
    }
}

TEST_CASE("scene CSV directory round trip") {
    const auto dir = testing::fresh_dir("scene");
    const OracleScene scene = make_scene(Scenario::broad, 8);
    write_scene(dir, scene);
    const OracleScene back = read_scene(dir);
    CHECK(back.illuminant == scene.illuminant);
    CHECK(back.reflectances == scene.reflectances);
    CHECK(back.camera == scene.camera);
    CHECK(back.leds == scene.leds);
    CHECK(curve_to_csv(scene.illuminant).rfind("wavelength_nm,value\n380,", 0) == 0);
    CHECK_THROWS_AS(curve_from_csv("wavelength_nm,value\n380,1\n"), InputError);
}
