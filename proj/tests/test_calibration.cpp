// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ledcal Authors.

#include <cmath>

#include <doctest.h>

#include "ledcal/calibration.hpp"
#include "ledcal/error.hpp"
#include "ledcal/spectral.hpp"
#include "test_support.hpp"

using namespace ledcal;

namespace {

ChartSamples chart_of(const std::array<Vec3, kChartPatches>& p) { return ChartSamples(p); }

// Independent restatement of the chart error formula.
Vec3 chart_error_reference(const ChartSamples& t, const ChartSamples& m) {
    Vec3 out{};
    for (int c = 0; c < 3; ++c) {
        double s = 0.0;
        for (std::size_t j = 0; j < kChartPatches; ++j) s += std::fabs(m[j][c] - t[j][c]);
        out[c] = s / (24.0 * t.white()[c]);
    }
    return out;
}

}  // namespace

TEST_CASE("build_SL stacks primaries as columns") {
    CHECK(build_SL({1, 0, 0}, {0, 1, 0}, {0, 0, 1}) == Mat3::identity());
    const Vec3 r{0.8, 0.1, 0.05}, g{0.2, 0.9, 0.1}, b{0.02, 0.1, 0.95};
    const Mat3 SL = build_SL(r, g, b);
    CHECK(SL.col(0) == r);
    CHECK(SL.col(1) == g);
    CHECK(SL.col(2) == b);
    const Mat3 permuted = build_SL(b, r, g);
    CHECK(permuted.col(0) == b);
    CHECK(permuted.col(2) == g);
    CHECK_THROWS_AS(build_SL({-0.1, 0, 0}, g, b), InputError);
}

TEST_CASE("solve_M inverts SL") {
    CHECK(solve_M(Mat3::identity()) == Mat3::identity());
    const Mat3 d = solve_M(Mat3::diagonal(2, 4, 5));
    CHECK(d(0, 0) == 0.5);
    CHECK(d(1, 1) == 0.25);
    CHECK(d(2, 2) == doctest::Approx(0.2).epsilon(1e-16));
    testing::Rng rng(1);
    for (int k = 0; k < 100; ++k) {
        const Mat3 SL = testing::random_primaries(rng);
        const Mat3 M = solve_M(SL);
        CHECK((SL * M - Mat3::identity()).norm_inf() < 1e-10);
        CHECK((M * SL - Mat3::identity()).norm_inf() < 1e-10);
    }
    try {
        (void)solve_M(Mat3::diagonal(1, 1, 1e-7));
        FAIL("expected ill-conditioned error");
    } catch (const SolverError& e) {
        CHECK(std::string(e.what()).find("condition number") != std::string::npos);
    }
    CHECK_NOTHROW(solve_M(Mat3::diagonal(1, 1, 1e-7), 1e8));
}

TEST_CASE("build_SRL") {
    std::array<Vec3, kChartPatches> zero{};
    const SRLSet z = build_SRL(chart_of(zero), chart_of(zero), chart_of(zero));
    for (const Mat3& m : z.patches) CHECK(m == Mat3());

    std::array<std::array<Vec3, kChartPatches>, 3> lit{};
    for (std::size_t j = 0; j < kChartPatches; ++j) {
        const double r = 0.03 + 0.035 * static_cast<double>(j);
        lit[0][j] = {r, 0, 0};
        lit[1][j] = {0, r, 0};
        lit[2][j] = {0, 0, r};
    }
    const SRLSet s = build_SRL(chart_of(lit[0]), chart_of(lit[1]), chart_of(lit[2]));
    for (std::size_t j = 0; j < kChartPatches; ++j) {
        const double r = 0.03 + 0.035 * static_cast<double>(j);
        CHECK(s.patches[j] == Mat3::diagonal(r, r, r));
    }
    CHECK_THROWS_AS(build_SRL(ChartSamples(zero, 18), ChartSamples(zero, 19), ChartSamples(zero, 18)), InputError);
}

TEST_CASE("simulate_lit_chart") {
    testing::Rng rng(4);
    const Mat3 SL = testing::random_primaries(rng);
    const Mat3 M = solve_M(SL);
    const double beta = 0.311;
    const Vec3 w{0.8, 1.0, 1.2};
    SRLSet srl;
    std::array<double, kChartPatches> r{};
    for (std::size_t j = 0; j < kChartPatches; ++j) {
        r[j] = rng.uniform(0.03, 0.9);
        srl.patches[j] = (beta * r[j]) * SL;
    }
    const SimulatedChart sim = simulate_lit_chart(srl, M, w, beta);
    CHECK(sim.clamped == 0);
    for (std::size_t j = 0; j < kChartPatches; ++j) {
        for (int c = 0; c < 3; ++c) CHECK(sim.chart[j][c] == doctest::Approx(r[j] * w[c]).epsilon(1e-13));
    }

    const SimulatedChart dark = simulate_lit_chart(srl, M, {0, 0, 0}, beta);
    for (const Vec3& p : dark.chart.patches()) CHECK(p == Vec3{0, 0, 0});

    // Linear in w_avg.
    const Vec3 w2{0.1, 0.5, 0.2};
    const auto a = predict_lit_patches(srl, M, w, beta);
    const auto b = predict_lit_patches(srl, M, w2, beta);
    const auto ab = predict_lit_patches(srl, M, 2.0 * w + 3.0 * w2, beta);
    for (std::size_t j = 0; j < kChartPatches; ++j) CHECK(max_abs(ab[j] - (2.0 * a[j] + 3.0 * b[j])) < 1e-12);

    // Negative predictions are clamped and counted.
    const SimulatedChart neg = simulate_lit_chart(srl, Mat3::diagonal(1, 1, -1), {1, 1, 1}, beta);
    CHECK(neg.clamped > 0);

    CHECK_THROWS_AS(simulate_lit_chart(srl, M, w, 0.0), InputError);
    CHECK_THROWS_AS(simulate_lit_chart(srl, M, w, -1.0), InputError);
}

TEST_CASE("solve_Q: identity when predictions already match") {
    testing::Rng rng(8);
    const auto f = testing::random_fixture(rng);
    const auto predicted = predict_lit_patches(f.srl, f.M, f.w_avg, f.beta);
    std::array<Vec3, kChartPatches> same{};
    for (std::size_t j = 0; j < kChartPatches; ++j) same[j] = predicted[j];
    const QSolution q = solve_Q(f.srl, f.M, f.w_avg, ChartSamples(same), f.beta);
    CHECK((q.Q - Mat3::identity()).max_abs_entry() < 1e-12);
    CHECK(q.residual < 1e-24);
    CHECK(q.rank == 3);
}

TEST_CASE("solve_Q: three weighted patches are matched exactly") {
    testing::Rng rng(9);
    const auto f = testing::random_fixture(rng);
    ChartWeights w{};
    w[2] = w[7] = w[15] = 1.0;
    const QSolution q = solve_Q(f.srl, f.M, f.w_avg, f.targets, f.beta, w);
    CHECK(q.residual < 1e-20);
    const auto predicted = predict_lit_patches(f.srl, f.M, f.w_avg, f.beta);
    for (std::size_t j : {2u, 7u, 15u}) CHECK(max_abs(q.Q * predicted[j] - f.targets[j]) < 1e-10);
}

TEST_CASE("solve_Q agrees with the brute-force stacked solve") {
    testing::Rng rng(10);
    for (int k = 0; k < 100; ++k) {
        const auto f = testing::random_fixture(rng);
        const QSolution q = solve_Q(f.srl, f.M, f.w_avg, f.targets, f.beta, f.weights);
        const auto predicted = predict_lit_patches(f.srl, f.M, f.w_avg, f.beta);
        const Mat3 oracle = spectral::brute_force_Q(predicted, f.targets, f.weights);
        CHECK(testing::relative_frobenius(q.Q, oracle) < 1e-9);
    }
}

TEST_CASE("solve_Q optimality and dominance over the identity") {
    testing::Rng rng(12);
    for (int k = 0; k < 30; ++k) {
        const auto f = testing::random_fixture(rng);
        const QSolution q = solve_Q(f.srl, f.M, f.w_avg, f.targets, f.beta, f.weights);
        const auto predicted = predict_lit_patches(f.srl, f.M, f.w_avg, f.beta);
        const Mat3 g = testing::objective_gradient_fd(q.Q, predicted, f.targets, f.weights);
        CHECK(g.max_abs_entry() < 1e-6);
        CHECK(q.residual <= q_objective(Mat3::identity(), predicted, f.targets, f.weights));
        CHECK(q.residual == doctest::Approx(q_objective(q.Q, predicted, f.targets, f.weights)));
    }
}

TEST_CASE("solve_Q: flat reflectances (metamer case) return the identity") {
    testing::Rng rng(13);
    const Mat3 SL = testing::random_primaries(rng);
    const Mat3 M = solve_M(SL);
    const double beta = 0.311;
    const Vec3 w{0.9, 1.1, 0.7};
    SRLSet srl;
    std::array<Vec3, kChartPatches> targets{};
    for (std::size_t j = 0; j < kChartPatches; ++j) {
        const double r = rng.uniform(0.03, 0.9);
        srl.patches[j] = (beta * r) * SL;
        targets[j] = r * w;
    }
    const QSolution q = solve_Q(srl, M, w, ChartSamples(targets), beta);
    CHECK(q.rank == 1);
    CHECK((q.Q - Mat3::identity()).max_abs_entry() < 1e-9);
    CHECK(q.residual < 1e-18);
}

TEST_CASE("solve_Q: nothing predicted is degenerate lighting") {
    SRLSet srl;
    std::array<Vec3, kChartPatches> t{};
    t.fill({0.1, 0.1, 0.1});
    CHECK_THROWS_AS(solve_Q(srl, Mat3::identity(), {1, 1, 1}, ChartSamples(t), 0.5), SolverError);
    ChartWeights none{};
    CHECK_THROWS_AS(solve_Q(srl, Mat3::identity(), {1, 1, 1}, ChartSamples(t), 0.5, none), InputError);
}

TEST_CASE("solve_N") {
    testing::Rng rng(14);
    const Mat3 M = solve_M(testing::random_primaries(rng));
    CHECK((*solve_N(M, Mat3::identity()) - M).max_abs_entry() < 1e-15);
    const auto n = solve_N(Mat3::identity(), Mat3::diagonal(2, 1, 1));
    REQUIRE(n.has_value());
    CHECK(*n == Mat3::diagonal(0.5, 1, 1));

    // Nearly rank-one Q, as a monochromatic target produces.
    const Mat3 rank1 = Mat3::from_columns({0.5, 0.3, 0.01}, {0.6, 0.36, 0.012}, {0.2, 0.12, 0.004}) +
                       Mat3::diagonal(1e-6, 1e-6, 1e-6);
    CHECK(rank1.condition_number() > 1e4);
    CHECK_FALSE(solve_N(M, rank1).has_value());

    for (int k = 0; k < 50; ++k) {
        const Mat3 SL = testing::random_primaries(rng);
        const Mat3 Mk = solve_M(SL);
        const Mat3 Q = testing::random_primaries(rng);
        const auto N = solve_N(Mk, Q);
        REQUIRE(N.has_value());
        CHECK((Q * SL * *N - Mat3::identity()).norm_inf() < 1e-8);
        CHECK(((*N) - Mk * Q.inverse()).max_abs_entry() < 1e-10);
    }
}

TEST_CASE("compute_black_level") {
    CHECK(compute_black_level({0, 0, 0}, {1, 2, 3}).offset == Vec3{0, 0, 0});
    const BlackLevel b = compute_black_level({0.02, 0.03, 0.04}, {0.8, 0.9, 1.0});
    CHECK(b.offset[0] == 0.02 / 0.8);
    CHECK(b.offset[1] == 0.03 / 0.9);
    CHECK(b.offset[2] == 0.04);
    CHECK(b.offset[0] == doctest::Approx(0.025).epsilon(1e-15));
    CHECK(b.offset[1] == doctest::Approx(1.0 / 30.0).epsilon(1e-15));
    CHECK_FALSE(b.suspicious);
    const BlackLevel same = compute_black_level({0.5, 0.6, 0.7}, {0.5, 0.6, 0.7});
    CHECK(same.offset == Vec3{1, 1, 1});
    CHECK(same.suspicious);
    CHECK_THROWS_AS(compute_black_level({0, 0, 0}, {1, 0, 1}), InputError);
}

TEST_CASE("transform_content modes") {
    CalibrationBundle bundle;
    CHECK(transform_content({0.3, 0.2, 0.1}, ContentMode::post, bundle) == Vec3{0.3, 0.2, 0.1});

    bundle.M = Mat3::diagonal(2, 1, 1);
    CHECK(transform_content({0.3, 0.3, 0.3}, ContentMode::out_of_frustum, bundle) == Vec3{0.6, 0.3, 0.3});

    bundle.N = Mat3::identity();
    bundle.black_offset = {0.1, 0.1, 0.1};
    GamutCounter g;
    const Vec3 a = transform_content({0.05, 0.5, 1.0}, ContentMode::in_frustum, bundle, &g);
    CHECK(a[0] == 0.0);
    CHECK(a[1] == doctest::Approx(0.4));
    CHECK(a[2] == doctest::Approx(0.9));
    CHECK(g.out_of_gamut == 0);
    const Vec3 b = transform_content({0.05, 0.5, 1.5}, ContentMode::in_frustum, bundle, &g);
    CHECK(b[2] == 1.0);
    CHECK(g.out_of_gamut == 1);
    const Vec3 c = transform_content({0.05, 0.5, 1.2}, ContentMode::in_frustum, bundle, &g);
    CHECK(c[2] == 1.0);
    CHECK(g.out_of_gamut == 2);
    CHECK(g.pixels == 3);

    // Without N the in-frustum path uses M.
    bundle.N.reset();
    bundle.black_offset = {0, 0, 0};
    CHECK(transform_content({0.3, 0.3, 0.3}, ContentMode::in_frustum, bundle) == Vec3{0.6, 0.3, 0.3});
}

TEST_CASE("baseline reduction: Q = I, N = M, no black level") {
    testing::Rng rng(15);
    CalibrationBundle bundle;
    bundle.M = solve_M(testing::random_primaries(rng));
    bundle.N = bundle.M;
    for (int k = 0; k < 20; ++k) {
        const Vec3 p{rng.uniform(0, 0.4), rng.uniform(0, 0.4), rng.uniform(0, 0.4)};
        const Vec3 mp = bundle.M * p;
        CHECK(transform_content(p, ContentMode::out_of_frustum, bundle) == mp);
        const Vec3 in = transform_content(p, ContentMode::in_frustum, bundle);
        for (int c = 0; c < 3; ++c) CHECK(in[c] == std::clamp(mp[c], 0.0, 1.0));
        CHECK(transform_content(p, ContentMode::post, bundle) == p);
    }
}

TEST_CASE("chart_error") {
    std::array<Vec3, kChartPatches> t{};
    for (std::size_t j = 0; j < kChartPatches; ++j) t[j] = {0.1 + 0.01 * j, 0.2, 0.05 + 0.02 * j};
    const ChartSamples target(t);
    CHECK(chart_error(target, target) == Vec3{0, 0, 0});

    auto off = t;
    off[3][0] += target.white()[0];
    const Vec3 e = chart_error(target, ChartSamples(off));
    CHECK(e[0] == doctest::Approx(1.0 / 24.0).epsilon(1e-14));
    CHECK(e[1] == 0.0);
    CHECK(e[2] == 0.0);

    testing::Rng rng(16);
    for (int k = 0; k < 20; ++k) {
        std::array<Vec3, kChartPatches> m{};
        for (std::size_t j = 0; j < kChartPatches; ++j) {
            m[j] = {t[j][0] * rng.uniform(0.5, 1.5), t[j][1] * rng.uniform(0.5, 1.5), t[j][2] + rng.uniform(0, 0.1)};
        }
        const Vec3 a = chart_error(target, ChartSamples(m));
        const Vec3 b = chart_error_reference(target, ChartSamples(m));
        for (int c = 0; c < 3; ++c) CHECK(std::fabs(a[c] - b[c]) < 1e-12);
    }

    auto zero_white = t;
    zero_white[kDefaultWhiteIndex][1] = 0.0;
    CHECK_THROWS_AS(chart_error(ChartSamples(zero_white), target), InputError);
}
