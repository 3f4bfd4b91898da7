// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ledcal Authors.

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ledcal/color.hpp"
#include "ledcal/imaging.hpp"

namespace ledcal {

/// Camera response of every chart patch under each LED channel alone, as
/// captured (no geometric scaling). Column c of patch j is patch j under
/// channel c.
struct SRLSet {
    std::array<Mat3, kChartPatches> patches{};
    std::size_t white_index = kDefaultWhiteIndex;
};

struct Diagnostics {
    double cond_SL = 0.0;
    double cond_Q = 0.0;
    /// Weighted squared-error objective at the solved Q.
    double residual = 0.0;
    double out_of_gamut_fraction = 0.0;
    /// Q had fewer than three independent predicted colors to fit.
    bool q_rank_deficient = false;
    /// Simulated components clamped at zero while predicting the lit chart.
    std::size_t clamped_components = 0;
};

/// The solved color pipeline. N is absent when Q could not be inverted, in
/// which case in-frustum content falls back to M.
struct CalibrationBundle {
    Mat3 M = Mat3::identity();
    Mat3 Q = Mat3::identity();
    std::optional<Mat3> N;
    double beta = 1.0;
    Vec3 black_offset{0, 0, 0};
    Diagnostics diagnostics;

    const Mat3& in_frustum_matrix() const { return N ? *N : M; }
};

using ChartWeights = std::array<double, kChartPatches>;
inline ChartWeights uniform_weights() {
    ChartWeights w;
    w.fill(1.0);
    return w;
}

/// Camera responses to the red, green and blue primaries as columns.
Mat3 build_SL(const Vec3& red, const Vec3& green, const Vec3& blue);

/// Out-of-frustum pre-correction, the inverse of SL. Throws SolverError
/// when cond(SL) exceeds `cond_limit`.
Mat3 solve_M(const Mat3& SL, double cond_limit = 1e6);

/// Assembles per-patch matrices from the charts lit by each LED channel.
SRLSet build_SRL(const ChartSamples& red_lit, const ChartSamples& green_lit, const ChartSamples& blue_lit);

/// Unclamped prediction (1/beta) * SRL_j * M * w_avg for every patch.
std::array<Vec3, kChartPatches> predict_lit_patches(const SRLSet& srl, const Mat3& M, const Vec3& w_avg,
                                                    double beta);

struct SimulatedChart {
    ChartSamples chart;
    /// Number of negative components that were clamped to zero.
    std::size_t clamped = 0;
};

/// Appearance of the chart lit by the stage showing an environment whose
/// diffuse integral is w_avg.
SimulatedChart simulate_lit_chart(const SRLSet& srl, const Mat3& M, const Vec3& w_avg, double beta);

struct QSolution {
    Mat3 Q;
    double residual = 0.0;
    /// Rank of the weighted predicted-color system (3 when Q is unique).
    int rank = 3;
};

/// Least-squares post-correction: minimizes
///   sum_j weight_j * || (1/beta) Q SRL_j M w_avg - p_j ||^2.
/// Each output channel is an independent 3-unknown problem solved through
/// its normal equations. If the predicted colors span fewer than three
/// dimensions, the minimizer closest to the identity is returned.
/// Throws SolverError ("degenerate lighting") when nothing is predicted.
QSolution solve_Q(const SRLSet& srl, const Mat3& M, const Vec3& w_avg, const ChartSamples& targets, double beta,
                  const ChartWeights& weights = uniform_weights());

/// Same fit from already predicted colors.
QSolution fit_Q(const std::array<Vec3, kChartPatches>& predicted, const ChartSamples& targets,
                const ChartWeights& weights = uniform_weights());

/// Objective value of `Q` on predicted colors.
double q_objective(const Mat3& Q, const std::array<Vec3, kChartPatches>& predicted, const ChartSamples& targets,
                   const ChartWeights& weights = uniform_weights());

/// In-frustum pre-correction M * Q^-1, or nullopt when cond(Q) > cond_limit.
std::optional<Mat3> solve_N(const Mat3& M, const Mat3& Q, double cond_limit = 1e4);

struct BlackLevel {
    Vec3 offset{0, 0, 0};
    /// Some component exceeds 0.2, far above typical panel albedo.
    bool suspicious = false;
};

/// Offset b_camera / w_camera, where w_camera is the camera reading of
/// content [1,1,1] (the sum of the three primary calibration readings).
BlackLevel compute_black_level(const Vec3& b_camera, const Vec3& w_camera);

enum class ContentMode { out_of_frustum, in_frustum, post };

/// Tallies in-frustum pixels that could not be displayed as requested.
struct GamutCounter {
    std::size_t pixels = 0;
    std::size_t out_of_gamut = 0;
    double fraction() const { return pixels == 0 ? 0.0 : static_cast<double>(out_of_gamut) / static_cast<double>(pixels); }
};

/// out_of_frustum: M p. in_frustum: clamp to [0,1] of (N p - black_offset),
/// using M when N is unavailable. post: Q p.
Vec3 transform_content(const Vec3& pixel, ContentMode mode, const CalibrationBundle& bundle,
                       GamutCounter* gamut = nullptr);

/// Per-channel mean absolute error relative to the target white patch.
Vec3 chart_error(const ChartSamples& target, const ChartSamples& measured);

ChartSamples apply_matrix(const Mat3& A, const ChartSamples& chart, std::size_t* clamped = nullptr);

}  // namespace ledcal
