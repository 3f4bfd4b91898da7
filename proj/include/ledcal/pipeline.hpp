// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ledcal Authors.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ledcal/calibration.hpp"
#include "ledcal/geometry.hpp"
#include "ledcal/imaging.hpp"
#include "ledcal/spectral.hpp"

namespace ledcal {

struct ChartImageSource {
    std::filesystem::path image;
    ChartGridSpec grid;
};

/// Everything `ledcal solve` needs. Paths are absolute after load_config.
struct PipelineConfig {
    std::filesystem::path primaries_image;
    std::array<Roi, 3> primary_rois{};

    /// Chart photographed under the red, green and blue LED channels.
    std::array<ChartImageSource, 3> channel_charts;

    std::optional<std::filesystem::path> target_csv;
    std::optional<ChartImageSource> target_image;

    /// w_avg comes from the env map, else an explicit white patch reading,
    /// else the target chart's white patch.
    std::optional<std::filesystem::path> env_map;
    Vec3 facing{0.0, 0.0, 1.0};
    std::optional<Vec3> white_patch;

    double half_extent = 0.6;
    std::size_t resolution = 1024;
    std::optional<double> beta;

    double white_reflectance = 0.9;
    double cond_limit_sl = 1e6;
    double cond_limit_q = 1e4;
    ChartWeights weights = uniform_weights();

    /// Black level: either a direct reading or an image region.
    std::optional<Vec3> b_camera;
    std::optional<std::filesystem::path> black_image;
    std::optional<Roi> black_roi;
    /// Defaults to the sum of the three primary readings.
    std::optional<Vec3> w_camera;

    /// Largest drive value of the displayed white patch when simulating the
    /// in-frustum chart.
    double display_white_drive = 0.8;

    std::filesystem::path output_dir = "ledcal_out";
};

/// Reads a JSON config; relative paths resolve against the file's directory.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

enum class LitVariant { m_only, m_and_q };
LitVariant parse_variant(const std::string& name);

/// Lit chart under the stage, optionally post-corrected with the bundle's Q.
ChartSamples simulate_variant(const CalibrationBundle& bundle, const SRLSet& srl, const Vec3& w_avg,
                              LitVariant variant);

/// In-frustum (displayed) chart as the camera records it.
struct DisplayedCharts {
    ChartSamples target;      ///< content values in camera units
    ChartSamples baseline;    ///< M only, no black level
    ChartSamples corrected;   ///< N and Q, no black level
    ChartSamples full;        ///< N, Q and black level
    GamutCounter gamut;
};

/// Content is the target chart scaled so M drives its white patch to
/// `display_white_drive`; panels add the bounce reading b_camera.
DisplayedCharts simulate_displayed(const Mat3& SL, const CalibrationBundle& bundle, const ChartSamples& targets,
                                   const Vec3& b_camera, double display_white_drive);

struct SolveResult {
    CalibrationBundle bundle;
    Mat3 SL;
    SRLSet srl;
    ChartSamples targets;
    Vec3 w_avg{};
    ChartSamples lit_m_only;
    ChartSamples lit_m_and_q;
    nlohmann::ordered_json report;
    std::vector<std::string> warnings;
    /// 0 on success, 1 when a soft failure (N unavailable) was surfaced.
    int exit_code = 0;
};

/// Full calibration. Writes bundle.json, report.json, srl.json, the chart
/// CSVs and comparison PNGs into config.output_dir. Failures are rethrown
/// with the failing stage named.
SolveResult run_solve(const PipelineConfig& config);

struct OracleOptions {
    double half_extent = 0.6;
    std::size_t resolution = 1024;
    /// Panel albedo used to synthesize the black-level reading.
    double panel_albedo = 0.06;
};

/// Writes a deterministic synthetic capture set (photographs, target CSV,
/// scene spectra, config.json and expected.json) into `outdir`.
void run_oracle(std::uint64_t seed, spectral::Scenario scenario, const std::filesystem::path& outdir,
                const OracleOptions& options = {});

}  // namespace ledcal
