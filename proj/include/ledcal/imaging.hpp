// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ledcal Authors.

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "ledcal/color.hpp"

namespace ledcal {

inline constexpr std::size_t kChartPatches = 24;
inline constexpr std::size_t kChartRows = 4;
inline constexpr std::size_t kChartCols = 6;
/// First patch of the neutral row in the standard 24-patch layout.
inline constexpr std::size_t kDefaultWhiteIndex = 18;
inline constexpr double kDisplayGamma = 2.4;

/// Row-major RGB float image. Row 0 is the top row.
class LinearImage {
public:
    LinearImage() = default;
    LinearImage(std::size_t width, std::size_t height, Vec3 fill = {0.0, 0.0, 0.0});
    /// Throws InputError if data.size() != width * height.
    LinearImage(std::size_t width, std::size_t height, std::vector<Vec3> data);

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    bool empty() const { return data_.empty(); }

    Vec3& at(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
    const Vec3& at(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }
    const std::vector<Vec3>& pixels() const { return data_; }
    std::vector<Vec3>& pixels() { return data_; }

    /// Throws InputError naming the first non-finite or negative pixel.
    void validate_linear() const;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<Vec3> data_;
};

/// The 24 patch values of a color chart in row-major chart order.
class ChartSamples {
public:
    ChartSamples() = default;
    /// Throws InputError on non-finite or negative components or a bad white index.
    explicit ChartSamples(const std::array<Vec3, kChartPatches>& patches,
                          std::size_t white_index = kDefaultWhiteIndex);

    const Vec3& operator[](std::size_t j) const { return patches_[j]; }
    const std::array<Vec3, kChartPatches>& patches() const { return patches_; }
    std::size_t white_index() const { return white_index_; }
    const Vec3& white() const { return patches_[white_index_]; }

    friend bool operator==(const ChartSamples&, const ChartSamples&) = default;

private:
    std::array<Vec3, kChartPatches> patches_{};
    std::size_t white_index_ = kDefaultWhiteIndex;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Where the chart sits in an image. Corners are given in pixel coordinates
/// (pixel (i, j) covers [i, i+1) x [j, j+1)) in the order top-left,
/// top-right, bottom-right, bottom-left of the chart as printed.
struct ChartGridSpec {
    std::array<Point2, 4> corners{};
    std::size_t rows = kChartRows;
    std::size_t cols = kChartCols;
    /// Fraction of each patch edge discarded on every side.
    double inset = 0.25;
    std::size_t white_index = kDefaultWhiteIndex;
    /// A patch whose pixels all reach this level in some channel is flagged.
    double saturation_level = 1.0;

    /// Grid whose corners are the corners of a width x height image.
    static ChartGridSpec full_frame(std::size_t width, std::size_t height);
};

/// Rectangular region of interest in pixels.
struct Roi {
    std::size_t x = 0;
    std::size_t y = 0;
    std::size_t width = 0;
    std::size_t height = 0;
};

double decode_transfer(double encoded, double gamma = kDisplayGamma);
double encode_transfer(double linear, double gamma = kDisplayGamma);

/// Display-encoded [0,1] image to scene-linear by a pure power law.
LinearImage decode_transfer(const LinearImage& encoded, double gamma = kDisplayGamma);
LinearImage encode_transfer(const LinearImage& linear, double gamma = kDisplayGamma);

/// Per-channel mean after discarding the lowest and highest 10% of values.
/// Exact for constant inputs.
Vec3 trimmed_mean(const std::vector<Vec3>& values, double trim_fraction = 0.1);

/// Trimmed mean over a rectangular region.
Vec3 sample_roi(const LinearImage& image, const Roi& roi);

/// Samples every patch of a chart. Warnings (saturated patches) are appended
/// to `warnings` when given.
ChartSamples extract_chart(const LinearImage& image, const ChartGridSpec& grid,
                           std::vector<std::string>* warnings = nullptr);

/// Scales every component of `subject` so its white patch green channel
/// matches the reference white patch green channel.
ChartSamples normalize_green_white(const ChartSamples& reference, const ChartSamples& subject);

struct ComparisonLayout {
    std::size_t patch_px = 64;
    /// Circle radius as a fraction of patch_px.
    double circle_radius = 0.3;
};

/// Squares carry `target`, centered circles carry `measured`.
LinearImage render_comparison_chart(const ChartSamples& target, const ChartSamples& measured,
                                    bool normalize, const ComparisonLayout& layout = {});

}  // namespace ledcal
