// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ledcal Authors.

#pragma once

#include <filesystem>
#include <string>

#include "ledcal/imaging.hpp"

namespace ledcal {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);
/// Strict decimal parse; throws InputError naming `what` on failure.
double parse_double(const std::string& text, const std::string& what);

/// Portable float map: "PF" (RGB) or "Pf" (gray, replicated to RGB).
/// Rows are stored bottom-to-top; a negative scale means little-endian.
LinearImage read_pfm(const std::filesystem::path& path);
/// Always writes little-endian RGB ("PF", scale -1.0).
void write_pfm(const std::filesystem::path& path, const LinearImage& image);

/// 16-bit RGB PNG. Each component is multiplied by `exposure`, clamped to
/// [0,1] and encoded with a 1/gamma power before quantization.
void write_png16(const std::filesystem::path& path, const LinearImage& image, double exposure = 1.0,
                 double gamma = kDisplayGamma);

/// CSV with header "patch_index,r,g,b" and one row per patch.
std::string chart_to_csv(const ChartSamples& chart);
ChartSamples chart_from_csv(const std::string& text, std::size_t white_index = kDefaultWhiteIndex);
void write_chart_csv(const std::filesystem::path& path, const ChartSamples& chart);
ChartSamples read_chart_csv(const std::filesystem::path& path, std::size_t white_index = kDefaultWhiteIndex);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ledcal
