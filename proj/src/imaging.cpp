// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ledcal Authors.

#include "ledcal/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ledcal/error.hpp"

namespace ledcal {

namespace {

std::string pixel_location(std::size_t x, std::size_t y, int channel) {
    std::ostringstream os;
    os << "pixel (" << x << ", " << y << ") channel " << channel;
    return os.str();
}

double cross(const Point2& o, const Point2& a, const Point2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

Point2 bilinear(const std::array<Point2, 4>& q, double u, double v) {
    // q: top-left, top-right, bottom-right, bottom-left.
    const double w00 = (1 - u) * (1 - v), w10 = u * (1 - v), w11 = u * v, w01 = (1 - u) * v;
    return {w00 * q[0].x + w10 * q[1].x + w11 * q[2].x + w01 * q[3].x,
            w00 * q[0].y + w10 * q[1].y + w11 * q[2].y + w01 * q[3].y};
}

// Sign of the quad's winding, or 0 when it is not strictly convex.
int convex_orientation(const std::array<Point2, 4>& q) {
    int sign = 0;
    for (int i = 0; i < 4; ++i) {
        const double c = cross(q[i], q[(i + 1) % 4], q[(i + 2) % 4]);
        const int s = c > 0 ? 1 : (c < 0 ? -1 : 0);
        if (s == 0) return 0;
        if (sign == 0) sign = s;
        if (s != sign) return 0;
    }
    return sign;
}

bool inside_convex(const std::array<Point2, 4>& q, int orientation, const Point2& p) {
    for (int i = 0; i < 4; ++i) {
        if (orientation * cross(q[i], q[(i + 1) % 4], p) < 0) return false;
    }
    return true;
}

}  // namespace

LinearImage::LinearImage(std::size_t width, std::size_t height, Vec3 fill)
    : width_(width), height_(height), data_(width * height, fill) {}

LinearImage::LinearImage(std::size_t width, std::size_t height, std::vector<Vec3> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != width_ * height_) throw InputError("image data size does not match dimensions");
}

void LinearImage::validate_linear() const {
    for (std::size_t y = 0; y < height_; ++y) {
        for (std::size_t x = 0; x < width_; ++x) {
            const Vec3& p = at(x, y);
            for (int c = 0; c < 3; ++c) {
                if (!std::isfinite(p[c])) throw InputError("non-finite value at " + pixel_location(x, y, c));
                if (p[c] < 0.0) throw InputError("negative value at " + pixel_location(x, y, c));
            }
        }
    }
}

ChartSamples::ChartSamples(const std::array<Vec3, kChartPatches>& patches, std::size_t white_index)
    : patches_(patches), white_index_(white_index) {
    if (white_index_ >= kChartPatches) throw InputError("white patch index out of range");
    for (std::size_t j = 0; j < kChartPatches; ++j) {
        for (double v : patches_[j]) {
            if (!std::isfinite(v) || v < 0.0) {
                throw InputError("chart patch " + std::to_string(j) + " has a non-finite or negative component");
            }
        }
    }
}

ChartGridSpec ChartGridSpec::full_frame(std::size_t width, std::size_t height) {
    ChartGridSpec g;
    const auto w = static_cast<double>(width);
    const auto h = static_cast<double>(height);
    g.corners = {Point2{0, 0}, Point2{w, 0}, Point2{w, h}, Point2{0, h}};
    return g;
}

double decode_transfer(double encoded, double gamma) {
    if (!(gamma > 0.0)) throw InputError("gamma must be positive");
    return std::pow(encoded, gamma);
}

double encode_transfer(double linear, double gamma) {
    if (!(gamma > 0.0)) throw InputError("gamma must be positive");
    return std::pow(linear, 1.0 / gamma);
}

namespace {

LinearImage apply_power(const LinearImage& in, double exponent, bool require_unit_range) {
    LinearImage out(in.width(), in.height());
    for (std::size_t y = 0; y < in.height(); ++y) {
        for (std::size_t x = 0; x < in.width(); ++x) {
            const Vec3& p = in.at(x, y);
            for (int c = 0; c < 3; ++c) {
                if (!std::isfinite(p[c])) throw InputError("non-finite value at " + pixel_location(x, y, c));
                if (p[c] < 0.0 || (require_unit_range && p[c] > 1.0)) {
                    throw InputError("value outside [0,1] at " + pixel_location(x, y, c));
                }
                out.at(x, y)[c] = std::pow(p[c], exponent);
            }
        }
    }
    return out;
}

}  // namespace

LinearImage decode_transfer(const LinearImage& encoded, double gamma) {
    if (!(gamma > 0.0)) throw InputError("gamma must be positive");
    return apply_power(encoded, gamma, true);
}

LinearImage encode_transfer(const LinearImage& linear, double gamma) {
    if (!(gamma > 0.0)) throw InputError("gamma must be positive");
    return apply_power(linear, 1.0 / gamma, false);
}

Vec3 trimmed_mean(const std::vector<Vec3>& values, double trim_fraction) {
    if (values.empty()) throw InputError("trimmed mean of an empty sample");
    const std::size_t n = values.size();
    const auto drop = static_cast<std::size_t>(std::floor(trim_fraction * static_cast<double>(n)));
    const std::size_t kept = n - 2 * drop;
    Vec3 out{};
    std::vector<double> channel(n);
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < n; ++i) channel[i] = values[i][c];
        std::sort(channel.begin(), channel.end());
        // Accumulate deviations from the first kept value so constant runs are exact.
        const double base = channel[drop];
        double dev = 0.0;
        for (std::size_t i = drop; i < drop + kept; ++i) dev += channel[i] - base;
        out[c] = base + dev / static_cast<double>(kept);
    }
    return out;
}

Vec3 sample_roi(const LinearImage& image, const Roi& roi) {
    if (roi.width == 0 || roi.height == 0 || roi.x + roi.width > image.width() ||
        roi.y + roi.height > image.height()) {
        throw InputError("region of interest outside image bounds");
    }
    if (roi.width * roi.height < 4) throw InputError("region of interest smaller than 4 pixels");
    std::vector<Vec3> values;
    values.reserve(roi.width * roi.height);
    for (std::size_t y = roi.y; y < roi.y + roi.height; ++y) {
        for (std::size_t x = roi.x; x < roi.x + roi.width; ++x) values.push_back(image.at(x, y));
    }
    return trimmed_mean(values);
}

ChartSamples extract_chart(const LinearImage& image, const ChartGridSpec& grid,
                           std::vector<std::string>* warnings) {
    if (grid.rows * grid.cols != kChartPatches) throw InputError("chart grid must have 24 patches");
    if (!(grid.inset > 0.0 && grid.inset < 0.5)) throw InputError("patch inset fraction must be in (0, 0.5)");
    const auto w = static_cast<double>(image.width());
    const auto h = static_cast<double>(image.height());
    for (const Point2& p : grid.corners) {
        if (!(p.x >= 0.0 && p.x <= w && p.y >= 0.0 && p.y <= h)) {
            throw InputError("chart corner outside image bounds");
        }
    }
    const int orientation = convex_orientation(grid.corners);
    if (orientation == 0) throw InputError("chart corners do not form a convex quadrilateral");

    std::array<Vec3, kChartPatches> patches{};
    std::vector<Vec3> values;
    for (std::size_t r = 0; r < grid.rows; ++r) {
        for (std::size_t c = 0; c < grid.cols; ++c) {
            const std::size_t j = r * grid.cols + c;
            const double u0 = (static_cast<double>(c) + grid.inset) / static_cast<double>(grid.cols);
            const double u1 = (static_cast<double>(c) + 1.0 - grid.inset) / static_cast<double>(grid.cols);
            const double v0 = (static_cast<double>(r) + grid.inset) / static_cast<double>(grid.rows);
            const double v1 = (static_cast<double>(r) + 1.0 - grid.inset) / static_cast<double>(grid.rows);
            // Iso-parameter lines of a bilinear patch are straight, so the
            // inset region is the quad through its four mapped corners.
            const std::array<Point2, 4> region{bilinear(grid.corners, u0, v0), bilinear(grid.corners, u1, v0),
                                               bilinear(grid.corners, u1, v1), bilinear(grid.corners, u0, v1)};
            double xmin = w, xmax = 0, ymin = h, ymax = 0;
            for (const Point2& p : region) {
                xmin = std::min(xmin, p.x);
                xmax = std::max(xmax, p.x);
                ymin = std::min(ymin, p.y);
                ymax = std::max(ymax, p.y);
            }
            values.clear();
            const auto x_begin = static_cast<std::size_t>(std::max(0.0, std::floor(xmin)));
            const auto x_end = static_cast<std::size_t>(std::min(w, std::ceil(xmax)));
            const auto y_begin = static_cast<std::size_t>(std::max(0.0, std::floor(ymin)));
            const auto y_end = static_cast<std::size_t>(std::min(h, std::ceil(ymax)));
            for (std::size_t y = y_begin; y < y_end; ++y) {
                for (std::size_t x = x_begin; x < x_end; ++x) {
                    const Point2 center{static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5};
                    if (inside_convex(region, orientation, center)) values.push_back(image.at(x, y));
                }
            }
            if (values.size() < 4) {
                throw InputError("patch " + std::to_string(j) + " region covers fewer than 4 pixels");
            }
            if (warnings != nullptr) {
                for (int ch = 0; ch < 3; ++ch) {
                    const bool saturated = std::all_of(values.begin(), values.end(), [&](const Vec3& v) {
                        return v[ch] >= grid.saturation_level;
                    });
                    if (saturated) {
                        warnings->push_back("patch " + std::to_string(j) + " is saturated in channel " +
                                            std::to_string(ch));
                        break;
                    }
                }
            }
            patches[j] = trimmed_mean(values);
        }
    }
    return ChartSamples(patches, grid.white_index);
}

ChartSamples normalize_green_white(const ChartSamples& reference, const ChartSamples& subject) {
    const double ref_g = reference.white()[1];
    const double sub_g = subject.white()[1];
    if (!(ref_g > 0.0) || !(sub_g > 0.0)) throw InputError("white patch green channel must be positive");
    const double s = ref_g / sub_g;
    std::array<Vec3, kChartPatches> out{};
    for (std::size_t j = 0; j < kChartPatches; ++j) out[j] = s * subject[j];
    return ChartSamples(out, subject.white_index());
}

LinearImage render_comparison_chart(const ChartSamples& target, const ChartSamples& measured, bool normalize,
                                    const ComparisonLayout& layout) {
    const ChartSamples circles = normalize ? normalize_green_white(target, measured) : measured;
    const std::size_t p = layout.patch_px;
    LinearImage out(kChartCols * p, kChartRows * p);
    const double radius = layout.circle_radius * static_cast<double>(p);
    for (std::size_t j = 0; j < kChartPatches; ++j) {
        const std::size_t x0 = (j % kChartCols) * p;
        const std::size_t y0 = (j / kChartCols) * p;
        const double cx = static_cast<double>(x0) + 0.5 * static_cast<double>(p);
        const double cy = static_cast<double>(y0) + 0.5 * static_cast<double>(p);
        for (std::size_t y = y0; y < y0 + p; ++y) {
            for (std::size_t x = x0; x < x0 + p; ++x) {
                const double dx = static_cast<double>(x) + 0.5 - cx;
                const double dy = static_cast<double>(y) + 0.5 - cy;
                out.at(x, y) = dx * dx + dy * dy <= radius * radius ? circles[j] : target[j];
            }
        }
    }
    return out;
}

}  // namespace ledcal
