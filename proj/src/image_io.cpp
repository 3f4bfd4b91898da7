// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ledcal Authors.

#include "ledcal/image_io.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include <png.h>

#include "ledcal/error.hpp"

namespace ledcal {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, const std::string& what) {
    std::size_t begin = text.find_first_not_of(" \t\r\n");
    std::size_t end = text.find_last_not_of(" \t\r\n");
    if (begin == std::string::npos) throw InputError("empty number in " + what);
    const char* first = text.data() + begin;
    const char* last = text.data() + end + 1;
    if (*first == '+') ++first;
    double v = 0.0;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) throw InputError("malformed number '" + text + "' in " + what);
    return v;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
    if (!out) throw InputError("write failed for " + path.string());
}

namespace {

std::string next_token(std::istream& in) {
    std::string tok;
    int ch = in.get();
    while (ch != EOF && std::isspace(ch)) ch = in.get();
    while (ch != EOF && !std::isspace(ch)) {
        tok.push_back(static_cast<char>(ch));
        ch = in.get();
    }
    // The single whitespace byte after the scale token has been consumed.
    return tok;
}

float load_float(const unsigned char* p, bool little) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, p, 4);
    const bool host_little = std::endian::native == std::endian::little;
    if (little != host_little) bits = __builtin_bswap32(bits);
    float f = 0.0f;
    std::memcpy(&f, &bits, 4);
    return f;
}

}  // namespace

LinearImage read_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    const std::string magic = next_token(in);
    if (magic != "PF" && magic != "Pf") throw InputError(path.string() + ": not a PFM file");
    const int channels = magic == "PF" ? 3 : 1;
    const std::string ws = next_token(in);
    const std::string hs = next_token(in);
    const std::string ss = next_token(in);
    const double wd = parse_double(ws, path.string() + " width");
    const double hd = parse_double(hs, path.string() + " height");
    const double scale = parse_double(ss, path.string() + " scale");
    if (!(wd >= 1 && hd >= 1) || wd != std::floor(wd) || hd != std::floor(hd) || scale == 0.0) {
        throw InputError(path.string() + ": malformed PFM header");
    }
    const auto width = static_cast<std::size_t>(wd);
    const auto height = static_cast<std::size_t>(hd);
    const bool little = scale < 0.0;
    std::vector<unsigned char> raw(width * height * channels * 4);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw InputError(path.string() + ": truncated PFM data");

    LinearImage img(width, height);
    std::size_t k = 0;
    for (std::size_t row = 0; row < height; ++row) {
        const std::size_t y = height - 1 - row;
        for (std::size_t x = 0; x < width; ++x) {
            Vec3& p = img.at(x, y);
            if (channels == 3) {
                for (int c = 0; c < 3; ++c, k += 4) p[c] = load_float(&raw[k], little);
            } else {
                const double v = load_float(&raw[k], little);
                k += 4;
                p = {v, v, v};
            }
        }
    }
    return img;
}

void write_pfm(const std::filesystem::path& path, const LinearImage& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << "PF\n" << image.width() << ' ' << image.height() << "\n-1.0\n";
    std::vector<unsigned char> raw(image.width() * 12);
    for (std::size_t row = 0; row < image.height(); ++row) {
        const std::size_t y = image.height() - 1 - row;
        std::size_t k = 0;
        for (std::size_t x = 0; x < image.width(); ++x) {
            for (int c = 0; c < 3; ++c, k += 4) {
                const auto f = static_cast<float>(image.at(x, y)[c]);
                std::uint32_t bits = 0;
                std::memcpy(&bits, &f, 4);
                if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
                std::memcpy(&raw[k], &bits, 4);
            }
        }
        out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    }
    if (!out) throw InputError("write failed for " + path.string());
}

void write_png16(const std::filesystem::path& path, const LinearImage& image, double exposure, double gamma) {
    if (!(gamma > 0.0)) throw InputError("gamma must be positive");
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
    if (!fp) throw InputError("cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
        png_destroy_write_struct(&png, &info);
        throw InputError("libpng initialization failed");
    }
    std::vector<unsigned char> row(image.width() * 6);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw InputError("PNG encoding failed for " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), 16,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (std::size_t y = 0; y < image.height(); ++y) {
        std::size_t k = 0;
        for (std::size_t x = 0; x < image.width(); ++x) {
            for (int c = 0; c < 3; ++c) {
                double v = image.at(x, y)[c] * exposure;
                v = std::isfinite(v) ? std::fmin(1.0, std::fmax(0.0, v)) : 0.0;
                const auto q = static_cast<std::uint16_t>(std::lround(std::pow(v, 1.0 / gamma) * 65535.0));
                row[k++] = static_cast<unsigned char>(q >> 8);
                row[k++] = static_cast<unsigned char>(q & 0xff);
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

std::string chart_to_csv(const ChartSamples& chart) {
    std::string out = "patch_index,r,g,b\n";
    for (std::size_t j = 0; j < kChartPatches; ++j) {
        out += std::to_string(j);
        for (double v : chart[j]) out += "," + format_double(v);
        out += "\n";
    }
    return out;
}

ChartSamples chart_from_csv(const std::string& text, std::size_t white_index) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw InputError("chart CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "patch_index,r,g,b") throw InputError("chart CSV header must be 'patch_index,r,g,b'");
    std::array<Vec3, kChartPatches> patches{};
    std::array<bool, kChartPatches> seen{};
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) fields.push_back(f);
        if (fields.size() != 4) throw InputError("chart CSV row must have 4 fields: " + line);
        const double idx = parse_double(fields[0], "chart CSV patch_index");
        if (idx < 0 || idx >= static_cast<double>(kChartPatches) || idx != std::floor(idx)) {
            throw InputError("chart CSV patch_index out of range: " + fields[0]);
        }
        const auto j = static_cast<std::size_t>(idx);
        if (seen[j]) throw InputError("chart CSV repeats patch " + fields[0]);
        seen[j] = true;
        for (int c = 0; c < 3; ++c) patches[j][c] = parse_double(fields[c + 1], "chart CSV patch " + fields[0]);
        ++rows;
    }
    if (rows != kChartPatches) throw InputError("chart CSV must list exactly 24 patches");
    return ChartSamples(patches, white_index);
}

void write_chart_csv(const std::filesystem::path& path, const ChartSamples& chart) {
    write_text_file(path, chart_to_csv(chart));
}

ChartSamples read_chart_csv(const std::filesystem::path& path, std::size_t white_index) {
    return chart_from_csv(read_text_file(path), white_index);
}

}  // namespace ledcal
