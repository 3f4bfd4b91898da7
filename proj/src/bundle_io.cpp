// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ledcal Authors.

#include "ledcal/bundle_io.hpp"

#include <cmath>
#include <limits>

#include "ledcal/error.hpp"

namespace ledcal {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

double number(const json& j, const std::string& what) {
    if (!j.is_number()) throw InputError(what + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw InputError(what + ": expected a finite number");
    return v;
}

}  // namespace

ordered_json mat3_to_json(const Mat3& m) {
    ordered_json rows = ordered_json::array();
    for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
    return rows;
}

Mat3 mat3_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3) throw InputError(what + ": expected a 3x3 matrix");
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
        if (!j[r].is_array() || j[r].size() != 3) throw InputError(what + ": expected a 3x3 matrix");
        for (int c = 0; c < 3; ++c) m(r, c) = number(j[r][c], what);
    }
    return m;
}

ordered_json vec3_to_json(const Vec3& v) { return ordered_json::array({v[0], v[1], v[2]}); }

Vec3 vec3_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3) throw InputError(what + ": expected [r, g, b]");
    return {number(j[0], what), number(j[1], what), number(j[2], what)};
}

ordered_json bundle_to_json(const CalibrationBundle& bundle) {
    ordered_json j;
    j["M"] = mat3_to_json(bundle.M);
    j["Q"] = mat3_to_json(bundle.Q);
    j["N"] = bundle.N ? mat3_to_json(*bundle.N) : ordered_json(nullptr);
    j["beta"] = bundle.beta;
    j["black_offset"] = vec3_to_json(bundle.black_offset);
    const Diagnostics& d = bundle.diagnostics;
    ordered_json diag;
    // Infinite condition numbers are written as null.
    diag["cond_SL"] = std::isfinite(d.cond_SL) ? ordered_json(d.cond_SL) : ordered_json(nullptr);
    diag["cond_Q"] = std::isfinite(d.cond_Q) ? ordered_json(d.cond_Q) : ordered_json(nullptr);
    diag["residual"] = d.residual;
    diag["out_of_gamut_fraction"] = d.out_of_gamut_fraction;
    diag["q_rank_deficient"] = d.q_rank_deficient;
    diag["clamped_components"] = d.clamped_components;
    j["diagnostics"] = diag;
    return j;
}

CalibrationBundle bundle_from_json(const json& j) {
    if (!j.is_object()) throw InputError("bundle: expected a JSON object");
    for (const char* key : {"M", "Q", "N", "beta", "black_offset"}) {
        if (!j.contains(key)) throw InputError(std::string("bundle: missing '") + key + "'");
    }
    CalibrationBundle b;
    b.M = mat3_from_json(j["M"], "bundle M");
    b.Q = mat3_from_json(j["Q"], "bundle Q");
    if (!j["N"].is_null()) b.N = mat3_from_json(j["N"], "bundle N");
    b.beta = number(j["beta"], "bundle beta");
    b.black_offset = vec3_from_json(j["black_offset"], "bundle black_offset");
    if (j.contains("diagnostics") && j["diagnostics"].is_object()) {
        const json& d = j["diagnostics"];
        auto num_or_inf = [](const json& v) {
            return v.is_number() ? v.get<double>() : std::numeric_limits<double>::infinity();
        };
        if (d.contains("cond_SL")) b.diagnostics.cond_SL = num_or_inf(d["cond_SL"]);
        if (d.contains("cond_Q")) b.diagnostics.cond_Q = num_or_inf(d["cond_Q"]);
        if (d.contains("residual")) b.diagnostics.residual = number(d["residual"], "bundle residual");
        if (d.contains("out_of_gamut_fraction")) {
            b.diagnostics.out_of_gamut_fraction = number(d["out_of_gamut_fraction"], "bundle out_of_gamut_fraction");
        }
        if (d.contains("q_rank_deficient")) b.diagnostics.q_rank_deficient = d["q_rank_deficient"].get<bool>();
        if (d.contains("clamped_components")) {
            b.diagnostics.clamped_components = d["clamped_components"].get<std::size_t>();
        }
    }
    return b;
}

ordered_json srl_to_json(const SRLSet& srl) {
    ordered_json j;
    j["white_index"] = srl.white_index;
    ordered_json patches = ordered_json::array();
    for (const Mat3& m : srl.patches) patches.push_back(mat3_to_json(m));
    j["patches"] = patches;
    return j;
}

SRLSet srl_from_json(const json& j) {
    if (!j.is_object() || !j.contains("patches") || !j["patches"].is_array() || j["patches"].size() != kChartPatches) {
        throw InputError("SRL file: expected {\"white_index\":k,\"patches\":[24 matrices]}");
    }
    SRLSet srl;
    const double wi = j.contains("white_index") ? number(j["white_index"], "SRL white_index")
                                                : static_cast<double>(kDefaultWhiteIndex);
    if (wi < 0 || wi >= static_cast<double>(kChartPatches) || wi != std::floor(wi)) {
        throw InputError("SRL white_index out of range");
    }
    srl.white_index = static_cast<std::size_t>(wi);
    for (std::size_t k = 0; k < kChartPatches; ++k) {
        srl.patches[k] = mat3_from_json(j["patches"][k], "SRL patch " + std::to_string(k));
        for (double v : srl.patches[k].data()) {
            if (v < 0.0) throw InputError("SRL patch " + std::to_string(k) + " has a negative response");
        }
    }
    return srl;
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(what + ": " + e.what());
    }
}

}  // namespace ledcal
