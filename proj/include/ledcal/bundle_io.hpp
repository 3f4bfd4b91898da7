// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ledcal Authors.

#pragma once

#include <string>

#include <json.hpp>

#include "ledcal/calibration.hpp"

namespace ledcal {

nlohmann::ordered_json mat3_to_json(const Mat3& m);
Mat3 mat3_from_json(const nlohmann::json& j, const std::string& what);
nlohmann::ordered_json vec3_to_json(const Vec3& v);
Vec3 vec3_from_json(const nlohmann::json& j, const std::string& what);

/// {"M":[[...]],"Q":[[...]],"N":[[...]]|null,"beta":x,"black_offset":[r,g,b],"diagnostics":{...}}
nlohmann::ordered_json bundle_to_json(const CalibrationBundle& bundle);
CalibrationBundle bundle_from_json(const nlohmann::json& j);

/// {"white_index":k,"patches":[24 row-major 3x3 matrices]}
nlohmann::ordered_json srl_to_json(const SRLSet& srl);
SRLSet srl_from_json(const nlohmann::json& j);

/// Parses JSON text, rethrowing parse failures as InputError.
nlohmann::json parse_json(const std::string& text, const std::string& what);

}  // namespace ledcal
