// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ledcal Authors.

#include "ledcal/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/SVD>
#include <json.hpp>

#include "ledcal/error.hpp"
#include "ledcal/image_io.hpp"

namespace ledcal::spectral {

std::size_t nearest_sample(double nm) {
    if (!(nm >= kMinWavelength && nm <= kMaxWavelength)) throw InputError("wavelength outside 380-780 nm");
    return static_cast<std::size_t>(std::lround((nm - kMinWavelength) / kWavelengthStep));
}

SpectralCurve::SpectralCurve(const std::array<double, kSamples>& values) : v_(values) {
    for (double v : v_) {
        if (!std::isfinite(v) || v < 0.0) throw InputError("spectral samples must be finite and non-negative");
    }
}

SpectralCurve SpectralCurve::flat(double value) {
    std::array<double, kSamples> v;
    v.fill(value);
    return SpectralCurve(v);
}

SpectralCurve operator+(const SpectralCurve& a, const SpectralCurve& b) {
    SpectralCurve out;
    for (std::size_t i = 0; i < kSamples; ++i) out.v_[i] = a.v_[i] + b.v_[i];
    return out;
}

SpectralCurve operator*(double s, const SpectralCurve& a) {
    std::array<double, kSamples> v;
    for (std::size_t i = 0; i < kSamples; ++i) v[i] = s * a[i];
    return SpectralCurve(v);
}

Vec3 integrate_response(const CameraCurves& camera, const SpectralCurve& light, const SpectralCurve& reflectance) {
    Vec3 out{0, 0, 0};
    for (std::size_t i = 0; i < kSamples; ++i) {
        const double lr = light[i] * reflectance[i];
        for (int c = 0; c < 3; ++c) out[c] += camera[c][i] * lr;
    }
    return kWavelengthStep * out;
}

SpectralCurve make_gaussian_band(double center, double fwhm, double peak) {
    if (!(fwhm > 0.0)) throw InputError("band FWHM must be positive");
    if (!(peak >= 0.0)) throw InputError("band peak must be non-negative");
    const double mu = wavelength(nearest_sample(center));
    const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    std::array<double, kSamples> v{};
    for (std::size_t i = 0; i < kSamples; ++i) {
        const double d = (wavelength(i) - mu) / sigma;
        v[i] = peak * std::exp(-0.5 * d * d);
    }
    return SpectralCurve(v);
}

SpectralCurve make_line(double center, double value) {
    std::array<double, kSamples> v{};
    v[nearest_sample(center)] = value;
    return SpectralCurve(v);
}

void OracleScene::validate() const {
    auto nonzero = [](const SpectralCurve& c) {
        return std::any_of(c.values().begin(), c.values().end(), [](double v) { return v > 0.0; });
    };
    for (const auto& c : camera) {
        if (!nonzero(c)) throw InputError("camera sensitivity curve is identically zero");
    }
    for (const auto& c : leds) {
        if (!nonzero(c)) throw InputError("LED emission curve is identically zero");
    }
    for (const auto& r : reflectances) {
        for (double v : r.values()) {
            if (v > 1.0) throw InputError("reflectance exceeds 1");
        }
    }
}

Scenario parse_scenario(const std::string& name) {
    if (name == "broad") return Scenario::broad;
    if (name == "rgb-led") return Scenario::rgb_led;
    if (name == "monochromatic") return Scenario::monochromatic;
    if (name == "flat") return Scenario::flat;
    throw InputError("unknown scenario '" + name + "' (expected broad, rgb-led, monochromatic or flat)");
}

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::broad: return "broad";
        case Scenario::rgb_led: return "rgb-led";
        case Scenario::monochromatic: return "monochromatic";
        case Scenario::flat: return "flat";
    }
    return "broad";
}

namespace {

// Uniform in [lo, hi) from the raw engine output; std distributions are not
// reproducible across standard libraries.
class Uniform {
public:
    explicit Uniform(std::uint64_t seed) : engine_(seed) {}
    double operator()(double lo, double hi) {
        const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

private:
    std::mt19937_64 engine_;
};

SpectralCurve smooth_reflectance(Uniform& rng) {
    std::array<double, kSamples> v{};
    const double base = rng(0.02, 0.08);
    const int lobes = rng(0.0, 1.0) < 0.5 ? 2 : 3;
    std::vector<std::array<double, 3>> params;
    for (int k = 0; k < lobes; ++k) params.push_back({rng(400.0, 700.0), rng(60.0, 160.0), rng(0.1, 0.6)});
    for (std::size_t i = 0; i < kSamples; ++i) {
        double r = base;
        for (const auto& [center, fwhm, amp] : params) {
            const double sigma = fwhm / 2.3548200450309493;
            const double d = (wavelength(i) - center) / sigma;
            r += amp * std::exp(-0.5 * d * d);
        }
        v[i] = std::min(r, 0.95);
    }
    return SpectralCurve(v);
}

SpectralCurve daylight_like(Uniform& rng) {
    // Smooth quadratic in normalized wavelength with a seeded warm/cool tilt.
    const double tilt = rng(-0.35, 0.35);
    const double bow = rng(-0.4, -0.1);
    std::array<double, kSamples> v{};
    for (std::size_t i = 0; i < kSamples; ++i) {
        const double t = (wavelength(i) - 580.0) / 200.0;
        v[i] = std::max(0.05, 1.0 + tilt * t + bow * t * t);
    }
    return SpectralCurve(v);
}

}  // namespace

OracleScene make_scene(Scenario scenario, std::uint64_t seed) {
    Uniform rng(seed);
    OracleScene scene;
    scene.camera = {make_gaussian_band(600, 70, 1.0), make_gaussian_band(540, 70, 1.0),
                    make_gaussian_band(460, 70, 1.0)};
    scene.leds = {make_gaussian_band(630, 20, 1.0), make_gaussian_band(525, 20, 1.0),
                  make_gaussian_band(465, 20, 1.0)};

    for (std::size_t j = 0; j < 18; ++j) {
        if (scenario == Scenario::flat) {
            scene.reflectances[j] = SpectralCurve::flat(rng(0.03, 0.9));
        } else {
            scene.reflectances[j] = smooth_reflectance(rng);
        }
    }
    for (std::size_t k = 0; k < kNeutralRow.size(); ++k) {
        scene.reflectances[kDefaultWhiteIndex + k] = SpectralCurve::flat(kNeutralRow[k]);
    }

    switch (scenario) {
        case Scenario::broad:
            scene.illuminant = daylight_like(rng);
            break;
        case Scenario::rgb_led: {
            // An RGB LED fixture at the stage LED wavelengths with its own
            // band widths and channel balance.
            SpectralCurve lamp = SpectralCurve::flat(0.0);
            for (double center : {630.0, 525.0, 465.0}) {
                lamp = lamp + make_gaussian_band(center, rng(18.0, 22.0), rng(0.8, 1.2));
            }
            scene.illuminant = lamp;
            break;
        }
        case Scenario::monochromatic:
            // Low-pressure sodium analog: 589 nm falls on the 590 nm sample.
            scene.illuminant = make_line(589.0, 20.0);
            break;
        case Scenario::flat:
            scene.illuminant = scene.leds[0] + scene.leds[1] + scene.leds[2];
            break;
    }
    scene.validate();
    return scene;
}

OracleCalibration oracle_calibration(const OracleScene& scene, double beta) {
    if (!(beta > 0.0 && beta <= 1.0)) throw InputError("beta must be in (0, 1]");
    OracleCalibration out;
    out.SL = Mat3::from_columns(integrate_response(scene.camera, scene.leds[0]),
                                integrate_response(scene.camera, scene.leds[1]),
                                integrate_response(scene.camera, scene.leds[2]));
    std::array<Vec3, kChartPatches> targets{};
    for (std::size_t j = 0; j < kChartPatches; ++j) {
        const SpectralCurve& R = scene.reflectances[j];
        out.srl.patches[j] = Mat3::from_columns(beta * integrate_response(scene.camera, scene.leds[0], R),
                                                beta * integrate_response(scene.camera, scene.leds[1], R),
                                                beta * integrate_response(scene.camera, scene.leds[2], R));
        targets[j] = integrate_response(scene.camera, scene.illuminant, R);
    }
    out.targets = ChartSamples(targets);
    const Vec3 white = integrate_response(scene.camera, scene.illuminant, SpectralCurve::flat(kWhiteReflectance));
    out.w_avg = {white[0] / kWhiteReflectance, white[1] / kWhiteReflectance, white[2] / kWhiteReflectance};
    return out;
}

std::array<Vec3, kChartPatches> stage_lit_chart(const OracleScene& scene, const Vec3& drive) {
    // The stage spectrum may have negative lobes when the drive does; integrate
    // each LED separately instead of building a (non-negative) curve.
    std::array<Vec3, kChartPatches> out{};
    for (std::size_t j = 0; j < kChartPatches; ++j) {
        Vec3 sum{0, 0, 0};
        for (std::size_t i = 0; i < kSamples; ++i) {
            double e = 0.0;
            for (int c = 0; c < 3; ++c) e += drive[c] * scene.leds[c][i];
            const double er = e * scene.reflectances[j][i];
            for (int c = 0; c < 3; ++c) sum[c] += scene.camera[c][i] * er;
        }
        out[j] = kWavelengthStep * sum;
    }
    return out;
}

Mat3 brute_force_Q(const std::array<Vec3, kChartPatches>& predicted, const ChartSamples& targets,
                   const ChartWeights& weights) {
    constexpr int kRows = 3 * static_cast<int>(kChartPatches);
    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(kRows, 9);
    Eigen::VectorXd rhs(kRows);
    for (std::size_t j = 0; j < kChartPatches; ++j) {
        const double s = std::sqrt(weights[j]);
        for (int i = 0; i < 3; ++i) {
            const auto row = static_cast<Eigen::Index>(3 * j + i);
            for (int c = 0; c < 3; ++c) design(row, 3 * i + c) = s * predicted[j][c];
            rhs(row) = s * targets[j][i];
        }
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double tol = sv(0) * static_cast<double>(kRows) * 1e-15;
    if (!(sv(0) > 0.0) || sv(8) <= tol) throw SolverError("design matrix has rank < 9");
    Eigen::MatrixXd sigma_inv = Eigen::MatrixXd::Zero(9, 9);
    for (int k = 0; k < 9; ++k) sigma_inv(k, k) = 1.0 / sv(k);
    const Eigen::MatrixXd pinv = svd.matrixV() * sigma_inv * svd.matrixU().transpose();
    const Eigen::VectorXd q = pinv * rhs;
    Mat3 Q;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) Q(r, c) = q(3 * r + c);
    }
    return Q;
}

Mat3 brute_force_Q(const ChartSamples& predicted, const ChartSamples& targets, const ChartWeights& weights) {
    return brute_force_Q(predicted.patches(), targets, weights);
}

std::string curve_to_csv(const SpectralCurve& curve) {
    std::string out = "wavelength_nm,value\n";
    for (std::size_t i = 0; i < kSamples; ++i) {
        out += format_double(wavelength(i)) + "," + format_double(curve[i]) + "\n";
    }
    return out;
}

SpectralCurve curve_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "wavelength_nm,value") throw InputError("spectral CSV header must be 'wavelength_nm,value'");
    std::array<double, kSamples> v{};
    std::size_t n = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw InputError("malformed spectral CSV row: " + line);
        if (n >= kSamples) throw InputError("spectral CSV has more than 81 rows");
        const double wl = parse_double(line.substr(0, comma), "spectral CSV wavelength");
        if (wl != wavelength(n)) throw InputError("spectral CSV must follow the 380-780 nm, 5 nm grid");
        v[n++] = parse_double(line.substr(comma + 1), "spectral CSV value");
    }
    if (n != kSamples) throw InputError("spectral CSV must have 81 rows");
    return SpectralCurve(v);
}

namespace {

std::string reflectance_file(std::size_t j) {
    std::string s = std::to_string(j);
    if (s.size() < 2) s = "0" + s;
    return "reflectance_" + s + ".csv";
}

}  // namespace

void write_scene(const std::filesystem::path& dir, const OracleScene& scene) {
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json manifest;
    const char* channels[3] = {"r", "g", "b"};
    for (int c = 0; c < 3; ++c) {
        const std::string cam = std::string("camera_") + channels[c] + ".csv";
        const std::string led = std::string("led_") + channels[c] + ".csv";
        write_text_file(dir / cam, curve_to_csv(scene.camera[c]));
        write_text_file(dir / led, curve_to_csv(scene.leds[c]));
        manifest["camera"].push_back(cam);
        manifest["leds"].push_back(led);
    }
    write_text_file(dir / "illuminant.csv", curve_to_csv(scene.illuminant));
    manifest["illuminant"] = "illuminant.csv";
    for (std::size_t j = 0; j < kChartPatches; ++j) {
        write_text_file(dir / reflectance_file(j), curve_to_csv(scene.reflectances[j]));
        manifest["reflectances"].push_back(reflectance_file(j));
    }
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

OracleScene read_scene(const std::filesystem::path& dir) {
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
    } catch (const nlohmann::json::exception& e) {
        throw InputError("scene manifest: " + std::string(e.what()));
    }
    auto load = [&](const nlohmann::json& name) {
        if (!name.is_string()) throw InputError("scene manifest entries must be file names");
        return curve_from_csv(read_text_file(dir / name.get<std::string>()));
    };
    OracleScene scene;
    if (manifest["camera"].size() != 3 || manifest["leds"].size() != 3 ||
        manifest["reflectances"].size() != kChartPatches) {
        throw InputError("scene manifest must list 3 camera, 3 LED and 24 reflectance curves");
    }
    for (int c = 0; c < 3; ++c) {
        scene.camera[c] = load(manifest["camera"][c]);
        scene.leds[c] = load(manifest["leds"][c]);
    }
    scene.illuminant = load(manifest["illuminant"]);
    for (std::size_t j = 0; j < kChartPatches; ++j) scene.reflectances[j] = load(manifest["reflectances"][j]);
    scene.validate();
    return scene;
}

}  // namespace ledcal::spectral
