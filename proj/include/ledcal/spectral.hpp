// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ledcal Authors.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "ledcal/calibration.hpp"
#include "ledcal/color.hpp"
#include "ledcal/imaging.hpp"

namespace ledcal::spectral {

using ledcal::operator*;
using ledcal::operator+;
using ledcal::operator-;

inline constexpr double kMinWavelength = 380.0;
inline constexpr double kMaxWavelength = 780.0;
inline constexpr double kWavelengthStep = 5.0;
inline constexpr std::size_t kSamples = 81;

inline constexpr double wavelength(std::size_t i) { return kMinWavelength + kWavelengthStep * static_cast<double>(i); }
/// Index of the grid sample nearest to `nm`; throws InputError outside the grid.
std::size_t nearest_sample(double nm);

/// Non-negative function tabulated on 380..780 nm in 5 nm steps.
class SpectralCurve {
public:
    SpectralCurve() = default;
    /// Throws InputError for negative or non-finite samples.
    explicit SpectralCurve(const std::array<double, kSamples>& values);
    static SpectralCurve flat(double value);

    double operator[](std::size_t i) const { return v_[i]; }
    const std::array<double, kSamples>& values() const { return v_; }

    friend SpectralCurve operator+(const SpectralCurve& a, const SpectralCurve& b);
    friend SpectralCurve operator*(double s, const SpectralCurve& a);
    friend bool operator==(const SpectralCurve&, const SpectralCurve&) = default;

private:
    std::array<double, kSamples> v_{};
};

using CameraCurves = std::array<SpectralCurve, 3>;

/// Channel c = sum over the grid of S_c * L * R * 5 nm.
Vec3 integrate_response(const CameraCurves& camera, const SpectralCurve& light,
                        const SpectralCurve& reflectance = SpectralCurve::flat(1.0));

/// Gaussian of the given FWHM centered on the grid sample nearest `center`.
SpectralCurve make_gaussian_band(double center, double fwhm, double peak);

/// All power in the single grid sample nearest `center`.
SpectralCurve make_line(double center, double value);

struct OracleScene {
    CameraCurves camera;
    std::array<SpectralCurve, 3> leds;
    SpectralCurve illuminant;
    std::array<SpectralCurve, kChartPatches> reflectances;

    /// Throws InputError for reflectances outside [0,1] or all-zero camera/LED curves.
    void validate() const;
};

enum class Scenario { broad, rgb_led, monochromatic, flat };

Scenario parse_scenario(const std::string& name);
std::string scenario_name(Scenario s);

/// Synthetic stage: LEDs at 630/525/465 nm (20 nm FWHM) and camera bands at
/// 600/540/460 nm (70 nm FWHM). The seed varies reflectances and the
/// illuminant; the scenario picks the illuminant class.
OracleScene make_scene(Scenario scenario, std::uint64_t seed);

/// Neutral-row reflectances (patches 18..23).
inline constexpr std::array<double, 6> kNeutralRow{0.9, 0.59, 0.36, 0.2, 0.09, 0.03};
inline constexpr double kWhiteReflectance = 0.9;

struct OracleCalibration {
    Mat3 SL;
    SRLSet srl;
    ChartSamples targets;
    Vec3 w_avg{};
};

/// Everything a calibration capture would measure, computed spectrally.
OracleCalibration oracle_calibration(const OracleScene& scene, double beta);

/// Chart under the stage emitting sum_c drive_c * led_c, integrated directly.
std::array<Vec3, kChartPatches> stage_lit_chart(const OracleScene& scene, const Vec3& drive);

/// Solves the stacked 72 x 9 least-squares system for Q through an explicit
/// pseudo-inverse. Throws SolverError if the design matrix has rank < 9.
Mat3 brute_force_Q(const std::array<Vec3, kChartPatches>& predicted, const ChartSamples& targets,
                   const ChartWeights& weights = uniform_weights());
Mat3 brute_force_Q(const ChartSamples& predicted, const ChartSamples& targets,
                   const ChartWeights& weights = uniform_weights());

/// CSV with header "wavelength_nm,value".
std::string curve_to_csv(const SpectralCurve& curve);
SpectralCurve curve_from_csv(const std::string& text);

/// Writes one CSV per curve plus manifest.json into `dir`.
void write_scene(const std::filesystem::path& dir, const OracleScene& scene);
OracleScene read_scene(const std::filesystem::path& dir);

}  // namespace ledcal::spectral
