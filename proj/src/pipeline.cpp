// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ledcal Authors.

#include "ledcal/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "ledcal/bundle_io.hpp"
#include "ledcal/error.hpp"
#include "ledcal/image_io.hpp"

namespace ledcal {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <class F>
auto staged(const std::string& stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const InputError& e) {
        throw InputError("stage '" + stage + "': " + e.what());
    } catch (const SolverError& e) {
        throw SolverError("stage '" + stage + "': " + e.what());
    } catch (const json::exception& e) {
        throw InputError("stage '" + stage + "': " + e.what());
    }
}

double number(const json& j, const std::string& what) {
    if (!j.is_number()) throw InputError("config " + what + ": expected a number");
    return j.get<double>();
}

fs::path existing_file(const json& j, const fs::path& base, const std::string& what) {
    if (!j.is_string()) throw InputError("config " + what + ": expected a file path");
    fs::path p = j.get<std::string>();
    if (p.is_relative()) p = base / p;
    if (!fs::is_regular_file(p)) throw InputError("config " + what + ": missing input file " + p.string());
    return p;
}

Roi roi_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 4) throw InputError("config " + what + ": expected [x, y, width, height]");
    std::array<std::size_t, 4> v{};
    for (int k = 0; k < 4; ++k) {
        const double d = number(j[k], what);
        if (d < 0 || d != std::floor(d)) throw InputError("config " + what + ": expected non-negative integers");
        v[k] = static_cast<std::size_t>(d);
    }
    return {v[0], v[1], v[2], v[3]};
}

ChartGridSpec grid_from_json(const json& j, const std::string& what) {
    if (!j.is_object() || !j.contains("corners")) throw InputError("config " + what + ": grid needs 'corners'");
    ChartGridSpec g;
    const json& c = j["corners"];
    if (!c.is_array() || c.size() != 4) throw InputError("config " + what + ": expected 4 corners");
    for (int k = 0; k < 4; ++k) {
        if (!c[k].is_array() || c[k].size() != 2) throw InputError("config " + what + ": corner must be [x, y]");
        g.corners[k] = {number(c[k][0], what), number(c[k][1], what)};
    }
    if (j.contains("inset")) g.inset = number(j["inset"], what + " inset");
    if (j.contains("white_index")) g.white_index = static_cast<std::size_t>(number(j["white_index"], what));
    if (j.contains("saturation_level")) g.saturation_level = number(j["saturation_level"], what);
    if (j.contains("rows")) g.rows = static_cast<std::size_t>(number(j["rows"], what));
    if (j.contains("cols")) g.cols = static_cast<std::size_t>(number(j["cols"], what));
    return g;
}

ordered_json grid_to_json(const ChartGridSpec& g) {
    ordered_json j;
    for (const Point2& p : g.corners) j["corners"].push_back({p.x, p.y});
    j["inset"] = g.inset;
    j["white_index"] = g.white_index;
    j["saturation_level"] = g.saturation_level;
    return j;
}

Vec3 vec3(const json& j, const std::string& what) { return vec3_from_json(j, "config " + what); }

void write_json(const fs::path& path, const ordered_json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace

PipelineConfig config_from_json(const json& j, const fs::path& base) {
    if (!j.is_object()) throw InputError("config: expected a JSON object");
    PipelineConfig cfg;

    const json& prim = j.at("primaries");
    cfg.primaries_image = existing_file(prim.at("image"), base, "primaries.image");
    const char* names[3] = {"red", "green", "blue"};
    for (int c = 0; c < 3; ++c) {
        cfg.primary_rois[c] = roi_from_json(prim.at("rois").at(names[c]), std::string("primaries.rois.") + names[c]);
        const json& chart = j.at("channel_charts").at(names[c]);
        const std::string what = std::string("channel_charts.") + names[c];
        cfg.channel_charts[c].image = existing_file(chart.at("image"), base, what + ".image");
        cfg.channel_charts[c].grid = grid_from_json(chart.at("grid"), what + ".grid");
    }

    const json& target = j.at("target");
    if (target.contains("csv")) {
        cfg.target_csv = existing_file(target["csv"], base, "target.csv");
    } else if (target.contains("image")) {
        cfg.target_image = ChartImageSource{existing_file(target["image"], base, "target.image"),
                                            grid_from_json(target.at("grid"), "target.grid")};
    } else {
        throw InputError("config target: expected 'csv' or 'image' + 'grid'");
    }

    if (j.contains("w_avg")) {
        const json& w = j["w_avg"];
        if (w.contains("env") && w.contains("white_patch")) {
            throw InputError("config w_avg: 'env' and 'white_patch' are mutually exclusive");
        }
        if (w.contains("env")) {
            cfg.env_map = existing_file(w["env"], base, "w_avg.env");
            if (!w.contains("facing")) throw InputError("config w_avg: 'facing' is required with 'env'");
            cfg.facing = vec3(w["facing"], "w_avg.facing");
        } else if (w.contains("white_patch")) {
            cfg.white_patch = vec3(w["white_patch"], "w_avg.white_patch");
        }
    }

    if (j.contains("beta")) {
        const json& b = j["beta"];
        if (b.contains("half_extent")) cfg.half_extent = number(b["half_extent"], "beta.half_extent");
        if (b.contains("resolution")) cfg.resolution = static_cast<std::size_t>(number(b["resolution"], "beta.resolution"));
        if (b.contains("value")) cfg.beta = number(b["value"], "beta.value");
        if (cfg.beta && !(*cfg.beta > 0.0)) throw InputError("config beta.value must be positive");
        if (!(cfg.half_extent > 0.0)) throw InputError("config beta.half_extent must be positive");
    }
    if (j.contains("white_reflectance")) cfg.white_reflectance = number(j["white_reflectance"], "white_reflectance");
    if (j.contains("cond_limit_sl")) cfg.cond_limit_sl = number(j["cond_limit_sl"], "cond_limit_sl");
    if (j.contains("cond_limit_q")) cfg.cond_limit_q = number(j["cond_limit_q"], "cond_limit_q");
    if (j.contains("weights")) {
        const json& w = j["weights"];
        if (!w.is_array() || w.size() != kChartPatches) throw InputError("config weights: expected 24 numbers");
        for (std::size_t k = 0; k < kChartPatches; ++k) cfg.weights[k] = number(w[k], "weights");
    }
    if (j.contains("black_level")) {
        const json& bl = j["black_level"];
        if (bl.contains("b_camera")) cfg.b_camera = vec3(bl["b_camera"], "black_level.b_camera");
        if (bl.contains("image")) {
            cfg.black_image = existing_file(bl["image"], base, "black_level.image");
            cfg.black_roi = roi_from_json(bl.at("roi"), "black_level.roi");
        }
        if (cfg.b_camera && cfg.black_image) {
            throw InputError("config black_level: 'b_camera' and 'image' are mutually exclusive");
        }
        if (bl.contains("w_camera")) cfg.w_camera = vec3(bl["w_camera"], "black_level.w_camera");
    }
    if (j.contains("display_white_drive")) cfg.display_white_drive = number(j["display_white_drive"], "display_white_drive");
    if (j.contains("output_dir")) {
        fs::path out = j["output_dir"].get<std::string>();
        cfg.output_dir = out.is_relative() ? base / out : out;
    }
    return cfg;
}

PipelineConfig load_config(const fs::path& path) {
    return staged("config", [&] {
        const json j = parse_json(read_text_file(path), path.string());
        return config_from_json(j, fs::absolute(path).parent_path());
    });
}

LitVariant parse_variant(const std::string& name) {
    if (name == "m" || name == "m-only") return LitVariant::m_only;
    if (name == "mq" || name == "m-and-q") return LitVariant::m_and_q;
    throw InputError("unknown variant '" + name + "' (expected m-only or m-and-q)");
}

ChartSamples simulate_variant(const CalibrationBundle& bundle, const SRLSet& srl, const Vec3& w_avg,
                              LitVariant variant) {
    if (variant == LitVariant::m_only) return simulate_lit_chart(srl, bundle.M, w_avg, bundle.beta).chart;
    std::array<Vec3, kChartPatches> out = predict_lit_patches(srl, bundle.M, w_avg, bundle.beta);
    for (Vec3& p : out) {
        p = bundle.Q * p;
        for (double& c : p) c = std::max(c, 0.0);
    }
    return ChartSamples(out, srl.white_index);
}

DisplayedCharts simulate_displayed(const Mat3& SL, const CalibrationBundle& bundle, const ChartSamples& targets,
                                   const Vec3& b_camera, double display_white_drive) {
    const Vec3 white_drive = bundle.M * targets.white();
    const double peak = std::max({white_drive[0], white_drive[1], white_drive[2]});
    if (!(peak > 0.0)) throw SolverError("displayed white patch has no positive drive under M");
    const double scale = display_white_drive / peak;

    std::array<Vec3, kChartPatches> content{}, baseline{}, corrected{}, full{};
    DisplayedCharts out;
    CalibrationBundle no_black = bundle;
    no_black.black_offset = {0, 0, 0};
    for (std::size_t j = 0; j < kChartPatches; ++j) {
        content[j] = scale * targets[j];
        auto observe = [&](const Vec3& drive, const Mat3& post) {
            Vec3 v = post * (SL * drive + b_camera);
            for (double& c : v) c = std::max(c, 0.0);
            return v;
        };
        Vec3 drive = bundle.M * content[j];
        for (double& c : drive) c = std::clamp(c, 0.0, 1.0);
        baseline[j] = observe(drive, Mat3::identity());
        corrected[j] = observe(transform_content(content[j], ContentMode::in_frustum, no_black), bundle.Q);
        full[j] = observe(transform_content(content[j], ContentMode::in_frustum, bundle, &out.gamut), bundle.Q);
    }
    const std::size_t wi = targets.white_index();
    out.target = ChartSamples(content, wi);
    out.baseline = ChartSamples(baseline, wi);
    out.corrected = ChartSamples(corrected, wi);
    out.full = ChartSamples(full, wi);
    return out;
}

SolveResult run_solve(const PipelineConfig& cfg) {
    SolveResult res;
    std::vector<std::string>& warnings = res.warnings;

    std::array<Vec3, 3> primaries{};
    res.SL = staged("build_SL", [&] {
        const LinearImage img = read_pfm(cfg.primaries_image);
        img.validate_linear();
        for (int c = 0; c < 3; ++c) primaries[c] = sample_roi(img, cfg.primary_rois[c]);
        return build_SL(primaries[0], primaries[1], primaries[2]);
    });
    CalibrationBundle& bundle = res.bundle;
    bundle.diagnostics.cond_SL = res.SL.condition_number();
    bundle.M = staged("solve_M", [&] { return solve_M(res.SL, cfg.cond_limit_sl); });

    res.srl = staged("build_SRL", [&] {
        std::array<ChartSamples, 3> lit;
        for (int c = 0; c < 3; ++c) {
            const LinearImage img = read_pfm(cfg.channel_charts[c].image);
            img.validate_linear();
            lit[c] = extract_chart(img, cfg.channel_charts[c].grid, &warnings);
        }
        return build_SRL(lit[0], lit[1], lit[2]);
    });

    res.targets = staged("target", [&] {
        if (cfg.target_csv) return read_chart_csv(*cfg.target_csv, res.srl.white_index);
        const LinearImage img = read_pfm(cfg.target_image->image);
        img.validate_linear();
        return extract_chart(img, cfg.target_image->grid, &warnings);
    });

    bundle.beta = staged("beta", [&] {
        const double b = cfg.beta ? *cfg.beta : compute_beta(cfg.half_extent, cfg.resolution);
        if (!(b > 0.0 && b <= 1.0)) throw InputError("beta must be in (0, 1]");
        return b;
    });

    std::string w_source;
    res.w_avg = staged("w_avg", [&] {
        if (cfg.env_map) {
            w_source = "env";
            return w_avg_from_env(read_envmap_pfm(*cfg.env_map), Direction::normalized(cfg.facing));
        }
        if (cfg.white_patch) {
            w_source = "white_patch";
            return w_avg_from_white(*cfg.white_patch, cfg.white_reflectance);
        }
        w_source = "target_white";
        return w_avg_from_white(res.targets.white(), cfg.white_reflectance);
    });

    const auto predicted = staged("simulate", [&] { return predict_lit_patches(res.srl, bundle.M, res.w_avg, bundle.beta); });
    const QSolution qsol = staged("solve_Q", [&] { return fit_Q(predicted, res.targets, cfg.weights); });
    bundle.Q = qsol.Q;
    bundle.diagnostics.residual = qsol.residual;
    bundle.diagnostics.q_rank_deficient = qsol.rank < 3;
    bundle.diagnostics.cond_Q = bundle.Q.condition_number();
    if (qsol.rank < 3) {
        warnings.push_back("predicted chart spans only " + std::to_string(qsol.rank) +
                           " color dimensions; Q chosen nearest the identity");
    }

    bundle.N = solve_N(bundle.M, bundle.Q, cfg.cond_limit_q);
    if (!bundle.N) {
        warnings.push_back("Q is ill-conditioned; N unavailable, in-frustum content falls back to M");
        res.exit_code = 1;
    }

    Vec3 b_camera{0, 0, 0};
    Vec3 w_camera = primaries[0] + primaries[1] + primaries[2];
    BlackLevel black;
    const bool have_black = cfg.b_camera || cfg.black_image;
    if (have_black) {
        black = staged("black_level", [&] {
            if (cfg.b_camera) {
                b_camera = *cfg.b_camera;
            } else {
                const LinearImage img = read_pfm(*cfg.black_image);
                img.validate_linear();
                b_camera = sample_roi(img, *cfg.black_roi);
            }
            if (cfg.w_camera) w_camera = *cfg.w_camera;
            return compute_black_level(b_camera, w_camera);
        });
        bundle.black_offset = black.offset;
        if (black.suspicious) warnings.push_back("black level exceeds 0.2 in some channel");
    }

    const SimulatedChart lit_m = simulate_lit_chart(res.srl, bundle.M, res.w_avg, bundle.beta);
    bundle.diagnostics.clamped_components = lit_m.clamped;
    if (lit_m.clamped > 0) {
        warnings.push_back(std::to_string(lit_m.clamped) + " simulated chart components were negative and clamped");
    }
    res.lit_m_only = lit_m.chart;
    res.lit_m_and_q = simulate_variant(bundle, res.srl, res.w_avg, LitVariant::m_and_q);

    const DisplayedCharts shown = staged("displayed", [&] {
        return simulate_displayed(res.SL, bundle, res.targets, b_camera, cfg.display_white_drive);
    });
    bundle.diagnostics.out_of_gamut_fraction = shown.gamut.fraction();

    // Outputs.
    staged("write", [&] {
        fs::create_directories(cfg.output_dir);
        const fs::path& out = cfg.output_dir;
        ordered_json errors;
        auto record = [&](const std::string& key, const std::string& target_file, const ChartSamples& target,
                          const std::string& measured_file, const ChartSamples& measured) {
            write_chart_csv(out / measured_file, measured);
            ordered_json e;
            e["target"] = target_file;
            e["measured"] = measured_file;
            e["error"] = vec3_to_json(chart_error(target, measured));
            errors[key] = e;
        };
        write_chart_csv(out / "target.csv", res.targets);
        write_chart_csv(out / "displayed_target.csv", shown.target);
        record("lit_m_only", "target.csv", res.targets, "lit_m_only.csv", res.lit_m_only);
        record("lit_m_and_q", "target.csv", res.targets, "lit_m_and_q.csv", res.lit_m_and_q);
        record("displayed_baseline", "displayed_target.csv", shown.target, "displayed_baseline.csv", shown.baseline);
        record("displayed_m_n_q", "displayed_target.csv", shown.target, "displayed_m_n_q.csv", shown.corrected);
        record("displayed_full", "displayed_target.csv", shown.target, "displayed_full.csv", shown.full);

        const double lit_exposure = 0.8 / std::max(res.targets.white()[1], 1e-300);
        write_png16(out / "lit_m_only.png", render_comparison_chart(res.targets, res.lit_m_only, true), lit_exposure);
        write_png16(out / "lit_m_and_q.png", render_comparison_chart(res.targets, res.lit_m_and_q, true),
                    lit_exposure);
        const double shown_exposure = 0.8 / std::max(shown.target.white()[1], 1e-300);
        write_png16(out / "displayed_baseline.png", render_comparison_chart(shown.target, shown.baseline, false),
                    shown_exposure);
        write_png16(out / "displayed_without_black.png",
                    render_comparison_chart(shown.target, shown.corrected, false), shown_exposure);
        write_png16(out / "displayed_with_black.png", render_comparison_chart(shown.target, shown.full, false),
                    shown_exposure);

        write_json(out / "bundle.json", bundle_to_json(bundle));
        write_json(out / "srl.json", srl_to_json(res.srl));

        ordered_json& rep = res.report;
        rep["beta"] = bundle.beta;
        ordered_json beta_info;
        if (cfg.beta) {
            beta_info["source"] = "explicit";
        } else {
            beta_info["source"] = "panel_geometry";
            beta_info["half_extent"] = cfg.half_extent;
            beta_info["resolution"] = cfg.resolution;
        }
        // Panel drawn as 54/90 of a cube face versus a 1 m panel seen from 1 m.
        beta_info["beta_half_extent_0.6"] = compute_beta(0.6, cfg.resolution);
        beta_info["beta_half_extent_0.5"] = compute_beta(0.5, cfg.resolution);
        rep["beta_geometry"] = beta_info;
        rep["w_avg"] = vec3_to_json(res.w_avg);
        rep["w_avg_source"] = w_source;
        rep["white_reflectance"] = cfg.white_reflectance;
        rep["SL"] = mat3_to_json(res.SL);
        rep["chart_error"] = errors;
        rep["chart_error_definition"] = "per-channel mean over 24 patches of |measured - target| / target white";
        rep["n_available"] = bundle.N.has_value();
        rep["in_frustum_matrix"] = bundle.N ? "N" : "M";
        ordered_json bl;
        bl["applied"] = have_black;
        bl["b_camera"] = vec3_to_json(b_camera);
        bl["w_camera"] = vec3_to_json(w_camera);
        bl["offset"] = vec3_to_json(bundle.black_offset);
        bl["suspicious"] = black.suspicious;
        rep["black_level"] = bl;
        rep["q_rank"] = qsol.rank;
        rep["diagnostics"] = bundle_to_json(bundle)["diagnostics"];
        rep["patch_statistic"] = "trimmed_mean_10pct";
        rep["warnings"] = warnings;
        rep["exit_code"] = res.exit_code;
        write_json(out / "report.json", rep);
    });
    return res;
}

void run_oracle(std::uint64_t seed, spectral::Scenario scenario, const fs::path& outdir, const OracleOptions& opt) {
    using namespace spectral;
    staged("oracle", [&] {
        const OracleScene scene = make_scene(scenario, seed);
        const double beta = compute_beta(opt.half_extent, opt.resolution);
        OracleCalibration oc = oracle_calibration(scene, beta);

        // One camera exposure for every calibration photograph, chosen so the
        // brightest reading lands at 0.8.
        double brightest = oc.SL.max_abs_entry();
        for (const Mat3& m : oc.srl.patches) brightest = std::max(brightest, m.max_abs_entry());
        const double exposure = 0.8 / brightest;
        const Mat3 SL = exposure * oc.SL;

        fs::create_directories(outdir);
        write_scene(outdir / "scene", scene);

        // Primary patches side by side on black.
        constexpr std::size_t cell = 48, border = 8, patch = cell - 2 * border;
        LinearImage primaries(3 * cell, cell);
        ordered_json rois;
        const char* names[3] = {"red", "green", "blue"};
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t y = border; y < border + patch; ++y) {
                for (std::size_t x = c * cell + border; x < c * cell + border + patch; ++x) {
                    primaries.at(x, y) = SL.col(c);
                }
            }
            rois[names[c]] = {c * cell + border, border, patch, patch};
        }
        write_pfm(outdir / "primaries.pfm", primaries);

        // Charts under each LED channel: patches with a dark gutter.
        constexpr std::size_t gutter = 4;
        ordered_json charts;
        for (std::size_t c = 0; c < 3; ++c) {
            LinearImage chart(kChartCols * cell, kChartRows * cell, Vec3{0.01, 0.01, 0.01});
            for (std::size_t j = 0; j < kChartPatches; ++j) {
                const Vec3 v = exposure * oc.srl.patches[j].col(c);
                const std::size_t x0 = (j % kChartCols) * cell, y0 = (j / kChartCols) * cell;
                for (std::size_t y = y0 + gutter; y < y0 + cell - gutter; ++y) {
                    for (std::size_t x = x0 + gutter; x < x0 + cell - gutter; ++x) chart.at(x, y) = v;
                }
            }
            const std::string file = std::string("chart_") + names[c] + ".pfm";
            write_pfm(outdir / file, chart);
            charts[names[c]]["image"] = file;
            charts[names[c]]["grid"] = grid_to_json(ChartGridSpec::full_frame(chart.width(), chart.height()));
        }

        write_chart_csv(outdir / "target.csv", oc.targets);

        // Panel bounce: the in-frustum panels (flat albedo) lit by the stage
        // showing the environment at half drive.
        const Mat3 M = SL.inverse();
        Vec3 drive = M * oc.w_avg;
        const double peak = std::max({drive[0], drive[1], drive[2]});
        for (double& d : drive) d = peak > 0.0 ? std::max(0.0, 0.5 * d / peak) : 0.0;
        const Vec3 b_camera = opt.panel_albedo * (SL * drive);
        write_pfm(outdir / "black.pfm", LinearImage(16, 16, b_camera));

        ordered_json cfg;
        cfg["primaries"]["image"] = "primaries.pfm";
        cfg["primaries"]["rois"] = rois;
        cfg["channel_charts"] = charts;
        cfg["target"]["csv"] = "target.csv";
        cfg["beta"]["half_extent"] = opt.half_extent;
        cfg["beta"]["resolution"] = opt.resolution;
        cfg["white_reflectance"] = kWhiteReflectance;
        cfg["black_level"]["image"] = "black.pfm";
        cfg["black_level"]["roi"] = {0, 0, 16, 16};
        cfg["output_dir"] = "out";
        write_json(outdir / "config.json", cfg);

        ordered_json expected;
        expected["seed"] = seed;
        expected["scenario"] = scenario_name(scenario);
        expected["beta"] = beta;
        expected["exposure"] = exposure;
        expected["SL"] = mat3_to_json(SL);
        expected["w_avg"] = vec3_to_json(oc.w_avg);
        expected["b_camera"] = vec3_to_json(b_camera);
        write_json(outdir / "expected.json", expected);
    });
}

}  // namespace ledcal
