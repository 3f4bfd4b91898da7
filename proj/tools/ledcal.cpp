// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ledcal Authors.

// ledcal: color calibration for RGB LED virtual production stages.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ledcal/bundle_io.hpp"
#include "ledcal/error.hpp"
#include "ledcal/geometry.hpp"
#include "ledcal/image_io.hpp"
#include "ledcal/pipeline.hpp"
#include "ledcal/spectral.hpp"

namespace fs = std::filesystem;
using namespace ledcal;

namespace {

constexpr int kExitInputError = 2;

Vec3 to_vec3(const std::vector<double>& v, const std::string& what) {
    if (v.size() != 3) throw InputError(what + ": expected three comma-separated values");
    return {v[0], v[1], v[2]};
}

std::string vec_text(const Vec3& v) {
    return format_double(v[0]) + " " + format_double(v[1]) + " " + format_double(v[2]);
}

struct SolveArgs {
    std::string config;
    std::string out;
    std::optional<double> half_extent, beta, cond_limit_q, cond_limit_sl, white_reflectance;
    std::optional<std::size_t> resolution;
};

int cmd_solve(const SolveArgs& a) {
    PipelineConfig cfg = load_config(a.config);
    if (!a.out.empty()) cfg.output_dir = a.out;
    if (a.half_extent) cfg.half_extent = *a.half_extent;
    if (a.resolution) cfg.resolution = *a.resolution;
    if (a.beta) cfg.beta = *a.beta;
    if (a.cond_limit_q) cfg.cond_limit_q = *a.cond_limit_q;
    if (a.cond_limit_sl) cfg.cond_limit_sl = *a.cond_limit_sl;
    if (a.white_reflectance) cfg.white_reflectance = *a.white_reflectance;

    const SolveResult res = run_solve(cfg);
    for (const std::string& w : res.warnings) std::cerr << "warning: " << w << "\n";
    const auto& err = res.report["chart_error"];
    std::cout << "beta " << format_double(res.bundle.beta) << "\n";
    std::cout << "lit error M only  " << vec_text(vec3_from_json(err["lit_m_only"]["error"], "error")) << "\n";
    std::cout << "lit error M and Q " << vec_text(vec3_from_json(err["lit_m_and_q"]["error"], "error")) << "\n";
    std::cout << "N " << (res.bundle.N ? "available" : "unavailable (fallback to M)") << "\n";
    std::cout << "wrote " << cfg.output_dir.string() << "\n";
    return res.exit_code;
}

struct SimulateArgs {
    std::string bundle, srl, report, env, out, png, target, variant = "m-and-q";
    std::vector<double> w_avg, facing{0.0, 0.0, 1.0};
};

int cmd_simulate(const SimulateArgs& a) {
    const CalibrationBundle bundle = bundle_from_json(parse_json(read_text_file(a.bundle), a.bundle));
    const SRLSet srl = srl_from_json(parse_json(read_text_file(a.srl), a.srl));
    const int sources = (a.w_avg.empty() ? 0 : 1) + (a.env.empty() ? 0 : 1) + (a.report.empty() ? 0 : 1);
    if (sources != 1) throw InputError("give exactly one of --w-avg, --env or --report");
    Vec3 w_avg{};
    if (!a.w_avg.empty()) {
        w_avg = to_vec3(a.w_avg, "--w-avg");
    } else if (!a.env.empty()) {
        w_avg = w_avg_from_env(read_envmap_pfm(a.env), Direction::normalized(to_vec3(a.facing, "--facing")));
    } else {
        w_avg = vec3_from_json(parse_json(read_text_file(a.report), a.report).at("w_avg"), "report w_avg");
    }
    const ChartSamples chart = simulate_variant(bundle, srl, w_avg, parse_variant(a.variant));
    if (a.out.empty()) {
        std::cout << chart_to_csv(chart);
    } else {
        write_chart_csv(a.out, chart);
    }
    if (!a.png.empty()) {
        const ChartSamples target = a.target.empty() ? chart : read_chart_csv(a.target, chart.white_index());
        const double exposure = target.white()[1] > 0.0 ? 0.8 / target.white()[1] : 1.0;
        write_png16(a.png, render_comparison_chart(target, chart, !a.target.empty()), exposure);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-matrix color calibration for RGB LED virtual production stages"};
    app.require_subcommand(1);

    SolveArgs solve;
    auto* s = app.add_subcommand("solve", "Solve M, Q, N, beta and the black level from calibration captures");
    s->add_option("--config", solve.config, "Pipeline config (JSON)")->required();
    s->add_option("--out", solve.out, "Output directory (overrides the config)");
    s->add_option("--half-extent", solve.half_extent, "Panel half extent on the plane one unit away");
    s->add_option("--resolution", solve.resolution, "Height of the lat-long map used for beta");
    s->add_option("--beta", solve.beta, "Use this beta instead of computing it");
    s->add_option("--cond-limit-q", solve.cond_limit_q, "Largest cond(Q) for which N is solved");
    s->add_option("--cond-limit-sl", solve.cond_limit_sl, "Largest accepted cond(SL)");
    s->add_option("--white-reflectance", solve.white_reflectance, "Reflectance of the chart white patch");

    SimulateArgs sim;
    auto* m = app.add_subcommand("simulate", "Predict the chart lit by the stage from a bundle and SRL data");
    m->add_option("--bundle", sim.bundle, "bundle.json")->required();
    m->add_option("--srl", sim.srl, "srl.json")->required();
    m->add_option("--w-avg", sim.w_avg, "Diffuse integral r,g,b")->delimiter(',');
    m->add_option("--env", sim.env, "Lat-long environment map (PFM)");
    m->add_option("--facing", sim.facing, "Chart normal x,y,z for --env")->delimiter(',');
    m->add_option("--report", sim.report, "Take w_avg from a solve report");
    m->add_option("--variant", sim.variant, "m-only or m-and-q");
    m->add_option("--out", sim.out, "Output CSV (stdout when omitted)");
    m->add_option("--png", sim.png, "Comparison chart PNG");
    m->add_option("--target", sim.target, "Target chart CSV for the comparison PNG");

    std::uint64_t seed = 1;
    std::string scenario = "broad", oracle_out;
    OracleOptions oracle_opts;
    auto* o = app.add_subcommand("oracle", "Generate a synthetic calibration fixture");
    o->add_option("--seed", seed, "Random seed");
    o->add_option("--scenario", scenario, "broad, rgb-led, monochromatic or flat");
    o->add_option("--out", oracle_out, "Fixture directory")->required();
    o->add_option("--half-extent", oracle_opts.half_extent, "Panel half extent");
    o->add_option("--resolution", oracle_opts.resolution, "Lat-long height for beta");

    double half_extent = 0.6;
    std::size_t resolution = 1024;
    auto* b = app.add_subcommand("beta", "Print the panel scale factor beta");
    b->add_option("--half-extent", half_extent, "Panel half extent");
    b->add_option("--resolution", resolution, "Lat-long map height");

    std::string target_csv, measured_csv;
    std::size_t white_index = kDefaultWhiteIndex;
    auto* e = app.add_subcommand("chart-error", "Mean error relative to the target white patch");
    e->add_option("target", target_csv, "Target chart CSV")->required();
    e->add_option("measured", measured_csv, "Measured chart CSV")->required();
    e->add_option("--white-index", white_index, "White patch index");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : kExitInputError;
    }

    try {
        if (*s) return cmd_solve(solve);
        if (*m) return cmd_simulate(sim);
        if (*o) {
            run_oracle(seed, spectral::parse_scenario(scenario), oracle_out, oracle_opts);
            std::cout << "wrote " << oracle_out << "\n";
            return 0;
        }
        if (*b) {
            std::cout << format_double(compute_beta(half_extent, resolution)) << "\n";
            return 0;
        }
        if (*e) {
            const ChartSamples t = read_chart_csv(target_csv, white_index);
            const ChartSamples meas = read_chart_csv(measured_csv, white_index);
            std::cout << vec_text(chart_error(t, meas)) << "\n";
            return 0;
        }
    } catch (const InputError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitInputError;
    } catch (const SolverError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitInputError;
    }
    return 0;
}
