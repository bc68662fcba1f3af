// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spathom/scenario.hpp"
#include "spathom/selftest.hpp"

namespace spathom {

/// Exit codes shared by the binary and the in-process runner.
enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 1,
    kExitIo = 2,
    kExitSelfTest = 3,
};

namespace cli_detail {

inline nlohmann::json load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw io_error("cannot open config: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config " + path + ": " + e.what());
    }
    return j;
}

inline void write_text_file(const std::string& dir, const std::string& name,
                            const std::string& content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io_error("cannot create output directory: " + dir);
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream f(path);
    if (!f) throw io_error("cannot open for writing: " + path);
    f << content;
    if (!f) throw io_error("write failed: " + path);
}

} // namespace cli_detail

inline nlohmann::json cmd_qnl(const ScenarioConfig& cfg) {
    const Basis basis = scenario_basis(cfg);
    const double n = photons_per_interval(cfg.radiometry);
    const double d_qnl = qnl_displacement(basis.waist, n);
    nlohmann::json results = {
        {"n_photons", n},
        {"d_qnl_m", d_qnl},
        {"theta_qnl_rad", qnl_tilt(basis.waist, basis.wavelength, n)},
        {"d_min_m", min_detectable(d_qnl, cfg.radiometry.rbw_hz, cfg.radiometry.vbw_hz)},
    };
    return {{"command", "qnl"}, {"config", scenario_to_json(cfg)}, {"results", results}};
}

inline nlohmann::json outcome_to_json(const MeasurementOutcome& o) {
    return {{"signal_mean", o.signal_mean},
            {"noise_variance", o.noise_variance},
            {"snr_power", o.snr_power},
            {"snr_db", o.snr_db}};
}

inline nlohmann::json cmd_compare_detectors(const ScenarioConfig& cfg) {
    if (cfg.has_squeezing())
        throw std::invalid_argument(
            "compare-detectors: split detector model covers coherent light only; "
            "remove the noise section (set v_minus_db/v_plus_db to 0)");
    const BeamState state = scenario_beam_state(cfg);
    const MeasurementOutcome disp =
        homodyne_expectation(state, scenario_local_oscillator(cfg, 0.0));
    const MeasurementOutcome tilt =
        homodyne_expectation(state, scenario_local_oscillator(cfg, std::numbers::pi / 2.0));
    const MeasurementOutcome split = split_detector_expectation(state);

    nlohmann::json results = {{"homodyne_displacement", outcome_to_json(disp)},
                              {"homodyne_tilt", outcome_to_json(tilt)},
                              {"split", outcome_to_json(split)}};
    if (disp.signal_mean != 0.0) {
        const double ratio = std::abs(split.signal_mean) / std::abs(disp.signal_mean);
        results["amplitude_snr_ratio_split_over_homodyne"] = ratio;
        results["homodyne_advantage_percent"] = (1.0 / ratio - 1.0) * 100.0;
    }
    return {{"command", "compare-detectors"},
            {"config", scenario_to_json(cfg)},
            {"results", results}};
}

/// Runs the scenario's acquisitions and writes one CSV per trace plus a gnuplot
/// script. Each trace gets its own derived seed (scan: seed, locked i: seed+1+i)
/// so separate acquisitions carry independent noise.
inline nlohmann::json cmd_trace(const ScenarioConfig& cfg) {
    if (cfg.split_detector)
        throw std::invalid_argument("trace: requires a homodyne detector (split has no LO phase)");
    if (!cfg.scan && cfg.locked_phases_rad.empty())
        throw std::invalid_argument(
            "detector: trace needs scan=true and/or locked_phases_rad/phase_rad");

    const BeamState state = scenario_beam_state(cfg);
    const int navg = cfg.radiometry.averages_per_point();

    TraceConfig base;
    base.n_samples = cfg.n_samples;
    base.n_average = navg;
    base.threads = cfg.threads;
    base.state = state;
    base.lo = scenario_local_oscillator(cfg, 0.0);

    nlohmann::json files = nlohmann::json::array();
    std::string plot = "# gnuplot script emitted by spathom trace\n"
                       "set datafile separator ','\n"
                       "set grid\n"
                       "set ylabel 'power (dB rel QNL)'\n";

    if (cfg.scan) {
        TraceConfig tc = base;
        tc.mode = TraceMode::scan;
        tc.seed = cfg.seed;
        const auto trace = simulate_homodyne_trace(tc);
        std::ostringstream csv;
        export_trace_csv(trace, csv);
        cli_detail::write_text_file(cfg.output_dir, "scan.csv", csv.str());
        files.push_back({{"file", "scan.csv"}, {"mode", "scan"}, {"seed", tc.seed}});
        plot += "set xlabel 'LO phase (rad)'\n"
                "plot 'scan.csv' every ::1 using 2:3 with lines title 'scan'\n"
                "pause -1\n";
    }
    for (std::size_t i = 0; i < cfg.locked_phases_rad.size(); ++i) {
        TraceConfig tc = base;
        tc.mode = TraceMode::locked;
        tc.locked_phase = cfg.locked_phases_rad[i];
        tc.seed = cfg.seed + 1 + i;
        const auto trace = simulate_homodyne_trace(tc);
        const std::string name = "locked_" + std::to_string(i) + ".csv";
        std::ostringstream csv;
        export_trace_csv(trace, csv);
        cli_detail::write_text_file(cfg.output_dir, name, csv.str());

        const LocalOscillator lo = scenario_local_oscillator(cfg, tc.locked_phase);
        files.push_back({{"file", name},
                         {"mode", "locked"},
                         {"phi_rad", tc.locked_phase},
                         {"seed", tc.seed},
                         {"analytic_signal_power", std::pow(homodyne_signal_mean(state, lo), 2)},
                         {"analytic_noise_variance", homodyne_noise_variance(state, lo)}});
        plot += "set xlabel 'sample index'\n"
                "plot '" + name + "' every ::1 using 1:3 with lines title 'locked " +
                std::to_string(i) + "'\npause -1\n";
    }
    cli_detail::write_text_file(cfg.output_dir, "plot_traces.gp", plot);

    nlohmann::json report = {{"command", "trace"},
                             {"config", scenario_to_json(cfg)},
                             {"results",
                              {{"n_average_per_point", navg},
                               {"n_photons", state.n_photons},
                               {"files", files},
                               {"plot_script", "plot_traces.gp"}}}};
    std::ostringstream rep;
    rep << report.dump(2) << '\n';
    cli_detail::write_text_file(cfg.output_dir, "trace_report.json", rep.str());
    return report;
}

inline int cmd_selftest(std::ostream& out) {
    const auto results = run_selftests();
    bool all = true;
    for (const auto& r : results) {
        out << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << "\n";
        all = all && r.passed;
    }
    out << (all ? "selftest: all suites passed\n" : "selftest: FAILURES present\n");
    return all ? kExitOk : kExitSelfTest;
}

/// In-process CLI entry point; `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"quantum-noise-limited Gaussian beam displacement/tilt measurement toolkit"};
    app.name("spathom");
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::int64_t seed_override = -1;

    CLI::App* qnl = app.add_subcommand("qnl", "photon budget and quantum noise limits");
    CLI::App* trace = app.add_subcommand("trace", "simulate spectrum-analyzer traces to CSV");
    CLI::App* compare =
        app.add_subcommand("compare-detectors", "homodyne vs split detector side by side");
    app.add_subcommand("selftest", "run the invariant suites");
    for (CLI::App* sub : {qnl, trace, compare}) {
        sub->add_option("--config", config_path, "scenario JSON file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides config)");
    }
    trace->add_option("--seed", seed_override, "override the trace seed");

    std::vector<std::string> argv_storage = args;
    std::vector<const char*> argv;
    argv.push_back("spathom");
    for (const auto& a : argv_storage) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (app.got_subcommand("selftest")) return cmd_selftest(out);

        ScenarioConfig cfg = parse_scenario(cli_detail::load_config(config_path));
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);

        nlohmann::json report;
        if (app.got_subcommand("qnl")) report = cmd_qnl(cfg);
        else if (app.got_subcommand("trace")) report = cmd_trace(cfg);
        else report = cmd_compare_detectors(cfg);
        out << report.dump(2) << "\n";
        return kExitOk;
    } catch (const io_error& e) {
        err << "spathom: io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        err << "spathom: invalid configuration: " << e.what() << "\n";
        return kExitValidation;
    } catch (const nlohmann::json::exception& e) {
        err << "spathom: invalid configuration: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "spathom: error: " << e.what() << "\n";
        return kExitValidation;
    }
}

} // namespace spathom
