// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spathom/io.hpp"

namespace spathom {

/// One scenario file drives every CLI command: radiometry fixes the photon
/// budget, basis the mode frame, signal/noise the beam, detector the readout.
/// Parsing is strict — unknown keys are errors, never silently ignored.
struct ScenarioConfig {
    RadiometryParams radiometry;
    double waist_m = 0.0;
    int max_order = 8;

    // signal: direct encodings and/or the PZT mixture
    std::optional<double> displacement_m;
    std::optional<double> tilt_rad;
    std::optional<double> pzt_power_db;
    double pzt_tilt_fraction = 0.0;

    // noise on the TEM10 mode, then a chain of transmissions
    double v_minus_db = 0.0;
    double v_plus_db = 0.0;
    double squeeze_angle_rad = 0.0;
    std::vector<double> loss_chain;

    // detector
    bool split_detector = false;
    int lo_mode = 1;
    double mode_match_efficiency = 1.0;
    bool scan = false;
    std::vector<double> locked_phases_rad;

    // trace acquisition
    std::size_t n_samples = 10000;
    std::uint64_t seed = 1;
    unsigned threads = 1;

    std::string output_dir = ".";

    bool has_squeezing() const { return v_minus_db != 0.0 || v_plus_db != 0.0; }
};

namespace detail {

inline double require_number(const nlohmann::json& obj, const std::string& where,
                             const std::string& key) {
    if (!obj.contains(key))
        throw std::invalid_argument(where + ": missing required key '" + key + "'");
    if (!obj.at(key).is_number())
        throw std::invalid_argument(where + "." + key + ": expected a number");
    return obj.at(key).get<double>();
}

inline double optional_number(const nlohmann::json& obj, const std::string& where,
                              const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number())
        throw std::invalid_argument(where + "." + key + ": expected a number");
    return obj.at(key).get<double>();
}

} // namespace detail

inline ScenarioConfig parse_scenario(const nlohmann::json& j) {
    detail::require_keys(j, "scenario",
                         {"radiometry", "basis", "signal", "noise", "detector", "trace", "output"});
    ScenarioConfig cfg;

    if (!j.contains("radiometry"))
        throw std::invalid_argument("scenario: missing required section 'radiometry'");
    const auto& jr = j.at("radiometry");
    detail::require_keys(jr, "radiometry", {"power_w", "wavelength_m", "rbw_hz", "vbw_hz"});
    cfg.radiometry.power_w = detail::require_number(jr, "radiometry", "power_w");
    cfg.radiometry.wavelength_m = detail::require_number(jr, "radiometry", "wavelength_m");
    cfg.radiometry.rbw_hz = detail::require_number(jr, "radiometry", "rbw_hz");
    cfg.radiometry.vbw_hz = detail::require_number(jr, "radiometry", "vbw_hz");
    cfg.radiometry.validate();

    if (!j.contains("basis"))
        throw std::invalid_argument("scenario: missing required section 'basis'");
    const auto& jb = j.at("basis");
    detail::require_keys(jb, "basis", {"waist_m", "max_order"});
    cfg.waist_m = detail::require_number(jb, "basis", "waist_m");
    cfg.max_order = static_cast<int>(detail::optional_number(jb, "basis", "max_order", 8));

    if (j.contains("signal")) {
        const auto& js = j.at("signal");
        detail::require_keys(js, "signal",
                             {"displacement_m", "tilt_rad", "pzt_power_db", "pzt_tilt_fraction"});
        if (js.contains("displacement_m"))
            cfg.displacement_m = detail::require_number(js, "signal", "displacement_m");
        if (js.contains("tilt_rad")) cfg.tilt_rad = detail::require_number(js, "signal", "tilt_rad");
        if (js.contains("pzt_power_db")) {
            cfg.pzt_power_db = detail::require_number(js, "signal", "pzt_power_db");
            cfg.pzt_tilt_fraction = detail::optional_number(js, "signal", "pzt_tilt_fraction", 0.0);
        } else if (js.contains("pzt_tilt_fraction")) {
            throw std::invalid_argument("signal: pzt_tilt_fraction requires pzt_power_db");
        }
    }

    if (j.contains("noise")) {
        const auto& jn = j.at("noise");
        detail::require_keys(jn, "noise", {"v_minus_db", "v_plus_db", "angle_rad", "loss_chain"});
        cfg.v_minus_db = detail::optional_number(jn, "noise", "v_minus_db", 0.0);
        cfg.v_plus_db = detail::optional_number(jn, "noise", "v_plus_db", 0.0);
        cfg.squeeze_angle_rad = detail::optional_number(jn, "noise", "angle_rad", 0.0);
        if (jn.contains("loss_chain")) {
            if (!jn.at("loss_chain").is_array())
                throw std::invalid_argument("noise.loss_chain: expected an array of transmissions");
            for (const auto& eta : jn.at("loss_chain")) {
                if (!eta.is_number())
                    throw std::invalid_argument("noise.loss_chain: expected numbers");
                cfg.loss_chain.push_back(eta.get<double>());
            }
        }
    }

    if (j.contains("detector")) {
        const auto& jd = j.at("detector");
        detail::require_keys(jd, "detector",
                             {"type", "lo_mode", "phase_rad", "scan", "locked_phases_rad",
                              "visibility", "mode_match_efficiency"});
        const std::string type = jd.value("type", "homodyne");
        if (type == "split") {
            cfg.split_detector = true;
            detail::require_keys(jd, "detector(split)", {"type"});
        } else if (type == "homodyne") {
            cfg.lo_mode = static_cast<int>(detail::optional_number(jd, "detector", "lo_mode", 1));
            if (jd.contains("visibility") && jd.contains("mode_match_efficiency"))
                throw std::invalid_argument(
                    "detector: give either visibility or mode_match_efficiency, not both");
            if (jd.contains("visibility"))
                cfg.mode_match_efficiency =
                    visibility_to_efficiency(detail::require_number(jd, "detector", "visibility"));
            else
                cfg.mode_match_efficiency =
                    detail::optional_number(jd, "detector", "mode_match_efficiency", 1.0);
            if (jd.contains("scan")) {
                if (!jd.at("scan").is_boolean())
                    throw std::invalid_argument("detector.scan: expected a boolean");
                cfg.scan = jd.at("scan").get<bool>();
            }
            if (jd.contains("phase_rad"))
                cfg.locked_phases_rad.push_back(detail::require_number(jd, "detector", "phase_rad"));
            if (jd.contains("locked_phases_rad")) {
                if (!jd.at("locked_phases_rad").is_array())
                    throw std::invalid_argument("detector.locked_phases_rad: expected an array");
                for (const auto& phi : jd.at("locked_phases_rad")) {
                    if (!phi.is_number())
                        throw std::invalid_argument("detector.locked_phases_rad: expected numbers");
                    cfg.locked_phases_rad.push_back(phi.get<double>());
                }
            }
        } else {
            throw std::invalid_argument("detector.type: expected 'homodyne' or 'split'");
        }
    }

    if (j.contains("trace")) {
        const auto& jt = j.at("trace");
        detail::require_keys(jt, "trace", {"n_samples", "seed", "threads"});
        const double ns = detail::optional_number(jt, "trace", "n_samples", 10000.0);
        if (!(ns >= 1.0)) throw std::invalid_argument("trace.n_samples: must be >= 1");
        cfg.n_samples = static_cast<std::size_t>(ns);
        if (jt.contains("seed")) {
            if (!jt.at("seed").is_number_integer() && !jt.at("seed").is_number_unsigned())
                throw std::invalid_argument("trace.seed: expected an integer");
            cfg.seed = jt.at("seed").get<std::uint64_t>();
        }
        cfg.threads = static_cast<unsigned>(detail::optional_number(jt, "trace", "threads", 1.0));
    }

    if (j.contains("output")) {
        const auto& jo = j.at("output");
        detail::require_keys(jo, "output", {"dir"});
        if (jo.contains("dir")) {
            if (!jo.at("dir").is_string())
                throw std::invalid_argument("output.dir: expected a string");
            cfg.output_dir = jo.at("dir").get<std::string>();
        }
    }
    return cfg;
}

/// Resolved (defaults filled) scenario as JSON. Reports embed this echo, and
/// re-running the echoed config reproduces the report bit-exactly.
inline nlohmann::json scenario_to_json(const ScenarioConfig& cfg) {
    nlohmann::json j;
    j["radiometry"] = {{"power_w", cfg.radiometry.power_w},
                       {"wavelength_m", cfg.radiometry.wavelength_m},
                       {"rbw_hz", cfg.radiometry.rbw_hz},
                       {"vbw_hz", cfg.radiometry.vbw_hz}};
    j["basis"] = {{"waist_m", cfg.waist_m}, {"max_order", cfg.max_order}};
    nlohmann::json js = nlohmann::json::object();
    if (cfg.displacement_m) js["displacement_m"] = *cfg.displacement_m;
    if (cfg.tilt_rad) js["tilt_rad"] = *cfg.tilt_rad;
    if (cfg.pzt_power_db) {
        js["pzt_power_db"] = *cfg.pzt_power_db;
        js["pzt_tilt_fraction"] = cfg.pzt_tilt_fraction;
    }
    j["signal"] = js;
    j["noise"] = {{"v_minus_db", cfg.v_minus_db},
                  {"v_plus_db", cfg.v_plus_db},
                  {"angle_rad", cfg.squeeze_angle_rad},
                  {"loss_chain", cfg.loss_chain}};
    if (cfg.split_detector) {
        j["detector"] = {{"type", "split"}};
    } else {
        j["detector"] = {{"type", "homodyne"},
                         {"lo_mode", cfg.lo_mode},
                         {"mode_match_efficiency", cfg.mode_match_efficiency},
                         {"scan", cfg.scan},
                         {"locked_phases_rad", cfg.locked_phases_rad}};
    }
    j["trace"] = {{"n_samples", cfg.n_samples}, {"seed", cfg.seed}, {"threads", cfg.threads}};
    j["output"] = {{"dir", cfg.output_dir}};
    return j;
}

inline Basis scenario_basis(const ScenarioConfig& cfg) {
    Basis b{cfg.waist_m, cfg.radiometry.wavelength_m, cfg.max_order};
    b.validate();
    return b;
}

/// Build the beam the scenario describes: photon budget from radiometry,
/// squeezing folded through the loss chain, then the encoded signal.
inline BeamState scenario_beam_state(const ScenarioConfig& cfg) {
    BeamState state(photons_per_interval(cfg.radiometry), scenario_basis(cfg));
    if (cfg.has_squeezing()) {
        state = set_noise_mode_squeezing(state, BeamState::kSignalMode, cfg.v_minus_db,
                                         cfg.v_plus_db, cfg.squeeze_angle_rad);
        QuadratureNoise nz = state.noise_of(BeamState::kSignalMode);
        for (double eta : cfg.loss_chain) nz = apply_loss(nz, eta);
        state.noise[BeamState::kSignalMode] = nz;
    }
    if (cfg.displacement_m) state = encode_displacement(state, *cfg.displacement_m);
    if (cfg.tilt_rad) state = encode_tilt(state, *cfg.tilt_rad);
    if (cfg.pzt_power_db) state = pzt_modulation(state, *cfg.pzt_power_db, cfg.pzt_tilt_fraction);
    return state;
}

inline LocalOscillator scenario_local_oscillator(const ScenarioConfig& cfg, double phase) {
    return LocalOscillator(cfg.lo_mode, phase, cfg.mode_match_efficiency);
}

} // namespace spathom
