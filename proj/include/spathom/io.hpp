// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spathom/beam_state.hpp"
#include "spathom/hg_modes.hpp"
#include "spathom/radiometry_spectrum.hpp"

namespace spathom {

/// Filesystem-level failures (distinct from validation errors so the CLI can
/// map them to a separate exit code).
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline double parse_double(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(context + ": cannot parse number from '" + s + "'");
    }
}
} // namespace detail

/// Profile CSV: header line, then rows of (x_m, re) or (x_m, re, im),
/// positions in meters. Export writes two columns when the profile is real.
inline void export_profile_csv(const SampledProfile& profile, std::ostream& out) {
    profile.validate();
    bool complex_valued = false;
    for (const auto& a : profile.amplitude)
        if (a.imag() != 0.0) {
            complex_valued = true;
            break;
        }
    out << (complex_valued ? "x_m,re,im\n" : "x_m,re\n");
    for (std::size_t i = 0; i < profile.size(); ++i) {
        out << detail::format_double(profile.x[i]) << ','
            << detail::format_double(profile.amplitude[i].real());
        if (complex_valued) out << ',' << detail::format_double(profile.amplitude[i].imag());
        out << '\n';
    }
}

inline void export_profile_csv(const SampledProfile& profile, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw io_error("cannot open for writing: " + path);
    export_profile_csv(profile, f);
    if (!f) throw io_error("write failed: " + path);
}

inline SampledProfile import_profile_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("profile CSV: empty input");
    const std::size_t n_cols = detail::split_csv_row(line).size();
    if (n_cols != 2 && n_cols != 3)
        throw std::invalid_argument("profile CSV: header must declare 2 or 3 columns");

    std::vector<double> x;
    std::vector<complexd> amp;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto fields = detail::split_csv_row(line);
        if (fields.size() != n_cols)
            throw std::invalid_argument("profile CSV: row " + std::to_string(row) +
                                        " has " + std::to_string(fields.size()) +
                                        " fields, expected " + std::to_string(n_cols));
        const std::string ctx = "profile CSV row " + std::to_string(row);
        x.push_back(detail::parse_double(fields[0], ctx));
        const double re = detail::parse_double(fields[1], ctx);
        const double im = n_cols == 3 ? detail::parse_double(fields[2], ctx) : 0.0;
        amp.emplace_back(re, im);
    }
    return make_profile(std::move(x), std::move(amp));
}

inline SampledProfile import_profile_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw io_error("cannot open for reading: " + path);
    return import_profile_csv(f);
}

/// Trace CSV: header row, columns (index, phi_rad, power_db).
inline void export_trace_csv(const std::vector<TracePoint>& trace, std::ostream& out) {
    out << "index,phi_rad,power_db\n";
    for (const auto& p : trace)
        out << p.index << ',' << detail::format_double(p.phi) << ','
            << detail::format_double(p.power_db) << '\n';
}

inline void export_trace_csv(const std::vector<TracePoint>& trace, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw io_error("cannot open for writing: " + path);
    export_trace_csv(trace, f);
    if (!f) throw io_error("write failed: " + path);
}

namespace detail {
inline void require_keys(const nlohmann::json& obj, const std::string& where,
                         const std::vector<std::string>& allowed) {
    if (!obj.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const auto& a : allowed)
            if (key == a) {
                ok = true;
                break;
            }
        if (!ok) throw std::invalid_argument(where + ": unknown key '" + key + "'");
    }
}
} // namespace detail

/// BeamState as a human-readable JSON document. Noise is stored in dB; the
/// carrier appears only when it carries non-vacuum noise, with its fixed
/// relative amplitude (re=1, im=0).
inline nlohmann::json beam_state_to_json(const BeamState& state) {
    state.validate();
    nlohmann::json modes = nlohmann::json::array();
    std::vector<int> indices;
    for (const auto& [m, c] : state.coefficients) indices.push_back(m);
    for (const auto& [m, nz] : state.noise)
        if (!state.coefficients.count(m) && (m == state.carrier ? !nz.is_vacuum() : true))
            indices.push_back(m);
    std::sort(indices.begin(), indices.end());
    for (int m : indices) {
        const complexd c = state.coefficient(m);
        const QuadratureNoise nz = state.noise_of(m);
        modes.push_back({{"index", m},
                         {"re", c.real()},
                         {"im", c.imag()},
                         {"v_minus_db", linear_to_db(nz.v_minus)},
                         {"v_plus_db", linear_to_db(nz.v_plus)},
                         {"angle_rad", nz.squeeze_angle}});
    }
    return {{"n_photons", state.n_photons},
            {"basis",
             {{"waist_m", state.basis.waist},
              {"wavelength_m", state.basis.wavelength},
              {"max_order", state.basis.max_order}}},
            {"modes", modes}};
}

inline BeamState beam_state_from_json(const nlohmann::json& j) {
    detail::require_keys(j, "beam state", {"n_photons", "basis", "modes"});
    if (!j.contains("n_photons") || !j.contains("basis"))
        throw std::invalid_argument("beam state: n_photons and basis are required");
    const auto& jb = j.at("basis");
    detail::require_keys(jb, "beam state basis", {"waist_m", "wavelength_m", "max_order"});
    Basis basis{jb.at("waist_m").get<double>(), jb.at("wavelength_m").get<double>(),
                jb.value("max_order", 8)};
    BeamState state(j.at("n_photons").get<double>(), basis);
    for (const auto& jm : j.value("modes", nlohmann::json::array())) {
        detail::require_keys(jm, "beam state mode",
                             {"index", "re", "im", "v_minus_db", "v_plus_db", "angle_rad"});
        const int idx = jm.at("index").get<int>();
        const complexd c(jm.value("re", 0.0), jm.value("im", 0.0));
        if (idx == state.carrier) {
            if (c != complexd(1.0, 0.0))
                throw std::invalid_argument(
                    "beam state: carrier coefficient must be re=1, im=0 (relative units)");
        } else if (c != complexd(0.0, 0.0)) {
            state.coefficients[idx] = c;
        }
        QuadratureNoise nz{db_to_linear(jm.value("v_minus_db", 0.0)),
                           db_to_linear(jm.value("v_plus_db", 0.0)), jm.value("angle_rad", 0.0)};
        if (!nz.is_vacuum()) {
            nz.validate_physical();
            state.noise[idx] = nz;
        }
    }
    state.validate();
    return state;
}

inline nlohmann::json snr_report_to_json(const SnrReport& r) {
    return {{"n_photons", r.n_photons},
            {"d_qnl_m", r.d_qnl_m},
            {"theta_qnl_rad", r.theta_qnl_rad},
            {"d_min_m", r.d_min_m},
            {"lo_phase_rad", r.lo_phase_rad},
            {"signal_mean", r.signal_mean},
            {"noise_variance", r.noise_variance},
            {"signal_db_rel_qnl", r.signal_db_rel_qnl},
            {"noise_db_rel_qnl", r.noise_db_rel_qnl},
            {"snr_db", r.snr_db},
            {"displacement_signal_db", r.displacement_signal_db},
            {"tilt_signal_db", r.tilt_signal_db},
            {"displacement_estimate_m", r.displacement_estimate_m},
            {"tilt_estimate_rad", r.tilt_estimate_rad},
            {"min_displacement_at_floor_m", r.min_displacement_at_floor_m},
            {"convention", SnrReport::kConvention}};
}

} // namespace spathom
