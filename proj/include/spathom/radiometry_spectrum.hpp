// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "spathom/detection.hpp"
#include "spathom/rng.hpp"

namespace spathom {

inline constexpr double kPlanckConstant = 6.62607015e-34; // J s, exact SI
inline constexpr double kSpeedOfLight = 299792458.0;      // m/s, exact SI

/// Optical power, wavelength and the spectrum-analyzer bandwidths. RBW sets the
/// measurement interval tau = 1/RBW; VBW sets how many intervals are averaged
/// per displayed point.
struct RadiometryParams {
    double power_w = 0.0;
    double wavelength_m = 0.0;
    double rbw_hz = 0.0;
    double vbw_hz = 0.0;

    void validate() const {
        if (!(power_w > 0.0) || !std::isfinite(power_w))
            throw std::invalid_argument("RadiometryParams: power_w must be positive");
        if (!(wavelength_m > 0.0) || !std::isfinite(wavelength_m))
            throw std::invalid_argument("RadiometryParams: wavelength_m must be positive");
        if (!(rbw_hz > 0.0) || !std::isfinite(rbw_hz))
            throw std::invalid_argument("RadiometryParams: rbw_hz must be positive");
        if (!(vbw_hz > 0.0) || !std::isfinite(vbw_hz))
            throw std::invalid_argument("RadiometryParams: vbw_hz must be positive");
        if (vbw_hz > rbw_hz)
            throw std::invalid_argument("RadiometryParams: vbw_hz must not exceed rbw_hz");
    }

    /// Measurement intervals averaged per displayed point.
    int averages_per_point() const {
        validate();
        return static_cast<int>(std::lround(rbw_hz / vbw_hz));
    }
};

/// Photons detected in one measurement interval tau = 1/RBW:
/// N = P * lambda / (h * c * RBW).
inline double photons_per_interval(const RadiometryParams& params) {
    params.validate();
    return params.power_w * params.wavelength_m /
           (kPlanckConstant * kSpeedOfLight * params.rbw_hz);
}

/// Displacement with homodyne SNR exactly 1 on shot-noise-limited light.
inline double qnl_displacement(double waist_m, double n_photons) {
    if (!(waist_m > 0.0) || !(n_photons > 0.0))
        throw std::invalid_argument("qnl_displacement: waist and photon number must be positive");
    return waist_m / (2.0 * std::sqrt(n_photons));
}

/// Tilt with SNR 1: the conjugate-variable counterpart, obtained by equating the
/// tilt coefficient pi*w*theta/lambda to the displacement coefficient d/w.
inline double qnl_tilt(double waist_m, double wavelength_m, double n_photons) {
    if (!(waist_m > 0.0) || !(wavelength_m > 0.0) || !(n_photons > 0.0))
        throw std::invalid_argument("qnl_tilt: arguments must be positive");
    return wavelength_m / (2.0 * std::numbers::pi * waist_m * std::sqrt(n_photons));
}

/// Video-bandwidth averaging over RBW/VBW intervals improves amplitude
/// sensitivity by sqrt(RBW/VBW).
inline double min_detectable(double d_qnl_m, double rbw_hz, double vbw_hz) {
    if (!(d_qnl_m > 0.0)) throw std::invalid_argument("min_detectable: d_qnl must be positive");
    if (!(vbw_hz > 0.0) || !(rbw_hz > 0.0) || vbw_hz > rbw_hz)
        throw std::invalid_argument("min_detectable: need 0 < vbw_hz <= rbw_hz");
    return d_qnl_m * std::sqrt(vbw_hz / rbw_hz);
}

enum class TraceMode { scan, locked };

/// One spectrum-analyzer-style acquisition. Each displayed point averages
/// n_average measurement intervals (the VBW model); every interval draws one
/// Gaussian photocurrent sample around the homodyne mean. The random stream is
/// counter-based, so the trace is a pure function of (config, seed) no matter
/// how many threads compute it.
struct TraceConfig {
    TraceMode mode = TraceMode::locked;
    double locked_phase = 0.0;
    std::size_t n_samples = 1;
    std::uint64_t seed = 0;
    int n_average = 1;
    unsigned threads = 1;
    BeamState state;
    LocalOscillator lo;

    void validate() const {
        if (n_samples < 1) throw std::invalid_argument("TraceConfig: n_samples must be >= 1");
        if (n_average < 1) throw std::invalid_argument("TraceConfig: n_average must be >= 1");
        if (!std::isfinite(locked_phase))
            throw std::invalid_argument("TraceConfig: non-finite locked phase");
        state.validate();
        lo.validate();
    }
};

struct TracePoint {
    std::size_t index = 0;
    double phi = 0.0;
    double power_db = 0.0;
};

namespace detail {

inline void simulate_trace_range(const TraceConfig& cfg, const CounterRng& rng,
                                 std::size_t begin, std::size_t end,
                                 std::vector<TracePoint>& out) {
    const std::uint64_t navg = static_cast<std::uint64_t>(cfg.n_average);
    for (std::size_t i = begin; i < end; ++i) {
        double phi = cfg.locked_phase;
        if (cfg.mode == TraceMode::scan && cfg.n_samples > 1)
            phi = 2.0 * std::numbers::pi * static_cast<double>(i) /
                  static_cast<double>(cfg.n_samples - 1);
        LocalOscillator lo(cfg.lo.mode, phi, cfg.lo.mode_match_efficiency);
        const double mean = homodyne_signal_mean(cfg.state, lo);
        const double sigma = std::sqrt(homodyne_noise_variance(cfg.state, lo));

        double acc = 0.0;
        std::uint64_t k = static_cast<std::uint64_t>(i) * navg;
        const std::uint64_t k_end = k + navg;
        while (k < k_end) {
            if (k % 2 == 0 && k + 1 < k_end) {
                const auto [g0, g1] = rng.normal_pair(k / 2);
                const double v0 = mean + sigma * g0;
                acc += v0 * v0;
                const double v1 = mean + sigma * g1;
                acc += v1 * v1;
                k += 2;
            } else {
                const double v = mean + sigma * rng.normal(k);
                acc += v * v;
                k += 1;
            }
        }
        out[i] = TracePoint{i, phi, 10.0 * std::log10(acc / static_cast<double>(navg))};
    }
}

} // namespace detail

/// Monte Carlo homodyne trace in dB relative to the quantum noise limit
/// (vacuum noise power = 0 dB). Scan mode sweeps the LO phase linearly over
/// [0, 2pi]; locked mode holds it fixed. Deterministic per (config, seed).
inline std::vector<TracePoint> simulate_homodyne_trace(const TraceConfig& cfg) {
    cfg.validate();
    const CounterRng rng(cfg.seed);
    std::vector<TracePoint> trace(cfg.n_samples);

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned n_threads =
        std::clamp<unsigned>(cfg.threads == 0 ? hw : cfg.threads, 1u,
                             static_cast<unsigned>(cfg.n_samples));
    if (n_threads == 1) {
        detail::simulate_trace_range(cfg, rng, 0, cfg.n_samples, trace);
        return trace;
    }
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    const std::size_t chunk = (cfg.n_samples + n_threads - 1) / n_threads;
    for (unsigned t = 0; t < n_threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(cfg.n_samples, begin + chunk);
        if (begin >= end) break;
        workers.emplace_back([&, begin, end] {
            detail::simulate_trace_range(cfg, rng, begin, end, trace);
        });
    }
    for (auto& w : workers) w.join();
    return trace;
}

/// Inversion of the SNR chain: what displacement/tilt a measured level
/// corresponds to. Levels are powers in dB relative to the QNL; parameter
/// ratios use the amplitude convention, d = d_QNL * 10^(dB/20).
struct SnrReport {
    double n_photons = 0.0;
    double d_qnl_m = 0.0;
    double theta_qnl_rad = 0.0;
    double d_min_m = 0.0;
    double lo_phase_rad = 0.0;
    double signal_mean = 0.0;
    double noise_variance = 1.0;
    double signal_db_rel_qnl = 0.0;
    double noise_db_rel_qnl = 0.0;
    double snr_db = 0.0;
    double displacement_signal_db = 0.0; // signal power at phi = 0
    double tilt_signal_db = 0.0;         // signal power at phi = pi/2
    double displacement_estimate_m = 0.0;
    double tilt_estimate_rad = 0.0;
    double min_displacement_at_floor_m = 0.0;

    static constexpr const char* kConvention =
        "powers in dB are 10*log10 of linear power ratios relative to the QNL; "
        "displacement/tilt ratios use the amplitude convention d = d_QNL*10^(dB/20)";
};

inline SnrReport snr_report(const BeamState& state, const LocalOscillator& lo,
                            const RadiometryParams& params) {
    state.validate();
    lo.validate();
    const double n = photons_per_interval(params);
    if (std::abs(n - state.n_photons) > 1e-6 * n)
        throw std::invalid_argument(
            "snr_report: state photon number inconsistent with radiometry parameters");
    if (std::abs(params.wavelength_m - state.basis.wavelength) >
        1e-12 * params.wavelength_m)
        throw std::invalid_argument(
            "snr_report: basis wavelength inconsistent with radiometry parameters");

    SnrReport r;
    r.n_photons = n;
    r.d_qnl_m = qnl_displacement(state.basis.waist, n);
    r.theta_qnl_rad = qnl_tilt(state.basis.waist, params.wavelength_m, n);
    r.d_min_m = min_detectable(r.d_qnl_m, params.rbw_hz, params.vbw_hz);
    r.lo_phase_rad = lo.phase;

    const MeasurementOutcome at_lo = homodyne_expectation(state, lo);
    r.signal_mean = at_lo.signal_mean;
    r.noise_variance = at_lo.noise_variance;
    r.signal_db_rel_qnl = 10.0 * std::log10(at_lo.signal_mean * at_lo.signal_mean);
    r.noise_db_rel_qnl = 10.0 * std::log10(at_lo.noise_variance);
    r.snr_db = at_lo.snr_db;

    const LocalOscillator lo_disp(lo.mode, 0.0, lo.mode_match_efficiency);
    const LocalOscillator lo_tilt(lo.mode, std::numbers::pi / 2.0, lo.mode_match_efficiency);
    const double s_disp = homodyne_signal_mean(state, lo_disp);
    const double s_tilt = homodyne_signal_mean(state, lo_tilt);
    r.displacement_signal_db = 10.0 * std::log10(s_disp * s_disp);
    r.tilt_signal_db = 10.0 * std::log10(s_tilt * s_tilt);
    r.displacement_estimate_m = r.d_qnl_m * std::pow(10.0, r.displacement_signal_db / 20.0);
    r.tilt_estimate_rad = r.theta_qnl_rad * std::pow(10.0, r.tilt_signal_db / 20.0);
    r.min_displacement_at_floor_m = r.d_qnl_m * std::pow(10.0, r.noise_db_rel_qnl / 20.0);
    return r;
}

} // namespace spathom
