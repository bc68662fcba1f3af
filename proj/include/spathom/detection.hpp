// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spathom/beam_state.hpp"

namespace spathom {

/// Split-detector efficiency: overlap of the sign-flipped fundamental with the
/// first-order mode, 2 * integral_0^inf u0 u1 dx = sqrt(2/pi).
inline const double kSplitDetectorOverlap = std::sqrt(2.0 / std::numbers::pi);

/// Local oscillator of the spatial homodyne detector. Its transverse mode picks
/// which mode of the signal beam is measured (the noise-mode of detection), its
/// phase picks the quadrature.
struct LocalOscillator {
    int mode = 1;
    double phase = 0.0;
    double mode_match_efficiency = 1.0;

    LocalOscillator() = default;
    LocalOscillator(int mode_index, double phase_rad, double efficiency = 1.0)
        : mode(mode_index), phase(reduce_phase(phase_rad)), mode_match_efficiency(efficiency) {
        validate();
    }

    static double reduce_phase(double phi) {
        const double two_pi = 2.0 * std::numbers::pi;
        double r = std::fmod(phi, two_pi);
        if (r < 0.0) r += two_pi;
        return r;
    }

    void validate() const {
        if (mode < 0) throw std::invalid_argument("LocalOscillator: mode index must be >= 0");
        if (!(mode_match_efficiency >= 0.0 && mode_match_efficiency <= 1.0))
            throw std::invalid_argument("LocalOscillator: mode_match_efficiency must be in [0, 1]");
        if (!std::isfinite(phase)) throw std::invalid_argument("LocalOscillator: non-finite phase");
    }
};

/// What any detector model returns. Quadrature units: vacuum noise std = 1, so
/// snr_power = 1 at the quantum noise limit.
struct MeasurementOutcome {
    double signal_mean = 0.0;
    double noise_variance = 1.0;
    double snr_power = 0.0;
    double snr_db = 0.0;

    static MeasurementOutcome from(double mean, double variance) {
        if (!(variance > 0.0))
            throw std::invalid_argument("MeasurementOutcome: noise variance must be positive");
        MeasurementOutcome o;
        o.signal_mean = mean;
        o.noise_variance = variance;
        o.snr_power = mean * mean / variance;
        o.snr_db = 10.0 * std::log10(o.snr_power);
        return o;
    }
};

/// Quadrature variance of a Gaussian noise state at quadrature angle phi:
/// V(phi) = v_minus cos^2(phi - angle) + v_plus sin^2(phi - angle), evaluated
/// as v_minus + (v_plus - v_minus) sin^2 so vacuum is exactly 1 at every phi.
inline double noise_variance_at(const QuadratureNoise& noise, double phi) {
    noise.validate();
    const double s = std::sin(phi - noise.squeeze_angle);
    return noise.v_minus + (noise.v_plus - noise.v_minus) * s * s;
}

/// Mode-matched fringe visibility to power efficiency: eta = v^2.
inline double visibility_to_efficiency(double visibility) {
    if (!(visibility >= 0.0 && visibility <= 1.0))
        throw std::invalid_argument("visibility_to_efficiency: visibility must be in [0, 1]");
    return visibility * visibility;
}

inline double homodyne_signal_mean(const BeamState& state, const LocalOscillator& lo) {
    const complexd c = state.coefficient(lo.mode);
    const double gain = 2.0 * std::sqrt(state.n_photons * lo.mode_match_efficiency);
    return gain * (c.real() * std::cos(lo.phase) + c.imag() * std::sin(lo.phase));
}

inline double homodyne_noise_variance(const BeamState& state, const LocalOscillator& lo) {
    const double v = noise_variance_at(state.noise_of(lo.mode), lo.phase);
    // same 1 + eta (V - 1) form as apply_loss: vacuum stays exactly 1
    return 1.0 + lo.mode_match_efficiency * (v - 1.0);
}

/// Spatial homodyne measurement: the LO mode is the noise-mode of detection, the
/// LO phase selects the quadrature. Mode mismatch acts as beam-splitter loss on
/// both signal amplitude and noise.
inline MeasurementOutcome homodyne_expectation(const BeamState& state, const LocalOscillator& lo) {
    state.validate();
    lo.validate();
    return MeasurementOutcome::from(homodyne_signal_mean(state, lo),
                                    homodyne_noise_variance(state, lo));
}

/// Split (two-segment) detector baseline for displacement. Measures the
/// sign-flipped carrier component, so the amplitude response to the TEM10
/// coefficient is reduced by sqrt(2/pi) and the phase quadrature (tilt) is
/// invisible. Modeled for coherent illumination only.
inline MeasurementOutcome split_detector_expectation(const BeamState& state) {
    state.validate();
    if (!state.noise_of(BeamState::kSignalMode).is_vacuum())
        throw std::invalid_argument(
            "split_detector_expectation: model covers coherent illumination only "
            "(signal mode carries non-vacuum noise)");
    const complexd c = state.coefficient(BeamState::kSignalMode);
    const double mean = kSplitDetectorOverlap * 2.0 * std::sqrt(state.n_photons) * c.real();
    return MeasurementOutcome::from(mean, 1.0);
}

} // namespace spathom
