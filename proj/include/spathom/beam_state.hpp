// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>

#include "spathom/hg_modes.hpp"

namespace spathom {

/// Soft-limit warnings (first-order validity) go through this replaceable hook.
inline std::function<void(const std::string&)>& warning_handler() {
    static std::function<void(const std::string&)> handler = [](const std::string& msg) {
        std::cerr << "spathom: warning: " << msg << "\n";
    };
    return handler;
}

inline void warn(const std::string& msg) {
    if (warning_handler()) warning_handler()(msg);
}

/// First-order encoding regime: warn above 1e-2 (neglected quadratic terms reach
/// the percent level), reject above 1e-1.
inline constexpr double kEncodingWarnThreshold = 1e-2;
inline constexpr double kEncodingRejectThreshold = 1e-1;

/// Gaussian quadrature noise of one mode. Variances are linear with vacuum = 1;
/// squeeze_angle is the quadrature angle (relative to the carrier amplitude
/// quadrature) at which the variance equals v_minus.
///
/// The uncertainty product v_minus*v_plus >= 1 is enforced where states are
/// constructed (set_noise_mode_squeezing, JSON load). The noise maps themselves
/// accept idealized variances down to 0 so limiting cases stay computable.
struct QuadratureNoise {
    double v_minus = 1.0;
    double v_plus = 1.0;
    double squeeze_angle = 0.0;

    bool is_vacuum() const { return v_minus == 1.0 && v_plus == 1.0; }

    void validate() const {
        if (!(v_minus >= 0.0) || !(v_plus >= 0.0) || !std::isfinite(v_minus) ||
            !std::isfinite(v_plus) || !std::isfinite(squeeze_angle))
            throw std::invalid_argument(
                "QuadratureNoise: variances must be non-negative and finite");
    }

    void validate_physical() const {
        validate();
        if (v_minus * v_plus < 1.0 - 1e-12)
            throw std::invalid_argument("QuadratureNoise: uncertainty product v_minus*v_plus < 1");
    }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double v) { return 10.0 * std::log10(v); }

/// Multimode Gaussian beam: N photons per measurement interval in the carrier
/// (TEM00) mode, plus small coherent coefficients and quadrature noise on the
/// higher modes. Coefficients are relative to the carrier amplitude sqrt(N), so
/// the encoding relations d/w and pi*theta*w/lambda are stored verbatim.
struct BeamState {
    double n_photons = 0.0;
    int carrier = 0;
    Basis basis;
    std::map<int, complexd> coefficients;   // non-carrier modes only
    std::map<int, QuadratureNoise> noise;   // missing entries mean vacuum

    static constexpr int kSignalMode = 1; // TEM10 along x

    BeamState() = default;
    BeamState(double photons, Basis b) : n_photons(photons), basis(std::move(b)) {
        validate();
    }

    complexd coefficient(int mode) const {
        if (mode == carrier) return complexd(1.0);
        const auto it = coefficients.find(mode);
        return it == coefficients.end() ? complexd(0.0) : it->second;
    }

    QuadratureNoise noise_of(int mode) const {
        const auto it = noise.find(mode);
        return it == noise.end() ? QuadratureNoise{} : it->second;
    }

    void validate() const {
        basis.validate();
        if (!(n_photons > 0.0) || !std::isfinite(n_photons))
            throw std::invalid_argument("BeamState: n_photons must be positive and finite");
        for (const auto& [mode, c] : coefficients) {
            if (mode == carrier)
                throw std::invalid_argument("BeamState: carrier coefficient is fixed at 1");
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
                throw std::invalid_argument("BeamState: non-finite coefficient");
        }
        for (const auto& [mode, nz] : noise) nz.validate();
    }
};

namespace detail {
inline void check_encoding_magnitude(double added, double total, const std::string& what) {
    if (!std::isfinite(added)) throw std::invalid_argument(what + ": non-finite encoding");
    if (std::abs(added) >= kEncodingRejectThreshold || total >= kEncodingRejectThreshold)
        throw std::invalid_argument(what + ": coefficient magnitude " +
                                    std::to_string(std::max(std::abs(added), total)) +
                                    " breaks the first-order expansion (limit 0.1)");
    if (std::abs(added) > kEncodingWarnThreshold || total > kEncodingWarnThreshold)
        warn(what + ": coefficient magnitude above " + std::to_string(kEncodingWarnThreshold) +
             "; first-order encoding error reaches the percent level");
}
} // namespace detail

/// Transverse displacement by d meters: adds d/w to Re(c) of the TEM10 mode.
inline BeamState encode_displacement(BeamState state, double displacement) {
    state.validate();
    const double add = displacement / state.basis.waist;
    if (add == 0.0) return state;
    complexd c = state.coefficient(BeamState::kSignalMode) + complexd(add, 0.0);
    detail::check_encoding_magnitude(add, std::abs(c), "encode_displacement");
    state.coefficients[BeamState::kSignalMode] = c;
    return state;
}

/// Tilt by theta radians: adds pi*w*theta/lambda to Im(c) of the TEM10 mode.
inline BeamState encode_tilt(BeamState state, double tilt) {
    state.validate();
    const double add = std::numbers::pi * state.basis.waist * tilt / state.basis.wavelength;
    if (add == 0.0) return state;
    complexd c = state.coefficient(BeamState::kSignalMode) + complexd(0.0, add);
    detail::check_encoding_magnitude(add, std::abs(c), "encode_tilt");
    state.coefficients[BeamState::kSignalMode] = c;
    return state;
}

/// One actuator writing a fixed displacement/tilt mixture: of the added signal
/// power (in dB relative to the quantum noise limit, i.e. relative to the level
/// that gives SNR 1), tilt_fraction sits on Im(c) and the rest on Re(c).
inline BeamState pzt_modulation(BeamState state, double signal_power_db, double tilt_fraction) {
    state.validate();
    if (!std::isfinite(signal_power_db))
        throw std::invalid_argument("pzt_modulation: non-finite signal power");
    if (!(tilt_fraction >= 0.0 && tilt_fraction <= 1.0))
        throw std::invalid_argument("pzt_modulation: tilt_fraction must be in [0, 1]");
    const double magnitude =
        std::pow(10.0, signal_power_db / 20.0) / (2.0 * std::sqrt(state.n_photons));
    const complexd add(magnitude * std::sqrt(1.0 - tilt_fraction),
                       magnitude * std::sqrt(tilt_fraction));
    complexd c = state.coefficient(BeamState::kSignalMode) + add;
    detail::check_encoding_magnitude(std::abs(add), std::abs(c), "pzt_modulation");
    state.coefficients[BeamState::kSignalMode] = c;
    return state;
}

/// Replace one mode's quadrature noise, dB in, linear out: V = 10^(dB/10).
/// Rejects pairs that would violate the uncertainty product.
inline BeamState set_noise_mode_squeezing(BeamState state, int mode, double v_minus_db,
                                          double v_plus_db, double squeeze_angle) {
    state.validate();
    QuadratureNoise nz{db_to_linear(v_minus_db), db_to_linear(v_plus_db), squeeze_angle};
    if (nz.v_minus * nz.v_plus < 1.0 - 1e-12)
        throw std::invalid_argument(
            "set_noise_mode_squeezing: uncertainty product " +
            std::to_string(nz.v_minus * nz.v_plus) + " < 1 (dB values must sum >= 0)");
    nz.validate_physical();
    state.noise[mode] = nz;
    return state;
}

/// Beam-splitter loss on one mode's noise: V' = eta V + (1 - eta) on each
/// quadrature, computed as 1 + eta (V - 1) so vacuum is an exact fixed point.
/// Losses compose as eta1*eta2.
inline QuadratureNoise apply_loss(QuadratureNoise noise, double eta) {
    noise.validate();
    if (!(eta >= 0.0 && eta <= 1.0))
        throw std::invalid_argument("apply_loss: transmission must be in [0, 1]");
    noise.v_minus = 1.0 + eta * (noise.v_minus - 1.0);
    noise.v_plus = 1.0 + eta * (noise.v_plus - 1.0);
    return noise;
}

} // namespace spathom
