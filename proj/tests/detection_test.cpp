// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "spathom/detection.hpp"
#include "test_support.hpp"

using namespace spathom;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const Basis kExperimentBasis{106e-6, 1.064e-6, 8};

BeamState state_at_qnl_displacement() {
    BeamState s(9.105710047e9, kExperimentBasis);
    const double d_qnl = kExperimentBasis.waist / (2.0 * std::sqrt(s.n_photons));
    return encode_displacement(s, d_qnl);
}
} // namespace

TEST_CASE("homodyne at the QNL: signal 1, variance 1, SNR 1") {
    const BeamState s = state_at_qnl_displacement();
    const auto o = homodyne_expectation(s, LocalOscillator(1, 0.0));
    REQUIRE_THAT(o.signal_mean, WithinRel(1.0, 1e-12));
    REQUIRE(o.noise_variance == 1.0);
    REQUIRE_THAT(o.snr_power, WithinRel(1.0, 1e-12));
    REQUIRE_THAT(o.snr_db, WithinAbs(0.0, 1e-11));
}

TEST_CASE("displacement is invisible in the tilt quadrature") {
    const BeamState s = state_at_qnl_displacement();
    const auto o = homodyne_expectation(s, LocalOscillator(1, std::numbers::pi / 2.0));
    REQUIRE_THAT(o.signal_mean, WithinAbs(0.0, 1e-15));
}

TEST_CASE("vacuum noise gives variance 1 at every LO phase") {
    const BeamState s = state_at_qnl_displacement();
    for (int k = 0; k < 16; ++k) {
        const double phi = 2.0 * std::numbers::pi * k / 16.0;
        REQUIRE(homodyne_expectation(s, LocalOscillator(1, phi)).noise_variance == 1.0);
    }
}

TEST_CASE("noise_variance_at interpolates the squeezing ellipse") {
    const QuadratureNoise nz{db_to_linear(-2.0), db_to_linear(8.0), 0.0};

    REQUIRE_THAT(noise_variance_at(nz, 0.0), WithinRel(0.63095734448019325, 1e-12));
    REQUIRE_THAT(noise_variance_at(nz, std::numbers::pi / 2.0),
                 WithinRel(6.3095734448019325, 1e-12));
    REQUIRE_THAT(noise_variance_at({1.0, 1.0, 0.0}, 1.234), WithinRel(1.0, 1e-15));

    SECTION("V(angle) = v_minus, V(angle + pi/2) = v_plus, pi-periodic") {
        const QuadratureNoise rot{0.4, 3.0, 0.7};
        REQUIRE_THAT(noise_variance_at(rot, 0.7), WithinRel(0.4, 1e-12));
        REQUIRE_THAT(noise_variance_at(rot, 0.7 + std::numbers::pi / 2.0),
                     WithinRel(3.0, 1e-12));
        for (double phi : {0.0, 0.9, 2.2})
            REQUIRE_THAT(noise_variance_at(rot, phi + std::numbers::pi),
                         WithinRel(noise_variance_at(rot, phi), 1e-12));
    }

    SECTION("conjugate tradeoff: V(0) V(pi/2) >= 1, equality only on-axis") {
        REQUIRE_THAT(noise_variance_at(nz, 0.0) * noise_variance_at(nz, std::numbers::pi / 2.0),
                     WithinRel(3.9810717055349722, 1e-12));
        for (double angle : {0.0, std::numbers::pi / 2.0}) {
            const QuadratureNoise min_unc{0.5, 2.0, angle};
            REQUIRE_THAT(noise_variance_at(min_unc, 0.0) *
                             noise_variance_at(min_unc, std::numbers::pi / 2.0),
                         WithinRel(1.0, 1e-12));
        }
        const QuadratureNoise tilted{0.5, 2.0, 0.3};
        REQUIRE(noise_variance_at(tilted, 0.0) *
                    noise_variance_at(tilted, std::numbers::pi / 2.0) >
                1.0 + 1e-3);
    }
}

TEST_CASE("homodyne signal rotates as A cos(phi - psi)") {
    BeamState s(9.105710047e9, kExperimentBasis);
    s = encode_displacement(s, 0.3e-9);
    s = encode_tilt(s, 0.7e-7);
    const complexd c = s.coefficient(1);
    const double amp = 2.0 * std::sqrt(s.n_photons) * std::abs(c);
    const double psi = std::arg(c);
    for (int k = 0; k < 24; ++k) {
        const double phi = 2.0 * std::numbers::pi * k / 24.0;
        const auto o = homodyne_expectation(s, LocalOscillator(1, phi));
        REQUIRE_THAT(o.signal_mean, WithinAbs(amp * std::cos(phi - psi), 1e-12 * amp));
    }
}

TEST_CASE("squeezing helps displacement, anti-squeezing hurts tilt") {
    BeamState s(9.105710047e9, kExperimentBasis);
    s = encode_displacement(s, 0.4e-9);
    s = encode_tilt(s, 1e-7);

    double last_snr0 = 0.0;
    bool first = true;
    for (double v_minus_db : {0.0, -1.0, -2.0, -4.0}) {
        const BeamState sq =
            set_noise_mode_squeezing(s, 1, v_minus_db, -v_minus_db + 1.0, 0.0);
        const double snr0 = homodyne_expectation(sq, LocalOscillator(1, 0.0)).snr_power;
        if (!first) REQUIRE(snr0 > last_snr0);
        last_snr0 = snr0;
        first = false;
    }

    double last_snr90 = 0.0;
    first = true;
    for (double v_plus_db : {0.0, 2.0, 5.0, 8.0}) {
        const BeamState sq = set_noise_mode_squeezing(s, 1, -v_plus_db / 2.0, v_plus_db, 0.0);
        const double snr90 =
            homodyne_expectation(sq, LocalOscillator(1, std::numbers::pi / 2.0)).snr_power;
        if (!first) REQUIRE(snr90 < last_snr90);
        last_snr90 = snr90;
        first = false;
    }
}

TEST_CASE("split detector: sqrt(2/pi) of the ideal homodyne amplitude") {
    const BeamState s = state_at_qnl_displacement();
    const auto split = split_detector_expectation(s);
    const auto homodyne = homodyne_expectation(s, LocalOscillator(1, 0.0));

    REQUIRE_THAT(split.snr_power, WithinRel(2.0 / std::numbers::pi, 1e-12));
    const double amplitude_ratio = split.signal_mean / homodyne.signal_mean;
    REQUIRE_THAT(amplitude_ratio, WithinRel(0.79788456080286536, 1e-12));
    REQUIRE_THAT(1.0 / amplitude_ratio, WithinAbs(1.2533141373155003, 1e-12));
    REQUIRE(split.noise_variance == 1.0);

    SECTION("zero signal reads zero") {
        const BeamState empty(1e9, kExperimentBasis);
        REQUIRE(split_detector_expectation(empty).signal_mean == 0.0);
    }

    SECTION("pure tilt is invisible to the split detector") {
        BeamState tilted(9.105710047e9, kExperimentBasis);
        tilted = encode_tilt(tilted, 1e-7);
        REQUIRE(split_detector_expectation(tilted).signal_mean == 0.0);
        REQUIRE(homodyne_expectation(tilted, LocalOscillator(1, std::numbers::pi / 2.0))
                    .signal_mean > 0.0);
    }

    SECTION("squeezed illumination is outside the model") {
        const BeamState sq = set_noise_mode_squeezing(state_at_qnl_displacement(), 1,
                                                      -2.0, 8.0, 0.0);
        REQUIRE_THROWS_AS(split_detector_expectation(sq), std::invalid_argument);
    }
}

TEST_CASE("visibility_to_efficiency squares the fringe visibility") {
    REQUIRE_THAT(visibility_to_efficiency(0.97), WithinRel(0.9409, 1e-12));
    REQUIRE(visibility_to_efficiency(1.0) == 1.0);
    REQUIRE(visibility_to_efficiency(0.0) == 0.0);
    REQUIRE_THROWS_AS(visibility_to_efficiency(-0.1), std::invalid_argument);
    REQUIRE_THROWS_AS(visibility_to_efficiency(1.01), std::invalid_argument);
}

TEST_CASE("mode mismatch blends signal and noise with vacuum") {
    const BeamState s = state_at_qnl_displacement();
    const double eta = visibility_to_efficiency(0.97);

    const auto ideal = homodyne_expectation(s, LocalOscillator(1, 0.0));
    const auto matched = homodyne_expectation(s, LocalOscillator(1, 0.0, eta));
    REQUIRE_THAT(matched.signal_mean, WithinRel(0.97 * ideal.signal_mean, 1e-12));
    REQUIRE(matched.noise_variance == 1.0); // vacuum blends to vacuum

    const BeamState sq = set_noise_mode_squeezing(s, 1, -2.0, 8.0, 0.0);
    const auto sq_matched = homodyne_expectation(sq, LocalOscillator(1, 0.0, eta));
    REQUIRE_THAT(sq_matched.noise_variance,
                 WithinRel(1.0 + eta * (db_to_linear(-2.0) - 1.0), 1e-12));
}

TEST_CASE("homodyne on an absent mode assumes vacuum") {
    const BeamState s(1e9, kExperimentBasis);
    const auto o = homodyne_expectation(s, LocalOscillator(3, 0.4));
    REQUIRE(o.signal_mean == 0.0);
    REQUIRE(o.noise_variance == 1.0);
}

TEST_CASE("MeasurementOutcome and LocalOscillator invariants") {
    const auto o = MeasurementOutcome::from(2.0, 4.0);
    REQUIRE(o.snr_power == 1.0);
    REQUIRE_THAT(o.snr_db, WithinAbs(0.0, 1e-12));
    REQUIRE_THROWS_AS(MeasurementOutcome::from(1.0, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(MeasurementOutcome::from(1.0, -1.0), std::invalid_argument);

    const LocalOscillator lo(1, 2.0 * std::numbers::pi + 0.3);
    REQUIRE_THAT(lo.phase, WithinAbs(0.3, 1e-12));
    const LocalOscillator lo_neg(1, -0.5);
    REQUIRE_THAT(lo_neg.phase, WithinAbs(2.0 * std::numbers::pi - 0.5, 1e-12));
    REQUIRE_THROWS_AS(LocalOscillator(1, 0.0, 1.2), std::invalid_argument);
    REQUIRE_THROWS_AS(LocalOscillator(-1, 0.0), std::invalid_argument);
}
