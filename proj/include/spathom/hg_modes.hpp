// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace spathom {

using complexd = std::complex<double>;

/// Default Gauss-Hermite node count. 128 nodes integrate mode products exactly
/// (polynomial degree up to 255 against the Gaussian weight), so overlaps of basis
/// modes are accurate to rounding and bit-reproducible run to run.
inline constexpr int kDefaultQuadratureNodes = 128;

/// Tolerance absorbed by truncation bookkeeping (decompose never gains norm
/// beyond this).
inline constexpr double kQuadratureTolerance = 1e-9;

/// Hermite-Gauss frame. `waist` is the FIELD 1/e half-width: the fundamental mode
/// is u0(x) = (2/(pi w^2))^(1/4) exp(-x^2/w^2), so intensity falls as exp(-2x^2/w^2).
/// This is the convention that makes a displacement d appear as exactly d/w on the
/// first-order mode coefficient.
struct Basis {
    double waist = 0.0;      // meters
    double wavelength = 0.0; // meters
    int max_order = 8;       // highest retained mode index

    void validate() const {
        if (!(waist > 0.0) || !std::isfinite(waist))
            throw std::invalid_argument("Basis: waist must be positive and finite");
        if (!(wavelength > 0.0) || !std::isfinite(wavelength))
            throw std::invalid_argument("Basis: wavelength must be positive and finite");
        if (max_order < 1)
            throw std::invalid_argument("Basis: max_order must be >= 1");
    }
};

/// One transverse field profile sampled on a grid, together with the quadrature
/// weights that turn pointwise products into integrals over x. Amplitudes are in
/// m^(-1/2): a normalized profile has sum(w_i |a_i|^2) = 1.
struct SampledProfile {
    std::vector<double> x;               // strictly increasing, meters
    std::vector<complexd> amplitude;     // field amplitude at x
    std::vector<double> weight;          // quadrature weights for integral dx

    std::size_t size() const { return x.size(); }

    void validate() const {
        if (x.size() < 2 || x.size() != amplitude.size() || x.size() != weight.size())
            throw std::invalid_argument("SampledProfile: inconsistent or too-short arrays");
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!std::isfinite(x[i]) || !std::isfinite(amplitude[i].real()) ||
                !std::isfinite(amplitude[i].imag()) || !std::isfinite(weight[i]))
                throw std::invalid_argument("SampledProfile: non-finite entry at index " +
                                            std::to_string(i));
            if (i > 0 && !(x[i] > x[i - 1]))
                throw std::invalid_argument("SampledProfile: grid not strictly increasing at index " +
                                            std::to_string(i));
        }
    }
};

/// Coefficients of a profile in the HG basis: c[n] for n = 0..basis.max_order.
/// residual_power is the quadrature norm^2 of what truncation left behind,
/// measured on the residual profile itself (not inferred from 1 - sum|c|^2).
struct ModeCoefficients {
    std::vector<complexd> c;
    Basis basis;
    double residual_power = 0.0;

    double coefficient_power() const {
        double s = 0.0;
        for (const auto& cn : c) s += std::norm(cn);
        return s;
    }
};

enum class BeamParameter { displacement, tilt };

namespace detail {

struct GaussHermiteRule {
    std::vector<double> node;   // dimensionless xi, ascending
    std::vector<double> weight; // for integral f(xi) exp(-xi^2) dxi
};

/// Golub-Welsch on the Hermite Jacobi matrix. Weights follow from the first
/// eigenvector components; nodes come out ascending.
inline GaussHermiteRule compute_gauss_hermite(int n) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = std::sqrt(k / 2.0);
        jacobi(k, k - 1) = b;
        jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("gauss_hermite_rule: eigensolver failed");
    GaussHermiteRule rule;
    rule.node.resize(n);
    rule.weight.resize(n);
    const double sqrt_pi = std::sqrt(std::numbers::pi);
    for (int i = 0; i < n; ++i) {
        rule.node[i] = solver.eigenvalues()(i);
        const double v0 = solver.eigenvectors()(0, i);
        rule.weight[i] = sqrt_pi * v0 * v0;
    }
    return rule;
}

inline const GaussHermiteRule& gauss_hermite_rule(int n) {
    // Nodes beyond ~300 would overflow the exp(xi^2) weight correction.
    if (n < 4 || n > 300)
        throw std::invalid_argument("gauss_hermite_rule: node count must be in [4, 300]");
    static std::map<int, GaussHermiteRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gauss_hermite(n)).first;
    return it->second;
}

} // namespace detail

/// Value of the n-th Hermite-Gauss mode at position x, L2-normalized:
/// integral u_n^2 dx = 1. Evaluated through the orthonormal oscillator
/// recurrence, numerically stable for all supported orders.
inline double hg_amplitude(int n, double x, const Basis& basis) {
    basis.validate();
    if (n < 0) throw std::invalid_argument("hg_amplitude: mode index must be >= 0");
    if (n > basis.max_order)
        throw std::invalid_argument("hg_amplitude: mode index exceeds basis max_order");
    if (!std::isfinite(x)) throw std::invalid_argument("hg_amplitude: non-finite position");

    const double w = basis.waist;
    const double xi = std::numbers::sqrt2 * x / w;
    const double scale = std::sqrt(std::numbers::sqrt2 / w);
    double prev = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * xi * xi);
    if (n == 0) return scale * prev;
    double cur = std::numbers::sqrt2 * xi * prev;
    for (int k = 2; k <= n; ++k) {
        const double next = std::sqrt(2.0 / k) * xi * cur - std::sqrt((k - 1.0) / k) * prev;
        prev = cur;
        cur = next;
    }
    return scale * cur;
}

/// Profile sampled at Gauss-Hermite nodes scaled to the basis waist, carrying the
/// matching quadrature weights. This is the canonical grid for mode algebra.
template <typename F>
SampledProfile sample_gauss_hermite(const Basis& basis, F&& field,
                                    int n_nodes = kDefaultQuadratureNodes) {
    basis.validate();
    const auto& rule = detail::gauss_hermite_rule(n_nodes);
    const double s = basis.waist / std::numbers::sqrt2; // x = s * xi
    SampledProfile p;
    p.x.resize(rule.node.size());
    p.amplitude.resize(rule.node.size());
    p.weight.resize(rule.node.size());
    for (std::size_t i = 0; i < rule.node.size(); ++i) {
        const double xi = rule.node[i];
        p.x[i] = s * xi;
        p.weight[i] = s * rule.weight[i] * std::exp(xi * xi);
        p.amplitude[i] = complexd(field(p.x[i]));
    }
    p.validate();
    return p;
}

/// The n-th basis mode as a profile on the canonical quadrature grid.
inline SampledProfile mode_profile(int n, const Basis& basis,
                                   int n_nodes = kDefaultQuadratureNodes) {
    return sample_gauss_hermite(basis, [&](double x) { return hg_amplitude(n, x, basis); },
                                n_nodes);
}

/// Attach quadrature weights to an externally supplied grid: composite Simpson
/// when the grid is uniform with an odd point count, trapezoid otherwise.
inline std::vector<double> quadrature_weights_for_grid(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("quadrature_weights_for_grid: need >= 2 points");
    const double h0 = x[1] - x[0];
    bool uniform = true;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (std::abs((x[i + 1] - x[i]) - h0) > 1e-9 * std::abs(h0)) {
            uniform = false;
            break;
        }
    }
    std::vector<double> w(n, 0.0);
    if (uniform && n % 2 == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            const bool edge = (i == 0 || i + 1 == n);
            w[i] = h0 / 3.0 * (edge ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0));
        }
    } else {
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double h = x[i + 1] - x[i];
            w[i] += 0.5 * h;
            w[i + 1] += 0.5 * h;
        }
    }
    return w;
}

inline std::vector<double> uniform_grid(double x_min, double x_max, std::size_t n_points) {
    if (!(x_max > x_min) || n_points < 2)
        throw std::invalid_argument("uniform_grid: need x_max > x_min and >= 2 points");
    std::vector<double> x(n_points);
    for (std::size_t i = 0; i < n_points; ++i)
        x[i] = x_min + (x_max - x_min) * static_cast<double>(i) / (n_points - 1);
    return x;
}

/// Profile from explicit samples; weights derived from the grid.
inline SampledProfile make_profile(std::vector<double> x, std::vector<complexd> amplitude) {
    SampledProfile p;
    p.weight = quadrature_weights_for_grid(x);
    p.x = std::move(x);
    p.amplitude = std::move(amplitude);
    p.validate();
    return p;
}

template <typename F>
SampledProfile sample_profile(const std::vector<double>& x, F&& field) {
    std::vector<complexd> a(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) a[i] = complexd(field(x[i]));
    return make_profile(x, std::move(a));
}

namespace detail {
inline bool same_grid(const SampledProfile& f, const SampledProfile& g) {
    if (f.size() != g.size()) return false;
    const double span = f.x.back() - f.x.front();
    for (std::size_t i = 0; i < f.size(); ++i)
        if (std::abs(f.x[i] - g.x[i]) > 1e-12 * span) return false;
    return true;
}
} // namespace detail

/// Resampling rule for grid mismatches: linear interpolation onto a target grid,
/// zero outside the source support. Quadrature weights are rebuilt for the new grid.
inline SampledProfile resampled(const SampledProfile& f, const std::vector<double>& x_new) {
    f.validate();
    std::vector<complexd> a(x_new.size());
    for (std::size_t i = 0; i < x_new.size(); ++i) {
        const double xi = x_new[i];
        if (xi <= f.x.front() || xi >= f.x.back()) {
            a[i] = (xi == f.x.front()) ? f.amplitude.front()
                 : (xi == f.x.back()) ? f.amplitude.back()
                                      : complexd(0.0);
            continue;
        }
        const auto hi = std::upper_bound(f.x.begin(), f.x.end(), xi);
        const std::size_t j = static_cast<std::size_t>(hi - f.x.begin());
        const double t = (xi - f.x[j - 1]) / (f.x[j] - f.x[j - 1]);
        a[i] = (1.0 - t) * f.amplitude[j - 1] + t * f.amplitude[j];
    }
    return make_profile(x_new, std::move(a));
}

/// Inner product integral conj(f) g dx on the common grid. Grids must match;
/// apply `resampled` first when they do not.
inline complexd overlap(const SampledProfile& f, const SampledProfile& g) {
    f.validate();
    g.validate();
    if (!detail::same_grid(f, g))
        throw std::invalid_argument(
            "overlap: profiles are sampled on different grids; resample one onto the other");
    complexd acc(0.0);
    for (std::size_t i = 0; i < f.size(); ++i)
        acc += f.weight[i] * std::conj(f.amplitude[i]) * g.amplitude[i];
    return acc;
}

inline double profile_norm(const SampledProfile& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += f.weight[i] * std::norm(f.amplitude[i]);
    return std::sqrt(std::max(acc, 0.0));
}

/// Project a normalized profile onto the basis modes: c_n = <u_n, profile> for
/// n = 0..max_order, evaluated on the profile's own grid. The input must be
/// normalized to 1 within 1e-6 under that grid's quadrature.
inline ModeCoefficients decompose(const SampledProfile& profile, const Basis& basis) {
    basis.validate();
    profile.validate();
    const double nrm = profile_norm(profile);
    if (std::abs(nrm - 1.0) > 1e-6)
        throw std::invalid_argument("decompose: profile norm is " + std::to_string(nrm) +
                                    ", expected 1 within 1e-6");

    ModeCoefficients mc;
    mc.basis = basis;
    mc.c.resize(static_cast<std::size_t>(basis.max_order) + 1);

    std::vector<complexd> residual = profile.amplitude;
    for (int n = 0; n <= basis.max_order; ++n) {
        complexd cn(0.0);
        std::vector<double> un(profile.size());
        for (std::size_t i = 0; i < profile.size(); ++i) {
            un[i] = hg_amplitude(n, profile.x[i], basis);
            cn += profile.weight[i] * un[i] * profile.amplitude[i];
        }
        mc.c[static_cast<std::size_t>(n)] = cn;
        for (std::size_t i = 0; i < profile.size(); ++i) residual[i] -= cn * un[i];
    }
    double res = 0.0;
    for (std::size_t i = 0; i < profile.size(); ++i)
        res += profile.weight[i] * std::norm(residual[i]);
    mc.residual_power = std::max(res, 0.0);

    // truncation may lose norm, never gain it (beyond the grid's own norm)
    if (mc.coefficient_power() > nrm * nrm + kQuadratureTolerance)
        throw std::runtime_error("decompose: coefficient power exceeds the profile norm");
    return mc;
}

/// Sensitivity profile of the fundamental mode to one beam parameter:
///   displacement -> du00/dd = u1 / w            (real)
///   tilt         -> du00/dtheta = i (pi w / lambda) u1
/// Both are proportional to u1; the proportionality constant is what encodes the
/// d/w and pi*theta*w/lambda signal coefficients.
inline SampledProfile derivative_profile(BeamParameter parameter, const Basis& basis,
                                         int n_nodes = kDefaultQuadratureNodes) {
    basis.validate();
    const complexd scale = (parameter == BeamParameter::displacement)
                               ? complexd(1.0 / basis.waist, 0.0)
                               : complexd(0.0, std::numbers::pi * basis.waist / basis.wavelength);
    SampledProfile p = mode_profile(1, basis, n_nodes);
    for (auto& a : p.amplitude) a *= scale;
    return p;
}

} // namespace spathom
