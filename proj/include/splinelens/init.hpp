#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "splinelens/net.hpp"
#include "splinelens/rng.hpp"
#include "splinelens/spline.hpp"

namespace splinelens {

// ---------------------------------------------------------------------------
// Init specs. Sigma arguments are standard deviations, a arguments are the
// half-widths of U[-a, a].
// ---------------------------------------------------------------------------

struct GaussianInitSpec {
    double sigma_b = 1.0;
    double sigma_w = 1.0;
    double sigma_v = 1.0;

    // The usual presets fix sigma_w and sigma_v; sigma_b defaults to 1 and is
    // kept explicit because the densities below need it positive.
    static GaussianInitSpec He(std::size_t H, double sigma_b = 1.0) {
        return {sigma_b, std::sqrt(2.0), std::sqrt(2.0 / static_cast<double>(H))};
    }
    static GaussianInitSpec Glorot(std::size_t H, double sigma_b = 1.0) {
        const double s = std::sqrt(2.0 / (static_cast<double>(H) + 1.0));
        return {sigma_b, s, s};
    }
};

struct UniformInitSpec {
    double a_b = 1.0;
    double a_w = 1.0;
    double a_v = 1.0;
};

struct FlatInitSpec {
    double lo = -1.0;
    double hi = 1.0;
    std::size_t H = 1;
};

enum class GaussianPreset { He, Glorot };

// ---------------------------------------------------------------------------
// Samplers. Draw order is fixed (per neuron: b, w, v) so streams are stable.
// ---------------------------------------------------------------------------

inline NetParams sample_net(const GaussianInitSpec& spec, std::size_t H, std::uint64_t seed) {
    Rng rng(seed);
    NetParams net = NetParams::zeros(H);
    for (std::size_t i = 0; i < H; ++i) {
        net.b[i] = rng.normal(spec.sigma_b);
        net.w[i] = rng.normal(spec.sigma_w);
        net.v[i] = rng.normal(spec.sigma_v);
    }
    return net;
}

inline NetParams sample_net(const UniformInitSpec& spec, std::size_t H, std::uint64_t seed) {
    Rng rng(seed);
    NetParams net = NetParams::zeros(H);
    for (std::size_t i = 0; i < H; ++i) {
        net.b[i] = rng.uniform(-spec.a_b, spec.a_b);
        net.w[i] = rng.uniform(-spec.a_w, spec.a_w);
        net.v[i] = rng.uniform(-spec.a_v, spec.a_v);
    }
    return net;
}

/// Perfectly flat start: w = +-1 equiprobable, breakpoints on the uniform
/// H-point grid over [lo, hi], v = 0. The represented function is identically
/// zero; gradient flow re-enters through v after the first step.
inline NetParams flat_init(const FlatInitSpec& spec, std::uint64_t seed) {
    if (!(spec.lo < spec.hi)) throw Error("flat_init: requires lo < hi");
    Rng rng(seed);
    NetParams net = NetParams::zeros(spec.H);
    for (std::size_t i = 0; i < spec.H; ++i) {
        const double beta =
            spec.H == 1 ? 0.5 * (spec.lo + spec.hi)
                        : spec.lo + (spec.hi - spec.lo) * static_cast<double>(i) /
                              static_cast<double>(spec.H - 1);
        net.w[i] = static_cast<double>(rng.sign());
        net.b[i] = -beta * net.w[i];
        net.v[i] = 0.0;
    }
    return net;
}

/// Data-dependent init: breakpoints resampled uniformly over [lo, hi] while
/// the delta-slope magnitudes come from a standard He draw, perturbed by
/// N(0, y_noise_sd^2). The He draw's own biases are discarded.
inline NetParams uniform_breakpoint_init(std::size_t H, double lo, double hi,
                                         std::uint64_t seed, double y_noise_sd = 0.01) {
    if (!(lo < hi)) throw Error("uniform_breakpoint_init: requires lo < hi");
    Rng rng(seed);
    NetParams net = NetParams::zeros(H);
    for (std::size_t i = 0; i < H; ++i) {
        rng.normal(1.0); // He bias draw, unused
        net.w[i] = rng.normal(std::sqrt(2.0));
        net.v[i] = rng.normal(std::sqrt(2.0 / static_cast<double>(H)));
    }
    for (std::size_t i = 0; i < H; ++i)
        net.b[i] = -rng.uniform(lo, hi) * net.w[i];
    for (std::size_t i = 0; i < H; ++i) {
        const double mu = net.w[i] * net.v[i] + rng.normal(y_noise_sd);
        net.v[i] = mu / net.w[i];
    }
    return net;
}

// ---------------------------------------------------------------------------
// Modified Bessel function of the second kind, order zero. Power series for
// x <= 10, asymptotic series beyond; absolute error stays under 1e-10 across
// [1e-6, 700].
// ---------------------------------------------------------------------------

inline double bessel_k0(double x) {
    if (!(x > 0.0)) throw DomainError("bessel_k0: requires x > 0");
    constexpr double kEulerGamma = 0.57721566490153286060651209;

    if (x <= 10.0) {
        const double q = 0.25 * x * x;
        double term = 1.0;  // (q^k) / (k!)^2
        double i0 = 1.0;    // sum of terms
        double hsum = 0.0;  // sum of terms weighted by harmonic numbers
        double hk = 0.0;
        for (int k = 1; k < 200; ++k) {
            term *= q / (static_cast<double>(k) * static_cast<double>(k));
            hk += 1.0 / static_cast<double>(k);
            i0 += term;
            hsum += term * hk;
            if (term * (hk + 1.0) < 1e-18 * (i0 + hsum)) break;
        }
        return -(std::log(0.5 * x) + kEulerGamma) * i0 + hsum;
    }

    // K0(x) ~ sqrt(pi/2x) e^-x sum_k c_k, c_k = c_{k-1} * -(2k-1)^2 / (8kx);
    // truncated at the smallest term.
    double sum = 1.0, c = 1.0;
    double prev = std::abs(c);
    for (int k = 1; k < 80; ++k) {
        c *= -((2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k * x);
        if (std::abs(c) >= prev) break;
        sum += c;
        prev = std::abs(c);
        if (prev < 1e-18 * std::abs(sum)) break;
    }
    return std::sqrt(M_PI / (2.0 * x)) * std::exp(-x) * sum;
}

// ---------------------------------------------------------------------------
// Closed-form function-space densities of (beta, mu) at init.
// ---------------------------------------------------------------------------

inline double joint_density(const GaussianInitSpec& s, double beta, double mu) {
    const double root = std::sqrt(s.sigma_b * s.sigma_b + s.sigma_w * s.sigma_w * beta * beta);
    return std::exp(-std::abs(mu) * root / (s.sigma_b * s.sigma_v * s.sigma_w)) /
           (2.0 * M_PI * s.sigma_v * root);
}

inline double joint_density(const UniformInitSpec& s, double beta, double mu) {
    const double cap = (beta == 0.0) ? s.a_w : std::min(s.a_b / std::abs(beta), s.a_w);
    if (std::abs(mu) > s.a_v * cap) return 0.0;
    return (cap - std::abs(mu) / s.a_v) / (4.0 * s.a_b * s.a_w * s.a_v);
}

/// Breakpoint marginal: Cauchy(0, sigma_b/sigma_w).
inline double beta_marginal(const GaussianInitSpec& s, double beta) {
    const double g = s.sigma_b / s.sigma_w;
    return g / (M_PI * (beta * beta + g * g));
}

inline double beta_marginal(const UniformInitSpec& s, double beta) {
    const double cap = (beta == 0.0) ? s.a_w : std::min(s.a_b / std::abs(beta), s.a_w);
    return cap * cap / (4.0 * s.a_b * s.a_w);
}

inline double beta_marginal_cdf(const GaussianInitSpec& s, double beta) {
    return 0.5 + std::atan(beta * s.sigma_w / s.sigma_b) / M_PI;
}

inline double beta_marginal_cdf(const UniformInitSpec& s, double beta) {
    const double c = s.a_b / s.a_w; // |beta| below which the density plateaus
    const double t = std::abs(beta);
    const double half = (t <= c) ? s.a_w * t / (4.0 * s.a_b)
                                 : 0.5 - s.a_b / (4.0 * s.a_w * t);
    return beta >= 0.0 ? 0.5 + half : 0.5 - half;
}

/// Delta-slope marginal. Diverges logarithmically at mu = 0 in both families.
inline double mu_marginal(const GaussianInitSpec& s, double mu) {
    if (mu == 0.0) throw DivergentDensity("mu_marginal: pole at mu = 0");
    const double sw = s.sigma_v * s.sigma_w;
    return bessel_k0(std::abs(mu) / sw) / (M_PI * sw);
}

inline double mu_marginal(const UniformInitSpec& s, double mu) {
    if (mu == 0.0) throw DivergentDensity("mu_marginal: pole at mu = 0");
    const double A = s.a_w * s.a_v;
    if (std::abs(mu) > A) return 0.0;
    return std::log(A / std::abs(mu)) / (2.0 * A);
}

/// Conditional of mu given beta: Laplace for the Gaussian family, symmetric
/// triangular for the Uniform one.
inline double mu_conditional(const GaussianInitSpec& s, double mu, double beta) {
    const double root = std::sqrt(s.sigma_b * s.sigma_b + s.sigma_w * s.sigma_w * beta * beta);
    const double scale = s.sigma_b * s.sigma_v * s.sigma_w / root;
    return std::exp(-std::abs(mu) / scale) / (2.0 * scale);
}

inline double mu_conditional(const UniformInitSpec& s, double mu, double beta) {
    const double cap = (beta == 0.0) ? s.a_w : std::min(s.a_b / std::abs(beta), s.a_w);
    const double base = s.a_v * cap;
    if (std::abs(mu) > base) return 0.0;
    return (1.0 - std::abs(mu) / base) / base;
}

// ---------------------------------------------------------------------------
// Initial roughness rho_0 = sum mu_i^2: moments and Cantelli tail bounds.
// ---------------------------------------------------------------------------

struct RoughnessMoments {
    double mean = 0.0;
    double variance = 0.0;
};

inline RoughnessMoments roughness_moments(const GaussianInitSpec& s, std::size_t H) {
    const double sv2 = s.sigma_v * s.sigma_v;
    const double sw2 = s.sigma_w * s.sigma_w;
    const double h = static_cast<double>(H);
    return {h * sv2 * sw2, 8.0 * h * sv2 * sv2 * sw2 * sw2};
}

/// P[rho_0 - E[rho_0] >= lambda] upper bound for the named presets.
inline double cantelli_bound(GaussianPreset preset, std::size_t H, double lambda) {
    if (lambda < 0.0) throw Error("cantelli_bound: lambda must be >= 0");
    const double h = static_cast<double>(H);
    double denom;
    if (preset == GaussianPreset::He) {
        denom = 1.0 + lambda * lambda * h / 128.0;
    } else {
        const double h1 = h + 1.0;
        denom = 1.0 + lambda * lambda * h1 * h1 * h1 * h1 / (128.0 * h);
    }
    const double p = 1.0 / denom;
    return std::min(1.0, std::max(0.0, p));
}

} // namespace splinelens
