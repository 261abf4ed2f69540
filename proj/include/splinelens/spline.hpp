#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "splinelens/net.hpp"

namespace splinelens {

/// Breakpoint / delta-slope / orientation view of one neuron.
/// beta = -b/w, mu = v*w, s = sign(w); s = +1 is active right of beta,
/// s = -1 active left of it.
struct BdsoNeuron {
    double beta = 0.0;
    double mu = 0.0;
    int s = +1;
};

struct BDSOParams {
    double b0 = 0.0;
    std::vector<BdsoNeuron> neurons;

    std::size_t width() const { return neurons.size(); }
};

/// Neurons with w = 0 carry no breakpoint; their constant output folds into b0.
struct FoldReport {
    std::size_t folded_count = 0;
    double folded_value = 0.0;
};

struct NnToBdsoResult {
    BDSOParams bdso;
    FoldReport fold;
};

inline NnToBdsoResult nn_to_bdso(const NetParams& net) {
    NnToBdsoResult out;
    out.bdso.b0 = net.b0;
    for (std::size_t i = 0; i < net.width(); ++i) {
        if (net.w[i] == 0.0) {
            const double c = net.v[i] * std::max(0.0, net.b[i]);
            out.bdso.b0 += c;
            out.fold.folded_count += 1;
            out.fold.folded_value += c;
            continue;
        }
        BdsoNeuron nrn;
        nrn.beta = -net.b[i] / net.w[i];
        nrn.mu = net.v[i] * net.w[i];
        nrn.s = (net.w[i] > 0.0) ? +1 : -1;
        out.bdso.neurons.push_back(nrn);
    }
    return out;
}

/// Inverse transform under the balanced convention |w| = |v| = sqrt(|mu|).
/// mu = 0 maps to (w = s, v = 0) so the breakpoint location survives.
inline NetParams bdso_to_nn(const BDSOParams& bdso) {
    NetParams net;
    net.b0 = bdso.b0;
    net.w.reserve(bdso.width());
    net.b.reserve(bdso.width());
    net.v.reserve(bdso.width());
    for (const auto& nrn : bdso.neurons) {
        double w, v;
        if (nrn.mu == 0.0) {
            w = static_cast<double>(nrn.s);
            v = 0.0;
        } else {
            const double r = std::sqrt(std::abs(nrn.mu));
            w = nrn.s * r;
            v = (nrn.mu > 0.0 ? 1.0 : -1.0) * nrn.s * r;
        }
        net.w.push_back(w);
        net.b.push_back(-nrn.beta * w);
        net.v.push_back(v);
    }
    return net;
}

/// Direct evaluation of b0 + sum_i mu_i (x - beta_i)_{s_i}.
inline double eval_bdso(const BDSOParams& bdso, double x) {
    double out = bdso.b0;
    for (const auto& nrn : bdso.neurons) {
        if (nrn.s > 0) {
            if (x > nrn.beta) out += nrn.mu * (x - nrn.beta);
        } else {
            if (x < nrn.beta) out += nrn.mu * (x - nrn.beta);
        }
    }
    return out;
}

/// Canonical piecewise-linear form: strictly increasing knots, one
/// (slope, intercept) per piece. Piece p covers [knot_{p-1}, knot_p)
/// with sentinels at +-infinity, and value slope*x + intercept.
struct PWLParams {
    std::vector<double> knots;
    std::vector<double> slopes;     // size knots.size() + 1
    std::vector<double> intercepts; // size knots.size() + 1

    std::size_t pieces() const { return slopes.size(); }

    static PWLParams constant(double c) {
        PWLParams p;
        p.slopes = {0.0};
        p.intercepts = {c};
        return p;
    }
};

inline std::size_t pwl_piece_index(const PWLParams& pwl, double x) {
    return static_cast<std::size_t>(
        std::upper_bound(pwl.knots.begin(), pwl.knots.end(), x) - pwl.knots.begin());
}

inline double eval_pwl(const PWLParams& pwl, double x) {
    const std::size_t p = pwl_piece_index(pwl, x);
    return pwl.slopes[p] * x + pwl.intercepts[p];
}

/// Max continuity gap across knots, relative to the value scale. Zero-knot
/// forms return 0.
inline double pwl_continuity_gap(const PWLParams& pwl) {
    double worst = 0.0;
    for (std::size_t k = 0; k < pwl.knots.size(); ++k) {
        const double left = pwl.slopes[k] * pwl.knots[k] + pwl.intercepts[k];
        const double right = pwl.slopes[k + 1] * pwl.knots[k] + pwl.intercepts[k + 1];
        const double scale = std::max({1.0, std::abs(left), std::abs(right)});
        worst = std::max(worst, std::abs(left - right) / scale);
    }
    return worst;
}

/// Collapse to the sorted-knot PWL form. Crossing breakpoint beta_q left to
/// right changes the slope by +mu_q when s_q = +1 and by -mu_q when s_q = -1;
/// duplicate breakpoints merge with their slope changes summed.
inline PWLParams bdso_to_pwl(const BDSOParams& bdso) {
    if (bdso.neurons.empty()) return PWLParams::constant(bdso.b0);

    std::vector<std::pair<double, double>> steps; // (beta, signed slope change)
    steps.reserve(bdso.width());
    double leftmost_slope = 0.0;
    for (const auto& nrn : bdso.neurons) {
        steps.emplace_back(nrn.beta, nrn.s > 0 ? nrn.mu : -nrn.mu);
        if (nrn.s < 0) leftmost_slope += nrn.mu; // left-facing neurons active at -inf
    }
    std::sort(steps.begin(), steps.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    PWLParams pwl;
    pwl.slopes.push_back(leftmost_slope);
    for (std::size_t q = 0; q < steps.size(); ++q) {
        double delta = steps[q].second;
        const double knot = steps[q].first;
        while (q + 1 < steps.size() && steps[q + 1].first == knot) {
            ++q;
            delta += steps[q].second;
        }
        pwl.knots.push_back(knot);
        pwl.slopes.push_back(pwl.slopes.back() + delta);
    }

    // Intercepts: anchor the first piece at the first knot, then march right
    // imposing continuity.
    pwl.intercepts.resize(pwl.slopes.size());
    const double v0 = eval_bdso(bdso, pwl.knots.front());
    pwl.intercepts[0] = v0 - pwl.slopes[0] * pwl.knots.front();
    for (std::size_t p = 1; p < pwl.pieces(); ++p) {
        const double knot = pwl.knots[p - 1];
        const double value = pwl.slopes[p - 1] * knot + pwl.intercepts[p - 1];
        pwl.intercepts[p] = value - pwl.slopes[p] * knot;
    }
    return pwl;
}

/// Roughness sum mu_i^2 (the discrete integral of f''^2).
inline double roughness(const BDSOParams& bdso) {
    double acc = 0.0;
    for (const auto& nrn : bdso.neurons) acc += nrn.mu * nrn.mu;
    return acc;
}

/// Same restricted to breakpoints inside [lo, hi].
inline double roughness_window(const BDSOParams& bdso, double lo, double hi) {
    if (lo > hi) throw InvalidWindow("roughness_window: lo > hi");
    double acc = 0.0;
    for (const auto& nrn : bdso.neurons)
        if (nrn.beta >= lo && nrn.beta <= hi) acc += nrn.mu * nrn.mu;
    return acc;
}

/// Data partition induced by the sorted distinct breakpoints. Piece p is the
/// half-open interval [boundary_{p-1}, boundary_p); a datapoint is lonely iff
/// it is alone in its piece.
struct PartitionReport {
    std::vector<double> boundaries;               // sorted distinct breakpoints
    std::vector<std::vector<std::size_t>> pieces; // datapoint indices per piece
    std::vector<std::uint8_t> lonely;             // per datapoint
    bool all_lonely = true;

    double lonely_fraction() const {
        if (lonely.empty()) return 0.0;
        double c = 0.0;
        for (auto f : lonely) c += f;
        return c / static_cast<double>(lonely.size());
    }
};

inline PartitionReport partition_data(const BDSOParams& bdso, const Dataset& data) {
    PartitionReport rep;
    rep.boundaries.reserve(bdso.width());
    for (const auto& nrn : bdso.neurons) rep.boundaries.push_back(nrn.beta);
    std::sort(rep.boundaries.begin(), rep.boundaries.end());
    rep.boundaries.erase(std::unique(rep.boundaries.begin(), rep.boundaries.end()),
                         rep.boundaries.end());

    rep.pieces.assign(rep.boundaries.size() + 1, {});
    for (std::size_t n = 0; n < data.size(); ++n) {
        const std::size_t p = static_cast<std::size_t>(
            std::upper_bound(rep.boundaries.begin(), rep.boundaries.end(), data.x[n]) -
            rep.boundaries.begin());
        rep.pieces[p].push_back(n);
    }

    rep.lonely.assign(data.size(), 0);
    for (const auto& piece : rep.pieces) {
        if (piece.size() == 1) rep.lonely[piece.front()] = 1;
        if (piece.size() > 1) rep.all_lonely = false;
    }
    return rep;
}

/// Number of lonely partitions of N datapoints into the H+1 pieces cut by H
/// breakpoints: C(H+1, N). Exact big-integer arithmetic.
inline boost::multiprecision::cpp_int lonely_partition_count(long long H, long long N) {
    using boost::multiprecision::cpp_int;
    if (H < 0 || N < 0) throw Error("lonely_partition_count: negative argument");
    const long long n = H + 1;
    if (N > n) return 0;
    const long long k = std::min(N, n - N);
    cpp_int r = 1;
    for (long long i = 1; i <= k; ++i) {
        r *= (n - k + i);
        r /= i; // exact at every step for binomial products
    }
    return r;
}

/// Exact network realization of a CPWL function to the right of an anchor
/// placed left of every knot: a bias, one right-facing neuron carrying the
/// base slope at the anchor, and one right-facing neuron per knot carrying
/// that knot's slope change. Weights use the balanced convention.
inline NetParams cpwl_to_nn_exact(const PWLParams& pwl, double anchor) {
    if (!pwl.knots.empty() && anchor >= pwl.knots.front())
        throw InvalidAnchor("cpwl_to_nn_exact: anchor must lie left of the first knot");

    BDSOParams bdso;
    bdso.b0 = pwl.slopes[0] * anchor + pwl.intercepts[0];
    if (pwl.slopes[0] != 0.0)
        bdso.neurons.push_back({anchor, pwl.slopes[0], +1});
    for (std::size_t k = 0; k < pwl.knots.size(); ++k) {
        const double delta = pwl.slopes[k + 1] - pwl.slopes[k];
        if (delta != 0.0)
            bdso.neurons.push_back({pwl.knots[k], delta, +1});
    }
    return bdso_to_nn(bdso);
}

} // namespace splinelens
