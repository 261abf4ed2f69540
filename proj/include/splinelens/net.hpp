#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace splinelens {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidScale : Error { using Error::Error; };
struct NonFiniteLoss : Error { using Error::Error; };
struct NonFiniteState : Error { using Error::Error; };
struct InvalidWindow : Error { using Error::Error; };
struct InvalidAnchor : Error { using Error::Error; };
struct BoundaryBreakpoint : Error { using Error::Error; };
struct NotSymmetric : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct DivergentDensity : Error { using Error::Error; };
struct NotInterior : Error { using Error::Error; };
struct ZeroInputWeight : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct DuplicateX : Error { using Error::Error; };
struct Infeasible : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

/// Shallow univariate ReLU net: f(x) = b0 + sum_i v[i] * relu(w[i]*x + b[i]).
/// Width 0 (a bare constant) is permitted; every operation degrades gracefully.
struct NetParams {
    double b0 = 0.0;
    std::vector<double> w; // input weights
    std::vector<double> b; // hidden biases
    std::vector<double> v; // output weights

    std::size_t width() const { return w.size(); }

    bool finite() const {
        if (!std::isfinite(b0)) return false;
        auto ok = [](const std::vector<double>& a) {
            return std::all_of(a.begin(), a.end(), [](double t) { return std::isfinite(t); });
        };
        return ok(w) && ok(b) && ok(v) && w.size() == b.size() && w.size() == v.size();
    }

    static NetParams zeros(std::size_t width) {
        NetParams net;
        net.w.assign(width, 0.0);
        net.b.assign(width, 0.0);
        net.v.assign(width, 0.0);
        return net;
    }
};

/// Training pairs sorted ascending by x. Ties in x are allowed here;
/// interpolating baselines reject them at their own boundary.
struct Dataset {
    std::vector<double> x;
    std::vector<double> y;

    std::size_t size() const { return x.size(); }
    double x_min() const { return x.front(); }
    double x_max() const { return x.back(); }
    double x_range() const { return x.back() - x.front(); }

    static Dataset from_points(std::vector<std::pair<double, double>> pts) {
        if (pts.empty()) throw EmptyInput("Dataset needs at least one point");
        std::stable_sort(pts.begin(), pts.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        Dataset d;
        d.x.reserve(pts.size());
        d.y.reserve(pts.size());
        for (const auto& [px, py] : pts) {
            if (!std::isfinite(px) || !std::isfinite(py))
                throw Error("Dataset point is not finite");
            d.x.push_back(px);
            d.y.push_back(py);
        }
        return d;
    }
};

struct NetGradient {
    double d_b0 = 0.0;
    std::vector<double> d_w, d_b, d_v;
};

inline double forward(const NetParams& net, double x) {
    double out = net.b0;
    for (std::size_t i = 0; i < net.width(); ++i) {
        const double pre = net.w[i] * x + net.b[i];
        if (pre > 0.0) out += net.v[i] * pre;
    }
    return out;
}

/// Residuals e_n = y_n - f(x_n).
inline std::vector<double> residuals(const NetParams& net, const Dataset& data) {
    std::vector<double> e(data.size());
    for (std::size_t n = 0; n < data.size(); ++n)
        e[n] = data.y[n] - forward(net, data.x[n]);
    return e;
}

/// Squared loss (1/2) sum_n (f(x_n) - y_n)^2, summed in index order.
inline double loss(const NetParams& net, const Dataset& data) {
    double acc = 0.0;
    for (std::size_t n = 0; n < data.size(); ++n) {
        const double r = forward(net, data.x[n]) - data.y[n];
        acc += r * r;
    }
    return 0.5 * acc;
}

inline double mse(const NetParams& net, const Dataset& data) {
    return 2.0 * loss(net, data) / static_cast<double>(data.size());
}

/// Activation matrix: entry (i, n) is 1 iff w_i x_n + b_i > 0.
/// The boundary w_i x_n + b_i = 0 counts as inactive.
inline std::vector<std::vector<std::uint8_t>>
activation_patterns(const NetParams& net, const Dataset& data) {
    std::vector<std::vector<std::uint8_t>> pat(net.width(),
                                               std::vector<std::uint8_t>(data.size(), 0));
    for (std::size_t i = 0; i < net.width(); ++i)
        for (std::size_t n = 0; n < data.size(); ++n)
            pat[i][n] = (net.w[i] * data.x[n] + net.b[i] > 0.0) ? 1 : 0;
    return pat;
}

/// Closed-form loss gradient. With residuals e and per-neuron masked
/// residuals e_i = e restricted to the active set of neuron i:
///   d_b0   = -<e, 1>
///   d_w_i  = -<e_i, v_i x>
///   d_v_i  = -<e_i, w_i x + b_i>
///   d_b_i  = -<e_i, v_i>
inline NetGradient gradient(const NetParams& net, const Dataset& data) {
    const std::size_t H = net.width();
    const std::size_t N = data.size();
    NetGradient g;
    g.d_w.assign(H, 0.0);
    g.d_b.assign(H, 0.0);
    g.d_v.assign(H, 0.0);

    std::vector<double> e(N);
    double e_sum = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        e[n] = data.y[n] - forward(net, data.x[n]);
        e_sum += e[n];
    }
    g.d_b0 = -e_sum;

    for (std::size_t i = 0; i < H; ++i) {
        double s1 = 0.0, sx = 0.0;
        for (std::size_t n = 0; n < N; ++n) {
            if (net.w[i] * data.x[n] + net.b[i] > 0.0) {
                s1 += e[n];
                sx += e[n] * data.x[n];
            }
        }
        g.d_w[i] = -net.v[i] * sx;
        g.d_v[i] = -(net.w[i] * sx + net.b[i] * s1);
        g.d_b[i] = -net.v[i] * s1;
    }
    return g;
}

inline double grad_norm(const NetGradient& g) {
    double acc = g.d_b0 * g.d_b0;
    for (double t : g.d_w) acc += t * t;
    for (double t : g.d_v) acc += t * t;
    for (double t : g.d_b) acc += t * t;
    return std::sqrt(acc);
}

/// Function-invariant per-neuron scaling w -> a*w, b -> a*b, v -> v/a.
inline NetParams scale_neurons(const NetParams& net, double alpha) {
    if (!(alpha > 0.0)) throw InvalidScale("scale_neurons requires alpha > 0");
    NetParams out = net;
    for (std::size_t i = 0; i < out.width(); ++i) {
        out.w[i] *= alpha;
        out.b[i] *= alpha;
        out.v[i] /= alpha;
    }
    return out;
}

} // namespace splinelens
