#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "splinelens/net.hpp"
#include "splinelens/spline.hpp"

namespace splinelens {

struct Line {
    double slope = 0.0;
    double intercept = 0.0;
    double operator()(double x) const { return slope * x + intercept; }
};

/// Least-squares line. Conventions: a single point gets the horizontal line
/// through it; so does a column of equal x values (through the mean).
inline Line ols_fit(const std::vector<std::pair<double, double>>& pts) {
    if (pts.empty()) throw EmptyInput("ols_fit: no points");
    const double n = static_cast<double>(pts.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx == 0.0) return {0.0, my};
    const double m = sxy / sxx;
    return {m, my - m * mx};
}

/// CPWL through all datapoints, end pieces extrapolating linearly.
inline PWLParams linear_interpolant(const Dataset& data) {
    const std::size_t N = data.size();
    if (N < 2) throw Error("linear_interpolant: need at least 2 points");
    for (std::size_t n = 1; n < N; ++n)
        if (data.x[n] == data.x[n - 1]) throw DuplicateX("linear_interpolant: duplicate x");

    PWLParams pwl;
    for (std::size_t n = 0; n + 1 < N; ++n) {
        const double m = (data.y[n + 1] - data.y[n]) / (data.x[n + 1] - data.x[n]);
        pwl.slopes.push_back(m);
        pwl.intercepts.push_back(data.y[n] - m * data.x[n]);
        if (n + 2 < N) pwl.knots.push_back(data.x[n + 1]);
    }
    return pwl;
}

/// Natural interpolating cubic spline in second-derivative (M) form:
/// M vanishes at both boundary knots, linear extrapolation outside.
struct CubicSpline {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> m2; // second derivatives at the knots

    double operator()(double t) const {
        const std::size_t N = x.size();
        if (t <= x.front()) {
            const double h = x[1] - x[0];
            const double slope = (y[1] - y[0]) / h - h * m2[1] / 6.0;
            return y[0] + slope * (t - x[0]);
        }
        if (t >= x.back()) {
            const double h = x[N - 1] - x[N - 2];
            const double slope = (y[N - 1] - y[N - 2]) / h + h * m2[N - 2] / 6.0;
            return y[N - 1] + slope * (t - x[N - 1]);
        }
        const std::size_t j = static_cast<std::size_t>(
            std::upper_bound(x.begin(), x.end(), t) - x.begin()) - 1;
        const double h = x[j + 1] - x[j];
        const double a = x[j + 1] - t;
        const double b = t - x[j];
        return m2[j] * a * a * a / (6.0 * h) + m2[j + 1] * b * b * b / (6.0 * h) +
               (y[j] / h - m2[j] * h / 6.0) * a + (y[j + 1] / h - m2[j + 1] * h / 6.0) * b;
    }
};

inline CubicSpline natural_cubic_interpolant(const Dataset& data) {
    const std::size_t N = data.size();
    if (N < 2) throw Error("natural_cubic_interpolant: need at least 2 points");
    for (std::size_t n = 1; n < N; ++n)
        if (data.x[n] == data.x[n - 1]) throw DuplicateX("natural_cubic_interpolant: duplicate x");

    CubicSpline s;
    s.x = data.x;
    s.y = data.y;
    s.m2.assign(N, 0.0);
    if (N == 2) return s;

    // Thomas sweep over the interior tridiagonal system.
    const std::size_t K = N - 2;
    std::vector<double> diag(K), upper(K), rhs(K);
    for (std::size_t r = 0; r < K; ++r) {
        const std::size_t n = r + 1;
        const double h0 = data.x[n] - data.x[n - 1];
        const double h1 = data.x[n + 1] - data.x[n];
        diag[r] = (h0 + h1) / 3.0;
        upper[r] = h1 / 6.0;
        rhs[r] = (data.y[n + 1] - data.y[n]) / h1 - (data.y[n] - data.y[n - 1]) / h0;
    }
    for (std::size_t r = 1; r < K; ++r) {
        const double h0 = data.x[r + 1] - data.x[r]; // sub-diagonal entry h0/6
        const double f = (h0 / 6.0) / diag[r - 1];
        diag[r] -= f * upper[r - 1];
        rhs[r] -= f * rhs[r - 1];
    }
    s.m2[K] = rhs[K - 1] / diag[K - 1];
    for (std::size_t r = K - 1; r-- > 0;)
        s.m2[r + 1] = (rhs[r] - upper[r] * s.m2[r + 2]) / diag[r];
    return s;
}

/// Integral of f''^2 for the cubic spline; f'' is piecewise linear in M.
inline double spline_roughness(const CubicSpline& s) {
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < s.x.size(); ++j) {
        const double h = s.x[j + 1] - s.x[j];
        acc += h / 3.0 * (s.m2[j] * s.m2[j] + s.m2[j] * s.m2[j + 1] + s.m2[j + 1] * s.m2[j + 1]);
    }
    return acc;
}

/// Hinge feature matrix phi[n][i] = (x_n - beta_i)_{s_i}.
struct FeatureMatrix {
    std::size_t rows = 0; // datapoints
    std::size_t cols = 0; // breakpoints
    std::vector<double> phi;

    double at(std::size_t n, std::size_t i) const { return phi[n * cols + i]; }
    double& at(std::size_t n, std::size_t i) { return phi[n * cols + i]; }
};

inline FeatureMatrix build_features(const Dataset& data, const BDSOParams& bdso) {
    FeatureMatrix f;
    f.rows = data.size();
    f.cols = bdso.width();
    f.phi.assign(f.rows * f.cols, 0.0);
    for (std::size_t n = 0; n < f.rows; ++n)
        for (std::size_t i = 0; i < f.cols; ++i) {
            const auto& nrn = bdso.neurons[i];
            const double d = data.x[n] - nrn.beta;
            if ((nrn.s > 0 && d > 0.0) || (nrn.s < 0 && d < 0.0)) f.at(n, i) = d;
        }
    return f;
}

/// Minimum-norm solution of y = Phi mu. Throws Infeasible when y is not in
/// the column space (least-squares residual above 1e-8 * ||y||).
inline std::vector<double> min_norm_interpolant(const FeatureMatrix& f,
                                                const std::vector<double>& y) {
    if (y.size() != f.rows) throw Error("min_norm_interpolant: size mismatch");
    Eigen::MatrixXd A(f.rows, f.cols);
    for (std::size_t n = 0; n < f.rows; ++n)
        for (std::size_t i = 0; i < f.cols; ++i) A(n, i) = f.at(n, i);
    Eigen::VectorXd b(f.rows);
    for (std::size_t n = 0; n < f.rows; ++n) b(n) = y[n];

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    Eigen::VectorXd mu = cod.solve(b);
    const double resid = (A * mu - b).norm();
    if (resid > 1e-8 * std::max(b.norm(), 1e-300))
        throw Infeasible("min_norm_interpolant: y not in the feature column space");
    return std::vector<double>(mu.data(), mu.data() + mu.size());
}

// ---------------------------------------------------------------------------
// Segmented regression over contiguous runs of the sorted data. Segments are
// fit independently by OLS (no continuity constraint, per the reference
// algorithms being benchmarked).
// ---------------------------------------------------------------------------

struct SegFit {
    std::vector<std::size_t> starts; // starts[k] begins segment k; starts[0] = 0
    std::vector<Line> lines;
    double sse = 0.0;
};

namespace detail {

// O(1) windowed OLS SSE from prefix sums.
class SegmentCost {
public:
    explicit SegmentCost(const Dataset& data) : x_(data.x), y_(data.y) {
        const std::size_t N = x_.size();
        sx_.assign(N + 1, 0.0);
        sy_.assign(N + 1, 0.0);
        sxx_.assign(N + 1, 0.0);
        sxy_.assign(N + 1, 0.0);
        syy_.assign(N + 1, 0.0);
        for (std::size_t n = 0; n < N; ++n) {
            sx_[n + 1] = sx_[n] + x_[n];
            sy_[n + 1] = sy_[n] + y_[n];
            sxx_[n + 1] = sxx_[n] + x_[n] * x_[n];
            sxy_[n + 1] = sxy_[n] + x_[n] * y_[n];
            syy_[n + 1] = syy_[n] + y_[n] * y_[n];
        }
    }

    // SSE of the OLS line over [i, j)
    double sse(std::size_t i, std::size_t j) const {
        const double n = static_cast<double>(j - i);
        const double sx = sx_[j] - sx_[i], sy = sy_[j] - sy_[i];
        const double cxx = (sxx_[j] - sxx_[i]) - sx * sx / n;
        const double cxy = (sxy_[j] - sxy_[i]) - sx * sy / n;
        const double cyy = (syy_[j] - syy_[i]) - sy * sy / n;
        if (cxx <= 1e-12 * std::max(1.0, sxx_[j] - sxx_[i]))
            return std::max(0.0, cyy);
        return std::max(0.0, cyy - cxy * cxy / cxx);
    }

    Line line(std::size_t i, std::size_t j) const {
        std::vector<std::pair<double, double>> pts;
        pts.reserve(j - i);
        for (std::size_t n = i; n < j; ++n) pts.emplace_back(x_[n], y_[n]);
        return ols_fit(pts);
    }

private:
    const std::vector<double>& x_;
    const std::vector<double>& y_;
    std::vector<double> sx_, sy_, sxx_, sxy_, syy_;
};

inline SegFit assemble_fit(const SegmentCost& cost, std::vector<std::size_t> starts,
                           std::size_t N) {
    SegFit fit;
    fit.starts = std::move(starts);
    for (std::size_t k = 0; k < fit.starts.size(); ++k) {
        const std::size_t i = fit.starts[k];
        const std::size_t j = (k + 1 < fit.starts.size()) ? fit.starts[k + 1] : N;
        fit.lines.push_back(cost.line(i, j));
        fit.sse += cost.sse(i, j);
    }
    return fit;
}

} // namespace detail

/// Exact dynamic-programming minimizer of total SSE over all partitions into
/// k contiguous segments. O(N^2 k) with precomputed prefix sums.
inline SegFit dp_segreg(const Dataset& data, std::size_t k) {
    const std::size_t N = data.size();
    if (k < 1 || k > N) throw Error("dp_segreg: need 1 <= k <= N");
    detail::SegmentCost cost(data);

    constexpr double kInf = std::numeric_limits<double>::infinity();
    // best[s][j]: minimal SSE of the first j points in s segments
    std::vector<std::vector<double>> best(k + 1, std::vector<double>(N + 1, kInf));
    std::vector<std::vector<std::size_t>> choice(k + 1, std::vector<std::size_t>(N + 1, 0));
    for (std::size_t j = 1; j <= N; ++j) best[1][j] = cost.sse(0, j);
    for (std::size_t s = 2; s <= k; ++s)
        for (std::size_t j = s; j <= N; ++j)
            for (std::size_t m = s - 1; m < j; ++m) {
                const double c = best[s - 1][m] + cost.sse(m, j);
                if (c < best[s][j]) {
                    best[s][j] = c;
                    choice[s][j] = m;
                }
            }

    std::vector<std::size_t> starts(k);
    std::size_t j = N;
    for (std::size_t s = k; s >= 2; --s) {
        starts[s - 1] = choice[s][j];
        j = choice[s][j];
    }
    starts[0] = 0;
    return detail::assemble_fit(cost, std::move(starts), N);
}

/// Greedy Merge: from N singleton segments, repeatedly merge the adjacent
/// pair with the least SSE increase until k segments remain.
inline SegFit greedy_merge(const Dataset& data, std::size_t k) {
    const std::size_t N = data.size();
    if (k < 1 || k > N) throw Error("greedy_merge: need 1 <= k <= N");
    detail::SegmentCost cost(data);

    std::vector<std::size_t> starts(N);
    for (std::size_t n = 0; n < N; ++n) starts[n] = n;
    while (starts.size() > k) {
        double best_delta = std::numeric_limits<double>::infinity();
        std::size_t best_idx = 0;
        for (std::size_t s = 0; s + 1 < starts.size(); ++s) {
            const std::size_t i = starts[s];
            const std::size_t mid = starts[s + 1];
            const std::size_t j = (s + 2 < starts.size()) ? starts[s + 2] : N;
            const double delta = cost.sse(i, j) - cost.sse(i, mid) - cost.sse(mid, j);
            if (delta < best_delta) {
                best_delta = delta;
                best_idx = s;
            }
        }
        starts.erase(starts.begin() + static_cast<std::ptrdiff_t>(best_idx) + 1);
    }
    return detail::assemble_fit(cost, std::move(starts), N);
}

/// Grid MAE/RMSE between two evaluables on {lo, lo+step, ..., hi}.
inline std::pair<double, double> compare_curves(const std::function<double(double)>& f,
                                                const std::function<double(double)>& g,
                                                double lo, double hi, double step) {
    if (!(lo < hi) || !(step > 0.0)) throw Error("compare_curves: bad grid");
    const std::size_t count = static_cast<std::size_t>(std::lround((hi - lo) / step)) + 1;
    double abs_acc = 0.0, sq_acc = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double x = lo + static_cast<double>(i) * step;
        const double d = f(x) - g(x);
        abs_acc += std::abs(d);
        sq_acc += d * d;
    }
    const double n = static_cast<double>(count);
    return {abs_acc / n, std::sqrt(sq_acc / n)};
}

} // namespace splinelens
