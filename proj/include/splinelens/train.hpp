#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "splinelens/net.hpp"
#include "splinelens/spline.hpp"

namespace splinelens {

struct TrainConfig {
    double learning_rate = 1e-3; // > 0
    long long epochs = 0;        // >= 0
    double stop_grad_norm = 0.0; // early stop when ||grad||_2 falls below
    long long record_every = 1;  // frame stride, > 0
};

struct TrajectoryFrame {
    double t = 0.0;
    NetParams net;
    BDSOParams bdso; // always nn_to_bdso(net)
    double loss = 0.0;
};

struct Trajectory {
    std::vector<TrajectoryFrame> frames;
    std::string scheme; // "gd", "euler", "rk4"
    double dt = 0.0;
    std::uint64_t seed = 0;
};

namespace detail {

inline void record_frame(Trajectory& traj, double t, const NetParams& net, double loss_value) {
    TrajectoryFrame f;
    f.t = t;
    f.net = net;
    f.bdso = nn_to_bdso(net).bdso;
    f.loss = loss_value;
    traj.frames.push_back(std::move(f));
}

// theta <- theta - step * grad, fixed coordinate order. Shared by GD and the
// Euler flow step so that one Euler step with dt equals one GD step with
// lr = dt bitwise.
inline void apply_step(NetParams& net, const NetGradient& g, double step) {
    net.b0 -= step * g.d_b0;
    for (std::size_t i = 0; i < net.width(); ++i) {
        net.w[i] -= step * g.d_w[i];
        net.v[i] -= step * g.d_v[i];
        net.b[i] -= step * g.d_b[i];
    }
}

// Residuals, loss, and gradient in one pass over the data.
inline double gradient_and_loss(const NetParams& net, const Dataset& data, NetGradient& g) {
    const std::size_t H = net.width();
    const std::size_t N = data.size();
    g.d_w.assign(H, 0.0);
    g.d_b.assign(H, 0.0);
    g.d_v.assign(H, 0.0);

    std::vector<double> e(N);
    double acc = 0.0, e_sum = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        e[n] = data.y[n] - forward(net, data.x[n]);
        acc += e[n] * e[n];
        e_sum += e[n];
    }
    g.d_b0 = -e_sum;
    for (std::size_t i = 0; i < H; ++i) {
        const double wi = net.w[i], bi = net.b[i], vi = net.v[i];
        double s1 = 0.0, sx = 0.0;
        for (std::size_t n = 0; n < N; ++n) {
            if (wi * data.x[n] + bi > 0.0) {
                s1 += e[n];
                sx += e[n] * data.x[n];
            }
        }
        g.d_w[i] = -vi * sx;
        g.d_v[i] = -(wi * sx + bi * s1);
        g.d_b[i] = -vi * s1;
    }
    return 0.5 * acc;
}

} // namespace detail

struct TrainResult {
    NetParams net;
    Trajectory trajectory;
    long long epochs_run = 0;
    double final_loss = 0.0;
    double final_grad_norm = 0.0;
    bool stopped_early = false;
};

/// Full-batch gradient descent, deterministic given inputs. Frames are
/// recorded at t = 0, every record_every epochs, and at the end.
inline TrainResult train_gd(const NetParams& start, const Dataset& data, const TrainConfig& cfg) {
    if (!(cfg.learning_rate > 0.0)) throw Error("train_gd: learning_rate must be > 0");
    if (cfg.epochs < 0) throw Error("train_gd: epochs must be >= 0");
    if (cfg.record_every <= 0) throw Error("train_gd: record_every must be > 0");

    TrainResult out;
    out.net = start;
    out.trajectory.scheme = "gd";
    out.trajectory.dt = cfg.learning_rate;

    NetGradient g;
    double cur_loss = detail::gradient_and_loss(out.net, data, g);
    detail::record_frame(out.trajectory, 0.0, out.net, cur_loss);

    long long epoch = 0;
    for (; epoch < cfg.epochs; ++epoch) {
        if (!std::isfinite(cur_loss)) throw NonFiniteLoss("train_gd: loss diverged");
        out.final_grad_norm = grad_norm(g);
        if (cfg.stop_grad_norm > 0.0 && out.final_grad_norm < cfg.stop_grad_norm) {
            out.stopped_early = true;
            break;
        }
        detail::apply_step(out.net, g, cfg.learning_rate);
        cur_loss = detail::gradient_and_loss(out.net, data, g);
        if ((epoch + 1) % cfg.record_every == 0 && epoch + 1 != cfg.epochs)
            detail::record_frame(out.trajectory, static_cast<double>(epoch + 1), out.net, cur_loss);
    }
    if (!std::isfinite(cur_loss)) throw NonFiniteLoss("train_gd: loss diverged");

    out.epochs_run = epoch;
    out.final_loss = cur_loss;
    out.final_grad_norm = grad_norm(g);
    if (out.trajectory.frames.back().t != static_cast<double>(epoch))
        detail::record_frame(out.trajectory, static_cast<double>(epoch), out.net, cur_loss);
    return out;
}

/// Largest eigenvalue of the Gauss-Newton Hessian J^T J, computed from the
/// N x N Gram J J^T by power iteration. 1/lambda_max is a safe GD step for
/// nets near the given one.
inline double gauss_newton_lambda_max(const NetParams& net, const Dataset& data) {
    const std::size_t N = data.size();
    const std::size_t H = net.width();
    std::vector<double> K(N * N, 0.0);
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t m = n; m < N; ++m) {
            double acc = 1.0; // b0 feature
            for (std::size_t i = 0; i < H; ++i) {
                const double pn = net.w[i] * data.x[n] + net.b[i];
                const double pm = net.w[i] * data.x[m] + net.b[i];
                if (pn > 0.0 && pm > 0.0) {
                    const double vi2 = net.v[i] * net.v[i];
                    acc += vi2 * data.x[n] * data.x[m]; // d/dw
                    acc += pn * pm;                     // d/dv
                    acc += vi2;                         // d/db
                }
            }
            K[n * N + m] = acc;
            K[m * N + n] = acc;
        }

    std::vector<double> u(N, 1.0), t(N);
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
        for (std::size_t n = 0; n < N; ++n) {
            double acc = 0.0;
            for (std::size_t m = 0; m < N; ++m) acc += K[n * N + m] * u[m];
            t[n] = acc;
        }
        double norm = 0.0;
        for (double a : t) norm += a * a;
        norm = std::sqrt(norm);
        if (norm == 0.0) return 0.0;
        lambda = norm;
        for (std::size_t n = 0; n < N; ++n) u[n] = t[n] / norm;
    }
    return lambda;
}

} // namespace splinelens
