#include "kdl/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kdl {

namespace {

double hermite(double s, double h, double y0, double y1, double d0, double d1) {
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 +
           (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * d1;
}

double hermite_deriv(double s, double h, double y0, double y1, double d0,
                     double d1) {
    const double s2 = s * s;
    return (6 * s2 - 6 * s) * (y0 - y1) / h + (3 * s2 - 4 * s + 1) * d0 +
           (3 * s2 - 2 * s) * d1;
}

} // namespace

int Trajectory::grid_index(double t) const {
    int seg = static_cast<int>(std::floor(t / h_));
    return std::clamp(seg, 0, static_cast<int>(times_.size()) - 2);
}

double Trajectory::phase_at(int i, double t) const {
    if (t <= 0.0) return history_.phase_at(i, t);
    if (t > times_.back() + 1e-9 * std::max(1.0, times_.back()))
        throw OutOfRange("dense evaluation past end of trajectory");
    const int seg = grid_index(t);
    const double s = (t - times_[seg]) / h_;
    return hermite(s, h_, phases_(seg, i), phases_(seg + 1, i), derivs_(seg, i),
                   derivs_(seg + 1, i));
}

Eigen::VectorXd Trajectory::phases_at(double t) const {
    if (t <= 0.0) return history_.phases_at(t);
    const int n = params_.size();
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) out[i] = phase_at(i, t);
    return out;
}

Eigen::VectorXd Trajectory::frequencies_at(double t) const {
    // omega(0) is the left limit from the history by convention
    if (t <= 0.0) return history_.derivs_at(t);
    if (t > times_.back() + 1e-9 * std::max(1.0, times_.back()))
        throw OutOfRange("dense evaluation past end of trajectory");
    const int n = params_.size();
    const int seg = grid_index(t);
    const double s = (t - times_[seg]) / h_;
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i)
        out[i] = hermite_deriv(s, h_, phases_(seg, i), phases_(seg + 1, i),
                               derivs_(seg, i), derivs_(seg + 1, i));
    return out;
}

std::vector<int> Trajectory::sample_indices() const {
    std::vector<int> idx;
    const int last = static_cast<int>(times_.size()) - 1;
    for (int m = 0; m < last; m += stride_) idx.push_back(m);
    idx.push_back(last);
    return idx;
}

Trajectory integrate(const SystemParams& params, const HistorySpec& history,
                     const IntegrationConfig& config) {
    const int n = params.size();
    if (history.size() != n)
        throw DimensionMismatch("history size does not match params");
    if (config.t_end <= 0.0) throw StepTooLarge("t_end must be positive");
    if (history.start() > -params.tau_max + 1e-12 &&
        !(history.start() == -std::numeric_limits<double>::infinity()) &&
        history.start() > -params.tau_max)
        throw AccessorOutOfRange("history does not cover [-tau, 0]");

    // step cap: a quarter of the smallest positive active delay, so every
    // delayed lookup lands in a completed segment
    double h = std::min(config.dt, config.t_end);
    for (int i = 0; i < n; ++i)
        for (int j : params.topology.neighbor_sets[i]) {
            const double tau = params.delays(i, j);
            if (tau > 0.0) h = std::min(h, tau / 4.0);
        }
    if (!(h > 0.0)) throw StepTooLarge("resolved step is not positive");
    const long steps = static_cast<long>(std::ceil(config.t_end / h - 1e-9));
    h = config.t_end / static_cast<double>(steps);

    Trajectory traj;
    traj.params_ = params;
    traj.history_ = history;
    traj.h_ = h;
    traj.stride_ = std::max(1, config.sample_stride);
    traj.times_.resize(steps + 1);
    traj.phases_.resize(steps + 1, n);
    traj.derivs_.resize(steps + 1, n);

    for (long m = 0; m <= steps; ++m) traj.times_[m] = h * static_cast<double>(m);
    traj.phases_.row(0) = history.phases_at(0.0).transpose();

    // delayed lookup against history / completed segments; times inside the
    // step under construction reuse the last completed segment's Hermite
    long completed = 0;
    auto delayed = [&](int j, double t) -> double {
        if (t <= 0.0) return traj.history_.phase_at(j, t);
        long seg = static_cast<long>(std::floor(t / h));
        seg = std::clamp(seg, 0L, std::max(0L, completed - 1));
        if (completed == 0)
            throw AccessorOutOfRange("delayed lookup before first segment");
        const double s = (t - traj.times_[seg]) / h;
        return hermite(s, h, traj.phases_(seg, j), traj.phases_(seg + 1, j),
                       traj.derivs_(seg, j), traj.derivs_(seg + 1, j));
    };

    Eigen::VectorXd y = traj.phases_.row(0).transpose();
    for (long m = 0; m < steps; ++m) {
        const double t = traj.times_[m];
        const Eigen::VectorXd k1 = rhs(t, y, delayed, params);
        traj.derivs_.row(m) = k1.transpose();
        const Eigen::VectorXd k2 =
            rhs(t + h / 2, Eigen::VectorXd(y + (h / 2) * k1), delayed, params);
        const Eigen::VectorXd k3 =
            rhs(t + h / 2, Eigen::VectorXd(y + (h / 2) * k2), delayed, params);
        const Eigen::VectorXd k4 =
            rhs(t + h, Eigen::VectorXd(y + h * k3), delayed, params);
        y += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
        if (!y.allFinite())
            throw NonFiniteState("non-finite state at t = " +
                                 std::to_string(t + h));
        traj.phases_.row(m + 1) = y.transpose();
        // provisional endpoint slope so lookups into this segment work
        traj.derivs_.row(m + 1) = k4.transpose();
        completed = m + 1;
        traj.derivs_.row(m + 1) =
            rhs(traj.times_[m + 1], y, delayed, params).transpose();
    }
    return traj;
}

ConvergenceReport convergence_order(const SystemParams& params,
                                    const HistorySpec& history, double t_probe,
                                    double dt) {
    IntegrationConfig cfg;
    cfg.t_end = t_probe;
    auto probe = [&](double step) {
        cfg.dt = step;
        return integrate(params, history, cfg).phases_at(t_probe);
    };
    const Eigen::VectorXd a = probe(dt);
    const Eigen::VectorXd b = probe(dt / 2);
    const Eigen::VectorXd c = probe(dt / 4);
    const double e1 = (a - b).norm();
    const double e2 = (b - c).norm();
    const double scale = std::max(1.0, a.norm());

    ConvergenceReport report;
    if (e1 < 1e-13 * scale || e2 < 1e-14 * scale) {
        report.exact = true;
        report.order = std::numeric_limits<double>::infinity();
        return report;
    }
    report.order = std::log2(e1 / e2);
    return report;
}

} // namespace kdl
