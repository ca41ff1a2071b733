#pragma once

#include <vector>

#include <Eigen/Dense>

#include "kdl/model.hpp"

namespace kdl {

struct IntegrationConfig {
    double t_end = 200.0;
    double dt = 0.01;
    int sample_stride = 1; // thins emitted samples, never the internal step
};

/// Dense-output solution of the delayed phase system. The internal grid
/// is uniform with step `step()`; adjacent grid points carry a cubic
/// Hermite segment, so any past time in [-tau, t_end] is evaluable.
class Trajectory {
public:
    const SystemParams& params() const { return params_; }
    const HistorySpec& history() const { return history_; }
    double step() const { return h_; }
    double t_end() const { return times_.back(); }
    int sample_stride() const { return stride_; }

    const std::vector<double>& times() const { return times_; }
    const Eigen::MatrixXd& phases() const { return phases_; } // (M+1) x N
    const Eigen::MatrixXd& derivs() const { return derivs_; }

    /// Dense phase evaluation; t <= 0 reads the history.
    Eigen::VectorXd phases_at(double t) const;
    double phase_at(int i, double t) const;

    /// Derivative of the dense output; t = 0 reports the left limit.
    Eigen::VectorXd frequencies_at(double t) const;

    std::vector<int> sample_indices() const;

    friend Trajectory integrate(const SystemParams&, const HistorySpec&,
                                const IntegrationConfig&);

private:
    SystemParams params_;
    HistorySpec history_ = HistorySpec::constant(Eigen::VectorXd());
    double h_ = 0.0;
    int stride_ = 1;
    std::vector<double> times_;
    Eigen::MatrixXd phases_;
    Eigen::MatrixXd derivs_;

    int grid_index(double t) const;
};

Trajectory integrate(const SystemParams& params, const HistorySpec& history,
                     const IntegrationConfig& config);

struct ConvergenceReport {
    double order = 0.0;
    bool exact = false; // step-halving differences at roundoff
};

/// Richardson order estimate from runs at h, h/2, h/4, probed at t_probe.
ConvergenceReport convergence_order(const SystemParams& params,
                                    const HistorySpec& history,
                                    double t_probe, double dt);

} // namespace kdl
