#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "kdl/errors.hpp"
#include "kdl/graph.hpp"

namespace kdl {

/// Initial phase data on [-tau, 0]. A constant history has zero
/// derivative on [-tau, 0); a sampled history interpolates the supplied
/// grid with cubic Hermite segments.
class HistorySpec {
public:
    enum class Kind { constant, sampled };

    static HistorySpec constant(Eigen::VectorXd phases);
    static HistorySpec sampled(Eigen::VectorXd times,
                               Eigen::MatrixXd phases,
                               Eigen::MatrixXd derivs);

    Kind kind() const { return kind_; }
    int size() const { return n_; }

    /// Earliest covered time; constant histories cover all s <= 0.
    double start() const;

    Eigen::VectorXd phases_at(double s) const;
    Eigen::VectorXd derivs_at(double s) const;
    double phase_at(int i, double s) const;

    const Eigen::VectorXd& sample_times() const { return times_; }
    const Eigen::MatrixXd& sample_phases() const { return phases_; }
    const Eigen::MatrixXd& sample_derivs() const { return derivs_; }
    const Eigen::VectorXd& constant_phases() const { return constant_; }

private:
    Kind kind_ = Kind::constant;
    int n_ = 0;
    Eigen::VectorXd constant_;
    Eigen::VectorXd times_;  // increasing, last entry 0
    Eigen::MatrixXd phases_; // samples x N
    Eigen::MatrixXd derivs_;

    int segment_of(double s) const;
};

/// Model parameters plus the derived delay/velocity quantities the
/// estimates are stated in.
struct SystemParams {
    Eigen::VectorXd omega;
    double kappa = 0.0;
    Eigen::MatrixXd delays; // tau_ij, receiver-indexed rows, zero diagonal
    DigraphTopology topology;

    double tau_max = 0.0;  // max_ij tau_ij
    double r_omega = 0.0;  // max_i |Omega_i| + kappa
    Eigen::VectorXd tau_i; // per-vertex max outgoing delay
    double tau_0 = 0.0;    // min_i tau_i

    int size() const { return static_cast<int>(omega.size()); }

    static SystemParams make(Eigen::VectorXd omega, double kappa,
                             Eigen::MatrixXd delays, DigraphTopology topology);
};

inline double velocity_bound(const SystemParams& params) { return params.r_omega; }

/// Right-hand side of the delayed phase system. `delayed(j, s)` must
/// return theta_j(s) for s = t - tau_ij over every active arc;
/// zero-delay arcs read the current stage state directly.
template <class DelayedPhase>
Eigen::VectorXd rhs(double t, const Eigen::VectorXd& phases,
                    DelayedPhase&& delayed, const SystemParams& params) {
    const int n = params.size();
    Eigen::VectorXd out(n);
    const double gain = n > 1 ? params.kappa / (n - 1) : 0.0;
    for (int i = 0; i < n; ++i) {
        double coupling = 0.0;
        for (int j : params.topology.neighbor_sets[i]) {
            const double tau = params.delays(i, j);
            const double theta_j = tau == 0.0 ? phases[j] : delayed(j, t - tau);
            coupling += std::sin(theta_j - phases[i]);
        }
        out[i] = params.omega[i] + gain * coupling;
    }
    return out;
}

/// Differentiated (frequency) form, used for verification cross-checks.
template <class DelayedFreq, class DelayedPhase>
Eigen::VectorXd frequency_rhs(double t, const Eigen::VectorXd& phases,
                              const Eigen::VectorXd& freqs,
                              DelayedFreq&& freqs_delayed,
                              DelayedPhase&& phases_delayed,
                              const SystemParams& params) {
    const int n = params.size();
    Eigen::VectorXd out(n);
    const double gain = n > 1 ? params.kappa / (n - 1) : 0.0;
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k : params.topology.neighbor_sets[i]) {
            const double tau = params.delays(i, k);
            const double theta_k = tau == 0.0 ? phases[k] : phases_delayed(k, t - tau);
            const double omega_k = tau == 0.0 ? freqs[k] : freqs_delayed(k, t - tau);
            acc += std::cos(theta_k - phases[i]) * (omega_k - freqs[i]);
        }
        out[i] = gain * acc;
    }
    return out;
}

} // namespace kdl
