#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "kdl/integrator.hpp"

namespace kdl {

/// k-permutations of m, P(m, k) = m! / (m - k)!; P(m, 0) = 1.
std::int64_t perm_count(int m, int k);

double phase_diameter(const Eigen::VectorXd& phases);
double freq_diameter(const Eigen::VectorXd& freqs);
double natural_freq_diameter(const Eigen::VectorXd& omega);

/// Sup diameters of the history over [-tau, 0]: (D_theta(0), D_omega(0)).
/// Exact for constant histories, sampled on a uniform grid otherwise.
std::pair<double, double> initial_diameters(const HistorySpec& history,
                                            double tau,
                                            int grid_resolution = 1024);

/// Barycentric envelopes of the sorted phases and their gap q_theta.
/// Coefficient indices follow the sorted order, entry k-1 holding the
/// value attached to the k-th smallest phase.
struct ConvexCombinationState {
    double eta = 0.0;
    double beta = 0.0; // 1 - 2/eta
    std::vector<int> permutation;
    Eigen::VectorXd a_bar, a_under;
    Eigen::VectorXd theta_bar, theta_under;
    double q = 0.0; // theta_bar[0] - theta_under[N-1]
};

ConvexCombinationState convex_combination(const Eigen::VectorXd& phases,
                                          double eta);

/// Per-n evaluation of the two ordered-interaction inequalities. The
/// topology must already be labeled in the sorted phase order.
struct MinIndexReport {
    bool holds = true;
    std::vector<int> k_bar, k_under;
    std::vector<double> upper_lhs, upper_rhs; // lhs <= rhs required
    std::vector<double> lower_lhs, lower_rhs; // lhs >= rhs required
};

MinIndexReport check_min_index(const Eigen::VectorXd& sorted_phases, double eta,
                               const DigraphTopology& topology, double zeta,
                               double xi, double r_omega, double tau);

struct DiagnosticsSeries {
    std::vector<double> times;
    std::vector<double> d_theta;
    std::vector<double> d_omega;
    std::vector<double> order_param; // |sum exp(i theta)| / N, extra diagnostic
    std::optional<std::vector<double>> q_theta;
    double d_omega_natural = 0.0;      // D(Omega)
    double initial_theta_diameter = 0; // D_theta(0)
    double initial_omega_diameter = 0; // D_omega(0)
};

DiagnosticsSeries diagnostics_over(const Trajectory& traj,
                                   std::optional<double> eta = std::nullopt);

} // namespace kdl
