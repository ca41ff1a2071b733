#include "kdl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

namespace kdl {

std::int64_t perm_count(int m, int k) {
    if (k < 0 || m < 0 || k > m)
        throw KExceedsM("perm_count requires 0 <= k <= m");
    std::int64_t p = 1;
    for (int f = m; f > m - k; --f) p *= f;
    return p;
}

double phase_diameter(const Eigen::VectorXd& phases) {
    return phases.maxCoeff() - phases.minCoeff();
}

double freq_diameter(const Eigen::VectorXd& freqs) {
    return freqs.maxCoeff() - freqs.minCoeff();
}

double natural_freq_diameter(const Eigen::VectorXd& omega) {
    return omega.maxCoeff() - omega.minCoeff();
}

std::pair<double, double> initial_diameters(const HistorySpec& history,
                                            double tau, int grid_resolution) {
    if (history.kind() == HistorySpec::Kind::constant)
        return {phase_diameter(history.constant_phases()), 0.0};

    const double start = std::max(history.start(), -tau);
    double theta_min = std::numeric_limits<double>::infinity();
    double theta_max = -theta_min;
    double omega_min = theta_min, omega_max = -theta_min;
    for (int k = 0; k <= grid_resolution; ++k) {
        const double s = start + (0.0 - start) * k / grid_resolution;
        const Eigen::VectorXd th = history.phases_at(s);
        const Eigen::VectorXd om = history.derivs_at(s);
        theta_min = std::min(theta_min, th.minCoeff());
        theta_max = std::max(theta_max, th.maxCoeff());
        omega_min = std::min(omega_min, om.minCoeff());
        omega_max = std::max(omega_max, om.maxCoeff());
    }
    return {theta_max - theta_min, omega_max - omega_min};
}

ConvexCombinationState convex_combination(const Eigen::VectorXd& phases,
                                          double eta) {
    if (!(eta > 2.0)) throw EtaTooSmall("convex combination requires eta > 2");
    const int n = static_cast<int>(phases.size());
    if (n > 120)
        throw Error("coefficient growth limits q_theta to N <= 120");

    ConvexCombinationState st;
    st.eta = eta;
    st.beta = 1.0 - 2.0 / eta;
    st.permutation.resize(n);
    std::iota(st.permutation.begin(), st.permutation.end(), 0);
    std::stable_sort(st.permutation.begin(), st.permutation.end(),
                     [&](int a, int b) { return phases[a] < phases[b]; });

    Eigen::VectorXd sorted(n);
    for (int k = 0; k < n; ++k) sorted[k] = phases[st.permutation[k]];

    st.a_bar = Eigen::VectorXd::Zero(n);
    st.a_under = Eigen::VectorXd::Zero(n);
    st.theta_bar = Eigen::VectorXd::Zero(n);
    st.theta_under = Eigen::VectorXd::Zero(n);

    // top-down: a_bar[N] = 0, a_bar[k-1] = eta (2N - k + 2)(a_bar[k] + 1)
    st.theta_bar[n - 1] = sorted[n - 1];
    for (int k = n; k >= 2; --k) {
        const double prev = st.a_bar[k - 1];
        st.a_bar[k - 2] = eta * (2 * n - k + 2) * (prev + 1.0);
        st.theta_bar[k - 2] =
            (st.a_bar[k - 2] * st.theta_bar[k - 1] + sorted[k - 2]) /
            (st.a_bar[k - 2] + 1.0);
    }
    // bottom-up: a_under[1] = 0, a_under[k+1] = eta (k + 1 + N)(a_under[k] + 1)
    st.theta_under[0] = sorted[0];
    for (int k = 1; k <= n - 1; ++k) {
        const double prev = st.a_under[k - 1];
        st.a_under[k] = eta * (k + 1 + n) * (prev + 1.0);
        st.theta_under[k] =
            (st.a_under[k] * st.theta_under[k - 1] + sorted[k]) /
            (st.a_under[k] + 1.0);
    }
    if (!st.a_bar.allFinite() || !st.a_under.allFinite())
        throw Error("convex combination coefficients overflowed");

    st.q = st.theta_bar[0] - st.theta_under[n - 1];
    return st;
}

MinIndexReport check_min_index(const Eigen::VectorXd& sorted_phases, double eta,
                               const DigraphTopology& topology, double zeta,
                               double xi, double r_omega, double tau) {
    const int n = static_cast<int>(sorted_phases.size());
    if (topology.n_vertices != n)
        throw DimensionMismatch("topology size does not match phases");
    for (int k = 1; k < n; ++k)
        if (sorted_phases[k] < sorted_phases[k - 1])
            throw PreconditionViolated("phases must be sorted nondecreasing");

    const double d = phase_diameter(sorted_phases);
    if (!(d < zeta && zeta < xi && xi < M_PI))
        throw PreconditionViolated("requires d_theta < zeta < xi < pi");
    const double rt = r_omega * tau;
    if (!(rt < M_PI / 2))
        throw PreconditionViolated("eta bound undefined: R_omega tau >= pi/2");
    const double eta_min =
        std::max({1.0 / std::sin(xi), 1.0 / std::cos(rt), 2.0 / (1.0 - zeta / xi)});
    if (!(eta > eta_min))
        throw PreconditionViolated("eta below the required maximum");

    MinIndexReport rep;
    rep.k_bar.resize(n);
    rep.k_under.resize(n);
    rep.upper_lhs.resize(n);
    rep.upper_rhs.resize(n);
    rep.lower_lhs.resize(n);
    rep.lower_rhs.resize(n);

    for (int idx = 0; idx < n; ++idx) {
        const int nn = idx + 1; // n in 1..N

        // upper chain: sum_{i=n}^{N} eta^{i-n} min_{j in N_i, j <= i} sin(theta_j - theta_i)
        double lhs_u = 0.0;
        int kbar = n; // min index over union of neighbor sets
        double w = 1.0;
        for (int i = nn; i <= n; ++i, w *= eta) {
            double term = std::numeric_limits<double>::infinity();
            for (int j : topology.neighbor_sets[i - 1]) {
                kbar = std::min(kbar, j + 1);
                if (j + 1 <= i)
                    term = std::min(term,
                                    std::sin(sorted_phases[j] - sorted_phases[i - 1]));
            }
            if (std::isfinite(term)) lhs_u += w * term;
        }
        rep.k_bar[idx] = kbar;
        rep.upper_lhs[idx] = lhs_u;
        rep.upper_rhs[idx] =
            std::sin(sorted_phases[kbar - 1] - sorted_phases[n - 1]);

        // lower chain: sum_{i=1}^{n} eta^{n-i} max_{j in N_i, j >= i} sin(theta_j - theta_i)
        double lhs_l = 0.0;
        int kunder = 1;
        w = 1.0;
        for (int i = nn; i >= 1; --i, w *= eta) {
            double term = -std::numeric_limits<double>::infinity();
            for (int j : topology.neighbor_sets[i - 1]) {
                kunder = std::max(kunder, j + 1);
                if (j + 1 >= i)
                    term = std::max(term,
                                    std::sin(sorted_phases[j] - sorted_phases[i - 1]));
            }
            if (std::isfinite(term)) lhs_l += w * term;
        }
        rep.k_under[idx] = kunder;
        rep.lower_lhs[idx] = lhs_l;
        rep.lower_rhs[idx] = std::sin(sorted_phases[kunder - 1] - sorted_phases[0]);

        const double tol = 1e-12;
        if (rep.upper_lhs[idx] > rep.upper_rhs[idx] + tol) rep.holds = false;
        if (rep.lower_lhs[idx] < rep.lower_rhs[idx] - tol) rep.holds = false;
    }
    return rep;
}

DiagnosticsSeries diagnostics_over(const Trajectory& traj,
                                   std::optional<double> eta) {
    DiagnosticsSeries out;
    const auto idx = traj.sample_indices();
    const int n = traj.params().size();

    out.d_omega_natural = natural_freq_diameter(traj.params().omega);
    auto [dth0, dom0] =
        initial_diameters(traj.history(), traj.params().tau_max);
    out.initial_theta_diameter = dth0;
    out.initial_omega_diameter = dom0;
    if (eta) out.q_theta.emplace();

    for (int m : idx) {
        const double t = traj.times()[m];
        const Eigen::VectorXd th = traj.phases().row(m).transpose();
        const Eigen::VectorXd om = traj.derivs().row(m).transpose();
        out.times.push_back(t);
        out.d_theta.push_back(phase_diameter(th));
        out.d_omega.push_back(freq_diameter(om));
        std::complex<double> z{0.0, 0.0};
        for (int i = 0; i < n; ++i) z += std::polar(1.0, th[i]);
        out.order_param.push_back(std::abs(z) / n);
        if (eta) out.q_theta->push_back(convex_combination(th, *eta).q);
    }
    return out;
}

} // namespace kdl
