#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "kdl/diagnostics.hpp"

namespace kdl {

struct CertificateConditions {
    bool order = false;      // D_theta(0) < zeta < xi < pi
    bool d_inf_ok = false;   // d_inf < min(pi/2, d_theta(0))
    bool eta_ok = false;     // eta above the three-way maximum
    bool tan_ok = false;     // tan(R_omega tau) below the envelope ratio
    bool quarter_ok = false; // d_inf + R_omega tau < pi/2
    bool kappa_ok = false;   // coupling exceeds the forcing threshold

    bool all() const {
        return order && d_inf_ok && eta_ok && tan_ok && quarter_ok && kappa_ok;
    }
};

/// Evaluation of the sufficient conditions for a phase-diameter trap,
/// plus every constant the decay estimates are built from. Condition
/// failures are data, not errors.
struct StrongCertificate {
    // chosen
    double zeta = 0, xi = 0, d_inf = 0, eta = 0;
    // instance scalars
    int n = 0;
    double kappa = 0, tau = 0;
    double r_omega = 0;
    double d_omega_nat = 0;        // D(Omega)
    double initial_diameter = 0;   // D_theta(0), sup over [-tau, 0]
    double endpoint_diameter = 0;  // d_theta(0)
    double q0 = 0;                 // q_theta(0) at the chosen eta
    // derived
    double beta = 0;    // 1 - 2/eta
    double c = 0;       // (sum eta^j P(2N, j) + 1) xi / sin(xi)
    double xi_star = 0; // cos(R_omega tau + d_inf)
    double lambda = 0;  // 2 kappa cos(R_omega tau) / ((N-1) c)
    double forcing = 0; // (D(Omega) + 2 kappa sin(R_omega tau)) / lambda scale

    CertificateConditions conditions;
    bool valid = false;
    bool envelope_inconclusive = false; // beta d_inf <= forcing limit
    std::optional<double> t_star;
};

StrongCertificate evaluate_certificate(const SystemParams& params,
                                       const HistorySpec& history, double zeta,
                                       double xi, double d_inf, double eta);

/// Smallest t with f(t) <= beta d_inf; zero when already inside.
double predict_t_star(const StrongCertificate& cert, double q0);

/// The decay envelope f(t) = q0 e^{-lambda t} + A (1 - e^{-lambda t})
/// together with the uniform bound max(d_theta(0), A) / beta scale.
struct GronwallEnvelope {
    double q0 = 0, lambda = 0, limit = 0;
    double uniform_bound = 0;
    double operator()(double t) const {
        const double e = std::exp(-lambda * t);
        return q0 * e + limit * (1.0 - e);
    }
};

GronwallEnvelope gronwall_envelope(const StrongCertificate& cert, double q0);

/// Windowed frequency extrema and the per-window contraction factors of
/// the strongly connected argument. Window n for vertex i is
/// [2 gamma n tau + t_star - tau_i, 2 gamma n tau + t_star].
struct ContractionLadder {
    int gamma_depth = 0;
    double c_shift = 0.0; // frequency-frame shift applied before measuring
    std::vector<double> big_m, small_m; // M_n, m_n (shifted frame)
    std::vector<double> spread;         // D_n = M_n - m_n (frame invariant)
    std::vector<double> sigma;
    std::vector<double> gamma_factor; // Gamma_n
    std::vector<double> predicted;    // D_hat_{n+1} = (1 - Gamma_n) D_hat_n
};

ContractionLadder contraction_ladder(const StrongCertificate& cert,
                                     const Trajectory& traj, int gamma_depth,
                                     int n_max);

/// Re-integrates with natural frequencies shifted so the measured m_0 is
/// positive, then measures the ladder in that frame.
ContractionLadder measure_contraction_ladder(const StrongCertificate& cert,
                                             const SystemParams& params,
                                             const HistorySpec& history,
                                             const IntegrationConfig& config,
                                             int gamma_depth, int n_max);

struct AllToAllRate {
    double contraction = 0;    // C
    double three_window = 0;   // C tilde
    double gamma_rate = 0;     // decay rate
    double envelope_scale = 0; // e^{gamma (t_star + 2 tau)} D*_omega(0)
    double t_star = 0;
    double tau = 0;
    double d_omega_star_0 = 0;
    double envelope(double t) const {
        return std::exp(-gamma_rate * (t - t_star - 2 * tau)) * d_omega_star_0;
    }
};

AllToAllRate all_to_all_rate(const StrongCertificate& cert,
                             const SystemParams& params,
                             double d_omega_star_0);

/// Sup diameters over the windows [t_star + (n-1) tau, t_star + n tau]
/// for n = 0..n_max, taken on the stored sample grid.
struct WindowedDiameters {
    std::vector<double> d_theta_star;
    std::vector<double> d_omega_star;
};

WindowedDiameters windowed_diameters(const Trajectory& traj, double t_star,
                                     double tau, int n_max);

struct CertificateGrid {
    std::vector<double> zeta, xi, d_inf, eta;
};

struct SearchResult {
    bool found = false;
    StrongCertificate best; // fully valid, or the least-violated tuple
    double best_margin = 0.0;
};

/// Deterministic grid search over (zeta, xi, d_inf, eta); returns the
/// first fully valid tuple, else the tuple maximizing the margin of the
/// tightest condition.
SearchResult search_certificate(const SystemParams& params,
                                const HistorySpec& history,
                                const CertificateGrid& grid);

struct SyncReport {
    bool synced = false;
    std::optional<double> t_sync;
};

/// Frequency synchronization verdict: d_omega below tol over the whole
/// trailing window of the run.
SyncReport sync_detect(const DiagnosticsSeries& series, double tol,
                       double window);

struct DecayFit {
    double rate = 0.0;
    double r_squared = 0.0;
};

/// Least-squares slope of ln d_omega on [t_from, end].
DecayFit fit_decay_rate(const DiagnosticsSeries& series, double t_from);

} // namespace kdl
