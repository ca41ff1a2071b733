#pragma once

#include <optional>
#include <string>
#include <variant>

#include "kdl/certificates.hpp"

namespace kdl {

struct CertificateRequest {
    bool search = false;
    double zeta = 0, xi = 0, d_inf = 0, eta = 0;
};

struct RunConfig {
    std::variant<std::string, Eigen::MatrixXi> topology; // "all_to_all"/"ring" or matrix
    Eigen::VectorXd omega;
    double kappa = 0.0;
    Eigen::MatrixXd delays;
    HistorySpec history = HistorySpec::constant(Eigen::VectorXd());
    IntegrationConfig integration;
    std::optional<double> eta;
    double sync_tol = 1e-6;
    double sync_window = 0.0; // 0: quarter of the horizon
    std::optional<double> fit_from;
    std::optional<CertificateRequest> certificate;

    SystemParams resolve_params() const;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

/// The embedded numerical-experiment instances.
struct BenchmarkScenario {
    std::string id;
    RunConfig config;
};

BenchmarkScenario benchmark_scenario(const std::string& id);
const std::vector<std::string>& benchmark_scenario_ids();

/// Raw embedded data (scale 1 standardized delays, natural frequencies,
/// initial phases).
const Eigen::MatrixXd& standardized_delays();
const Eigen::VectorXd& benchmark_natural_frequencies();
const Eigen::VectorXd& benchmark_initial_phases();

struct RunResult {
    Trajectory trajectory;
    DiagnosticsSeries diagnostics;
    SyncReport sync;
    std::optional<DecayFit> decay;
    std::optional<StrongCertificate> certificate;
    std::optional<SearchResult> search;
};

RunResult run(const RunConfig& config);

void write_csv(const DiagnosticsSeries& series, const Trajectory& traj,
               const std::string& path);

/// Standalone gnuplot script rendering a trajectories panel and a
/// diameters panel (linear plus log-scale d_omega) from the CSV.
void emit_plot_script(const std::string& csv_path, const std::string& out_path);

std::string certificate_report(const StrongCertificate& cert);
std::string certificate_json(const StrongCertificate& cert);

int cli(int argc, char** argv);

} // namespace kdl
