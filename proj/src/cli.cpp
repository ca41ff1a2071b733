#include "kdl/scenario.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

namespace kdl {

namespace {

std::string run_summary(const RunResult& res, const RunConfig& cfg) {
    std::ostringstream os;
    os << "t_end: " << cfg.integration.t_end << "\n"
       << "step: " << res.trajectory.step() << "\n"
       << "samples: " << res.diagnostics.times.size() << "\n"
       << "D_theta(0): " << res.diagnostics.initial_theta_diameter << "\n"
       << "D_omega(0): " << res.diagnostics.initial_omega_diameter << "\n"
       << "D(Omega): " << res.diagnostics.d_omega_natural << "\n"
       << "final d_theta: " << res.diagnostics.d_theta.back() << "\n"
       << "final d_omega: " << res.diagnostics.d_omega.back() << "\n"
       << "synced: " << (res.sync.synced ? "true" : "false") << "\n";
    if (res.sync.t_sync) os << "t_sync: " << *res.sync.t_sync << "\n";
    if (res.decay)
        os << "decay_rate: " << res.decay->rate
           << "\ndecay_r_squared: " << res.decay->r_squared << "\n";
    if (res.certificate) os << "\n" << certificate_report(*res.certificate);
    return os.str();
}

void reproduce_one(const std::string& id, const std::string& out_dir) {
    const BenchmarkScenario sc = benchmark_scenario(id);
    const RunResult res = run(sc.config);
    const std::string base = out_dir + "/" + id;
    write_csv(res.diagnostics, res.trajectory, base + ".csv");
    std::ofstream rep(base + "_report.txt", std::ios::binary);
    if (!rep) throw IoError("cannot open for writing: " + base + "_report.txt");
    rep << "scenario: " << id << "\n" << run_summary(res, sc.config);
    emit_plot_script(base + ".csv", base + "_plot.gp");
}

// Maps d_omega-column CSVs back to a series for the rate fit.
DiagnosticsSeries read_csv_diameters(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open csv: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty csv: " + path);

    std::vector<std::string> header;
    std::stringstream hs(line);
    for (std::string f; std::getline(hs, f, ',');) header.push_back(f);
    int t_col = -1, dw_col = -1;
    for (size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "t") t_col = static_cast<int>(c);
        if (header[c] == "d_omega") dw_col = static_cast<int>(c);
    }
    if (t_col < 0 || dw_col < 0)
        throw ParseError("csv lacks t/d_omega columns: " + path);

    DiagnosticsSeries series;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::vector<std::string> row;
        for (std::string f; std::getline(ls, f, ',');) row.push_back(f);
        if (static_cast<int>(row.size()) <= std::max(t_col, dw_col))
            throw ParseError("short csv row in " + path);
        series.times.push_back(std::stod(row[t_col]));
        series.d_omega.push_back(std::stod(row[dw_col]));
    }
    return series;
}

int selftest() {
    int failures = 0;
    auto check = [&](const std::string& name, bool ok) {
        std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "\n";
        if (!ok) ++failures;
    };

    // smooth undelayed instance: classical fourth-order behavior
    {
        Eigen::VectorXd omega(3);
        omega << 0.3, -0.1, 0.25;
        Eigen::VectorXd theta0(3);
        theta0 << 0.4, 1.1, -0.2;
        auto params = SystemParams::make(omega, 1.2, Eigen::MatrixXd::Zero(3, 3),
                                         all_to_all_topology(3));
        auto rep = convergence_order(params, HistorySpec::constant(theta0), 2.0,
                                     0.02);
        check("convergence order (no delay) in [3.7, 4.3]",
              rep.order >= 3.7 && rep.order <= 4.3);
    }
    // delayed instance past the startup discontinuities
    {
        Eigen::VectorXd omega(2);
        omega << 0.1, -0.1;
        Eigen::VectorXd theta0(2);
        theta0 << 0.0, 0.5;
        auto params =
            SystemParams::make(omega, 1.0, Eigen::MatrixXd::Constant(2, 2, 0.1),
                               all_to_all_topology(2));
        auto rep = convergence_order(params, HistorySpec::constant(theta0), 1.0,
                                     0.01);
        check("convergence order (delayed) >= 2.7", rep.order >= 2.7);
    }
    // uncoupled drift is exact
    {
        Eigen::VectorXd omega(3);
        omega << 1.0, -0.5, 0.25;
        Eigen::VectorXd theta0(3);
        theta0 << 0.1, 0.2, 0.3;
        auto params = SystemParams::make(omega, 0.0,
                                         Eigen::MatrixXd::Constant(3, 3, 0.5),
                                         all_to_all_topology(3));
        auto traj = integrate(params, HistorySpec::constant(theta0),
                              {10.0, 0.01, 1});
        const Eigen::VectorXd expect = theta0 + 10.0 * omega;
        check("uncoupled linear drift exact to 1e-10",
              (traj.phases_at(10.0) - expect).cwiseAbs().maxCoeff() < 1e-10);
    }
    // velocity bound along a benchmark run
    {
        const BenchmarkScenario sc = benchmark_scenario("a2a_k2_t5x");
        RunConfig cfg = sc.config;
        cfg.integration.t_end = 20.0;
        auto params = cfg.resolve_params();
        auto traj = integrate(params, cfg.history, cfg.integration);
        check("velocity bound holds",
              traj.derivs().cwiseAbs().maxCoeff() <= params.r_omega + 1e-9);
    }
    std::cout << (failures ? "selftest: FAIL\n" : "selftest: PASS\n");
    return failures ? 3 : 0;
}

} // namespace

int cli(int argc, char** argv) {
    CLI::App app{"delayed Kuramoto simulation and synchronization analysis"};
    app.require_subcommand(1);

    std::string config_path, csv_path, plots_dir, scenario_id, out_dir;
    double rate_from = 0.0;
    bool force_search = false;

    auto* sim = app.add_subcommand("simulate", "integrate a configured system");
    sim->add_option("--config", config_path, "config file")->required();
    sim->add_option("--csv", csv_path, "trajectory CSV output path");
    sim->add_option("--plots", plots_dir, "directory for the plot script");

    auto* rep = app.add_subcommand("reproduce", "run an embedded scenario");
    rep->add_option("--scenario", scenario_id, "scenario id or 'all'")
        ->required();
    rep->add_option("--out", out_dir, "output directory")->required();

    auto* cert = app.add_subcommand("certify", "evaluate the sync certificate");
    cert->add_option("--config", config_path, "config file")->required();
    cert->add_flag("--search", force_search, "grid-search the parameters");

    auto* rate = app.add_subcommand("rate", "fit a decay rate from a CSV");
    rate->add_option("--csv", csv_path, "trajectory CSV")->required();
    rate->add_option("--from", rate_from, "fit window start time")->required();

    app.add_subcommand("selftest", "integrator and invariant checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) {
            RunConfig cfg = load_config(config_path);
            const RunResult res = run(cfg);
            std::cout << run_summary(res, cfg);
            if (!csv_path.empty()) {
                write_csv(res.diagnostics, res.trajectory, csv_path);
                if (!plots_dir.empty())
                    emit_plot_script(csv_path, plots_dir + "/plot.gp");
            } else if (!plots_dir.empty()) {
                const std::string tmp = plots_dir + "/run.csv";
                write_csv(res.diagnostics, res.trajectory, tmp);
                emit_plot_script(tmp, plots_dir + "/plot.gp");
            }
            return 0;
        }
        if (rep->parsed()) {
            std::vector<std::string> ids;
            if (scenario_id == "all")
                ids = benchmark_scenario_ids();
            else
                ids.push_back(scenario_id);

            int threads = static_cast<int>(ids.size());
            if (const char* env = std::getenv("KDL_THREADS")) {
                const int cap = std::atoi(env);
                if (cap > 0) threads = std::min(threads, cap);
            }
            std::mutex mu;
            std::vector<std::string> errors;
            size_t next = 0;
            auto worker = [&] {
                for (;;) {
                    size_t k;
                    {
                        std::lock_guard<std::mutex> lock(mu);
                        if (next >= ids.size()) return;
                        k = next++;
                    }
                    try {
                        reproduce_one(ids[k], out_dir);
                        std::lock_guard<std::mutex> lock(mu);
                        std::cout << "wrote " << out_dir << "/" << ids[k]
                                  << ".csv\n";
                    } catch (const std::exception& e) {
                        std::lock_guard<std::mutex> lock(mu);
                        errors.push_back(ids[k] + ": " + e.what());
                    }
                }
            };
            std::vector<std::thread> pool;
            for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
            for (const auto& msg : errors) std::cerr << msg << "\n";
            if (!errors.empty()) {
                for (const auto& msg : errors)
                    if (msg.find("unknown scenario") != std::string::npos)
                        return 1;
                return 2;
            }
            return 0;
        }
        if (cert->parsed()) {
            RunConfig cfg = load_config(config_path);
            if (!cfg.certificate || force_search) {
                CertificateRequest req;
                req.search = force_search || !cfg.certificate ||
                             cfg.certificate->search;
                if (!req.search) req = *cfg.certificate;
                cfg.certificate = req;
            }
            const RunResult res = run(cfg);
            if (res.certificate) {
                std::cout << certificate_report(*res.certificate) << "\n"
                          << certificate_json(*res.certificate) << "\n";
            } else {
                std::cout << "certificate: NotFound\n";
            }
            return 0;
        }
        if (rate->parsed()) {
            const DiagnosticsSeries series = read_csv_diameters(csv_path);
            const DecayFit fit = fit_decay_rate(series, rate_from);
            std::cout << "rate: " << fit.rate
                      << "\nr_squared: " << fit.r_squared << "\n";
            return 0;
        }
        return selftest();
    } catch (const UnknownScenario& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace kdl
