#include "kdl/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace kdl {

using nlohmann::json;

// ---------------------------------------------------------------------------
// embedded benchmark data (10-oscillator instances)

const Eigen::VectorXd& benchmark_natural_frequencies() {
    // zero-centered uniform draw, rounded to three decimal places
    static const Eigen::VectorXd omega = [] {
        Eigen::VectorXd v(10);
        v << -0.563, 0.839, -0.119, 0.904, -0.493, -0.063, 0.603, 0.979,
            -0.101, -0.060;
        return v;
    }();
    return omega;
}

const Eigen::VectorXd& benchmark_initial_phases() {
    // uniform draw in the half circle, constant history
    static const Eigen::VectorXd theta0 = [] {
        Eigen::VectorXd v(10);
        v << 1.714, 2.892, 2.684, 1.543, 1.081, 0.007, 2.025, 1.012, 1.228,
            1.955;
        return v;
    }();
    return theta0;
}

const Eigen::MatrixXd& standardized_delays() {
    // standardized delay matrix in [0, 1], receiver-indexed rows; applied
    // delays are this matrix times a scale factor
    static const Eigen::MatrixXd tau = [] {
        Eigen::MatrixXd m(10, 10);
        m << 0.941, 0.432, 0.440, 0.953, 0.497, 0.126, 0.941, 0.501, 0.361, 0.901,
             0.017, 0.948, 0.088, 0.075, 0.942, 0.478, 0.180, 0.982, 0.335, 0.941,
             0.459, 0.368, 0.573, 0.911, 0.980, 0.696, 0.368, 0.864, 0.924, 0.543,
             0.712, 0.871, 0.684, 0.650, 0.381, 0.600, 0.243, 0.120, 0.259, 0.446,
             0.345, 0.702, 0.383, 0.505, 0.291, 0.089, 0.717, 0.224, 0.465, 0.594,
             0.673, 0.415, 0.279, 0.893, 0.644, 0.248, 0.768, 0.537, 0.420, 0.097,
             0.222, 0.105, 0.697, 0.748, 0.436, 0.054, 0.170, 0.945, 0.892, 0.398,
             0.141, 0.443, 0.434, 0.020, 0.719, 0.657, 0.587, 0.807, 0.821, 0.214,
             0.070, 0.369, 0.881, 0.776, 0.255, 0.733, 0.567, 0.276, 0.721, 0.284,
             0.342, 0.202, 0.558, 0.448, 0.632, 0.011, 0.406, 0.038, 0.305, 0.086;
        return m;
    }();
    return tau;
}

// ---------------------------------------------------------------------------
// config

SystemParams RunConfig::resolve_params() const {
    const int n = static_cast<int>(omega.size());
    DigraphTopology topo;
    if (std::holds_alternative<std::string>(topology)) {
        const auto& name = std::get<std::string>(topology);
        if (name == "all_to_all")
            topo = all_to_all_topology(n);
        else if (name == "ring")
            topo = ring_topology(n);
        else
            throw ParseError("unknown topology keyword: " + name);
    } else {
        topo = build_topology(std::get<Eigen::MatrixXi>(topology));
    }
    return SystemParams::make(omega, kappa, delays, topo);
}

namespace {

Eigen::VectorXd to_vector(const json& j, const std::string& field) {
    if (!j.is_array()) throw ParseError("field '" + field + "' must be an array");
    Eigen::VectorXd v(j.size());
    for (size_t k = 0; k < j.size(); ++k) v[k] = j[k].get<double>();
    return v;
}

template <class Mat>
Mat to_matrix(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw ParseError("field '" + field + "' must be a nested array");
    Mat m(j.size(), j[0].size());
    for (size_t r = 0; r < j.size(); ++r) {
        if (j[r].size() != j[0].size())
            throw ParseError("ragged rows in '" + field + "'");
        for (size_t c = 0; c < j[r].size(); ++c)
            m(r, c) = j[r][c].get<typename Mat::Scalar>();
    }
    return m;
}

int auto_stride(const IntegrationConfig& cfg) {
    const double samples = cfg.t_end / cfg.dt;
    return std::max(1, static_cast<int>(std::ceil(samples / 20000.0)));
}

} // namespace

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config parse failure: ") + e.what());
    }

    RunConfig cfg;
    if (!j.contains("omega")) throw ParseError("missing field 'omega'");
    cfg.omega = to_vector(j["omega"], "omega");
    const int n = static_cast<int>(cfg.omega.size());

    if (!j.contains("kappa")) throw ParseError("missing field 'kappa'");
    cfg.kappa = j["kappa"].get<double>();
    if (cfg.kappa < 0) throw NegativeValue("kappa must be nonnegative");

    if (j.contains("topology") && j["topology"].is_array())
        cfg.topology = to_matrix<Eigen::MatrixXi>(j["topology"], "topology");
    else
        cfg.topology = j.value("topology", std::string("all_to_all"));

    if (!j.contains("delays")) {
        cfg.delays = Eigen::MatrixXd::Zero(n, n);
    } else if (j["delays"].is_array()) {
        cfg.delays = to_matrix<Eigen::MatrixXd>(j["delays"], "delays");
    } else {
        const auto& d = j["delays"];
        const double scale = d.value("scale", 0.0);
        if (scale < 0) throw NegativeValue("delay scale must be nonnegative");
        if (d.value("standardized", false)) {
            if (n != 10)
                throw DimensionMismatch(
                    "standardized delays are a 10x10 table");
            cfg.delays = scale * standardized_delays();
        } else {
            cfg.delays = Eigen::MatrixXd::Constant(n, n, scale);
        }
    }
    if (cfg.delays.rows() != n || cfg.delays.cols() != n)
        throw DimensionMismatch("delay matrix does not match omega length");
    if ((cfg.delays.array() < 0).any())
        throw NegativeValue("delays must be nonnegative");

    if (!j.contains("history")) throw ParseError("missing field 'history'");
    const auto& h = j["history"];
    if (h.contains("constant")) {
        Eigen::VectorXd phases = to_vector(h["constant"], "history.constant");
        if (phases.size() != n)
            throw DimensionMismatch("history length does not match omega");
        cfg.history = HistorySpec::constant(std::move(phases));
    } else if (h.contains("sampled")) {
        const auto& s = h["sampled"];
        cfg.history = HistorySpec::sampled(
            to_vector(s["times"], "history.sampled.times"),
            to_matrix<Eigen::MatrixXd>(s["phases"], "history.sampled.phases"),
            to_matrix<Eigen::MatrixXd>(s["derivs"], "history.sampled.derivs"));
        if (cfg.history.size() != n)
            throw DimensionMismatch("history width does not match omega");
    } else {
        throw ParseError("history must be 'constant' or 'sampled'");
    }

    if (j.contains("integration")) {
        const auto& g = j["integration"];
        cfg.integration.t_end = g.value("t_end", 200.0);
        cfg.integration.dt = g.value("dt", 0.01);
        cfg.integration.sample_stride = g.value("sample_stride", 0);
    }
    if (cfg.integration.dt <= 0 || cfg.integration.t_end <= 0)
        throw NegativeValue("dt and t_end must be positive");
    if (cfg.integration.sample_stride <= 0)
        cfg.integration.sample_stride = auto_stride(cfg.integration);

    if (j.contains("diagnostics")) {
        const auto& d = j["diagnostics"];
        if (d.contains("eta")) cfg.eta = d["eta"].get<double>();
        cfg.sync_tol = d.value("sync_tol", 1e-6);
        cfg.sync_window = d.value("sync_window", 0.0);
        if (d.contains("fit_from")) cfg.fit_from = d["fit_from"].get<double>();
    }

    if (j.contains("certificate")) {
        CertificateRequest req;
        if (j["certificate"].is_string()) {
            if (j["certificate"].get<std::string>() != "search")
                throw ParseError("certificate must be parameters or 'search'");
            req.search = true;
        } else {
            const auto& c = j["certificate"];
            req.zeta = c.at("zeta").get<double>();
            req.xi = c.at("xi").get<double>();
            req.d_inf = c.at("d_inf").get<double>();
            req.eta = c.at("eta").get<double>();
        }
        cfg.certificate = req;
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// scenario library

const std::vector<std::string>& benchmark_scenario_ids() {
    static const std::vector<std::string> ids = {
        "a2a_k2_t0", "a2a_k2_t5x", "ring_k2_t0", "ring_k8_t0", "ring_k8_t30x"};
    return ids;
}

BenchmarkScenario benchmark_scenario(const std::string& id) {
    BenchmarkScenario sc;
    sc.id = id;
    RunConfig& cfg = sc.config;
    cfg.omega = benchmark_natural_frequencies();
    cfg.history = HistorySpec::constant(benchmark_initial_phases());

    double scale = 0.0;
    if (id == "a2a_k2_t0") {
        cfg.topology = std::string("all_to_all");
        cfg.kappa = 2.0;
        cfg.integration.t_end = 200.0;
        cfg.fit_from = 10.0;
    } else if (id == "a2a_k2_t5x") {
        cfg.topology = std::string("all_to_all");
        cfg.kappa = 2.0;
        scale = 5.0;
        cfg.integration.t_end = 200.0;
    } else if (id == "ring_k2_t0") {
        cfg.topology = std::string("ring");
        cfg.kappa = 2.0;
        cfg.integration.t_end = 500.0;
    } else if (id == "ring_k8_t0") {
        cfg.topology = std::string("ring");
        cfg.kappa = 8.0;
        cfg.integration.t_end = 500.0;
    } else if (id == "ring_k8_t30x") {
        cfg.topology = std::string("ring");
        cfg.kappa = 8.0;
        scale = 30.0;
        cfg.integration.t_end = 600.0;
        cfg.sync_tol = 1e-3;
    } else {
        throw UnknownScenario("unknown scenario id: " + id);
    }
    cfg.delays = scale * standardized_delays();
    cfg.integration.dt = 0.01;
    cfg.integration.sample_stride = auto_stride(cfg.integration);
    return sc;
}

// ---------------------------------------------------------------------------
// run

RunResult run(const RunConfig& config) {
    const SystemParams params = config.resolve_params();
    Trajectory traj = integrate(params, config.history, config.integration);
    DiagnosticsSeries diag = diagnostics_over(traj, config.eta);
    const double window = config.sync_window > 0
                              ? config.sync_window
                              : config.integration.t_end / 4.0;
    SyncReport sync = sync_detect(diag, config.sync_tol, window);

    RunResult res{std::move(traj), std::move(diag), sync, {}, {}, {}};
    if (config.fit_from) {
        try {
            res.decay = fit_decay_rate(res.diagnostics, *config.fit_from);
        } catch (const InsufficientSamples&) {
            // tail entirely below the clip threshold; leave decay empty
        }
    }
    if (config.certificate) {
        const auto& req = *config.certificate;
        if (req.search) {
            CertificateGrid grid;
            const double d0 = res.diagnostics.initial_theta_diameter;
            const double dcap =
                std::min(M_PI / 2, phase_diameter(res.trajectory.phases_at(0.0)));
            for (int k = 1; k <= 8; ++k) {
                grid.zeta.push_back(d0 + k / 10.0 * (M_PI - d0));
                grid.xi.push_back(d0 + k / 9.0 * (M_PI - d0));
                grid.d_inf.push_back(k / 9.0 * dcap);
            }
            grid.eta = {2.5, 3, 4, 4.5, 5, 6, 8, 12, 20, 50};
            res.search = search_certificate(params, config.history, grid);
            res.certificate = res.search->best;
        } else {
            res.certificate = evaluate_certificate(params, config.history,
                                                   req.zeta, req.xi, req.d_inf,
                                                   req.eta);
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// emission

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_csv(const DiagnosticsSeries& series, const Trajectory& traj,
               const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);

    const int n = traj.params().size();
    out << "t";
    for (int i = 1; i <= n; ++i) out << ",theta_" << i;
    for (int i = 1; i <= n; ++i) out << ",omega_" << i;
    out << ",d_theta,d_omega,q_theta,order_param\n";

    const auto idx = traj.sample_indices();
    for (size_t k = 0; k < idx.size(); ++k) {
        const int m = idx[k];
        out << fmt_double(series.times[k]);
        for (int i = 0; i < n; ++i) out << ',' << fmt_double(traj.phases()(m, i));
        for (int i = 0; i < n; ++i) out << ',' << fmt_double(traj.derivs()(m, i));
        out << ',' << fmt_double(series.d_theta[k]);
        out << ',' << fmt_double(series.d_omega[k]);
        out << ',';
        if (series.q_theta) out << fmt_double((*series.q_theta)[k]);
        out << ',' << fmt_double(series.order_param[k]) << '\n';
    }
    if (!out) throw IoError("write failure: " + path);
}

void emit_plot_script(const std::string& csv_path,
                      const std::string& out_path) {
    std::ifstream probe(csv_path);
    if (!probe) throw IoError("csv does not exist: " + csv_path);
    std::string header;
    std::getline(probe, header);
    int cols = 1;
    for (char ch : header) cols += ch == ',';
    const int n = (cols - 5) / 2;

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + out_path);
    out << "# gnuplot script, generated\n"
        << "set datafile separator ','\n"
        << "csv = '" << csv_path << "'\n"
        << "set key off\n"
        << "set terminal pngcairo size 1200,500\n\n"
        << "set output 'trajectories.png'\n"
        << "set multiplot layout 1,2\n"
        << "set title 'phases'\n"
        << "set xlabel 't'\n"
        << "plot for [i=2:" << (n + 1) << "] csv using 1:i with lines\n"
        << "set title 'frequencies'\n"
        << "plot for [i=" << (n + 2) << ":" << (2 * n + 1)
        << "] csv using 1:i with lines\n"
        << "unset multiplot\n\n"
        << "set output 'diameters.png'\n"
        << "set multiplot layout 1,2\n"
        << "set title 'diameters'\n"
        << "plot csv using 1:" << (2 * n + 2)
        << " with lines title 'd_theta', csv using 1:" << (2 * n + 3)
        << " with lines title 'd_omega'\n"
        << "set title 'd_omega (log scale)'\n"
        << "set logscale y\n"
        << "plot csv using 1:" << (2 * n + 3) << " with lines\n"
        << "unset multiplot\n";
}

std::string certificate_report(const StrongCertificate& cert) {
    std::ostringstream os;
    auto line = [&](const std::string& k, const std::string& v) {
        os << k << ": " << v << "\n";
    };
    auto num = [&](const std::string& k, double v) { line(k, fmt_double(v)); };
    auto yn = [&](const std::string& k, bool v) { line(k, v ? "pass" : "fail"); };
    num("zeta", cert.zeta);
    num("xi", cert.xi);
    num("d_inf", cert.d_inf);
    num("eta", cert.eta);
    num("beta", cert.beta);
    num("c", cert.c);
    num("r_omega", cert.r_omega);
    num("xi_star", cert.xi_star);
    num("initial_diameter", cert.initial_diameter);
    num("natural_frequency_diameter", cert.d_omega_nat);
    yn("condition_order", cert.conditions.order);
    yn("condition_d_inf", cert.conditions.d_inf_ok);
    yn("condition_eta", cert.conditions.eta_ok);
    yn("condition_tan", cert.conditions.tan_ok);
    yn("condition_quarter_circle", cert.conditions.quarter_ok);
    yn("condition_kappa", cert.conditions.kappa_ok);
    line("valid", cert.valid ? "true" : "false");
    if (cert.envelope_inconclusive) line("envelope", "inconclusive");
    if (cert.t_star) num("t_star", *cert.t_star);
    return os.str();
}

std::string certificate_json(const StrongCertificate& cert) {
    json j;
    j["zeta"] = cert.zeta;
    j["xi"] = cert.xi;
    j["d_inf"] = cert.d_inf;
    j["eta"] = cert.eta;
    j["beta"] = cert.beta;
    j["c"] = cert.c;
    j["r_omega"] = cert.r_omega;
    j["xi_star"] = cert.xi_star;
    j["conditions"] = {{"order", cert.conditions.order},
                       {"d_inf", cert.conditions.d_inf_ok},
                       {"eta", cert.conditions.eta_ok},
                       {"tan", cert.conditions.tan_ok},
                       {"quarter_circle", cert.conditions.quarter_ok},
                       {"kappa", cert.conditions.kappa_ok}};
    j["valid"] = cert.valid;
    j["envelope_inconclusive"] = cert.envelope_inconclusive;
    if (cert.t_star) j["t_star"] = *cert.t_star;
    return j.dump(2);
}

} // namespace kdl
