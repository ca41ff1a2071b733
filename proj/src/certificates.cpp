#include "kdl/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kdl {

namespace {

// sum_{j=1}^{N-1} eta^j P(2N, j), evaluated by the recurrence form
double coefficient_sum(int n, double eta) {
    double sum = 0.0;
    double term = 1.0;
    for (int j = 1; j <= n - 1; ++j) {
        term *= eta * (2 * n - j + 1); // eta^j P(2N, j)
        sum += term;
    }
    return sum;
}

} // namespace

StrongCertificate evaluate_certificate(const SystemParams& params,
                                       const HistorySpec& history, double zeta,
                                       double xi, double d_inf, double eta) {
    StrongCertificate cert;
    cert.zeta = zeta;
    cert.xi = xi;
    cert.d_inf = d_inf;
    cert.eta = eta;
    cert.n = params.size();
    cert.kappa = params.kappa;
    cert.tau = params.tau_max;
    cert.r_omega = params.r_omega;
    cert.d_omega_nat = natural_freq_diameter(params.omega);

    auto [dth0, dom0] = initial_diameters(history, params.tau_max);
    cert.initial_diameter = dth0;
    cert.endpoint_diameter = phase_diameter(history.phases_at(0.0));

    cert.beta = 1.0 - 2.0 / eta;
    cert.c = (coefficient_sum(cert.n, eta) + 1.0) * xi / std::sin(xi);

    const double rt = cert.r_omega * cert.tau;
    const bool trig_defined = rt < M_PI / 2;
    cert.xi_star = std::cos(rt + d_inf);

    auto& cond = cert.conditions;
    cond.order = cert.initial_diameter < zeta && zeta < xi && xi < M_PI;
    cond.d_inf_ok = d_inf < std::min(M_PI / 2, cert.endpoint_diameter) && d_inf > 0;
    cond.quarter_ok = d_inf + rt < M_PI / 2;

    const double crowd = 1.0 + zeta / (zeta - cert.initial_diameter);
    if (trig_defined && zeta > cert.initial_diameter && zeta < xi) {
        const double eta_min = std::max(
            {1.0 / std::sin(xi), 1.0 / std::cos(rt), 2.0 / (1.0 - zeta / xi)});
        cond.eta_ok = eta > eta_min;
        cond.tan_ok = std::tan(rt) <
                      cert.beta * d_inf / (crowd * 2.0 * (cert.n - 1) * cert.c);
        cond.kappa_ok =
            cert.kappa > crowd *
                             (cert.d_omega_nat +
                              2.0 * cert.kappa * std::sin(rt)) *
                             (cert.n - 1) * cert.c /
                             (2.0 * std::cos(rt) * cert.beta * d_inf);
    }

    // decay rate lambda and the forcing limit A of the q_theta envelope
    cert.lambda = trig_defined
                      ? 2.0 * cert.kappa * std::cos(rt) / ((cert.n - 1) * cert.c)
                      : 0.0;
    cert.forcing = (trig_defined && cert.kappa > 0.0)
                       ? (cert.d_omega_nat + 2.0 * cert.kappa * std::sin(rt)) *
                             (cert.n - 1) * cert.c /
                             (2.0 * cert.kappa * std::cos(rt))
                       : std::numeric_limits<double>::infinity();

    cert.valid = cond.all();

    cert.q0 = convex_combination(history.phases_at(0.0), eta).q;
    if (cert.valid) {
        if (!(cert.beta * cert.d_inf > cert.forcing)) {
            cert.envelope_inconclusive = true;
        } else {
            cert.t_star = predict_t_star(cert, cert.q0);
        }
    }
    return cert;
}

double predict_t_star(const StrongCertificate& cert, double q0) {
    if (!cert.valid) throw CertificateInvalid("t_star needs a valid certificate");
    const double target = cert.beta * cert.d_inf;
    if (q0 <= target) return 0.0;
    if (!(target > cert.forcing))
        throw CertificateInvalid("envelope never reaches beta d_inf");
    return std::log((q0 - cert.forcing) / (target - cert.forcing)) / cert.lambda;
}

GronwallEnvelope gronwall_envelope(const StrongCertificate& cert, double q0) {
    if (!cert.valid)
        throw CertificateInvalid("envelope needs a valid certificate");
    GronwallEnvelope env;
    env.q0 = q0;
    env.lambda = cert.lambda;
    env.limit = cert.forcing;
    env.uniform_bound = std::max(cert.endpoint_diameter, cert.forcing);
    return env;
}

ContractionLadder contraction_ladder(const StrongCertificate& cert,
                                     const Trajectory& traj, int gamma_depth,
                                     int n_max) {
    if (!cert.valid || !cert.t_star)
        throw CertificateInvalid("ladder needs a valid certificate");
    if (cert.tau <= 0.0)
        throw ZeroDelay("contraction factor degenerates at tau = 0");

    const SystemParams& p = traj.params();
    const int n = p.size();
    const double t_star = *cert.t_star;
    const double tau = cert.tau;
    const double horizon = t_star + 2.0 * gamma_depth * n_max * tau;
    if (traj.t_end() + 1e-12 < horizon)
        throw HorizonTooShort("trajectory ends before the last ladder window");

    ContractionLadder lad;
    lad.gamma_depth = gamma_depth;

    // window extrema on the stored grid
    const double h = traj.step();
    for (int w = 0; w <= n_max; ++w) {
        const double anchor = 2.0 * gamma_depth * w * tau + t_star;
        double big = -std::numeric_limits<double>::infinity();
        double small = -big;
        for (int i = 0; i < n; ++i) {
            const double lo = anchor - p.tau_i[i];
            long a = std::max(0L, static_cast<long>(std::ceil(lo / h - 1e-9)));
            long b = std::min(static_cast<long>(traj.times().size()) - 1,
                              static_cast<long>(std::floor(anchor / h + 1e-9)));
            for (long m = a; m <= b; ++m) {
                big = std::max(big, traj.derivs()(m, i));
                small = std::min(small, traj.derivs()(m, i));
            }
        }
        lad.big_m.push_back(big);
        lad.small_m.push_back(small);
        lad.spread.push_back(big - small);
    }

    const double base = std::pow(cert.xi_star / (n - 1), gamma_depth) *
                        std::exp(-2.0 * cert.kappa * gamma_depth * tau) *
                        std::pow(1.0 - std::exp(-cert.kappa * tau / (n - 1)),
                                 gamma_depth - 1);
    double predicted = lad.spread[0];
    lad.predicted.push_back(predicted);
    for (int w = 0; w <= n_max; ++w) {
        const double sigma =
            std::min(p.tau_0, lad.spread[w] / (4.0 * cert.kappa * cert.r_omega));
        lad.sigma.push_back(sigma);
        const double gamma_w =
            base * (1.0 - std::exp(-cert.kappa * sigma / (n - 1)));
        lad.gamma_factor.push_back(gamma_w);
        if (w < n_max) {
            predicted *= 1.0 - gamma_w;
            lad.predicted.push_back(predicted);
        }
    }
    return lad;
}

ContractionLadder measure_contraction_ladder(const StrongCertificate& cert,
                                             const SystemParams& params,
                                             const HistorySpec& history,
                                             const IntegrationConfig& config,
                                             int gamma_depth, int n_max) {
    if (!cert.valid || !cert.t_star)
        throw CertificateInvalid("ladder needs a valid certificate");

    // probe the unshifted frame for m_0, then shift all Omega so m_0 > 0
    Trajectory probe = integrate(params, history, config);
    ContractionLadder raw = contraction_ladder(cert, probe, gamma_depth, n_max);
    const double eps = 0.1;
    const double c_shift = std::max(0.0, eps - raw.small_m[0]);
    if (c_shift == 0.0) {
        raw.c_shift = 0.0;
        return raw;
    }
    SystemParams shifted = params;
    shifted.omega.array() += c_shift;
    // R_omega and the certificate constants stay in the original frame
    Trajectory traj = integrate(shifted, history, config);
    ContractionLadder lad = contraction_ladder(cert, traj, gamma_depth, n_max);
    lad.c_shift = c_shift;
    return lad;
}

AllToAllRate all_to_all_rate(const StrongCertificate& cert,
                             const SystemParams& params,
                             double d_omega_star_0) {
    if (!params.topology.is_all_to_all())
        throw NotAllToAll("rate formula requires all-to-all coupling");
    if (!(cert.tau > 0.0))
        throw ZeroDelay("rate formula degenerates at tau = 0");
    if (!cert.valid || !cert.t_star)
        throw CertificateInvalid("rate needs a valid certificate");

    AllToAllRate r;
    r.tau = cert.tau;
    r.t_star = *cert.t_star;
    r.d_omega_star_0 = d_omega_star_0;
    const double ekt = std::exp(-cert.kappa * cert.tau);
    r.contraction =
        std::max(1.0 - std::exp(-2.0 * cert.kappa * cert.tau),
                 1.0 - cert.xi_star / (cert.n - 1) * (1.0 - ekt));
    r.three_window = 1.0 - ekt * (1.0 - r.contraction);
    r.gamma_rate = std::log(1.0 / r.three_window) / (3.0 * cert.tau);
    r.envelope_scale =
        std::exp(r.gamma_rate * (r.t_star + 2.0 * cert.tau)) * d_omega_star_0;
    return r;
}

WindowedDiameters windowed_diameters(const Trajectory& traj, double t_star,
                                     double tau, int n_max) {
    const double h = traj.step();
    const int n = traj.params().size();
    if (traj.t_end() + 1e-12 < t_star + n_max * tau)
        throw HorizonTooShort("trajectory ends before the last window");
    if (t_star - tau < 0.0)
        throw HorizonTooShort("window 0 starts before t = 0");

    WindowedDiameters out;
    for (int w = 0; w <= n_max; ++w) {
        const double lo = t_star + (w - 1) * tau;
        const double hi = t_star + w * tau;
        long a = std::max(0L, static_cast<long>(std::ceil(lo / h - 1e-9)));
        long b = std::min(static_cast<long>(traj.times().size()) - 1,
                          static_cast<long>(std::floor(hi / h + 1e-9)));
        double th_min = std::numeric_limits<double>::infinity();
        double th_max = -th_min, om_min = th_min, om_max = -th_min;
        for (long m = a; m <= b; ++m) {
            for (int i = 0; i < n; ++i) {
                th_min = std::min(th_min, traj.phases()(m, i));
                th_max = std::max(th_max, traj.phases()(m, i));
                om_min = std::min(om_min, traj.derivs()(m, i));
                om_max = std::max(om_max, traj.derivs()(m, i));
            }
        }
        out.d_theta_star.push_back(th_max - th_min);
        out.d_omega_star.push_back(om_max - om_min);
    }
    return out;
}

namespace {

// signed margin of the tightest condition; positive iff all pass
double certificate_margin(const StrongCertificate& cert) {
    const double rt = cert.r_omega * cert.tau;
    const double crowd = 1.0 + cert.zeta / (cert.zeta - cert.initial_diameter);
    double m = std::numeric_limits<double>::infinity();
    auto acc = [&](double v) { m = std::min(m, v); };
    acc(cert.zeta - cert.initial_diameter);
    acc(cert.xi - cert.zeta);
    acc(M_PI - cert.xi);
    acc(std::min(M_PI / 2, cert.endpoint_diameter) - cert.d_inf);
    acc(cert.d_inf);
    if (rt < M_PI / 2 && cert.zeta > cert.initial_diameter &&
        cert.zeta < cert.xi) {
        const double eta_min =
            std::max({1.0 / std::sin(cert.xi), 1.0 / std::cos(rt),
                      2.0 / (1.0 - cert.zeta / cert.xi)});
        acc(cert.eta - eta_min);
        acc(cert.beta * cert.d_inf / (crowd * 2.0 * (cert.n - 1) * cert.c) -
            std::tan(rt));
        acc(M_PI / 2 - cert.d_inf - rt);
        acc(cert.kappa - crowd *
                             (cert.d_omega_nat +
                              2.0 * cert.kappa * std::sin(rt)) *
                             (cert.n - 1) * cert.c /
                             (2.0 * std::cos(rt) * cert.beta * cert.d_inf));
    } else {
        acc(-1.0);
    }
    return m;
}

} // namespace

SearchResult search_certificate(const SystemParams& params,
                                const HistorySpec& history,
                                const CertificateGrid& grid) {
    SearchResult res;
    res.best_margin = -std::numeric_limits<double>::infinity();
    for (double zeta : grid.zeta)
        for (double xi : grid.xi)
            for (double d_inf : grid.d_inf)
                for (double eta : grid.eta) {
                    if (!(eta > 2.0)) continue;
                    StrongCertificate cert = evaluate_certificate(
                        params, history, zeta, xi, d_inf, eta);
                    if (cert.valid && !cert.envelope_inconclusive) {
                        res.found = true;
                        res.best = cert;
                        res.best_margin = certificate_margin(cert);
                        return res;
                    }
                    const double margin = certificate_margin(cert);
                    if (margin > res.best_margin) {
                        res.best_margin = margin;
                        res.best = cert;
                    }
                }
    return res;
}

SyncReport sync_detect(const DiagnosticsSeries& series, double tol,
                       double window) {
    SyncReport rep;
    if (series.times.empty()) return rep;
    const double t_end = series.times.back();

    // last sample at or above tol
    int last_bad = -1;
    for (int k = 0; k < static_cast<int>(series.times.size()); ++k)
        if (!(series.d_omega[k] < tol)) last_bad = k;

    if (last_bad == static_cast<int>(series.times.size()) - 1) return rep;
    const double t_sync =
        last_bad < 0 ? series.times.front() : series.times[last_bad + 1];
    if (t_end - t_sync + 1e-12 < window) return rep;
    rep.synced = true;
    rep.t_sync = t_sync;
    return rep;
}

DecayFit fit_decay_rate(const DiagnosticsSeries& series, double t_from) {
    std::vector<double> xs, ys;
    for (size_t k = 0; k < series.times.size(); ++k) {
        if (series.times[k] < t_from) continue;
        if (series.d_omega[k] > 1e-12) {
            xs.push_back(series.times[k]);
            ys.push_back(std::log(series.d_omega[k]));
        }
    }
    if (xs.size() < 10)
        throw InsufficientSamples("fewer than 10 usable samples in fit range");

    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0;
    for (size_t k = 0; k < xs.size(); ++k) sx += xs[k], sy += ys[k];
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
        syy += (ys[k] - my) * (ys[k] - my);
    }
    DecayFit fit;
    if (sxx == 0.0) return fit;
    // constant series up to rounding of the logs: rate 0, R^2 0
    const double eps = 1e-12 * std::max(1.0, std::abs(my));
    if (syy <= eps * eps * n) return fit;
    const double slope = sxy / sxx;
    fit.rate = -slope;
    fit.r_squared = syy == 0.0 ? 0.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

} // namespace kdl
