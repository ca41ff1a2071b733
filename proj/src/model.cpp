#include "kdl/model.hpp"

#include <algorithm>
#include <limits>

namespace kdl {

HistorySpec HistorySpec::constant(Eigen::VectorXd phases) {
    HistorySpec h;
    h.kind_ = Kind::constant;
    h.n_ = static_cast<int>(phases.size());
    h.constant_ = std::move(phases);
    return h;
}

HistorySpec HistorySpec::sampled(Eigen::VectorXd times, Eigen::MatrixXd phases,
                                 Eigen::MatrixXd derivs) {
    if (times.size() < 2)
        throw Error("sampled history needs at least two grid points");
    if (phases.rows() != times.size() || derivs.rows() != times.size() ||
        phases.cols() != derivs.cols())
        throw DimensionMismatch("history grid dimensions disagree");
    for (Eigen::Index k = 1; k < times.size(); ++k)
        if (times[k] <= times[k - 1])
            throw Error("history grid times must be strictly increasing");
    if (times[times.size() - 1] != 0.0)
        throw Error("history grid must end at t = 0");

    HistorySpec h;
    h.kind_ = Kind::sampled;
    h.n_ = static_cast<int>(phases.cols());
    h.times_ = std::move(times);
    h.phases_ = std::move(phases);
    h.derivs_ = std::move(derivs);
    return h;
}

double HistorySpec::start() const {
    if (kind_ == Kind::constant)
        return -std::numeric_limits<double>::infinity();
    return times_[0];
}

int HistorySpec::segment_of(double s) const {
    if (s < times_[0] || s > 0.0)
        throw OutOfRange("history evaluated outside covered range");
    const auto* begin = times_.data();
    const auto* end = begin + times_.size();
    auto it = std::upper_bound(begin, end, s);
    int seg = static_cast<int>(it - begin) - 1;
    return std::clamp(seg, 0, static_cast<int>(times_.size()) - 2);
}

namespace {

// cubic Hermite on [t0, t1] with values y and slopes d at the endpoints
double hermite(double t, double t0, double t1, double y0, double y1,
               double d0, double d1) {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 +
           (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * d1;
}

double hermite_deriv(double t, double t0, double t1, double y0, double y1,
                     double d0, double d1) {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double s2 = s * s;
    return (6 * s2 - 6 * s) * (y0 - y1) / h + (3 * s2 - 4 * s + 1) * d0 +
           (3 * s2 - 2 * s) * d1;
}

} // namespace

Eigen::VectorXd HistorySpec::phases_at(double s) const {
    if (s > 0.0) throw OutOfRange("history evaluated at positive time");
    if (kind_ == Kind::constant) return constant_;
    const int seg = segment_of(s);
    Eigen::VectorXd out(n_);
    for (int i = 0; i < n_; ++i)
        out[i] = hermite(s, times_[seg], times_[seg + 1], phases_(seg, i),
                         phases_(seg + 1, i), derivs_(seg, i), derivs_(seg + 1, i));
    return out;
}

double HistorySpec::phase_at(int i, double s) const {
    if (s > 0.0) throw OutOfRange("history evaluated at positive time");
    if (kind_ == Kind::constant) return constant_[i];
    const int seg = segment_of(s);
    return hermite(s, times_[seg], times_[seg + 1], phases_(seg, i),
                   phases_(seg + 1, i), derivs_(seg, i), derivs_(seg + 1, i));
}

Eigen::VectorXd HistorySpec::derivs_at(double s) const {
    if (s > 0.0) throw OutOfRange("history evaluated at positive time");
    if (kind_ == Kind::constant) return Eigen::VectorXd::Zero(n_);
    const int seg = segment_of(s);
    Eigen::VectorXd out(n_);
    for (int i = 0; i < n_; ++i)
        out[i] = hermite_deriv(s, times_[seg], times_[seg + 1], phases_(seg, i),
                               phases_(seg + 1, i), derivs_(seg, i),
                               derivs_(seg + 1, i));
    return out;
}

SystemParams SystemParams::make(Eigen::VectorXd omega, double kappa,
                                Eigen::MatrixXd delays,
                                DigraphTopology topology) {
    const int n = static_cast<int>(omega.size());
    if (topology.n_vertices != n || delays.rows() != n || delays.cols() != n)
        throw DimensionMismatch("omega, delays, and topology sizes disagree");
    if (kappa < 0.0) throw NegativeValue("kappa must be nonnegative");
    if ((delays.array() < 0.0).any())
        throw NegativeValue("delays must be nonnegative");

    SystemParams p;
    p.omega = std::move(omega);
    p.kappa = kappa;
    p.delays = std::move(delays);
    p.delays.diagonal().setZero(); // self-time delay is not allowed
    p.topology = std::move(topology);

    p.tau_max = p.delays.maxCoeff();
    p.r_omega = p.omega.cwiseAbs().maxCoeff() + kappa;

    // tau_i = max over receivers j with i in N_j of tau_ji
    p.tau_i = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j)
        for (int i : p.topology.neighbor_sets[j])
            p.tau_i[i] = std::max(p.tau_i[i], p.delays(j, i));
    p.tau_0 = n > 0 ? p.tau_i.minCoeff() : 0.0;
    return p;
}

} // namespace kdl
