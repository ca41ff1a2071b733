#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "kdl/integrator.hpp"
#include "kdl/scenario.hpp"

using namespace kdl;

namespace {

auto constant_accessor(const Eigen::VectorXd& phases) {
    return [phases](int j, double) { return phases[j]; };
}

} // namespace

TEST_CASE("rhs two-oscillator closed form") {
    Eigen::VectorXd omega = Eigen::VectorXd::Zero(2);
    auto params = SystemParams::make(omega, 1.0, Eigen::MatrixXd::Zero(2, 2),
                                     all_to_all_topology(2));
    Eigen::VectorXd theta(2);
    theta << 0.0, M_PI / 2;
    Eigen::VectorXd v = rhs(0.0, theta, constant_accessor(theta), params);
    CHECK(v[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(v[1] == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("identical phases drift at the natural frequencies") {
    Eigen::VectorXd omega(4);
    omega << 0.3, -0.2, 1.1, 0.0;
    auto params = SystemParams::make(omega, 2.5,
                                     Eigen::MatrixXd::Constant(4, 4, 0.7),
                                     all_to_all_topology(4));
    Eigen::VectorXd theta = Eigen::VectorXd::Constant(4, 1.3);
    Eigen::VectorXd v = rhs(5.0, theta, constant_accessor(theta), params);
    for (int i = 0; i < 4; ++i) CHECK(v[i] == doctest::Approx(omega[i]));
}

TEST_CASE("ring rhs at t = 0 against direct evaluation") {
    const auto& omega = benchmark_natural_frequencies();
    const auto& theta0 = benchmark_initial_phases();
    const double kappa = 2.0;
    auto params = SystemParams::make(omega, kappa,
                                     Eigen::MatrixXd::Zero(10, 10),
                                     ring_topology(10));
    Eigen::VectorXd v = rhs(0.0, theta0, constant_accessor(theta0), params);
    for (int i = 0; i < 10; ++i) {
        const double expect =
            omega[i] + kappa / 9.0 * std::sin(theta0[(i + 1) % 10] - theta0[i]);
        CHECK(v[i] == doctest::Approx(expect).epsilon(1e-14));
    }
}

TEST_CASE("frequency_rhs trivial cases") {
    Eigen::VectorXd omega = Eigen::VectorXd::Zero(3);
    auto params = SystemParams::make(omega, 1.7, Eigen::MatrixXd::Zero(3, 3),
                                     all_to_all_topology(3));
    Eigen::VectorXd theta(3);
    theta << 0.2, 0.5, -0.4;
    Eigen::VectorXd freqs = Eigen::VectorXd::Constant(3, 0.9);
    auto fre = [&](int j, double) { return freqs[j]; };
    auto pha = [&](int j, double) { return theta[j]; };
    Eigen::VectorXd a = frequency_rhs(0.0, theta, freqs, fre, pha, params);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(a[i]) < 1e-15);

    // N = 2, tau = 0, antisymmetric accelerations
    Eigen::VectorXd om2 = Eigen::VectorXd::Zero(2);
    auto p2 = SystemParams::make(om2, 3.0, Eigen::MatrixXd::Zero(2, 2),
                                 all_to_all_topology(2));
    Eigen::VectorXd th2(2), w2(2);
    th2 << 0.0, 0.8;
    w2 << 1.0, 0.0;
    auto f2 = [&](int j, double) { return w2[j]; };
    auto g2 = [&](int j, double) { return th2[j]; };
    Eigen::VectorXd a2 = frequency_rhs(0.0, th2, w2, f2, g2, p2);
    const double c0 = std::cos(th2[1] - th2[0]);
    CHECK(a2[0] == doctest::Approx(-3.0 * c0).epsilon(1e-14));
    CHECK(a2[1] == doctest::Approx(3.0 * c0).epsilon(1e-14));
}

TEST_CASE("frequency_rhs matches finite differences along a trajectory") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    Eigen::VectorXd omega(4), theta0(4);
    for (int i = 0; i < 4; ++i) omega[i] = ud(rng), theta0[i] = ud(rng);
    auto params = SystemParams::make(omega, 1.5,
                                     Eigen::MatrixXd::Constant(4, 4, 0.3),
                                     all_to_all_topology(4));
    auto traj = integrate(params, HistorySpec::constant(theta0),
                          {6.0, 0.005, 1});

    auto fre = [&](int j, double s) { return traj.frequencies_at(s)[j]; };
    auto pha = [&](int j, double s) { return traj.phase_at(j, s); };
    const double fd_h = 1e-4;
    for (double t : {2.0, 3.5, 5.0}) {
        Eigen::VectorXd theta = traj.phases_at(t);
        Eigen::VectorXd freqs = traj.frequencies_at(t);
        Eigen::VectorXd a = frequency_rhs(t, theta, freqs, fre, pha, params);
        Eigen::VectorXd fd = (traj.frequencies_at(t + fd_h) -
                              traj.frequencies_at(t - fd_h)) /
                             (2.0 * fd_h);
        for (int i = 0; i < 4; ++i)
            CHECK(a[i] == doctest::Approx(fd[i]).epsilon(1e-4));
    }
}

TEST_CASE("velocity bound values") {
    const auto& omega = benchmark_natural_frequencies();
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(10, 10);
    auto p2 = SystemParams::make(omega, 2.0, z, all_to_all_topology(10));
    CHECK(velocity_bound(p2) == doctest::Approx(2.979).epsilon(1e-12));
    auto p8 = SystemParams::make(omega, 8.0, z, ring_topology(10));
    CHECK(velocity_bound(p8) == doctest::Approx(8.979).epsilon(1e-12));

    auto p1 = SystemParams::make(Eigen::VectorXd::Zero(3), 1.0,
                                 Eigen::MatrixXd::Zero(3, 3),
                                 all_to_all_topology(3));
    CHECK(velocity_bound(p1) == doctest::Approx(1.0));
}

TEST_CASE("derived delay quantities") {
    Eigen::MatrixXd delays = 30.0 * standardized_delays();
    auto params = SystemParams::make(benchmark_natural_frequencies(), 8.0, delays,
                                     ring_topology(10));
    CHECK(params.tau_max == doctest::Approx(29.46).epsilon(1e-12));
    // tau_i = max over receivers j listening to i of tau_ji; on the ring,
    // vertex i is heard only by i-1
    for (int i = 0; i < 10; ++i)
        CHECK(params.tau_i[i] ==
              doctest::Approx(delays((i + 9) % 10, i)).epsilon(1e-15));
    CHECK(params.tau_0 == doctest::Approx(params.tau_i.minCoeff()));
    // diagonal forced to zero
    for (int i = 0; i < 10; ++i) CHECK(params.delays(i, i) == 0.0);
}

TEST_CASE("rhs symmetries") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> ud(-2.0, 2.0);
    Eigen::VectorXd omega(5), theta(5);
    for (int i = 0; i < 5; ++i) omega[i] = ud(rng), theta[i] = ud(rng);
    auto params = SystemParams::make(omega, 1.2, Eigen::MatrixXd::Zero(5, 5),
                                     all_to_all_topology(5));

    Eigen::VectorXd base = rhs(0.0, theta, constant_accessor(theta), params);

    // rotation: common constant added to phases and history
    const double c = 0.77;
    Eigen::VectorXd shifted = theta.array() + c;
    Eigen::VectorXd rot = rhs(0.0, shifted, constant_accessor(shifted), params);
    for (int i = 0; i < 5; ++i)
        CHECK(rot[i] == doctest::Approx(base[i]).epsilon(1e-13));

    // frequency shift: Omega + c shifts rhs by exactly c
    SystemParams pshift = params;
    pshift.omega.array() += c;
    Eigen::VectorXd fsh = rhs(0.0, theta, constant_accessor(theta), pshift);
    for (int i = 0; i < 5; ++i)
        CHECK(fsh[i] - base[i] == doctest::Approx(c).epsilon(1e-13));
}

TEST_CASE("sampled history interpolation") {
    // linear history theta_i(s) = omega_i s on [-1, 0]
    Eigen::VectorXd omega(3);
    omega << 0.5, -1.0, 0.25;
    Eigen::VectorXd times(5);
    times << -1.0, -0.75, -0.5, -0.25, 0.0;
    Eigen::MatrixXd phases(5, 3), derivs(5, 3);
    for (int r = 0; r < 5; ++r)
        for (int i = 0; i < 3; ++i) {
            phases(r, i) = omega[i] * times[r];
            derivs(r, i) = omega[i];
        }
    auto h = HistorySpec::sampled(times, phases, derivs);
    CHECK(h.start() == doctest::Approx(-1.0));
    for (double s : {-0.9, -0.6, -0.33, -0.1}) {
        Eigen::VectorXd th = h.phases_at(s);
        Eigen::VectorXd dv = h.derivs_at(s);
        for (int i = 0; i < 3; ++i) {
            CHECK(th[i] == doctest::Approx(omega[i] * s).epsilon(1e-13));
            CHECK(dv[i] == doctest::Approx(omega[i]).epsilon(1e-13));
        }
    }
    CHECK(h.phase_at(1, -0.4) == doctest::Approx(0.4).epsilon(1e-13));

    // constant history: zero derivative before t = 0
    auto hc = HistorySpec::constant(omega);
    CHECK(hc.phases_at(-3.0)[1] == doctest::Approx(-1.0));
    CHECK(hc.derivs_at(-0.5).cwiseAbs().maxCoeff() == 0.0);
}
