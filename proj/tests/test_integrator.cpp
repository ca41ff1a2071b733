#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "kdl/integrator.hpp"

using namespace kdl;

namespace {

// independent scalar RK4 for the two-oscillator difference equation
// phi' = dOmega - 2 kappa sin(phi)
double phase_difference_oracle(double phi0, double d_omega, double kappa,
                               double t_end, double h) {
    auto f = [&](double phi) { return d_omega - 2.0 * kappa * std::sin(phi); };
    double phi = phi0;
    const long steps = std::lround(t_end / h);
    for (long s = 0; s < steps; ++s) {
        const double k1 = f(phi);
        const double k2 = f(phi + 0.5 * h * k1);
        const double k3 = f(phi + 0.5 * h * k2);
        const double k4 = f(phi + h * k3);
        phi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return phi;
}

} // namespace

TEST_CASE("uncoupled drift is linear") {
    Eigen::VectorXd omega(3), theta0(3);
    omega << 1.0, -0.5, 0.25;
    theta0 << 0.1, 0.2, 0.3;
    auto params = SystemParams::make(omega, 0.0,
                                     Eigen::MatrixXd::Constant(3, 3, 0.4),
                                     all_to_all_topology(3));
    auto traj = integrate(params, HistorySpec::constant(theta0),
                          {10.0, 0.01, 1});
    Eigen::VectorXd expect = theta0 + 10.0 * omega;
    CHECK((traj.phases_at(10.0) - expect).cwiseAbs().maxCoeff() < 1e-10);

    // dense output reproduces the line between grid points too
    for (double t : {0.005, 1.2345, 7.7777}) {
        Eigen::VectorXd e = theta0 + t * omega;
        CHECK((traj.phases_at(t) - e).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((traj.frequencies_at(t) - omega).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("two-oscillator equilibrium and oracle trajectory") {
    Eigen::VectorXd omega(2), theta0(2);
    omega << 0.1, -0.1;
    theta0 << 0.0, 0.0;
    auto params = SystemParams::make(omega, 1.0, Eigen::MatrixXd::Zero(2, 2),
                                     all_to_all_topology(2));
    auto traj = integrate(params, HistorySpec::constant(theta0),
                          {50.0, 0.01, 1});
    const double diff = traj.phase_at(0, 50.0) - traj.phase_at(1, 50.0);
    CHECK(std::abs(diff - std::asin(0.1)) < 1e-6);

    // transient against the independent scalar integrator at fine step
    const double ref = phase_difference_oracle(0.0, 0.2, 1.0, 5.0, 1e-4);
    const double got = traj.phase_at(0, 5.0) - traj.phase_at(1, 5.0);
    CHECK(std::abs(got - ref) < 1e-8);
}

TEST_CASE("delayed two-oscillator synchronizes") {
    Eigen::VectorXd omega = Eigen::VectorXd::Zero(2), theta0(2);
    theta0 << 0.0, 1.0;
    auto params = SystemParams::make(omega, 1.0,
                                     Eigen::MatrixXd::Constant(2, 2, 0.1),
                                     all_to_all_topology(2));
    auto traj = integrate(params, HistorySpec::constant(theta0),
                          {50.0, 0.01, 1});
    Eigen::VectorXd w = traj.frequencies_at(50.0);
    CHECK(w.maxCoeff() - w.minCoeff() < 1e-8);

    // cross-check the endpoint against a 10x finer run
    auto fine = integrate(params, HistorySpec::constant(theta0),
                          {50.0, 0.001, 1});
    CHECK((traj.phases_at(50.0) - fine.phases_at(50.0)).cwiseAbs().maxCoeff() <
          1e-8);
}

TEST_CASE("dense output contract") {
    Eigen::VectorXd omega(2), theta0(2);
    omega << 0.4, -0.3;
    theta0 << 0.2, 1.4;
    auto params = SystemParams::make(omega, 1.0,
                                     Eigen::MatrixXd::Constant(2, 2, 0.2),
                                     all_to_all_topology(2));
    auto traj = integrate(params, HistorySpec::constant(theta0),
                          {5.0, 0.01, 1});

    // grid points exactly
    for (int m : {0, 7, 123, 500}) {
        const double t = traj.times()[m];
        CHECK((traj.phases_at(t).transpose() - traj.phases().row(m))
                  .cwiseAbs()
                  .maxCoeff() < 1e-15);
        if (m > 0)
            CHECK((traj.frequencies_at(t).transpose() - traj.derivs().row(m))
                      .cwiseAbs()
                      .maxCoeff() < 1e-13);
    }

    // history side
    CHECK((traj.phases_at(-0.1) - theta0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(traj.frequencies_at(-0.1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(traj.frequencies_at(0.0).cwiseAbs().maxCoeff() == 0.0); // left limit

    // midpoints within O(h^4) of a 10x finer run
    auto fine = integrate(params, HistorySpec::constant(theta0),
                          {5.0, 0.001, 1});
    double worst = 0.0;
    for (double t = 2.005; t < 4.0; t += 0.1)
        worst = std::max(
            worst, (traj.phases_at(t) - fine.phases_at(t)).cwiseAbs().maxCoeff());
    CHECK(worst < 1e-7);

    // out-of-range access; constant histories cover all of the past
    CHECK_THROWS_AS(traj.phases_at(5.5), OutOfRange);
    CHECK((traj.phases_at(-3.0) - theta0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("convergence order") {
    Eigen::VectorXd omega(3), theta0(3);
    omega << 0.3, -0.1, 0.25;
    theta0 << 0.4, 1.1, -0.2;
    auto p0 = SystemParams::make(omega, 1.2, Eigen::MatrixXd::Zero(3, 3),
                                 all_to_all_topology(3));
    auto rep = convergence_order(p0, HistorySpec::constant(theta0), 2.0, 0.02);
    CHECK(rep.order >= 3.7);
    CHECK(rep.order <= 4.3);
    CHECK_FALSE(rep.exact);

    // kappa = 0: differences at roundoff
    auto pz = SystemParams::make(omega, 0.0, Eigen::MatrixXd::Zero(3, 3),
                                 all_to_all_topology(3));
    CHECK(convergence_order(pz, HistorySpec::constant(theta0), 2.0, 0.02).exact);

    // delayed run past the startup discontinuities: degraded but >= 2.7
    Eigen::VectorXd om2(2), th2(2);
    om2 << 0.1, -0.1;
    th2 << 0.0, 0.5;
    auto pd = SystemParams::make(om2, 1.0, Eigen::MatrixXd::Constant(2, 2, 0.1),
                                 all_to_all_topology(2));
    auto repd = convergence_order(pd, HistorySpec::constant(th2), 1.0, 0.01);
    CHECK(repd.order >= 2.7);
}

TEST_CASE("velocity bound and translation equivariance") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    Eigen::VectorXd omega(4), theta0(4);
    for (int i = 0; i < 4; ++i) omega[i] = ud(rng), theta0[i] = 2.0 * ud(rng);
    auto params = SystemParams::make(omega, 2.0,
                                     Eigen::MatrixXd::Constant(4, 4, 0.25),
                                     all_to_all_topology(4));
    auto traj = integrate(params, HistorySpec::constant(theta0),
                          {20.0, 0.01, 1});
    CHECK(traj.derivs().cwiseAbs().maxCoeff() <= params.r_omega + 1e-9);

    const double c = 1.234;
    auto shifted = integrate(params,
                             HistorySpec::constant((theta0.array() + c).matrix()),
                             {20.0, 0.01, 1});
    CHECK(((shifted.phases().array() - traj.phases().array()) - c)
              .abs()
              .maxCoeff() < 1e-10);
    CHECK((shifted.derivs() - traj.derivs()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("step control") {
    Eigen::VectorXd omega = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd theta0(2);
    theta0 << 0.0, 0.5;
    // smallest positive active delay caps the step at delay / 4
    Eigen::MatrixXd delays(2, 2);
    delays << 0.0, 0.02, 0.5, 0.0;
    auto params =
        SystemParams::make(omega, 1.0, delays, all_to_all_topology(2));
    auto traj = integrate(params, HistorySpec::constant(theta0),
                          {1.0, 0.01, 1});
    CHECK(traj.step() <= 0.005 + 1e-15);
    // the grid lands exactly on t_end
    CHECK(traj.t_end() == doctest::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS_AS(
        integrate(params, HistorySpec::constant(theta0), {1.0, -0.1, 1}),
        StepTooLarge);
}

TEST_CASE("sample stride thins the exported view only") {
    Eigen::VectorXd omega(2), theta0(2);
    omega << 0.2, -0.2;
    theta0 << 0.0, 1.0;
    auto params = SystemParams::make(omega, 1.0, Eigen::MatrixXd::Zero(2, 2),
                                     all_to_all_topology(2));
    auto traj = integrate(params, HistorySpec::constant(theta0),
                          {1.0, 0.01, 7});
    CHECK(traj.times().size() == 101); // full internal grid retained
    auto idx = traj.sample_indices();
    CHECK(idx.front() == 0);
    CHECK(idx.back() == 100); // final point always sampled
    for (size_t k = 1; k + 1 < idx.size(); ++k)
        CHECK(idx[k] - idx[k - 1] == 7);
}
