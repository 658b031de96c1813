#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "kurnet/simulate.hpp"

using namespace kurnet;

namespace {

KuramotoSystem two_node(double w, double o1, double o2) {
    KuramotoSystem sys;
    sys.graph = build_incidence({{1, 2}}, 2);
    sys.weights = Eigen::VectorXd::Constant(1, w);
    sys.omega = Eigen::VectorXd(2);
    sys.omega << o1, o2;
    return sys;
}

}  // namespace

TEST_CASE("two oscillators settle at the arcsin gap") {
    const KuramotoSystem sys = two_node(1.0, 0.5, -0.5);
    const Trajectory traj = integrate(sys, Eigen::VectorXd::Zero(2), 100.0, 0.01);
    const SyncStatus st = detect_sync(traj);
    REQUIRE(st.synchronized);
    CHECK(std::abs(st.omega_s) < 1e-9);
    const double phi = measure_cohesiveness(sys.graph, traj, st);
    CHECK(std::abs(phi - std::asin(0.5)) < 1e-4);
}

TEST_CASE("overloaded pair drifts") {
    const KuramotoSystem sys = two_node(1.0, 1.5, -1.5);  // |omega gap|/2 > w
    const Trajectory traj = integrate(sys, Eigen::VectorXd::Zero(2), 100.0, 0.01);
    CHECK_FALSE(detect_sync(traj).synchronized);
    CHECK_THROWS(measure_cohesiveness(sys.graph, traj, detect_sync(traj)));
}

TEST_CASE("identical frequencies give zero cohesiveness") {
    KuramotoSystem sys;
    sys.graph = build_incidence({{1, 2}, {2, 3}, {1, 3}}, 3);
    sys.weights = Eigen::VectorXd::Ones(3);
    sys.omega = Eigen::VectorXd::Zero(3);
    Eigen::VectorXd theta0(3);
    theta0 << 0.3, -0.2, 0.1;
    const Trajectory traj = integrate(sys, theta0, 100.0, 0.01);
    const SyncStatus st = detect_sync(traj);
    REQUIRE(st.synchronized);
    CHECK(measure_cohesiveness(sys.graph, traj, st) < 1e-4);
}

TEST_CASE("mean frequency is conserved along the flow") {
    std::mt19937 rng(3);
    std::normal_distribution<double> gauss(0.0, 0.4);
    KuramotoSystem sys;
    sys.graph = build_incidence({{1, 2}, {2, 3}, {3, 4}, {4, 1}, {1, 3}}, 4);
    sys.weights = Eigen::VectorXd::Ones(5);
    sys.omega = Eigen::VectorXd(4);
    for (int i = 0; i < 4; ++i) sys.omega(i) = gauss(rng);
    const double mean_omega = sys.omega.mean();
    const Trajectory traj = integrate(sys, Eigen::VectorXd::Zero(4), 20.0, 0.01);
    for (int s = 0; s < traj.sample_count(); ++s)
        CHECK(std::abs(traj.rates.row(s).mean() - mean_omega) < 1e-9);
}

TEST_CASE("trajectory is invariant under 2-pi shifts of the start") {
    const KuramotoSystem sys = two_node(1.0, 0.5, -0.5);
    Eigen::VectorXd theta0(2);
    theta0 << 0.0, 2.0 * M_PI;
    const Trajectory a = integrate(sys, Eigen::VectorXd::Zero(2), 10.0, 0.01);
    const Trajectory b = integrate(sys, theta0, 10.0, 0.01);
    // dynamics only see phase differences mod 2pi
    for (int s = 0; s < a.sample_count(); ++s) {
        CHECK(std::abs(a.states(s, 0) - b.states(s, 0)) < 1e-10);
        CHECK(std::abs((a.states(s, 1) + 2.0 * M_PI) - b.states(s, 1)) < 1e-10);
    }
    const SyncStatus st = detect_sync(b);
    REQUIRE(st.synchronized);
    CHECK(std::abs(measure_cohesiveness(sys.graph, b, st) - std::asin(0.5)) < 1e-4);
}

TEST_CASE("RK4 exhibits fourth-order error decay") {
    // richardson triple: err(h) / err(h/2) should be about 2^4
    const KuramotoSystem sys = two_node(1.0, 0.5, -0.5);
    Eigen::VectorXd theta0(2);
    theta0 << 0.4, -0.3;
    auto endpoint = [&](double h) {
        return integrate(sys, theta0, 1.0, h).states.bottomRows(1).transpose().eval();
    };
    const Eigen::VectorXd ref = endpoint(1.0 / 4096.0);
    const double e1 = (endpoint(1.0 / 32.0) - ref).norm();
    const double e2 = (endpoint(1.0 / 64.0) - ref).norm();
    const double ratio = e1 / e2;
    CHECK(ratio > 16.0 * 0.7);
    CHECK(ratio < 16.0 * 1.3);
}

TEST_CASE("center_frequencies removes the mean and keeps the offset") {
    const KuramotoSystem sys = two_node(1.0, 1.7, 0.7);
    const CenteredSystem c = center_frequencies(sys);
    CHECK(c.omega_s == doctest::Approx(1.2));
    CHECK(std::abs(c.system.omega.sum()) < 1e-14);
    CHECK(c.system.omega(0) == doctest::Approx(0.5));
}

TEST_CASE("wrap_angle maps into (-pi, pi]") {
    CHECK(wrap_angle(M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_angle(-M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_angle(3.0 * M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_angle(0.1 + 4.0 * M_PI) == doctest::Approx(0.1));
    CHECK(wrap_angle(-0.1 - 6.0 * M_PI) == doctest::Approx(-0.1));
}

TEST_CASE("integrate validates input sizes") {
    const KuramotoSystem sys = two_node(1.0, 0.5, -0.5);
    CHECK_THROWS_AS(integrate(sys, Eigen::VectorXd::Zero(3), 1.0, 0.01),
                    std::invalid_argument);
    CHECK_THROWS_AS(integrate(sys, Eigen::VectorXd::Zero(2), -1.0, 0.01),
                    std::invalid_argument);
    CHECK_THROWS_AS(integrate(sys, Eigen::VectorXd::Zero(2), 1.0, 0.0),
                    std::invalid_argument);
}
