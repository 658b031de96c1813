#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "kurnet/fixed_point.hpp"
#include "kurnet/freq_design.hpp"

using namespace kurnet;

namespace {

FreqDesignProblem two_node_problem() {
    FreqDesignProblem p;
    p.graph = build_incidence({{1, 2}}, 2);
    p.weights = Eigen::VectorXd::Ones(1);
    p.gamma_d = M_PI / 6.0;
    p.omega_s = 0.0;
    p.omega_nominal = (Eigen::VectorXd(2) << 1.0, -1.0).finished();
    p.lower = Eigen::VectorXd::Constant(2, -5.0);
    p.upper = Eigen::VectorXd::Constant(2, 5.0);
    return p;
}

}  // namespace

TEST_CASE("two-node l1 redispatch projects onto the feasible slab") {
    // constraint |omega_2 - omega_1| <= 2 sin(pi/6) = 1 with mean zero;
    // nearest point to (1,-1) in l1 is (0.5,-0.5), cost 1
    FreqDesignProblem p = two_node_problem();
    const FreqDesignResult res = design_frequencies(p);
    REQUIRE(res.status == conic::Status::Optimal);
    CHECK(res.omega(0) == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(res.omega(1) == doctest::Approx(-0.5).epsilon(1e-5));
    CHECK(res.cost == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(res.bound_sin == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(res.active_edges == std::vector<int>{0});
}

TEST_CASE("quadratic cost gives the same projection with squared value") {
    FreqDesignProblem p = two_node_problem();
    p.cost = CostKind::Quadratic;
    const FreqDesignResult res = design_frequencies(p);
    REQUIRE(res.status == conic::Status::Optimal);
    CHECK(res.omega(0) == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(res.cost == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("already feasible nominal costs nothing") {
    FreqDesignProblem p = two_node_problem();
    p.omega_nominal << 0.3, -0.3;
    const FreqDesignResult res = design_frequencies(p);
    REQUIRE(res.status == conic::Status::Optimal);
    CHECK(res.cost == doctest::Approx(0.0).epsilon(1e-6));
    CHECK((res.omega - p.omega_nominal).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("tight box forcing an overload is infeasible with a certificate") {
    FreqDesignProblem p = two_node_problem();
    p.lower << 1.0, -1.0;
    p.upper << 1.0, -1.0;  // forces |omega gap| = 2 > 1
    const FreqDesignResult res = design_frequencies(p);
    CHECK(res.status == conic::Status::Infeasible);
    CHECK(res.dual_ray.size() > 0);
}

TEST_CASE("per-node prices steer the adjustment to the cheap node") {
    // path 1-2-3; high price on node 1 pushes the correction to node 3
    FreqDesignProblem p;
    p.graph = build_incidence({{1, 2}, {2, 3}}, 3);
    p.weights = Eigen::VectorXd::Ones(2);
    p.gamma_d = M_PI / 6.0;
    p.omega_s = 0.0;
    p.omega_nominal = (Eigen::VectorXd(3) << 0.9, 0.0, -0.9).finished();
    p.prices = (Eigen::VectorXd(3) << 100.0, 1.0, 1.0).finished();
    p.lower = Eigen::VectorXd::Constant(3, -5.0);
    p.upper = Eigen::VectorXd::Constant(3, 5.0);
    const FreqDesignResult res = design_frequencies(p);
    REQUIRE(res.status == conic::Status::Optimal);
    // edge 1-2 carries exactly omega_1 on the path, so node 1 must come
    // down to 0.5; the pricey node moves only that far, no further
    CHECK(std::abs(res.omega(0) - 0.5) < 1e-4);
    CHECK(res.bound_sin <= 0.5 + 1e-6);
}

TEST_CASE("designed frequencies pass the dynamics check") {
    FreqDesignProblem p = two_node_problem();
    const FreqDesignResult res = design_frequencies(p);
    REQUIRE(res.status == conic::Status::Optimal);
    const KuramotoSystem sys{p.graph, p.weights, res.omega};
    const CohesivenessReport rep = cohesiveness_bound(sys);
    CHECK(rep.feasible);
    CHECK(rep.bound_sin <= std::sin(p.gamma_d) + 1e-6);
}

TEST_CASE("invalid inputs are rejected") {
    FreqDesignProblem p = two_node_problem();
    p.gamma_d = M_PI;
    CHECK_THROWS_AS(design_frequencies(p), std::invalid_argument);
    p = two_node_problem();
    p.lower(0) = 6.0;  // empty box
    CHECK_THROWS_AS(design_frequencies(p), std::invalid_argument);
    p = two_node_problem();
    p.graph = build_incidence({{1, 2}}, 3);  // disconnected
    p.omega_nominal = Eigen::VectorXd::Zero(3);
    p.lower = Eigen::VectorXd::Constant(3, -1.0);
    p.upper = Eigen::VectorXd::Constant(3, 1.0);
    CHECK_THROWS_AS(design_frequencies(p), std::invalid_argument);
}
