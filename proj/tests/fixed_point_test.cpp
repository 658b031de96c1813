#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "kurnet/fixed_point.hpp"

using namespace kurnet;

namespace {

KuramotoSystem make_system(const std::vector<Edge>& edges, int n,
                           const Eigen::VectorXd& w, const Eigen::VectorXd& omega) {
    return {build_incidence(edges, n), w, omega};
}

}  // namespace

TEST_CASE("two-oscillator bound and fixed point agree with arcsin(1/2)") {
    const auto sys = make_system({{1, 2}}, 2, Eigen::VectorXd::Ones(1),
                                 (Eigen::VectorXd(2) << 0.5, -0.5).finished());
    const CohesivenessReport rep = cohesiveness_bound(sys);
    CHECK(rep.bound_sin == doctest::Approx(0.5).epsilon(1e-12));
    REQUIRE(rep.bound_angle.has_value());
    CHECK(*rep.bound_angle == doctest::Approx(std::asin(0.5)).epsilon(1e-12));
    CHECK(rep.feasible);

    const FixedPoint fp = solve_fixed_point(sys);
    REQUIRE(fp.found);
    CHECK(fp.residual < 1e-9);
    CHECK(fp.cohesiveness == doctest::Approx(M_PI / 6.0).epsilon(1e-9));
    CHECK(fp.stable);
}

TEST_CASE("overload gives an infeasible bound") {
    const auto sys = make_system({{1, 2}}, 2, Eigen::VectorXd::Ones(1),
                                 (Eigen::VectorXd(2) << 1.5, -1.5).finished());
    const CohesivenessReport rep = cohesiveness_bound(sys);
    CHECK(rep.bound_sin == doctest::Approx(1.5));
    CHECK_FALSE(rep.feasible);
    CHECK_FALSE(rep.bound_angle.has_value());
}

TEST_CASE("jacobian matches finite differences") {
    std::mt19937 rng(5);
    std::normal_distribution<double> gauss(0.0, 0.3);
    const auto sys = make_system({{1, 2}, {2, 3}, {3, 4}, {4, 1}, {1, 3}}, 4,
                                 (Eigen::VectorXd(5) << 1.0, 0.7, 1.3, 0.9, 1.1).finished(),
                                 Eigen::VectorXd::Zero(4));
    Eigen::VectorXd theta(4);
    for (int i = 0; i < 4; ++i) theta(i) = gauss(rng);

    auto field = [&](const Eigen::VectorXd& th) -> Eigen::VectorXd {
        return sys.omega -
               sys.graph.incidence *
                   (sys.weights.array() *
                    (sys.graph.incidence.transpose() * th).array().sin())
                       .matrix();
    };
    const Eigen::MatrixXd J = kuramoto_jacobian(sys, theta);
    const double eps = 1e-6;
    for (int j = 0; j < 4; ++j) {
        Eigen::VectorXd up = theta, dn = theta;
        up(j) += eps;
        dn(j) -= eps;
        const Eigen::VectorXd col = (field(up) - field(dn)) / (2.0 * eps);
        CHECK((J.col(j) - col).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("fixed point is a root and grounding holds") {
    const auto sys = make_system({{1, 2}, {2, 3}, {1, 3}, {3, 4}}, 4,
                                 Eigen::VectorXd::Ones(4),
                                 (Eigen::VectorXd(4) << 0.4, -0.1, -0.5, 0.2).finished());
    const FixedPoint fp = solve_fixed_point(sys);
    REQUIRE(fp.found);
    CHECK(fp.theta(0) == 0.0);
    CHECK(fp.residual < 1e-9);
    CHECK(fp.stable);

    // starting elsewhere lands on the same phase differences
    Eigen::VectorXd init = fp.theta;
    init.array() += 0.05;
    const FixedPoint fp2 = solve_fixed_point(sys, init);
    REQUIRE(fp2.found);
    CHECK((sys.graph.incidence.transpose() * (fp.theta - fp2.theta))
              .cwiseAbs()
              .maxCoeff() < 1e-8);
}

TEST_CASE("tree fixed point matches the bound exactly") {
    // acyclic flow balance: on a tree sin(B^T theta*) = B^T L^+ omega
    const auto sys = make_system({{1, 2}, {2, 3}, {2, 4}, {4, 5}}, 5,
                                 (Eigen::VectorXd(4) << 1.0, 0.8, 1.2, 0.9).finished(),
                                 (Eigen::VectorXd(5) << 0.3, -0.2, 0.25, -0.15, -0.2).finished());
    const FixedPoint fp = solve_fixed_point(sys);
    REQUIRE(fp.found);
    const auto bundle = laplacian_bundle(sys.graph, sys.weights);
    const Eigen::VectorXd flow = sys.graph.incidence.transpose() * bundle.pinv * sys.omega;
    const Eigen::VectorXd sines =
        (sys.graph.incidence.transpose() * fp.theta).array().sin();
    CHECK((flow - sines).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(fp.cohesiveness ==
          doctest::Approx(std::asin(flow.cwiseAbs().maxCoeff())).epsilon(1e-9));
}

TEST_CASE("stability check flags the antipodal branch") {
    const auto sys = make_system({{1, 2}}, 2, Eigen::VectorXd::Ones(1),
                                 (Eigen::VectorXd(2) << 0.5, -0.5).finished());
    Eigen::VectorXd init(2);
    init << 0.0, -(M_PI - M_PI / 6.0) - 0.01;
    const FixedPoint fp = solve_fixed_point(sys, init);
    REQUIRE(fp.found);
    CHECK(fp.cohesiveness > M_PI / 2.0);
    const StabilityVerdict v = stability_check(sys, fp.theta);
    CHECK_FALSE(v.cohesive);
    CHECK_FALSE(v.spectrum_ok);

    const FixedPoint stable_fp = solve_fixed_point(sys);
    const StabilityVerdict vs = stability_check(sys, stable_fp.theta);
    CHECK(vs.cohesive);
    CHECK(vs.spectrum_ok);
}

TEST_CASE("lemma one reduces to the bound on trees") {
    const auto sys = make_system({{1, 2}, {2, 3}}, 3, Eigen::VectorXd::Ones(2),
                                 (Eigen::VectorXd(3) << 0.3, 0.0, -0.3).finished());
    const LemmaOneSolution sol = lemma_one_solve_y(sys, 1.0);
    REQUIRE(sol.found);
    CHECK(sol.y.size() == 0);
    const auto bundle = laplacian_bundle(sys.graph, sys.weights);
    const Eigen::VectorXd flow = sys.graph.incidence.transpose() * bundle.pinv * sys.omega;
    CHECK((sol.combined - flow).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(sol.feasible);
}

TEST_CASE("lemma one agrees with the Newton fixed point on cycles") {
    const auto sys = make_system({{1, 2}, {2, 3}, {3, 4}, {4, 1}, {1, 3}}, 4,
                                 (Eigen::VectorXd(5) << 1.0, 0.7, 1.3, 0.9, 1.1).finished(),
                                 (Eigen::VectorXd(4) << 0.35, -0.2, 0.15, -0.3).finished());
    const FixedPoint fp = solve_fixed_point(sys);
    REQUIRE(fp.found);
    const Eigen::VectorXd sines =
        (sys.graph.incidence.transpose() * fp.theta).array().sin();

    for (const double r : {0.0, 1.0}) {
        const LemmaOneSolution sol = lemma_one_solve_y(sys, r);
        REQUIRE(sol.found);
        CHECK(sol.cycle_residual < 1e-8);
        CHECK((sol.combined - sines).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("lemma one rejects nonpositive weights") {
    const auto sys = make_system({{1, 2}}, 2, Eigen::VectorXd::Zero(1),
                                 Eigen::VectorXd::Zero(2));
    CHECK_THROWS_AS(lemma_one_evaluate(sys, 1.0, Eigen::VectorXd(0)),
                    std::invalid_argument);
}
