#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "kurnet/conic.hpp"
#include "kurnet/graph.hpp"

namespace kurnet {

enum class CostKind { WeightedL1, Quadratic };

/// Minimum-cost natural-frequency tuning under the cohesiveness constraint
/// ||B^T L^+ omega||_inf <= sin(gamma_d) and the mean constraint
/// (1/n) 1^T omega = omega_s. Linear in omega; solved as a conic program.
struct FreqDesignProblem {
    Graph graph;
    Eigen::VectorXd weights;        // fixed w0
    double gamma_d = 0.0;           // target cohesiveness, [0, pi/2)
    double omega_s = 0.0;           // required mean
    CostKind cost = CostKind::WeightedL1;
    Eigen::VectorXd omega_nominal;  // deviation reference
    Eigen::VectorXd prices;         // per-node c >= 0 (weighted-l1 cost only)
    Eigen::VectorXd lower, upper;   // per-node box
};

struct FreqDesignResult {
    conic::Status status = conic::Status::NumericalFailure;
    Eigen::VectorXd omega;         // omega* (when Optimal)
    double cost = 0.0;
    std::vector<int> active_edges; // |b_e^T L^+ omega*| at sin(gamma_d)
    double bound_sin = 0.0;        // exact post-check value
    Eigen::VectorXd dual_ray;      // infeasibility certificate (when Infeasible)
};

FreqDesignResult design_frequencies(const FreqDesignProblem& problem,
                                    const conic::SolveOptions& options = {});

}  // namespace kurnet
