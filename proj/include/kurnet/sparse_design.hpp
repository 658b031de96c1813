#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "kurnet/conic.hpp"
#include "kurnet/graph.hpp"
#include "kurnet/weight_design.hpp"

namespace kurnet {

/// Sparse edge-addition: pick the fewest candidate edges whose weights bring
/// the cohesiveness bound below sin(gamma_d), by reweighted-l1 rounds over
/// the relaxed SDP.
struct SparseDesignProblem {
    int n = 0;
    std::vector<Edge> base_edges;      // existing lines (may be empty)
    Eigen::VectorXd base_weights;
    std::vector<Edge> candidates;      // may reinforce existing base lines
    Eigen::VectorXd omega;             // centered natural frequencies
    double gamma_d = 0.0;
    double alpha = 2.0;
    double w_max = 10.0;
    double epsilon = 0.01;             // reweighting guard and prune cut
    int k_max = 10;
    double beta = 1e-4;
};

struct SparseRound {
    int iteration = 0;
    std::vector<int> active;       // candidate indices entering the solve
    Eigen::VectorXd w;             // full-length candidate weights (inactive = 0)
    Eigen::VectorXd prices;        // p^(k) over active entries' positions
    int support_size = 0;          // entries > epsilon
    double objective = 0.0;
    double tightness = 1.0;
    double bound_sin_exact = 0.0;  // over base + support rows, true pinv
    bool feasible = false;
};

struct SparseDesignResult {
    DesignStatus status = DesignStatus::NumericalFailure;
    Eigen::VectorXd w_c;           // final weights, sub-epsilon entries zeroed
    std::vector<int> support;      // candidate indices with w > epsilon
    double bound_sin_exact = 0.0;  // final re-check after zeroing
    bool final_feasible = false;
    std::vector<SparseRound> history;
    std::string warning;           // set when a later round went infeasible
};

SparseDesignResult reweighted_l1(const SparseDesignProblem& problem,
                                 const conic::SolveOptions& options = {});

}  // namespace kurnet
