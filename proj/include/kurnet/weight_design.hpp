#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "kurnet/conic.hpp"
#include "kurnet/graph.hpp"

namespace kurnet {

/// Interval uncertainty on the natural frequencies, intersected with the
/// zero-mean hyperplane.
struct OmegaBox {
    Eigen::VectorXd lower, upper;

    bool singleton() const { return (upper - lower).cwiseAbs().maxCoeff() == 0.0; }
    static OmegaBox point(const Eigen::VectorXd& omega) { return {omega, omega}; }
    /// Nonempty iff sum(lower) <= 0 <= sum(upper).
    bool nonempty() const;
};

enum class DesignStatus {
    Optimal,
    Infeasible,
    AlphaTooSmall,
    TightnessUnreachable,
    NumericalFailure,
};

const char* to_string(DesignStatus s);

/// Packed lower-triangle variable ids for the symmetric n x n relaxation
/// matrix Lbar.
struct LbarVars {
    int n = 0;
    std::vector<int> ids;  // column-major lower triangle

    int at(int i, int j) const {
        if (i < j) std::swap(i, j);
        return ids[j * n - j * (j - 1) / 2 + (i - j)];
    }
    static LbarVars create(conic::Program& prog, int n);
};

/// Variable and row ids of the Theorem-3 multiplier block for one edge.
struct RobustEdgeVars {
    std::vector<int> lambda_hi, lambda_lo;  // +b_k^T side, length n
    std::vector<int> gamma_hi, gamma_lo;    // -b_k^T side
    int nu = -1, eta = -1;
    int row_pos = -1, row_neg = -1;  // dual-value inequality rows
};

struct RobustConstraintBlock {
    std::vector<RobustEdgeVars> edges;
};

/// Appends the dual (robust) reformulation rows to prog: per edge, two
/// dual-value inequalities bounded by sin(gamma_d) and two stationarity
/// equality groups coupling the multipliers to +-b_k^T Lbar.
RobustConstraintBlock assemble_robust_constraints(conic::Program& prog, const Graph& graph,
                                                  const LbarVars& lbar, const OmegaBox& box,
                                                  double gamma_d);

struct WeightDesignProblem {
    Graph graph;
    OmegaBox box;           // centered frequencies (zero-mean slice)
    double gamma_d = 0.0;
    Eigen::VectorXd cost;   // per-edge prices; empty means all-ones l1
    double w_max = 10.0;
    bool connectivity_lmi = true;
    double beta = 1e-4;
};

/// Per-edge multipliers of the dual (robust) reformulation, one block per
/// incidence column. The stationarity rows tie them to b_k^T Lbar; the
/// dual-value rows bound the worst-case constraint over the box.
struct EdgeDuals {
    Eigen::VectorXd lambda_hi, lambda_lo;  // +b_k^T side
    Eigen::VectorXd gamma_hi, gamma_lo;    // -b_k^T side
    double nu = 0.0, eta = 0.0;
    double value_pos = 0.0;  // lambda_hi' ub - lambda_lo' lb
    double value_neg = 0.0;  // gamma_hi' ub - gamma_lo' lb
};

struct WeightDesignResult {
    DesignStatus status = DesignStatus::NumericalFailure;
    Eigen::VectorXd w;
    double cost = 0.0;        // f(w), excluding the trace penalty
    double trace_term = 0.0;  // tr(Lbar)
    Eigen::MatrixXd Lbar;
    double tightness = 1.0;   // ||Lbar - (L + 11^T/n)^{-1}||_F / ||Lbar||_F
    bool tight = false;       // tightness <= certificate tolerance
    double bound_sin_exact = 0.0;  // worst-case ||B^T L^+ omega||_inf via pinv
    std::vector<EdgeDuals> edge_duals;
    double rel_gap = 0.0;
    int iterations = 0;
};

constexpr double kTightnessTol = 1e-4;

/// Robust weight design: Theorem-3 dual reformulation with the Schur
/// relaxation Lbar and trace penalty alpha. Refuses to certify (status
/// AlphaTooSmall) when the relaxation is not tight.
WeightDesignResult design_weights_robust(const WeightDesignProblem& problem, double alpha,
                                         const conic::SolveOptions& options = {});

/// No-uncertainty corollary: single constraint ||B^T Lbar omega||_inf <=
/// sin(gamma_d) with omega = box midpoint (box must be a singleton).
WeightDesignResult design_weights_nominal(const WeightDesignProblem& problem, double alpha,
                                          const conic::SolveOptions& options = {});

struct AlphaSearchResult {
    bool found = false;
    double alpha = 0.0;
    WeightDesignResult result;
};

/// Bisection for the smallest alpha (relative gap 0.1) whose solve passes
/// the tightness certificate; alpha_hi is doubled (cap 2^10) until it does.
AlphaSearchResult alpha_bisection(const WeightDesignProblem& problem, double alpha_lo,
                                  double alpha_hi, bool robust = true,
                                  const conic::SolveOptions& options = {});

/// Worst-case frequency vector: argmax over the box (zero-mean slice) of
/// ||B^T L^+ omega||_inf for fixed weights, via one small LP per signed
/// incidence row. Returns the maximizer; *attained gets the value.
Eigen::VectorXd worst_case_omega(const Graph& graph, const Eigen::VectorXd& w,
                                 const OmegaBox& box, double* attained = nullptr);

namespace detail {
/// Minimum of the per-edge dual value over feasible multipliers with Lbar
/// row v = b_k^T Lbar fixed: min_nu sum_i [(v_i+nu)+ ub_i + (v_i+nu)- lb_i].
/// Equals max over the box of v' omega by LP duality; used to tighten the
/// reported multipliers after the SDP solve.
EdgeDuals tighten_edge_duals(const Eigen::VectorXd& v, const OmegaBox& box);
}  // namespace detail

}  // namespace kurnet
