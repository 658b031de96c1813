#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace kurnet::conic {

enum class Status { Optimal, Infeasible, Unbounded, NumericalFailure };

const char* to_string(Status s);

/// Standard-form convex program: linear objective over scalar variables,
/// linear equalities and inequalities, and affine matrix expressions
/// required to be positive semidefinite.
class Program {
  public:
    int add_variable(std::string name);
    int variable_count() const { return static_cast<int>(names_.size()); }
    const std::string& variable_name(int v) const { return names_.at(v); }

    /// Adds coeff * x[var] to the (minimized) objective.
    void add_objective_term(int var, double coeff);

    /// sum(terms) == rhs. Returns the row index.
    int add_equality(const std::vector<std::pair<int, double>>& terms, double rhs);
    /// sum(terms) <= rhs. Returns the row index.
    int add_inequality(const std::vector<std::pair<int, double>>& terms, double rhs);
    /// lo <= x[var] <= hi as two inequality rows.
    void add_bounds(int var, double lo, double hi);

    /// Declares a dim x dim symmetric PSD block; entries start at zero.
    int add_psd_block(int dim);
    /// Adds coeff * x[var] to entries (r,c) and (c,r) of the block.
    void add_psd_coeff(int block, int r, int c, int var, double coeff);
    /// Adds a constant to entries (r,c) and (c,r) of the block.
    void add_psd_const(int block, int r, int c, double value);

    int equality_count() const { return static_cast<int>(eq_rhs_.size()); }
    int inequality_count() const { return static_cast<int>(ineq_rhs_.size()); }
    int psd_block_count() const { return static_cast<int>(psd_dims_.size()); }
    int psd_dim(int block) const { return psd_dims_.at(block); }

    /// Plain-text sparse dump (variables, row triplets, PSD triplets).
    std::string dump() const;

  private:
    friend class SolverImpl;
    struct PsdTerm {
        int block, row, col;
        int var;  // -1 for constant terms
        double coeff;
    };
    std::vector<std::string> names_;
    std::vector<std::pair<int, double>> objective_;
    std::vector<std::vector<std::pair<int, double>>> eq_rows_, ineq_rows_;
    std::vector<double> eq_rhs_, ineq_rhs_;
    std::vector<int> psd_dims_;
    std::vector<PsdTerm> psd_terms_;

    void check_var(int v) const;
};

struct SolveOptions {
    double feas_tol = 1e-8;
    double gap_tol = 1e-7;  // relative duality gap
    int max_iterations = 200;
    bool verbose = false;
};

struct Solution {
    Status status = Status::NumericalFailure;
    Eigen::VectorXd x;         // primal values (certificate direction when Unbounded)
    Eigen::VectorXd eq_duals;  // y (dual ray when Infeasible)
    Eigen::VectorXd ineq_duals;
    std::vector<Eigen::MatrixXd> psd_duals;
    double objective = 0.0;
    double rel_gap = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iterations = 0;
    std::string log;
};

/// Primal-dual interior-point solve (self-dual embedding, Nesterov-Todd
/// scaling). Deterministic for identical input.
Solution solve(const Program& program, const SolveOptions& options = {});

}  // namespace kurnet::conic
