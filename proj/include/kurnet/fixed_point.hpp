#pragma once

#include <Eigen/Dense>
#include <optional>

#include "kurnet/simulate.hpp"

namespace kurnet {

/// Analytic phase-cohesiveness bound: ||B^T L^+ omega||_inf certifies a
/// unique stable synchronized solution with cohesiveness asin(bound) when
/// it is below one.
struct CohesivenessReport {
    double bound_sin = 0.0;
    std::optional<double> bound_angle;   // asin(bound_sin), defined when < 1
    bool feasible = false;               // bound_sin < 1
    std::optional<double> simulated_phi; // attached by callers after simulation
};

CohesivenessReport cohesiveness_bound(const KuramotoSystem& system);

/// Synchronized fixed point omega = B diag(w) sin(B^T theta*), grounded at
/// node 1 (theta*_1 = 0).
struct FixedPoint {
    bool found = false;
    Eigen::VectorXd theta;       // length n; theta(0) == 0
    double residual = 0.0;       // ||omega - B diag(w) sin(B^T theta)||_inf
    double cohesiveness = 0.0;   // ||wrap(B^T theta)||_inf
    bool stable = false;         // sufficient condition: cohesiveness < pi/2
    int iterations = 0;
};

/// Damped Newton on the grounded system. Default start is the
/// linearization L^+ omega. "Not found" means no root from this start,
/// never a nonexistence claim.
FixedPoint solve_fixed_point(const KuramotoSystem& system,
                             std::optional<Eigen::VectorXd> theta_init = std::nullopt,
                             double tol = 1e-10, int max_iterations = 100);

/// Jacobian of the Kuramoto vector field at theta:
/// J = -B diag(w) diag(cos(B^T theta)) B^T.
Eigen::MatrixXd kuramoto_jacobian(const KuramotoSystem& system,
                                  const Eigen::VectorXd& theta);

struct StabilityVerdict {
    bool cohesive = false;     // ||wrap(B^T theta*)||_inf < pi/2 (sufficient)
    bool spectrum_ok = false;  // J has n-1 negative eigenvalues + one zero mode
};

StabilityVerdict stability_check(const KuramotoSystem& system,
                                 const Eigen::VectorXd& theta_star);

/// One member of the parametric fixed-point family
/// sin(B^T theta*) = W^{r-1} B^T (B W^r B^T)^+ omega + W^{-1} F y.
struct LemmaOneSolution {
    double r = 1.0;
    Eigen::VectorXd particular;  // length m
    Eigen::VectorXd y;           // length m-n+1
    Eigen::VectorXd combined;    // particular + W^{-1} F y
    double sup_norm = 0.0;       // ||combined||_inf (must be <= 1 to accept)
    double cycle_residual = 0.0; // ||F^T asin(combined)||_inf, principal branch
    bool feasible = false;       // both conditions hold
    bool found = true;           // solve_y: root located
};

/// Evaluates the family at a given (r, y) without solving anything.
/// Requires strictly positive weights.
LemmaOneSolution lemma_one_evaluate(const KuramotoSystem& system, double r,
                                    const Eigen::VectorXd& y);

/// Damped Newton root-find of the cycle condition
/// F^T asin(particular + W^{-1} F y) = 0 starting from y = 0.
LemmaOneSolution lemma_one_solve_y(const KuramotoSystem& system, double r,
                                   double tol = 1e-10, int max_iterations = 100);

}  // namespace kurnet
