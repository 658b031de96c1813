#include "kurnet/fixed_point.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kurnet {

namespace {

Eigen::VectorXd field(const KuramotoSystem& sys, const Eigen::VectorXd& theta) {
    return sys.omega - sys.graph.incidence *
                           (sys.weights.array() *
                            (sys.graph.incidence.transpose() * theta).array().sin())
                               .matrix();
}

double wrapped_sup(const Graph& graph, const Eigen::VectorXd& theta) {
    const Eigen::VectorXd diffs = graph.incidence.transpose() * theta;
    double s = 0.0;
    for (int e = 0; e < diffs.size(); ++e) s = std::max(s, std::abs(wrap_angle(diffs(e))));
    return s;
}

}  // namespace

CohesivenessReport cohesiveness_bound(const KuramotoSystem& system) {
    const auto bundle = laplacian_bundle(system.graph, system.weights);
    if (!bundle.connected)
        throw std::invalid_argument("cohesiveness_bound: graph disconnected");
    CohesivenessReport rep;
    rep.bound_sin =
        (system.graph.incidence.transpose() * (bundle.pinv * system.omega))
            .cwiseAbs()
            .maxCoeff();
    rep.feasible = rep.bound_sin < 1.0;
    if (rep.feasible) rep.bound_angle = std::asin(rep.bound_sin);
    return rep;
}

Eigen::MatrixXd kuramoto_jacobian(const KuramotoSystem& system,
                                  const Eigen::VectorXd& theta) {
    const Eigen::MatrixXd& B = system.graph.incidence;
    const Eigen::VectorXd scale =
        (system.weights.array() * (B.transpose() * theta).array().cos()).matrix();
    return -B * scale.asDiagonal() * B.transpose();
}

FixedPoint solve_fixed_point(const KuramotoSystem& system,
                             std::optional<Eigen::VectorXd> theta_init, double tol,
                             int max_iterations) {
    const int n = system.graph.n;
    Eigen::VectorXd theta;
    if (theta_init) {
        theta = *theta_init;
        if (theta.size() != n)
            throw std::invalid_argument("solve_fixed_point: theta_init length mismatch");
    } else {
        const auto bundle = laplacian_bundle(system.graph, system.weights);
        theta = bundle.pinv * system.omega;
    }
    theta.array() -= theta(0);  // ground node 1

    FixedPoint fp;
    fp.theta = theta;
    double res = field(system, theta).cwiseAbs().maxCoeff();
    int iter = 0;
    for (; iter < max_iterations && res > tol; ++iter) {
        const Eigen::VectorXd f = field(system, theta);
        const Eigen::MatrixXd J = kuramoto_jacobian(system, theta);
        // Grounded system: drop row/column of node 1.
        const Eigen::MatrixXd Jg = J.block(1, 1, n - 1, n - 1);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(Jg);
        if (!lu.isInvertible()) break;
        const Eigen::VectorXd step = lu.solve(-f.tail(n - 1));
        // Damped update: halve while the residual does not decrease.
        double alpha = 1.0;
        Eigen::VectorXd trial = theta;
        double trial_res = res;
        for (int half = 0; half < 20; ++half) {
            trial = theta;
            trial.tail(n - 1) += alpha * step;
            trial_res = field(system, trial).cwiseAbs().maxCoeff();
            if (trial_res < res) break;
            alpha *= 0.5;
        }
        if (trial_res >= res) break;  // stalled
        theta = trial;
        res = trial_res;
    }
    fp.theta = theta;
    fp.residual = res;
    fp.iterations = iter;
    fp.found = res <= tol;
    fp.cohesiveness = wrapped_sup(system.graph, theta);
    fp.stable = fp.found && fp.cohesiveness < M_PI / 2.0;
    return fp;
}

StabilityVerdict stability_check(const KuramotoSystem& system,
                                 const Eigen::VectorXd& theta_star) {
    StabilityVerdict v;
    v.cohesive = wrapped_sup(system.graph, theta_star) < M_PI / 2.0;

    Eigen::MatrixXd J = kuramoto_jacobian(system, theta_star);
    J = 0.5 * (J + J.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    const Eigen::VectorXd& evals = es.eigenvalues();
    const int n = system.graph.n;
    const double tol = 1e-8 * std::max(1.0, evals.cwiseAbs().maxCoeff());
    int negative = 0, zero = 0;
    for (int k = 0; k < n; ++k) {
        if (evals(k) < -tol)
            ++negative;
        else if (std::abs(evals(k)) <= tol)
            ++zero;
    }
    v.spectrum_ok = (negative == n - 1 && zero == 1);
    return v;
}

LemmaOneSolution lemma_one_evaluate(const KuramotoSystem& system, double r,
                                    const Eigen::VectorXd& y) {
    const int m = system.graph.edge_count();
    const int n = system.graph.n;
    if ((system.weights.array() <= 0.0).any())
        throw std::invalid_argument("lemma_one_evaluate: weights must be strictly positive");
    const Eigen::MatrixXd F = cycle_basis(system.graph);
    if (y.size() != F.cols())
        throw std::invalid_argument("lemma_one_evaluate: y length mismatch");

    const Eigen::MatrixXd& B = system.graph.incidence;
    const Eigen::VectorXd wr = system.weights.array().pow(r).matrix();
    Eigen::MatrixXd Lr = B * wr.asDiagonal() * B.transpose();
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    const Eigen::MatrixXd Lr_pinv =
        (Lr + ones).llt().solve(Eigen::MatrixXd::Identity(n, n)) - ones;

    LemmaOneSolution sol;
    sol.r = r;
    sol.y = y;
    sol.particular = system.weights.array().pow(r - 1.0).matrix().asDiagonal() *
                     (B.transpose() * (Lr_pinv * system.omega));
    sol.combined = sol.particular +
                   system.weights.cwiseInverse().asDiagonal() * (F * y);
    sol.sup_norm = m > 0 ? sol.combined.cwiseAbs().maxCoeff() : 0.0;
    if (sol.sup_norm <= 1.0 && F.cols() > 0) {
        const Eigen::VectorXd asin_c = sol.combined.array().asin().matrix();
        sol.cycle_residual = (F.transpose() * asin_c).cwiseAbs().maxCoeff();
    } else if (F.cols() == 0) {
        sol.cycle_residual = 0.0;
    } else {
        sol.cycle_residual = std::numeric_limits<double>::infinity();
    }
    sol.feasible = sol.sup_norm <= 1.0 && sol.cycle_residual <= 1e-8;
    return sol;
}

LemmaOneSolution lemma_one_solve_y(const KuramotoSystem& system, double r,
                                   double tol, int max_iterations) {
    const Eigen::MatrixXd F = cycle_basis(system.graph);
    const int q = static_cast<int>(F.cols());
    Eigen::VectorXd y = Eigen::VectorXd::Zero(q);
    if (q < 1) return lemma_one_evaluate(system, r, y);  // tree: no cycle condition

    auto eval = [&](const Eigen::VectorXd& yy) {
        return lemma_one_evaluate(system, r, yy);
    };
    LemmaOneSolution cur = eval(y);

    auto residual_norm = [](const LemmaOneSolution& s) {
        if (s.sup_norm > 1.0) return std::numeric_limits<double>::infinity();
        return s.cycle_residual;
    };
    const Eigen::VectorXd winv = system.weights.cwiseInverse();

    double res = residual_norm(cur);
    int iter = 0;
    for (; iter < max_iterations && res > tol; ++iter) {
        // g(y) = F^T asin(v), v = particular + W^{-1} F y;
        // dg/dy = F^T diag(1/sqrt(1 - v^2)) W^{-1} F.
        Eigen::VectorXd deriv(cur.combined.size());
        for (int e = 0; e < deriv.size(); ++e) {
            const double v = std::clamp(cur.combined(e), -1.0 + 1e-12, 1.0 - 1e-12);
            deriv(e) = 1.0 / std::sqrt(1.0 - v * v);
        }
        const Eigen::MatrixXd Jy =
            F.transpose() * deriv.asDiagonal() * winv.asDiagonal() * F;
        const Eigen::VectorXd g =
            F.transpose() * cur.combined.array().asin().matrix();
        Eigen::VectorXd step = Jy.fullPivLu().solve(-g);

        // Damp: halve while the arcsin domain is violated or the residual grows.
        double alpha = 1.0;
        LemmaOneSolution trial = cur;
        bool accepted = false;
        for (int half = 0; half < 21; ++half) {  // min factor 2^-20
            trial = eval(y + alpha * step);
            if (trial.sup_norm <= 1.0 && residual_norm(trial) < res) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;
        y += alpha * step;
        cur = trial;
        res = residual_norm(cur);
    }
    cur.found = res <= std::max(tol, 1e-8);
    cur.feasible = cur.found && cur.sup_norm <= 1.0;
    return cur;
}

}  // namespace kurnet
