#include "kurnet/freq_design.hpp"

#include <cmath>
#include <stdexcept>

namespace kurnet {

FreqDesignResult design_frequencies(const FreqDesignProblem& problem,
                                    const conic::SolveOptions& options) {
    const int n = problem.graph.n;
    const int m = problem.graph.edge_count();
    if (problem.gamma_d < 0.0 || problem.gamma_d >= M_PI / 2.0)
        throw std::invalid_argument("design_frequencies: gamma_d must lie in [0, pi/2)");
    if (problem.lower.size() != n || problem.upper.size() != n)
        throw std::invalid_argument("design_frequencies: box length mismatch");
    if ((problem.lower.array() > problem.upper.array()).any())
        throw std::invalid_argument("design_frequencies: empty box");
    const auto bundle = laplacian_bundle(problem.graph, problem.weights);
    if (!bundle.connected)
        throw std::invalid_argument("design_frequencies: graph disconnected");

    // Constraint rows b_e^T L^+ are fixed (w0 fixed; the problem is linear
    // in omega).
    const Eigen::MatrixXd rows = problem.graph.incidence.transpose() * bundle.pinv;
    const double sin_gd = std::sin(problem.gamma_d);

    conic::Program prog;
    std::vector<int> vo(n);
    for (int i = 0; i < n; ++i)
        vo[i] = prog.add_variable("omega_" + std::to_string(i + 1));

    if (problem.cost == CostKind::WeightedL1) {
        // Epigraph split: t_i >= c_i |omega_i - omega0_i|.
        for (int i = 0; i < n; ++i) {
            const int t = prog.add_variable("t_" + std::to_string(i + 1));
            const double c = problem.prices.size() == n ? problem.prices(i) : 1.0;
            prog.add_objective_term(t, 1.0);
            prog.add_inequality({{vo[i], c}, {t, -1.0}}, c * problem.omega_nominal(i));
            prog.add_inequality({{vo[i], -c}, {t, -1.0}}, -c * problem.omega_nominal(i));
        }
    } else {
        // t >= ||omega - omega0||^2 via the Schur block
        // [[I, omega - omega0], [(omega - omega0)^T, t]] >= 0.
        const int t = prog.add_variable("t_quad");
        prog.add_objective_term(t, 1.0);
        const int blk = prog.add_psd_block(n + 1);
        for (int i = 0; i < n; ++i) {
            prog.add_psd_const(blk, i, i, 1.0);
            prog.add_psd_coeff(blk, i, n, vo[i], 1.0);
            prog.add_psd_const(blk, i, n, -problem.omega_nominal(i));
        }
        prog.add_psd_coeff(blk, n, n, t, 1.0);
    }

    // Cohesiveness rows: +-(b_e^T L^+) omega <= sin(gamma_d).
    for (int e = 0; e < m; ++e) {
        std::vector<std::pair<int, double>> pos, neg;
        for (int i = 0; i < n; ++i) {
            if (rows(e, i) != 0.0) {
                pos.emplace_back(vo[i], rows(e, i));
                neg.emplace_back(vo[i], -rows(e, i));
            }
        }
        prog.add_inequality(pos, sin_gd);
        prog.add_inequality(neg, sin_gd);
    }

    // Mean constraint and box.
    {
        std::vector<std::pair<int, double>> mean;
        for (int i = 0; i < n; ++i) mean.emplace_back(vo[i], 1.0 / n);
        prog.add_equality(mean, problem.omega_s);
    }
    for (int i = 0; i < n; ++i) prog.add_bounds(vo[i], problem.lower(i), problem.upper(i));

    const conic::Solution sol = conic::solve(prog, options);
    FreqDesignResult res;
    res.status = sol.status;
    if (sol.status == conic::Status::Infeasible) {
        res.dual_ray = sol.eq_duals;
        return res;
    }
    if (sol.status != conic::Status::Optimal) return res;

    res.omega = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) res.omega(i) = sol.x(vo[i]);
    res.cost = sol.objective;
    const Eigen::VectorXd vals = rows * res.omega;
    res.bound_sin = m > 0 ? vals.cwiseAbs().maxCoeff() : 0.0;
    for (int e = 0; e < m; ++e)
        if (std::abs(std::abs(vals(e)) - sin_gd) <= 1e-6) res.active_edges.push_back(e);
    return res;
}

}  // namespace kurnet
