#include "kurnet/sparse_design.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace kurnet {

namespace {

Eigen::MatrixXd edge_laplacian(int n, const std::vector<Edge>& edges,
                               const Eigen::VectorXd& w) {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (size_t e = 0; e < edges.size(); ++e) {
        const int u = edges[e].source - 1;
        const int v = edges[e].sink - 1;
        L(u, u) += w(e);
        L(v, v) += w(e);
        L(u, v) -= w(e);
        L(v, u) -= w(e);
    }
    return L;
}

// ||b_k^T L^+ omega||_inf over the base rows plus candidate rows with
// w > support_cut; L built from the full candidate weights.
struct BoundCheck {
    double bound = std::numeric_limits<double>::infinity();
    bool connected = false;
};

BoundCheck exact_bound(const SparseDesignProblem& p, const Eigen::VectorXd& w_c,
                       double support_cut) {
    const int n = p.n;
    std::vector<Edge> edges = p.base_edges;
    std::vector<double> weights(p.base_weights.data(),
                                p.base_weights.data() + p.base_weights.size());
    for (size_t e = 0; e < p.candidates.size(); ++e) {
        if (w_c(e) <= support_cut) continue;
        // a candidate may reinforce an existing line: add capacity in place
        int dup = -1;
        for (size_t b = 0; b < p.base_edges.size(); ++b) {
            const Edge& be = p.base_edges[b];
            if ((be.source == p.candidates[e].source && be.sink == p.candidates[e].sink) ||
                (be.source == p.candidates[e].sink && be.sink == p.candidates[e].source))
                dup = static_cast<int>(b);
        }
        if (dup >= 0) {
            weights[dup] += w_c(e);
        } else {
            edges.push_back(p.candidates[e]);
            weights.push_back(w_c(e));
        }
    }
    BoundCheck out;
    if (edges.empty()) return out;
    const Graph g = build_incidence(edges, n);
    const Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(weights.data(), weights.size());
    const auto bundle = laplacian_bundle(g, wv);
    out.connected = bundle.connected;
    if (!bundle.connected) return out;
    const Eigen::VectorXd vals = g.incidence.transpose() * bundle.pinv * p.omega;
    out.bound = vals.size() > 0 ? vals.cwiseAbs().maxCoeff() : 0.0;
    return out;
}

struct RoundSolve {
    conic::Status status = conic::Status::NumericalFailure;
    Eigen::VectorXd w;  // full candidate length
    Eigen::MatrixXd Lbar;
    double objective = 0.0;
};

RoundSolve solve_round(const SparseDesignProblem& p, const std::vector<int>& active,
                       const Eigen::VectorXd& prices, const conic::SolveOptions& options) {
    const int n = p.n;
    const double sin_gd = std::sin(p.gamma_d);
    const Eigen::MatrixXd L0 = edge_laplacian(n, p.base_edges, p.base_weights);

    conic::Program prog;
    std::vector<int> w_vars(active.size());
    for (size_t a = 0; a < active.size(); ++a) {
        w_vars[a] = prog.add_variable("w_" + std::to_string(active[a] + 1));
        prog.add_objective_term(w_vars[a], prices(a));
        prog.add_bounds(w_vars[a], 0.0, p.w_max);
    }
    LbarVars lbar = LbarVars::create(prog, n);
    for (int i = 0; i < n; ++i) prog.add_objective_term(lbar.at(i, i), p.alpha);

    auto add_laplacian_terms = [&](int blk, int r0) {
        for (size_t a = 0; a < active.size(); ++a) {
            const int u = p.candidates[active[a]].source - 1;
            const int v = p.candidates[active[a]].sink - 1;
            prog.add_psd_coeff(blk, r0 + u, r0 + u, w_vars[a], 1.0);
            prog.add_psd_coeff(blk, r0 + v, r0 + v, w_vars[a], 1.0);
            prog.add_psd_coeff(blk, r0 + v, r0 + u, w_vars[a], -1.0);
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j)
                if (L0(i, j) != 0.0) prog.add_psd_const(blk, r0 + i, r0 + j, L0(i, j));
    };

    const int blk = prog.add_psd_block(2 * n);
    add_laplacian_terms(blk, 0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) prog.add_psd_const(blk, i, j, 1.0 / n);
        prog.add_psd_const(blk, n + i, i, 1.0);
        for (int j = 0; j <= i; ++j) prog.add_psd_coeff(blk, n + i, n + j, lbar.at(i, j), 1.0);
    }
    const int cb = prog.add_psd_block(n);
    add_laplacian_terms(cb, 0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) prog.add_psd_const(cb, i, j, p.beta / n);
        prog.add_psd_const(cb, i, i, -p.beta);
    }

    auto add_cohesiveness = [&](const Edge& edge) {
        const int u = edge.source - 1;
        const int v = edge.sink - 1;
        std::vector<std::pair<int, double>> pos, neg;
        for (int i = 0; i < n; ++i) {
            if (p.omega(i) == 0.0) continue;
            pos.emplace_back(lbar.at(v, i), p.omega(i));
            pos.emplace_back(lbar.at(u, i), -p.omega(i));
            neg.emplace_back(lbar.at(v, i), -p.omega(i));
            neg.emplace_back(lbar.at(u, i), p.omega(i));
        }
        prog.add_inequality(pos, sin_gd);
        prog.add_inequality(neg, sin_gd);
    };
    for (const Edge& e : p.base_edges) add_cohesiveness(e);
    for (int a : active) add_cohesiveness(p.candidates[a]);

    const conic::Solution sol = conic::solve(prog, options);
    RoundSolve rs;
    rs.status = sol.status;
    if (sol.status != conic::Status::Optimal) return rs;
    rs.w = Eigen::VectorXd::Zero(static_cast<int>(p.candidates.size()));
    for (size_t a = 0; a < active.size(); ++a)
        rs.w(active[a]) = std::max(0.0, sol.x(w_vars[a]));
    rs.Lbar = Eigen::MatrixXd(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) rs.Lbar(i, j) = rs.Lbar(j, i) = sol.x(lbar.at(i, j));
    rs.objective = sol.objective;
    return rs;
}

}  // namespace

SparseDesignResult reweighted_l1(const SparseDesignProblem& problem,
                                 const conic::SolveOptions& options) {
    const int n = problem.n;
    const int mc = static_cast<int>(problem.candidates.size());
    if (problem.gamma_d < 0.0 || problem.gamma_d >= M_PI / 2.0)
        throw std::invalid_argument("reweighted_l1: gamma_d must lie in [0, pi/2)");
    if (problem.epsilon <= 0.0 || problem.epsilon >= 1.0)
        throw std::invalid_argument("reweighted_l1: epsilon must lie in (0, 1)");
    if (problem.k_max < 1) throw std::invalid_argument("reweighted_l1: k_max must be >= 1");
    if (problem.omega.size() != n)
        throw std::invalid_argument("reweighted_l1: omega length mismatch");
    if (problem.base_weights.size() != static_cast<Eigen::Index>(problem.base_edges.size()))
        throw std::invalid_argument("reweighted_l1: base weight length mismatch");

    SparseDesignResult res;
    std::vector<int> active(mc);
    for (int e = 0; e < mc; ++e) active[e] = e;
    Eigen::VectorXd prices = Eigen::VectorXd::Ones(mc);  // p^(1) = 1: plain l1

    bool have_feasible = false;
    Eigen::VectorXd last_w;
    for (int k = 1; k <= problem.k_max && !active.empty(); ++k) {
        const RoundSolve rs = solve_round(problem, active, prices, options);
        if (rs.status != conic::Status::Optimal) {
            if (!have_feasible) {
                res.status = rs.status == conic::Status::Infeasible
                                 ? DesignStatus::Infeasible
                                 : DesignStatus::NumericalFailure;
                return res;
            }
            res.warning = "round " + std::to_string(k) + " " +
                          conic::to_string(rs.status) + "; keeping round " +
                          std::to_string(k - 1);
            break;
        }

        SparseRound round;
        round.iteration = k;
        round.active = active;
        round.w = rs.w;
        round.prices = prices;
        for (int a : active)
            if (rs.w(a) > problem.epsilon) ++round.support_size;
        round.objective = rs.objective;
        {
            const Eigen::MatrixXd L_full =
                edge_laplacian(n, problem.base_edges, problem.base_weights) +
                [&] {
                    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
                    for (int a : active) {
                        const int u = problem.candidates[a].source - 1;
                        const int v = problem.candidates[a].sink - 1;
                        L(u, u) += rs.w(a);
                        L(v, v) += rs.w(a);
                        L(u, v) -= rs.w(a);
                        L(v, u) -= rs.w(a);
                    }
                    return L;
                }();
            const Eigen::MatrixXd shifted =
                L_full + Eigen::MatrixXd::Constant(n, n, 1.0 / n);
            const Eigen::MatrixXd inv =
                shifted.llt().solve(Eigen::MatrixXd::Identity(n, n));
            round.tightness = (rs.Lbar - inv).norm() / rs.Lbar.norm();
        }
        const BoundCheck bc = exact_bound(problem, rs.w, 1e-12);
        round.bound_sin_exact = bc.bound;
        round.feasible =
            bc.connected && bc.bound <= std::sin(problem.gamma_d) + 1e-5;
        res.history.push_back(round);

        have_feasible = true;
        last_w = rs.w;

        // Price update and prune.
        std::vector<int> next_active;
        std::vector<double> next_prices;
        for (int a : active) {
            if (rs.w(a) > problem.epsilon) {
                next_active.push_back(a);
                next_prices.push_back(1.0 / (problem.epsilon + rs.w(a)));
            }
        }
        active = std::move(next_active);
        prices = Eigen::Map<Eigen::VectorXd>(next_prices.data(),
                                             static_cast<Eigen::Index>(next_prices.size()));
    }

    if (!have_feasible) {
        res.status = DesignStatus::Infeasible;
        return res;
    }

    // Hard zeroing of sub-epsilon residue, then one exact re-check.
    res.w_c = last_w;
    for (int e = 0; e < mc; ++e)
        if (res.w_c(e) <= problem.epsilon) res.w_c(e) = 0.0;
    for (int e = 0; e < mc; ++e)
        if (res.w_c(e) > 0.0) res.support.push_back(e);
    const BoundCheck final_bc = exact_bound(problem, res.w_c, 0.0);
    res.bound_sin_exact = final_bc.bound;
    res.final_feasible =
        final_bc.connected && final_bc.bound <= std::sin(problem.gamma_d) + 1e-5;
    if (!res.final_feasible && res.warning.empty())
        res.warning = "pruned network fails the exact cohesiveness re-check";
    res.status = DesignStatus::Optimal;
    return res;
}

}  // namespace kurnet
