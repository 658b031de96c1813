#include "kurnet/weight_design.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace kurnet {

namespace {

DesignStatus map_status(conic::Status s) {
    switch (s) {
        case conic::Status::Optimal: return DesignStatus::Optimal;
        case conic::Status::Infeasible: return DesignStatus::Infeasible;
        default: return DesignStatus::NumericalFailure;
    }
}

void validate(const WeightDesignProblem& p) {
    const int n = p.graph.n;
    if (p.gamma_d < 0.0 || p.gamma_d >= M_PI / 2.0)
        throw std::invalid_argument("weight design: gamma_d must lie in [0, pi/2)");
    if (p.w_max <= 0.0) throw std::invalid_argument("weight design: w_max must be positive");
    if (p.box.lower.size() != n || p.box.upper.size() != n)
        throw std::invalid_argument("weight design: box length mismatch");
    if ((p.box.lower.array() > p.box.upper.array()).any() || !p.box.nonempty())
        throw std::invalid_argument("weight design: empty frequency box");
    if (p.cost.size() != 0 && p.cost.size() != p.graph.edge_count())
        throw std::invalid_argument("weight design: cost length mismatch");
}

// (b_k^T Lbar)_i as variable terms: Lbar(v,i) - Lbar(u,i) for edge (u,v).
void append_row_terms(std::vector<std::pair<int, double>>& terms, const LbarVars& lbar, int u,
                      int v, int i, double sign) {
    if (u == v) return;
    terms.emplace_back(lbar.at(v, i), sign);
    terms.emplace_back(lbar.at(u, i), -sign);
}

struct AssembledSdp {
    conic::Program prog;
    std::vector<int> w_vars;
    LbarVars lbar;
    RobustConstraintBlock robust;
};

AssembledSdp assemble(const WeightDesignProblem& p, double alpha, bool robust) {
    const int n = p.graph.n;
    const int m = p.graph.edge_count();
    AssembledSdp a;
    conic::Program& prog = a.prog;

    a.w_vars.resize(m);
    for (int e = 0; e < m; ++e) {
        a.w_vars[e] = prog.add_variable("w_" + std::to_string(e + 1));
        const double c = p.cost.size() == m ? p.cost(e) : 1.0;
        prog.add_objective_term(a.w_vars[e], c);
        prog.add_bounds(a.w_vars[e], 0.0, p.w_max);
    }
    a.lbar = LbarVars::create(prog, n);
    for (int i = 0; i < n; ++i) prog.add_objective_term(a.lbar.at(i, i), alpha);

    // Schur block [[B diag(w) B^T + 11^T/n, I], [I, Lbar]] >= 0.
    const int blk = prog.add_psd_block(2 * n);
    for (int e = 0; e < m; ++e) {
        const int u = p.graph.edges[e].source - 1;
        const int v = p.graph.edges[e].sink - 1;
        prog.add_psd_coeff(blk, u, u, a.w_vars[e], 1.0);
        prog.add_psd_coeff(blk, v, v, a.w_vars[e], 1.0);
        prog.add_psd_coeff(blk, v, u, a.w_vars[e], -1.0);
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) prog.add_psd_const(blk, i, j, 1.0 / n);
        prog.add_psd_const(blk, n + i, i, 1.0);
        for (int j = 0; j <= i; ++j) prog.add_psd_coeff(blk, n + i, n + j, a.lbar.at(i, j), 1.0);
    }

    // Connectivity: B diag(w) B^T + (beta/n) 11^T - beta I >= 0.
    if (p.connectivity_lmi) {
        const int cb = prog.add_psd_block(n);
        for (int e = 0; e < m; ++e) {
            const int u = p.graph.edges[e].source - 1;
            const int v = p.graph.edges[e].sink - 1;
            prog.add_psd_coeff(cb, u, u, a.w_vars[e], 1.0);
            prog.add_psd_coeff(cb, v, v, a.w_vars[e], 1.0);
            prog.add_psd_coeff(cb, v, u, a.w_vars[e], -1.0);
        }
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j <= i; ++j) prog.add_psd_const(cb, i, j, p.beta / n);
            prog.add_psd_const(cb, i, i, -p.beta);
        }
    }

    const double sin_gd = std::sin(p.gamma_d);
    if (robust) {
        a.robust = assemble_robust_constraints(prog, p.graph, a.lbar, p.box, p.gamma_d);
    } else {
        const Eigen::VectorXd omega = 0.5 * (p.box.lower + p.box.upper);
        for (int e = 0; e < m; ++e) {
            const int u = p.graph.edges[e].source - 1;
            const int v = p.graph.edges[e].sink - 1;
            std::vector<std::pair<int, double>> pos, neg;
            for (int i = 0; i < n; ++i) {
                if (omega(i) == 0.0) continue;
                append_row_terms(pos, a.lbar, u, v, i, omega(i));
                append_row_terms(neg, a.lbar, u, v, i, -omega(i));
            }
            prog.add_inequality(pos, sin_gd);
            prog.add_inequality(neg, sin_gd);
        }
    }
    return a;
}

WeightDesignResult run_design(const WeightDesignProblem& p, double alpha, bool robust,
                              const conic::SolveOptions& options) {
    validate(p);
    const int n = p.graph.n;
    const int m = p.graph.edge_count();
    AssembledSdp a = assemble(p, alpha, robust);
    const conic::Solution sol = conic::solve(a.prog, options);

    WeightDesignResult res;
    res.status = map_status(sol.status);
    res.rel_gap = sol.rel_gap;
    res.iterations = sol.iterations;
    if (res.status != DesignStatus::Optimal) return res;

    res.w = Eigen::VectorXd(m);
    for (int e = 0; e < m; ++e) res.w(e) = std::max(0.0, sol.x(a.w_vars[e]));
    res.cost = 0.0;
    for (int e = 0; e < m; ++e)
        res.cost += (p.cost.size() == m ? p.cost(e) : 1.0) * res.w(e);
    res.Lbar = Eigen::MatrixXd(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) res.Lbar(i, j) = res.Lbar(j, i) = sol.x(a.lbar.at(i, j));
    res.trace_term = res.Lbar.trace();

    // Tightness certificate: re-invert the designed Laplacian and compare.
    const Eigen::MatrixXd L =
        p.graph.incidence * res.w.asDiagonal() * p.graph.incidence.transpose();
    const Eigen::MatrixXd shifted =
        L + Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    const Eigen::MatrixXd inv = shifted.llt().solve(Eigen::MatrixXd::Identity(n, n));
    res.tightness = (res.Lbar - inv).norm() / res.Lbar.norm();
    res.tight = res.tightness <= kTightnessTol;
    if (!res.tight) res.status = DesignStatus::AlphaTooSmall;

    // Exact post-check on the true pseudoinverse bound.
    const auto bundle = laplacian_bundle(p.graph, res.w);
    if (bundle.connected) {
        if (robust && !p.box.singleton()) {
            worst_case_omega(p.graph, res.w, p.box, &res.bound_sin_exact);
        } else {
            const Eigen::VectorXd omega = 0.5 * (p.box.lower + p.box.upper);
            const Eigen::VectorXd vals =
                p.graph.incidence.transpose() * bundle.pinv * omega;
            res.bound_sin_exact = m > 0 ? vals.cwiseAbs().maxCoeff() : 0.0;
        }
    }

    // Report the tightest multipliers consistent with Lbar* (the solver's
    // own duals are feasible but not extremal; these attain the per-edge
    // worst case by LP duality).
    if (robust) {
        res.edge_duals.reserve(m);
        for (int e = 0; e < m; ++e) {
            const int u = p.graph.edges[e].source - 1;
            const int v = p.graph.edges[e].sink - 1;
            const Eigen::VectorXd row = res.Lbar.row(v) - res.Lbar.row(u);
            res.edge_duals.push_back(detail::tighten_edge_duals(row, p.box));
        }
    }
    return res;
}

}  // namespace

bool OmegaBox::nonempty() const {
    return lower.sum() <= 0.0 && upper.sum() >= 0.0;
}

const char* to_string(DesignStatus s) {
    switch (s) {
        case DesignStatus::Optimal: return "optimal";
        case DesignStatus::Infeasible: return "infeasible";
        case DesignStatus::AlphaTooSmall: return "alpha_too_small";
        case DesignStatus::TightnessUnreachable: return "tightness_unreachable";
        case DesignStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

LbarVars LbarVars::create(conic::Program& prog, int n) {
    LbarVars l;
    l.n = n;
    l.ids.reserve(n * (n + 1) / 2);
    for (int j = 0; j < n; ++j)
        for (int i = j; i < n; ++i)
            l.ids.push_back(prog.add_variable("Lbar_" + std::to_string(i + 1) + "_" +
                                              std::to_string(j + 1)));
    return l;
}

RobustConstraintBlock assemble_robust_constraints(conic::Program& prog, const Graph& graph,
                                                  const LbarVars& lbar, const OmegaBox& box,
                                                  double gamma_d) {
    const int n = graph.n;
    const int m = graph.edge_count();
    const double sin_gd = std::sin(gamma_d);
    RobustConstraintBlock block;
    block.edges.resize(m);

    for (int e = 0; e < m; ++e) {
        const int u = graph.edges[e].source - 1;
        const int v = graph.edges[e].sink - 1;
        RobustEdgeVars& ev = block.edges[e];
        const std::string tag = "_" + std::to_string(e + 1);
        auto nonneg_group = [&](const char* base) {
            std::vector<int> ids(n);
            for (int i = 0; i < n; ++i) {
                ids[i] = prog.add_variable(base + tag + "_" + std::to_string(i + 1));
                prog.add_inequality({{ids[i], -1.0}}, 0.0);
            }
            return ids;
        };
        ev.lambda_hi = nonneg_group("lam_hi");
        ev.lambda_lo = nonneg_group("lam_lo");
        ev.gamma_hi = nonneg_group("gam_hi");
        ev.gamma_lo = nonneg_group("gam_lo");
        ev.nu = prog.add_variable("nu" + tag);
        ev.eta = prog.add_variable("eta" + tag);

        // Dual-value rows: lam_hi' ub - lam_lo' lb <= sin(gamma_d).
        std::vector<std::pair<int, double>> pos, neg;
        for (int i = 0; i < n; ++i) {
            pos.emplace_back(ev.lambda_hi[i], box.upper(i));
            pos.emplace_back(ev.lambda_lo[i], -box.lower(i));
            neg.emplace_back(ev.gamma_hi[i], box.upper(i));
            neg.emplace_back(ev.gamma_lo[i], -box.lower(i));
        }
        ev.row_pos = prog.add_inequality(pos, sin_gd);
        ev.row_neg = prog.add_inequality(neg, sin_gd);

        // Stationarity: lam_lo - lam_hi + nu 1 + b_k^T Lbar = 0 and the
        // mirrored row with -b_k^T Lbar.
        for (int i = 0; i < n; ++i) {
            std::vector<std::pair<int, double>> st{{ev.lambda_lo[i], 1.0},
                                                   {ev.lambda_hi[i], -1.0},
                                                   {ev.nu, 1.0}};
            append_row_terms(st, lbar, u, v, i, 1.0);
            prog.add_equality(st, 0.0);
            std::vector<std::pair<int, double>> st2{{ev.gamma_lo[i], 1.0},
                                                    {ev.gamma_hi[i], -1.0},
                                                    {ev.eta, 1.0}};
            append_row_terms(st2, lbar, u, v, i, -1.0);
            prog.add_equality(st2, 0.0);
        }
    }
    return block;
}

WeightDesignResult design_weights_robust(const WeightDesignProblem& problem, double alpha,
                                         const conic::SolveOptions& options) {
    return run_design(problem, alpha, true, options);
}

WeightDesignResult design_weights_nominal(const WeightDesignProblem& problem, double alpha,
                                          const conic::SolveOptions& options) {
    return run_design(problem, alpha, false, options);
}

AlphaSearchResult alpha_bisection(const WeightDesignProblem& problem, double alpha_lo,
                                  double alpha_hi, bool robust,
                                  const conic::SolveOptions& options) {
    if (!(alpha_lo < alpha_hi)) throw std::invalid_argument("alpha_bisection: need lo < hi");
    auto solve_at = [&](double alpha) {
        return robust ? design_weights_robust(problem, alpha, options)
                      : design_weights_nominal(problem, alpha, options);
    };
    constexpr double kAlphaCap = 1024.0;  // 2^10

    AlphaSearchResult out;
    WeightDesignResult hi_res = solve_at(alpha_hi);
    while (!hi_res.tight) {
        if (hi_res.status == DesignStatus::Infeasible ||
            hi_res.status == DesignStatus::NumericalFailure) {
            out.result = hi_res;
            return out;
        }
        if (alpha_hi >= kAlphaCap) {
            out.result = hi_res;
            out.result.status = DesignStatus::TightnessUnreachable;
            return out;
        }
        alpha_hi = std::min(2.0 * alpha_hi, kAlphaCap);
        hi_res = solve_at(alpha_hi);
    }

    // Smallest tight alpha within relative gap 0.1.
    double lo = alpha_lo, hi = alpha_hi;
    WeightDesignResult best = hi_res;
    double best_alpha = alpha_hi;
    {
        WeightDesignResult lo_res = solve_at(lo);
        if (lo_res.tight) {
            out.found = true;
            out.alpha = lo;
            out.result = lo_res;
            return out;
        }
    }
    while (hi - lo > 0.1 * hi) {
        const double mid = 0.5 * (lo + hi);
        WeightDesignResult mid_res = solve_at(mid);
        if (mid_res.tight) {
            hi = mid;
            best = mid_res;
            best_alpha = mid;
        } else {
            lo = mid;
        }
    }
    out.found = true;
    out.alpha = best_alpha;
    out.result = best;
    return out;
}

Eigen::VectorXd worst_case_omega(const Graph& graph, const Eigen::VectorXd& w,
                                 const OmegaBox& box, double* attained) {
    const int n = graph.n;
    if (box.lower.size() != n || box.upper.size() != n ||
        (box.lower.array() > box.upper.array()).any() || !box.nonempty())
        throw std::invalid_argument("worst_case_omega: empty frequency box");
    const auto bundle = laplacian_bundle(graph, w);
    if (!bundle.connected)
        throw std::invalid_argument("worst_case_omega: weighted graph disconnected");
    const Eigen::MatrixXd rows = graph.incidence.transpose() * bundle.pinv;

    double best = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_omega = 0.5 * (box.lower + box.upper);
    if (box.singleton()) {
        if (attained) {
            const Eigen::VectorXd vals = rows * best_omega;
            *attained = vals.size() > 0 ? vals.cwiseAbs().maxCoeff() : 0.0;
        }
        return best_omega;
    }

    for (int e = 0; e < rows.rows(); ++e) {
        for (const double sign : {1.0, -1.0}) {
            conic::Program lp;
            std::vector<int> vo(n);
            std::vector<std::pair<int, double>> mean;
            for (int i = 0; i < n; ++i) {
                vo[i] = lp.add_variable("omega_" + std::to_string(i + 1));
                lp.add_objective_term(vo[i], -sign * rows(e, i));
                lp.add_bounds(vo[i], box.lower(i), box.upper(i));
                mean.emplace_back(vo[i], 1.0);
            }
            lp.add_equality(mean, 0.0);
            const conic::Solution sol = conic::solve(lp);
            if (sol.status != conic::Status::Optimal)
                throw std::runtime_error("worst_case_omega: LP subproblem failed");
            if (-sol.objective > best) {
                best = -sol.objective;
                for (int i = 0; i < n; ++i) best_omega(i) = sol.x(vo[i]);
            }
        }
    }
    if (attained) *attained = best;
    return best_omega;
}

namespace detail {

EdgeDuals tighten_edge_duals(const Eigen::VectorXd& v, const OmegaBox& box) {
    const int n = static_cast<int>(v.size());
    // min over nu of g(nu) = sum_i (v_i+nu)+ ub_i + (v_i+nu)- lb_i; the
    // optimum sits at a breakpoint nu = -v_i (g is convex piecewise linear).
    auto minimize = [&](const Eigen::VectorXd& vv) {
        auto g = [&](double nu) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                const double t = vv(i) + nu;
                s += t > 0.0 ? t * box.upper(i) : t * box.lower(i);
            }
            return s;
        };
        double best_nu = 0.0, best_val = g(0.0);
        for (int i = 0; i < n; ++i) {
            const double val = g(-vv(i));
            if (val < best_val) {
                best_val = val;
                best_nu = -vv(i);
            }
        }
        return std::make_pair(best_nu, best_val);
    };

    EdgeDuals d;
    const auto [nu, vp] = minimize(v);
    const auto [eta, vn] = minimize(-v);
    d.nu = nu;
    d.eta = eta;
    d.value_pos = vp;
    d.value_neg = vn;
    d.lambda_hi = (v.array() + nu).max(0.0).matrix();
    d.lambda_lo = (-(v.array() + nu)).max(0.0).matrix();
    d.gamma_hi = ((-v).array() + eta).max(0.0).matrix();
    d.gamma_lo = (-((-v).array() + eta)).max(0.0).matrix();
    return d;
}

}  // namespace detail

}  // namespace kurnet
