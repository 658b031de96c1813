#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"
#include "kurnet/experiments.hpp"
#include "kurnet/fixed_point.hpp"
#include "kurnet/freq_design.hpp"
#include "kurnet/graph.hpp"
#include "kurnet/json_io.hpp"
#include "kurnet/simulate.hpp"
#include "kurnet/sparse_design.hpp"
#include "kurnet/weight_design.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;   // solved but infeasible / unsynchronized
constexpr int kExitInputError = 2;
constexpr int kExitNumerical = 3;

struct CommonArgs {
    std::string config;
    std::string out = ".";
    std::uint64_t seed = 0;
    std::string alpha = "2";
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config parse error: " + std::string(e.what()));
    }
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    return j;
}

kurnet::WeightedGraph config_graph(const json& cfg) {
    if (cfg.contains("graph_path")) return kurnet::load_graph_file(cfg["graph_path"]);
    if (cfg.contains("graph")) return kurnet::graph_from_json(cfg["graph"]);
    throw std::invalid_argument("config needs \"graph\" or \"graph_path\"");
}

Eigen::VectorXd config_vector(const json& cfg, const std::string& key, int size) {
    if (!cfg.contains(key)) throw std::invalid_argument("config needs \"" + key + "\"");
    return kurnet::vector_from_json(cfg[key], size);
}

double config_number(const json& cfg, const std::string& key, std::optional<double> dflt = {}) {
    if (!cfg.contains(key)) {
        if (dflt) return *dflt;
        throw std::invalid_argument("config needs \"" + key + "\"");
    }
    if (!cfg[key].is_number()) throw std::invalid_argument("\"" + key + "\" must be a number");
    return cfg[key].get<double>();
}

void write_out(const std::string& dir, const std::string& name, const std::string& body) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir + "/" + name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + dir + "/" + name);
    out << body;
}

void write_out_json(const std::string& dir, const std::string& name, const json& j) {
    write_out(dir, name, j.dump(2) + "\n");
}

double parse_alpha(const std::string& s, bool* is_auto) {
    if (s == "auto") {
        *is_auto = true;
        return 2.0;
    }
    *is_auto = false;
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("--alpha must be a number or \"auto\"");
    return v;
}

int cmd_bound(const CommonArgs& args) {
    const json cfg = load_config(args.config);
    const auto wg = config_graph(cfg);
    const Eigen::VectorXd omega = config_vector(cfg, "omega", wg.graph.n);
    const kurnet::KuramotoSystem sys{wg.graph, wg.weights, omega};
    const kurnet::CohesivenessReport report = kurnet::cohesiveness_bound(sys);
    write_out_json(args.out, "bound.json", kurnet::report_to_json(report));
    std::cout << "bound_sin " << report.bound_sin
              << (report.feasible ? " feasible" : " infeasible") << "\n";
    return report.feasible ? kExitOk : kExitInfeasible;
}

int cmd_simulate(const CommonArgs& args) {
    const json cfg = load_config(args.config);
    const auto wg = config_graph(cfg);
    const Eigen::VectorXd omega = config_vector(cfg, "omega", wg.graph.n);
    Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(wg.graph.n);
    if (cfg.contains("theta0")) theta0 = kurnet::vector_from_json(cfg["theta0"], wg.graph.n);
    const double T = config_number(cfg, "T", kurnet::sim_defaults::kHorizon);
    const double h = config_number(cfg, "h", kurnet::sim_defaults::kStep);
    const double tail = config_number(cfg, "tail_fraction", kurnet::sim_defaults::kTailFraction);
    const double tol = config_number(cfg, "tol", kurnet::sim_defaults::kSyncTol);

    const kurnet::KuramotoSystem sys{wg.graph, wg.weights, omega};
    const kurnet::Trajectory traj = kurnet::integrate(sys, theta0, T, h);
    const kurnet::SyncStatus st = kurnet::detect_sync(traj, tail, tol);
    std::ostringstream csv;
    kurnet::write_trajectory_csv(csv, traj);
    write_out(args.out, "trajectory.csv", csv.str());
    json jst = kurnet::sync_to_json(st);
    if (st.synchronized)
        jst["phi"] = kurnet::measure_cohesiveness(wg.graph, traj, st);
    write_out_json(args.out, "sync.json", jst);
    std::cout << (st.synchronized ? "synchronized" : "not synchronized") << "\n";
    return st.synchronized ? kExitOk : kExitInfeasible;
}

int cmd_fixed_point(const CommonArgs& args) {
    const json cfg = load_config(args.config);
    const auto wg = config_graph(cfg);
    const Eigen::VectorXd omega = config_vector(cfg, "omega", wg.graph.n);
    std::optional<Eigen::VectorXd> init;
    if (cfg.contains("theta_init"))
        init = kurnet::vector_from_json(cfg["theta_init"], wg.graph.n);

    const kurnet::KuramotoSystem sys{wg.graph, wg.weights, omega};
    const kurnet::CenteredSystem centered = kurnet::center_frequencies(sys);
    const kurnet::FixedPoint fp = kurnet::solve_fixed_point(centered.system, init);
    json j = {{"found", fp.found},
              {"residual", fp.residual},
              {"cohesiveness", fp.cohesiveness},
              {"stable", fp.stable},
              {"iterations", fp.iterations},
              {"omega_s", centered.omega_s}};
    if (fp.found) j["theta"] = kurnet::vector_to_json(fp.theta);
    write_out_json(args.out, "fixed_point.json", j);
    std::cout << (fp.found ? "found" : "not found") << "\n";
    return fp.found && fp.stable ? kExitOk : kExitInfeasible;
}

int cmd_freq_design(const CommonArgs& args) {
    const json cfg = load_config(args.config);
    const auto wg = config_graph(cfg);
    const int n = wg.graph.n;
    kurnet::FreqDesignProblem p;
    p.graph = wg.graph;
    p.weights = wg.weights;
    p.gamma_d = config_number(cfg, "gamma_d");
    p.omega_s = config_number(cfg, "omega_s", 0.0);
    const std::string cost = cfg.value("cost", "l1");
    if (cost == "l1")
        p.cost = kurnet::CostKind::WeightedL1;
    else if (cost == "quadratic")
        p.cost = kurnet::CostKind::Quadratic;
    else
        throw std::invalid_argument("cost must be \"l1\" or \"quadratic\"");
    p.omega_nominal = config_vector(cfg, "omega_nominal", n);
    if (cfg.contains("prices")) p.prices = kurnet::vector_from_json(cfg["prices"], n);
    p.lower = config_vector(cfg, "lower", n);
    p.upper = config_vector(cfg, "upper", n);

    const kurnet::FreqDesignResult res = kurnet::design_frequencies(p);
    json j = {{"status", kurnet::conic::to_string(res.status)}};
    if (res.status == kurnet::conic::Status::Optimal) {
        j["omega"] = kurnet::vector_to_json(res.omega);
        j["cost"] = res.cost;
        j["bound_sin"] = res.bound_sin;
        j["active_edges"] = res.active_edges;
    } else if (res.status == kurnet::conic::Status::Infeasible) {
        j["dual_ray"] = kurnet::vector_to_json(res.dual_ray);
    }
    write_out_json(args.out, "freq_design.json", j);
    std::cout << "status " << kurnet::conic::to_string(res.status) << "\n";
    if (res.status == kurnet::conic::Status::Optimal)
        return res.bound_sin <= std::sin(p.gamma_d) + 1e-6 ? kExitOk : kExitInfeasible;
    return res.status == kurnet::conic::Status::Infeasible ? kExitInfeasible : kExitNumerical;
}

int cmd_weight_design(const CommonArgs& args) {
    const json cfg = load_config(args.config);
    const auto wg = config_graph(cfg);
    const int n = wg.graph.n;
    kurnet::WeightDesignProblem p;
    p.graph = wg.graph;
    bool robust = false;
    if (cfg.contains("box")) {
        p.box.lower = kurnet::vector_from_json(cfg["box"]["lower"], n);
        p.box.upper = kurnet::vector_from_json(cfg["box"]["upper"], n);
        robust = true;
    } else {
        const Eigen::VectorXd omega = config_vector(cfg, "omega", n);
        p.box = kurnet::OmegaBox::point(omega);
    }
    p.gamma_d = config_number(cfg, "gamma_d");
    if (cfg.contains("cost"))
        p.cost = kurnet::vector_from_json(cfg["cost"], wg.graph.edge_count());
    p.w_max = config_number(cfg, "w_max", 10.0);
    p.beta = config_number(cfg, "beta", 1e-4);
    p.connectivity_lmi = cfg.value("connectivity_lmi", true);

    bool alpha_auto = false;
    const double alpha = parse_alpha(args.alpha, &alpha_auto);
    kurnet::WeightDesignResult res;
    double alpha_used = alpha;
    if (alpha_auto) {
        const auto as = kurnet::alpha_bisection(p, 0.125, 2.0, robust);
        res = as.result;
        alpha_used = as.alpha;
    } else {
        res = robust ? kurnet::design_weights_robust(p, alpha)
                     : kurnet::design_weights_nominal(p, alpha);
    }

    json j = {{"status", kurnet::to_string(res.status)}, {"alpha", alpha_used}};
    if (res.w.size() > 0) {
        j["w"] = kurnet::vector_to_json(res.w);
        j["cost"] = res.cost;
        j["tightness"] = res.tightness;
        j["bound_sin_exact"] = res.bound_sin_exact;
        json duals = json::array();
        for (const auto& d : res.edge_duals)
            duals.push_back({{"value_pos", d.value_pos},
                             {"value_neg", d.value_neg},
                             {"nu", d.nu},
                             {"eta", d.eta}});
        j["edge_duals"] = duals;
    }
    write_out_json(args.out, "weight_design.json", j);
    std::cout << "status " << kurnet::to_string(res.status) << "\n";
    switch (res.status) {
        case kurnet::DesignStatus::Optimal:
            return res.bound_sin_exact <= std::sin(p.gamma_d) + 1e-5 ? kExitOk
                                                                     : kExitInfeasible;
        case kurnet::DesignStatus::Infeasible:
            return kExitInfeasible;
        default:
            return kExitNumerical;
    }
}

int cmd_sparse_design(const CommonArgs& args) {
    const json cfg = load_config(args.config);
    kurnet::SparseDesignProblem p;
    if (!cfg.contains("n") || !cfg["n"].is_number_integer())
        throw std::invalid_argument("config needs integer \"n\"");
    p.n = cfg["n"].get<int>();
    if (cfg.contains("base")) {
        const auto base = kurnet::graph_from_json({{"n", p.n}, {"edges", cfg["base"]}});
        p.base_edges = base.graph.edges;
        p.base_weights = base.weights;
    } else {
        p.base_weights = Eigen::VectorXd(0);
    }
    if (!cfg.contains("candidates") || !cfg["candidates"].is_array())
        throw std::invalid_argument("config needs \"candidates\" array");
    for (const auto& je : cfg["candidates"]) {
        if (!je.contains("source") || !je.contains("sink"))
            throw std::invalid_argument("candidate entries need \"source\" and \"sink\"");
        p.candidates.push_back({je["source"].get<int>(), je["sink"].get<int>()});
    }
    p.omega = config_vector(cfg, "omega", p.n);
    p.gamma_d = config_number(cfg, "gamma_d");
    bool alpha_auto = false;
    p.alpha = parse_alpha(args.alpha, &alpha_auto);
    if (alpha_auto) p.alpha = 2.0;
    p.w_max = config_number(cfg, "w_max", 10.0);
    p.epsilon = config_number(cfg, "epsilon", 0.01);
    p.k_max = static_cast<int>(config_number(cfg, "k_max", 10));
    p.beta = config_number(cfg, "beta", 1e-4);

    const kurnet::SparseDesignResult res = kurnet::reweighted_l1(p);
    json rounds = json::array();
    for (const auto& r : res.history) {
        json pattern = json::array();  // adjacency sparsity per round
        for (int e = 0; e < r.w.size(); ++e)
            if (r.w(e) > p.epsilon)
                pattern.push_back({{"source", p.candidates[e].source},
                                   {"sink", p.candidates[e].sink},
                                   {"weight", r.w(e)}});
        rounds.push_back({{"iteration", r.iteration},
                          {"support_size", r.support_size},
                          {"objective", r.objective},
                          {"bound_sin_exact", r.bound_sin_exact},
                          {"feasible", r.feasible},
                          {"pattern", pattern}});
    }
    write_out_json(args.out, "sparse_rounds.json", rounds);
    json j = {{"status", kurnet::to_string(res.status)}, {"warning", res.warning}};
    if (res.status == kurnet::DesignStatus::Optimal) {
        j["w_c"] = kurnet::vector_to_json(res.w_c);
        j["support"] = res.support;
        j["bound_sin_exact"] = res.bound_sin_exact;
        j["final_feasible"] = res.final_feasible;
    }
    write_out_json(args.out, "sparse_result.json", j);
    std::cout << "status " << kurnet::to_string(res.status) << "\n";
    if (res.status == kurnet::DesignStatus::Optimal)
        return res.final_feasible ? kExitOk : kExitInfeasible;
    return res.status == kurnet::DesignStatus::Infeasible ? kExitInfeasible : kExitNumerical;
}

int cmd_braess_scan(const CommonArgs& args) {
    const json cfg = load_config(args.config);
    const auto wg = config_graph(cfg);
    const Eigen::VectorXd omega = config_vector(cfg, "omega", wg.graph.n);
    if (!cfg.contains("edge"))
        throw std::invalid_argument("config needs \"edge\" {source, sink}");
    const kurnet::Edge edge{cfg["edge"]["source"].get<int>(),
                            cfg["edge"]["sink"].get<int>()};
    const double w_lo = config_number(cfg, "w_lo");
    const double w_hi = config_number(cfg, "w_hi");
    const int steps = static_cast<int>(config_number(cfg, "steps", 50));
    if (steps < 1 || w_hi <= w_lo)
        throw std::invalid_argument("need w_lo < w_hi and steps >= 1");

    const kurnet::EdgeScan scan =
        kurnet::scan_detrimental_edge(wg.graph, wg.weights, omega, edge, w_lo, w_hi, steps);
    write_out(args.out, "scan.csv", scan.csv);
    json j = {{"rows", scan.rows}, {"crossing", scan.crossing}};
    if (cfg.value("simulate", false)) {
        // simulation verdicts either side of the crossing, when one exists
        auto simulate_at = [&](double wv) {
            std::vector<kurnet::Edge> edges = wg.graph.edges;
            Eigen::VectorXd w;
            if (wv > 0.0) {
                edges.push_back(edge);
                w = Eigen::VectorXd(wg.weights.size() + 1);
                w << wg.weights, wv;
            } else {
                w = wg.weights;
            }
            const kurnet::Graph g = kurnet::build_incidence(edges, wg.graph.n);
            const kurnet::KuramotoSystem sys{g, w, omega};
            const kurnet::Trajectory traj =
                kurnet::integrate(sys, Eigen::VectorXd::Zero(g.n),
                                  kurnet::sim_defaults::kHorizon, kurnet::sim_defaults::kStep);
            return kurnet::detect_sync(traj).synchronized;
        };
        if (scan.crossing > 0.0) {
            j["sync_below"] = simulate_at(0.5 * (w_lo + scan.crossing));
            j["sync_above"] = simulate_at(scan.crossing + 0.5 * (w_hi - scan.crossing));
        }
    }
    write_out_json(args.out, "scan.json", j);
    std::cout << "crossing " << scan.crossing << "\n";
    return kExitOk;
}

int cmd_experiments(const CommonArgs& args, const std::string& name) {
    bool alpha_auto = false;
    const double alpha = parse_alpha(args.alpha, &alpha_auto);
    kurnet::ExperimentSummary sum;
    if (name == "sparse30")
        sum = kurnet::run_sparse30(args.out);
    else if (name == "clocks30")
        sum = kurnet::run_clocks30(args.out, args.seed, alpha, alpha_auto);
    else if (name == "braess8")
        sum = kurnet::run_braess8(args.out);
    else
        throw std::invalid_argument("unknown experiment: " + name);
    std::cout << sum.name << (sum.ok ? " ok" : " failed") << "\n";
    return sum.ok ? kExitOk : kExitInfeasible;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kuramoto network design toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string experiment_name;
    const std::vector<std::string> with_config = {
        "bound", "simulate", "fixed-point", "freq-design",
        "weight-design", "sparse-design", "braess-scan"};
    for (const auto& name : with_config) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", args.config, "problem config JSON")->required();
        sub->add_option("--out", args.out, "output directory");
        sub->add_option("--seed", args.seed, "RNG seed");
        sub->add_option("--alpha", args.alpha, "trace penalty (number or \"auto\")");
    }
    CLI::App* exp = app.add_subcommand("experiments");
    exp->add_option("name", experiment_name, "sparse30 | clocks30 | braess8")->required();
    exp->add_option("--out", args.out, "output directory");
    exp->add_option("--seed", args.seed, "RNG seed");
    exp->add_option("--alpha", args.alpha, "trace penalty (number or \"auto\")");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("bound")) return cmd_bound(args);
        if (app.got_subcommand("simulate")) return cmd_simulate(args);
        if (app.got_subcommand("fixed-point")) return cmd_fixed_point(args);
        if (app.got_subcommand("freq-design")) return cmd_freq_design(args);
        if (app.got_subcommand("weight-design")) return cmd_weight_design(args);
        if (app.got_subcommand("sparse-design")) return cmd_sparse_design(args);
        if (app.got_subcommand("braess-scan")) return cmd_braess_scan(args);
        if (app.got_subcommand("experiments")) return cmd_experiments(args, experiment_name);
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitInputError;
}
