#include "kurnet/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace kurnet {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& what) {
    throw std::invalid_argument("graph json: " + what);
}

}  // namespace

WeightedGraph graph_from_json(const json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("edges"))
        schema_error("expected object with \"n\" and \"edges\"");
    if (!j["n"].is_number_integer() || j["n"].get<int>() < 1)
        schema_error("\"n\" must be a positive integer");
    if (!j["edges"].is_array()) schema_error("\"edges\" must be an array");

    const int n = j["n"].get<int>();
    std::vector<Edge> edges;
    std::vector<double> weights;
    for (const auto& je : j["edges"]) {
        if (!je.is_object() || !je.contains("source") || !je.contains("sink"))
            schema_error("edge entries need \"source\" and \"sink\"");
        if (!je["source"].is_number_integer() || !je["sink"].is_number_integer())
            schema_error("edge endpoints must be integers");
        edges.push_back({je["source"].get<int>(), je["sink"].get<int>()});
        double w = 1.0;
        if (je.contains("weight")) {
            if (!je["weight"].is_number()) schema_error("edge weight must be a number");
            w = je["weight"].get<double>();
        }
        if (w < 0.0) schema_error("edge weight must be nonnegative");
        weights.push_back(w);
    }
    WeightedGraph wg;
    wg.graph = build_incidence(edges, n);
    wg.weights = Eigen::Map<Eigen::VectorXd>(weights.data(),
                                             static_cast<Eigen::Index>(weights.size()));
    return wg;
}

WeightedGraph load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open graph file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("graph json parse error: " + std::string(e.what()));
    }
    return graph_from_json(j);
}

json graph_to_json(const Graph& graph, const Eigen::VectorXd& weights) {
    json edges = json::array();
    for (int e = 0; e < graph.edge_count(); ++e) {
        edges.push_back({{"source", graph.edges[e].source},
                         {"sink", graph.edges[e].sink},
                         {"weight", weights.size() == graph.edge_count() ? weights(e) : 1.0}});
    }
    return {{"n", graph.n}, {"edges", edges}};
}

Eigen::VectorXd vector_from_json(const json& j, int expected_size) {
    if (!j.is_array()) throw std::invalid_argument("expected a numeric array");
    if (expected_size >= 0 && static_cast<int>(j.size()) != expected_size)
        throw std::invalid_argument("array length " + std::to_string(j.size()) +
                                    ", expected " + std::to_string(expected_size));
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!j[i].is_number()) throw std::invalid_argument("array entries must be numbers");
        v(i) = j[static_cast<size_t>(i)].get<double>();
    }
    return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

json report_to_json(const CohesivenessReport& report) {
    json j = {{"bound_sin", report.bound_sin}, {"feasible", report.feasible}};
    j["bound_angle"] = report.bound_angle ? json(*report.bound_angle) : json(nullptr);
    j["simulated_phi"] = report.simulated_phi ? json(*report.simulated_phi) : json(nullptr);
    return j;
}

json sync_to_json(const SyncStatus& status) {
    return {{"synchronized", status.synchronized},
            {"omega_s", status.omega_s},
            {"residual", status.residual}};
}

std::string format_sig9(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
    const int n = static_cast<int>(trajectory.states.cols());
    os << "t";
    for (int i = 1; i <= n; ++i) os << ",theta_" << i;
    os << "\n";
    for (int s = 0; s < trajectory.sample_count(); ++s) {
        os << format_sig9(trajectory.times(s));
        for (int i = 0; i < n; ++i) os << "," << format_sig9(trajectory.states(s, i));
        os << "\n";
    }
}

}  // namespace kurnet
