#pragma once

#include <Eigen/Dense>
#include "json.hpp"
#include <ostream>
#include <string>

#include "kurnet/fixed_point.hpp"
#include "kurnet/graph.hpp"
#include "kurnet/simulate.hpp"

namespace kurnet {

struct WeightedGraph {
    Graph graph;
    Eigen::VectorXd weights;
};

/// Graph JSON: {"n": int, "edges": [{"source", "sink", "weight"}, ...]},
/// 1-based node indices. Throws std::invalid_argument on schema errors.
WeightedGraph graph_from_json(const nlohmann::json& j);
WeightedGraph load_graph_file(const std::string& path);
nlohmann::json graph_to_json(const Graph& graph, const Eigen::VectorXd& weights);

Eigen::VectorXd vector_from_json(const nlohmann::json& j, int expected_size);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);

nlohmann::json report_to_json(const CohesivenessReport& report);
nlohmann::json sync_to_json(const SyncStatus& status);

/// Header t,theta_1,...,theta_n; one row per sample, 9 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);

/// "%.9g" formatting shared by all CSV emitters.
std::string format_sig9(double x);

}  // namespace kurnet
