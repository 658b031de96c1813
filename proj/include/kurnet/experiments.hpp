#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "kurnet/conic.hpp"
#include "kurnet/graph.hpp"
#include "kurnet/sparse_design.hpp"

namespace kurnet {

struct ExperimentSummary {
    std::string name;
    bool ok = false;
    nlohmann::json details;
};

/// Sparse edge addition on 30 oscillators with evenly spread frequencies:
/// reweighted-l1 over all 435 candidate pairs, then exact bound post-check
/// and a worst-case simulation. Artifacts land in out_dir.
ExperimentSummary run_sparse30(const std::string& out_dir,
                               const conic::SolveOptions& options = {});

/// Robust weight design on a seeded random geometric graph (n = 30,
/// m targeted around 56), box +-0.2, gamma_d = pi/10; validates with the
/// worst-case frequency vector in simulation.
ExperimentSummary run_clocks30(const std::string& out_dir, std::uint64_t seed,
                               double alpha, bool alpha_auto,
                               const conic::SolveOptions& options = {});

/// Braess study on the 8-node power network: l1 edge addition at
/// gamma_d = pi/3, then weight scans of the detrimental lines 3-4 and 2-4
/// with simulations on both sides of each stability crossing.
ExperimentSummary run_braess8(const std::string& out_dir,
                              const conic::SolveOptions& options = {});

/// Grid scan of one added (or strengthened) line: for each weight value,
/// records ||B0^T L^+ omega||_inf over the base rows plus a feasibility
/// flag; crossing is the refined weight where the bound passes 1 (-1 when
/// it never does). csv uses the header w_value,bound_inf_norm,feasible.
struct EdgeScan {
    nlohmann::json rows;
    std::string csv;
    double crossing = -1.0;
};

EdgeScan scan_detrimental_edge(const Graph& base, const Eigen::VectorXd& base_w,
                               const Eigen::VectorXd& omega, const Edge& extra,
                               double w_lo, double w_hi, int steps);

/// The reconstructed 8-node base network used by run_braess8 (10 unit
/// lines; generators carry omega = +0.95, loads -0.95).
struct BraessNetwork {
    Graph base;
    Eigen::VectorXd base_weights;
    Eigen::VectorXd omega;
    std::vector<Edge> candidates;
};
BraessNetwork braess8_network();

/// Seeded random geometric graph used by run_clocks30: n points in the unit
/// square, edges under a distance threshold tuned toward target_m, extra
/// nearest-neighbor links if disconnected. Deterministic in seed.
Graph random_geometric_graph(int n, int target_m, std::uint64_t seed);

}  // namespace kurnet
