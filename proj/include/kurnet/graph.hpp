#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace kurnet {

/// Undirected edge with a fixed orientation: source -> sink, 1-based nodes.
struct Edge {
    int source = 0;
    int sink = 0;
};

/// Oriented graph with its node-by-edge incidence matrix.
///
/// Column e of the incidence matrix has -1 at the source row, +1 at the
/// sink row: (B^T x)_e = x_sink - x_source. Edge orientation is fixed at
/// build time; every downstream sign convention inherits it.
struct Graph {
    int n = 0;
    std::vector<Edge> edges;
    Eigen::MatrixXd incidence;  // n x m

    int node_count() const { return n; }
    int edge_count() const { return static_cast<int>(edges.size()); }
};

/// Weighted Laplacian L = B diag(w) B^T with its Moore-Penrose
/// pseudoinverse and algebraic connectivity.
struct LaplacianBundle {
    Eigen::MatrixXd laplacian;
    Eigen::MatrixXd pinv;
    double lambda2 = 0.0;
    bool connected = false;  // lambda2 above tolerance; pinv unreliable otherwise
};

/// Builds the incidence matrix. Rejects self-loops, duplicate undirected
/// edges and out-of-range node indices. Disconnected graphs are allowed
/// here; connectivity is checked where it matters.
Graph build_incidence(const std::vector<Edge>& edges, int n);

/// Computes L, L^+ and lambda2 for nonnegative weights w (length m).
///
/// For connected graphs the pseudoinverse uses the ridge identity
/// L^+ = (L + (1/n) 11^T)^{-1} - (1/n) 11^T (a single SPD solve);
/// otherwise it falls back to an eigendecomposition with zero-eigenvalue
/// truncation and the bundle is flagged disconnected.
LaplacianBundle laplacian_bundle(const Graph& graph, const Eigen::VectorXd& w);

/// Cycle-space basis: m x (m-n+1) matrix F with BF = 0, entries in
/// {-1,0,+1}, built from the fundamental cycles of a spanning tree.
/// Throws if the graph is disconnected. A tree yields zero columns.
Eigen::MatrixXd cycle_basis(const Graph& graph);

/// True iff the graph is connected (BFS over the edge list).
bool is_connected(const Graph& graph);

namespace detail {
constexpr double kConnectivityTol = 1e-8;
}

}  // namespace kurnet
