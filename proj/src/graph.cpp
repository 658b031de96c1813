#include "kurnet/graph.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <queue>
#include <set>
#include <stdexcept>

namespace kurnet {

Graph build_incidence(const std::vector<Edge>& edges, int n) {
    if (n < 1) throw std::invalid_argument("build_incidence: node count must be positive");
    std::set<std::pair<int, int>> seen;
    Graph g;
    g.n = n;
    g.edges = edges;
    g.incidence = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(edges.size()));
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const int i = edges[e].source;
        const int j = edges[e].sink;
        if (i < 1 || i > n || j < 1 || j > n)
            throw std::invalid_argument("build_incidence: node index out of range");
        if (i == j)
            throw std::invalid_argument("build_incidence: self-loop rejected");
        auto key = std::minmax(i, j);
        if (!seen.insert({key.first, key.second}).second)
            throw std::invalid_argument("build_incidence: duplicate undirected edge rejected");
        g.incidence(i - 1, static_cast<Eigen::Index>(e)) = -1.0;
        g.incidence(j - 1, static_cast<Eigen::Index>(e)) = 1.0;
    }
    return g;
}

bool is_connected(const Graph& graph) {
    const int n = graph.n;
    if (n <= 1) return true;
    std::vector<std::vector<int>> adj(n);
    for (const auto& e : graph.edges) {
        adj[e.source - 1].push_back(e.sink - 1);
        adj[e.sink - 1].push_back(e.source - 1);
    }
    std::vector<char> visited(n, 0);
    std::queue<int> q;
    q.push(0);
    visited[0] = 1;
    int count = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : adj[u]) {
            if (!visited[v]) {
                visited[v] = 1;
                ++count;
                q.push(v);
            }
        }
    }
    return count == n;
}

LaplacianBundle laplacian_bundle(const Graph& graph, const Eigen::VectorXd& w) {
    const int n = graph.n;
    const int m = graph.edge_count();
    if (w.size() != m) throw std::invalid_argument("laplacian_bundle: weight length mismatch");
    if ((w.array() < 0.0).any())
        throw std::invalid_argument("laplacian_bundle: negative edge weight");

    LaplacianBundle out;
    const Eigen::MatrixXd& B = graph.incidence;
    out.laplacian = B * w.asDiagonal() * B.transpose();
    out.laplacian = 0.5 * (out.laplacian + out.laplacian.transpose().eval());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.laplacian);
    const Eigen::VectorXd& evals = es.eigenvalues();
    out.lambda2 = (n >= 2) ? evals(1) : 0.0;
    out.connected = out.lambda2 > detail::kConnectivityTol;

    const Eigen::MatrixXd ones = Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    if (out.connected) {
        Eigen::MatrixXd ridge = out.laplacian + ones;
        out.pinv = ridge.llt().solve(Eigen::MatrixXd::Identity(n, n)) - ones;
    } else {
        // Truncated eigendecomposition; zero modes dropped.
        Eigen::MatrixXd pinv = Eigen::MatrixXd::Zero(n, n);
        const double cutoff = detail::kConnectivityTol;
        for (int k = 0; k < n; ++k) {
            if (evals(k) > cutoff)
                pinv += es.eigenvectors().col(k) * es.eigenvectors().col(k).transpose() / evals(k);
        }
        out.pinv = pinv;
    }
    out.pinv = 0.5 * (out.pinv + out.pinv.transpose().eval());
    return out;
}

Eigen::MatrixXd cycle_basis(const Graph& graph) {
    if (!is_connected(graph))
        throw std::invalid_argument("cycle_basis: graph must be connected");
    const int n = graph.n;
    const int m = graph.edge_count();
    const int cycles = m - n + 1;

    // BFS spanning tree: parent[v] = (neighbor, edge index, direction flag).
    struct Link {
        int to;
        int edge;
        bool along;  // true when traversing source -> sink
    };
    std::vector<std::vector<Link>> adj(n);
    for (int e = 0; e < m; ++e) {
        const int u = graph.edges[e].source - 1;
        const int v = graph.edges[e].sink - 1;
        adj[u].push_back({v, e, true});
        adj[v].push_back({u, e, false});
    }
    std::vector<int> parent(n, -1), parent_edge(n, -1), depth(n, 0);
    std::vector<char> parent_along(n, 0), in_tree(m, 0), visited(n, 0);
    std::queue<int> q;
    q.push(0);
    visited[0] = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (const Link& l : adj[u]) {
            if (!visited[l.to]) {
                visited[l.to] = 1;
                parent[l.to] = u;
                parent_edge[l.to] = l.edge;
                parent_along[l.to] = l.along ? 1 : 0;
                depth[l.to] = depth[u] + 1;
                in_tree[l.edge] = 1;
                q.push(l.to);
            }
        }
    }

    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(m, cycles);
    int col = 0;
    for (int e = 0; e < m; ++e) {
        if (in_tree[e]) continue;
        // Fundamental cycle of non-tree edge e = (i, j): coefficient +1 on e,
        // and on each tree edge along the path j -> i, +1 when traversed with
        // its orientation, -1 against it.
        F(e, col) = 1.0;
        int a = graph.edges[e].sink - 1;    // walk from sink ...
        int b = graph.edges[e].source - 1;  // ... back to source
        while (a != b) {
            if (depth[a] >= depth[b]) {
                // step a -> parent[a]; traversal direction vs edge orientation:
                // parent_along[a] true means parent->a is source->sink, so the
                // step a->parent goes against orientation.
                F(parent_edge[a], col) += parent_along[a] ? -1.0 : 1.0;
                a = parent[a];
            } else {
                // step b -> parent[b] on the i-side: the path j -> i contains
                // this step reversed, so signs flip.
                F(parent_edge[b], col) += parent_along[b] ? 1.0 : -1.0;
                b = parent[b];
            }
        }
        ++col;
    }
    return F;
}

}  // namespace kurnet
