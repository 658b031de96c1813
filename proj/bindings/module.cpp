#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kurnet/experiments.hpp"
#include "kurnet/fixed_point.hpp"
#include "kurnet/freq_design.hpp"
#include "kurnet/graph.hpp"
#include "kurnet/simulate.hpp"
#include "kurnet/sparse_design.hpp"
#include "kurnet/weight_design.hpp"

namespace py = pybind11;
using namespace kurnet;

namespace {

Graph make_graph(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<Edge> es;
    es.reserve(edges.size());
    for (const auto& [a, b] : edges) es.push_back({a, b});
    return build_incidence(es, n);
}

}  // namespace

PYBIND11_MODULE(_kurnet, m) {
    m.doc() = "Kuramoto network design: cohesiveness bounds, simulation, "
              "frequency/weight design";

    m.def("incidence",
          [](int n, const std::vector<std::pair<int, int>>& edges) {
              return make_graph(n, edges).incidence;
          },
          py::arg("n"), py::arg("edges"));

    m.def("laplacian_pinv",
          [](int n, const std::vector<std::pair<int, int>>& edges,
             const Eigen::VectorXd& w) {
              const Graph g = make_graph(n, edges);
              const auto b = laplacian_bundle(g, w);
              return py::make_tuple(b.pinv, b.lambda2, b.connected);
          },
          py::arg("n"), py::arg("edges"), py::arg("weights"));

    m.def("cohesiveness_bound",
          [](int n, const std::vector<std::pair<int, int>>& edges,
             const Eigen::VectorXd& w, const Eigen::VectorXd& omega) {
              const KuramotoSystem sys{make_graph(n, edges), w, omega};
              const CohesivenessReport r = cohesiveness_bound(sys);
              py::dict d;
              d["bound_sin"] = r.bound_sin;
              d["feasible"] = r.feasible;
              d["bound_angle"] = r.bound_angle ? py::cast(*r.bound_angle) : py::none();
              return d;
          },
          py::arg("n"), py::arg("edges"), py::arg("weights"), py::arg("omega"));

    m.def("simulate",
          [](int n, const std::vector<std::pair<int, int>>& edges,
             const Eigen::VectorXd& w, const Eigen::VectorXd& omega, double T,
             double h) {
              const KuramotoSystem sys{make_graph(n, edges), w, omega};
              const Trajectory traj =
                  integrate(sys, Eigen::VectorXd::Zero(n), T, h);
              const SyncStatus st = detect_sync(traj);
              py::dict d;
              d["times"] = traj.times;
              d["states"] = traj.states;
              d["synchronized"] = st.synchronized;
              d["omega_s"] = st.omega_s;
              if (st.synchronized)
                  d["phi"] = measure_cohesiveness(sys.graph, traj, st);
              return d;
          },
          py::arg("n"), py::arg("edges"), py::arg("weights"), py::arg("omega"),
          py::arg("T") = sim_defaults::kHorizon, py::arg("h") = sim_defaults::kStep);

    m.def("fixed_point",
          [](int n, const std::vector<std::pair<int, int>>& edges,
             const Eigen::VectorXd& w, const Eigen::VectorXd& omega) {
              const KuramotoSystem sys{make_graph(n, edges), w, omega};
              const FixedPoint fp = solve_fixed_point(center_frequencies(sys).system);
              py::dict d;
              d["found"] = fp.found;
              d["theta"] = fp.theta;
              d["residual"] = fp.residual;
              d["cohesiveness"] = fp.cohesiveness;
              d["stable"] = fp.stable;
              return d;
          },
          py::arg("n"), py::arg("edges"), py::arg("weights"), py::arg("omega"));

    m.def("design_frequencies",
          [](int n, const std::vector<std::pair<int, int>>& edges,
             const Eigen::VectorXd& w, double gamma_d, double omega_s,
             const Eigen::VectorXd& omega_nominal, const Eigen::VectorXd& lower,
             const Eigen::VectorXd& upper) {
              FreqDesignProblem p;
              p.graph = make_graph(n, edges);
              p.weights = w;
              p.gamma_d = gamma_d;
              p.omega_s = omega_s;
              p.omega_nominal = omega_nominal;
              p.lower = lower;
              p.upper = upper;
              const FreqDesignResult r = design_frequencies(p);
              py::dict d;
              d["status"] = conic::to_string(r.status);
              if (r.status == conic::Status::Optimal) {
                  d["omega"] = r.omega;
                  d["cost"] = r.cost;
                  d["bound_sin"] = r.bound_sin;
              }
              return d;
          },
          py::arg("n"), py::arg("edges"), py::arg("weights"), py::arg("gamma_d"),
          py::arg("omega_s"), py::arg("omega_nominal"), py::arg("lower"),
          py::arg("upper"));

    m.def("design_weights",
          [](int n, const std::vector<std::pair<int, int>>& edges, double gamma_d,
             const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
             double alpha, double w_max) {
              WeightDesignProblem p;
              p.graph = make_graph(n, edges);
              p.box = OmegaBox{lower, upper};
              p.gamma_d = gamma_d;
              p.w_max = w_max;
              const WeightDesignResult r =
                  p.box.singleton() ? design_weights_nominal(p, alpha)
                                    : design_weights_robust(p, alpha);
              py::dict d;
              d["status"] = to_string(r.status);
              if (r.w.size() > 0) {
                  d["w"] = r.w;
                  d["cost"] = r.cost;
                  d["tightness"] = r.tightness;
                  d["bound_sin_exact"] = r.bound_sin_exact;
              }
              return d;
          },
          py::arg("n"), py::arg("edges"), py::arg("gamma_d"), py::arg("lower"),
          py::arg("upper"), py::arg("alpha") = 2.0, py::arg("w_max") = 10.0);

    m.def("reweighted_l1",
          [](int n, const std::vector<std::pair<int, int>>& candidates,
             const Eigen::VectorXd& omega, double gamma_d, double alpha,
             int k_max) {
              SparseDesignProblem p;
              p.n = n;
              p.base_weights = Eigen::VectorXd(0);
              for (const auto& [a, b] : candidates) p.candidates.push_back({a, b});
              p.omega = omega;
              p.gamma_d = gamma_d;
              p.alpha = alpha;
              p.k_max = k_max;
              const SparseDesignResult r = reweighted_l1(p);
              py::dict d;
              d["status"] = to_string(r.status);
              if (r.status == DesignStatus::Optimal) {
                  d["w_c"] = r.w_c;
                  d["support"] = r.support;
                  d["bound_sin_exact"] = r.bound_sin_exact;
                  d["final_feasible"] = r.final_feasible;
              }
              return d;
          },
          py::arg("n"), py::arg("candidates"), py::arg("omega"), py::arg("gamma_d"),
          py::arg("alpha") = 2.0, py::arg("k_max") = 10);
}
