#pragma once

#include <Eigen/Dense>
#include <string>

#include "kurnet/graph.hpp"

namespace kurnet {

/// A Kuramoto network: structure, coupling weights, natural frequencies.
struct KuramotoSystem {
    Graph graph;
    Eigen::VectorXd weights;  // length m, nonnegative
    Eigen::VectorXd omega;    // length n, rad/s
};

/// A system with the mean natural frequency removed, plus the removed mean.
struct CenteredSystem {
    KuramotoSystem system;
    double omega_s = 0.0;
};

/// Shifts omega to zero mean; all fixed-point analysis works on the
/// centered system (the dynamics only shift by a uniform rotation).
CenteredSystem center_frequencies(const KuramotoSystem& system);

/// Fixed-step trajectory of theta(t); one row per stored step.
struct Trajectory {
    Eigen::VectorXd times;   // strictly increasing, constant step
    Eigen::MatrixXd states;  // (steps+1) x n, unwrapped angles
    Eigen::MatrixXd rates;   // theta_dot at the same samples

    int sample_count() const { return static_cast<int>(times.size()); }
};

/// Classical RK4 on theta_dot = omega - B diag(w) sin(B^T theta) over [0, T]
/// with step h. Angles stay unwrapped during integration; wrapping happens
/// only at measurement. Throws on non-finite states (divergence).
Trajectory integrate(const KuramotoSystem& system, const Eigen::VectorXd& theta0,
                     double T, double h);

struct SyncStatus {
    bool synchronized = false;
    double omega_s = 0.0;   // achieved common frequency (mean of rates)
    double residual = 0.0;  // max over tail of ||theta_dot - mean * 1||_inf
};

/// Frequency-synchronization test over the trailing tail_fraction of samples.
SyncStatus detect_sync(const Trajectory& trajectory, double tail_fraction = 0.2,
                       double tol = 1e-6);

/// Phase cohesiveness of the final state: max_e |wrap(B^T theta(T))_e|,
/// wrap to (-pi, pi]. Requires a synchronized trajectory.
double measure_cohesiveness(const Graph& graph, const Trajectory& trajectory,
                            const SyncStatus& status);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double x);

namespace sim_defaults {
constexpr double kStep = 0.01;
constexpr double kHorizon = 100.0;
constexpr double kTailFraction = 0.2;
constexpr double kSyncTol = 1e-6;
}  // namespace sim_defaults

}  // namespace kurnet
