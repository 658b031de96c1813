#include "kurnet/simulate.hpp"

#include <cmath>
#include <stdexcept>

namespace kurnet {

CenteredSystem center_frequencies(const KuramotoSystem& system) {
    CenteredSystem out;
    out.system = system;
    const double mean = system.omega.size() > 0 ? system.omega.mean() : 0.0;
    out.system.omega.array() -= mean;
    out.omega_s = mean;
    return out;
}

double wrap_angle(double x) {
    constexpr double two_pi = 2.0 * M_PI;
    double r = std::fmod(x, two_pi);
    if (r <= -M_PI) r += two_pi;
    if (r > M_PI) r -= two_pi;
    return r;
}

namespace {
Eigen::VectorXd rhs(const KuramotoSystem& sys, const Eigen::VectorXd& theta) {
    return sys.omega - sys.graph.incidence *
                           (sys.weights.array() *
                            (sys.graph.incidence.transpose() * theta).array().sin())
                               .matrix();
}
}  // namespace

Trajectory integrate(const KuramotoSystem& system, const Eigen::VectorXd& theta0,
                     double T, double h) {
    if (h <= 0.0 || T < h) throw std::invalid_argument("integrate: need h > 0 and T >= h");
    if (theta0.size() != system.graph.n)
        throw std::invalid_argument("integrate: initial state length mismatch");

    const int steps = static_cast<int>(std::llround(T / h));
    const int n = system.graph.n;
    Trajectory traj;
    traj.times.resize(steps + 1);
    traj.states.resize(steps + 1, n);
    traj.rates.resize(steps + 1, n);

    Eigen::VectorXd theta = theta0;
    for (int k = 0; k <= steps; ++k) {
        traj.times(k) = k * h;
        traj.states.row(k) = theta.transpose();
        traj.rates.row(k) = rhs(system, theta).transpose();
        if (!theta.allFinite())
            throw std::runtime_error("integrate: non-finite state (divergence)");
        if (k == steps) break;
        const Eigen::VectorXd k1 = rhs(system, theta);
        const Eigen::VectorXd k2 = rhs(system, theta + 0.5 * h * k1);
        const Eigen::VectorXd k3 = rhs(system, theta + 0.5 * h * k2);
        const Eigen::VectorXd k4 = rhs(system, theta + h * k3);
        theta += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return traj;
}

SyncStatus detect_sync(const Trajectory& trajectory, double tail_fraction, double tol) {
    const int samples = trajectory.sample_count();
    if (samples < 2) throw std::invalid_argument("detect_sync: trajectory too short");
    if (tail_fraction <= 0.0 || tail_fraction > 1.0)
        throw std::invalid_argument("detect_sync: tail_fraction in (0,1] required");

    const int tail = std::max(1, static_cast<int>(samples * tail_fraction));
    const int start = samples - tail;
    double worst = 0.0;
    double omega_s = 0.0;
    for (int k = start; k < samples; ++k) {
        const double mean = trajectory.rates.row(k).mean();
        const double dev = (trajectory.rates.row(k).array() - mean).abs().maxCoeff();
        worst = std::max(worst, dev);
        if (k == samples - 1) omega_s = mean;
    }
    SyncStatus st;
    st.residual = worst;
    st.synchronized = worst <= tol;
    st.omega_s = omega_s;
    return st;
}

double measure_cohesiveness(const Graph& graph, const Trajectory& trajectory,
                            const SyncStatus& status) {
    if (!status.synchronized)
        throw std::invalid_argument("measure_cohesiveness: trajectory not synchronized");
    const Eigen::VectorXd theta = trajectory.states.row(trajectory.sample_count() - 1);
    const Eigen::VectorXd diffs = graph.incidence.transpose() * theta;
    double phi = 0.0;
    for (int e = 0; e < diffs.size(); ++e) phi = std::max(phi, std::abs(wrap_angle(diffs(e))));
    return phi;
}

}  // namespace kurnet
