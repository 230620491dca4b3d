#pragma once

#include <algorithm>
#include <vector>

#include "tulik/errors.hpp"
#include "tulik/params.hpp"
#include "tulik/trajectory.hpp"

namespace tulik {

// One kernel coordinate (i, t, u', u) activated by the history.
struct KernelCoord {
    int i;
    int t;
    int uprime;
    int u;
};

namespace detail {
inline void check_compatible(const ModelParams& params, const Trajectory& traj) {
    const KernelLayout& kl = params.kernel.layout();
    if (kl.N != traj.grid().N || kl.Nprime != traj.grid().Nprime)
        throw argument_error("kernel and trajectory grids differ");
    if (kl.V != traj.num_nodes())
        throw argument_error("kernel and trajectory node counts differ");
}
} // namespace detail

// Kernel coordinates contributing to Lambda_t(u): events in the memory window
// t-Nprime <= i <= t-1. The inner product of the kernel with this set is the
// excitation sum in the conditional intensity.
inline std::vector<KernelCoord> history_vector(const Trajectory& traj, int t, int u = 0) {
    const TimeGrid& grid = traj.grid();
    if (!grid.valid_observed_index(t))
        throw argument_error("history_vector: step index must lie in 1..N");
    if (u < 0 || u >= traj.num_nodes())
        throw argument_error("history_vector: node index out of range");
    std::vector<KernelCoord> coords;
    const int lo = std::max(t - grid.Nprime, grid.first_index());
    for (int i = lo; i <= t - 1; ++i) {
        const std::int16_t up = traj.event_node(i);
        if (up != Trajectory::kNoEvent) coords.push_back({i, t, up, u});
    }
    return coords;
}

// Excitation <eta_{t,u}, theta_K>: the kernel part of Lambda_t(u). Valid on
// the whole extended grid; for t <= 0 the kernel is structurally zero, so the
// sum vanishes there under the time-varying variant.
inline double excitation(const ModelParams& params, const Trajectory& traj, int t, int u = 0) {
    const TimeGrid& grid = traj.grid();
    double acc = 0.0;
    const int lo = std::max(t - grid.Nprime, grid.first_index());
    if (t >= 1) {
        for (int i = lo; i <= t - 1; ++i) {
            const std::int16_t up = traj.event_node(i);
            if (up != Trajectory::kNoEvent) acc += params.kernel.k(i, t, up, u);
        }
    }
    return acc;
}

// Conditional intensity vector Lambda_t(u) = mu(u) + excitation, t in 1..N.
// Negative outputs are allowed; feasibility is the solver's concern.
inline std::vector<double> intensity(const ModelParams& params, const Trajectory& traj, int t) {
    detail::check_compatible(params, traj);
    if (!traj.grid().valid_observed_index(t))
        throw argument_error("intensity: step index must lie in 1..N");
    const int V = traj.num_nodes();
    std::vector<double> lambda(static_cast<std::size_t>(V));
    for (int u = 0; u < V; ++u) lambda[u] = params.mu[u] + excitation(params, traj, t, u);
    return lambda;
}

// Intensities over all observed steps: lambda(t,u) for t = 1..N plus the
// per-step sums bar_lambda(t) = sum_u lambda(t,u).
struct IntensityRecord {
    int N = 0;
    int V = 0;
    std::vector<double> lambda;     // (t-1)*V + u
    std::vector<double> bar_lambda; // t-1

    double at(int t, int u) const { return lambda[static_cast<std::size_t>(t - 1) * V + u]; }
    double bar(int t) const { return bar_lambda[static_cast<std::size_t>(t - 1)]; }
};

inline IntensityRecord compute_intensities(const ModelParams& params, const Trajectory& traj) {
    detail::check_compatible(params, traj);
    const int N = traj.grid().N;
    const int V = traj.num_nodes();
    IntensityRecord rec;
    rec.N = N;
    rec.V = V;
    rec.lambda.resize(static_cast<std::size_t>(N) * V);
    rec.bar_lambda.resize(static_cast<std::size_t>(N));
    for (int t = 1; t <= N; ++t) {
        double bar = 0.0;
        for (int u = 0; u < V; ++u) {
            const double v = params.mu[u] + excitation(params, traj, t, u);
            rec.lambda[static_cast<std::size_t>(t - 1) * V + u] = v;
            bar += v;
        }
        rec.bar_lambda[static_cast<std::size_t>(t - 1)] = bar;
    }
    return rec;
}

} // namespace tulik
