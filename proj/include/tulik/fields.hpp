#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "tulik/errors.hpp"
#include "tulik/intensity.hpp"
#include "tulik/likelihood.hpp"

namespace tulik {

// Stochastic per-trajectory fields over the kernel coordinates. Each adder
// accumulates `weight` times the field into `out`, which must be shaped like
// the kernel's value array; both kernel variants are supported (time-varying
// coordinates or the stationary lag vector).

namespace detail {
// Applies f(i, uprime) to every event in the memory window of step t.
template <class F>
inline void for_history(const Trajectory& traj, int t, F&& f) {
    const TimeGrid& grid = traj.grid();
    const int lo = std::max(t - grid.Nprime, grid.first_index());
    for (int i = lo; i <= t - 1; ++i) {
        const std::int16_t up = traj.event_node(i);
        if (up != Trajectory::kNoEvent) f(i, static_cast<int>(up));
    }
}
} // namespace detail

// VI field, time-only: sum_t (phi(h Lambda_t) - y_t) eta_t. Defined for any
// real intensity; steps with empty history contribute nothing.
inline void add_vi_field(const ModelParams& params, const Trajectory& traj,
                         const IntensityRecord& rec, double weight, std::span<double> out) {
    if (traj.num_nodes() != 1) throw argument_error("vi_field: expects a single-node trajectory");
    const KernelLayout& kl = params.kernel.layout();
    const double h = traj.grid().h;
    for (int t = 1; t <= kl.N; ++t) {
        const double w =
            weight * (link_phi(h * rec.at(t, 0)) - (traj.has_event(t) ? 1.0 : 0.0));
        detail::for_history(traj, t, [&](int i, int) { out[kl.grad_index(i, t - i, 0, 0)] += w; });
    }
}

// GD field, time-only: sum_t h/phi(h Lambda_t) (phi(h Lambda_t) - y_t) eta_t,
// the exact gradient of the negative log-likelihood in the kernel coordinates.
inline void add_gd_field(const ModelParams& params, const Trajectory& traj,
                         const IntensityRecord& rec, double weight, std::span<double> out) {
    if (traj.num_nodes() != 1) throw argument_error("gd_field: expects a single-node trajectory");
    const KernelLayout& kl = params.kernel.layout();
    const double h = traj.grid().h;
    for (int t = 1; t <= kl.N; ++t) {
        const double lam = rec.at(t, 0);
        if (!(lam > 0.0))
            throw infeasible_error("gd_field: nonpositive intensity", t, 0);
        const double phi = link_phi(h * lam);
        const double w = weight * h / phi * (phi - (traj.has_event(t) ? 1.0 : 0.0));
        detail::for_history(traj, t, [&](int i, int) { out[kl.grad_index(i, t - i, 0, 0)] += w; });
    }
}

// VI field on a network: sum_t sum_u (Phi(h Lambda_t) - y_t)_u eta_{t,u}.
inline void add_vi_field_network(const ModelParams& params, const Trajectory& traj,
                                 const IntensityRecord& rec, double weight,
                                 std::span<double> out) {
    const KernelLayout& kl = params.kernel.layout();
    const int V = traj.num_nodes();
    const double h = traj.grid().h;
    for (int t = 1; t <= kl.N; ++t) {
        const double bar = rec.bar(t);
        const double ratio = link_phi(h * bar) / bar;
        const std::int16_t ev = traj.event_node(t);
        for (int u = 0; u < V; ++u) {
            const double w = weight * (ratio * rec.at(t, u) - (ev == u ? 1.0 : 0.0));
            detail::for_history(traj, t,
                                [&](int i, int up) { out[kl.grad_index(i, t - i, up, u)] += w; });
        }
    }
}

// GD field on a network: per (t,u) bracket
//   h (phi(h bar_t) - ybar_t)/phi(h bar_t) + ybar_t/bar_t - y_t(u)/Lambda_t(u).
inline void add_gd_field_network(const ModelParams& params, const Trajectory& traj,
                                 const IntensityRecord& rec, double weight,
                                 std::span<double> out) {
    const KernelLayout& kl = params.kernel.layout();
    const int V = traj.num_nodes();
    const double h = traj.grid().h;
    for (int t = 1; t <= kl.N; ++t) {
        const double bar = rec.bar(t);
        const std::int16_t ev = traj.event_node(t);
        const double ybar = ev == Trajectory::kNoEvent ? 0.0 : 1.0;
        const double phi = link_phi(h * bar);
        if (!(phi > 0.0))
            throw infeasible_error("gd_field_network: nonpositive summed intensity", t);
        const double common = h * (phi - ybar) / phi + ybar / bar;
        for (int u = 0; u < V; ++u) {
            const double lam = rec.at(t, u);
            if (!(lam > 0.0))
                throw infeasible_error("gd_field_network: nonpositive intensity", t, u);
            const double w = weight * (common - (ev == u ? 1.0 / lam : 0.0));
            detail::for_history(traj, t,
                                [&](int i, int up) { out[kl.grad_index(i, t - i, up, u)] += w; });
        }
    }
}

inline std::vector<double> vi_field(const ModelParams& params, const Trajectory& traj) {
    const IntensityRecord rec = compute_intensities(params, traj);
    std::vector<double> out(params.kernel.values().size(), 0.0);
    add_vi_field(params, traj, rec, 1.0, out);
    return out;
}

inline std::vector<double> gd_field(const ModelParams& params, const Trajectory& traj) {
    const IntensityRecord rec = compute_intensities(params, traj);
    std::vector<double> out(params.kernel.values().size(), 0.0);
    add_gd_field(params, traj, rec, 1.0, out);
    return out;
}

inline std::vector<double> vi_field_network(const ModelParams& params, const Trajectory& traj) {
    const IntensityRecord rec = compute_intensities(params, traj);
    std::vector<double> out(params.kernel.values().size(), 0.0);
    add_vi_field_network(params, traj, rec, 1.0, out);
    return out;
}

inline std::vector<double> gd_field_network(const ModelParams& params, const Trajectory& traj) {
    const IntensityRecord rec = compute_intensities(params, traj);
    std::vector<double> out(params.kernel.values().size(), 0.0);
    add_gd_field_network(params, traj, rec, 1.0, out);
    return out;
}

// Stationary fields: the same expressions over the lag vector. With a
// time-invariant kernel every adder above already lands on psi coordinates,
// so these wrappers only pin the variant. Each equals the diagonal sum of the
// corresponding time-varying field of the lifted kernel.
inline std::vector<double> stationary_vi_field(const ModelParams& params, const Trajectory& traj) {
    if (params.kernel.variant() != KernelVariant::TimeInvariant)
        throw argument_error("stationary_vi_field: expects a time-invariant kernel");
    return traj.num_nodes() == 1 ? vi_field(params, traj) : vi_field_network(params, traj);
}

inline std::vector<double> stationary_gd_field(const ModelParams& params, const Trajectory& traj) {
    if (params.kernel.variant() != KernelVariant::TimeInvariant)
        throw argument_error("stationary_gd_field: expects a time-invariant kernel");
    return traj.num_nodes() == 1 ? gd_field(params, traj) : gd_field_network(params, traj);
}

} // namespace tulik
