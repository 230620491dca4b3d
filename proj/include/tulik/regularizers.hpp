#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "tulik/errors.hpp"
#include "tulik/fields.hpp"
#include "tulik/intensity.hpp"

namespace tulik {

enum class BarrierKind { Log, Quadratic };

namespace detail {

// log barrier l_b(x) = -b log(x/b); quadratic l_b(x) = (x-b)^2 / (0.2 b).
inline double barrier_loss(double x, double b, BarrierKind kind) {
    if (kind == BarrierKind::Quadratic) return (x - b) * (x - b) / (0.2 * b);
    return -b * std::log(x / b);
}

// Slope of the log barrier is capped at its value at x = b*1e-6, so the
// gradient stays bounded when an intensity dips to or below zero.
inline double barrier_slope(double x, double b, BarrierKind kind) {
    if (kind == BarrierKind::Quadratic) return (x - b) / (0.1 * b);
    if (x < b * 1e-6) return -1e6;
    return -b / x;
}

} // namespace detail

// Barrier penalty B = sum over steps (and nodes) with Lambda < b of l_b(Lambda).
inline double barrier_value(const IntensityRecord& rec, double b, BarrierKind kind) {
    double acc = 0.0;
    for (int t = 1; t <= rec.N; ++t)
        for (int u = 0; u < rec.V; ++u) {
            const double lam = rec.at(t, u);
            if (lam < b) acc += detail::barrier_loss(lam, b, kind);
        }
    return acc;
}

inline double barrier_value(const ModelParams& params, const Trajectory& traj, double b,
                            BarrierKind kind) {
    return barrier_value(compute_intensities(params, traj), b, kind);
}

// Gradient of the barrier in kernel coordinates; zero when nothing violates.
inline void add_barrier_gradient(const ModelParams& params, const Trajectory& traj,
                                 const IntensityRecord& rec, double b, BarrierKind kind,
                                 double weight, std::span<double> out) {
    if (!(b > 0.0)) throw argument_error("barrier_gradient: intensity floor must be positive");
    const KernelLayout& kl = params.kernel.layout();
    for (int t = 1; t <= rec.N; ++t)
        for (int u = 0; u < rec.V; ++u) {
            const double lam = rec.at(t, u);
            if (lam >= b) continue;
            const double w = weight * detail::barrier_slope(lam, b, kind);
            detail::for_history(traj, t,
                                [&](int i, int up) { out[kl.grad_index(i, t - i, up, u)] += w; });
        }
}

inline std::vector<double> barrier_gradient(const ModelParams& params, const Trajectory& traj,
                                            double b, BarrierKind kind) {
    const IntensityRecord rec = compute_intensities(params, traj);
    std::vector<double> out(params.kernel.values().size(), 0.0);
    add_barrier_gradient(params, traj, rec, b, kind, 1.0, out);
    return out;
}

// Smoothness penalty on the Psi view, per node pair:
//   S = (1/2h^2) [ sum over vertical neighbours (Psi_{i,l} - Psi_{i+1,l})^2
//                + sum over horizontal neighbours (Psi_{i,l} - Psi_{i,l+1})^2 ],
// summed over the full (N+N') x N' rectangle with structurally absent cells
// held at zero.
inline double smoothness_value(const KernelParams& kernel, double h) {
    if (kernel.variant() != KernelVariant::TimeVarying)
        throw argument_error("smoothness: requires the time-varying kernel variant");
    const KernelLayout& kl = kernel.layout();
    const std::vector<double>& v = kernel.values();
    double acc = 0.0;
    for (int up = 0; up < kl.V; ++up)
        for (int u = 0; u < kl.V; ++u)
            for (int i = -kl.Nprime + 1; i <= kl.N; ++i)
                for (int l = 1; l <= kl.Nprime; ++l) {
                    const double x = v[kl.unchecked_index(i, l, up, u)];
                    if (i < kl.N) {
                        const double d = x - v[kl.unchecked_index(i + 1, l, up, u)];
                        acc += d * d;
                    }
                    if (l < kl.Nprime) {
                        const double d = x - v[kl.unchecked_index(i, l + 1, up, u)];
                        acc += d * d;
                    }
                }
    return acc / (2.0 * h * h);
}

// Exact gradient of the quadratic form above, reported on trainable
// coordinates only (structurally absent neighbours act as fixed zeros).
inline std::vector<double> smoothness_gradient(const KernelParams& kernel, double h) {
    if (kernel.variant() != KernelVariant::TimeVarying)
        throw argument_error("smoothness: requires the time-varying kernel variant");
    const KernelLayout& kl = kernel.layout();
    const std::vector<double>& v = kernel.values();
    std::vector<double> g(v.size(), 0.0);
    const double inv_h2 = 1.0 / (h * h);
    for (int up = 0; up < kl.V; ++up)
        for (int u = 0; u < kl.V; ++u)
            for (int i = -kl.Nprime + 1; i <= kl.N; ++i)
                for (int l = 1; l <= kl.Nprime; ++l) {
                    const std::size_t a = kl.unchecked_index(i, l, up, u);
                    if (i < kl.N) {
                        const std::size_t bidx = kl.unchecked_index(i + 1, l, up, u);
                        const double d = inv_h2 * (v[a] - v[bidx]);
                        g[a] += d;
                        g[bidx] -= d;
                    }
                    if (l < kl.Nprime) {
                        const std::size_t bidx = kl.unchecked_index(i, l + 1, up, u);
                        const double d = inv_h2 * (v[a] - v[bidx]);
                        g[a] += d;
                        g[bidx] -= d;
                    }
                }
    // mask out structurally absent coordinates
    for (int i = -kl.Nprime + 1; i <= kl.N; ++i)
        for (int l = 1; l <= kl.Nprime; ++l) {
            if (kl.in_parallelogram(i, l)) continue;
            for (int up = 0; up < kl.V; ++up)
                for (int u = 0; u < kl.V; ++u) g[kl.unchecked_index(i, l, up, u)] = 0.0;
        }
    return g;
}

// Stationary counterpart: the same second-difference penalty along the lag
// vector, per node pair.
inline double smoothness_value_stationary(const KernelParams& kernel, double h) {
    if (kernel.variant() != KernelVariant::TimeInvariant)
        throw argument_error("smoothness_stationary: requires the time-invariant kernel variant");
    const KernelLayout& kl = kernel.layout();
    const std::vector<double>& v = kernel.values();
    double acc = 0.0;
    for (int up = 0; up < kl.V; ++up)
        for (int u = 0; u < kl.V; ++u)
            for (int l = 1; l < kl.Nprime; ++l) {
                const double d =
                    v[kl.unchecked_psi_index(l, up, u)] - v[kl.unchecked_psi_index(l + 1, up, u)];
                acc += d * d;
            }
    return acc / (2.0 * h * h);
}

inline std::vector<double> smoothness_gradient_stationary(const KernelParams& kernel, double h) {
    if (kernel.variant() != KernelVariant::TimeInvariant)
        throw argument_error("smoothness_stationary: requires the time-invariant kernel variant");
    const KernelLayout& kl = kernel.layout();
    const std::vector<double>& v = kernel.values();
    std::vector<double> g(v.size(), 0.0);
    const double inv_h2 = 1.0 / (h * h);
    for (int up = 0; up < kl.V; ++up)
        for (int u = 0; u < kl.V; ++u)
            for (int l = 1; l < kl.Nprime; ++l) {
                const std::size_t a = kl.unchecked_psi_index(l, up, u);
                const std::size_t bidx = kl.unchecked_psi_index(l + 1, up, u);
                const double d = inv_h2 * (v[a] - v[bidx]);
                g[a] += d;
                g[bidx] -= d;
            }
    return g;
}

} // namespace tulik
