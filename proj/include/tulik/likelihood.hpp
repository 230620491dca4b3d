#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "tulik/errors.hpp"
#include "tulik/intensity.hpp"

namespace tulik {

// Scalar link: conditional event probability per step is phi(h * Lambda_t).
// Strictly increasing, range (-inf, 1); phi(0) = 0.
inline double link_phi(double x) noexcept { return -std::expm1(-x); }

// log(1 - e^{-x}) evaluated through expm1 so small x keeps full precision.
inline double log_phi(double x) { return std::log(-std::expm1(-x)); }

// Vector link on a network: Phi(x)_u = (1 - e^{-s})/s * x_u with s = sum(x).
// Computed as phi(s) * (x_u / s), so the V=1 case reduces to phi exactly.
inline std::vector<double> link_Phi(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) {
        if (!(v > 0.0)) throw domain_error("link_Phi: entries must be strictly positive");
        s += v;
    }
    const double phis = link_phi(s);
    std::vector<double> out(x.size());
    for (std::size_t u = 0; u < x.size(); ++u) out[u] = phis * (x[u] / s);
    return out;
}

// Unit-uncertainty Bernoulli log-likelihood of one time-only trajectory:
//   sum_t [ -(1 - y_t) h Lambda_t + y_t log(1 - e^{-h Lambda_t}) ].
inline double loglik_unit(const ModelParams& params, const Trajectory& traj) {
    detail::check_compatible(params, traj);
    if (traj.num_nodes() != 1) throw argument_error("loglik_unit: expects a single-node trajectory");
    const TimeGrid& grid = traj.grid();
    const double h = grid.h;
    double ll = 0.0;
    for (int t = 1; t <= grid.N; ++t) {
        const double lam = params.mu[0] + excitation(params, traj, t, 0);
        if (traj.has_event(t)) {
            if (!(lam > 0.0))
                throw infeasible_error("loglik_unit: nonpositive intensity at an event step", t, 0);
            ll += log_phi(h * lam);
        } else {
            ll -= h * lam;
        }
    }
    return ll;
}

// Network log-likelihood (Bernoulli form):
//   sum_t [ ybar_t log((1 - e^{-h bar_t}) Lambda_t(u_t) / bar_t) - (1 - ybar_t) h bar_t ].
// Reduces to loglik_unit when V = 1.
inline double loglik_network(const ModelParams& params, const Trajectory& traj) {
    detail::check_compatible(params, traj);
    const TimeGrid& grid = traj.grid();
    const int V = traj.num_nodes();
    const double h = grid.h;
    double ll = 0.0;
    for (int t = 1; t <= grid.N; ++t) {
        double bar = 0.0;
        double lam_event = 0.0;
        const std::int16_t u = traj.event_node(t);
        for (int v = 0; v < V; ++v) {
            const double lam = params.mu[v] + excitation(params, traj, t, v);
            bar += lam;
            if (v == u) lam_event = lam;
        }
        if (u != Trajectory::kNoEvent) {
            if (!(lam_event > 0.0))
                throw infeasible_error("loglik_network: nonpositive intensity at the event node", t, u);
            if (!(bar > 0.0))
                throw infeasible_error("loglik_network: nonpositive summed intensity at an event step", t);
            ll += log_phi(h * bar) + std::log(lam_event) - std::log(bar);
        } else {
            ll -= h * bar;
        }
    }
    return ll;
}

// Event uncertainty windows occupying whole grid intervals t_l..t_r, ordered
// and non-overlapping. Only observed steps (t >= 1) may carry windows.
struct WindowedEvents {
    TimeGrid grid;
    std::vector<std::pair<int, int>> events; // (t_l, t_r), inclusive

    WindowedEvents(TimeGrid grid_, std::vector<std::pair<int, int>> events_)
        : grid(grid_), events(std::move(events_)) {
        int prev_r = 0;
        for (const auto& [l, r] : events) {
            if (l < 1 || r > grid.N || l > r)
                throw argument_error("WindowedEvents: window outside 1..N or inverted");
            if (l <= prev_r) throw argument_error("WindowedEvents: windows overlap or are unordered");
            prev_r = r;
        }
    }
};

// Window-averaged intensity Lambda_j[K] = mu + sum_{k: r_k < j} (1/w_k) sum_{i in window_k} K_{i,j}.
inline double windowed_intensity(const ModelParams& params, const WindowedEvents& windows, int j) {
    double lam = params.mu[0];
    for (const auto& [l, r] : windows.events) {
        if (r >= j) break;
        double s = 0.0;
        for (int i = l; i <= r; ++i) s += params.kernel.k(i, j, 0, 0);
        lam += s / (r - l + 1);
    }
    return lam;
}

// Arbitrary-window log-likelihood:
//   sum_k log(e^{h sum_{j in window_k} Lambda_j} - 1) - h sum_{j=1..N} Lambda_j.
// Time-varying kernels only; when every window is unit width this agrees with
// loglik_unit on the induced binary trajectory.
inline double loglik_windowed(const ModelParams& params, const WindowedEvents& windows) {
    if (params.kernel.variant() != KernelVariant::TimeVarying)
        throw argument_error("loglik_windowed: requires the time-varying kernel variant");
    if (params.num_nodes() != 1)
        throw argument_error("loglik_windowed: expects a single-node model");
    if (params.kernel.layout().N != windows.grid.N ||
        params.kernel.layout().Nprime != windows.grid.Nprime)
        throw argument_error("loglik_windowed: kernel and window grids differ");

    const double h = windows.grid.h;
    std::vector<double> lambda(static_cast<std::size_t>(windows.grid.N) + 1, 0.0);
    double total = 0.0;
    for (int j = 1; j <= windows.grid.N; ++j) {
        lambda[j] = windowed_intensity(params, windows, j);
        total += lambda[j];
    }
    double ll = -h * total;
    for (std::size_t k = 0; k < windows.events.size(); ++k) {
        const auto& [l, r] = windows.events[k];
        double s = 0.0;
        for (int j = l; j <= r; ++j) s += lambda[j];
        if (!(s > 0.0))
            throw infeasible_error("loglik_windowed: nonpositive window intensity sum", l);
        // log(e^{hs} - 1) = hs + log(1 - e^{-hs})
        ll += h * s + log_phi(h * s);
    }
    return ll;
}

} // namespace tulik
