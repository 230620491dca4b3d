#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "tulik/errors.hpp"
#include "tulik/intensity.hpp"
#include "tulik/likelihood.hpp"

namespace tulik {

inline constexpr double kBisectionLo = 1e-8;
inline constexpr double kBisectionCap = 1e4;
inline constexpr double kBisectionTol = 1e-10;

namespace detail {

// Bisection for a strictly decreasing equation on [lo, hi]. `hi0` seeds the
// bracket and is doubled until the sign flips, capped at kBisectionCap.
template <class F>
inline double bisect_decreasing(F&& f, double hi0, const char* what) {
    double lo = kBisectionLo;
    if (f(lo) < 0.0)
        throw no_root_error(std::string(what) + ": equation negative at the lower bracket");
    double hi = std::max(hi0, 2.0 * kBisectionLo);
    while (f(hi) > 0.0) {
        if (hi >= kBisectionCap)
            throw unbounded_error(std::string(what) + ": equation positive up to the bracket cap");
        hi = std::min(2.0 * hi, kBisectionCap);
    }
    while (hi - lo > kBisectionTol) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

// Root of the time-only baseline stationarity equation on a batch:
//   0 = sum_{m,t} h ( y_t / (1 - e^{-h (mu + <eta_t, theta_K>)}) - 1 ).
// With a zero kernel this is mu = -ln(1 - n/(MN))/h.
inline double solve_mu_time_only(const ModelParams& params,
                                 std::span<const Trajectory> batch) {
    if (batch.empty()) throw argument_error("solve_mu: empty batch");
    const TimeGrid& grid = batch.front().grid();
    const double h = grid.h;
    std::vector<double> event_excitation;
    long total_steps = 0;
    for (const Trajectory& traj : batch) {
        detail::check_compatible(params, traj);
        total_steps += grid.N;
        for (int t = 1; t <= grid.N; ++t)
            if (traj.has_event(t)) event_excitation.push_back(excitation(params, traj, t, 0));
    }
    if (event_excitation.empty())
        throw no_root_error("solve_mu: batch has no events");
    if (static_cast<long>(event_excitation.size()) == total_steps)
        throw unbounded_error("solve_mu: every step carries an event");

    const auto f = [&](double mu) {
        double acc = -static_cast<double>(total_steps);
        for (double c : event_excitation) acc += 1.0 / -std::expm1(-h * (mu + c));
        return h * acc;
    };
    const double mu_emp =
        static_cast<double>(event_excitation.size()) / (static_cast<double>(total_steps) * h);
    return detail::bisect_decreasing(f, mu_emp, "solve_mu");
}

// Pieces of the network Gauss-Seidel equations that are shared across nodes:
// the summed terms evaluated at the current baseline, plus per-node lists of
// event excitations in which the candidate baseline appears.
struct NetworkMuParts {
    double constant = 0.0;                           // sum of the bar-Lambda terms
    long total_steps = 0;                            // M * N
    std::vector<std::vector<double>> event_excitation; // per node
};

inline NetworkMuParts network_mu_parts(const ModelParams& params,
                                       std::span<const Trajectory> batch) {
    if (batch.empty()) throw argument_error("solve_mu: empty batch");
    const TimeGrid& grid = batch.front().grid();
    const int V = params.num_nodes();
    const double h = grid.h;
    NetworkMuParts parts;
    parts.event_excitation.resize(static_cast<std::size_t>(V));
    for (const Trajectory& traj : batch) {
        detail::check_compatible(params, traj);
        parts.total_steps += grid.N;
        for (int t = 1; t <= grid.N; ++t) {
            double bar = 0.0;
            const std::int16_t ev = traj.event_node(t);
            double ev_excite = 0.0;
            for (int u = 0; u < V; ++u) {
                const double e = excitation(params, traj, t, u);
                bar += params.mu[u] + e;
                if (ev == u) ev_excite = e;
            }
            if (ev != Trajectory::kNoEvent) {
                parts.constant += h * (1.0 / -std::expm1(-h * bar) - 1.0) - 1.0 / bar;
                parts.event_excitation[static_cast<std::size_t>(ev)].push_back(ev_excite);
            } else {
                parts.constant -= h;
            }
        }
    }
    return parts;
}

// Solves the decoupled equation for one node:
//   0 = constant + sum over events at u of 1 / (mu(u) + <eta_{t,u}, theta_K>).
inline double solve_mu_network_node(const NetworkMuParts& parts, int u, double h) {
    const std::vector<double>& events = parts.event_excitation[static_cast<std::size_t>(u)];
    if (events.empty()) throw no_root_error("solve_mu: node has no events in the batch");
    if (static_cast<long>(events.size()) == parts.total_steps)
        throw unbounded_error("solve_mu: every step carries an event at this node");
    const auto f = [&](double mu) {
        double acc = parts.constant;
        for (double c : events) acc += 1.0 / (mu + c);
        return acc;
    };
    const double mu_emp =
        static_cast<double>(events.size()) / (static_cast<double>(parts.total_steps) * h);
    return detail::bisect_decreasing(f, mu_emp, "solve_mu");
}

// Baseline estimates on a batch: the 1D stationarity root for a single node,
// or one Gauss-Seidel pass (every node solved against the current baseline)
// on a network.
inline std::vector<double> solve_mu_bisection(const ModelParams& params,
                                              std::span<const Trajectory> batch) {
    const int V = params.num_nodes();
    if (V == 1) return {solve_mu_time_only(params, batch)};
    const NetworkMuParts parts = network_mu_parts(params, batch);
    const double h = batch.front().grid().h;
    std::vector<double> out(static_cast<std::size_t>(V));
    for (int u = 0; u < V; ++u) out[static_cast<std::size_t>(u)] = solve_mu_network_node(parts, u, h);
    return out;
}

} // namespace tulik
