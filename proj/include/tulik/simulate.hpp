#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tulik/errors.hpp"
#include "tulik/intensity.hpp"
#include "tulik/likelihood.hpp"
#include "tulik/rng.hpp"

namespace tulik {

// Draws a trajectory from the exact conditional law: y_t ~ Bernoulli(phi(h Lambda_t))
// for t = -Nprime+1 .. N, with Lambda_t computed from the realized history
// (pre-horizon steps see no kernel influence, so they run at the baseline).
// Consumes exactly one uniform draw per step.
inline Trajectory simulate_time_only(const ModelParams& params, const TimeGrid& grid, Rng& rng) {
    if (params.num_nodes() != 1)
        throw argument_error("simulate_time_only: expects a single-node model");
    if (params.kernel.layout().N != grid.N || params.kernel.layout().Nprime != grid.Nprime)
        throw argument_error("simulate_time_only: kernel and grid differ");

    Trajectory traj(grid, 1);
    std::vector<std::int16_t> steps(static_cast<std::size_t>(grid.extended_steps()),
                                    Trajectory::kNoEvent);
    for (int t = grid.first_index(); t <= grid.N; ++t) {
        double lam = params.mu[0];
        if (t >= 1) {
            const int lo = std::max(t - grid.Nprime, grid.first_index());
            for (int i = lo; i <= t - 1; ++i)
                if (steps[static_cast<std::size_t>(i + grid.Nprime - 1)] != Trajectory::kNoEvent)
                    lam += params.kernel.k(i, t, 0, 0);
        }
        if (!(lam > 0.0))
            throw infeasible_error("simulate_time_only: nonpositive intensity at step " +
                                       std::to_string(t),
                                   t, 0);
        if (rng.bernoulli(link_phi(grid.h * lam)))
            steps[static_cast<std::size_t>(t + grid.Nprime - 1)] = 0;
    }
    return Trajectory(grid, 1, std::move(steps));
}

// Network counterpart: per step, the event indicator is Bernoulli(phi(h bar_t))
// and, given an event, the node follows the categorical law Lambda_t(u)/bar_t.
// At most one event per step by construction. With V = 1 the draw sequence is
// identical to simulate_time_only (the node draw is skipped), so the same seed
// yields the same trajectory.
inline Trajectory simulate_network(const ModelParams& params, const TimeGrid& grid, Rng& rng) {
    const int V = params.num_nodes();
    if (params.kernel.layout().N != grid.N || params.kernel.layout().Nprime != grid.Nprime)
        throw argument_error("simulate_network: kernel and grid differ");

    std::vector<std::int16_t> steps(static_cast<std::size_t>(grid.extended_steps()),
                                    Trajectory::kNoEvent);
    std::vector<double> lam(static_cast<std::size_t>(V));
    for (int t = grid.first_index(); t <= grid.N; ++t) {
        double bar = 0.0;
        for (int u = 0; u < V; ++u) {
            double v = params.mu[u];
            if (t >= 1) {
                const int lo = std::max(t - grid.Nprime, grid.first_index());
                for (int i = lo; i <= t - 1; ++i) {
                    const std::int16_t up = steps[static_cast<std::size_t>(i + grid.Nprime - 1)];
                    if (up != Trajectory::kNoEvent) v += params.kernel.k(i, t, up, u);
                }
            }
            if (!(v > 0.0))
                throw infeasible_error("simulate_network: nonpositive intensity at step " +
                                           std::to_string(t),
                                       t, u);
            lam[u] = v;
            bar += v;
        }
        if (rng.bernoulli(link_phi(grid.h * bar))) {
            const int u = V == 1 ? 0 : rng.categorical(lam.data(), V, bar);
            steps[static_cast<std::size_t>(t + grid.Nprime - 1)] = static_cast<std::int16_t>(u);
        }
    }
    return Trajectory(grid, V, std::move(steps));
}

// Independent per-trajectory streams derived from (master seed, index):
// generation order does not affect the dataset. A path that reaches a
// nonpositive intensity is rejected and redrawn from an attempt-keyed stream,
// which samples the law conditioned on physical intensities; for the
// benchmark presets this touches at most a few paths in ten thousand.
inline std::vector<Trajectory> simulate_dataset(const ModelParams& params, const TimeGrid& grid,
                                                std::size_t count, std::uint64_t master_seed) {
    std::vector<Trajectory> out;
    out.reserve(count);
    const bool network = params.num_nodes() > 1;
    for (std::size_t m = 0; m < count; ++m) {
        for (std::uint64_t attempt = 0;; ++attempt) {
            if (attempt >= 100)
                throw infeasible_error("simulate_dataset: trajectory keeps reaching nonpositive "
                                       "intensities; the model is not physical",
                                       0);
            Rng rng(derive_seed(master_seed, m + (1ULL << 40) * attempt));
            try {
                out.push_back(network ? simulate_network(params, grid, rng)
                                      : simulate_time_only(params, grid, rng));
                break;
            } catch (const infeasible_error&) {
                continue;
            }
        }
    }
    return out;
}

} // namespace tulik
