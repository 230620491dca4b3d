#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "tulik/tulik.hpp"

namespace test_support {

using namespace tulik;

// Feasibility box: with |K| bounded by this, every reachable history keeps
// all intensities inside [floor, cap] (at most one event per step, at most
// Nprime of them in a memory window).
inline double feasible_box_bound(double mu, double floor, double cap, int Nprime) {
    return std::min(mu - floor, cap - mu) / Nprime;
}

// Random parameters whose intensities stay in [floor, cap] along every
// realization; the test-only stand-in for the projected scheme's box domain.
inline ModelParams random_feasible_params(const TimeGrid& grid, int V, double mu_value,
                                          double floor, double cap, Rng& rng,
                                          KernelVariant variant = KernelVariant::TimeVarying) {
    const double bound = feasible_box_bound(mu_value, floor, cap, grid.Nprime);
    KernelParams kernel(variant, grid, V);
    for (double& v : kernel.values()) v = rng.uniform(-bound, bound);
    kernel.clear_structural_zeros();
    std::vector<double> mu(static_cast<std::size_t>(V), mu_value);
    return ModelParams(std::move(mu), std::move(kernel));
}

// Projection onto the box {|z_k| <= bound}: the test-only mode of the
// theoretical projected scheme.
inline void project_box(std::vector<double>& z, double bound) {
    for (double& v : z) v = std::clamp(v, -bound, bound);
}

// Enumerates every realization of the observed steps 1..N (V+1 choices per
// step: none or one node) on top of a fixed pre-horizon history, calling
// visit(trajectory) for each.
inline void enumerate_realizations(const TimeGrid& grid, int V,
                                   const std::vector<std::int16_t>& history,
                                   const std::function<void(const Trajectory&)>& visit) {
    std::vector<std::int16_t> steps(static_cast<std::size_t>(grid.extended_steps()),
                                    Trajectory::kNoEvent);
    for (int t = grid.first_index(); t <= 0; ++t)
        steps[static_cast<std::size_t>(t + grid.Nprime - 1)] =
            history[static_cast<std::size_t>(t - grid.first_index())];
    const long total = static_cast<long>(std::pow(V + 1, grid.N));
    for (long code = 0; code < total; ++code) {
        long c = code;
        for (int t = 1; t <= grid.N; ++t) {
            const int choice = static_cast<int>(c % (V + 1));
            c /= V + 1;
            steps[static_cast<std::size_t>(t + grid.Nprime - 1)] =
                choice == 0 ? Trajectory::kNoEvent : static_cast<std::int16_t>(choice - 1);
        }
        visit(Trajectory(grid, V, steps));
    }
}

// Sum of exp(loglik) over all realizations; equals 1 for a proper law.
inline double total_probability(const ModelParams& params, const TimeGrid& grid, int V,
                                const std::vector<std::int16_t>& history) {
    double total = 0.0;
    enumerate_realizations(grid, V, history, [&](const Trajectory& traj) {
        total += std::exp(V == 1 ? loglik_unit(params, traj) : loglik_network(params, traj));
    });
    return total;
}

// Central finite difference of f over the kernel coordinates.
inline std::vector<double> central_difference(ModelParams params,
                                              const std::function<double(const ModelParams&)>& f,
                                              double step = 1e-5) {
    std::vector<double>& v = params.kernel.values();
    std::vector<double> grad(v.size(), 0.0);
    const KernelLayout& kl = params.kernel.layout();
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (kl.variant == KernelVariant::TimeVarying) {
            // skip structurally absent coordinates
            const std::size_t per_row = static_cast<std::size_t>(kl.Nprime) * kl.V * kl.V;
            const int i = static_cast<int>(k / per_row) - kl.Nprime + 1;
            const int l = static_cast<int>((k % per_row) / (kl.V * kl.V)) + 1;
            if (!kl.in_parallelogram(i, l)) continue;
        }
        const double saved = v[k];
        v[k] = saved + step;
        const double up = f(params);
        v[k] = saved - step;
        const double down = f(params);
        v[k] = saved;
        grad[k] = (up - down) / (2.0 * step);
    }
    return grad;
}

// Simple deterministic trajectory builder: events at the given (t, u) pairs.
inline Trajectory make_trajectory(const TimeGrid& grid, int V,
                                  const std::vector<std::pair<int, int>>& events) {
    std::vector<std::int16_t> steps(static_cast<std::size_t>(grid.extended_steps()),
                                    Trajectory::kNoEvent);
    for (const auto& [t, u] : events)
        steps[static_cast<std::size_t>(t + grid.Nprime - 1)] = static_cast<std::int16_t>(u);
    return Trajectory(grid, V, std::move(steps));
}

struct MeanStderr {
    double mean;
    double stderr_;
};

inline MeanStderr mean_stderr(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size() - 1);
    return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

} // namespace test_support
