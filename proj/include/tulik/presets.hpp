#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "tulik/discretize.hpp"
#include "tulik/errors.hpp"
#include "tulik/params.hpp"
#include "tulik/rng.hpp"
#include "tulik/train.hpp"

namespace tulik {

// Benchmark time-only kernel: a 13-term sum of cosine-modulated Gaussians,
// time-varying with both excitation and inhibition.
inline double paper_kernel_time_only(double tprime, double t) {
    double acc = 0.0;
    double pow2 = 1.0;
    for (int j = 1; j <= 13; ++j) {
        pow2 *= 0.5;
        const double cosine =
            std::cos(2.0 + 1.3 * std::numbers::pi * (j + 1) * ((tprime - 9.0) / 15.0));
        const double lagged = (t - tprime) * j;
        acc += 0.3 * pow2 * (cosine + 0.6) * std::exp(-8.0 * lagged * lagged / 25.0);
    }
    return acc;
}

// One directed edge of the benchmark network with its sampled temporal pattern.
struct NetworkEdge {
    int uprime;
    int u;
    double omega;
    double shift;
};

// Benchmark network kernel: cosine-modulated Gaussian bump per directed edge,
// zero on non-edges.
inline double paper_kernel_network(double tprime, double t, int uprime, int u,
                                   const std::vector<NetworkEdge>& edges) {
    for (const NetworkEdge& e : edges) {
        if (e.uprime != uprime || e.u != u) continue;
        const double centered = t - tprime - e.shift;
        return 0.35 * (std::cos(e.omega * (t + 2.0)) + 0.75) * std::exp(-20.0 * centered * centered);
    }
    return 0.0;
}

// A fully specified benchmark scenario: grid, truth, and any edge metadata.
struct Preset {
    std::string name;
    TimeGrid grid;
    ModelParams truth;
    std::vector<NetworkEdge> edges; // network presets only
};

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {
        "paper-timeonly-small", "paper-timeonly-large", "paper-stationary", "paper-network"};
    return names;
}

// Lag profile of the stationary benchmark: damped oscillation with a short
// inhibitory stretch, subcritical at mu = 0.2.
inline double stationary_profile(double tau) {
    return 0.25 * (std::cos(1.5 * tau - 0.5) + 0.5) * std::exp(-0.35 * tau);
}

inline Preset make_preset(const std::string& name, std::uint64_t master_seed) {
    if (name == "paper-timeonly-small" || name == "paper-timeonly-large") {
        const bool small = name == "paper-timeonly-small";
        const TimeGrid grid(small ? 0.5 : 0.05, small ? 32 : 320, small ? 8 : 80);
        KernelParams kernel = discretize_kernel(
            [](double tp, double tt, int, int) { return paper_kernel_time_only(tp, tt); }, grid, 1);
        return Preset{name, grid, ModelParams({0.2}, std::move(kernel)), {}};
    }
    if (name == "paper-stationary") {
        const TimeGrid grid(0.5, 32, 16);
        KernelParams kernel = discretize_stationary(stationary_profile, grid, 1);
        return Preset{name, grid, ModelParams({0.2}, std::move(kernel)), {}};
    }
    if (name == "paper-network") {
        const int V = 5;
        const TimeGrid grid(0.1, 32, 8);
        // Edge set and per-edge parameters are drawn once per dataset from the
        // master seed and stored with it.
        Rng rng(derive_seed(master_seed, 0x7e5e7));
        std::vector<std::pair<int, int>> pairs;
        for (int up = 0; up < V; ++up)
            for (int u = 0; u < V; ++u)
                if (up != u) pairs.emplace_back(up, u);
        std::vector<NetworkEdge> edges;
        for (int picked = 0; picked < 8; ++picked) {
            const int idx = static_cast<int>(rng.uniform() * pairs.size());
            const auto [up, u] = pairs[std::min<std::size_t>(idx, pairs.size() - 1)];
            pairs.erase(pairs.begin() + idx);
            edges.push_back({up, u, rng.uniform(2.0, 6.0), rng.uniform(0.0, 0.2)});
        }
        std::vector<double> mu(V);
        for (int u = 0; u < V; ++u) mu[u] = rng.uniform(0.25, 0.35);
        KernelParams kernel = discretize_kernel(
            [&edges](double tp, double tt, int up, int u) {
                return paper_kernel_network(tp, tt, up, u, edges);
            },
            grid, V);
        return Preset{name, grid, ModelParams(std::move(mu), std::move(kernel)), std::move(edges)};
    }
    throw argument_error("unknown preset: " + name);
}

// Benchmark training hyperparameters for each preset.
inline TrainConfig preset_train_config(const std::string& name, Method method) {
    TrainConfig cfg;
    cfg.method = method;
    const bool vi = method == Method::VI;
    if (name == "paper-timeonly-small" || name == "paper-timeonly-large") {
        cfg.batch_size = 400;
        cfg.max_epochs = 300;
        cfg.lr_schedule.breakpoints = vi ? std::vector<std::pair<int, double>>{{1, 0.4}, {101, 0.2}}
                                         : std::vector<std::pair<int, double>>{{1, 0.2}, {101, 0.1}};
        cfg.intensity_floor = 0.01;
        cfg.barrier_weight = 0.1;
        cfg.barrier_kind = BarrierKind::Quadratic;
        // The per-epoch smoothness step Psi <- (I - gamma*ds/h^2 L) Psi is
        // stable only while gamma*ds*lambda_max(L) <= 2 h^2; the large grid
        // (h = 0.05) needs the smaller weight.
        cfg.smoothness_weight = name == "paper-timeonly-small" ? 0.08 : 0.0004;
        return cfg;
    }
    if (name == "paper-stationary") {
        cfg.batch_size = 400;
        cfg.max_epochs = 60;
        cfg.lr_schedule.breakpoints = vi ? std::vector<std::pair<int, double>>{{1, 0.4}, {21, 0.2}}
                                         : std::vector<std::pair<int, double>>{{1, 0.2}, {21, 0.1}};
        cfg.intensity_floor = 0.01;
        cfg.barrier_weight = 0.1;
        cfg.barrier_kind = BarrierKind::Quadratic;
        cfg.smoothness_weight = 0.004;
        cfg.kernel_variant = KernelVariant::TimeInvariant;
        return cfg;
    }
    if (name == "paper-network") {
        cfg.batch_size = 800;
        cfg.max_epochs = 150;
        cfg.lr_schedule.breakpoints = vi ? std::vector<std::pair<int, double>>{{1, 0.4}, {51, 0.2}}
                                         : std::vector<std::pair<int, double>>{{1, 0.2}, {51, 0.1}};
        cfg.intensity_floor = 0.03;
        cfg.barrier_weight = 0.1;
        cfg.barrier_kind = BarrierKind::Quadratic;
        cfg.smoothness_weight = 0.004;
        return cfg;
    }
    throw argument_error("unknown preset: " + name);
}

} // namespace tulik
