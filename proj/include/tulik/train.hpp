#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "tulik/baseline.hpp"
#include "tulik/errors.hpp"
#include "tulik/fields.hpp"
#include "tulik/lowrank.hpp"
#include "tulik/regularizers.hpp"
#include "tulik/rng.hpp"

namespace tulik {

enum class Method { VI, GD };

// Piecewise-constant learning-rate schedule: (from_epoch, rate) breakpoints
// in ascending epoch order, the first at epoch 1.
struct LrSchedule {
    std::vector<std::pair<int, double>> breakpoints{{1, 0.4}};

    double at(int epoch) const {
        double rate = 0.0;
        bool found = false;
        for (const auto& [from, r] : breakpoints) {
            if (from > epoch) break;
            rate = r;
            found = true;
        }
        if (!found) throw argument_error("LrSchedule: no rate defined for epoch");
        return rate;
    }

    void validate(int max_epochs) const {
        (void)max_epochs; // breakpoints past the last epoch are simply never reached
        if (breakpoints.empty() || breakpoints.front().first != 1)
            throw argument_error("LrSchedule: first breakpoint must be at epoch 1");
        int prev = 0;
        for (const auto& [from, r] : breakpoints) {
            if (from <= prev)
                throw argument_error("LrSchedule: breakpoints must be strictly ascending");
            if (!(r > 0.0)) throw argument_error("LrSchedule: rates must be positive");
            prev = from;
        }
    }
};

struct TrainConfig {
    int batch_size = 400;
    int max_epochs = 300;
    LrSchedule lr_schedule{{{1, 0.4}, {101, 0.2}}};
    Method method = Method::VI;
    double intensity_floor = 0.01; // b
    double barrier_weight = 0.1;   // delta_b
    BarrierKind barrier_kind = BarrierKind::Quadratic;
    double smoothness_weight = 0.08; // delta_s, 0 disables the epoch step
    std::optional<double> svd_threshold = std::nullopt;
    double mu_mix = 0.1; // weight on the freshly solved baseline
    std::uint64_t rng_seed = 1;
    KernelVariant kernel_variant = KernelVariant::TimeVarying;
    double init_kernel_constant = 0.0;   // constant kernel init (0 = zero init)
    std::vector<int> init_zero_source_nodes; // rows u' initialised to zero regardless
    bool deterministic_reduction = true;

    void validate() const {
        if (batch_size < 1) throw argument_error("TrainConfig: batch_size must be >= 1");
        if (max_epochs < 1) throw argument_error("TrainConfig: max_epochs must be >= 1");
        lr_schedule.validate(max_epochs);
        if (!(intensity_floor > 0.0))
            throw argument_error("TrainConfig: intensity_floor must be positive");
        if (barrier_weight < 0.0)
            throw argument_error("TrainConfig: barrier_weight must be nonnegative");
        if (smoothness_weight < 0.0)
            throw argument_error("TrainConfig: smoothness_weight must be nonnegative");
        if (svd_threshold && !(*svd_threshold > 0.0))
            throw argument_error("TrainConfig: svd_threshold must be positive");
        if (svd_threshold && kernel_variant == KernelVariant::TimeInvariant)
            throw argument_error("TrainConfig: svd truncation applies to time-varying kernels only");
        if (!(mu_mix > 0.0 && mu_mix < 1.0))
            throw argument_error("TrainConfig: mu_mix must lie in (0,1)");
    }
};

struct FitReport {
    std::vector<double> nll_per_epoch;
    std::vector<std::vector<double>> mu_trace;
    std::vector<long> violation_counts;
    ModelParams final_params;
    std::optional<int> truncation_rank;
    long mu_update_skips = 0;
    std::map<std::string, std::string> metadata;
};

namespace detail {

inline int worker_count() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("TULIK_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned>(cap) < n) n = static_cast<unsigned>(cap);
    }
    return static_cast<int>(n);
}

// Per-trajectory batch contribution: field over the feasible subset scaled by
// 1/M_B, barrier gradient over the violating subset scaled by delta_b (the
// barrier term is left unnormalised, matching the update rule). Also tallies
// the trajectory's log-likelihood where it is defined.
struct BatchAccumulator {
    std::vector<double> grad;
    double nll_sum = 0.0;
    long nll_count = 0;
    long violations = 0;

    explicit BatchAccumulator(std::size_t size) : grad(size, 0.0) {}

    void merge(const BatchAccumulator& o) {
        for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += o.grad[k];
        nll_sum += o.nll_sum;
        nll_count += o.nll_count;
        violations += o.violations;
    }
};

inline void accumulate_trajectory(const ModelParams& params, const Trajectory& traj,
                                  const TrainConfig& cfg, double field_weight,
                                  BatchAccumulator& acc) {
    const IntensityRecord rec = compute_intensities(params, traj);
    double min_lambda = rec.lambda.empty() ? 0.0 : rec.lambda.front();
    for (double v : rec.lambda) min_lambda = std::min(min_lambda, v);

    const bool network = traj.num_nodes() > 1;
    // training-loss trace at the parameters current when the batch is visited
    bool nll_ok = true;
    double ll = 0.0;
    const double h = traj.grid().h;
    for (int t = 1; t <= rec.N && nll_ok; ++t) {
        const std::int16_t ev = traj.event_node(t);
        const double bar = rec.bar(t);
        if (ev == Trajectory::kNoEvent) {
            ll -= h * bar;
        } else if (bar > 0.0 && rec.at(t, ev) > 0.0) {
            ll += log_phi(h * bar);
            if (network) ll += std::log(rec.at(t, ev)) - std::log(bar);
        } else {
            nll_ok = false;
        }
    }
    if (nll_ok) {
        acc.nll_sum += -ll;
        acc.nll_count += 1;
    }

    if (min_lambda < cfg.intensity_floor) {
        acc.violations += 1;
        add_barrier_gradient(params, traj, rec, cfg.intensity_floor, cfg.barrier_kind,
                             cfg.barrier_weight, acc.grad);
        return;
    }
    if (network) {
        if (cfg.method == Method::VI)
            add_vi_field_network(params, traj, rec, field_weight, acc.grad);
        else
            add_gd_field_network(params, traj, rec, field_weight, acc.grad);
    } else {
        if (cfg.method == Method::VI)
            add_vi_field(params, traj, rec, field_weight, acc.grad);
        else
            add_gd_field(params, traj, rec, field_weight, acc.grad);
    }
}

// Deterministic reduction: the batch is cut into fixed chunks whose partial
// sums are merged in chunk order, so the result does not depend on the worker
// count. The non-deterministic mode merges per-worker buffers instead.
inline BatchAccumulator process_batch(const ModelParams& params,
                                      const std::vector<Trajectory>& dataset,
                                      std::span<const std::size_t> batch_idx,
                                      const TrainConfig& cfg) {
    const double field_weight = 1.0 / static_cast<double>(batch_idx.size());
    const std::size_t grad_size = params.kernel.values().size();
    const int workers = std::min<int>(worker_count(), static_cast<int>(batch_idx.size()));

    constexpr std::size_t kChunk = 16;
    const std::size_t num_chunks = (batch_idx.size() + kChunk - 1) / kChunk;
    // Deterministic mode keeps one partial per fixed chunk so the merge order
    // never depends on the worker count; otherwise one buffer per worker.
    const std::size_t num_buffers = cfg.deterministic_reduction
                                        ? num_chunks
                                        : static_cast<std::size_t>(std::max(workers, 1));
    std::vector<BatchAccumulator> partials(num_buffers, BatchAccumulator(grad_size));

    const auto run_chunk = [&](std::size_t c, BatchAccumulator& acc) {
        const std::size_t begin = c * kChunk;
        const std::size_t end = std::min(begin + kChunk, batch_idx.size());
        for (std::size_t k = begin; k < end; ++k)
            accumulate_trajectory(params, dataset[batch_idx[k]], cfg, field_weight, acc);
    };

    if (workers <= 1) {
        for (std::size_t c = 0; c < num_chunks; ++c)
            run_chunk(c, cfg.deterministic_reduction ? partials[c] : partials[0]);
    } else {
        std::atomic<std::size_t> next_chunk{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto work = [&](int worker_id) {
            try {
                for (;;) {
                    const std::size_t c = next_chunk.fetch_add(1);
                    if (c >= num_chunks) break;
                    run_chunk(c, cfg.deterministic_reduction
                                     ? partials[c]
                                     : partials[static_cast<std::size_t>(worker_id)]);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (std::thread& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    BatchAccumulator total(grad_size);
    for (const BatchAccumulator& p : partials) total.merge(p);
    return total;
}

inline KernelParams init_kernel(const TrainConfig& cfg, const TimeGrid& grid, int V) {
    KernelParams kernel(cfg.kernel_variant, grid, V);
    if (cfg.init_kernel_constant == 0.0) return kernel;
    const auto zeroed = [&](int up) {
        return std::find(cfg.init_zero_source_nodes.begin(), cfg.init_zero_source_nodes.end(),
                         up) != cfg.init_zero_source_nodes.end();
    };
    if (cfg.kernel_variant == KernelVariant::TimeInvariant) {
        for (int l = 1; l <= grid.Nprime; ++l)
            for (int up = 0; up < V; ++up)
                for (int u = 0; u < V; ++u)
                    kernel.set_psi(l, up, u, zeroed(up) ? 0.0 : cfg.init_kernel_constant);
        return kernel;
    }
    for (int i = -grid.Nprime + 1; i <= grid.N; ++i)
        for (int l = 1; l <= grid.Nprime; ++l) {
            if (!kernel.layout().in_parallelogram(i, l)) continue;
            for (int up = 0; up < V; ++up)
                for (int u = 0; u < V; ++u)
                    kernel.set_psi_view(i, l, up, u, zeroed(up) ? 0.0 : cfg.init_kernel_constant);
        }
    return kernel;
}

} // namespace detail

// Stochastic batch-based training. Per batch: intensities are computed for
// every trajectory, trajectories whose minimum intensity falls below the
// floor b are routed to the barrier penalty, the remaining ones contribute
// the VI or GD field scaled by 1/M_B, the kernel takes one step, and the
// baseline is re-solved by bisection on the batch and mixed into the running
// estimate. An optional smoothness step runs once per epoch and an optional
// truncated-SVD projection once at the end.
inline FitReport train(const TrainConfig& cfg, const std::vector<Trajectory>& dataset,
                       std::optional<std::vector<double>> mu0 = std::nullopt) {
    cfg.validate();
    if (dataset.empty()) throw argument_error("train: empty dataset");
    const TimeGrid grid = dataset.front().grid();
    const int V = dataset.front().num_nodes();
    for (const Trajectory& traj : dataset)
        if (!(traj.grid() == grid) || traj.num_nodes() != V)
            throw argument_error("train: dataset grids or node counts are not homogeneous");

    const std::size_t M = dataset.size();
    const double h = grid.h;

    // baseline init: empirical event frequency per node unless given
    std::vector<double> mu(static_cast<std::size_t>(V), 0.0);
    if (mu0) {
        if (mu0->size() != static_cast<std::size_t>(V))
            throw argument_error("train: mu0 length does not match the node count");
        mu = *mu0;
    } else {
        for (const Trajectory& traj : dataset)
            for (int u = 0; u < V; ++u) mu[static_cast<std::size_t>(u)] += traj.event_count(u);
        for (double& m : mu)
            m = std::max(m / (static_cast<double>(M) * grid.N * h), 1e-8);
    }

    KernelParams kernel = detail::init_kernel(cfg, grid, V);

    FitReport report;
    report.metadata["quadrature"] = "gauss-legendre-16";
    report.metadata["bisection_tolerance"] = "1e-10";
    report.metadata["bisection_bracket"] = "[1e-08, doubled to at most 1e+04]";
    report.metadata["method"] = cfg.method == Method::VI ? "vi" : "gd";

    std::vector<std::size_t> order(M);
    for (std::size_t m = 0; m < M; ++m) order[m] = m;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const double gamma = cfg.lr_schedule.at(epoch);

        // fresh shuffle per epoch from a derived seed
        Rng shuffle_rng(derive_seed(cfg.rng_seed, 0x5f5e100ULL + static_cast<std::uint64_t>(epoch)));
        for (std::size_t m = M; m > 1; --m) {
            const std::size_t j = static_cast<std::size_t>(shuffle_rng.uniform() * m);
            std::swap(order[m - 1], order[std::min(j, m - 1)]);
        }

        double nll_sum = 0.0;
        long nll_count = 0;
        long violations = 0;

        for (std::size_t begin = 0; begin < M; begin += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(begin + static_cast<std::size_t>(cfg.batch_size), M);
            const std::span<const std::size_t> batch_idx(order.data() + begin, end - begin);

            ModelParams params(mu, kernel);
            detail::BatchAccumulator acc =
                detail::process_batch(params, dataset, batch_idx, cfg);
            nll_sum += acc.nll_sum;
            nll_count += acc.nll_count;
            violations += acc.violations;

            for (double g : acc.grad)
                if (!std::isfinite(g))
                    throw numeric_error("train: non-finite field at epoch " +
                                        std::to_string(epoch));
            for (std::size_t k = 0; k < kernel.values().size(); ++k)
                kernel.values()[k] -= gamma * acc.grad[k];

            // baseline step on the batch with the freshly updated kernel
            std::vector<Trajectory> batch;
            batch.reserve(batch_idx.size());
            for (std::size_t idx : batch_idx) batch.push_back(dataset[idx]);
            ModelParams stepped(mu, kernel);
            if (V == 1) {
                try {
                    const double mu_tilde = solve_mu_time_only(stepped, batch);
                    mu[0] = (1.0 - cfg.mu_mix) * mu[0] + cfg.mu_mix * mu_tilde;
                } catch (const no_root_error&) {
                    ++report.mu_update_skips;
                } catch (const unbounded_error&) {
                    ++report.mu_update_skips;
                }
            } else {
                const NetworkMuParts parts = network_mu_parts(stepped, batch);
                for (int u = 0; u < V; ++u) {
                    try {
                        const double mu_tilde = solve_mu_network_node(parts, u, h);
                        mu[static_cast<std::size_t>(u)] =
                            (1.0 - cfg.mu_mix) * mu[static_cast<std::size_t>(u)] +
                            cfg.mu_mix * mu_tilde;
                    } catch (const no_root_error&) {
                        ++report.mu_update_skips;
                    } catch (const unbounded_error&) {
                        ++report.mu_update_skips;
                    }
                }
            }
        }

        if (cfg.smoothness_weight > 0.0) {
            const std::vector<double> gs =
                cfg.kernel_variant == KernelVariant::TimeVarying
                    ? smoothness_gradient(kernel, h)
                    : smoothness_gradient_stationary(kernel, h);
            for (std::size_t k = 0; k < kernel.values().size(); ++k)
                kernel.values()[k] -= gamma * cfg.smoothness_weight * gs[k];
        }

        report.nll_per_epoch.push_back(nll_count > 0 ? nll_sum / static_cast<double>(nll_count)
                                                     : std::numeric_limits<double>::quiet_NaN());
        report.mu_trace.push_back(mu);
        report.violation_counts.push_back(violations);
    }

    if (cfg.svd_threshold) report.truncation_rank = low_rank_truncate(kernel, *cfg.svd_threshold);

    report.final_params = ModelParams(mu, std::move(kernel));
    return report;
}

} // namespace tulik
