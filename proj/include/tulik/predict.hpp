#pragma once

#include <cmath>
#include <vector>

#include "tulik/errors.hpp"
#include "tulik/intensity.hpp"
#include "tulik/likelihood.hpp"

namespace tulik {

namespace detail {
inline void check_prediction_window(const TimeGrid& grid, int t_last, int j_l, int j_r) {
    if (t_last < 0 || t_last > grid.N)
        throw argument_error("predict: conditioning index out of range");
    if (!(j_r > j_l) || j_l < t_last || j_r > grid.N)
        throw argument_error("predict: window must satisfy t_last <= j_l < j_r <= N");
}

// Intensities on (t_last, j_r] along the no-event continuation: the history
// is frozen at t_last and later steps are treated as event-free.
inline std::vector<double> continuation_intensities(const ModelParams& params,
                                                    const Trajectory& traj, int t_last, int j_r,
                                                    int node) {
    const Trajectory frozen = traj.zeroed_after(t_last);
    std::vector<double> lam;
    lam.reserve(static_cast<std::size_t>(j_r - t_last));
    for (int j = t_last + 1; j <= j_r; ++j)
        lam.push_back(params.mu[node] + excitation(params, frozen, j, node));
    return lam;
}
} // namespace detail

// Probability that the next event falls in (j_l h, j_r h], conditioned on the
// history up to the last event index t_last:
//   exp(-h sum_{j'=t_last+1}^{j_l} Lambda_j') (1 - exp(-h sum_{j'=j_l+1}^{j_r} Lambda_j')).
inline double predict_interval_time_only(const ModelParams& params, const Trajectory& traj,
                                         int t_last, int j_l, int j_r) {
    detail::check_compatible(params, traj);
    if (traj.num_nodes() != 1)
        throw argument_error("predict_interval_time_only: expects a single-node model");
    detail::check_prediction_window(traj.grid(), t_last, j_l, j_r);
    const std::vector<double> lam =
        detail::continuation_intensities(params, traj, t_last, j_r, 0);
    double survive = 0.0, inside = 0.0;
    for (int j = t_last + 1; j <= j_r; ++j) {
        const double v = lam[static_cast<std::size_t>(j - t_last - 1)];
        if (!(v > 0.0))
            throw infeasible_error("predict: nonpositive intensity on the continuation", j, 0);
        (j <= j_l ? survive : inside) += v;
    }
    const double h = traj.grid().h;
    return std::exp(-h * survive) * link_phi(h * inside);
}

// Probability of no event until j_l h.
inline double predict_no_event_time_only(const ModelParams& params, const Trajectory& traj,
                                         int t_last, int j_l) {
    detail::check_compatible(params, traj);
    if (traj.num_nodes() != 1)
        throw argument_error("predict_no_event_time_only: expects a single-node model");
    if (t_last < 0 || j_l < t_last || j_l > traj.grid().N)
        throw argument_error("predict: window must satisfy t_last <= j_l <= N");
    const std::vector<double> lam =
        detail::continuation_intensities(params, traj, t_last, j_l, 0);
    double survive = 0.0;
    for (int j = t_last + 1; j <= j_l; ++j) {
        const double v = lam[static_cast<std::size_t>(j - t_last - 1)];
        if (!(v > 0.0))
            throw infeasible_error("predict: nonpositive intensity on the continuation", j, 0);
        survive += v;
    }
    return std::exp(-traj.grid().h * survive);
}

// Network marginal of the next event landing in (j_l h, j_r h] at node u:
//   sum_{j=j_l+1}^{j_r} Lambda_j(u)/bar_j (1 - e^{-h bar_j}) e^{-h sum_{j'=t_last+1}^{j-1} bar_j'}.
inline double predict_interval_network(const ModelParams& params, const Trajectory& traj,
                                       int t_last, int j_l, int j_r, int u) {
    detail::check_compatible(params, traj);
    if (u < 0 || u >= traj.num_nodes())
        throw argument_error("predict_interval_network: node index out of range");
    detail::check_prediction_window(traj.grid(), t_last, j_l, j_r);

    const Trajectory frozen = traj.zeroed_after(t_last);
    const double h = traj.grid().h;
    const int V = traj.num_nodes();
    double cum = 0.0; // h * sum of bar intensities since t_last
    double prob = 0.0;
    for (int j = t_last + 1; j <= j_r; ++j) {
        double bar = 0.0, lam_u = 0.0;
        for (int v = 0; v < V; ++v) {
            const double lam = params.mu[v] + excitation(params, frozen, j, v);
            if (!(lam > 0.0))
                throw infeasible_error("predict: nonpositive intensity on the continuation", j, v);
            bar += lam;
            if (v == u) lam_u = lam;
        }
        if (j > j_l) prob += lam_u / bar * link_phi(h * bar) * std::exp(-cum);
        cum += h * bar;
    }
    return prob;
}

inline double predict_no_event_network(const ModelParams& params, const Trajectory& traj,
                                       int t_last, int j_l) {
    detail::check_compatible(params, traj);
    if (t_last < 0 || j_l < t_last || j_l > traj.grid().N)
        throw argument_error("predict: window must satisfy t_last <= j_l <= N");
    const Trajectory frozen = traj.zeroed_after(t_last);
    const double h = traj.grid().h;
    const int V = traj.num_nodes();
    double cum = 0.0;
    for (int j = t_last + 1; j <= j_l; ++j) {
        double bar = 0.0;
        for (int v = 0; v < V; ++v) {
            const double lam = params.mu[v] + excitation(params, frozen, j, v);
            if (!(lam > 0.0))
                throw infeasible_error("predict: nonpositive intensity on the continuation", j, v);
            bar += lam;
        }
        cum += h * bar;
    }
    return std::exp(-cum);
}

// Conditional per-step event probabilities p_t(u) = Phi(h Lambda_t)_u from the
// observed history, flattened as (t-1)*V + u over t = 1..N. This is the
// quantity whose relative error against the truth is reported.
inline std::vector<double> step_probabilities(const ModelParams& params, const Trajectory& traj) {
    const IntensityRecord rec = compute_intensities(params, traj);
    const double h = traj.grid().h;
    std::vector<double> probs(rec.lambda.size());
    for (int t = 1; t <= rec.N; ++t) {
        const double bar = rec.bar(t);
        for (int u = 0; u < rec.V; ++u) {
            const double lam = rec.at(t, u);
            if (!(lam > 0.0))
                throw infeasible_error("step_probabilities: nonpositive intensity", t, u);
            probs[static_cast<std::size_t>(t - 1) * rec.V + u] =
                link_phi(h * bar) * (lam / bar);
        }
    }
    return probs;
}

} // namespace tulik
