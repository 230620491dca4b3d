#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tulik/errors.hpp"
#include "tulik/grid.hpp"

namespace tulik {

// Binary event record on the extended grid, optionally node-valued. At most
// one event per step (the per-step node index makes that structural). Steps
// with index <= 0 hold pre-horizon history: they feed intensity evaluation
// but are never scored by the likelihood. Immutable after construction.
class Trajectory {
public:
    static constexpr std::int16_t kNoEvent = -1;

    Trajectory(TimeGrid grid, int num_nodes)
        : grid_(grid), V_(num_nodes),
          event_node_(static_cast<std::size_t>(grid.extended_steps()), kNoEvent) {
        if (V_ < 1) throw argument_error("Trajectory: node count must be >= 1");
    }

    // steps[k] is the event node at extended step k (offset order), kNoEvent if none.
    Trajectory(TimeGrid grid, int num_nodes, std::vector<std::int16_t> steps)
        : grid_(grid), V_(num_nodes), event_node_(std::move(steps)) {
        if (V_ < 1) throw argument_error("Trajectory: node count must be >= 1");
        if (event_node_.size() != static_cast<std::size_t>(grid_.extended_steps()))
            throw argument_error("Trajectory: step vector length does not match grid");
        for (std::int16_t u : event_node_)
            if (u != kNoEvent && (u < 0 || u >= V_))
                throw argument_error("Trajectory: event node out of range");
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    int num_nodes() const noexcept { return V_; }

    bool has_event(int t) const { return event_node_[grid_.offset(t)] != kNoEvent; }

    // Node of the event at step t, kNoEvent if the step is empty.
    std::int16_t event_node(int t) const { return event_node_[grid_.offset(t)]; }

    bool y(int t, int u) const {
        if (u < 0 || u >= V_) throw argument_error("Trajectory: node index out of range");
        return event_node_[grid_.offset(t)] == u;
    }

    // Event count over observed steps 1..N.
    long event_count() const noexcept {
        long n = 0;
        for (int t = 1; t <= grid_.N; ++t)
            if (event_node_[static_cast<std::size_t>(t + grid_.Nprime - 1)] != kNoEvent) ++n;
        return n;
    }

    long event_count(int node) const noexcept {
        long n = 0;
        for (int t = 1; t <= grid_.N; ++t)
            if (event_node_[static_cast<std::size_t>(t + grid_.Nprime - 1)] == node) ++n;
        return n;
    }

    const std::vector<std::int16_t>& raw_steps() const noexcept { return event_node_; }

    // Copy with every step after t_last cleared; used by interval prediction,
    // where the conditioning treats the future as event-free.
    Trajectory zeroed_after(int t_last) const {
        std::vector<std::int16_t> steps = event_node_;
        for (int t = t_last + 1; t <= grid_.N; ++t)
            steps[static_cast<std::size_t>(t + grid_.Nprime - 1)] = kNoEvent;
        return Trajectory(grid_, V_, std::move(steps));
    }

private:
    TimeGrid grid_;
    int V_;
    std::vector<std::int16_t> event_node_;
};

} // namespace tulik
