#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "tulik/errors.hpp"
#include "tulik/grid.hpp"

namespace tulik {

enum class KernelVariant { TimeVarying, TimeInvariant };

// Index arithmetic for the lag-major kernel layout Psi[i][l][u'][u].
//
// TimeVarying: rows i = -Nprime+1 .. N (N+Nprime of them), lags l = 1..Nprime,
// V*V node pairs per cell. The trainable entries K_{i,t}(u',u) = Psi_{i,l}(u',u)
// with t = i+l form the parallelogram 1 <= i+l <= N; cells outside it are
// structurally zero and never trained. Exactly N*Nprime cells per node pair
// are stored either way.
//
// TimeInvariant: a single lag vector psi_l(u',u), l = 1..Nprime, per node pair;
// K_{i,t}(u',u) = psi_{t-i}(u',u).
struct KernelLayout {
    int N = 1;
    int Nprime = 1;
    int V = 1;
    KernelVariant variant = KernelVariant::TimeVarying;

    int rows() const noexcept { return N + Nprime; }

    std::size_t size() const noexcept {
        const std::size_t pairs = static_cast<std::size_t>(V) * V;
        if (variant == KernelVariant::TimeVarying)
            return static_cast<std::size_t>(rows()) * Nprime * pairs;
        return static_cast<std::size_t>(Nprime) * pairs;
    }

    bool in_parallelogram(int i, int l) const noexcept {
        return l >= 1 && l <= Nprime && i > -Nprime && i <= N && i + l >= 1 && i + l <= N;
    }

    // Flat index for a time-varying cell (row i, lag l, node pair).
    std::size_t index(int i, int l, int uprime, int u) const {
        if (variant != KernelVariant::TimeVarying)
            throw argument_error("KernelLayout: row/lag index on a time-invariant kernel");
        if (i <= -Nprime || i > N || l < 1 || l > Nprime)
            throw argument_error("KernelLayout: row or lag out of range");
        check_pair(uprime, u);
        const std::size_t row = static_cast<std::size_t>(i + Nprime - 1);
        return ((row * Nprime + (l - 1)) * V + uprime) * V + u;
    }

    std::size_t psi_index(int l, int uprime, int u) const {
        if (variant != KernelVariant::TimeInvariant)
            throw argument_error("KernelLayout: lag-vector index on a time-varying kernel");
        if (l < 1 || l > Nprime) throw argument_error("KernelLayout: lag out of range");
        check_pair(uprime, u);
        return (static_cast<std::size_t>(l - 1) * V + uprime) * V + u;
    }

    // Unchecked flat indices for inner loops that already guarantee validity.
    std::size_t unchecked_index(int i, int l, int uprime, int u) const noexcept {
        const std::size_t row = static_cast<std::size_t>(i + Nprime - 1);
        return ((row * Nprime + (l - 1)) * V + uprime) * V + u;
    }
    std::size_t unchecked_psi_index(int l, int uprime, int u) const noexcept {
        return (static_cast<std::size_t>(l - 1) * V + uprime) * V + u;
    }
    // Coordinate of K_{i,i+l}(u',u) in gradient arrays shaped like this layout.
    std::size_t grad_index(int i, int l, int uprime, int u) const noexcept {
        return variant == KernelVariant::TimeVarying ? unchecked_index(i, l, uprime, u)
                                                     : unchecked_psi_index(l, uprime, u);
    }

    bool operator==(const KernelLayout& o) const noexcept {
        return N == o.N && Nprime == o.Nprime && V == o.V && variant == o.variant;
    }

private:
    void check_pair(int uprime, int u) const {
        if (uprime < 0 || uprime >= V || u < 0 || u >= V)
            throw argument_error("KernelLayout: node index out of range");
    }
};

// Trainable influence kernel. Values live in a dense flat array in the layout
// above; the K-indexed and Psi-indexed views are two addressings of the same
// storage, so reshaping either way is the identity on stored entries.
class KernelParams {
public:
    KernelParams() : KernelParams(KernelVariant::TimeVarying, TimeGrid{}, 1) {}

    KernelParams(KernelVariant variant, const TimeGrid& grid, int num_nodes)
        : layout_{grid.N, grid.Nprime, num_nodes, variant},
          values_(layout_.size(), 0.0) {
        if (num_nodes < 1) throw argument_error("KernelParams: node count must be >= 1");
    }

    KernelVariant variant() const noexcept { return layout_.variant; }
    const KernelLayout& layout() const noexcept { return layout_; }
    int num_nodes() const noexcept { return layout_.V; }

    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    // K_{i,t}(u',u) under either variant. Zero outside the lag window
    // 0 < t-i <= Nprime and, for the time-varying kernel, outside the stored
    // parallelogram (in particular for targets t <= 0).
    double k(int i, int t, int uprime = 0, int u = 0) const {
        const int l = t - i;
        if (l < 1 || l > layout_.Nprime) return 0.0;
        if (layout_.variant == KernelVariant::TimeInvariant)
            return values_[layout_.psi_index(l, uprime, u)];
        if (!layout_.in_parallelogram(i, l)) return 0.0;
        return values_[layout_.index(i, l, uprime, u)];
    }

    // Psi_{i,l}(u',u) = K_{i,i+l}(u',u) view of the time-varying kernel.
    double psi_view(int i, int l, int uprime = 0, int u = 0) const {
        return values_[layout_.index(i, l, uprime, u)];
    }

    void set_k(int i, int t, double v) { set_k(i, t, 0, 0, v); }
    void set_k(int i, int t, int uprime, int u, double v) {
        const int l = t - i;
        if (layout_.variant == KernelVariant::TimeInvariant) {
            values_[layout_.psi_index(l, uprime, u)] = v;
            return;
        }
        if (!layout_.in_parallelogram(i, l))
            throw argument_error("KernelParams: cannot set a structurally absent entry");
        values_[layout_.index(i, l, uprime, u)] = v;
    }

    void set_psi_view(int i, int l, int uprime, int u, double v) {
        if (!layout_.in_parallelogram(i, l))
            throw argument_error("KernelParams: cannot set a structurally absent entry");
        values_[layout_.index(i, l, uprime, u)] = v;
    }

    double psi(int l, int uprime = 0, int u = 0) const {
        return values_[layout_.psi_index(l, uprime, u)];
    }
    void set_psi(int l, double v) { set_psi(l, 0, 0, v); }
    void set_psi(int l, int uprime, int u, double v) {
        values_[layout_.psi_index(l, uprime, u)] = v;
    }

    // Time-varying kernel with K_{i,t} = psi_{t-i} copied along diagonals of
    // the parallelogram.
    static KernelParams lift(const KernelParams& stationary, const TimeGrid& grid) {
        if (stationary.variant() != KernelVariant::TimeInvariant)
            throw argument_error("KernelParams::lift: expected a time-invariant kernel");
        if (stationary.layout().Nprime != grid.Nprime || stationary.layout().N != grid.N)
            throw argument_error("KernelParams::lift: grid mismatch");
        KernelParams out(KernelVariant::TimeVarying, grid, stationary.num_nodes());
        const int V = stationary.num_nodes();
        for (int i = -grid.Nprime + 1; i <= grid.N; ++i)
            for (int l = 1; l <= grid.Nprime; ++l) {
                if (!out.layout_.in_parallelogram(i, l)) continue;
                for (int up = 0; up < V; ++up)
                    for (int u = 0; u < V; ++u)
                        out.values_[out.layout_.index(i, l, up, u)] = stationary.psi(l, up, u);
            }
        return out;
    }

    // Force structurally absent cells of the dense array back to zero.
    void clear_structural_zeros() {
        if (layout_.variant != KernelVariant::TimeVarying) return;
        for (int i = -layout_.Nprime + 1; i <= layout_.N; ++i)
            for (int l = 1; l <= layout_.Nprime; ++l) {
                if (layout_.in_parallelogram(i, l)) continue;
                for (int up = 0; up < layout_.V; ++up)
                    for (int u = 0; u < layout_.V; ++u)
                        values_[layout_.index(i, l, up, u)] = 0.0;
            }
    }

    bool operator==(const KernelParams& o) const noexcept {
        return layout_ == o.layout_ && values_ == o.values_;
    }

private:
    KernelLayout layout_;
    std::vector<double> values_;
};

} // namespace tulik
