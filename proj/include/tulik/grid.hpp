#pragma once

#include <cmath>

#include "tulik/errors.hpp"

namespace tulik {

// Uniform time grid. The horizon (0, T] with T = N*h is split into intervals
// I_j = ((j-1)h, jh], j = 1..N. The grid is extended backwards by Nprime
// history intervals, so valid step indices run over -Nprime+1 .. N. The
// influence memory is capped at tau_max = Nprime*h.
struct TimeGrid {
    double h = 1.0;
    int N = 1;
    int Nprime = 1;

    TimeGrid() = default;
    TimeGrid(double h_, int N_, int Nprime_) : h(h_), N(N_), Nprime(Nprime_) {
        if (!(h > 0.0) || !std::isfinite(h))
            throw argument_error("TimeGrid: interval length h must be positive and finite");
        if (N < 1) throw argument_error("TimeGrid: N must be >= 1");
        if (Nprime < 1) throw argument_error("TimeGrid: Nprime must be >= 1");
    }

    double horizon() const noexcept { return N * h; }
    double tau_max() const noexcept { return Nprime * h; }

    // Number of steps on the extended grid -Nprime+1 .. N.
    int extended_steps() const noexcept { return N + Nprime; }

    int first_index() const noexcept { return -Nprime + 1; }
    int last_index() const noexcept { return N; }

    bool valid_extended_index(int t) const noexcept {
        return t >= first_index() && t <= last_index();
    }
    bool valid_observed_index(int t) const noexcept { return t >= 1 && t <= N; }

    // Array offset of extended step index t.
    int offset(int t) const {
        if (!valid_extended_index(t))
            throw argument_error("TimeGrid: step index out of extended range");
        return t + Nprime - 1;
    }

    // Left edge of interval I_j in absolute time.
    double interval_left(int j) const noexcept { return (j - 1) * h; }

    bool operator==(const TimeGrid& o) const noexcept {
        return h == o.h && N == o.N && Nprime == o.Nprime;
    }
};

} // namespace tulik
