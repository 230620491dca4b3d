#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace tulik;

namespace {

// Composite midpoint cell average at a given refinement level.
double midpoint_average(const ContinuousKernel& kfun, const TimeGrid& grid, int i, int t, int q) {
    const double left_i = grid.interval_left(i);
    const double left_t = grid.interval_left(t);
    const double step = grid.h / q;
    double acc = 0.0;
    for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b)
            acc += kfun(left_i + (a + 0.5) * step, left_t + (b + 0.5) * step, 0, 0);
    return acc / (static_cast<double>(q) * q);
}

// Richardson-extrapolated oracle: midpoint error is O(h^2), so combining the
// 32x32 and 64x64 levels cancels the leading term.
double refined_average(const ContinuousKernel& kfun, const TimeGrid& grid, int i, int t) {
    const double coarse = midpoint_average(kfun, grid, i, t, 32);
    const double fine = midpoint_average(kfun, grid, i, t, 64);
    return (4.0 * fine - coarse) / 3.0;
}

} // namespace

TEST_CASE("constant kernels discretize to the constant") {
    const TimeGrid grid(0.5, 6, 3);
    const ContinuousKernel kfun = [](double, double, int, int) { return 0.75; };
    const KernelParams kernel = discretize_kernel(kfun, grid, 1);
    for (int i = -grid.Nprime + 1; i <= grid.N; ++i)
        for (int l = 1; l <= grid.Nprime; ++l) {
            if (!kernel.layout().in_parallelogram(i, l)) continue;
            CHECK(kernel.psi_view(i, l) == Catch::Approx(0.75).margin(4e-16));
        }
}

TEST_CASE("bilinear kernels are integrated exactly by the midpoint rule") {
    const TimeGrid grid(0.5, 8, 4);
    const ContinuousKernel kfun = [](double tp, double t, int, int) { return tp * t; };
    const KernelParams kernel = discretize_kernel(kfun, grid, 1);
    for (int i = -grid.Nprime + 1; i <= grid.N; ++i)
        for (int l = 1; l <= grid.Nprime; ++l) {
            if (!kernel.layout().in_parallelogram(i, l)) continue;
            const double mid_i = (i - 0.5) * grid.h;
            const double mid_t = (i + l - 0.5) * grid.h;
            CHECK(kernel.psi_view(i, l) == Catch::Approx(mid_i * mid_t).margin(1e-12));
        }
}

TEST_CASE("benchmark kernel discretization matches a refined quadrature oracle") {
    const TimeGrid grid(0.5, 32, 8);
    const ContinuousKernel kfun = [](double tp, double t, int, int) {
        return paper_kernel_time_only(tp, t);
    };
    const KernelParams kernel = discretize_kernel(kfun, grid, 1);
    for (int i = -grid.Nprime + 1; i <= grid.N; ++i)
        for (int l = 1; l <= grid.Nprime; ++l) {
            if (!kernel.layout().in_parallelogram(i, l)) continue;
            const double oracle = refined_average(kfun, grid, i, i + l);
            CHECK(kernel.psi_view(i, l) == Catch::Approx(oracle).margin(1e-6));
        }
}

TEST_CASE("non-finite kernel evaluations are reported with the offending cell") {
    const TimeGrid grid(0.5, 4, 2);
    const ContinuousKernel kfun = [](double tp, double, int, int) {
        return tp > 0.6 ? std::numeric_limits<double>::infinity() : 0.0;
    };
    CHECK_THROWS_AS(discretize_kernel(kfun, grid, 1), numeric_error);
    try {
        discretize_kernel(kfun, grid, 1);
    } catch (const numeric_error& e) {
        CHECK(std::string(e.what()).find("i=") != std::string::npos);
    }
}

TEST_CASE("stationary discretization averages the lag profile") {
    const TimeGrid grid(0.5, 32, 16);
    const KernelParams psi = discretize_stationary(stationary_profile, grid, 1);
    const ContinuousKernel kfun = [](double tp, double t, int, int) {
        return stationary_profile(t - tp);
    };
    // lag averages agree with the time-varying discretization along diagonals
    const KernelParams full = discretize_kernel(kfun, grid, 1);
    for (int l = 1; l <= grid.Nprime; ++l)
        CHECK(psi.psi(l) == Catch::Approx(full.k(4, 4 + l)).margin(1e-12));
}
