#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>

#include "tulik/errors.hpp"
#include "tulik/kernel.hpp"

namespace tulik {

// k(t', t; u', u) in absolute time, t > t'.
using ContinuousKernel = std::function<double(double, double, int, int)>;

inline constexpr int kQuadratureNodes = 16; // Gauss-Legendre, per cell axis

namespace detail {

// 16-point Gauss-Legendre abscissae/weights on [-1, 1] (positive half).
inline constexpr std::array<double, 8> kGlNodes = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
inline constexpr std::array<double, 8> kGlWeights = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

struct GlAxis {
    std::array<double, 16> node;
    std::array<double, 16> weight; // sums to the interval length
};

inline GlAxis gl_axis(double left, double right) {
    GlAxis axis;
    const double mid = 0.5 * (left + right);
    const double half = 0.5 * (right - left);
    for (int k = 0; k < 8; ++k) {
        axis.node[k] = mid - half * kGlNodes[k];
        axis.node[15 - k] = mid + half * kGlNodes[k];
        axis.weight[k] = axis.weight[15 - k] = half * kGlWeights[k];
    }
    return axis;
}

} // namespace detail

// Cell average of a continuous kernel over I_i x I_t by tensor-product
// Gauss-Legendre quadrature with 16 nodes per axis: exact for bilinear
// kernels and far inside 1e-6 of a refined oracle for the benchmark kernels.
inline double cell_average(const ContinuousKernel& kfun, const TimeGrid& grid, int i, int t,
                           int uprime, int u) {
    const detail::GlAxis ax = detail::gl_axis(grid.interval_left(i), grid.interval_left(i) + grid.h);
    const detail::GlAxis ay = detail::gl_axis(grid.interval_left(t), grid.interval_left(t) + grid.h);
    double acc = 0.0;
    for (int a = 0; a < kQuadratureNodes; ++a)
        for (int b = 0; b < kQuadratureNodes; ++b) {
            const double v = kfun(ax.node[a], ay.node[b], uprime, u);
            if (!std::isfinite(v))
                throw numeric_error("discretize_kernel: non-finite kernel value on cell (i=" +
                                    std::to_string(i) + ", t=" + std::to_string(t) + ", u'=" +
                                    std::to_string(uprime) + ", u=" + std::to_string(u) + ")");
            acc += ax.weight[a] * ay.weight[b] * v;
        }
    return acc / (grid.h * grid.h);
}

// Quantizes a continuous kernel into the trainable matrix entries
// K_{i,t}(u',u) = (1/h^2) integral over I_i x I_t of k, with lag support
// clipped to Nprime. Fills the stored parallelogram only.
inline KernelParams discretize_kernel(const ContinuousKernel& kfun, const TimeGrid& grid,
                                      int num_nodes) {
    KernelParams out(KernelVariant::TimeVarying, grid, num_nodes);
    for (int i = -grid.Nprime + 1; i <= grid.N; ++i)
        for (int l = 1; l <= grid.Nprime; ++l) {
            if (!out.layout().in_parallelogram(i, l)) continue;
            for (int up = 0; up < num_nodes; ++up)
                for (int u = 0; u < num_nodes; ++u)
                    out.set_psi_view(i, l, up, u, cell_average(kfun, grid, i, i + l, up, u));
        }
    return out;
}

// Lag averages psi_l = (1/h^2) integral over I_0 x I_l of psi_c(t - t') for a
// stationary kernel given by its lag profile.
inline KernelParams discretize_stationary(const std::function<double(double)>& psi_c,
                                          const TimeGrid& grid, int num_nodes = 1) {
    KernelParams out(KernelVariant::TimeInvariant, grid, num_nodes);
    const ContinuousKernel kfun = [&psi_c](double tp, double tt, int, int) {
        return psi_c(tt - tp);
    };
    for (int l = 1; l <= grid.Nprime; ++l) {
        const double v = cell_average(kfun, grid, 0, l, 0, 0);
        for (int up = 0; up < num_nodes; ++up)
            for (int u = 0; u < num_nodes; ++u) out.set_psi(l, up, u, v);
    }
    return out;
}

} // namespace tulik
