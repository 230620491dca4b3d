#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "tulik/errors.hpp"
#include "tulik/kernel.hpp"

namespace tulik {

// Baseline intensity (per node, 1/time) bundled with the influence kernel.
struct ModelParams {
    std::vector<double> mu;
    KernelParams kernel;

    ModelParams() : mu{1.0}, kernel() {}

    ModelParams(std::vector<double> mu_, KernelParams kernel_)
        : mu(std::move(mu_)), kernel(std::move(kernel_)) {
        if (mu.size() != static_cast<std::size_t>(kernel.num_nodes()))
            throw argument_error("ModelParams: baseline length does not match kernel node count");
        for (double m : mu)
            if (!(m > 0.0) || !std::isfinite(m))
                throw argument_error("ModelParams: baseline intensities must be positive and finite");
    }

    int num_nodes() const noexcept { return kernel.num_nodes(); }
};

} // namespace tulik
