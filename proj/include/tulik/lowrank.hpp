#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "tulik/errors.hpp"
#include "tulik/kernel.hpp"

namespace tulik {

// Middle chunk of Psi: the rows fully inside the parallelogram, i = 0..N-N',
// stacked over node pairs into an (N-N'+1) V^2 x N' matrix.
inline Eigen::MatrixXd middle_chunk(const KernelParams& kernel) {
    const KernelLayout& kl = kernel.layout();
    if (kl.variant != KernelVariant::TimeVarying)
        throw argument_error("middle_chunk: requires the time-varying kernel variant");
    if (kl.N < kl.Nprime)
        throw argument_error("middle_chunk: no full rows when Nprime exceeds N");
    const int rows_per_pair = kl.N - kl.Nprime + 1;
    Eigen::MatrixXd chunk(static_cast<Eigen::Index>(rows_per_pair) * kl.V * kl.V, kl.Nprime);
    Eigen::Index r = 0;
    for (int up = 0; up < kl.V; ++up)
        for (int u = 0; u < kl.V; ++u)
            for (int i = 0; i <= kl.N - kl.Nprime; ++i, ++r)
                for (int l = 1; l <= kl.Nprime; ++l)
                    chunk(r, l - 1) = kernel.values()[kl.unchecked_index(i, l, up, u)];
    return chunk;
}

// Truncated-SVD projection: keeps the right singular vectors of the middle
// chunk whose singular value exceeds tau, projects every row of the full Psi
// (per node pair) onto their span, and re-imposes the structural zeros.
// Returns the retained rank; a threshold above the top singular value zeroes
// the kernel and returns 0.
inline int low_rank_truncate(KernelParams& kernel, double tau) {
    if (!(tau > 0.0)) throw argument_error("low_rank_truncate: threshold must be positive");
    const KernelLayout& kl = kernel.layout();
    const Eigen::MatrixXd chunk = middle_chunk(kernel);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(chunk, Eigen::ComputeThinV);
    const auto& sigma = svd.singularValues();
    int rank = 0;
    while (rank < sigma.size() && sigma(rank) > tau) ++rank;

    if (rank == 0) {
        std::fill(kernel.values().begin(), kernel.values().end(), 0.0);
        return 0;
    }

    const Eigen::MatrixXd vr = svd.matrixV().leftCols(rank);
    const Eigen::MatrixXd projector = vr * vr.transpose();

    Eigen::RowVectorXd row(kl.Nprime);
    for (int up = 0; up < kl.V; ++up)
        for (int u = 0; u < kl.V; ++u)
            for (int i = -kl.Nprime + 1; i <= kl.N; ++i) {
                for (int l = 1; l <= kl.Nprime; ++l)
                    row(l - 1) = kernel.values()[kl.unchecked_index(i, l, up, u)];
                const Eigen::RowVectorXd projected = row * projector;
                for (int l = 1; l <= kl.Nprime; ++l)
                    kernel.values()[kl.unchecked_index(i, l, up, u)] = projected(l - 1);
            }
    kernel.clear_structural_zeros();
    return rank;
}

} // namespace tulik
