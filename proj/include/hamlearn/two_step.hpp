#pragma once

#include "hamlearn/dataset.hpp"
#include "hamlearn/hamiltonian.hpp"
#include "hamlearn/kernels.hpp"
#include "hamlearn/representer.hpp"

namespace hamlearn {

/// Reconstructed trajectory components and the Hamiltonian fitted to them.
struct TrajectoryModel {
    Interpolant q;
    Interpolant p;
    LearnedHamiltonian hamiltonian;

    /// (q⋆(t), p⋆(t)) stacked per row.
    [[nodiscard]] Eigen::MatrixXd states(const Eigen::VectorXd &times) const;
};

/// Derivative targets z = (q̇⋆(T); -ṗ⋆(T)) in FunctionalLayout order.
[[nodiscard]] Eigen::VectorXd stack_derivative_targets(const Eigen::MatrixXd &qdot, const Eigen::MatrixXd &pdot);

/// Interpolate q and p from the observations, then regress H on the
/// interpolants' analytic time derivatives at every collocation time.
[[nodiscard]] TrajectoryModel fit_two_step(const Dataset &data, const KernelSpec &time_kernel, const KernelSpec &state_kernel,
                                           const Ridges &ridges);

}  // namespace hamlearn
