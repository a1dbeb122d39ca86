#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace hamlearn {

/// One sparsely observed trajectory on a collocation grid, plus the ground
/// truth on the extrapolation window.
struct Dataset {
    Eigen::Index dof = 0;             // m
    Eigen::VectorXd t_col;            // N collocation times, ascending
    Eigen::MatrixXd y_col;            // N × 2m true states, q columns first
    std::vector<Eigen::Index> observed;  // ascending indices into t_col
    double sparsity = 0.0;
    std::uint64_t seed = 0;
    Eigen::VectorXd t_ext;            // extrapolation times
    Eigen::MatrixXd y_ext;            // true states at t_ext

    [[nodiscard]] Eigen::Index num_collocation() const { return t_col.size(); }
    [[nodiscard]] Eigen::Index num_observed() const { return static_cast<Eigen::Index>(observed.size()); }

    [[nodiscard]] Eigen::VectorXd observed_times() const;
    [[nodiscard]] Eigen::MatrixXd observed_q() const;  // N_obs × m
    [[nodiscard]] Eigen::MatrixXd observed_p() const;  // N_obs × m
    /// Collocation indices that are not observed (the interpolation test set).
    [[nodiscard]] std::vector<Eigen::Index> unobserved() const;
};

/// Ridge parameters for both pipelines.
///  - trajectory_q / trajectory_p: ridges on the q and p time fits
///    (λ_q, λ_p in the 2-step fit; λ₁, λ₂ in the 1-step objective).
///  - hamiltonian_p / hamiltonian_q: the block ridge Λ of the 2-step H fit.
///  - hamiltonian: the H ridge λ of the 1-step objective.
struct Ridges {
    double trajectory_q = 1e-5;
    double trajectory_p = 1e-5;
    double hamiltonian_p = 1e-3;
    double hamiltonian_q = 1e-3;
    double hamiltonian = 1e-3;
};

}  // namespace hamlearn
