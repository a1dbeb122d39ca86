#pragma once

#include "hamlearn/kernels.hpp"

#include <Eigen/Dense>

#include <span>

namespace hamlearn {

/// H⋆(x) = Ψ(φ, x)ᵀ α, an expansion over the derivative functionals ∂_p, ∂_q
/// taken at the anchor states. α solves (Ψ(φ,φ) + Λ) α = z where
/// Λ = diag(λ_p·I, λ_q·I) in layout order.
class LearnedHamiltonian {
public:
    LearnedHamiltonian(KernelSpec kernel, PointSet anchors, Eigen::VectorXd coefficients, Eigen::VectorXd targets, double ridge_p,
                       double ridge_q, double jitter);

    [[nodiscard]] const KernelSpec &kernel() const { return kernel_; }
    [[nodiscard]] const PointSet &anchors() const { return anchors_; }
    [[nodiscard]] const FunctionalLayout &layout() const { return layout_; }
    [[nodiscard]] const Eigen::VectorXd &coefficients() const { return coefficients_; }
    [[nodiscard]] const Eigen::VectorXd &targets() const { return targets_; }
    [[nodiscard]] double ridge_p() const { return ridge_p_; }
    [[nodiscard]] double ridge_q() const { return ridge_q_; }
    [[nodiscard]] double jitter() const { return jitter_; }
    [[nodiscard]] Eigen::Index dof() const { return layout_.dof; }
    [[nodiscard]] Eigen::Index dimension() const { return 2 * layout_.dof; }

    [[nodiscard]] double eval(std::span<const double> x) const;
    /// ∇H⋆(x) written into `out` (length 2m, q components first).
    void gradient(std::span<const double> x, std::span<double> out) const;

    /// max |(Ψ(φ,φ) + Λ)α - z|, re-assembled from scratch.
    [[nodiscard]] double solve_residual() const;

private:
    KernelSpec kernel_;
    PointSet anchors_;
    FunctionalLayout layout_;
    Eigen::VectorXd coefficients_;
    Eigen::VectorXd targets_;
    double ridge_p_;
    double ridge_q_;
    double jitter_;
};

/// Kernel ridge regression of H against derivative targets z at `anchors`
/// (z in FunctionalLayout order: ∂_pH targets first, then ∂_qH targets).
[[nodiscard]] LearnedHamiltonian fit_hamiltonian(const KernelSpec &kernel, const PointSet &anchors, const Eigen::VectorXd &targets,
                                                 double ridge_p, double ridge_q);

[[nodiscard]] double eval_H(const LearnedHamiltonian &model, const Eigen::VectorXd &x);
[[nodiscard]] Eigen::VectorXd grad_H(const LearnedHamiltonian &model, const Eigen::VectorXd &x);

}  // namespace hamlearn
