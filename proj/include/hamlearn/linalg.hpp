#pragma once

#include "hamlearn/kernels.hpp"

#include <Eigen/Dense>

namespace hamlearn {

/// Cholesky factor of (A + Λ + jitter·I) for a symmetric A and a diagonal
/// ridge Λ. If the plain factorization fails, jitter climbs the ladder
/// 1e-10·tr(A)/n, 1e-9·tr(A)/n, ..., 1e-6·tr(A)/n before giving up with
/// SingularSystemError. A is symmetrized as (A + Aᵀ)/2 first.
class RidgeFactorization {
public:
    RidgeFactorization(const Eigen::MatrixXd &a, double ridge);
    RidgeFactorization(const Eigen::MatrixXd &a, const Eigen::VectorXd &ridge_diagonal);

    [[nodiscard]] Eigen::MatrixXd solve(const Eigen::MatrixXd &b) const;
    [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd &b) const;

    /// ξᵀ (A + Λ_eff)⁻¹ ξ, computed as |L⁻¹ξ|² so it is never negative.
    [[nodiscard]] double quadratic_form(const Eigen::VectorXd &xi) const;

    [[nodiscard]] Eigen::Index size() const { return size_; }
    /// Scalar added on top of the requested ridge (0 unless the ladder was used).
    [[nodiscard]] double jitter() const { return jitter_; }
    [[nodiscard]] const Eigen::LLT<Eigen::MatrixXd> &llt() const { return llt_; }

private:
    void factorize(Eigen::MatrixXd a, const Eigen::VectorXd &ridge_diagonal);

    Eigen::Index size_ = 0;
    double jitter_ = 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

struct RidgeSolution {
    Eigen::MatrixXd x;
    double ridge_effective;
};

/// X with (A + λ_eff I) X = B.
[[nodiscard]] RidgeSolution solve_ridge(const Eigen::MatrixXd &a, double ridge, const Eigen::MatrixXd &b);

/// ξᵀ (A + λ_eff I)⁻¹ ξ.
[[nodiscard]] double quadratic_form(const Eigen::MatrixXd &a, double ridge, const Eigen::VectorXd &xi);

struct NormIdentity {
    double lhs;
    double rhs;
};

/// Both sides of the penalized representer identity
///   αᵀKα + (1/λ)|Kα - ξ|² = ξᵀ(K + λI)⁻¹ξ,  α = (K + λI)⁻¹ξ,
/// with K the Gram matrix of `anchors`. At λ = 0 the residual term is dropped.
[[nodiscard]] NormIdentity norm_identity_check(const KernelSpec &spec, const PointSet &anchors, double ridge, const Eigen::VectorXd &xi);

}  // namespace hamlearn
