#pragma once

#include "hamlearn/kernels.hpp"
#include "hamlearn/linalg.hpp"

#include <Eigen/Dense>

#include <span>

namespace hamlearn {

/// Times closer than this are treated as the same anchor.
inline constexpr double kAnchorSeparation = 1e-9;

/// A kernel expansion in time over two kinds of functionals: point values at
/// `value_anchors` and first derivatives at `derivative_anchors`. Coefficient
/// rows follow the same order (values first), one column per component.
class Interpolant {
public:
    Interpolant(KernelSpec kernel, Eigen::VectorXd value_anchors, Eigen::VectorXd derivative_anchors, Eigen::MatrixXd coefficients,
                double ridge_effective);

    [[nodiscard]] const KernelSpec &kernel() const { return kernel_; }
    [[nodiscard]] const Eigen::VectorXd &value_anchors() const { return value_anchors_; }
    [[nodiscard]] const Eigen::VectorXd &derivative_anchors() const { return derivative_anchors_; }
    [[nodiscard]] const Eigen::MatrixXd &coefficients() const { return coefficients_; }
    [[nodiscard]] Eigen::Index components() const { return coefficients_.cols(); }
    [[nodiscard]] double ridge_effective() const { return ridge_effective_; }

    /// |times| × m values.
    [[nodiscard]] Eigen::MatrixXd eval(std::span<const double> times) const;
    /// |times| × m time derivatives (analytic).
    [[nodiscard]] Eigen::MatrixXd eval_derivative(std::span<const double> times) const;

    [[nodiscard]] Eigen::MatrixXd eval(const Eigen::VectorXd &times) const { return eval(as_span(times)); }
    [[nodiscard]] Eigen::MatrixXd eval_derivative(const Eigen::VectorXd &times) const { return eval_derivative(as_span(times)); }

private:
    KernelSpec kernel_;
    Eigen::VectorXd value_anchors_;
    Eigen::VectorXd derivative_anchors_;
    Eigen::MatrixXd coefficients_;
    double ridge_effective_;
};

/// Gram matrix of the stacked functionals (δ_S, δ_T∘d/dt):
///   [K(S,S)    ∂₂K(S,T)]
///   [∂₁K(T,S)  ∂₁∂₂K(T,T)]
[[nodiscard]] Eigen::MatrixXd extended_gram(const KernelSpec &kernel, const Eigen::VectorXd &value_times,
                                            const Eigen::VectorXd &derivative_times);

/// Rows τ: [K(τ,S), ∂₂K(τ,T)], i.e. the basis functions of the expansion at τ.
[[nodiscard]] Eigen::MatrixXd extended_cross(const KernelSpec &kernel, std::span<const double> times, const Eigen::VectorXd &value_times,
                                             const Eigen::VectorXd &derivative_times);

/// d/dτ of extended_cross.
[[nodiscard]] Eigen::MatrixXd extended_cross_derivative(const KernelSpec &kernel, std::span<const double> times,
                                                        const Eigen::VectorXd &value_times, const Eigen::VectorXd &derivative_times);

/// Ridge-regularized minimum-norm fit to point values.
[[nodiscard]] Interpolant fit_values(const KernelSpec &kernel, const Eigen::VectorXd &times, const Eigen::MatrixXd &values, double ridge);

/// Ridge-regularized fit to point values at `times` and first derivatives at
/// `derivative_times`. Either set may be empty, not both.
[[nodiscard]] Interpolant fit_values_and_derivatives(const KernelSpec &kernel, const Eigen::VectorXd &times, const Eigen::MatrixXd &values,
                                                     const Eigen::VectorXd &derivative_times, const Eigen::MatrixXd &derivative_values,
                                                     double ridge);

}  // namespace hamlearn
