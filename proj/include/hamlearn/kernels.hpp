#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace hamlearn {

/// Points stored one per row, contiguous, so a row can be handed out as a span.
using PointSet = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class KernelFamily {
    gaussian_time,           // exp(-|t-t'|^2 / 2θ^2) on scalar times
    gaussian_state,          // exp(-|x-x'|^2 / 2θ^2) on the full (q, p) state
    separable_polynomial,    // (q·q' + c)^d + (p·p' + c)^d
    additive_poly_gaussian,  // exp(-|q-q'|^2 / 2θ^2) + (p·p' + c)^d
};

[[nodiscard]] std::string_view to_string(KernelFamily family);
[[nodiscard]] KernelFamily kernel_family_from_string(std::string_view name);

/// Declarative kernel description. Validated on construction.
class KernelSpec {
public:
    /// The polynomial offset defaults to the lengthscale, which is how the
    /// polynomial families are parameterized in the reference experiments.
    KernelSpec(KernelFamily family, double lengthscale, int degree = 3, std::optional<double> offset = std::nullopt);

    static KernelSpec gaussian_time(double lengthscale = 1.0) { return {KernelFamily::gaussian_time, lengthscale}; }
    static KernelSpec gaussian_state(double lengthscale = 1.0) { return {KernelFamily::gaussian_state, lengthscale}; }
    static KernelSpec separable_polynomial(double lengthscale = 1.0, int degree = 3) {
        return {KernelFamily::separable_polynomial, lengthscale, degree};
    }
    static KernelSpec additive_poly_gaussian(double lengthscale = 1.0, int degree = 3) {
        return {KernelFamily::additive_poly_gaussian, lengthscale, degree};
    }

    [[nodiscard]] KernelFamily family() const { return family_; }
    [[nodiscard]] double lengthscale() const { return lengthscale_; }
    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] double offset() const { return offset_; }
    [[nodiscard]] bool is_state_kernel() const { return family_ != KernelFamily::gaussian_time; }

    /// Throws ContractError unless `dim` is a valid input dimension for this family.
    void check_dimension(std::size_t dim) const;

private:
    KernelFamily family_;
    double lengthscale_;
    int degree_;
    double offset_;
};

// Pointwise evaluation. All derivative outputs are row-major and sized by the
// caller: grad has dim entries, cross_hessian dim*dim, third_derivative dim^3.

[[nodiscard]] double kernel_eval(const KernelSpec &spec, std::span<const double> x, std::span<const double> y);

/// out[a] = ∂K/∂x_a (x, y)
void kernel_grad_first(const KernelSpec &spec, std::span<const double> x, std::span<const double> y, std::span<double> out);

/// out[a*dim + b] = ∂²K/∂x_a ∂y_b (x, y)
void kernel_cross_hessian(const KernelSpec &spec, std::span<const double> x, std::span<const double> y, std::span<double> out);

/// out[(c*dim + a)*dim + b] = ∂³K/∂x_c ∂x_a ∂y_b (x, y)
void kernel_third_derivative(const KernelSpec &spec, std::span<const double> x, std::span<const double> y, std::span<double> out);

[[nodiscard]] Eigen::VectorXd kernel_grad_first(const KernelSpec &spec, const Eigen::VectorXd &x, const Eigen::VectorXd &y);
[[nodiscard]] Eigen::MatrixXd kernel_cross_hessian(const KernelSpec &spec, const Eigen::VectorXd &x, const Eigen::VectorXd &y);

inline std::span<const double> as_span(const Eigen::VectorXd &v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
inline std::span<const double> row_span(const PointSet &points, Eigen::Index i) {
    return {points.data() + i * points.cols(), static_cast<std::size_t>(points.cols())};
}

/// Ordering of the derivative functionals ∂_p, ∂_q taken at N states with
/// m degrees of freedom: the Nm momentum derivatives come first, then the Nm
/// position derivatives, each block state-major and component-minor.
struct FunctionalLayout {
    Eigen::Index num_states = 0;
    Eigen::Index dof = 0;

    [[nodiscard]] Eigen::Index size() const { return 2 * num_states * dof; }
    [[nodiscard]] Eigen::Index p_index(Eigen::Index state, Eigen::Index component) const { return state * dof + component; }
    [[nodiscard]] Eigen::Index q_index(Eigen::Index state, Eigen::Index component) const {
        return num_states * dof + state * dof + component;
    }
    /// Functional index for state coordinate c, where coordinates 0..m-1 are q and m..2m-1 are p.
    [[nodiscard]] Eigen::Index index_of_coordinate(Eigen::Index state, Eigen::Index coordinate) const {
        return coordinate < dof ? q_index(state, coordinate) : p_index(state, coordinate - dof);
    }
};

/// K(X_i, Y_j) for all pairs.
[[nodiscard]] Eigen::MatrixXd gram(const KernelSpec &spec, const PointSet &x, const PointSet &y);

/// Ψ(φ, φ): the 2Nm × 2Nm matrix of mixed second derivatives at all state pairs.
[[nodiscard]] Eigen::MatrixXd gram_derivative_functionals(const KernelSpec &spec, const PointSet &states, const FunctionalLayout &layout);

/// Ψ(φ, x): first derivatives of Ψ(·, x) at each anchor state.
[[nodiscard]] Eigen::VectorXd cross_derivative_functionals(const KernelSpec &spec, const PointSet &states, const FunctionalLayout &layout,
                                                           std::span<const double> x);

/// ∂/∂x of Ψ(φ, x): a 2Nm × 2m matrix whose column b is the x_b-derivative.
[[nodiscard]] Eigen::MatrixXd cross_derivative_functionals_jacobian(const KernelSpec &spec, const PointSet &states,
                                                                    const FunctionalLayout &layout, std::span<const double> x);

/// Gradient of wᵀ Ψ(φ,φ) w with respect to the anchor states (w held fixed).
/// Row k holds the derivative with respect to states.row(k).
[[nodiscard]] PointSet quadratic_form_state_gradient(const KernelSpec &spec, const PointSet &states, const FunctionalLayout &layout,
                                                     const Eigen::VectorXd &w);

/// Straight-loop reference assemblies, kept for tests and benchmarking.
namespace serial {
[[nodiscard]] Eigen::MatrixXd gram(const KernelSpec &spec, const PointSet &x, const PointSet &y);
[[nodiscard]] Eigen::MatrixXd gram_derivative_functionals(const KernelSpec &spec, const PointSet &states, const FunctionalLayout &layout);
[[nodiscard]] PointSet quadratic_form_state_gradient(const KernelSpec &spec, const PointSet &states, const FunctionalLayout &layout,
                                                     const Eigen::VectorXd &w);
}  // namespace serial

}  // namespace hamlearn
