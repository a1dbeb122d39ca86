#include "hamlearn/kernels.hpp"

#include "hamlearn/errors.hpp"
#include "kernel_terms.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace hamlearn {

std::string_view to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::gaussian_time: return "gaussian_time";
        case KernelFamily::gaussian_state: return "gaussian_state";
        case KernelFamily::separable_polynomial: return "separable_polynomial";
        case KernelFamily::additive_poly_gaussian: return "additive_poly_gaussian";
    }
    return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name) {
    for (auto family : {KernelFamily::gaussian_time, KernelFamily::gaussian_state, KernelFamily::separable_polynomial,
                        KernelFamily::additive_poly_gaussian}) {
        if (to_string(family) == name) return family;
    }
    throw ContractError("unknown kernel family '" + std::string(name) + "'");
}

KernelSpec::KernelSpec(KernelFamily family, double lengthscale, int degree, std::optional<double> offset)
    : family_(family), lengthscale_(lengthscale), degree_(degree), offset_(offset.value_or(lengthscale)) {
    if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
        throw ContractError("kernel lengthscale must be positive and finite, got " + std::to_string(lengthscale));
    }
    if (degree < 1) throw ContractError("kernel degree must be >= 1, got " + std::to_string(degree));
    if (!std::isfinite(offset_)) throw ContractError("kernel offset must be finite");
}

void KernelSpec::check_dimension(std::size_t dim) const {
    if (family_ == KernelFamily::gaussian_time) {
        if (dim != 1) throw ContractError("gaussian_time acts on scalar times, got dimension " + std::to_string(dim));
        return;
    }
    if (dim < 2 || dim % 2 != 0) {
        throw ContractError(std::string(to_string(family_)) + " needs a (q, p) state of even dimension, got " + std::to_string(dim));
    }
}

namespace detail {

void check_pair(const KernelSpec &spec, std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw ContractError("kernel arguments differ in dimension: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
    }
    spec.check_dimension(x.size());
}

}  // namespace detail

double kernel_eval(const KernelSpec &spec, std::span<const double> x, std::span<const double> y) {
    detail::check_pair(spec, x, y);
    return detail::eval_unchecked(spec, x, y);
}

void kernel_grad_first(const KernelSpec &spec, std::span<const double> x, std::span<const double> y, std::span<double> out) {
    detail::check_pair(spec, x, y);
    if (out.size() != x.size()) throw ContractError("gradient buffer has wrong size");
    detail::grad_unchecked(spec, x, y, out);
}

void kernel_cross_hessian(const KernelSpec &spec, std::span<const double> x, std::span<const double> y, std::span<double> out) {
    detail::check_pair(spec, x, y);
    if (out.size() != x.size() * x.size()) throw ContractError("cross-Hessian buffer has wrong size");
    detail::cross_hessian_unchecked(spec, x, y, out);
}

void kernel_third_derivative(const KernelSpec &spec, std::span<const double> x, std::span<const double> y, std::span<double> out) {
    detail::check_pair(spec, x, y);
    if (out.size() != x.size() * x.size() * x.size()) throw ContractError("third-derivative buffer has wrong size");
    detail::third_unchecked(spec, x, y, out);
}

Eigen::VectorXd kernel_grad_first(const KernelSpec &spec, const Eigen::VectorXd &x, const Eigen::VectorXd &y) {
    Eigen::VectorXd out(x.size());
    kernel_grad_first(spec, as_span(x), as_span(y), {out.data(), static_cast<std::size_t>(out.size())});
    return out;
}

Eigen::MatrixXd kernel_cross_hessian(const KernelSpec &spec, const Eigen::VectorXd &x, const Eigen::VectorXd &y) {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(x.size(), x.size());
    kernel_cross_hessian(spec, as_span(x), as_span(y), {out.data(), static_cast<std::size_t>(out.size())});
    return out;
}

namespace {

void check_points(const KernelSpec &spec, const PointSet &x, const PointSet &y) {
    if (x.rows() > 0 && y.rows() > 0 && x.cols() != y.cols()) {
        throw ContractError("point sets differ in dimension: " + std::to_string(x.cols()) + " vs " + std::to_string(y.cols()));
    }
    if (x.rows() > 0) spec.check_dimension(static_cast<std::size_t>(x.cols()));
    if (y.rows() > 0) spec.check_dimension(static_cast<std::size_t>(y.cols()));
}

void check_states(const KernelSpec &spec, const PointSet &states, const FunctionalLayout &layout) {
    if (!spec.is_state_kernel()) throw ContractError("derivative functionals need a state kernel");
    if (states.rows() == 0) throw ContractError("derivative functionals need at least one anchor state");
    if (states.rows() != layout.num_states || states.cols() != 2 * layout.dof) {
        throw ContractError("anchor states do not match the functional layout");
    }
    spec.check_dimension(static_cast<std::size_t>(states.cols()));
}

}  // namespace

Eigen::MatrixXd gram(const KernelSpec &spec, const PointSet &x, const PointSet &y) {
    check_points(spec, x, y);
    const Eigen::Index rows = x.rows();
    const Eigen::Index cols = y.rows();
    Eigen::MatrixXd out(rows, cols);
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = detail::eval_unchecked(spec, row_span(x, i), row_span(y, j));
    }
    return out;
}

Eigen::MatrixXd gram_derivative_functionals(const KernelSpec &spec, const PointSet &states, const FunctionalLayout &layout) {
    check_states(spec, states, layout);
    const Eigen::Index n = states.rows();
    const Eigen::Index dim = states.cols();
    Eigen::MatrixXd out(layout.size(), layout.size());

    // Only pairs j >= i are evaluated; the mirrored block is the transpose.
#pragma omp parallel
    {
        std::vector<double> hess(static_cast<std::size_t>(dim * dim));
#pragma omp for schedule(dynamic, 4)
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i; j < n; ++j) {
                detail::cross_hessian_unchecked(spec, row_span(states, i), row_span(states, j), hess);
                for (Eigen::Index a = 0; a < dim; ++a) {
                    const Eigen::Index fa = layout.index_of_coordinate(i, a);
                    for (Eigen::Index b = 0; b < dim; ++b) {
                        const Eigen::Index fb = layout.index_of_coordinate(j, b);
                        const double value = hess[static_cast<std::size_t>(a * dim + b)];
                        out(fa, fb) = value;
                        out(fb, fa) = value;
                    }
                }
            }
        }
    }
    return out;
}

Eigen::VectorXd cross_derivative_functionals(const KernelSpec &spec, const PointSet &states, const FunctionalLayout &layout,
                                             std::span<const double> x) {
    check_states(spec, states, layout);
    if (static_cast<Eigen::Index>(x.size()) != states.cols()) throw ContractError("query state has wrong dimension");
    const Eigen::Index dim = states.cols();
    Eigen::VectorXd out(layout.size());
    std::array<double, 64> grad{};
    if (dim > 64) throw ContractError("state dimension too large");
    for (Eigen::Index i = 0; i < states.rows(); ++i) {
        detail::grad_unchecked(spec, row_span(states, i), x, {grad.data(), static_cast<std::size_t>(dim)});
        for (Eigen::Index a = 0; a < dim; ++a) out(layout.index_of_coordinate(i, a)) = grad[static_cast<std::size_t>(a)];
    }
    return out;
}

Eigen::MatrixXd cross_derivative_functionals_jacobian(const KernelSpec &spec, const PointSet &states, const FunctionalLayout &layout,
                                                      std::span<const double> x) {
    check_states(spec, states, layout);
    if (static_cast<Eigen::Index>(x.size()) != states.cols()) throw ContractError("query state has wrong dimension");
    const Eigen::Index dim = states.cols();
    Eigen::MatrixXd out(layout.size(), dim);
    std::vector<double> hess(static_cast<std::size_t>(dim * dim));
    for (Eigen::Index i = 0; i < states.rows(); ++i) {
        detail::cross_hessian_unchecked(spec, row_span(states, i), x, hess);
        for (Eigen::Index a = 0; a < dim; ++a) {
            const Eigen::Index f = layout.index_of_coordinate(i, a);
            for (Eigen::Index b = 0; b < dim; ++b) out(f, b) = hess[static_cast<std::size_t>(a * dim + b)];
        }
    }
    return out;
}

PointSet quadratic_form_state_gradient(const KernelSpec &spec, const PointSet &states, const FunctionalLayout &layout,
                                       const Eigen::VectorXd &w) {
    check_states(spec, states, layout);
    if (w.size() != layout.size()) throw ContractError("weight vector does not match the functional layout");
    const Eigen::Index n = states.rows();
    const Eigen::Index dim = states.cols();
    PointSet out = PointSet::Zero(n, dim);

    // Gather w by (state, coordinate) once so the inner loops are contiguous.
    PointSet weights(n, dim);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index a = 0; a < dim; ++a) weights(i, a) = w(layout.index_of_coordinate(i, a));

#pragma omp parallel
    {
        std::vector<double> third(static_cast<std::size_t>(dim * dim * dim));
        std::vector<double> inner(static_cast<std::size_t>(dim * dim));
#pragma omp for schedule(dynamic, 4)
        for (Eigen::Index k = 0; k < n; ++k) {
            std::fill(inner.begin(), inner.end(), 0.0);
            for (Eigen::Index j = 0; j < n; ++j) {
                detail::third_unchecked(spec, row_span(states, k), row_span(states, j), third);
                // inner[c*dim + a] += Σ_b T_cab w_jb
                for (Eigen::Index ca = 0; ca < dim * dim; ++ca) {
                    double acc = 0.0;
                    for (Eigen::Index b = 0; b < dim; ++b) acc += third[static_cast<std::size_t>(ca * dim + b)] * weights(j, b);
                    inner[static_cast<std::size_t>(ca)] += acc;
                }
            }
            for (Eigen::Index c = 0; c < dim; ++c) {
                double acc = 0.0;
                for (Eigen::Index a = 0; a < dim; ++a) acc += inner[static_cast<std::size_t>(c * dim + a)] * weights(k, a);
                out(k, c) = 2.0 * acc;
            }
        }
    }
    return out;
}

}  // namespace hamlearn
