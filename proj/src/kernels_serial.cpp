#include "hamlearn/errors.hpp"
#include "hamlearn/kernels.hpp"

#include <vector>

namespace hamlearn::serial {

namespace {

struct StateCoordinate {
    Eigen::Index state;
    Eigen::Index coordinate;
};

StateCoordinate locate(const FunctionalLayout &layout, Eigen::Index f) {
    const Eigen::Index nm = layout.num_states * layout.dof;
    if (f < nm) return {f / layout.dof, layout.dof + f % layout.dof};
    return {(f - nm) / layout.dof, (f - nm) % layout.dof};
}

}  // namespace

Eigen::MatrixXd gram(const KernelSpec &spec, const PointSet &x, const PointSet &y) {
    Eigen::MatrixXd out(x.rows(), y.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < y.rows(); ++j) out(i, j) = kernel_eval(spec, row_span(x, i), row_span(y, j));
    return out;
}

Eigen::MatrixXd gram_derivative_functionals(const KernelSpec &spec, const PointSet &states, const FunctionalLayout &layout) {
    if (states.rows() != layout.num_states || states.cols() != 2 * layout.dof || states.rows() == 0) {
        throw ContractError("anchor states do not match the functional layout");
    }
    const auto dim = static_cast<std::size_t>(states.cols());
    std::vector<double> hess(dim * dim);
    Eigen::MatrixXd out(layout.size(), layout.size());
    for (Eigen::Index f = 0; f < layout.size(); ++f) {
        const auto [i, a] = locate(layout, f);
        for (Eigen::Index g = 0; g < layout.size(); ++g) {
            const auto [j, b] = locate(layout, g);
            kernel_cross_hessian(spec, row_span(states, i), row_span(states, j), hess);
            out(f, g) = hess[static_cast<std::size_t>(a) * dim + static_cast<std::size_t>(b)];
        }
    }
    return out;
}

PointSet quadratic_form_state_gradient(const KernelSpec &spec, const PointSet &states, const FunctionalLayout &layout,
                                       const Eigen::VectorXd &w) {
    const Eigen::Index n = states.rows();
    const Eigen::Index dim = states.cols();
    std::vector<double> third(static_cast<std::size_t>(dim * dim * dim));
    PointSet out = PointSet::Zero(n, dim);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index j = 0; j < n; ++j) {
            kernel_third_derivative(spec, row_span(states, k), row_span(states, j), third);
            for (Eigen::Index c = 0; c < dim; ++c) {
                double acc = 0.0;
                for (Eigen::Index a = 0; a < dim; ++a)
                    for (Eigen::Index b = 0; b < dim; ++b)
                        acc += w(layout.index_of_coordinate(k, a)) * w(layout.index_of_coordinate(j, b)) *
                               third[static_cast<std::size_t>((c * dim + a) * dim + b)];
                out(k, c) += 2.0 * acc;
            }
        }
    }
    return out;
}

}  // namespace hamlearn::serial
