#include "hamlearn/hamiltonian.hpp"

#include "hamlearn/errors.hpp"
#include "hamlearn/linalg.hpp"
#include "kernel_terms.hpp"

#include <array>

namespace hamlearn {

namespace {

constexpr std::size_t kMaxDimension = 16;

Eigen::VectorXd ridge_diagonal(const FunctionalLayout &layout, double ridge_p, double ridge_q) {
    const Eigen::Index nm = layout.num_states * layout.dof;
    Eigen::VectorXd diag(layout.size());
    diag.head(nm).setConstant(ridge_p);
    diag.tail(nm).setConstant(ridge_q);
    return diag;
}

}  // namespace

LearnedHamiltonian::LearnedHamiltonian(KernelSpec kernel, PointSet anchors, Eigen::VectorXd coefficients, Eigen::VectorXd targets,
                                       double ridge_p, double ridge_q, double jitter)
    : kernel_(kernel),
      anchors_(std::move(anchors)),
      layout_{anchors_.rows(), anchors_.cols() / 2},
      coefficients_(std::move(coefficients)),
      targets_(std::move(targets)),
      ridge_p_(ridge_p),
      ridge_q_(ridge_q),
      jitter_(jitter) {
    if (!kernel_.is_state_kernel()) throw ContractError("a Hamiltonian needs a state kernel");
    if (anchors_.rows() == 0) throw ContractError("a Hamiltonian needs at least one anchor state");
    kernel_.check_dimension(static_cast<std::size_t>(anchors_.cols()));
    if (static_cast<std::size_t>(anchors_.cols()) > kMaxDimension) throw ContractError("state dimension too large");
    if (coefficients_.size() != layout_.size() || targets_.size() != layout_.size()) {
        throw ContractError("Hamiltonian coefficients do not match the functional layout");
    }
}

double LearnedHamiltonian::eval(std::span<const double> x) const {
    if (static_cast<Eigen::Index>(x.size()) != dimension()) throw ContractError("state has wrong dimension");
    const auto dim = static_cast<std::size_t>(dimension());
    std::array<double, kMaxDimension> grad{};
    double value = 0.0;
    for (Eigen::Index i = 0; i < anchors_.rows(); ++i) {
        detail::grad_unchecked(kernel_, row_span(anchors_, i), x, {grad.data(), dim});
        for (std::size_t a = 0; a < dim; ++a) value += coefficients_(layout_.index_of_coordinate(i, static_cast<Eigen::Index>(a))) * grad[a];
    }
    return value;
}

void LearnedHamiltonian::gradient(std::span<const double> x, std::span<double> out) const {
    if (static_cast<Eigen::Index>(x.size()) != dimension() || out.size() != x.size()) throw ContractError("state has wrong dimension");
    const auto dim = static_cast<std::size_t>(dimension());
    std::array<double, kMaxDimension * kMaxDimension> hess{};
    std::fill(out.begin(), out.end(), 0.0);
    for (Eigen::Index i = 0; i < anchors_.rows(); ++i) {
        detail::cross_hessian_unchecked(kernel_, row_span(anchors_, i), x, {hess.data(), dim * dim});
        for (std::size_t a = 0; a < dim; ++a) {
            const double alpha = coefficients_(layout_.index_of_coordinate(i, static_cast<Eigen::Index>(a)));
            for (std::size_t b = 0; b < dim; ++b) out[b] += alpha * hess[a * dim + b];
        }
    }
}

double LearnedHamiltonian::solve_residual() const {
    Eigen::MatrixXd system = gram_derivative_functionals(kernel_, anchors_, layout_);
    system.diagonal() += ridge_diagonal(layout_, ridge_p_, ridge_q_);
    system.diagonal().array() += jitter_;
    return (system * coefficients_ - targets_).cwiseAbs().maxCoeff();
}

LearnedHamiltonian fit_hamiltonian(const KernelSpec &kernel, const PointSet &anchors, const Eigen::VectorXd &targets, double ridge_p,
                                   double ridge_q) {
    if (!kernel.is_state_kernel()) throw ContractError("a Hamiltonian needs a state kernel");
    const FunctionalLayout layout{anchors.rows(), anchors.cols() / 2};
    if (targets.size() != layout.size()) throw ContractError("targets do not match the functional layout");
    const RidgeFactorization factor(gram_derivative_functionals(kernel, anchors, layout), ridge_diagonal(layout, ridge_p, ridge_q));
    return {kernel, anchors, factor.solve(targets), targets, ridge_p, ridge_q, factor.jitter()};
}

double eval_H(const LearnedHamiltonian &model, const Eigen::VectorXd &x) {
    return model.eval(as_span(x));
}

Eigen::VectorXd grad_H(const LearnedHamiltonian &model, const Eigen::VectorXd &x) {
    Eigen::VectorXd out(x.size());
    model.gradient(as_span(x), {out.data(), static_cast<std::size_t>(out.size())});
    return out;
}

}  // namespace hamlearn
