#include "hamlearn/linalg.hpp"

#include "hamlearn/errors.hpp"

#include <cmath>
#include <string>

namespace hamlearn {

namespace {

constexpr double kFirstJitter = 1e-10;
constexpr double kLastJitter = 1e-6;

}  // namespace

RidgeFactorization::RidgeFactorization(const Eigen::MatrixXd &a, double ridge) {
    factorize(a, Eigen::VectorXd::Constant(a.rows(), ridge));
}

RidgeFactorization::RidgeFactorization(const Eigen::MatrixXd &a, const Eigen::VectorXd &ridge_diagonal) {
    factorize(a, ridge_diagonal);
}

void RidgeFactorization::factorize(Eigen::MatrixXd a, const Eigen::VectorXd &ridge_diagonal) {
    if (a.rows() != a.cols()) throw ContractError("ridge system matrix must be square");
    if (ridge_diagonal.size() != a.rows()) throw ContractError("ridge diagonal has wrong length");
    if ((ridge_diagonal.array() < 0.0).any()) throw ContractError("ridge must be nonnegative");
    size_ = a.rows();
    if (size_ == 0) return;

    a = 0.5 * (a + a.transpose()).eval();
    const double trace = a.trace();
    const double scale = trace > 0.0 ? trace / static_cast<double>(size_) : 1.0;
    Eigen::MatrixXd shifted = a;
    shifted.diagonal() += ridge_diagonal;

    llt_.compute(shifted);
    if (llt_.info() == Eigen::Success) return;

    for (double rel = kFirstJitter; rel <= kLastJitter * (1.0 + 1e-12); rel *= 10.0) {
        jitter_ = rel * scale;
        Eigen::MatrixXd jittered = shifted;
        jittered.diagonal().array() += jitter_;
        llt_.compute(jittered);
        if (llt_.info() == Eigen::Success) return;
    }
    throw SingularSystemError("ridge system of size " + std::to_string(size_) + " is not positive definite at maximum jitter",
                              static_cast<std::size_t>(size_), trace, a.diagonal().minCoeff(), ridge_diagonal.maxCoeff() + jitter_);
}

Eigen::MatrixXd RidgeFactorization::solve(const Eigen::MatrixXd &b) const {
    if (b.rows() != size_) throw ContractError("right-hand side has wrong row count");
    if (size_ == 0) return Eigen::MatrixXd(0, b.cols());
    return llt_.solve(b);
}

Eigen::VectorXd RidgeFactorization::solve(const Eigen::VectorXd &b) const {
    if (b.size() != size_) throw ContractError("right-hand side has wrong length");
    if (size_ == 0) return Eigen::VectorXd(0);
    return llt_.solve(b);
}

double RidgeFactorization::quadratic_form(const Eigen::VectorXd &xi) const {
    if (xi.size() != size_) throw ContractError("quadratic form vector has wrong length");
    if (size_ == 0) return 0.0;
    const Eigen::VectorXd half = llt_.matrixL().solve(xi);
    return half.squaredNorm();
}

RidgeSolution solve_ridge(const Eigen::MatrixXd &a, double ridge, const Eigen::MatrixXd &b) {
    const RidgeFactorization factor(a, ridge);
    return {factor.solve(b), ridge + factor.jitter()};
}

double quadratic_form(const Eigen::MatrixXd &a, double ridge, const Eigen::VectorXd &xi) {
    return RidgeFactorization(a, ridge).quadratic_form(xi);
}

NormIdentity norm_identity_check(const KernelSpec &spec, const PointSet &anchors, double ridge, const Eigen::VectorXd &xi) {
    const Eigen::MatrixXd k = gram(spec, anchors, anchors);
    const RidgeFactorization factor(k, ridge);
    const Eigen::VectorXd alpha = factor.solve(xi);
    const double lambda = ridge + factor.jitter();
    double lhs = alpha.dot(k * alpha);
    if (lambda > 0.0) lhs += (k * alpha - xi).squaredNorm() / lambda;
    return {lhs, factor.quadratic_form(xi)};
}

}  // namespace hamlearn
