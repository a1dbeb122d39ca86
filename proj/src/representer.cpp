#include "hamlearn/representer.hpp"

#include "hamlearn/errors.hpp"
#include "kernel_terms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace hamlearn {

namespace {

// Scalar-time kernel pieces: K(t,t'), ∂₁K, ∂₂K and ∂₁∂₂K.
struct TimeKernel {
    const KernelSpec &spec;

    [[nodiscard]] double value(double t, double u) const { return detail::eval_unchecked(spec, {&t, 1}, {&u, 1}); }
    [[nodiscard]] double d1(double t, double u) const {
        double out = 0.0;
        detail::grad_unchecked(spec, {&t, 1}, {&u, 1}, {&out, 1});
        return out;
    }
    [[nodiscard]] double d2(double t, double u) const { return d1(u, t); }
    [[nodiscard]] double d12(double t, double u) const {
        double out = 0.0;
        detail::cross_hessian_unchecked(spec, {&t, 1}, {&u, 1}, {&out, 1});
        return out;
    }
};

void require_time_kernel(const KernelSpec &kernel) {
    kernel.check_dimension(1);
}

// Sorts anchors ascending, permuting the rows of `values` alongside, and
// rejects anchors closer than kAnchorSeparation.
void canonicalize(Eigen::VectorXd &times, Eigen::MatrixXd &values, const char *what) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(times.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return times(a) < times(b); });
    Eigen::VectorXd sorted_times(times.size());
    Eigen::MatrixXd sorted_values(values.rows(), values.cols());
    for (Eigen::Index k = 0; k < times.size(); ++k) {
        sorted_times(k) = times(order[static_cast<std::size_t>(k)]);
        sorted_values.row(k) = values.row(order[static_cast<std::size_t>(k)]);
        if (!std::isfinite(sorted_times(k))) throw ContractError(std::string(what) + " anchors must be finite");
        if (k > 0 && sorted_times(k) - sorted_times(k - 1) < kAnchorSeparation) {
            throw ContractError(std::string("duplicate ") + what + " anchor at t = " + std::to_string(sorted_times(k)));
        }
    }
    times = std::move(sorted_times);
    values = std::move(sorted_values);
}

}  // namespace

Interpolant::Interpolant(KernelSpec kernel, Eigen::VectorXd value_anchors, Eigen::VectorXd derivative_anchors, Eigen::MatrixXd coefficients,
                         double ridge_effective)
    : kernel_(kernel),
      value_anchors_(std::move(value_anchors)),
      derivative_anchors_(std::move(derivative_anchors)),
      coefficients_(std::move(coefficients)),
      ridge_effective_(ridge_effective) {
    require_time_kernel(kernel_);
    if (coefficients_.rows() != value_anchors_.size() + derivative_anchors_.size()) {
        throw ContractError("interpolant coefficients do not match its anchors");
    }
}

Eigen::MatrixXd Interpolant::eval(std::span<const double> times) const {
    return extended_cross(kernel_, times, value_anchors_, derivative_anchors_) * coefficients_;
}

Eigen::MatrixXd Interpolant::eval_derivative(std::span<const double> times) const {
    return extended_cross_derivative(kernel_, times, value_anchors_, derivative_anchors_) * coefficients_;
}

Eigen::MatrixXd extended_gram(const KernelSpec &kernel, const Eigen::VectorXd &value_times, const Eigen::VectorXd &derivative_times) {
    require_time_kernel(kernel);
    const TimeKernel k{kernel};
    const Eigen::Index ns = value_times.size();
    const Eigen::Index nt = derivative_times.size();
    Eigen::MatrixXd out(ns + nt, ns + nt);
    for (Eigen::Index i = 0; i < ns; ++i) {
        for (Eigen::Index j = 0; j < ns; ++j) out(i, j) = k.value(value_times(i), value_times(j));
        for (Eigen::Index j = 0; j < nt; ++j) {
            const double v = k.d2(value_times(i), derivative_times(j));
            out(i, ns + j) = v;
            out(ns + j, i) = v;
        }
    }
    for (Eigen::Index i = 0; i < nt; ++i)
        for (Eigen::Index j = 0; j < nt; ++j) out(ns + i, ns + j) = k.d12(derivative_times(i), derivative_times(j));
    return out;
}

Eigen::MatrixXd extended_cross(const KernelSpec &kernel, std::span<const double> times, const Eigen::VectorXd &value_times,
                               const Eigen::VectorXd &derivative_times) {
    require_time_kernel(kernel);
    const TimeKernel k{kernel};
    const Eigen::Index ns = value_times.size();
    const Eigen::Index nt = derivative_times.size();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(times.size()), ns + nt);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        const double tau = times[static_cast<std::size_t>(r)];
        for (Eigen::Index j = 0; j < ns; ++j) out(r, j) = k.value(tau, value_times(j));
        for (Eigen::Index j = 0; j < nt; ++j) out(r, ns + j) = k.d2(tau, derivative_times(j));
    }
    return out;
}

Eigen::MatrixXd extended_cross_derivative(const KernelSpec &kernel, std::span<const double> times, const Eigen::VectorXd &value_times,
                                          const Eigen::VectorXd &derivative_times) {
    require_time_kernel(kernel);
    const TimeKernel k{kernel};
    const Eigen::Index ns = value_times.size();
    const Eigen::Index nt = derivative_times.size();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(times.size()), ns + nt);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        const double tau = times[static_cast<std::size_t>(r)];
        for (Eigen::Index j = 0; j < ns; ++j) out(r, j) = k.d1(tau, value_times(j));
        for (Eigen::Index j = 0; j < nt; ++j) out(r, ns + j) = k.d12(tau, derivative_times(j));
    }
    return out;
}

Interpolant fit_values(const KernelSpec &kernel, const Eigen::VectorXd &times, const Eigen::MatrixXd &values, double ridge) {
    if (times.size() < 1) throw ContractError("fit_values needs at least one anchor");
    return fit_values_and_derivatives(kernel, times, values, Eigen::VectorXd(0), Eigen::MatrixXd(0, values.cols()), ridge);
}

Interpolant fit_values_and_derivatives(const KernelSpec &kernel, const Eigen::VectorXd &times, const Eigen::MatrixXd &values,
                                       const Eigen::VectorXd &derivative_times, const Eigen::MatrixXd &derivative_values, double ridge) {
    require_time_kernel(kernel);
    if (values.rows() != times.size()) throw ContractError("value rows do not match anchor count");
    if (derivative_values.rows() != derivative_times.size()) throw ContractError("derivative rows do not match anchor count");
    if (times.size() + derivative_times.size() == 0) throw ContractError("interpolant needs at least one anchor");
    if (times.size() > 0 && derivative_times.size() > 0 && values.cols() != derivative_values.cols()) {
        throw ContractError("value and derivative component counts differ");
    }
    const Eigen::Index components = times.size() > 0 ? values.cols() : derivative_values.cols();

    Eigen::VectorXd s = times;
    Eigen::MatrixXd sv = values;
    Eigen::VectorXd t = derivative_times;
    Eigen::MatrixXd tv = derivative_values;
    canonicalize(s, sv, "value");
    canonicalize(t, tv, "derivative");

    Eigen::MatrixXd rhs(s.size() + t.size(), components);
    if (s.size() > 0) rhs.topRows(s.size()) = sv;
    if (t.size() > 0) rhs.bottomRows(t.size()) = tv;

    const RidgeFactorization factor(extended_gram(kernel, s, t), ridge);
    return {kernel, std::move(s), std::move(t), factor.solve(rhs), ridge + factor.jitter()};
}

}  // namespace hamlearn
