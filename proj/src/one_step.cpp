#include "hamlearn/one_step.hpp"

#include "hamlearn/errors.hpp"
#include "hamlearn/representer.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace hamlearn {

std::string_view to_string(GradientMode mode) {
    return mode == GradientMode::full ? "full" : "frozen_state";
}

GradientMode gradient_mode_from_string(std::string_view name) {
    if (name == "full") return GradientMode::full;
    if (name == "frozen_state" || name == "frozen-state") return GradientMode::frozen_state;
    throw ContractError("unknown gradient mode '" + std::string(name) + "'");
}

Eigen::VectorXd SlackVariables::flatten() const {
    const Eigen::Index nm = z1.size();
    Eigen::VectorXd flat(2 * nm);
    for (Eigen::Index i = 0; i < z1.rows(); ++i) {
        for (Eigen::Index j = 0; j < z1.cols(); ++j) {
            flat(i * z1.cols() + j) = z1(i, j);
            flat(nm + i * z1.cols() + j) = z2(i, j);
        }
    }
    return flat;
}

SlackVariables SlackVariables::unflatten(const Eigen::VectorXd &flat, Eigen::Index num_states, Eigen::Index dof) {
    const Eigen::Index nm = num_states * dof;
    if (flat.size() != 2 * nm) throw ContractError("flattened slack has wrong length");
    SlackVariables out{Eigen::MatrixXd(num_states, dof), Eigen::MatrixXd(num_states, dof)};
    for (Eigen::Index i = 0; i < num_states; ++i) {
        for (Eigen::Index j = 0; j < dof; ++j) {
            out.z1(i, j) = flat(i * dof + j);
            out.z2(i, j) = flat(nm + i * dof + j);
        }
    }
    return out;
}

namespace {

Eigen::MatrixXd stacked(const Eigen::MatrixXd &top, const Eigen::MatrixXd &bottom) {
    Eigen::MatrixXd out(top.rows() + bottom.rows(), bottom.cols());
    if (top.rows() > 0) out.topRows(top.rows()) = top;
    out.bottomRows(bottom.rows()) = bottom;
    return out;
}

Eigen::MatrixXd reconstruction_operator(const KernelSpec &kernel, const Eigen::VectorXd &s, const Eigen::VectorXd &t,
                                        const RidgeFactorization &system) {
    const Eigen::MatrixXd cross = extended_cross(kernel, as_span(t), s, t);
    return system.solve(Eigen::MatrixXd(cross.transpose())).transpose();
}

// vᵀ(system)⁻¹v summed over columns, and (system)⁻¹V.
struct QuadraticSolve {
    double value;
    Eigen::MatrixXd solved;
};

QuadraticSolve quadratic_solve(const RidgeFactorization &system, const Eigen::MatrixXd &v) {
    const Eigen::MatrixXd half = system.llt().matrixL().solve(v);
    return {half.squaredNorm(), system.llt().matrixU().solve(half)};
}

}  // namespace

OneStepProblem::OneStepProblem(const Dataset &data, const KernelSpec &time_kernel, const KernelSpec &state_kernel, const Ridges &ridges,
                               GradientMode mode)
    : OneStepProblem(data.observed_times(), data.observed_q(), data.observed_p(), data.t_col, time_kernel, state_kernel, ridges, mode) {}

OneStepProblem::OneStepProblem(Eigen::VectorXd observed_times, Eigen::MatrixXd q_observed, Eigen::MatrixXd p_observed,
                               Eigen::VectorXd collocation_times, const KernelSpec &time_kernel, const KernelSpec &state_kernel,
                               const Ridges &ridges, GradientMode mode)
    : time_kernel_(time_kernel),
      state_kernel_(state_kernel),
      ridges_(ridges),
      mode_(mode),
      dof_(q_observed.cols()),
      observed_times_(std::move(observed_times)),
      q_observed_(std::move(q_observed)),
      p_observed_(std::move(p_observed)),
      collocation_times_(std::move(collocation_times)),
      q_system_(extended_gram(time_kernel, observed_times_, collocation_times_), ridges.trajectory_q),
      p_system_(extended_gram(time_kernel, observed_times_, collocation_times_), ridges.trajectory_p) {
    if (!state_kernel_.is_state_kernel()) throw ContractError("the Hamiltonian kernel must be a state kernel");
    if (collocation_times_.size() == 0) throw ContractError("the 1-step problem needs collocation times");
    if (dof_ < 1 || p_observed_.cols() != dof_) throw ContractError("observation component counts disagree");
    if (q_observed_.rows() != observed_times_.size() || p_observed_.rows() != observed_times_.size()) {
        throw ContractError("observation rows do not match observation times");
    }
    for (Eigen::Index i = 1; i < collocation_times_.size(); ++i) {
        if (!(collocation_times_(i) > collocation_times_(i - 1))) throw ContractError("collocation times must be strictly increasing");
    }
    q_reconstruction_ = reconstruction_operator(time_kernel_, observed_times_, collocation_times_, q_system_);
    p_reconstruction_ = reconstruction_operator(time_kernel_, observed_times_, collocation_times_, p_system_);
}

void OneStepProblem::freeze_states(PointSet states) {
    if (states.rows() != num_collocation() || states.cols() != 2 * dof_) throw ContractError("frozen states have wrong shape");
    frozen_states_ = std::move(states);
}

void OneStepProblem::check_slack(const SlackVariables &slack) const {
    if (slack.z1.rows() != num_collocation() || slack.z1.cols() != dof_ || slack.z2.rows() != num_collocation() || slack.z2.cols() != dof_) {
        throw ContractError("slack variables have wrong shape");
    }
}

PointSet OneStepProblem::reconstructed_states(const SlackVariables &slack) const {
    check_slack(slack);
    PointSet out(num_collocation(), 2 * dof_);
    out.leftCols(dof_) = q_reconstruction_ * stacked(q_observed_, slack.z1);
    out.rightCols(dof_) = p_reconstruction_ * stacked(p_observed_, slack.z2);
    return out;
}

PointSet OneStepProblem::hamiltonian_states(const SlackVariables &slack) const {
    if (frozen_states_) {
        check_slack(slack);
        return *frozen_states_;
    }
    return reconstructed_states(slack);
}

ObjectiveTerms OneStepProblem::terms(const SlackVariables &slack) const {
    check_slack(slack);
    ObjectiveTerms out;
    out.q_term = quadratic_solve(q_system_, stacked(q_observed_, slack.z1)).value;
    out.p_term = quadratic_solve(p_system_, stacked(p_observed_, slack.z2)).value;
    const PointSet states = hamiltonian_states(slack);
    const FunctionalLayout layout{num_collocation(), dof_};
    const RidgeFactorization psi(gram_derivative_functionals(state_kernel_, states, layout), ridges_.hamiltonian);
    out.hamiltonian_term = psi.quadratic_form(stack_derivative_targets(slack.z1, slack.z2));
    return out;
}

Eigen::VectorXd OneStepProblem::gradient(const SlackVariables &slack) const {
    Eigen::VectorXd grad;
    evaluate(slack.flatten(), grad);
    return grad;
}

double OneStepProblem::evaluate(const Eigen::VectorXd &flat, Eigen::VectorXd &grad) const {
    const Eigen::Index n = num_collocation();
    const Eigen::Index m = dof_;
    const SlackVariables slack = SlackVariables::unflatten(flat, n, m);
    const FunctionalLayout layout{n, m};

    const QuadraticSolve q_part = quadratic_solve(q_system_, stacked(q_observed_, slack.z1));
    const QuadraticSolve p_part = quadratic_solve(p_system_, stacked(p_observed_, slack.z2));

    const PointSet states = hamiltonian_states(slack);
    const RidgeFactorization psi(gram_derivative_functionals(state_kernel_, states, layout), ridges_.hamiltonian);
    const Eigen::VectorXd u = stack_derivative_targets(slack.z1, slack.z2);
    const QuadraticSolve h_part = quadratic_solve(psi, u);
    const Eigen::VectorXd w = h_part.solved.col(0);

    Eigen::MatrixXd dz1 = 2.0 * q_part.solved.bottomRows(n);
    Eigen::MatrixXd dz2 = 2.0 * p_part.solved.bottomRows(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            dz1(i, j) += 2.0 * w(layout.p_index(i, j));
            dz2(i, j) -= 2.0 * w(layout.q_index(i, j));
        }
    }

    if (mode_ == GradientMode::full && !frozen_states_) {
        // d/dY of uᵀ(Ψ+λI)⁻¹u is -d/dY (wᵀΨw) at fixed w; Y depends linearly on z.
        const PointSet state_grad = quadratic_form_state_gradient(state_kernel_, states, layout, w);
        dz1.noalias() -= q_reconstruction_.rightCols(n).transpose() * state_grad.leftCols(m);
        dz2.noalias() -= p_reconstruction_.rightCols(n).transpose() * state_grad.rightCols(m);
    }

    grad = SlackVariables{std::move(dz1), std::move(dz2)}.flatten();
    return q_part.value + p_part.value + h_part.value;
}

SlackVariables warm_start(const TrajectoryModel &two_step, const Eigen::VectorXd &collocation_times) {
    return {two_step.q.eval_derivative(collocation_times), two_step.p.eval_derivative(collocation_times)};
}

MinimizeResult minimize(const OneStepProblem &problem, const SlackVariables &init, const LbfgsOptions &options) {
    Eigen::VectorXd x = init.flatten();
    if (x.size() != problem.num_variables()) throw ContractError("initial slack has wrong shape");

    int calls = 0;
    const ObjectiveFunction objective = [&](const Eigen::VectorXd &z, Eigen::VectorXd &grad) {
        ++calls;
        try {
            return problem.evaluate(z, grad);
        } catch (const SingularSystemError &err) {
            if (calls == 1) {
                throw SingularSystemError(std::string(err.what()) + " (at the initial slack)", err.size(), err.trace(), err.min_diagonal(),
                                          err.last_ridge());
            }
            // A trial step left the region where Ψ(φ,φ) is factorizable; the
            // line search treats this as an overshoot.
            grad = Eigen::VectorXd::Constant(z.size(), std::numeric_limits<double>::quiet_NaN());
            return std::numeric_limits<double>::infinity();
        }
    };
    LbfgsReport report = lbfgs_minimize(objective, x, options);
    return {SlackVariables::unflatten(x, problem.num_collocation(), problem.dof()), std::move(report)};
}

TrajectoryModel extract_model(const OneStepProblem &problem, const SlackVariables &slack) {
    const Eigen::VectorXd &s = problem.observed_times();
    const Eigen::VectorXd &t = problem.collocation_times();
    Interpolant q = fit_values_and_derivatives(problem.time_kernel(), s, problem.q_observed(), t, slack.z1, problem.ridges().trajectory_q);
    Interpolant p = fit_values_and_derivatives(problem.time_kernel(), s, problem.p_observed(), t, slack.z2, problem.ridges().trajectory_p);
    const PointSet anchors = problem.hamiltonian_states(slack);
    const double ridge = problem.ridges().hamiltonian;
    LearnedHamiltonian hamiltonian = fit_hamiltonian(problem.state_kernel(), anchors, stack_derivative_targets(slack.z1, slack.z2), ridge, ridge);
    return {std::move(q), std::move(p), std::move(hamiltonian)};
}

}  // namespace hamlearn
