#pragma once

#include "hamlearn/dataset.hpp"
#include "hamlearn/kernels.hpp"
#include "hamlearn/lbfgs.hpp"
#include "hamlearn/linalg.hpp"
#include "hamlearn/two_step.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string_view>

namespace hamlearn {

/// Latent time derivatives at the collocation times: z1 ≈ q̇, z2 ≈ ṗ (N × m each).
struct SlackVariables {
    Eigen::MatrixXd z1;
    Eigen::MatrixXd z2;

    /// z1 then z2, each row-major (index i*m + j).
    [[nodiscard]] Eigen::VectorXd flatten() const;
    [[nodiscard]] static SlackVariables unflatten(const Eigen::VectorXd &flat, Eigen::Index num_states, Eigen::Index dof);
};

/// How the Hamiltonian term's gradient treats the dependence of Ψ(φ,φ) on
/// the reconstructed states: differentiated through (full) or ignored.
enum class GradientMode { full, frozen_state };

[[nodiscard]] std::string_view to_string(GradientMode mode);
[[nodiscard]] GradientMode gradient_mode_from_string(std::string_view name);

struct ObjectiveTerms {
    double q_term = 0.0;
    double p_term = 0.0;
    double hamiltonian_term = 0.0;

    [[nodiscard]] double total() const { return q_term + p_term + hamiltonian_term; }
};

/// The reduced 1-step problem in the slack variables:
///   (q(S); z1)ᵀ(Γ(Φ,Φ)+λ₁I)⁻¹(q(S); z1) + (p(S); z2)ᵀ(Σ(Φ,Φ)+λ₂I)⁻¹(p(S); z2)
///   + (z1; -z2)ᵀ(Ψ(φ,φ)+λI)⁻¹(z1; -z2),
/// with Ψ(φ,φ) assembled at the states reconstructed from z. The two time
/// systems depend only on S and T and are factorized once.
class OneStepProblem {
public:
    OneStepProblem(const Dataset &data, const KernelSpec &time_kernel, const KernelSpec &state_kernel, const Ridges &ridges,
                   GradientMode mode = GradientMode::full);

    OneStepProblem(Eigen::VectorXd observed_times, Eigen::MatrixXd q_observed, Eigen::MatrixXd p_observed, Eigen::VectorXd collocation_times,
                   const KernelSpec &time_kernel, const KernelSpec &state_kernel, const Ridges &ridges,
                   GradientMode mode = GradientMode::full);

    /// Assemble Ψ(φ,φ) at fixed states instead of the reconstructed ones,
    /// which turns the objective into a convex quadratic in z.
    void freeze_states(PointSet states);
    void unfreeze_states() { frozen_states_.reset(); }
    [[nodiscard]] bool states_frozen() const { return frozen_states_.has_value(); }

    [[nodiscard]] Eigen::Index num_collocation() const { return collocation_times_.size(); }
    [[nodiscard]] Eigen::Index dof() const { return dof_; }
    [[nodiscard]] Eigen::Index num_variables() const { return 2 * num_collocation() * dof_; }
    [[nodiscard]] GradientMode gradient_mode() const { return mode_; }
    [[nodiscard]] const KernelSpec &time_kernel() const { return time_kernel_; }
    [[nodiscard]] const KernelSpec &state_kernel() const { return state_kernel_; }
    [[nodiscard]] const Ridges &ridges() const { return ridges_; }
    [[nodiscard]] const Eigen::VectorXd &observed_times() const { return observed_times_; }
    [[nodiscard]] const Eigen::VectorXd &collocation_times() const { return collocation_times_; }
    [[nodiscard]] const Eigen::MatrixXd &q_observed() const { return q_observed_; }
    [[nodiscard]] const Eigen::MatrixXd &p_observed() const { return p_observed_; }
    [[nodiscard]] const RidgeFactorization &q_system() const { return q_system_; }
    [[nodiscard]] const RidgeFactorization &p_system() const { return p_system_; }

    /// (q⋆, p⋆)(T) implied by z, N × 2m.
    [[nodiscard]] PointSet reconstructed_states(const SlackVariables &slack) const;
    /// States at which Ψ(φ,φ) is assembled (reconstructed, or the frozen ones).
    [[nodiscard]] PointSet hamiltonian_states(const SlackVariables &slack) const;

    [[nodiscard]] ObjectiveTerms terms(const SlackVariables &slack) const;
    [[nodiscard]] double objective(const SlackVariables &slack) const { return terms(slack).total(); }
    /// Gradient with respect to flatten(slack).
    [[nodiscard]] Eigen::VectorXd gradient(const SlackVariables &slack) const;
    /// Value and gradient in one pass over a flattened slack vector.
    double evaluate(const Eigen::VectorXd &flat, Eigen::VectorXd &grad) const;

private:
    void check_slack(const SlackVariables &slack) const;

    KernelSpec time_kernel_;
    KernelSpec state_kernel_;
    Ridges ridges_;
    GradientMode mode_;
    Eigen::Index dof_;
    Eigen::VectorXd observed_times_;
    Eigen::MatrixXd q_observed_;
    Eigen::MatrixXd p_observed_;
    Eigen::VectorXd collocation_times_;
    RidgeFactorization q_system_;
    RidgeFactorization p_system_;
    // Γ(T,Φ)(Γ(Φ,Φ)+λI)⁻¹: maps (values; z) to the reconstruction at T.
    Eigen::MatrixXd q_reconstruction_;
    Eigen::MatrixXd p_reconstruction_;
    std::optional<PointSet> frozen_states_;
};

/// z1 = q̇⋆(T), z2 = ṗ⋆(T) from a fitted 2-step model.
[[nodiscard]] SlackVariables warm_start(const TrajectoryModel &two_step, const Eigen::VectorXd &collocation_times);

struct MinimizeResult {
    SlackVariables slack;
    LbfgsReport diagnostics;
};

/// L-BFGS on the reduced objective, started from `init`.
[[nodiscard]] MinimizeResult minimize(const OneStepProblem &problem, const SlackVariables &init, const LbfgsOptions &options = {});

/// q⋆, p⋆ and H⋆ implied by the slack variables.
[[nodiscard]] TrajectoryModel extract_model(const OneStepProblem &problem, const SlackVariables &slack);

}  // namespace hamlearn
