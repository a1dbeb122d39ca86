#pragma once

#include "hamlearn/hamiltonian.hpp"

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>

namespace hamlearn {

/// ∇H as a callback: writes the 2m-gradient (q components first) for state y.
using GradientFunction = std::function<void(std::span<const double> y, std::span<double> grad)>;

/// Hamiltonian vector field ẏ = (∂_p H; -∂_q H).
class VectorField {
public:
    VectorField(Eigen::Index dimension, GradientFunction gradient);

    /// Wraps a learned model; the model must outlive the field.
    static VectorField learned(const LearnedHamiltonian &model);
    /// Field with ∇H ≡ 0.
    static VectorField zero(Eigen::Index dimension);

    [[nodiscard]] Eigen::Index dimension() const { return dimension_; }
    void eval(std::span<const double> y, std::span<double> out) const;
    [[nodiscard]] Eigen::VectorXd eval(const Eigen::VectorXd &y) const;

private:
    Eigen::Index dimension_;
    GradientFunction gradient_;
};

struct IntegratorOptions {
    double rtol = 1e-9;
    double atol = 1e-9;
    double max_step = std::numeric_limits<double>::infinity();
    /// Sample the grid from the continuous extension instead of stepping onto
    /// every grid time.
    bool dense_output = true;
    /// Abort once |y|_∞ exceeds this.
    double blowup_threshold = 1e6;
    long max_steps = 5'000'000;
};

/// States sampled at `times` (one row per time).
struct Trajectory {
    Eigen::VectorXd times;
    Eigen::MatrixXd states;
    bool diverged = false;
    /// Time and state of the last accepted step (only meaningful when diverged).
    double last_time = 0.0;
    Eigen::VectorXd last_state;
};

enum class IntegrationFailure { step_underflow, blow_up, non_finite, too_many_steps };

/// Integration stopped early. `partial` holds the grid samples produced
/// before the failure.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string &what, IntegrationFailure kind, double last_good_time, Trajectory partial)
        : std::runtime_error(what), kind_(kind), last_good_time_(last_good_time), partial_(std::move(partial)) {}

    [[nodiscard]] IntegrationFailure kind() const { return kind_; }
    [[nodiscard]] double last_good_time() const { return last_good_time_; }
    [[nodiscard]] const Trajectory &partial() const { return partial_; }

private:
    IntegrationFailure kind_;
    double last_good_time_;
    Trajectory partial_;
};

/// Adaptive Dormand–Prince 5(4) from (t0, y0), sampled at the ascending grid
/// `times` (all >= t0). Throws IntegrationError on failure.
[[nodiscard]] Trajectory integrate(const VectorField &field, const Eigen::VectorXd &y0, double t0, const Eigen::VectorXd &times,
                                   const IntegratorOptions &options = {});

/// Integrates the learned field from the reconstructed initial state. A
/// failed integration is returned with `diverged` set and only the samples
/// produced before the failure.
[[nodiscard]] Trajectory forecast(const LearnedHamiltonian &model, const Eigen::VectorXd &y0, double t0, const Eigen::VectorXd &times,
                                  const IntegratorOptions &options = {});

}  // namespace hamlearn
