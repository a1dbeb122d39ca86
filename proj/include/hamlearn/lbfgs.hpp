#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string_view>
#include <vector>

namespace hamlearn {

struct LbfgsOptions {
    int memory = 10;
    double c1 = 1e-4;  // sufficient decrease
    double c2 = 0.9;   // curvature (strong Wolfe)
    /// Stop once |∇f|_∞ < gradient_tolerance · (1 + |f|).
    double gradient_tolerance = 1e-8;
    int max_iterations = 500;
    int max_line_search_evaluations = 40;
};

enum class Termination { converged, max_iterations, line_search_failed, non_finite };

[[nodiscard]] std::string_view to_string(Termination reason);

struct LbfgsReport {
    int iterations = 0;
    int evaluations = 0;
    double initial_value = 0.0;
    double final_value = 0.0;
    double gradient_inf_norm = 0.0;
    Termination reason = Termination::max_iterations;
    /// Set when the run stopped on a line-search failure; x is the best iterate.
    bool warning = false;
    /// Objective after every accepted step, starting with the initial value.
    std::vector<double> accepted_values;
};

/// Value-and-gradient callback: returns f(x) and writes ∇f(x) into grad.
using ObjectiveFunction = std::function<double(const Eigen::VectorXd &x, Eigen::VectorXd &grad)>;

/// Limited-memory BFGS with a strong-Wolfe line search. `x` holds the initial
/// point on entry and the best accepted iterate on return; accepted objective
/// values never increase.
LbfgsReport lbfgs_minimize(const ObjectiveFunction &objective, Eigen::VectorXd &x, const LbfgsOptions &options = {});

}  // namespace hamlearn
