#pragma once

#include "hamlearn/dataset.hpp"
#include "hamlearn/dynamics.hpp"
#include "hamlearn/kernels.hpp"
#include "hamlearn/lbfgs.hpp"
#include "hamlearn/one_step.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hamlearn {

enum class SystemId { mass_spring, two_mass_three_spring, henon_heiles, pendulum };

[[nodiscard]] std::string_view to_string(SystemId system);
[[nodiscard]] SystemId system_from_string(std::string_view name);
[[nodiscard]] std::vector<SystemId> all_systems();

struct SystemSpec {
    SystemId id;
    Eigen::Index dof;
    Eigen::VectorXd y0;
    std::vector<KernelFamily> admissible_kernels;
};

[[nodiscard]] SystemSpec system_spec(SystemId system);

[[nodiscard]] double true_hamiltonian(SystemId system, std::span<const double> y);
void true_gradient(SystemId system, std::span<const double> y, std::span<double> out);
[[nodiscard]] double true_hamiltonian(SystemId system, const Eigen::VectorXd &y);
[[nodiscard]] VectorField analytic_field(SystemId system);

/// splitmix64: tiny counter-based generator, identical output on every platform.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    /// Uniform integer in [0, bound) without modulo bias.
    std::uint64_t below(std::uint64_t bound);

private:
    std::uint64_t state_;
};

/// ⌊(1-α)N⌋.
[[nodiscard]] Eigen::Index observed_count(Eigen::Index n, double sparsity);
/// `count` distinct indices from [0, n), ascending.
[[nodiscard]] std::vector<Eigen::Index> sample_indices(Eigen::Index n, Eigen::Index count, std::uint64_t seed);

struct GridOptions {
    Eigen::Index num_collocation = 200;
    double t_final = 40.0;
    Eigen::Index num_extrapolation = 200;
    /// Draw collocation times uniformly at random instead of equispaced.
    bool random_grid = false;
    IntegratorOptions integrator{};
};

[[nodiscard]] Dataset generate_dataset(SystemId system, double sparsity, std::uint64_t seed, const GridOptions &grid = {});

/// sqrt(Σ|truth-pred|²) / sqrt(Σ|truth|²) over rows. Zero for an empty set.
[[nodiscard]] double relative_error(const Eigen::MatrixXd &pred, const Eigen::MatrixXd &truth);

enum class Method { two_step, one_step };
[[nodiscard]] std::string_view to_string(Method method);
[[nodiscard]] Method method_from_string(std::string_view name);

enum class Phase { interpolation, extrapolation };
enum class Variable { q, p };
[[nodiscard]] std::string_view to_string(Phase phase);
[[nodiscard]] std::string_view to_string(Variable variable);

struct ExperimentOptions {
    KernelSpec time_kernel = KernelSpec::gaussian_time(1.0);
    Ridges ridges{};
    GradientMode gradient_mode = GradientMode::full;
    LbfgsOptions lbfgs{};
    GridOptions grid{};
    IntegratorOptions forecast{};
    /// Keep per-seed predictions for trajectory dumps.
    bool keep_trajectories = false;
};

/// RE indexed by [phase][variable].
using ErrorGrid = std::array<std::array<double, 2>, 2>;

struct SeedOutcome {
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    bool diverged = false;
    ErrorGrid errors{};
    std::optional<LbfgsReport> optimizer;
    double seconds = 0.0;
    // Filled when keep_trajectories is set.
    Dataset data;
    Eigen::MatrixXd pred_col;  // reconstruction on t_col
    Eigen::MatrixXd pred_ext;  // forecast on t_ext (NaN rows past a divergence)
};

struct ErrorSummary {
    double mean = 0.0;
    double std = 0.0;
};

struct CellResult {
    SystemId system;
    KernelSpec kernel;
    Method method;
    double sparsity;
    std::array<std::array<ErrorSummary, 2>, 2> summary{};
    int n_seeds = 0;     // seeds that produced errors
    int n_diverged = 0;
    int n_failed = 0;
    std::vector<SeedOutcome> outcomes;
};

class ExperimentFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One seed: generate data, fit, reconstruct on the unobserved collocation
/// times and forecast on the extrapolation window from y⋆(t₀).
[[nodiscard]] SeedOutcome run_seed(SystemId system, const KernelSpec &state_kernel, Method method, double sparsity, std::uint64_t seed,
                                   const ExperimentOptions &options);

/// All seeds of one cell (only the first seed when sparsity is 0), with
/// population mean and std. Throws ExperimentFailure if every seed fails.
[[nodiscard]] CellResult run_experiment(SystemId system, const KernelSpec &state_kernel, Method method, double sparsity,
                                        const std::vector<std::uint64_t> &seeds, const ExperimentOptions &options);

}  // namespace hamlearn
