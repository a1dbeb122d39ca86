#pragma once

#include "hamlearn/benchmarks.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace hamlearn {

/// Invalid or unparsable configuration. `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string &source, int line, const std::string &message);

    [[nodiscard]] int line() const { return line_; }
    [[nodiscard]] const std::string &message() const { return message_; }

private:
    int line_;
    std::string message_;
};

/// A state kernel plus the label used in file names and result rows.
struct NamedKernel {
    std::string label;
    KernelSpec spec;
};

/// Ridge values as written in the config file. The 2-step pipeline uses
/// lambda_q/lambda_p on the trajectory fits, the 1-step objective uses
/// lambda_1/lambda_2, and both use lambda on the Hamiltonian.
struct RidgeConfig {
    double lambda_q = 1e-5;
    double lambda_p = 1e-5;
    double lambda_1 = 1e-5;
    double lambda_2 = 1e-5;
    double lambda = 1e-3;

    [[nodiscard]] Ridges for_method(Method method) const;
};

struct ExperimentConfig {
    std::vector<SystemId> systems;
    std::vector<NamedKernel> kernels;
    std::vector<Method> methods;
    std::vector<double> sparsities;
    std::vector<std::uint64_t> seeds;
    RidgeConfig ridges;
    double time_lengthscale = 1.0;
    GridOptions grid;
    IntegratorOptions forecast;
    LbfgsOptions lbfgs;
    GradientMode gradient_mode = GradientMode::full;
    std::string output_dir = "results";
    bool dump_trajectories = true;
    /// Normalized echo of the parsed file, for the manifest.
    std::string echo;

    [[nodiscard]] ExperimentOptions options_for(Method method) const;
};

/// Parses and validates a config document. `source` names it in diagnostics.
[[nodiscard]] ExperimentConfig parse_config(const std::string &text, const std::string &source = "<config>");
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path &path);

/// Adds HAMLEARN_SEED_OFFSET (if set) to every seed.
void apply_seed_offset(ExperimentConfig &config);

}  // namespace hamlearn
