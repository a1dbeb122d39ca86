#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace hamlearn {

struct PropertyResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct PropertySuiteOptions {
    int kernel_cases = 200;
    std::uint64_t seed = 20240601;
    /// Where the determinism check writes its two runs; a fresh directory
    /// under the system temp dir when empty.
    std::filesystem::path scratch_dir;
};

[[nodiscard]] PropertyResult check_kernel_derivatives(int cases, std::uint64_t seed);
[[nodiscard]] PropertyResult check_norm_identity(std::uint64_t seed);
[[nodiscard]] PropertyResult check_objective_gradient(std::uint64_t seed);
[[nodiscard]] PropertyResult check_integrator_accuracy();
[[nodiscard]] PropertyResult check_energy_drift();
[[nodiscard]] PropertyResult check_frozen_subproblem(std::uint64_t seed);
[[nodiscard]] PropertyResult check_determinism(const std::filesystem::path &scratch_dir);

[[nodiscard]] std::vector<PropertyResult> run_property_suite(const PropertySuiteOptions &options = {});

}  // namespace hamlearn
