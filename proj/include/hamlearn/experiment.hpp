#pragma once

#include "hamlearn/benchmarks.hpp"
#include "hamlearn/config.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hamlearn {

inline constexpr const char *kVersion = "0.1.0";

enum ExitCode : int { exit_success = 0, exit_config_error = 1, exit_partial_failure = 2, exit_total_failure = 3 };

/// One row of errors.csv.
struct ErrorRow {
    std::string system;
    std::string kernel;
    std::string method;
    double sparsity = 0.0;
    std::string variable;  // q | p
    std::string phase;     // interpolation | extrapolation
    double mean = 0.0;
    double std = 0.0;
    int n_seeds = 0;
    int n_diverged = 0;
};

inline constexpr const char *kErrorsHeader = "system,kernel,method,sparsity,variable,phase,mean,std,n_seeds,n_diverged";

[[nodiscard]] std::string format_errors_csv(const std::vector<ErrorRow> &rows);
/// Throws std::runtime_error on a malformed file.
[[nodiscard]] std::vector<ErrorRow> parse_errors_csv(const std::string &text);

/// Sparsity as it appears in file names ("0", "0.7").
[[nodiscard]] std::string sparsity_tag(double sparsity);

struct CellRecord {
    SystemId system;
    std::string kernel_label;
    Method method;
    double sparsity;
    std::optional<CellResult> result;  // empty when every seed failed
    std::string error;
    double seconds = 0.0;
};

/// The four rows (q/p × interpolation/extrapolation) of a finished cell.
[[nodiscard]] std::vector<ErrorRow> error_rows(const CellRecord &cell);

struct RunSummary {
    std::filesystem::path output_dir;
    std::vector<CellRecord> cells;
    int exit_code = exit_success;
    double seconds = 0.0;
};

/// Runs the full sweep, at most `jobs` cells at a time, and writes
/// errors.csv, manifest.json and (optionally) per-seed trajectory files into
/// `output_dir`. Cells are reported in config order regardless of which
/// finishes first.
RunSummary run_sweep(const ExperimentConfig &config, int jobs, const std::filesystem::path &output_dir);

}  // namespace hamlearn
