#pragma once

#include "hamlearn/experiment.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hamlearn {

enum class TableFormat { pretty, csv };

[[nodiscard]] TableFormat table_format_from_string(std::string_view name);

/// Pretty: one block per (system, kernel, variable) with a row per sparsity
/// and the two methods' interpolation/extrapolation errors as columns.
/// Missing cells show as "—". Csv: the errors.csv schema, unchanged.
[[nodiscard]] std::string render_table(const std::vector<ErrorRow> &rows, TableFormat format);

/// Reads <results>/errors.csv and renders it.
[[nodiscard]] std::string render_results(const std::filesystem::path &results_dir, TableFormat format);

}  // namespace hamlearn
