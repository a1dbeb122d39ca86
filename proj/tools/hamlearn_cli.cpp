#include "hamlearn/config.hpp"
#include "hamlearn/experiment.hpp"
#include "hamlearn/property_suite.hpp"
#include "hamlearn/table.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace hamlearn;

namespace {

int cmd_run(const std::string &config_path, int jobs, const std::string &out_dir) {
    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
        apply_seed_offset(cfg);
    } catch (const ConfigError &err) {
        std::cerr << "config error: " << err.what() << "\n";
        return exit_config_error;
    }
    if (jobs < 1) {
        std::cerr << "config error: --jobs must be at least 1\n";
        return exit_config_error;
    }
    const std::filesystem::path out = out_dir.empty() ? std::filesystem::path(cfg.output_dir) : std::filesystem::path(out_dir);
    const RunSummary summary = run_sweep(cfg, jobs, out);
    for (const CellRecord &cell : summary.cells) {
        if (!cell.result) {
            std::cerr << "cell " << to_string(cell.system) << "/" << cell.kernel_label << "/" << to_string(cell.method) << "/"
                      << sparsity_tag(cell.sparsity) << " failed: " << cell.error << "\n";
        } else if (cell.result->n_failed > 0) {
            std::cerr << "cell " << to_string(cell.system) << "/" << cell.kernel_label << "/" << to_string(cell.method) << "/"
                      << sparsity_tag(cell.sparsity) << ": " << cell.result->n_failed << " seed(s) failed\n";
        }
    }
    std::cout << "wrote " << (summary.output_dir / "errors.csv").string() << " (" << summary.cells.size() << " cells, " << summary.seconds
              << " s)\n";
    return summary.exit_code;
}

int cmd_table(const std::string &results, const std::string &format) {
    try {
        std::cout << render_results(results, table_format_from_string(format));
        return 0;
    } catch (const std::exception &err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
}

int cmd_check() {
    bool ok = true;
    for (const PropertyResult &r : run_property_suite()) {
        std::printf("%s  %s: %s [%.1f s]\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str(), r.seconds);
        ok = ok && r.passed;
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Learn Hamiltonian systems from sparse trajectory data with kernel methods"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::string config_path, out_dir;
    int jobs = 1;
    auto *run = app.add_subcommand("run", "Run an experiment sweep");
    run->add_option("--config", config_path, "Config file")->required();
    run->add_option("--jobs", jobs, "Cells to run in parallel");
    run->add_option("--out", out_dir, "Output directory (overrides output_dir in the config)");

    std::string results, format = "pretty";
    auto *table = app.add_subcommand("table", "Render errors.csv from a results directory");
    table->add_option("--results", results, "Results directory")->required();
    table->add_option("--format", format, "csv or pretty")->check(CLI::IsMember({"csv", "pretty"}));

    auto *check = app.add_subcommand("check", "Run the property suite on small instances");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : exit_config_error;
    }

    try {
        if (*run) return cmd_run(config_path, jobs, out_dir);
        if (*table) return cmd_table(results, format);
        if (*check) return cmd_check();
    } catch (const std::exception &err) {
        std::cerr << "error: " << err.what() << "\n";
        return exit_total_failure;
    }
    return 0;
}
