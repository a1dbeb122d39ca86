#include "hamlearn/experiment.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hamlearn {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_errors_csv(const std::vector<ErrorRow> &rows) {
    std::string out = std::string(kErrorsHeader) + "\n";
    for (const ErrorRow &r : rows) {
        out += fmt::format("{},{},{},{:.17g},{},{},{:.17g},{:.17g},{},{}\n", r.system, r.kernel, r.method, r.sparsity, r.variable, r.phase, r.mean,
                           r.std, r.n_seeds, r.n_diverged);
    }
    return out;
}

namespace {

double parse_double(const std::string &s, int line) {
    char *end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') throw std::runtime_error(fmt::format("errors file line {}: '{}' is not a number", line, s));
    return v;
}

int parse_int(const std::string &s, int line) {
    char *end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0') throw std::runtime_error(fmt::format("errors file line {}: '{}' is not an integer", line, s));
    return static_cast<int>(v);
}

}  // namespace

std::vector<ErrorRow> parse_errors_csv(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kErrorsHeader) throw std::runtime_error("errors file has an unexpected header");
    std::vector<ErrorRow> rows;
    int number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            f.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (f.size() != 10) throw std::runtime_error(fmt::format("errors file line {}: expected 10 fields, got {}", number, f.size()));
        ErrorRow r;
        r.system = f[0];
        r.kernel = f[1];
        r.method = f[2];
        r.sparsity = parse_double(f[3], number);
        r.variable = f[4];
        r.phase = f[5];
        r.mean = parse_double(f[6], number);
        r.std = parse_double(f[7], number);
        r.n_seeds = parse_int(f[8], number);
        r.n_diverged = parse_int(f[9], number);
        if (r.variable != "q" && r.variable != "p") throw std::runtime_error(fmt::format("errors file line {}: bad variable", number));
        if (r.phase != "interpolation" && r.phase != "extrapolation") {
            throw std::runtime_error(fmt::format("errors file line {}: bad phase", number));
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string sparsity_tag(double sparsity) { return fmt::format("{:g}", sparsity); }

std::vector<ErrorRow> error_rows(const CellRecord &cell) {
    std::vector<ErrorRow> rows;
    if (!cell.result) return rows;
    const CellResult &r = *cell.result;
    for (Variable var : {Variable::q, Variable::p}) {
        for (Phase phase : {Phase::interpolation, Phase::extrapolation}) {
            const ErrorSummary &s = r.summary[static_cast<std::size_t>(phase)][static_cast<std::size_t>(var)];
            rows.push_back({std::string(to_string(cell.system)), cell.kernel_label, std::string(to_string(cell.method)), cell.sparsity,
                            std::string(to_string(var)), std::string(to_string(phase)), s.mean, s.std, r.n_seeds, r.n_diverged});
        }
    }
    return rows;
}

namespace {

void write_file(const fs::path &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string trajectory_csv(const SeedOutcome &o) {
    const Dataset &d = o.data;
    const Eigen::Index dim = 2 * d.dof;
    std::string out = "t";
    for (Eigen::Index k = 1; k <= dim; ++k) out += fmt::format(",truth_{}", k);
    for (Eigen::Index k = 1; k <= dim; ++k) out += fmt::format(",pred_{}", k);
    out += ",observed_flag\n";

    std::vector<char> observed(static_cast<std::size_t>(d.num_collocation()), 0);
    for (Eigen::Index i : d.observed) observed[static_cast<std::size_t>(i)] = 1;
    auto row = [&](double t, const auto &truth, const auto &pred, int flag) {
        out += fmt::format("{:.17g}", t);
        for (Eigen::Index k = 0; k < dim; ++k) out += fmt::format(",{:.17g}", truth(k));
        for (Eigen::Index k = 0; k < dim; ++k) out += fmt::format(",{:.17g}", pred(k));
        out += fmt::format(",{}\n", flag);
    };
    for (Eigen::Index i = 0; i < d.num_collocation(); ++i) row(d.t_col(i), d.y_col.row(i), o.pred_col.row(i), observed[static_cast<std::size_t>(i)]);
    for (Eigen::Index i = 0; i < d.t_ext.size(); ++i) row(d.t_ext(i), d.y_ext.row(i), o.pred_ext.row(i), 0);
    return out;
}

json seed_json(const SeedOutcome &o) {
    json j{{"seed", o.seed}, {"failed", o.failed}, {"diverged", o.diverged}, {"seconds", o.seconds}};
    if (o.failed) j["error"] = o.error;
    if (o.optimizer) {
        j["optimizer"] = {{"iterations", o.optimizer->iterations},
                          {"evaluations", o.optimizer->evaluations},
                          {"termination", std::string(to_string(o.optimizer->reason))},
                          {"warning", o.optimizer->warning},
                          {"initial_value", o.optimizer->initial_value},
                          {"final_value", o.optimizer->final_value},
                          {"gradient_inf_norm", o.optimizer->gradient_inf_norm}};
    }
    return j;
}

}  // namespace

RunSummary run_sweep(const ExperimentConfig &config, int jobs, const fs::path &output_dir) {
    if (jobs < 1) throw std::invalid_argument("--jobs must be at least 1");
    const auto start = std::chrono::steady_clock::now();
    fs::create_directories(output_dir);

    RunSummary summary;
    summary.output_dir = output_dir;
    for (SystemId s : config.systems) {
        for (const NamedKernel &k : config.kernels) {
            for (Method m : config.methods) {
                for (double a : config.sparsities) summary.cells.push_back({s, k.label, m, a, std::nullopt, {}, 0.0});
            }
        }
    }

    auto kernel_for = [&](const std::string &label) -> const KernelSpec & {
        for (const NamedKernel &k : config.kernels) {
            if (k.label == label) return k.spec;
        }
        throw std::logic_error("unknown kernel label");
    };

    const auto n_cells = static_cast<long>(summary.cells.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
    for (long c = 0; c < n_cells; ++c) {
        CellRecord &cell = summary.cells[static_cast<std::size_t>(c)];
        const auto cell_start = std::chrono::steady_clock::now();
        try {
            CellResult result = run_experiment(cell.system, kernel_for(cell.kernel_label), cell.method, cell.sparsity, config.seeds,
                                               config.options_for(cell.method));
            if (config.dump_trajectories) {
                for (SeedOutcome &o : result.outcomes) {
                    if (o.failed) continue;
                    const std::string name = fmt::format("traj_{}_{}_{}_{}_{}.csv", to_string(cell.system), cell.kernel_label, to_string(cell.method),
                                                         sparsity_tag(cell.sparsity), o.seed);
                    write_file(output_dir / name, trajectory_csv(o));
                    // The dump is all we needed the arrays for.
                    o.data = Dataset{};
                    o.pred_col.resize(0, 0);
                    o.pred_ext.resize(0, 0);
                }
            }
            cell.result = std::move(result);
        } catch (const std::exception &err) {
            cell.error = err.what();
        }
        cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - cell_start).count();
    }

    std::vector<ErrorRow> rows;
    int failed_cells = 0;
    int failed_seeds = 0;
    for (const CellRecord &cell : summary.cells) {
        if (!cell.result) {
            ++failed_cells;
            continue;
        }
        failed_seeds += cell.result->n_failed;
        for (ErrorRow &r : error_rows(cell)) rows.push_back(std::move(r));
    }
    write_file(output_dir / "errors.csv", format_errors_csv(rows));

    if (failed_cells == static_cast<int>(summary.cells.size())) {
        summary.exit_code = exit_total_failure;
    } else if (failed_cells > 0 || failed_seeds > 0) {
        summary.exit_code = exit_partial_failure;
    }
    summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json cells = json::array();
    for (const CellRecord &cell : summary.cells) {
        json j{{"system", std::string(to_string(cell.system))},
               {"kernel", cell.kernel_label},
               {"method", std::string(to_string(cell.method))},
               {"sparsity", cell.sparsity},
               {"status", cell.result ? "ok" : "failed"},
               {"seconds", cell.seconds}};
        if (cell.result) {
            j["n_seeds"] = cell.result->n_seeds;
            j["n_failed"] = cell.result->n_failed;
            j["n_diverged"] = cell.result->n_diverged;
            json seeds = json::array();
            for (const SeedOutcome &o : cell.result->outcomes) seeds.push_back(seed_json(o));
            j["seeds"] = std::move(seeds);
        } else {
            j["error"] = cell.error;
        }
        cells.push_back(std::move(j));
    }
    const char *offset = std::getenv("HAMLEARN_SEED_OFFSET");
    json manifest{{"tool", "hamlearn"},
                  {"version", kVersion},
                  {"compiler", fmt::format("gcc {}.{}.{}", __GNUC__, __GNUC_MINOR__, __GNUC_PATCHLEVEL__)},
                  {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
                  {"openmp", _OPENMP},
                  {"jobs", jobs},
                  {"seed_offset", offset != nullptr ? offset : "0"},
                  {"seeds", config.seeds},
                  {"config", json::parse(config.echo.empty() ? "{}" : config.echo)},
                  {"wall_seconds", summary.seconds},
                  {"exit_code", summary.exit_code},
                  {"failed_cells", failed_cells},
                  {"failed_seeds", failed_seeds},
                  {"cells", std::move(cells)}};
    write_file(output_dir / "manifest.json", manifest.dump(2) + "\n");
    return summary;
}

}  // namespace hamlearn
