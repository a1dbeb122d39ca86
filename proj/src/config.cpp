#include "hamlearn/config.hpp"

#include "hamlearn/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace hamlearn {

using nlohmann::json;

ConfigError::ConfigError(const std::string &source, int line, const std::string &message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + message), line_(line), message_(message) {}

Ridges RidgeConfig::for_method(Method method) const {
    Ridges r;
    r.trajectory_q = method == Method::two_step ? lambda_q : lambda_1;
    r.trajectory_p = method == Method::two_step ? lambda_p : lambda_2;
    r.hamiltonian_p = lambda;
    r.hamiltonian_q = lambda;
    r.hamiltonian = lambda;
    return r;
}

ExperimentOptions ExperimentConfig::options_for(Method method) const {
    ExperimentOptions o;
    o.time_kernel = KernelSpec::gaussian_time(time_lengthscale);
    o.ridges = ridges.for_method(method);
    o.gradient_mode = gradient_mode;
    o.lbfgs = lbfgs;
    o.grid = grid;
    o.forecast = forecast;
    o.keep_trajectories = dump_trajectories;
    return o;
}

namespace {

int line_of(const std::string &text, std::size_t pos) {
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(std::min(pos, text.size())), '\n'));
}

// Walks the raw text to find where a key path was written, so semantic
// errors can point at a line even though the parsed tree has no positions.
class Locator {
public:
    Locator(const std::string &text, std::string source) : text_(text), source_(std::move(source)) {}

    [[nodiscard]] int line(const std::vector<std::string> &path) const {
        std::size_t pos = 0;
        for (const std::string &key : path) {
            const std::size_t found = text_.find("\"" + key + "\"", pos);
            if (found == std::string::npos) return 0;
            pos = found;
        }
        return path.empty() ? 0 : line_of(text_, pos);
    }

    [[noreturn]] void fail(const std::vector<std::string> &path, const std::string &message) const {
        std::string where;
        for (const std::string &key : path) where += (where.empty() ? "" : ".") + key;
        throw ConfigError(source_, line(path), (where.empty() ? "" : where + ": ") + message);
    }

private:
    const std::string &text_;
    std::string source_;
};

void reject_unknown_keys(const Locator &loc, const json &obj, const std::vector<std::string> &path, const std::set<std::string> &known) {
    for (const auto &item : obj.items()) {
        if (!known.contains(item.key())) {
            std::vector<std::string> p = path;
            p.push_back(item.key());
            loc.fail(p, "unknown key");
        }
    }
}

double number(const Locator &loc, const json &v, const std::vector<std::string> &path) {
    if (!v.is_number()) loc.fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) loc.fail(path, "expected a finite number");
    return x;
}

double positive(const Locator &loc, const json &v, const std::vector<std::string> &path) {
    const double x = number(loc, v, path);
    if (!(x > 0.0)) loc.fail(path, "must be positive");
    return x;
}

double non_negative(const Locator &loc, const json &v, const std::vector<std::string> &path) {
    const double x = number(loc, v, path);
    if (x < 0.0) loc.fail(path, "must be non-negative");
    return x;
}

long long integer(const Locator &loc, const json &v, const std::vector<std::string> &path) {
    if (!v.is_number_integer()) loc.fail(path, "expected an integer");
    return v.get<long long>();
}

std::string string(const Locator &loc, const json &v, const std::vector<std::string> &path) {
    if (!v.is_string()) loc.fail(path, "expected a string");
    return v.get<std::string>();
}

const json &non_empty_array(const Locator &loc, const json &root, const std::string &key) {
    if (!root.contains(key)) loc.fail({}, "missing required key '" + key + "'");
    const json &v = root.at(key);
    if (!v.is_array()) loc.fail({key}, "expected a list");
    if (v.empty()) loc.fail({key}, "the sweep list is empty");
    return v;
}

NamedKernel parse_kernel(const Locator &loc, const json &v) {
    const std::vector<std::string> path{"kernels"};
    std::string family_name;
    std::string label;
    double lengthscale = 1.0;
    int degree = 3;
    std::optional<double> offset;
    if (v.is_string()) {
        family_name = v.get<std::string>();
    } else if (v.is_object()) {
        reject_unknown_keys(loc, v, path, {"family", "lengthscale", "degree", "offset", "label"});
        if (!v.contains("family")) loc.fail(path, "kernel entry needs a 'family'");
        family_name = string(loc, v.at("family"), {"kernels", "family"});
        if (v.contains("label")) label = string(loc, v.at("label"), {"kernels", "label"});
        if (v.contains("lengthscale")) lengthscale = positive(loc, v.at("lengthscale"), {"kernels", "lengthscale"});
        if (v.contains("degree")) degree = static_cast<int>(integer(loc, v.at("degree"), {"kernels", "degree"}));
        if (v.contains("offset")) offset = number(loc, v.at("offset"), {"kernels", "offset"});
    } else {
        loc.fail(path, "kernel entries are family names or objects");
    }
    try {
        const KernelSpec spec(kernel_family_from_string(family_name), lengthscale, degree, offset);
        if (!spec.is_state_kernel()) loc.fail(path, "'" + family_name + "' is a time kernel and cannot model H");
        if (label.empty()) label = family_name;
        // Labels end up in file names.
        if (!std::all_of(label.begin(), label.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; })) {
            loc.fail(path, "kernel label '" + label + "' may only use letters, digits, '_' and '-'");
        }
        return {label, spec};
    } catch (const ContractError &err) {
        loc.fail(path, err.what());
    }
}

}  // namespace

ExperimentConfig parse_config(const std::string &text, const std::string &source) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error &err) {
        const std::string what = err.what();
        const std::size_t cut = what.find("parse error");
        throw ConfigError(source, line_of(text, err.byte > 0 ? err.byte - 1 : 0), cut == std::string::npos ? what : what.substr(cut));
    }
    const Locator loc(text, source);
    if (!root.is_object()) throw ConfigError(source, 1, "the config must be an object");
    reject_unknown_keys(loc, root, {},
                        {"systems", "kernels", "methods", "sparsities", "seeds", "ridges", "time_lengthscale", "grid", "integrator", "lbfgs",
                         "gradient_mode", "output_dir", "dump_trajectories"});

    ExperimentConfig cfg;
    for (const json &v : non_empty_array(loc, root, "systems")) {
        try {
            cfg.systems.push_back(system_from_string(string(loc, v, {"systems"})));
        } catch (const ContractError &err) {
            loc.fail({"systems"}, err.what());
        }
    }
    for (const json &v : non_empty_array(loc, root, "kernels")) cfg.kernels.push_back(parse_kernel(loc, v));
    for (const json &v : non_empty_array(loc, root, "methods")) {
        try {
            cfg.methods.push_back(method_from_string(string(loc, v, {"methods"})));
        } catch (const ContractError &err) {
            loc.fail({"methods"}, err.what());
        }
    }
    for (const json &v : non_empty_array(loc, root, "sparsities")) {
        const double a = number(loc, v, {"sparsities"});
        if (!(a >= 0.0 && a < 1.0)) loc.fail({"sparsities"}, "sparsity " + v.dump() + " is outside [0, 1)");
        cfg.sparsities.push_back(a);
    }

    if (!root.contains("seeds")) {
        for (std::uint64_t s = 0; s < 10; ++s) cfg.seeds.push_back(s);
    } else if (root.at("seeds").is_number_integer()) {
        const long long count = integer(loc, root.at("seeds"), {"seeds"});
        if (count < 1) loc.fail({"seeds"}, "seed count must be at least 1");
        for (long long s = 0; s < count; ++s) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    } else {
        for (const json &v : non_empty_array(loc, root, "seeds")) {
            if (!v.is_number_unsigned()) loc.fail({"seeds"}, "seeds must be non-negative integers");
            cfg.seeds.push_back(v.get<std::uint64_t>());
        }
    }

    // Labels name output files, so they must be unique, and duplicated sweep
    // entries would overwrite each other.
    std::set<std::string> labels;
    for (const NamedKernel &k : cfg.kernels) {
        if (!labels.insert(k.label).second) loc.fail({"kernels"}, "duplicate kernel label '" + k.label + "'");
    }
    auto check_unique = [&](auto values, const std::string &key) {
        std::sort(values.begin(), values.end());
        if (std::adjacent_find(values.begin(), values.end()) != values.end()) loc.fail({key}, "duplicate entry");
    };
    check_unique(cfg.systems, "systems");
    check_unique(cfg.methods, "methods");
    check_unique(cfg.sparsities, "sparsities");
    check_unique(cfg.seeds, "seeds");

    for (SystemId s : cfg.systems) {
        const SystemSpec spec = system_spec(s);
        for (const NamedKernel &k : cfg.kernels) {
            if (std::find(spec.admissible_kernels.begin(), spec.admissible_kernels.end(), k.spec.family()) == spec.admissible_kernels.end()) {
                loc.fail({"kernels"}, "kernel '" + k.label + "' is not admissible for " + std::string(to_string(s)));
            }
        }
    }

    if (root.contains("ridges")) {
        const json &r = root.at("ridges");
        if (!r.is_object()) loc.fail({"ridges"}, "expected an object");
        reject_unknown_keys(loc, r, {"ridges"}, {"lambda_q", "lambda_p", "lambda_1", "lambda_2", "lambda"});
        auto get = [&](const char *key, double &out) {
            if (r.contains(key)) out = non_negative(loc, r.at(key), {"ridges", key});
        };
        get("lambda_q", cfg.ridges.lambda_q);
        get("lambda_p", cfg.ridges.lambda_p);
        get("lambda_1", cfg.ridges.lambda_1);
        get("lambda_2", cfg.ridges.lambda_2);
        get("lambda", cfg.ridges.lambda);
    }
    if (root.contains("time_lengthscale")) cfg.time_lengthscale = positive(loc, root.at("time_lengthscale"), {"time_lengthscale"});

    if (root.contains("grid")) {
        const json &g = root.at("grid");
        if (!g.is_object()) loc.fail({"grid"}, "expected an object");
        reject_unknown_keys(loc, g, {"grid"}, {"num_collocation", "t_final", "num_extrapolation", "random"});
        if (g.contains("num_collocation")) {
            const long long n = integer(loc, g.at("num_collocation"), {"grid", "num_collocation"});
            if (n < 2) loc.fail({"grid", "num_collocation"}, "need at least 2 collocation times");
            cfg.grid.num_collocation = n;
        }
        if (g.contains("num_extrapolation")) {
            const long long n = integer(loc, g.at("num_extrapolation"), {"grid", "num_extrapolation"});
            if (n < 1) loc.fail({"grid", "num_extrapolation"}, "need at least 1 extrapolation time");
            cfg.grid.num_extrapolation = n;
        }
        if (g.contains("t_final")) cfg.grid.t_final = positive(loc, g.at("t_final"), {"grid", "t_final"});
        if (g.contains("random")) {
            if (!g.at("random").is_boolean()) loc.fail({"grid", "random"}, "expected true or false");
            cfg.grid.random_grid = g.at("random").get<bool>();
        }
    }
    // Every cell must keep at least one observation.
    for (double a : cfg.sparsities) {
        if (observed_count(cfg.grid.num_collocation, a) < 1) loc.fail({"sparsities"}, "sparsity leaves no observed points");
    }

    if (root.contains("integrator")) {
        const json &i = root.at("integrator");
        if (!i.is_object()) loc.fail({"integrator"}, "expected an object");
        reject_unknown_keys(loc, i, {"integrator"}, {"rtol", "atol", "max_step", "dense_output"});
        if (i.contains("rtol")) cfg.forecast.rtol = positive(loc, i.at("rtol"), {"integrator", "rtol"});
        if (i.contains("atol")) cfg.forecast.atol = positive(loc, i.at("atol"), {"integrator", "atol"});
        if (i.contains("max_step")) cfg.forecast.max_step = positive(loc, i.at("max_step"), {"integrator", "max_step"});
        if (i.contains("dense_output")) {
            if (!i.at("dense_output").is_boolean()) loc.fail({"integrator", "dense_output"}, "expected true or false");
            cfg.forecast.dense_output = i.at("dense_output").get<bool>();
        }
    }

    if (root.contains("lbfgs")) {
        const json &l = root.at("lbfgs");
        if (!l.is_object()) loc.fail({"lbfgs"}, "expected an object");
        reject_unknown_keys(loc, l, {"lbfgs"}, {"memory", "max_iterations", "gradient_tolerance"});
        if (l.contains("memory")) {
            cfg.lbfgs.memory = static_cast<int>(integer(loc, l.at("memory"), {"lbfgs", "memory"}));
            if (cfg.lbfgs.memory < 1) loc.fail({"lbfgs", "memory"}, "must be at least 1");
        }
        if (l.contains("max_iterations")) {
            cfg.lbfgs.max_iterations = static_cast<int>(integer(loc, l.at("max_iterations"), {"lbfgs", "max_iterations"}));
            if (cfg.lbfgs.max_iterations < 0) loc.fail({"lbfgs", "max_iterations"}, "must be non-negative");
        }
        if (l.contains("gradient_tolerance")) {
            cfg.lbfgs.gradient_tolerance = positive(loc, l.at("gradient_tolerance"), {"lbfgs", "gradient_tolerance"});
        }
    }

    if (root.contains("gradient_mode")) {
        try {
            cfg.gradient_mode = gradient_mode_from_string(string(loc, root.at("gradient_mode"), {"gradient_mode"}));
        } catch (const ContractError &err) {
            loc.fail({"gradient_mode"}, err.what());
        }
    }
    if (root.contains("output_dir")) {
        cfg.output_dir = string(loc, root.at("output_dir"), {"output_dir"});
        if (cfg.output_dir.empty()) loc.fail({"output_dir"}, "must not be empty");
    }
    if (root.contains("dump_trajectories")) {
        if (!root.at("dump_trajectories").is_boolean()) loc.fail({"dump_trajectories"}, "expected true or false");
        cfg.dump_trajectories = root.at("dump_trajectories").get<bool>();
    }

    cfg.echo = root.dump(2);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

void apply_seed_offset(ExperimentConfig &config) {
    const char *raw = std::getenv("HAMLEARN_SEED_OFFSET");
    if (raw == nullptr || *raw == '\0') return;
    char *end = nullptr;
    errno = 0;
    const unsigned long long offset = std::strtoull(raw, &end, 10);
    if (errno != 0 || end == raw || *end != '\0' || std::string(raw).find('-') != std::string::npos) {
        throw ConfigError("HAMLEARN_SEED_OFFSET", 0, "expected a non-negative integer, got '" + std::string(raw) + "'");
    }
    for (std::uint64_t &s : config.seeds) s += offset;
}

}  // namespace hamlearn
