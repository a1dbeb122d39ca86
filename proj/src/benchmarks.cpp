#include "hamlearn/benchmarks.hpp"

#include "hamlearn/errors.hpp"
#include "hamlearn/two_step.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace hamlearn {

std::string_view to_string(SystemId system) {
    switch (system) {
        case SystemId::mass_spring: return "mass_spring";
        case SystemId::two_mass_three_spring: return "two_mass_three_spring";
        case SystemId::henon_heiles: return "henon_heiles";
        case SystemId::pendulum: return "pendulum";
    }
    return "unknown";
}

SystemId system_from_string(std::string_view name) {
    for (SystemId id : all_systems()) {
        if (to_string(id) == name) return id;
    }
    throw ContractError("unknown system '" + std::string(name) + "'");
}

std::vector<SystemId> all_systems() {
    return {SystemId::mass_spring, SystemId::two_mass_three_spring, SystemId::henon_heiles, SystemId::pendulum};
}

SystemSpec system_spec(SystemId system) {
    const std::vector<KernelFamily> state_kernels{KernelFamily::gaussian_state, KernelFamily::separable_polynomial,
                                                  KernelFamily::additive_poly_gaussian};
    switch (system) {
        case SystemId::mass_spring: return {system, 1, Eigen::Vector2d(0.0, 1.0), state_kernels};
        case SystemId::two_mass_three_spring:
        case SystemId::henon_heiles: return {system, 2, Eigen::Vector4d(0.2, -0.1, 0.1, -0.1), state_kernels};
        case SystemId::pendulum: return {system, 1, Eigen::Vector2d(0.95 * std::numbers::pi, 0.0), state_kernels};
    }
    throw ContractError("unknown system");
}

namespace {

void check_state(SystemId system, std::size_t size) {
    if (static_cast<Eigen::Index>(size) != 2 * system_spec(system).dof) {
        throw ContractError(std::string(to_string(system)) + " expects a state of dimension " + std::to_string(2 * system_spec(system).dof));
    }
}

}  // namespace

double true_hamiltonian(SystemId system, std::span<const double> y) {
    check_state(system, y.size());
    switch (system) {
        case SystemId::mass_spring: return 0.5 * (y[0] * y[0] + y[1] * y[1]);
        case SystemId::two_mass_three_spring: {
            const double q1 = y[0], q2 = y[1], p1 = y[2], p2 = y[3];
            return 0.5 * (p1 * p1 + p2 * p2) + 0.5 * (q1 * q1 + q2 * q2 + (q2 - q1) * (q2 - q1));
        }
        case SystemId::henon_heiles: {
            const double q1 = y[0], q2 = y[1], p1 = y[2], p2 = y[3];
            return 0.5 * (p1 * p1 + p2 * p2) + 0.5 * (q1 * q1 + q2 * q2) + q1 * q1 * q2 - q2 * q2 * q2 / 3.0;
        }
        case SystemId::pendulum: return 0.5 * y[1] * y[1] - std::cos(y[0]);
    }
    return 0.0;
}

double true_hamiltonian(SystemId system, const Eigen::VectorXd &y) { return true_hamiltonian(system, as_span(y)); }

void true_gradient(SystemId system, std::span<const double> y, std::span<double> out) {
    check_state(system, y.size());
    if (out.size() != y.size()) throw ContractError("gradient buffer has wrong size");
    switch (system) {
        case SystemId::mass_spring:
            out[0] = y[0];
            out[1] = y[1];
            return;
        case SystemId::two_mass_three_spring:
            out[0] = 2.0 * y[0] - y[1];
            out[1] = 2.0 * y[1] - y[0];
            out[2] = y[2];
            out[3] = y[3];
            return;
        case SystemId::henon_heiles:
            out[0] = y[0] + 2.0 * y[0] * y[1];
            out[1] = y[1] + y[0] * y[0] - y[1] * y[1];
            out[2] = y[2];
            out[3] = y[3];
            return;
        case SystemId::pendulum:
            out[0] = std::sin(y[0]);
            out[1] = y[1];
            return;
    }
}

VectorField analytic_field(SystemId system) {
    return {2 * system_spec(system).dof, [system](std::span<const double> y, std::span<double> grad) { true_gradient(system, y, grad); }};
}

std::uint64_t SplitMix64::next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t SplitMix64::below(std::uint64_t bound) {
    if (bound == 0) throw ContractError("empty sampling range");
    // Rejection keeps the draw exactly uniform.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % bound;
}

Eigen::Index observed_count(Eigen::Index n, double sparsity) {
    if (!(sparsity >= 0.0 && sparsity < 1.0)) throw ContractError("sparsity must lie in [0, 1), got " + std::to_string(sparsity));
    // The epsilon keeps e.g. (1 - 0.9) * 200 from flooring to 19.
    return static_cast<Eigen::Index>(std::floor((1.0 - sparsity) * static_cast<double>(n) + 1e-9));
}

std::vector<Eigen::Index> sample_indices(Eigen::Index n, Eigen::Index count, std::uint64_t seed) {
    if (count < 0 || count > n) throw ContractError("cannot draw " + std::to_string(count) + " of " + std::to_string(n) + " indices");
    std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), Eigen::Index{0});
    SplitMix64 rng(seed);
    for (Eigen::Index i = 0; i < count; ++i) {
        const auto j = i + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(count));
    std::sort(pool.begin(), pool.end());
    return pool;
}

Dataset generate_dataset(SystemId system, double sparsity, std::uint64_t seed, const GridOptions &grid) {
    if (grid.num_collocation < 2) throw ContractError("need at least two collocation times");
    if (grid.num_extrapolation < 0) throw ContractError("extrapolation count must be non-negative");
    if (!(grid.t_final > 0.0)) throw ContractError("t_final must be positive");
    const SystemSpec spec = system_spec(system);
    const Eigen::Index n = grid.num_collocation;

    Dataset data;
    data.dof = spec.dof;
    data.sparsity = sparsity;
    data.seed = seed;
    if (grid.random_grid) {
        // Separate stream from the subsampling draw; t = 0 is always kept.
        SplitMix64 rng(seed ^ 0x5851f42d4c957f2dULL);
        data.t_col.resize(n);
        data.t_col(0) = 0.0;
        for (Eigen::Index i = 1; i < n; ++i) data.t_col(i) = grid.t_final * static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
        std::sort(data.t_col.begin() + 1, data.t_col.end());
        for (Eigen::Index i = 1; i < n; ++i) {
            if (!(data.t_col(i) > data.t_col(i - 1))) throw ContractError("random grid produced a repeated time; use another seed");
        }
    } else {
        data.t_col = Eigen::VectorXd::LinSpaced(n, 0.0, grid.t_final);
    }
    data.t_ext.resize(grid.num_extrapolation);
    for (Eigen::Index k = 0; k < grid.num_extrapolation; ++k) {
        data.t_ext(k) = grid.t_final + grid.t_final * static_cast<double>(k + 1) / static_cast<double>(grid.num_extrapolation);
    }

    Eigen::VectorXd all_times(n + data.t_ext.size());
    all_times << data.t_col, data.t_ext;
    const Trajectory truth = integrate(analytic_field(system), spec.y0, 0.0, all_times, grid.integrator);
    data.y_col = truth.states.topRows(n);
    data.y_ext = truth.states.bottomRows(data.t_ext.size());
    data.observed = sample_indices(n, observed_count(n, sparsity), seed);
    return data;
}

double relative_error(const Eigen::MatrixXd &pred, const Eigen::MatrixXd &truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) throw ContractError("prediction and truth differ in shape");
    if (truth.size() == 0) return 0.0;
    const double denom = truth.squaredNorm();
    if (!(denom > 0.0)) throw ContractError("relative error is undefined for an identically zero truth");
    return std::sqrt((truth - pred).squaredNorm() / denom);
}

std::string_view to_string(Method method) { return method == Method::two_step ? "two_step" : "one_step"; }

Method method_from_string(std::string_view name) {
    if (name == "two_step") return Method::two_step;
    if (name == "one_step") return Method::one_step;
    throw ContractError("unknown method '" + std::string(name) + "'");
}

std::string_view to_string(Phase phase) { return phase == Phase::interpolation ? "interpolation" : "extrapolation"; }
std::string_view to_string(Variable variable) { return variable == Variable::q ? "q" : "p"; }

namespace {

Eigen::MatrixXd select_rows(const Eigen::MatrixXd &m, const std::vector<Eigen::Index> &rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = m.row(rows[k]);
    return out;
}

std::array<double, 2> split_errors(const Eigen::MatrixXd &pred, const Eigen::MatrixXd &truth, Eigen::Index dof) {
    return {relative_error(pred.leftCols(dof), truth.leftCols(dof)), relative_error(pred.rightCols(dof), truth.rightCols(dof))};
}

}  // namespace

SeedOutcome run_seed(SystemId system, const KernelSpec &state_kernel, Method method, double sparsity, std::uint64_t seed,
                     const ExperimentOptions &options) {
    const auto start = std::chrono::steady_clock::now();
    const SystemSpec spec = system_spec(system);
    if (std::find(spec.admissible_kernels.begin(), spec.admissible_kernels.end(), state_kernel.family()) == spec.admissible_kernels.end()) {
        throw ContractError(std::string(to_string(state_kernel.family())) + " is not admissible for " + std::string(to_string(system)));
    }

    SeedOutcome out;
    out.seed = seed;
    Dataset data = generate_dataset(system, sparsity, seed, options.grid);
    const Eigen::Index m = data.dof;

    TrajectoryModel model = fit_two_step(data, options.time_kernel, state_kernel, options.ridges);
    if (method == Method::one_step) {
        const OneStepProblem problem(data, options.time_kernel, state_kernel, options.ridges, options.gradient_mode);
        MinimizeResult result = minimize(problem, warm_start(model, data.t_col), options.lbfgs);
        out.optimizer = std::move(result.diagnostics);
        model = extract_model(problem, result.slack);
    }

    // Interpolation: the reconstruction at the unobserved collocation times.
    const Eigen::MatrixXd pred_col = model.states(data.t_col);
    const std::vector<Eigen::Index> hidden = data.unobserved();
    const auto interp = split_errors(select_rows(pred_col, hidden), select_rows(data.y_col, hidden), m);

    // Extrapolation: forecast from the reconstructed initial state.
    const Eigen::VectorXd y0 = model.states(data.t_col.head(1)).row(0).transpose();
    const Trajectory fc = forecast(model.hamiltonian, y0, data.t_col(0), data.t_ext, options.forecast);
    const Eigen::Index produced = fc.states.rows();
    Eigen::MatrixXd pred_ext = Eigen::MatrixXd::Constant(data.t_ext.size(), 2 * m, std::numeric_limits<double>::quiet_NaN());
    if (produced > 0) pred_ext.topRows(produced) = fc.states;
    std::array<double, 2> extrap{};
    if (!fc.diverged || produced > 0) {
        extrap = split_errors(fc.states, data.y_ext.topRows(produced), m);
    } else {
        // Nothing reached the window: hold the last good state.
        const Eigen::MatrixXd held = fc.last_state.transpose().replicate(data.t_ext.size(), 1);
        extrap = split_errors(held, data.y_ext, m);
    }

    out.diverged = fc.diverged;
    out.errors[0] = interp;
    out.errors[1] = extrap;
    if (options.keep_trajectories) {
        out.data = std::move(data);
        out.pred_col = pred_col;
        out.pred_ext = std::move(pred_ext);
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

CellResult run_experiment(SystemId system, const KernelSpec &state_kernel, Method method, double sparsity,
                          const std::vector<std::uint64_t> &seeds, const ExperimentOptions &options) {
    if (seeds.empty()) throw ContractError("an experiment needs at least one seed");
    (void)observed_count(options.grid.num_collocation, sparsity);  // validates the sparsity
    // Without subsampling every seed sees the same data.
    const std::size_t n_runs = sparsity == 0.0 ? 1 : seeds.size();

    CellResult cell{system, state_kernel, method, sparsity, {}, 0, 0, 0, {}};
    cell.outcomes.reserve(n_runs);
    for (std::size_t k = 0; k < n_runs; ++k) {
        try {
            cell.outcomes.push_back(run_seed(system, state_kernel, method, sparsity, seeds[k], options));
        } catch (const ContractError &) {
            throw;
        } catch (const std::exception &err) {
            SeedOutcome failed;
            failed.seed = seeds[k];
            failed.failed = true;
            failed.error = err.what();
            cell.outcomes.push_back(std::move(failed));
        }
    }

    for (const SeedOutcome &o : cell.outcomes) {
        if (o.failed) {
            ++cell.n_failed;
            continue;
        }
        ++cell.n_seeds;
        if (o.diverged) ++cell.n_diverged;
    }
    if (cell.n_seeds == 0) {
        throw ExperimentFailure("every seed failed; first error: " + cell.outcomes.front().error);
    }

    for (std::size_t phase = 0; phase < 2; ++phase) {
        for (std::size_t var = 0; var < 2; ++var) {
            double sum = 0.0;
            for (const SeedOutcome &o : cell.outcomes) {
                if (!o.failed) sum += o.errors[phase][var];
            }
            const double mean = sum / cell.n_seeds;
            double sq = 0.0;
            for (const SeedOutcome &o : cell.outcomes) {
                if (!o.failed) sq += (o.errors[phase][var] - mean) * (o.errors[phase][var] - mean);
            }
            cell.summary[phase][var] = {mean, std::sqrt(sq / cell.n_seeds)};
        }
    }
    return cell;
}

}  // namespace hamlearn
