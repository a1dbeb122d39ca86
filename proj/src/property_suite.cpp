#include "hamlearn/property_suite.hpp"

#include "hamlearn/benchmarks.hpp"
#include "hamlearn/experiment.hpp"
#include "hamlearn/linalg.hpp"
#include "hamlearn/one_step.hpp"
#include "hamlearn/two_step.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unistd.h>

namespace hamlearn {

namespace {

double uniform(SplitMix64 &rng, double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
}

template <class F>
PropertyResult timed(const std::string &name, F &&body) {
    const auto start = std::chrono::steady_clock::now();
    PropertyResult r;
    r.name = name;
    try {
        body(r);
    } catch (const std::exception &err) {
        r.passed = false;
        r.detail = std::string("threw: ") + err.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

// Small sparse instance shared by the optimization checks.
Dataset small_dataset(SystemId system, Eigen::Index n, double sparsity, std::uint64_t seed) {
    GridOptions grid;
    grid.num_collocation = n;
    grid.t_final = 0.2 * static_cast<double>(n - 1);
    grid.num_extrapolation = 1;
    return generate_dataset(system, sparsity, seed, grid);
}

}  // namespace

PropertyResult check_kernel_derivatives(int cases, std::uint64_t seed) {
    return timed("kernel gradient and cross-Hessian vs finite differences", [&](PropertyResult &r) {
        SplitMix64 rng(seed);
        constexpr double h = 1e-5;
        double worst = 0.0;
        std::string worst_family;
        for (KernelFamily family :
             {KernelFamily::gaussian_time, KernelFamily::gaussian_state, KernelFamily::separable_polynomial, KernelFamily::additive_poly_gaussian}) {
            for (int c = 0; c < cases; ++c) {
                const std::size_t dim = family == KernelFamily::gaussian_time ? 1 : (c % 2 == 0 ? 2 : 4);
                const double theta = uniform(rng, 0.5, 2.0);
                const KernelSpec spec(family, theta, 2 + static_cast<int>(rng.below(3)));
                std::vector<double> x(dim), y(dim);
                for (std::size_t a = 0; a < dim; ++a) {
                    x[a] = uniform(rng, -1.5, 1.5);
                    y[a] = uniform(rng, -1.5, 1.5);
                }
                std::vector<double> grad(dim), hess(dim * dim), tmp(dim), plus(dim), minus(dim);
                kernel_grad_first(spec, x, y, grad);
                kernel_cross_hessian(spec, x, y, hess);
                const double k = std::abs(kernel_eval(spec, x, y));

                double err = 0.0, scale = k / theta;
                for (std::size_t a = 0; a < dim; ++a) {
                    tmp = x;
                    tmp[a] += h;
                    const double fp = kernel_eval(spec, tmp, y);
                    tmp[a] -= 2.0 * h;
                    const double fm = kernel_eval(spec, tmp, y);
                    err = std::max(err, std::abs((fp - fm) / (2.0 * h) - grad[a]));
                    scale = std::max(scale, std::abs(grad[a]));
                }
                const double grad_rel = err / scale;

                err = 0.0;
                scale = k / (theta * theta);
                for (std::size_t b = 0; b < dim; ++b) {
                    tmp = y;
                    tmp[b] += h;
                    kernel_grad_first(spec, x, tmp, plus);
                    tmp[b] -= 2.0 * h;
                    kernel_grad_first(spec, x, tmp, minus);
                    for (std::size_t a = 0; a < dim; ++a) {
                        err = std::max(err, std::abs((plus[a] - minus[a]) / (2.0 * h) - hess[a * dim + b]));
                        scale = std::max(scale, std::abs(hess[a * dim + b]));
                    }
                }
                const double rel = std::max(grad_rel, err / scale);
                if (rel > worst) {
                    worst = rel;
                    worst_family = std::string(to_string(family));
                }
            }
        }
        r.passed = worst < 1e-5;
        r.detail = fmt::format("{} cases per family, worst relative error {:.3g} ({})", cases, worst, worst_family);
    });
}

PropertyResult check_norm_identity(std::uint64_t seed) {
    return timed("representer norm identity", [&](PropertyResult &r) {
        SplitMix64 rng(seed);
        double worst = 0.0;
        for (int trial = 0; trial < 40; ++trial) {
            const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(29));
            const KernelSpec spec = KernelSpec::gaussian_state(uniform(rng, 0.5, 2.0));
            PointSet anchors(n, 2);
            for (Eigen::Index i = 0; i < n; ++i) anchors.row(i) << uniform(rng, -2, 2), uniform(rng, -2, 2);
            Eigen::VectorXd xi(n);
            for (Eigen::Index i = 0; i < n; ++i) xi(i) = uniform(rng, -1, 1);
            const double ridge = std::pow(10.0, uniform(rng, -6.0, -1.0));
            const NormIdentity id = norm_identity_check(spec, anchors, ridge, xi);
            worst = std::max(worst, std::abs(id.lhs - id.rhs) / id.rhs);
        }
        r.passed = worst < 1e-8;
        r.detail = fmt::format("40 Gram matrices with n <= 30, worst relative gap {:.3g}", worst);
    });
}

PropertyResult check_objective_gradient(std::uint64_t seed) {
    return timed("reduced-objective gradient vs finite differences", [&](PropertyResult &r) {
        SplitMix64 rng(seed);
        const KernelSpec time_kernel = KernelSpec::gaussian_time(1.0);
        double worst = 0.0;
        struct Case {
            SystemId system;
            Eigen::Index n;
            KernelSpec kernel;
        };
        const std::vector<Case> cases{{SystemId::mass_spring, 30, KernelSpec::separable_polynomial()},
                                      {SystemId::mass_spring, 24, KernelSpec::gaussian_state()},
                                      {SystemId::henon_heiles, 16, KernelSpec::separable_polynomial()},
                                      {SystemId::two_mass_three_spring, 16, KernelSpec::additive_poly_gaussian()}};
        for (const Case &c : cases) {
            const Dataset data = small_dataset(c.system, c.n, 0.5, rng.next());
            const OneStepProblem problem(data, time_kernel, c.kernel, Ridges{});
            const TrajectoryModel two = fit_two_step(data, time_kernel, c.kernel, Ridges{});
            Eigen::VectorXd z = warm_start(two, data.t_col).flatten();
            for (Eigen::Index k = 0; k < z.size(); ++k) z(k) += 0.05 * uniform(rng, -1, 1);

            Eigen::VectorXd grad;
            problem.evaluate(z, grad);
            Eigen::VectorXd fd(z.size()), scratch;
            for (Eigen::Index k = 0; k < z.size(); ++k) {
                const double h = 1e-6 * std::max(1.0, std::abs(z(k)));
                Eigen::VectorXd zp = z, zm = z;
                zp(k) += h;
                zm(k) -= h;
                fd(k) = (problem.evaluate(zp, scratch) - problem.evaluate(zm, scratch)) / (2.0 * h);
            }
            worst = std::max(worst, (fd - grad).lpNorm<Eigen::Infinity>() / grad.lpNorm<Eigen::Infinity>());
        }
        r.passed = worst < 1e-4;
        r.detail = fmt::format("{} instances with N <= 30, worst relative error {:.3g}", cases.size(), worst);
    });
}

PropertyResult check_integrator_accuracy() {
    return timed("integrator vs analytic mass-spring solution on [0, 80]", [&](PropertyResult &r) {
        const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(801, 0.0, 80.0);
        const Trajectory traj = integrate(analytic_field(SystemId::mass_spring), Eigen::Vector2d(0.0, 1.0), 0.0, times);
        double err = 0.0;
        for (Eigen::Index i = 0; i < times.size(); ++i) {
            err = std::max({err, std::abs(traj.states(i, 0) - std::sin(times(i))), std::abs(traj.states(i, 1) - std::cos(times(i)))});
        }
        r.passed = err < 1e-7;
        r.detail = fmt::format("max-abs error {:.3g}", err);
    });
}

PropertyResult check_energy_drift() {
    return timed("energy drift of generated ground truth", [&](PropertyResult &r) {
        double worst = 0.0;
        std::string detail;
        for (SystemId s : all_systems()) {
            const Dataset d = generate_dataset(s, 0.0, 0);
            const double h0 = true_hamiltonian(s, system_spec(s).y0);
            double drift = 0.0;
            for (const Eigen::MatrixXd *m : {&d.y_col, &d.y_ext}) {
                for (Eigen::Index i = 0; i < m->rows(); ++i) {
                    const Eigen::VectorXd y = m->row(i).transpose();
                    drift = std::max(drift, std::abs(true_hamiltonian(s, y) - h0));
                }
            }
            worst = std::max(worst, drift);
            detail += fmt::format("{}{} {:.3g}", detail.empty() ? "" : ", ", to_string(s), drift);
        }
        r.passed = worst < 1e-7;
        r.detail = detail;
    });
}

PropertyResult check_frozen_subproblem(std::uint64_t seed) {
    return timed("frozen-state subproblem: L-BFGS vs direct solve", [&](PropertyResult &r) {
        const KernelSpec time_kernel = KernelSpec::gaussian_time(1.0);
        const KernelSpec state_kernel = KernelSpec::separable_polynomial();
        const Dataset data = small_dataset(SystemId::mass_spring, 20, 0.5, seed);
        const Ridges ridges;
        OneStepProblem problem(data, time_kernel, state_kernel, ridges, GradientMode::frozen_state);
        const TrajectoryModel two = fit_two_step(data, time_kernel, state_kernel, ridges);
        const PointSet frozen = two.states(data.t_col);
        problem.freeze_states(frozen);

        // The frozen objective is zᵀAz + 2bᵀz + const; assemble A and b directly.
        const Eigen::Index n = problem.num_collocation(), m = problem.dof(), nobs = data.num_observed(), nm = n * m;
        const Eigen::MatrixXd mq = problem.q_system().solve(Eigen::MatrixXd(Eigen::MatrixXd::Identity(nobs + n, nobs + n)));
        const Eigen::MatrixXd mp = problem.p_system().solve(Eigen::MatrixXd(Eigen::MatrixXd::Identity(nobs + n, nobs + n)));
        const FunctionalLayout layout{n, m};
        const RidgeFactorization psi(gram_derivative_functionals(state_kernel, frozen, layout), ridges.hamiltonian);
        Eigen::MatrixXd a = psi.solve(Eigen::MatrixXd(Eigen::MatrixXd::Identity(2 * nm, 2 * nm)));
        a.topRightCorner(nm, nm) *= -1.0;  // u = (z1; -z2)
        a.bottomLeftCorner(nm, nm) *= -1.0;
        Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * nm);
        const Eigen::MatrixXd q_obs = problem.q_observed(), p_obs = problem.p_observed();
        for (Eigen::Index j = 0; j < m; ++j) {
            const Eigen::VectorXd bq = mq.bottomLeftCorner(n, nobs) * q_obs.col(j);
            const Eigen::VectorXd bp = mp.bottomLeftCorner(n, nobs) * p_obs.col(j);
            for (Eigen::Index i = 0; i < n; ++i) {
                b(i * m + j) += bq(i);
                b(nm + i * m + j) += bp(i);
                for (Eigen::Index k = 0; k < n; ++k) {
                    a(i * m + j, k * m + j) += mq(nobs + i, nobs + k);
                    a(nm + i * m + j, nm + k * m + j) += mp(nobs + i, nobs + k);
                }
            }
        }
        const Eigen::VectorXd direct = a.ldlt().solve(-b);

        LbfgsOptions opts;
        opts.gradient_tolerance = 1e-13;
        opts.max_iterations = 5000;
        const MinimizeResult res = minimize(problem, warm_start(two, data.t_col), opts);
        const double err = (res.slack.flatten() - direct).lpNorm<Eigen::Infinity>() / std::max(1.0, direct.lpNorm<Eigen::Infinity>());
        r.passed = err < 1e-6;
        r.detail = fmt::format("{} variables, relative max difference {:.3g} after {} iterations ({})", 2 * nm, err,
                               res.diagnostics.iterations, to_string(res.diagnostics.reason));
    });
}

PropertyResult check_determinism(const std::filesystem::path &scratch_dir) {
    return timed("determinism of a repeated single-cell run", [&](PropertyResult &r) {
        const std::string config_text = R"({
  "systems": ["mass_spring"],
  "kernels": ["separable_polynomial"],
  "methods": ["one_step"],
  "sparsities": [0.5],
  "seeds": [0, 1],
  "grid": {"num_collocation": 40, "t_final": 7.8, "num_extrapolation": 40},
  "dump_trajectories": false
})";
        const ExperimentConfig cfg = parse_config(config_text, "<determinism check>");
        std::string first, second;
        for (std::string *out : {&first, &second}) {
            const std::filesystem::path dir = scratch_dir / (out == &first ? "run_a" : "run_b");
            (void)run_sweep(cfg, 1, dir);
            std::ifstream in(dir / "errors.csv", std::ios::binary);
            std::ostringstream buf;
            buf << in.rdbuf();
            *out = buf.str();
        }
        std::filesystem::remove_all(scratch_dir);
        r.passed = !first.empty() && first == second;
        r.detail = r.passed ? fmt::format("errors.csv identical ({} bytes)", first.size()) : "errors.csv differs between runs";
    });
}

std::vector<PropertyResult> run_property_suite(const PropertySuiteOptions &options) {
    std::filesystem::path scratch = options.scratch_dir;
    if (scratch.empty()) scratch = std::filesystem::temp_directory_path() / fmt::format("hamlearn_check_{}", ::getpid());
    return {check_kernel_derivatives(options.kernel_cases, options.seed),
            check_norm_identity(options.seed + 1),
            check_objective_gradient(options.seed + 2),
            check_integrator_accuracy(),
            check_energy_drift(),
            check_frozen_subproblem(options.seed + 3),
            check_determinism(scratch)};
}

}  // namespace hamlearn
