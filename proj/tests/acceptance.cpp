// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "hamlearn/benchmarks.hpp"
#include "hamlearn/property_suite.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cstdio>
#include <numeric>
#include <string>

using namespace hamlearn;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::vector<std::uint64_t> seeds(int n) {
    std::vector<std::uint64_t> out(static_cast<std::size_t>(n));
    std::iota(out.begin(), out.end(), std::uint64_t{0});
    return out;
}

ExperimentOptions with_collocation(Eigen::Index n) {
    ExperimentOptions opt;
    opt.grid.num_collocation = n;
    return opt;
}

struct Timed {
    CellResult cell;
    double seconds;
};

Timed timed_cell(SystemId sys, const KernelSpec &kernel, Method method, double sparsity, int n_seeds, const ExperimentOptions &opt) {
    const Clock::time_point start = Clock::now();
    CellResult cell = run_experiment(sys, kernel, method, sparsity, seeds(n_seeds), opt);
    return {std::move(cell), since(start)};
}

double extrap_q(const CellResult &c) { return c.summary[1][0].mean; }
double interp_q(const CellResult &c) { return c.summary[0][0].mean; }

int failures = 0;

void report(bool pass, const std::string &id, const std::string &detail) {
    std::printf("%s  %s: %s\n", pass ? "PASS" : "FAIL", id.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

void criterion_1() {
    const Timed t = timed_cell(SystemId::mass_spring, KernelSpec::gaussian_state(), Method::two_step, 0.0, 1, ExperimentOptions{});
    const double ri = interp_q(t.cell), re = extrap_q(t.cell);
    report(std::abs(ri) <= 1e-6, "1a two-step/gaussian mass-spring sparsity 0 interpolation RE_q = 0", fmt::format("{:.3g}", ri));
    report(re >= 0.05 && re <= 0.6, "1b two-step/gaussian mass-spring sparsity 0 extrapolation RE_q in [0.05, 0.6]", fmt::format("{:.4g}", re));
    report(t.seconds < 30.0, "1c runtime < 30 s", fmt::format("{:.1f} s", t.seconds));
}

void criterion_2() {
    const Timed t = timed_cell(SystemId::mass_spring, KernelSpec::separable_polynomial(), Method::one_step, 0.0, 1, ExperimentOptions{});
    const double re = extrap_q(t.cell);
    report(re <= 0.2 && t.seconds < 120.0, "2 one-step/poly mass-spring sparsity 0 extrapolation RE_q <= 0.2 in < 2 min",
           fmt::format("{:.4g} in {:.1f} s", re, t.seconds));
}

void ordering(const std::string &id, SystemId sys, Eigen::Index n, bool need_margin) {
    const ExperimentOptions opt = with_collocation(n);
    const Timed two = timed_cell(sys, KernelSpec::separable_polynomial(), Method::two_step, 0.7, 10, opt);
    const Timed one = timed_cell(sys, KernelSpec::separable_polynomial(), Method::one_step, 0.7, 10, opt);
    const double a = extrap_q(one.cell), b = extrap_q(two.cell);
    const bool ordered = need_margin ? 10.0 * a <= b : a < b;
    const bool fast = two.seconds < 900.0 && one.seconds < 900.0;
    report(ordered && fast,
           fmt::format("{} {} poly sparsity 0.7 N={}: one-step {} two-step", id, to_string(sys), n, need_margin ? "10x below" : "below"),
           fmt::format("one-step {:.4g} ({}/{} div.), two-step {:.4g} ({}/{} div.), ratio {:.1f}, cells {:.0f} s / {:.0f} s", a,
                       one.cell.n_diverged, one.cell.n_seeds, b, two.cell.n_diverged, two.cell.n_seeds, b / a, one.seconds, two.seconds));
}

void criterion_4() {
    const Timed t = timed_cell(SystemId::henon_heiles, KernelSpec::separable_polynomial(), Method::one_step, 0.5, 10, ExperimentOptions{});
    const double re = extrap_q(t.cell);
    report(re >= 0.5 && re <= 3.0, "4 one-step/poly henon-heiles sparsity 0.5 extrapolation RE_q mean in [0.5, 3.0]",
           fmt::format("{:.4g} ± {:.3g} over {} seeds", re, t.cell.summary[1][0].std, t.cell.n_seeds));
}

void criterion_5() {
    const Clock::time_point start = Clock::now();
    const std::vector<PropertyResult> results = run_property_suite();
    const double seconds = since(start);
    bool all = true;
    for (const PropertyResult &r : results) {
        std::printf("      %s %s: %s\n", r.passed ? "ok  " : "FAIL", r.name.c_str(), r.detail.c_str());
        all = all && r.passed;
    }
    report(all && seconds < 120.0, "5 property suite passes in < 2 min", fmt::format("{} checks, {:.1f} s", results.size(), seconds));
}

}  // namespace

int main() {
    try {
        criterion_1();
        criterion_2();
        ordering("3a", SystemId::mass_spring, 200, true);
        ordering("3b", SystemId::two_mass_three_spring, 200, true);
        ordering("3c", SystemId::mass_spring, 100, false);
        ordering("3d", SystemId::two_mass_three_spring, 100, false);
        criterion_4();
        criterion_5();
    } catch (const std::exception &err) {
        std::printf("FAIL  aborted: %s\n", err.what());
        return 1;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
