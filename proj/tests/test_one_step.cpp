#include "hamlearn/benchmarks.hpp"
#include "hamlearn/errors.hpp"
#include "hamlearn/one_step.hpp"
#include "support.hpp"

#include <doctest.h>

#include <numeric>

using namespace hamlearn;

namespace {

struct Instance {
    Eigen::VectorXd s, t;
    Eigen::MatrixXd q, p;
};

Instance random_instance(SplitMix64 &rng, Eigen::Index n_obs, Eigen::Index n_col, Eigen::Index m) {
    Instance in;
    in.t = Eigen::VectorXd::LinSpaced(n_col, 0.0, 0.3 * static_cast<double>(n_col - 1));
    in.s.resize(n_obs);
    for (Eigen::Index i = 0; i < n_obs; ++i) in.s(i) = in.t(i * (n_col / n_obs));
    in.q.resize(n_obs, m);
    in.p.resize(n_obs, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        in.q.col(j) = test::random_vector(rng, n_obs);
        in.p.col(j) = test::random_vector(rng, n_obs);
    }
    return in;
}

SlackVariables random_slack(SplitMix64 &rng, Eigen::Index n, Eigen::Index m) {
    SlackVariables z{Eigen::MatrixXd(n, m), Eigen::MatrixXd(n, m)};
    for (Eigen::Index j = 0; j < m; ++j) {
        z.z1.col(j) = test::random_vector(rng, n);
        z.z2.col(j) = test::random_vector(rng, n);
    }
    return z;
}

OneStepProblem make_problem(const Instance &in, const KernelSpec &state, const Ridges &ridges, GradientMode mode = GradientMode::full) {
    return {in.s, in.q, in.p, in.t, KernelSpec::gaussian_time(), state, ridges, mode};
}

Eigen::MatrixXd vstack(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b) {
    Eigen::MatrixXd out(a.rows() + b.rows(), a.cols());
    out << a, b;
    return out;
}

}  // namespace

TEST_CASE("slack flatten round-trip") {
    SplitMix64 rng(1);
    const SlackVariables z = random_slack(rng, 7, 2);
    const SlackVariables back = SlackVariables::unflatten(z.flatten(), 7, 2);
    CHECK(back.z1 == z.z1);
    CHECK(back.z2 == z.z2);
    CHECK(z.flatten()(1) == z.z1(0, 1));
    CHECK(z.flatten()(14) == z.z2(0, 0));
    CHECK_THROWS_AS((void)SlackVariables::unflatten(Eigen::VectorXd(5), 7, 2), ContractError);
}

TEST_CASE("zero data gives a zero objective") {
    Instance in;
    in.t = Eigen::VectorXd::LinSpaced(6, 0, 5);
    in.s = in.t.head(3);
    in.q = Eigen::MatrixXd::Zero(3, 1);
    in.p = Eigen::MatrixXd::Zero(3, 1);
    const OneStepProblem prob = make_problem(in, KernelSpec::gaussian_state(), Ridges{});
    const SlackVariables zero{Eigen::MatrixXd::Zero(6, 1), Eigen::MatrixXd::Zero(6, 1)};
    CHECK(prob.objective(zero) == 0.0);
    CHECK(prob.gradient(zero).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("objective terms match a direct recomputation") {
    SplitMix64 rng(2);
    const Instance in = random_instance(rng, 4, 12, 2);
    Ridges ridges;
    ridges.trajectory_q = 1e-3;
    ridges.trajectory_p = 2e-3;
    ridges.hamiltonian = 1e-2;
    const KernelSpec state = KernelSpec::gaussian_state(1.5);
    const OneStepProblem prob = make_problem(in, state, ridges);
    const SlackVariables z = random_slack(rng, 12, 2);

    const KernelSpec time = KernelSpec::gaussian_time();
    const Eigen::MatrixXd k = extended_gram(time, in.s, in.t);
    const Eigen::MatrixXd cross = extended_cross(time, as_span(in.t), in.s, in.t);
    const Eigen::Index n = k.rows();
    const Eigen::MatrixXd kq = k + ridges.trajectory_q * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd kp = k + ridges.trajectory_p * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd vq = vstack(in.q, z.z1), vp = vstack(in.p, z.z2);
    const Eigen::MatrixXd aq = kq.fullPivLu().solve(vq), ap = kp.fullPivLu().solve(vp);

    PointSet y(12, 4);
    y.leftCols(2) = cross * aq;
    y.rightCols(2) = cross * ap;
    const FunctionalLayout layout{12, 2};
    Eigen::MatrixXd psi = gram_derivative_functionals(state, y, layout);
    psi.diagonal().array() += ridges.hamiltonian;
    Eigen::VectorXd u(layout.size());
    for (Eigen::Index i = 0; i < 12; ++i) {
        for (Eigen::Index j = 0; j < 2; ++j) {
            u(layout.p_index(i, j)) = z.z1(i, j);
            u(layout.q_index(i, j)) = -z.z2(i, j);
        }
    }

    const ObjectiveTerms terms = prob.terms(z);
    CHECK(terms.q_term == doctest::Approx((vq.transpose() * aq).trace()).epsilon(1e-8));
    CHECK(terms.p_term == doctest::Approx((vp.transpose() * ap).trace()).epsilon(1e-8));
    CHECK(terms.hamiltonian_term == doctest::Approx(u.dot(psi.fullPivLu().solve(u))).epsilon(1e-8));
    CHECK(test::rel_err(prob.reconstructed_states(z), y) < 1e-8);

    Eigen::VectorXd grad;
    CHECK(prob.evaluate(z.flatten(), grad) == doctest::Approx(terms.total()).epsilon(1e-12));
}

TEST_CASE("gradient matches finite differences") {
    SplitMix64 rng(3);
    for (const KernelSpec &state : {KernelSpec::gaussian_state(), KernelSpec::separable_polynomial()}) {
        for (GradientMode mode : {GradientMode::full, GradientMode::frozen_state}) {
            CAPTURE(to_string(mode));
            const Instance in = random_instance(rng, 3, 9, 1);
            Ridges ridges;
            ridges.trajectory_q = ridges.trajectory_p = 1e-2;
            ridges.hamiltonian = 1e-1;
            const OneStepProblem prob = make_problem(in, state, ridges, mode);
            const Eigen::VectorXd x = random_slack(rng, 9, 1).flatten();
            Eigen::VectorXd g;
            prob.evaluate(x, g);
            if (mode == GradientMode::frozen_state) {
                // Frozen mode drops the state path: compare against FD with the states held fixed.
                OneStepProblem frozen = make_problem(in, state, ridges, GradientMode::full);
                frozen.freeze_states(prob.reconstructed_states(SlackVariables::unflatten(x, 9, 1)));
                Eigen::VectorXd fd(x.size()), scratch;
                for (Eigen::Index k = 0; k < x.size(); ++k) {
                    Eigen::VectorXd xp = x, xm = x;
                    xp(k) += 1e-6;
                    xm(k) -= 1e-6;
                    fd(k) = (frozen.evaluate(xp, scratch) - frozen.evaluate(xm, scratch)) / 2e-6;
                }
                CHECK(test::rel_err(fd, g) < 1e-5);
            } else {
                Eigen::VectorXd fd(x.size()), scratch;
                for (Eigen::Index k = 0; k < x.size(); ++k) {
                    Eigen::VectorXd xp = x, xm = x;
                    xp(k) += 1e-6;
                    xm(k) -= 1e-6;
                    fd(k) = (prob.evaluate(xp, scratch) - prob.evaluate(xm, scratch)) / 2e-6;
                }
                CHECK(test::rel_err(fd, g) < 1e-5);
            }
        }
    }
}

TEST_CASE("frozen problem minimizer equals the direct linear solve") {
    SplitMix64 rng(4);
    const Instance in = random_instance(rng, 4, 10, 1);
    Ridges ridges;
    ridges.trajectory_q = ridges.trajectory_p = 1e-2;
    ridges.hamiltonian = 1e-1;
    OneStepProblem prob = make_problem(in, KernelSpec::gaussian_state(), ridges);
    prob.freeze_states(test::random_points(rng, 10, 2));

    // The frozen objective is quadratic: its gradient is affine, 2Az + 2b.
    const Eigen::Index d = prob.num_variables();
    Eigen::VectorXd g0, gk;
    prob.evaluate(Eigen::VectorXd::Zero(d), g0);
    Eigen::MatrixXd a(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        prob.evaluate(Eigen::VectorXd::Unit(d, k), gk);
        a.col(k) = 0.5 * (gk - g0);
    }
    const Eigen::VectorXd direct = a.ldlt().solve(-0.5 * g0);

    LbfgsOptions opt;
    opt.gradient_tolerance = 1e-13;
    opt.max_iterations = 5000;
    const MinimizeResult res = minimize(prob, SlackVariables::unflatten(Eigen::VectorXd::Zero(d), 10, 1), opt);
    CHECK((res.slack.flatten() - direct).norm() / std::max(1.0, direct.norm()) < 1e-6);
}

TEST_CASE("minimize never increases the objective") {
    SplitMix64 rng(5);
    for (int trial = 0; trial < 3; ++trial) {
        const Instance in = random_instance(rng, 5, 15, 1);
        const OneStepProblem prob = make_problem(in, KernelSpec::gaussian_state(), Ridges{});
        const SlackVariables init = random_slack(rng, 15, 1);
        LbfgsOptions opt;
        opt.max_iterations = 50;
        const MinimizeResult res = minimize(prob, init, opt);
        CHECK(prob.objective(res.slack) <= prob.objective(init));
        CHECK(res.diagnostics.final_value == doctest::Approx(prob.objective(res.slack)).epsilon(1e-10));
    }
}

TEST_CASE("objective does not depend on the order of observations") {
    SplitMix64 rng(6);
    Instance in = random_instance(rng, 5, 15, 2);
    const SlackVariables z = random_slack(rng, 15, 2);
    const double base = make_problem(in, KernelSpec::gaussian_state(), Ridges{}).objective(z);

    std::vector<Eigen::Index> perm{3, 0, 4, 2, 1};
    Instance shuffled = in;
    for (Eigen::Index i = 0; i < 5; ++i) {
        shuffled.s(i) = in.s(perm[static_cast<std::size_t>(i)]);
        shuffled.q.row(i) = in.q.row(perm[static_cast<std::size_t>(i)]);
        shuffled.p.row(i) = in.p.row(perm[static_cast<std::size_t>(i)]);
    }
    const double permuted = make_problem(shuffled, KernelSpec::gaussian_state(), Ridges{}).objective(z);
    CHECK(permuted == doctest::Approx(base).epsilon(1e-8));
}

TEST_CASE("contracts") {
    SplitMix64 rng(7);
    const Instance in = random_instance(rng, 3, 9, 1);
    CHECK_THROWS_AS(make_problem(in, KernelSpec::gaussian_time(), Ridges{}), ContractError);
    Instance bad = in;
    bad.t(3) = bad.t(2);
    CHECK_THROWS_AS(make_problem(bad, KernelSpec::gaussian_state(), Ridges{}), ContractError);
    const OneStepProblem prob = make_problem(in, KernelSpec::gaussian_state(), Ridges{});
    CHECK_THROWS_AS((void)prob.objective(random_slack(rng, 8, 1)), ContractError);
    CHECK(gradient_mode_from_string("frozen_state") == GradientMode::frozen_state);
    CHECK_THROWS_AS((void)gradient_mode_from_string("exact"), ContractError);
}

TEST_CASE("mass-spring interpolation with dense observations") {
    ExperimentOptions opt;
    opt.keep_trajectories = true;
    const SeedOutcome out = run_seed(SystemId::mass_spring, KernelSpec::separable_polynomial(), Method::one_step, 0.0, 0, opt);
    REQUIRE(!out.failed);
    // No time is unobserved, so score the reconstruction on the whole grid.
    CHECK(relative_error(out.pred_col.leftCols(1), out.data.y_col.leftCols(1)) <= 0.02);
    CHECK(out.optimizer.has_value());
}

TEST_CASE("one-step improves on two-step under sparsity") {
    GridOptions grid;
    grid.num_collocation = 100;
    ExperimentOptions opt;
    opt.grid = grid;
    const SeedOutcome two = run_seed(SystemId::mass_spring, KernelSpec::separable_polynomial(), Method::two_step, 0.7, 1, opt);
    const SeedOutcome one = run_seed(SystemId::mass_spring, KernelSpec::separable_polynomial(), Method::one_step, 0.7, 1, opt);
    REQUIRE(!two.failed);
    REQUIRE(!one.failed);
    CHECK(one.errors[0][0] < two.errors[0][0]);
}
