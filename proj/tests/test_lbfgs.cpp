#include "hamlearn/lbfgs.hpp"

#include <doctest.h>

using namespace hamlearn;

TEST_CASE("quadratic bowl") {
    Eigen::VectorXd scale(5);
    scale << 1, 3, 10, 30, 100;
    const Eigen::VectorXd target = Eigen::VectorXd::LinSpaced(5, -2, 2);
    const ObjectiveFunction f = [&](const Eigen::VectorXd &x, Eigen::VectorXd &g) {
        const Eigen::VectorXd r = x - target;
        g = scale.cwiseProduct(r);
        return 0.5 * r.dot(g);
    };
    Eigen::VectorXd x = Eigen::VectorXd::Zero(5);
    const LbfgsReport rep = lbfgs_minimize(f, x, {});
    CHECK(rep.reason == Termination::converged);
    CHECK((x - target).cwiseAbs().maxCoeff() < 1e-7);
    CHECK(rep.final_value <= rep.initial_value);
}

TEST_CASE("Rosenbrock") {
    const ObjectiveFunction f = [](const Eigen::VectorXd &x, Eigen::VectorXd &g) {
        const double a = 1 - x(0), b = x(1) - x(0) * x(0);
        g.resize(2);
        g(0) = -2 * a - 400 * x(0) * b;
        g(1) = 200 * b;
        return a * a + 100 * b * b;
    };
    Eigen::VectorXd x(2);
    x << -1.2, 1.0;
    LbfgsOptions opt;
    opt.gradient_tolerance = 1e-10;
    const LbfgsReport rep = lbfgs_minimize(f, x, opt);
    CHECK(rep.reason != Termination::non_finite);
    CHECK(std::abs(x(0) - 1) < 1e-5);
    CHECK(std::abs(x(1) - 1) < 1e-5);

    SUBCASE("accepted values never increase") {
        REQUIRE(!rep.accepted_values.empty());
        for (std::size_t k = 1; k < rep.accepted_values.size(); ++k) CHECK(rep.accepted_values[k] <= rep.accepted_values[k - 1]);
    }
}

TEST_CASE("iteration cap is reported") {
    const ObjectiveFunction f = [](const Eigen::VectorXd &x, Eigen::VectorXd &g) {
        const double a = 1 - x(0), b = x(1) - x(0) * x(0);
        g.resize(2);
        g(0) = -2 * a - 400 * x(0) * b;
        g(1) = 200 * b;
        return a * a + 100 * b * b;
    };
    Eigen::VectorXd x(2);
    x << -1.2, 1.0;
    LbfgsOptions opt;
    opt.max_iterations = 3;
    const LbfgsReport rep = lbfgs_minimize(f, x, opt);
    CHECK(rep.reason == Termination::max_iterations);
    CHECK(rep.iterations == 3);
    CHECK(rep.warning);
}

TEST_CASE("non-finite start stops immediately") {
    const ObjectiveFunction f = [](const Eigen::VectorXd &x, Eigen::VectorXd &g) {
        g = x;
        return std::log(-1.0 + 0.0 * x.sum());
    };
    Eigen::VectorXd x = Eigen::VectorXd::Ones(3);
    const LbfgsReport rep = lbfgs_minimize(f, x, {});
    CHECK(rep.reason == Termination::non_finite);
    CHECK(x == Eigen::VectorXd::Ones(3));
}
