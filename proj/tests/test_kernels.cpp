#include "hamlearn/errors.hpp"
#include "hamlearn/kernels.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace hamlearn;
using test::uniform;

namespace {

const std::vector<KernelSpec> &state_kernels() {
    static const std::vector<KernelSpec> kernels{KernelSpec::gaussian_state(0.8), KernelSpec::separable_polynomial(1.0, 3),
                                                 KernelSpec::additive_poly_gaussian(1.3, 3), KernelSpec(KernelFamily::separable_polynomial, 0.7, 2, 0.4)};
    return kernels;
}

double eval(const KernelSpec &k, const Eigen::VectorXd &x, const Eigen::VectorXd &y) { return kernel_eval(k, as_span(x), as_span(y)); }

// ∂²K/∂x_a∂y_b by nested central differences of kernel values only.
double fd_cross(const KernelSpec &k, Eigen::VectorXd x, Eigen::VectorXd y, Eigen::Index a, Eigen::Index b, double h = 1e-4) {
    auto shifted = [&](double sa, double sb) {
        Eigen::VectorXd xs = x, ys = y;
        xs(a) += sa * h;
        ys(b) += sb * h;
        return eval(k, xs, ys);
    };
    return (shifted(1, 1) - shifted(1, -1) - shifted(-1, 1) + shifted(-1, -1)) / (4 * h * h);
}

}  // namespace

TEST_CASE("gaussian_time values") {
    const KernelSpec k = KernelSpec::gaussian_time(1.0);
    const double a[] = {0.7}, b[] = {0.7}, z[] = {0.0}, one[] = {1.0};
    CHECK(kernel_eval(k, a, b) == 1.0);
    CHECK(kernel_eval(k, z, one) == doctest::Approx(0.60653066).epsilon(1e-8));
}

TEST_CASE("separable polynomial at the origin") {
    const KernelSpec k = KernelSpec::separable_polynomial(1.0, 3);
    const Eigen::Vector2d zero(0.0, 0.0);
    CHECK(eval(k, zero, zero) == doctest::Approx(2.0));
}

TEST_CASE("gaussian_time first derivative") {
    const KernelSpec k = KernelSpec::gaussian_time(1.0);
    double g[1];
    const double two[] = {2.0}, one[] = {1.0}, zero[] = {0.0};
    kernel_grad_first(k, two, two, g);
    CHECK(g[0] == 0.0);
    kernel_grad_first(k, one, zero, g);
    CHECK(g[0] == doctest::Approx(-0.60653066).epsilon(1e-8));
}

TEST_CASE("gaussian_time cross-Hessian at zero lag is 1/theta^2") {
    for (double theta : {1.0, 2.0, 0.5}) {
        const KernelSpec k = KernelSpec::gaussian_time(theta);
        const double x[] = {0.3};
        double h[1];
        kernel_cross_hessian(k, x, x, h);
        CHECK(h[0] == doctest::Approx(1.0 / (theta * theta)));
    }
}

TEST_CASE("derivatives agree with finite differences") {
    SplitMix64 rng(11);
    std::vector<KernelSpec> kernels = state_kernels();
    kernels.push_back(KernelSpec::gaussian_time(0.9));
    for (const KernelSpec &k : kernels) {
        CAPTURE(to_string(k.family()));
        for (int trial = 0; trial < 50; ++trial) {
            const Eigen::Index dim = k.family() == KernelFamily::gaussian_time ? 1 : (trial % 2 == 0 ? 2 : 4);
            const Eigen::VectorXd x = test::random_vector(rng, dim, -1.5, 1.5), y = test::random_vector(rng, dim, -1.5, 1.5);
            const Eigen::VectorXd g = kernel_grad_first(k, x, y);
            const Eigen::MatrixXd h = kernel_cross_hessian(k, x, y);
            Eigen::VectorXd g_fd(dim);
            Eigen::MatrixXd h_fd(dim, dim);
            for (Eigen::Index a = 0; a < dim; ++a) {
                const double step = 1e-5 * (1.0 + std::abs(x(a)));
                Eigen::VectorXd xp = x, xm = x;
                xp(a) += step;
                xm(a) -= step;
                g_fd(a) = (eval(k, xp, y) - eval(k, xm, y)) / (2 * step);
                for (Eigen::Index b = 0; b < dim; ++b) {
                    const double sy = 1e-5 * (1.0 + std::abs(y(b)));
                    Eigen::VectorXd yp = y, ym = y;
                    yp(b) += sy;
                    ym(b) -= sy;
                    h_fd(a, b) = (kernel_grad_first(k, x, yp)(a) - kernel_grad_first(k, x, ym)(a)) / (2 * sy);
                }
            }
            const double scale = std::abs(eval(k, x, y));
            CHECK(test::rel_err(g_fd, g, scale) < 1e-6);
            CHECK(test::rel_err(h_fd, h, scale) < 1e-5);

            // Third derivative against differences of the cross-Hessian.
            std::vector<double> t(static_cast<std::size_t>(dim * dim * dim));
            kernel_third_derivative(k, as_span(x), as_span(y), t);
            double err = 0.0, mag = scale;
            for (Eigen::Index c = 0; c < dim; ++c) {
                const double step = 1e-5 * (1.0 + std::abs(x(c)));
                Eigen::VectorXd xp = x, xm = x;
                xp(c) += step;
                xm(c) -= step;
                const Eigen::MatrixXd d = (kernel_cross_hessian(k, xp, y) - kernel_cross_hessian(k, xm, y)) / (2 * step);
                for (Eigen::Index a = 0; a < dim; ++a) {
                    for (Eigen::Index b = 0; b < dim; ++b) {
                        const double an = t[static_cast<std::size_t>((c * dim + a) * dim + b)];
                        err = std::max(err, std::abs(d(a, b) - an));
                        mag = std::max(mag, std::abs(an));
                    }
                }
            }
            CHECK(err / mag < 1e-5);
        }
    }
}

TEST_CASE("kernels are symmetric in their arguments") {
    SplitMix64 rng(3);
    for (const KernelSpec &k : state_kernels()) {
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::VectorXd x = test::random_vector(rng, 4), y = test::random_vector(rng, 4);
            CHECK(eval(k, x, y) == eval(k, y, x));
        }
    }
}

TEST_CASE("separable polynomial has no mixed q/p block") {
    SplitMix64 rng(5);
    const KernelSpec k = KernelSpec::separable_polynomial();
    for (Eigen::Index m : {1, 2}) {
        const Eigen::VectorXd x = test::random_vector(rng, 2 * m), y = test::random_vector(rng, 2 * m);
        const Eigen::MatrixXd h = kernel_cross_hessian(k, x, y);
        CHECK(h.topRightCorner(m, m).cwiseAbs().maxCoeff() == 0.0);
        CHECK(h.bottomLeftCorner(m, m).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("additive kernel is the sum of its parts") {
    SplitMix64 rng(7);
    const double theta = 1.3;
    const KernelSpec k = KernelSpec::additive_poly_gaussian(theta, 3);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd x = test::random_vector(rng, 4), y = test::random_vector(rng, 4);
        const double gauss = std::exp(-(x.head(2) - y.head(2)).squaredNorm() / (2 * theta * theta));
        const double poly = std::pow(x.tail(2).dot(y.tail(2)) + theta, 3);
        CHECK(eval(k, x, y) == doctest::Approx(gauss + poly).epsilon(1e-14));
    }
}

TEST_CASE("gram examples") {
    const KernelSpec k = KernelSpec::gaussian_time(1.0);
    PointSet x(1, 1);
    x << 0.0;
    CHECK(gram(k, x, x)(0, 0) == 1.0);
    PointSet xy(2, 1);
    xy << 0.0, 1.0;
    const Eigen::MatrixXd g = gram(k, xy, xy);
    CHECK(g(0, 1) == doctest::Approx(std::exp(-0.5)));
    CHECK(g(1, 0) == doctest::Approx(std::exp(-0.5)));
    CHECK(g(1, 1) == 1.0);
    CHECK(gram(k, PointSet(0, 1), PointSet(0, 1)).size() == 0);
}

TEST_CASE("gram matrices are symmetric and positive definite with jitter") {
    SplitMix64 rng(9);
    for (const KernelSpec &k : {KernelSpec::gaussian_time(1.0), KernelSpec::gaussian_state(1.0)}) {
        const Eigen::Index dim = k.is_state_kernel() ? 2 : 1;
        for (Eigen::Index n : {1, 10, 50}) {
            const PointSet x = test::random_points(rng, n, dim, -3, 3);
            const Eigen::MatrixXd g = gram(k, x, x);
            CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
            const Eigen::LLT<Eigen::MatrixXd> llt(g + 1e-10 * Eigen::MatrixXd::Identity(n, n));
            CHECK(llt.info() == Eigen::Success);
        }
    }
}

TEST_CASE("dimension and hyperparameter contracts") {
    CHECK_THROWS_AS(KernelSpec::gaussian_state(0.0), ContractError);
    CHECK_THROWS_AS(KernelSpec::gaussian_time(-1.0), ContractError);
    CHECK_THROWS_AS(KernelSpec(KernelFamily::separable_polynomial, 1.0, 0), ContractError);
    const KernelSpec k = KernelSpec::gaussian_state();
    const Eigen::Vector2d a(0, 0);
    const Eigen::Vector4d b(0, 0, 0, 0);
    CHECK_THROWS_AS((void)eval(k, a, b), ContractError);
    const Eigen::Vector3d odd(0, 0, 0);
    CHECK_THROWS_AS((void)eval(k, odd, odd), ContractError);
    const double t[] = {0.0, 1.0};
    CHECK_THROWS_AS((void)kernel_eval(KernelSpec::gaussian_time(), t, t), ContractError);
    CHECK(kernel_family_from_string("additive_poly_gaussian") == KernelFamily::additive_poly_gaussian);
    CHECK_THROWS_AS((void)kernel_family_from_string("laplace"), ContractError);
}

TEST_CASE("derivative-functional Gram at a single state") {
    PointSet s(1, 2);
    s << 0.0, 0.0;
    const FunctionalLayout layout{1, 1};
    const Eigen::MatrixXd g = gram_derivative_functionals(KernelSpec::gaussian_state(1.0), s, layout);
    CHECK(g.rows() == 2);
    CHECK((g - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("derivative-functional Gram matches a finite-difference assembly") {
    SplitMix64 rng(13);
    for (const KernelSpec &k : state_kernels()) {
        CAPTURE(to_string(k.family()));
        for (Eigen::Index m : {1, 2}) {
            const Eigen::Index n = 4;
            const PointSet states = test::random_points(rng, n, 2 * m);
            const FunctionalLayout layout{n, m};
            const Eigen::MatrixXd g = gram_derivative_functionals(k, states, layout);
            REQUIRE(g.rows() == layout.size());
            Eigen::MatrixXd fd(layout.size(), layout.size());
            for (Eigen::Index i = 0; i < n; ++i) {
                for (Eigen::Index j = 0; j < n; ++j) {
                    for (Eigen::Index a = 0; a < 2 * m; ++a) {
                        for (Eigen::Index b = 0; b < 2 * m; ++b) {
                            fd(layout.index_of_coordinate(i, a), layout.index_of_coordinate(j, b)) =
                                fd_cross(k, states.row(i).transpose(), states.row(j).transpose(), a, b);
                        }
                    }
                }
            }
            CHECK(test::rel_err(fd, g) < 1e-4);
            CHECK((g - g.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("derivative-functional Gram is positive definite for generic states") {
    SplitMix64 rng(17);
    const PointSet states = test::random_points(rng, 12, 2, -2, 2);
    const FunctionalLayout layout{12, 1};
    const Eigen::MatrixXd g = gram_derivative_functionals(KernelSpec::gaussian_state(1.0), states, layout);
    const Eigen::LLT<Eigen::MatrixXd> llt(g + 1e-10 * Eigen::MatrixXd::Identity(g.rows(), g.cols()));
    CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("cross derivative functionals") {
    SUBCASE("vanish for a single Gaussian anchor at zero lag") {
        PointSet s(1, 2);
        s << 0.4, -0.2;
        const Eigen::VectorXd x = s.row(0).transpose();
        const Eigen::VectorXd c = cross_derivative_functionals(KernelSpec::gaussian_state(), s, FunctionalLayout{1, 1}, as_span(x));
        CHECK(c.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("match finite differences, with a Jacobian that does too") {
        SplitMix64 rng(19);
        for (const KernelSpec &k : state_kernels()) {
            const Eigen::Index n = 3, m = 2;
            const PointSet states = test::random_points(rng, n, 2 * m);
            const FunctionalLayout layout{n, m};
            const Eigen::VectorXd x = test::random_vector(rng, 2 * m);
            const Eigen::VectorXd c = cross_derivative_functionals(k, states, layout, as_span(x));
            Eigen::VectorXd fd(layout.size());
            for (Eigen::Index i = 0; i < n; ++i) {
                for (Eigen::Index a = 0; a < 2 * m; ++a) {
                    Eigen::VectorXd sp = states.row(i).transpose(), sm = sp;
                    sp(a) += 1e-5;
                    sm(a) -= 1e-5;
                    fd(layout.index_of_coordinate(i, a)) = (eval(k, sp, x) - eval(k, sm, x)) / 2e-5;
                }
            }
            CHECK(test::rel_err(fd, c) < 1e-5);

            const Eigen::MatrixXd jac = cross_derivative_functionals_jacobian(k, states, layout, as_span(x));
            Eigen::MatrixXd jfd(layout.size(), 2 * m);
            for (Eigen::Index b = 0; b < 2 * m; ++b) {
                Eigen::VectorXd xp = x, xm = x;
                xp(b) += 1e-5;
                xm(b) -= 1e-5;
                jfd.col(b) = (cross_derivative_functionals(k, states, layout, as_span(xp)) - cross_derivative_functionals(k, states, layout, as_span(xm))) / 2e-5;
            }
            CHECK(test::rel_err(jfd, jac) < 1e-5);
        }
    }
    SUBCASE("separable blocks see only their own coordinates") {
        SplitMix64 rng(23);
        const KernelSpec k = KernelSpec::separable_polynomial();
        const Eigen::Index n = 3, m = 2;
        const PointSet states = test::random_points(rng, n, 2 * m);
        const FunctionalLayout layout{n, m};
        Eigen::VectorXd x = test::random_vector(rng, 2 * m);
        const Eigen::VectorXd before = cross_derivative_functionals(k, states, layout, as_span(x));
        x.head(m) += Eigen::VectorXd::Constant(m, 0.3);  // move q only
        const Eigen::VectorXd after = cross_derivative_functionals(k, states, layout, as_span(x));
        CHECK((after.head(n * m) - before.head(n * m)).cwiseAbs().maxCoeff() == 0.0);
        CHECK((after.tail(n * m) - before.tail(n * m)).cwiseAbs().maxCoeff() > 0.0);
    }
}

TEST_CASE("state gradient of the quadratic form matches finite differences") {
    SplitMix64 rng(29);
    for (const KernelSpec &k : state_kernels()) {
        CAPTURE(to_string(k.family()));
        const Eigen::Index n = 5, m = 2;
        const FunctionalLayout layout{n, m};
        const PointSet states = test::random_points(rng, n, 2 * m);
        const Eigen::VectorXd w = test::random_vector(rng, layout.size());
        const PointSet g = quadratic_form_state_gradient(k, states, layout, w);
        PointSet fd(n, 2 * m);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index c = 0; c < 2 * m; ++c) {
                PointSet sp = states, sm = states;
                sp(i, c) += 1e-6;
                sm(i, c) -= 1e-6;
                const double fp = w.dot(gram_derivative_functionals(k, sp, layout) * w);
                const double fm = w.dot(gram_derivative_functionals(k, sm, layout) * w);
                fd(i, c) = (fp - fm) / 2e-6;
            }
        }
        CHECK(test::rel_err(fd, g) < 1e-6);
    }
}

TEST_CASE("parallel assemblies equal the serial references") {
    SplitMix64 rng(31);
    for (const KernelSpec &k : state_kernels()) {
        const Eigen::Index n = 17, m = 2;
        const FunctionalLayout layout{n, m};
        const PointSet states = test::random_points(rng, n, 2 * m);
        const PointSet other = test::random_points(rng, 9, 2 * m);
        const Eigen::VectorXd w = test::random_vector(rng, layout.size());
        CHECK(test::rel_err(gram(k, states, other), serial::gram(k, states, other)) < 1e-14);
        CHECK(test::rel_err(gram_derivative_functionals(k, states, layout), serial::gram_derivative_functionals(k, states, layout)) < 1e-14);
        CHECK(test::rel_err(quadratic_form_state_gradient(k, states, layout, w), serial::quadratic_form_state_gradient(k, states, layout, w)) <
              1e-12);
    }
}
