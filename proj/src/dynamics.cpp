#include "hamlearn/dynamics.hpp"

#include "hamlearn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hamlearn {

VectorField::VectorField(Eigen::Index dimension, GradientFunction gradient) : dimension_(dimension), gradient_(std::move(gradient)) {
    if (dimension_ < 2 || dimension_ % 2 != 0) throw ContractError("a Hamiltonian field needs an even state dimension");
}

VectorField VectorField::learned(const LearnedHamiltonian &model) {
    return {model.dimension(), [&model](std::span<const double> y, std::span<double> grad) { model.gradient(y, grad); }};
}

VectorField VectorField::zero(Eigen::Index dimension) {
    return {dimension, [](std::span<const double>, std::span<double> grad) { std::fill(grad.begin(), grad.end(), 0.0); }};
}

void VectorField::eval(std::span<const double> y, std::span<double> out) const {
    if (static_cast<Eigen::Index>(y.size()) != dimension_ || out.size() != y.size()) throw ContractError("state has wrong dimension");
    const std::size_t m = y.size() / 2;
    gradient_(y, out);
    // (∂_q H, ∂_p H) -> (∂_p H, -∂_q H)
    for (std::size_t j = 0; j < m; ++j) {
        const double dq = out[j];
        out[j] = out[m + j];
        out[m + j] = -dq;
    }
}

Eigen::VectorXd VectorField::eval(const Eigen::VectorXd &y) const {
    Eigen::VectorXd out(y.size());
    eval(as_span(y), {out.data(), static_cast<std::size_t>(out.size())});
    return out;
}

namespace {

// Dormand–Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (4th order).
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799, d4 = -10690763975.0 / 1880347072,
                 d5 = 701980252875.0 / 199316789632, d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

// Step-size controller constants.
constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;
constexpr double kMinFactor = 0.2;   // h_new >= 0.2 h
constexpr double kMaxFactor = 10.0;  // h_new <= 10 h

class DormandPrince {
public:
    DormandPrince(const VectorField &field, const IntegratorOptions &options)
        : field_(field), options_(options), n_(field.dimension()) {
        for (auto *k : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &tmp_, &y_new_, &r1_, &r2_, &r3_, &r4_, &r5_}) k->resize(n_);
    }

    Trajectory run(const Eigen::VectorXd &y0, double t0, const Eigen::VectorXd &times) {
        Trajectory out;
        out.times = times;
        out.states.resize(times.size(), n_);
        Eigen::Index next = 0;

        Eigen::VectorXd y = y0;
        double t = t0;
        while (next < times.size() && times(next) <= t0) out.states.row(next++) = y0.transpose();
        if (next == times.size()) return out;

        f(y, k1_);
        if (!k1_.allFinite()) fail(IntegrationFailure::non_finite, "vector field is not finite at the initial state", t, y, out, next);
        double h = initial_step(y, t);
        double fac_old = 1e-4;
        bool last_rejected = false;
        long steps = 0;
        const double t_end = times(times.size() - 1);

        while (next < times.size()) {
            if (++steps > options_.max_steps) fail(IntegrationFailure::too_many_steps, "step budget exhausted", t, y, out, next);
            h = std::min(h, options_.max_step);
            // Land exactly on the stop time rather than leaving a sliver behind.
            const double stop = options_.dense_output ? t_end : times(next);
            const bool lands = t + 1.01 * h >= stop;
            if (lands) h = stop - t;
            if (h < 1e-14 * std::max(1.0, std::abs(t))) fail(IntegrationFailure::step_underflow, "step size underflow", t, y, out, next);

            const double err = attempt(y, t, h);
            if (err <= 1.0) {
                if (y_new_.cwiseAbs().maxCoeff() > options_.blowup_threshold) {
                    fail(IntegrationFailure::blow_up, "state left the blow-up bound", t, y, out, next);
                }
                double factor = std::pow(err, kExpo) / std::pow(fac_old, kBeta);
                fac_old = std::max(err, 1e-4);
                const double t_new = lands ? stop : t + h;
                // Grid times reached by this step.
                if (options_.dense_output) {
                    prepare_dense(y, h);
                    while (next < times.size() && times(next) <= t_new) {
                        const double theta = (times(next) - t) / h;
                        out.states.row(next++) = dense(theta).transpose();
                    }
                } else {
                    while (next < times.size() && times(next) <= t_new) out.states.row(next++) = y_new_.transpose();
                }
                y = y_new_;
                t = t_new;
                k1_ = k7_;
                factor = std::clamp(factor / kSafety, 1.0 / kMaxFactor, 1.0 / kMinFactor);
                double h_new = h / factor;
                if (last_rejected) h_new = std::min(h_new, h);
                last_rejected = false;
                h = h_new;
            } else {
                const double shrink = std::isfinite(err) ? std::min(1.0 / kMinFactor, std::pow(err, kExpo) / kSafety) : 1.0 / kMinFactor;
                h /= shrink;
                last_rejected = true;
            }
        }
        return out;
    }

private:
    void f(const Eigen::VectorXd &y, Eigen::VectorXd &out) const {
        field_.eval(as_span(y), {out.data(), static_cast<std::size_t>(out.size())});
    }

    [[noreturn]] void fail(IntegrationFailure kind, const std::string &what, double t, const Eigen::VectorXd &y, Trajectory &out,
                           Eigen::Index produced) const {
        Trajectory partial;
        partial.last_time = t;
        partial.last_state = y;
        partial.times = out.times.head(produced);
        partial.states = out.states.topRows(produced);
        partial.diverged = true;
        throw IntegrationError(what + " at t = " + std::to_string(t), kind, t, std::move(partial));
    }

    double initial_step(const Eigen::VectorXd &y0, double t0) {
        const Eigen::ArrayXd sk = options_.atol + options_.rtol * y0.array().abs();
        const double dnf = (k1_.array() / sk).square().sum();
        const double dny = (y0.array() / sk).square().sum();
        double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
        h = std::min(h, options_.max_step);
        tmp_ = y0 + h * k1_;
        f(tmp_, k2_);
        const double der2 = std::sqrt(((k2_ - k1_).array() / sk).square().sum()) / h;
        const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
        const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
        (void)t0;
        return std::min({100.0 * h, h1, options_.max_step});
    }

    // One trial step; fills y_new_ and k7_ and returns the scaled error norm.
    double attempt(const Eigen::VectorXd &y, double /*t*/, double h) {
        tmp_ = y + h * a21 * k1_;
        f(tmp_, k2_);
        tmp_ = y + h * (a31 * k1_ + a32 * k2_);
        f(tmp_, k3_);
        tmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
        f(tmp_, k4_);
        tmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
        f(tmp_, k5_);
        tmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
        f(tmp_, k6_);
        y_new_ = y + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
        f(y_new_, k7_);
        if (!y_new_.allFinite() || !k7_.allFinite()) return std::numeric_limits<double>::infinity();
        const Eigen::ArrayXd err = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_).array();
        const Eigen::ArrayXd sk = options_.atol + options_.rtol * y.array().abs().max(y_new_.array().abs());
        const double norm = std::sqrt((err / sk).square().sum() / static_cast<double>(n_));
        return std::isfinite(norm) ? norm : std::numeric_limits<double>::infinity();
    }

    void prepare_dense(const Eigen::VectorXd &y, double h) {
        const Eigen::VectorXd diff = y_new_ - y;
        r1_ = y;
        r2_ = diff;
        r3_ = h * k1_ - diff;
        r4_ = diff - h * k7_ - r3_;
        r5_ = h * (d1 * k1_ + d3 * k3_ + d4 * k4_ + d5 * k5_ + d6 * k6_ + d7 * k7_);
    }

    [[nodiscard]] Eigen::VectorXd dense(double theta) const {
        const double theta1 = 1.0 - theta;
        return r1_ + theta * (r2_ + theta1 * (r3_ + theta * (r4_ + theta1 * r5_)));
    }

    const VectorField &field_;
    const IntegratorOptions &options_;
    Eigen::Index n_;
    Eigen::VectorXd k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, y_new_;
    Eigen::VectorXd r1_, r2_, r3_, r4_, r5_;
};

}  // namespace

Trajectory integrate(const VectorField &field, const Eigen::VectorXd &y0, double t0, const Eigen::VectorXd &times,
                     const IntegratorOptions &options) {
    if (y0.size() != field.dimension()) throw ContractError("initial state has wrong dimension");
    if (!y0.allFinite()) throw ContractError("initial state must be finite");
    if (!(options.rtol > 0.0) || !(options.atol > 0.0)) throw ContractError("integrator tolerances must be positive");
    for (Eigen::Index i = 0; i < times.size(); ++i) {
        if (times(i) < t0) throw ContractError("sample times must not precede the initial time");
        if (i > 0 && times(i) < times(i - 1)) throw ContractError("sample times must be ascending");
    }
    DormandPrince stepper(field, options);
    return stepper.run(y0, t0, times);
}

Trajectory forecast(const LearnedHamiltonian &model, const Eigen::VectorXd &y0, double t0, const Eigen::VectorXd &times,
                    const IntegratorOptions &options) {
    try {
        return integrate(VectorField::learned(model), y0, t0, times, options);
    } catch (const IntegrationError &err) {
        return err.partial();
    }
}

}  // namespace hamlearn
