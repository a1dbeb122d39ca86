#include "hamlearn/lbfgs.hpp"

#include "hamlearn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace hamlearn {

std::string_view to_string(Termination reason) {
    switch (reason) {
        case Termination::converged: return "converged";
        case Termination::max_iterations: return "max_iterations";
        case Termination::line_search_failed: return "line_search_failed";
        case Termination::non_finite: return "non_finite";
    }
    return "unknown";
}

namespace {

struct Trial {
    double step = 0.0;
    double value = 0.0;
    double slope = 0.0;  // directional derivative along d
    Eigen::VectorXd x;
    Eigen::VectorXd grad;
};

struct LineSearchResult {
    bool ok = false;
    Trial point;
};

// Minimizer of the cubic matching values and slopes at a and b, falling back
// to bisection when it is undefined or too close to either end.
double cubic_step(const Trial &a, const Trial &b) {
    const double lo = std::min(a.step, b.step);
    const double hi = std::max(a.step, b.step);
    const double mid = 0.5 * (lo + hi);
    const double d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.step - b.step);
    const double disc = d1 * d1 - a.slope * b.slope;
    if (!(disc >= 0.0) || !std::isfinite(disc)) return mid;
    const double d2 = std::copysign(std::sqrt(disc), b.step - a.step);
    const double denom = b.slope - a.slope + 2.0 * d2;
    if (denom == 0.0) return mid;
    const double step = b.step - (b.step - a.step) * (b.slope + d2 - d1) / denom;
    const double margin = 0.1 * (hi - lo);
    if (!std::isfinite(step) || step < lo + margin || step > hi - margin) return mid;
    return step;
}

class StrongWolfeSearch {
public:
    StrongWolfeSearch(const ObjectiveFunction &objective, const LbfgsOptions &options, int &evaluations)
        : objective_(objective), options_(options), evaluations_(evaluations) {}

    LineSearchResult run(const Eigen::VectorXd &x, double f0, const Eigen::VectorXd &g0, const Eigen::VectorXd &d, double initial_step) {
        x0_ = &x;
        d_ = &d;
        f0_ = f0;
        slope0_ = g0.dot(d);
        budget_ = options_.max_line_search_evaluations;

        Trial prev{0.0, f0, slope0_, x, g0};
        double step = initial_step;
        for (int i = 0; budget_ > 0; ++i) {
            Trial cur = evaluate(step);
            if (!std::isfinite(cur.value) || !std::isfinite(cur.slope)) {
                step = prev.step + 0.5 * (step - prev.step);
                continue;
            }
            if (cur.value > f0_ + options_.c1 * cur.step * slope0_ || (i > 0 && cur.value >= prev.value)) return zoom(prev, cur);
            if (std::abs(cur.slope) <= -options_.c2 * slope0_) return {true, std::move(cur)};
            if (cur.slope >= 0.0) return zoom(cur, prev);
            prev = std::move(cur);
            step = 2.0 * prev.step;
        }
        return fallback(prev);
    }

private:
    Trial evaluate(double step) {
        Trial t;
        t.step = step;
        t.x = *x0_ + step * *d_;
        t.grad.resize(t.x.size());
        t.value = objective_(t.x, t.grad);
        t.slope = t.grad.dot(*d_);
        ++evaluations_;
        --budget_;
        return t;
    }

    // lo satisfies sufficient decrease and has the lowest value seen so far;
    // the minimizer is bracketed between lo and hi.
    LineSearchResult zoom(Trial lo, Trial hi) {
        while (budget_ > 0) {
            if (std::abs(hi.step - lo.step) <= 1e-16 * std::max(1.0, std::abs(lo.step))) break;
            Trial cur = evaluate(cubic_step(lo, hi));
            if (!std::isfinite(cur.value) || !std::isfinite(cur.slope) || cur.value > f0_ + options_.c1 * cur.step * slope0_ ||
                cur.value >= lo.value) {
                hi = std::move(cur);
                continue;
            }
            if (std::abs(cur.slope) <= -options_.c2 * slope0_) return {true, std::move(cur)};
            if (cur.slope * (hi.step - lo.step) >= 0.0) hi = lo;
            lo = std::move(cur);
        }
        return fallback(lo);
    }

    // Out of budget: accept the best point if it still decreases f.
    LineSearchResult fallback(Trial best) const {
        if (best.step > 0.0 && best.value < f0_) return {true, std::move(best)};
        return {false, std::move(best)};
    }

    const ObjectiveFunction &objective_;
    const LbfgsOptions &options_;
    int &evaluations_;
    const Eigen::VectorXd *x0_ = nullptr;
    const Eigen::VectorXd *d_ = nullptr;
    double f0_ = 0.0;
    double slope0_ = 0.0;
    int budget_ = 0;
};

struct CurvaturePair {
    Eigen::VectorXd s;
    Eigen::VectorXd y;
    double rho;
};

Eigen::VectorXd two_loop_direction(const std::deque<CurvaturePair> &pairs, const Eigen::VectorXd &g) {
    Eigen::VectorXd q = g;
    std::vector<double> alpha(pairs.size());
    for (std::size_t k = pairs.size(); k-- > 0;) {
        alpha[k] = pairs[k].rho * pairs[k].s.dot(q);
        q -= alpha[k] * pairs[k].y;
    }
    const CurvaturePair &last = pairs.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const double beta = pairs[k].rho * pairs[k].y.dot(q);
        q += (alpha[k] - beta) * pairs[k].s;
    }
    return -q;
}

}  // namespace

LbfgsReport lbfgs_minimize(const ObjectiveFunction &objective, Eigen::VectorXd &x, const LbfgsOptions &options) {
    if (options.memory < 1) throw ContractError("L-BFGS memory must be >= 1");
    LbfgsReport report;
    Eigen::VectorXd g(x.size());
    double f = objective(x, g);
    report.evaluations = 1;
    report.initial_value = f;
    report.final_value = f;
    report.accepted_values.push_back(f);
    if (!std::isfinite(f) || !g.allFinite()) {
        report.reason = Termination::non_finite;
        report.warning = true;
        return report;
    }

    std::deque<CurvaturePair> pairs;
    StrongWolfeSearch search(objective, options, report.evaluations);
    report.reason = Termination::max_iterations;

    while (true) {
        report.gradient_inf_norm = x.size() > 0 ? g.cwiseAbs().maxCoeff() : 0.0;
        if (report.gradient_inf_norm < options.gradient_tolerance * (1.0 + std::abs(f))) {
            report.reason = Termination::converged;
            break;
        }
        if (report.iterations >= options.max_iterations) break;

        Eigen::VectorXd d;
        double initial_step = 1.0;
        if (pairs.empty()) {
            d = -g;
            initial_step = 1.0 / std::max(1.0, g.norm());
        } else {
            d = two_loop_direction(pairs, g);
            if (!(g.dot(d) < 0.0)) {
                pairs.clear();
                d = -g;
                initial_step = 1.0 / std::max(1.0, g.norm());
            }
        }

        LineSearchResult ls = search.run(x, f, g, d, initial_step);
        if (!ls.ok && !pairs.empty()) {
            // Retry once along steepest descent with a fresh memory.
            pairs.clear();
            d = -g;
            ls = search.run(x, f, g, d, 1.0 / std::max(1.0, g.norm()));
        }
        if (!ls.ok) {
            report.reason = Termination::line_search_failed;
            report.warning = true;
            break;
        }

        Eigen::VectorXd s = ls.point.x - x;
        Eigen::VectorXd y = ls.point.grad - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
            if (static_cast<int>(pairs.size()) == options.memory) pairs.pop_front();
            pairs.push_back({std::move(s), std::move(y), 1.0 / sy});
        }
        x = std::move(ls.point.x);
        g = std::move(ls.point.grad);
        f = ls.point.value;
        ++report.iterations;
        report.accepted_values.push_back(f);
    }
    report.final_value = f;
    if (report.reason == Termination::max_iterations) report.warning = true;
    return report;
}

}  // namespace hamlearn
