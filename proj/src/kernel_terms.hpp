#pragma once

// Closed-form kernel derivatives, shared by the parallel and serial assemblies.
// Inputs are assumed to be validated by the caller.

#include "hamlearn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

namespace hamlearn::detail {

void check_pair(const KernelSpec &spec, std::span<const double> x, std::span<const double> y);

struct Range {
    std::size_t lo;
    std::size_t hi;
};

inline double int_pow(double base, int exponent) {
    double result = 1.0;
    for (int k = 0; k < exponent; ++k) result *= base;
    return result;
}

// u^d and its first three derivatives in u, each with the falling-factorial
// coefficient folded in. Terms whose coefficient vanishes are exactly zero.
struct PolyPowers {
    double p0, p1, p2, p3;
};

inline PolyPowers poly_powers(double u, int d) {
    PolyPowers out{int_pow(u, d), 0.0, 0.0, 0.0};
    if (d >= 1) out.p1 = d * int_pow(u, d - 1);
    if (d >= 2) out.p2 = d * (d - 1) * int_pow(u, d - 2);
    if (d >= 3) out.p3 = d * (d - 1) * (d - 2) * int_pow(u, d - 3);
    return out;
}

inline double dot(std::span<const double> x, std::span<const double> y, Range r) {
    double acc = 0.0;
    for (std::size_t a = r.lo; a < r.hi; ++a) acc += x[a] * y[a];
    return acc;
}

inline double sq_dist(std::span<const double> x, std::span<const double> y, Range r) {
    double acc = 0.0;
    for (std::size_t a = r.lo; a < r.hi; ++a) {
        const double d = x[a] - y[a];
        acc += d * d;
    }
    return acc;
}

// Each family is a sum of at most two parts, each a Gaussian or a polynomial
// acting on a contiguous coordinate range.
enum class PartKind { gaussian, polynomial };

struct Part {
    PartKind kind;
    Range range;
};

struct Parts {
    Part items[2];
    int count;
};

inline Parts parts_of(const KernelSpec &spec, std::size_t dim) {
    const std::size_t m = dim / 2;
    switch (spec.family()) {
        case KernelFamily::gaussian_time:
        case KernelFamily::gaussian_state: return {{{PartKind::gaussian, {0, dim}}, {PartKind::gaussian, {0, 0}}}, 1};
        case KernelFamily::separable_polynomial:
            return {{{PartKind::polynomial, {0, m}}, {PartKind::polynomial, {m, dim}}}, 2};
        case KernelFamily::additive_poly_gaussian:
            return {{{PartKind::gaussian, {0, m}}, {PartKind::polynomial, {m, dim}}}, 2};
    }
    return {{}, 0};
}

inline double eval_unchecked(const KernelSpec &spec, std::span<const double> x, std::span<const double> y) {
    const Parts parts = parts_of(spec, x.size());
    const double s = 1.0 / (spec.lengthscale() * spec.lengthscale());
    double value = 0.0;
    for (int k = 0; k < parts.count; ++k) {
        const Part &part = parts.items[k];
        if (part.kind == PartKind::gaussian) {
            value += std::exp(-0.5 * s * sq_dist(x, y, part.range));
        } else {
            value += int_pow(dot(x, y, part.range) + spec.offset(), spec.degree());
        }
    }
    return value;
}

inline void grad_unchecked(const KernelSpec &spec, std::span<const double> x, std::span<const double> y, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    const Parts parts = parts_of(spec, x.size());
    const double s = 1.0 / (spec.lengthscale() * spec.lengthscale());
    for (int k = 0; k < parts.count; ++k) {
        const Range r = parts.items[k].range;
        if (parts.items[k].kind == PartKind::gaussian) {
            const double kv = std::exp(-0.5 * s * sq_dist(x, y, r));
            for (std::size_t a = r.lo; a < r.hi; ++a) out[a] = -s * (x[a] - y[a]) * kv;
        } else {
            const PolyPowers pw = poly_powers(dot(x, y, r) + spec.offset(), spec.degree());
            for (std::size_t a = r.lo; a < r.hi; ++a) out[a] = pw.p1 * y[a];
        }
    }
}

inline void cross_hessian_unchecked(const KernelSpec &spec, std::span<const double> x, std::span<const double> y, std::span<double> out) {
    const std::size_t dim = x.size();
    std::fill(out.begin(), out.end(), 0.0);
    const Parts parts = parts_of(spec, dim);
    const double s = 1.0 / (spec.lengthscale() * spec.lengthscale());
    for (int k = 0; k < parts.count; ++k) {
        const Range r = parts.items[k].range;
        if (parts.items[k].kind == PartKind::gaussian) {
            // K (s δ_ab - s² r_a r_b), r = x - y
            const double kv = std::exp(-0.5 * s * sq_dist(x, y, r));
            for (std::size_t a = r.lo; a < r.hi; ++a) {
                const double ra = x[a] - y[a];
                for (std::size_t b = r.lo; b < r.hi; ++b) {
                    const double rb = x[b] - y[b];
                    out[a * dim + b] = kv * ((a == b ? s : 0.0) - s * s * ra * rb);
                }
            }
        } else {
            // P'' y_a x_b + P' δ_ab
            const PolyPowers pw = poly_powers(dot(x, y, r) + spec.offset(), spec.degree());
            for (std::size_t a = r.lo; a < r.hi; ++a) {
                for (std::size_t b = r.lo; b < r.hi; ++b) {
                    out[a * dim + b] = pw.p2 * y[a] * x[b] + (a == b ? pw.p1 : 0.0);
                }
            }
        }
    }
}

inline void third_unchecked(const KernelSpec &spec, std::span<const double> x, std::span<const double> y, std::span<double> out) {
    const std::size_t dim = x.size();
    std::fill(out.begin(), out.end(), 0.0);
    const Parts parts = parts_of(spec, dim);
    const double s = 1.0 / (spec.lengthscale() * spec.lengthscale());
    for (int k = 0; k < parts.count; ++k) {
        const Range r = parts.items[k].range;
        if (parts.items[k].kind == PartKind::gaussian) {
            // -s r_c K (s δ_ab - s² r_a r_b) - s² K (δ_ca r_b + δ_cb r_a)
            const double kv = std::exp(-0.5 * s * sq_dist(x, y, r));
            const double s2 = s * s;
            for (std::size_t c = r.lo; c < r.hi; ++c) {
                const double rc = x[c] - y[c];
                for (std::size_t a = r.lo; a < r.hi; ++a) {
                    const double ra = x[a] - y[a];
                    for (std::size_t b = r.lo; b < r.hi; ++b) {
                        const double rb = x[b] - y[b];
                        double v = -s * rc * kv * ((a == b ? s : 0.0) - s2 * ra * rb);
                        if (c == a) v -= s2 * kv * rb;
                        if (c == b) v -= s2 * kv * ra;
                        out[(c * dim + a) * dim + b] = v;
                    }
                }
            }
        } else {
            // P''' y_c y_a x_b + P'' (y_a δ_bc + y_c δ_ab)
            const PolyPowers pw = poly_powers(dot(x, y, r) + spec.offset(), spec.degree());
            for (std::size_t c = r.lo; c < r.hi; ++c) {
                for (std::size_t a = r.lo; a < r.hi; ++a) {
                    for (std::size_t b = r.lo; b < r.hi; ++b) {
                        double v = pw.p3 * y[c] * y[a] * x[b];
                        if (b == c) v += pw.p2 * y[a];
                        if (a == b) v += pw.p2 * y[c];
                        out[(c * dim + a) * dim + b] = v;
                    }
                }
            }
        }
    }
}

}  // namespace hamlearn::detail
