#pragma once

#include "hamlearn/benchmarks.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace test {

inline double uniform(hamlearn::SplitMix64 &rng, double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
}

inline Eigen::VectorXd random_vector(hamlearn::SplitMix64 &rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(rng, lo, hi);
    return v;
}

inline hamlearn::PointSet random_points(hamlearn::SplitMix64 &rng, Eigen::Index n, Eigen::Index dim, double lo = -1.0, double hi = 1.0) {
    hamlearn::PointSet p(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) p(i, j) = uniform(rng, lo, hi);
    }
    return p;
}

/// max|a-b| / max(max|b|, floor)
inline double rel_err(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b, double floor = 1e-12) {
    return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), floor);
}

}  // namespace test
