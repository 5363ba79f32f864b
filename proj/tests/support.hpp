#pragma once

#include <cmath>
#include <cstdint>

#include "wlasso/model.hpp"
#include "wlasso/rng.hpp"

namespace testing {

using wlasso::Index;
using wlasso::Matrix;
using wlasso::Rng;
using wlasso::Vector;

inline Vector random_vector(Index n, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) {
        v(i) = lo + (hi - lo) * rng.uniform();
    }
    return v;
}

inline Matrix random_matrix(Index rows, Index cols, Rng& rng) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) {
            m(i, j) = 2.0 * rng.uniform() - 1.0;
        }
    }
    return m;
}

/// Standard normal by Box-Muller, for test data only.
inline double normal(Rng& rng) {
    const double u = 1.0 - rng.uniform();
    const double v = rng.uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * v);
}

/// p x p circulant straight from its definition A(l, k) = c[(l - k) mod p].
inline Matrix circulant_by_definition(const Vector& c) {
    const Index p = c.size();
    Matrix a(p, p);
    for (Index l = 0; l < p; ++l) {
        for (Index k = 0; k < p; ++k) {
            a(l, k) = c(((l - k) % p + p) % p);
        }
    }
    return a;
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testing
