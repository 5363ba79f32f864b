#include "wlasso/kernels.hpp"

#include <cassert>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wlasso::kernels {

namespace {

// Below this many multiply-adds the fork/join cost dominates.
constexpr std::ptrdiff_t kParallelWork = 1 << 15;

inline std::ptrdiff_t wrap(std::ptrdiff_t i, std::ptrdiff_t p) {
    return i >= p ? i - p : (i < 0 ? i + p : i);
}

}  // namespace

namespace serial {

void cyclic_convolve(std::span<const double> c, std::span<const double> x,
                     std::span<double> out) {
    const auto p = static_cast<std::ptrdiff_t>(c.size());
    assert(x.size() == c.size() && out.size() == c.size());
    for (std::ptrdiff_t l = 0; l < p; ++l) {
        double acc = 0.0;
        for (std::ptrdiff_t k = 0; k < p; ++k) {
            acc += c[static_cast<std::size_t>(wrap(l - k, p))] * x[static_cast<std::size_t>(k)];
        }
        out[static_cast<std::size_t>(l)] = acc;
    }
}

void cyclic_correlate(std::span<const double> c, std::span<const double> y,
                      std::span<double> out) {
    const auto p = static_cast<std::ptrdiff_t>(c.size());
    assert(y.size() == c.size() && out.size() == c.size());
    for (std::ptrdiff_t k = 0; k < p; ++k) {
        double acc = 0.0;
        for (std::ptrdiff_t l = 0; l < p; ++l) {
            acc += c[static_cast<std::size_t>(wrap(l - k, p))] * y[static_cast<std::size_t>(l)];
        }
        out[static_cast<std::size_t>(k)] = acc;
    }
}

void cyclic_autocorrelation(std::span<const double> c, std::span<double> out) {
    const auto p = static_cast<std::ptrdiff_t>(c.size());
    assert(out.size() == c.size());
    for (std::ptrdiff_t d = 0; d < p; ++d) {
        double acc = 0.0;
        for (std::ptrdiff_t j = 0; j < p; ++j) {
            acc += c[static_cast<std::size_t>(j)] * c[static_cast<std::size_t>(wrap(j + d, p))];
        }
        out[static_cast<std::size_t>(d)] = acc;
    }
}

Eigen::MatrixXd column_cooccurrence(const BinaryMatrix& a) {
    const auto n = a.rows();
    const auto p = a.cols();
    Eigen::MatrixXd out(p, p);
    for (Eigen::Index u = 0; u < p; ++u) {
        for (Eigen::Index k = 0; k < p; ++k) {
            long count = 0;
            for (Eigen::Index l = 0; l < n; ++l) {
                count += a(l, u) * a(l, k);
            }
            out(u, k) = static_cast<double>(count);
        }
    }
    return out;
}

void binary_transpose_apply(const BinaryMatrix& a, std::span<const double> y,
                            std::span<double> out) {
    assert(static_cast<Eigen::Index>(y.size()) == a.rows());
    assert(static_cast<Eigen::Index>(out.size()) == a.cols());
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
        double acc = 0.0;
        for (Eigen::Index l = 0; l < a.rows(); ++l) {
            if (a(l, k) != 0) {
                acc += y[static_cast<std::size_t>(l)];
            }
        }
        out[static_cast<std::size_t>(k)] = acc;
    }
}

}  // namespace serial

namespace parallel {

// The circulant loops split the index range at the wrap point so the inner
// loops are contiguous and vectorize.

void cyclic_convolve(std::span<const double> c, std::span<const double> x,
                     std::span<double> out) {
    const auto p = static_cast<std::ptrdiff_t>(c.size());
    assert(x.size() == c.size() && out.size() == c.size());
    const double* cp = c.data();
    const double* xp = x.data();
#pragma omp parallel for schedule(static) if (p * p > kParallelWork)
    for (std::ptrdiff_t l = 0; l < p; ++l) {
        double acc = 0.0;
        // k <= l: c[l - k]; k > l: c[l - k + p]
        for (std::ptrdiff_t k = 0; k <= l; ++k) {
            acc += cp[l - k] * xp[k];
        }
        for (std::ptrdiff_t k = l + 1; k < p; ++k) {
            acc += cp[l - k + p] * xp[k];
        }
        out[static_cast<std::size_t>(l)] = acc;
    }
}

void cyclic_correlate(std::span<const double> c, std::span<const double> y,
                      std::span<double> out) {
    const auto p = static_cast<std::ptrdiff_t>(c.size());
    assert(y.size() == c.size() && out.size() == c.size());
    const double* cp = c.data();
    const double* yp = y.data();
#pragma omp parallel for schedule(static) if (p * p > kParallelWork)
    for (std::ptrdiff_t k = 0; k < p; ++k) {
        double acc = 0.0;
        // l >= k: c[l - k]; l < k: c[l - k + p]
        for (std::ptrdiff_t l = k; l < p; ++l) {
            acc += cp[l - k] * yp[l];
        }
        for (std::ptrdiff_t l = 0; l < k; ++l) {
            acc += cp[l - k + p] * yp[l];
        }
        out[static_cast<std::size_t>(k)] = acc;
    }
}

void cyclic_autocorrelation(std::span<const double> c, std::span<double> out) {
    cyclic_correlate(c, c, out);
}

Eigen::MatrixXd column_cooccurrence(const BinaryMatrix& a) {
    const auto n = a.rows();
    const auto p = a.cols();
    Eigen::MatrixXd out(p, p);
#pragma omp parallel for schedule(dynamic, 4) if (n * p * p > kParallelWork)
    for (Eigen::Index u = 0; u < p; ++u) {
        const std::uint8_t* au = a.col(u).data();
        for (Eigen::Index k = u; k < p; ++k) {
            const std::uint8_t* ak = a.col(k).data();
            long count = 0;
            for (Eigen::Index l = 0; l < n; ++l) {
                count += au[l] & ak[l];
            }
            out(u, k) = static_cast<double>(count);
            out(k, u) = static_cast<double>(count);
        }
    }
    return out;
}

void binary_transpose_apply(const BinaryMatrix& a, std::span<const double> y,
                            std::span<double> out) {
    assert(static_cast<Eigen::Index>(y.size()) == a.rows());
    assert(static_cast<Eigen::Index>(out.size()) == a.cols());
    const auto n = a.rows();
    const auto p = a.cols();
    const double* yp = y.data();
#pragma omp parallel for schedule(static) if (n * p > kParallelWork)
    for (Eigen::Index k = 0; k < p; ++k) {
        const std::uint8_t* ak = a.col(k).data();
        double acc = 0.0;
        for (Eigen::Index l = 0; l < n; ++l) {
            acc += ak[l] * yp[l];
        }
        out[static_cast<std::size_t>(k)] = acc;
    }
}

}  // namespace parallel

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0) {
        omp_set_num_threads(n);
    }
#else
    (void)n;
#endif
}

}  // namespace wlasso::kernels
