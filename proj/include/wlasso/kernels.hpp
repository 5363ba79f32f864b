#pragma once

// Data-parallel inner loops. Every kernel has a plain serial reference in
// `serial` and an OpenMP version in `parallel` with the same signature; the
// library calls `parallel`, tests check the two agree and bench/ times them.

#include <cstdint>
#include <span>

#include <Eigen/Dense>

namespace wlasso::kernels {

using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

namespace serial {

/// out[l] = sum_k c[(l - k) mod p] x[k]
void cyclic_convolve(std::span<const double> c, std::span<const double> x,
                     std::span<double> out);
/// out[k] = sum_l c[(l - k) mod p] y[l]
void cyclic_correlate(std::span<const double> c, std::span<const double> y,
                      std::span<double> out);
/// out[d] = sum_j c[j] c[(j + d) mod p]
void cyclic_autocorrelation(std::span<const double> c, std::span<double> out);
/// C(u, k) = sum_l a(l, u) a(l, k) for a 0/1 matrix.
Eigen::MatrixXd column_cooccurrence(const BinaryMatrix& a);
/// out = a^T y
void binary_transpose_apply(const BinaryMatrix& a, std::span<const double> y,
                            std::span<double> out);

}  // namespace serial

namespace parallel {

void cyclic_convolve(std::span<const double> c, std::span<const double> x,
                     std::span<double> out);
void cyclic_correlate(std::span<const double> c, std::span<const double> y,
                      std::span<double> out);
void cyclic_autocorrelation(std::span<const double> c, std::span<double> out);
Eigen::MatrixXd column_cooccurrence(const BinaryMatrix& a);
void binary_transpose_apply(const BinaryMatrix& a, std::span<const double> y,
                            std::span<double> out);

}  // namespace parallel

/// Threads used by parallel kernels and Monte Carlo loops (1 without OpenMP).
int max_threads();
/// n <= 0 leaves the runtime default in place.
void set_threads(int n);

}  // namespace wlasso::kernels
