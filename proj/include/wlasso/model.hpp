#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "wlasso/rng.hpp"

namespace wlasso {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/**
 * Non-negative s-sparse ground truth. Values are strictly positive and
 * aligned with a strictly increasing support.
 */
class SparseSignal {
public:
    SparseSignal(std::size_t p, std::vector<std::size_t> support,
                 std::vector<double> values);

    std::size_t dim() const noexcept { return p_; }
    std::size_t sparsity() const noexcept { return support_.size(); }
    const std::vector<std::size_t>& support() const noexcept { return support_; }
    const std::vector<double>& values() const noexcept { return values_; }
    double l1() const noexcept { return l1_; }

    Vector dense() const;
    bool contains(std::size_t k) const;

private:
    std::size_t p_;
    std::vector<std::size_t> support_;
    std::vector<double> values_;
    double l1_;
};

/// Observed photon / child counts.
struct PoissonObservations {
    std::vector<std::uint64_t> counts;

    std::size_t size() const noexcept { return counts.size(); }
    std::uint64_t total() const noexcept;
    Vector as_vector() const;
};

enum class OperatorKind { dense, circulant };

/**
 * Linear map R^p -> R^n, either an explicit matrix or a p x p circulant
 * with entry (l, k) = c[(l - k) mod p].
 */
class LinearOperator {
public:
    static LinearOperator dense(Matrix m);
    static LinearOperator circulant(Vector generator);

    OperatorKind kind() const noexcept { return kind_; }
    Index rows() const noexcept;
    Index cols() const noexcept;

    /// Dense storage; only valid for kind() == dense.
    const Matrix& matrix() const noexcept { return dense_; }
    /// Circulant generator; only valid for kind() == circulant.
    const Vector& generator() const noexcept { return generator_; }

    Vector apply(const Vector& x) const;
    Vector apply_adjoint(const Vector& y) const;

    Vector column(Index k) const;
    double column_norm_sq(Index k) const;
    Vector column_norms_sq() const;

    /// Explicit n x p matrix.
    Matrix materialize() const;
    /// Columns restricted to `cols`, as an explicit n x |cols| matrix.
    Matrix restrict_columns(const std::vector<Index>& cols) const;

private:
    OperatorKind kind_ = OperatorKind::dense;
    Matrix dense_;
    Vector generator_;
    double circulant_norm_sq_ = 0.0;
};

/// The recentred and rescaled pair every estimator works on.
struct SurrogatePair {
    LinearOperator A_tilde;
    Vector Y_tilde;

    Index n() const noexcept { return A_tilde.rows(); }
    Index p() const noexcept { return A_tilde.cols(); }
};

/**
 * Draws an s-sparse signal: uniform support without replacement, values
 * exp(-j/s) + 0.2 for j = 0..s-1 rescaled to sum to target_l1.
 */
SparseSignal make_sparse_signal(std::size_t p, std::size_t s, double target_l1, Rng& rng);

/// Independent Poisson draws; intensity 0 gives count 0.
PoissonObservations sample_poisson(const Vector& intensity, Rng& rng);

}  // namespace wlasso
