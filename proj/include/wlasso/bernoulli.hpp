#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wlasso/kernels.hpp"
#include "wlasso/model.hpp"
#include "wlasso/solver.hpp"

namespace wlasso {

/// n x p sensing matrix with iid Bernoulli(q) entries.
struct BernoulliInstance {
    Index n = 0;
    Index p = 0;
    double q = 0.5;
    kernels::BinaryMatrix A;
    Vector column_sums;  ///< sum_l a(l, k), exact small integers

    /// A as a real matrix.
    Matrix dense() const { return A.cast<double>(); }
};

struct BernoulliWeightOptions {
    /// Multiplier of the N_hat correction term; the theory fixes it only up
    /// to an absolute constant.
    double c = 1.0;
    /// Tail level; unset means 3 log p.
    std::optional<double> theta;
    /// Refuse the exact O(n p^2) constant-weight computation above this.
    double max_exact_w_ops = 1e9;
};

BernoulliInstance sample_bernoulli_matrix(Index n, Index p, double q, Rng& rng);

/// Intensity A x*.
Vector bernoulli_intensity(const BernoulliInstance& inst, const Vector& x);

/**
 * A_tilde = (A - q 1 1^T) / sqrt(n q (1 - q)),
 * Y_tilde = (n Y - (sum Y) 1) / ((n - 1) sqrt(n q (1 - q))).
 * Real-valued `y` is accepted so that noiseless data A x* can be fed in.
 */
SurrogatePair surrogate_bernoulli(const BernoulliInstance& inst, const Vector& y);
SurrogatePair surrogate_bernoulli(const BernoulliInstance& inst, const PoissonObservations& y);

/// nq - sqrt(2 n q (1-q) theta) - max(q, 1-q) theta / 3; must be positive.
double bernoulli_regime_denominator(const BernoulliInstance& inst, double theta);

/// High-probability upper estimate of ||x*||_1 from the total count.
double l1_norm_estimator(const BernoulliInstance& inst, const Vector& y,
                         std::optional<double> theta = std::nullopt);

/// max_{u,k} w(u, k) with w(u,k) = sum_l a(l,u) (n a(l,k) - S_k)^2 / (n^2 (n-1)^2 q^2 (1-q)^2).
double bernoulli_max_w(const BernoulliInstance& inst);

/// V_k^T Y for every k, V_{k,l} = ((n a(l,k) - S_k) / (n (n-1) q (1-q)))^2.
Vector bernoulli_vk_dot_y(const BernoulliInstance& inst, const Vector& y);

WeightVector constant_weight_bernoulli(const BernoulliInstance& inst, const Vector& y,
                                       const BernoulliWeightOptions& opts = {});
WeightVector nonconstant_weights_bernoulli(const BernoulliInstance& inst, const Vector& y,
                                           const BernoulliWeightOptions& opts = {});

}  // namespace wlasso
