#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wlasso/model.hpp"
#include "wlasso/solver.hpp"

namespace wlasso {

/// m uniform parents on the circle Z/p and their per-position counts N(u).
struct ConvolutionInstance {
    Index p = 0;
    Index m = 0;
    std::vector<std::uint64_t> counts;
    std::vector<Index> parents;  ///< raw U_i; may be empty for hand-built instances

    /// Builds an instance from counts alone; m is their sum.
    static ConvolutionInstance from_counts(std::vector<std::uint64_t> counts);

    Vector counts_vector() const;
};

ConvolutionInstance sample_parents(Index p, Index m, Rng& rng);

/// Circulant A with A(l, k) = N((l - k) mod p).
LinearOperator operator_A(const ConvolutionInstance& inst);

/**
 * A_tilde = A / sqrt(m) - ((sqrt(m) - 1) / p) 1 1^T, kept circulant, and
 * Y_tilde_k = Y_k / sqrt(m) - ((sqrt(m) - 1) / p) * |Y|_1 / m.
 */
SurrogatePair surrogate_convolution(const ConvolutionInstance& inst, const Vector& y);
SurrogatePair surrogate_convolution(const ConvolutionInstance& inst, const PoissonObservations& y);

/// The Y -> Y_tilde map on its own; linear in y.
Vector convolution_y_tilde(const ConvolutionInstance& inst, const Vector& y);

/// max_u |N(u) - (m - 1) / p| / m
double convolution_B(const ConvolutionInstance& inst);

/// w(l) = sum_u (N(u) - (m-1)/p)^2 N(u + l) / m^2 for every lag l.
Vector convolution_w(const ConvolutionInstance& inst);

/// v_hat_k = sum_l (N(l - k) - (m-1)/p)^2 Y_l / m^2 for every k.
Vector convolution_v_hat(const ConvolutionInstance& inst, const Vector& y);

/// Constant weight; theta defaults to 2 log p.
WeightVector constant_weight_convolution(const ConvolutionInstance& inst, const Vector& y,
                                         std::optional<double> theta = std::nullopt);

/// Per-coordinate weights; theta defaults to 2 log p.
WeightVector nonconstant_weights_convolution(const ConvolutionInstance& inst, const Vector& y,
                                             std::optional<double> theta = std::nullopt);

/// A_tilde^T (Y_tilde - A_tilde x*), the noise the weights have to dominate.
Vector noise_deviation(const SurrogatePair& surrogate, const Vector& x_star);

/// d_k = |noise_deviation_k|, floored at 1e-12. Simulation only.
WeightVector oracle_weights(const SurrogatePair& surrogate, const Vector& x_star);

}  // namespace wlasso
