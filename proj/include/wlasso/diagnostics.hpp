#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wlasso/convolution.hpp"
#include "wlasso/model.hpp"
#include "wlasso/solver.hpp"

namespace wlasso {

/// Gram of an operator, dense. Refuses p above `max_p`.
Matrix gram_matrix(const LinearOperator& op, Index max_p = 4096);

/// xi_hat = max_{k,l} |(A^T A - I)_{k,l}|. Circulant operators only need one row.
double gram_deviation(const LinearOperator& op, Index max_p = 4096);

/**
 * min over all |J| = s of lambda_min(G_J): the best restricted-eigenvalue
 * constant 1 - delta_{s,0} for vectors supported on s coordinates. Enumerates
 * C(p, s) supports, refusing more than `max_supports`.
 */
double rip_lower_bruteforce(const LinearOperator& op, Index s, double max_supports = 1e6);

struct ReConstant {
    double delta = 0.0;  ///< (1 + 2 c0) xi s
    bool valid = false;  ///< s (1 + 2 c0) < 1 / xi
};
ReConstant re_constant_from_xi(double xi, double s, double c0);

struct CoverResult {
    bool pass = false;
    Index worst_k = 0;
    double margin = 0.0;  ///< min_k (d_k - |deviation_k|)
};
CoverResult weights_cover(const SurrogatePair& surrogate, const Vector& x_star,
                          const WeightVector& w);

struct SupportCondition {
    bool pass = false;
    double lhs = 0.0;
    double rhs = 0.0;
};
/// xi (2 gamma / (1 - delta)) sqrt(s sum_{S*} d_k^2) < (gamma/2 - 1) min_{k not in S*} d_k
SupportCondition support_condition_check(double xi, double gamma, double delta_s0,
                                         const WeightVector& d,
                                         const std::vector<Index>& support);

/// Error bounds for an s-sparse truth once support screening holds.
struct SparseBounds {
    double l2 = 0.0;    ///< 2 gamma / (1 - delta) * sqrt(sum_{S*} d_k^2)
    double l1 = 0.0;    ///< l2 * sqrt(s)
    double linf = 0.0;  ///< gamma * d_max
};
SparseBounds theoretical_l2_bound(double gamma, double delta_s0, const WeightVector& d,
                                  const std::vector<Index>& support);

/// Oracle least-squares bound: sum_{S*} deviation_k^2 / (1 - delta)^2, as a squared l2 error.
double oracle_ls_bound_sq(double delta_s0, const Vector& deviation,
                          const std::vector<Index>& support);

/// Prediction bound for s-sparse truth: 8 gamma^2 / (1 - delta_{s,2 rho}) sum_{S*} d_k^2.
double prediction_bound_sq(double gamma, double delta_s_2rho, const WeightVector& d,
                           const std::vector<Index>& support);

/// Sparsity-agnostic l2 bound with zero bias term:
/// 2 sqrt(2) gamma (1 + 2 rho) / (1 - delta_{2s,2rho}) sqrt(sum_{S*} d_k^2).
double general_l2_bound(double gamma, double delta_2s_2rho, const WeightVector& d,
                        const std::vector<Index>& support);

/// U(d) for every lag, straight from the counts.
Vector convolution_ustat(const ConvolutionInstance& inst);

/// max over (k, l) of |m (G_tilde - I)_{k,l} - U((k - l) mod p)|, with G_tilde
/// materialized from the surrogate operator. p is capped at `max_p`.
double ustat_check(const ConvolutionInstance& inst, Index max_p = 2048);

struct GramExpectation {
    double max_abs_dev = 0.0;   ///< max_{k,l} |mean(G)_{k,l} - I_{k,l}|
    double max_z = 0.0;         ///< max_{k,l} |mean - I| / standard error
    double max_diag_dev = 0.0;  ///< max_k |mean(G)_{k,k} - 1|
    double stderr_at_max = 0.0;
};
GramExpectation bernoulli_gram_expectation_check(Index n, Index p, double q, int n_draws,
                                                 std::uint64_t seed);
GramExpectation convolution_gram_expectation_check(Index p, Index m, int n_draws,
                                                   std::uint64_t seed);

struct AssumptionReport {
    double xi_hat = 0.0;
    std::optional<double> rip_lower;
    std::optional<double> re_bound;
    bool re_valid = false;
    bool weights_cover = false;
    Index worst_k = 0;
    double worst_margin = 0.0;
    bool support_cond = false;
    double support_lhs = 0.0;
    double support_rhs = 0.0;
    double theta_used = 0.0;
    double gamma = 0.0;
    double delta_s0 = 0.0;
    SparseBounds bounds;
    double general_l2 = 0.0;
    /// |min_{S*} x*_k| > gamma d_max, read with gamma for the unnamed constant.
    bool exact_support_margin = false;
};

struct AssessOptions {
    double gamma = 4.0;
    double theta = 0.0;
    /// Run the exhaustive restricted-eigenvalue search when C(p, s) allows.
    bool brute_force_rip = true;
    double max_supports = 1e6;
};

AssumptionReport assess(const SurrogatePair& surrogate, const SparseSignal& truth,
                        const WeightVector& w, const AssessOptions& opts);

/// Human-readable block followed by `key=value` lines.
void write_report(std::ostream& os, const AssumptionReport& report);

}  // namespace wlasso
