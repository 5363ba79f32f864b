#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "wlasso/model.hpp"

namespace wlasso {

enum class WeightKind { constant, nonconstant, oracle };

std::string_view to_string(WeightKind kind) noexcept;
WeightKind parse_weight_kind(std::string_view text);

/// Strictly positive per-coordinate penalty levels d_k.
class WeightVector {
public:
    WeightVector(Vector d, WeightKind kind);

    static WeightVector constant(Index p, double d);

    const Vector& values() const noexcept { return d_; }
    WeightKind kind() const noexcept { return kind_; }
    Index size() const noexcept { return d_.size(); }
    double operator[](Index k) const { return d_(k); }

    double max() const noexcept { return d_.maxCoeff(); }
    double min() const noexcept { return d_.minCoeff(); }
    /// ((gamma + 2) / (gamma - 2)) * d_max / d_min; meaningful for gamma > 2.
    double rho(double gamma) const noexcept;

private:
    Vector d_;
    WeightKind kind_;
};

struct SolverConfig {
    double gamma = 4.0;
    /// Largest coordinate move allowed at convergence; unset means
    /// 1e-9 * (1 + max|Y_tilde|).
    std::optional<double> tol_coord;
    double tol_kkt = 1e-8;
    int max_iter = 10000;
    /// |x_k| above this counts as selected.
    double support_eps = 1e-9;
    /// Record the objective after every sweep in SolveResult::objective_trace.
    bool record_trace = false;

    void validate() const;
};

struct SolveResult {
    Vector x_hat;
    int iterations = 0;
    double kkt_residual = 0.0;
    double objective = 0.0;
    bool converged = false;
    /// objective_trace[0] is the starting point, then one entry per sweep.
    std::vector<double> objective_trace;
};

struct TwoStepResult {
    std::vector<Index> support;
    Vector x_hat;
};

/// ||Y_tilde - A_tilde x||^2 + gamma * sum_k d_k |x_k|  (no 1/2 on the fit term)
double objective(const SurrogatePair& surrogate, const WeightVector& w, double gamma,
                 const Vector& x);

constexpr double soft_threshold(double z, double t) noexcept {
    if (z > t) {
        return z - t;
    }
    if (z < -t) {
        return z + t;
    }
    return 0.0;
}

/**
 * Minimizes objective() by cyclic coordinate descent.
 *
 * Coordinate k is set to soft_threshold(a_k^T r + |a_k|^2 x_k, gamma d_k / 2)
 * / |a_k|^2. Dense operators keep the residual r = Y - A x; circulant ones keep
 * the gradient A^T r and update it with the Gram generator, so each move costs
 * O(p). Stops once the largest move in a sweep is below tol_coord and the KKT
 * residual is below tol_kkt.
 */
SolveResult weighted_lasso(const SurrogatePair& surrogate, const WeightVector& w,
                           const SolverConfig& cfg,
                           const std::optional<Vector>& x0 = std::nullopt);

/**
 * Largest violation of the optimality conditions at x:
 * |g_k - (gamma d_k / 2) sign(x_k)| where x_k != 0, and
 * max(0, |g_k| - gamma d_k / 2) where x_k == 0, with g = A^T (Y - A x).
 */
double kkt_check(const SurrogatePair& surrogate, const WeightVector& w, double gamma,
                 const Vector& x);

/// Least squares restricted to `support`, zero-filled elsewhere.
Vector oracle_least_squares(const SurrogatePair& surrogate, const std::vector<Index>& support);

/// Support of the first stage, then least squares on it.
TwoStepResult two_step(const SolveResult& first_stage, const SurrogatePair& surrogate,
                       double support_eps);

/// Indices with |x_k| > eps.
std::vector<Index> support_of(const Vector& x, double eps);

}  // namespace wlasso
