#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "wlasso/model.hpp"

namespace wlasso {

/// Observable summary of a direction R against counts Y ~ Poisson(A x*).
struct ConcentrationInput {
    double b = 0.0;                ///< max_l |R_l|
    double r2y = 0.0;              ///< sum_l R_l^2 Y_l
    double theta = 1.0;            ///< tail level; events fail with prob ~ e^-theta
    std::optional<double> v;       ///< sum_l R_l^2 (A x*)_l, oracle only
};

/// sqrt(2 v theta) + b theta / 3
double bernstein_bound(double v, double b, double theta);

/// (sqrt(b^2 theta / 2) + sqrt(5 b^2 theta / 6 + r2y))^2, an observable
/// upper bound on v with probability at least 1 - e^-theta.
double variance_envelope(double b, double r2y, double theta);

/// bernstein_bound with v replaced by variance_envelope; bounds
/// |R^T (Y - A x*)| with probability at least 1 - 3 e^-theta.
double empirical_deviation_bound(double b, double r2y, double theta);

double bernstein_bound(const ConcentrationInput& in);
double empirical_deviation_bound(const ConcentrationInput& in);

struct TailCoverage {
    std::size_t trials = 0;
    double bernstein_failure = 0.0;  ///< rate of |dev| >= bernstein_bound(v, b, theta)
    double empirical_failure = 0.0;  ///< rate of |dev| >= empirical_deviation_bound
    double envelope_failure = 0.0;   ///< rate of v >= variance_envelope
};

/// Simulates Y ~ Poisson(intensity) and reports how often each bound fails.
/// Trial t uses Rng(seed, t), so the result does not depend on thread count.
TailCoverage tail_coverage_test(const Vector& R, const Vector& intensity, double theta,
                                std::size_t n_trials, std::uint64_t seed);

}  // namespace wlasso
