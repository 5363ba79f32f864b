#include "wlasso/concentration.hpp"

#include <cmath>
#include <string>

#include "wlasso/errors.hpp"

namespace wlasso {

namespace {

void require_nonnegative(double value, const char* name) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw InvalidArgument(std::string(name) + " must be finite and non-negative");
    }
}

void require_theta(double theta) {
    if (!(theta > 0.0) || !std::isfinite(theta)) {
        throw InvalidArgument("theta must be positive");
    }
}

}  // namespace

double bernstein_bound(double v, double b, double theta) {
    require_nonnegative(v, "v");
    require_nonnegative(b, "b");
    require_theta(theta);
    return std::sqrt(2.0 * v * theta) + b * theta / 3.0;
}

double variance_envelope(double b, double r2y, double theta) {
    require_nonnegative(b, "b");
    require_nonnegative(r2y, "r2y");
    require_theta(theta);
    const double root = std::sqrt(b * b * theta / 2.0) + std::sqrt(5.0 * b * b * theta / 6.0 + r2y);
    return root * root;
}

double empirical_deviation_bound(double b, double r2y, double theta) {
    require_nonnegative(b, "b");
    require_nonnegative(r2y, "r2y");
    require_theta(theta);
    const double root = std::sqrt(b * b * theta / 2.0) + std::sqrt(5.0 * b * b * theta / 6.0 + r2y);
    return root * std::sqrt(2.0 * theta) + b * theta / 3.0;
}

double bernstein_bound(const ConcentrationInput& in) {
    if (!in.v) {
        throw InvalidArgument("bernstein_bound: v is unknown outside simulations");
    }
    return bernstein_bound(*in.v, in.b, in.theta);
}

double empirical_deviation_bound(const ConcentrationInput& in) {
    return empirical_deviation_bound(in.b, in.r2y, in.theta);
}

TailCoverage tail_coverage_test(const Vector& R, const Vector& intensity, double theta,
                                std::size_t n_trials, std::uint64_t seed) {
    if (R.size() != intensity.size()) {
        throw InvalidArgument("tail_coverage_test: R and intensity differ in length");
    }
    if (n_trials == 0) {
        throw InvalidArgument("tail_coverage_test: n_trials must be at least 1");
    }
    require_theta(theta);
    for (Index l = 0; l < intensity.size(); ++l) {
        require_nonnegative(intensity(l), "intensity");
    }
    if (!R.allFinite()) {
        throw InvalidArgument("tail_coverage_test: non-finite direction");
    }

    const Vector r2 = R.cwiseAbs2();
    const double b = R.size() == 0 ? 0.0 : R.cwiseAbs().maxCoeff();
    const double v = r2.dot(intensity);
    const double mean = R.dot(intensity);
    const double oracle_bound = bernstein_bound(v, b, theta);

    long fail_bernstein = 0;
    long fail_empirical = 0;
    long fail_envelope = 0;
    const auto trials = static_cast<long>(n_trials);
#pragma omp parallel for schedule(static) reduction(+ : fail_bernstein, fail_empirical, fail_envelope)
    for (long t = 0; t < trials; ++t) {
        Rng rng(seed, static_cast<std::uint64_t>(t));
        double ry = 0.0;
        double r2y = 0.0;
        for (Index l = 0; l < intensity.size(); ++l) {
            const auto y = static_cast<double>(poisson_variate(intensity(l), rng));
            ry += R(l) * y;
            r2y += r2(l) * y;
        }
        const double deviation = std::fabs(ry - mean);
        if (deviation > 0.0 && deviation >= oracle_bound) {
            ++fail_bernstein;
        }
        if (deviation > 0.0 && deviation >= empirical_deviation_bound(b, r2y, theta)) {
            ++fail_empirical;
        }
        if (v > 0.0 && v >= variance_envelope(b, r2y, theta)) {
            ++fail_envelope;
        }
    }

    TailCoverage out;
    out.trials = n_trials;
    out.bernstein_failure = static_cast<double>(fail_bernstein) / static_cast<double>(n_trials);
    out.empirical_failure = static_cast<double>(fail_empirical) / static_cast<double>(n_trials);
    out.envelope_failure = static_cast<double>(fail_envelope) / static_cast<double>(n_trials);
    return out;
}

}  // namespace wlasso
