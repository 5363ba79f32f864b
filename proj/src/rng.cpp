#include "wlasso/rng.hpp"

#include <cmath>

namespace wlasso {

namespace {

std::uint64_t poisson_inversion(double lambda, Rng& rng) {
    const double u = rng.uniform();
    double term = std::exp(-lambda);
    double cdf = term;
    std::uint64_t k = 0;
    // Tail mass past k = 200 is below 1e-100 for lambda < 10.
    while (u >= cdf && k < 200) {
        k += 1;
        term *= lambda / static_cast<double>(k);
        cdf += term;
    }
    return k;
}

// Hormann (1993), "The transformed rejection method for generating Poisson
// random variables".
std::uint64_t poisson_ptrs(double lambda, Rng& rng) {
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);

    for (;;) {
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform();
        const double us = 0.5 - std::fabs(u);
        const double kd = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
        if (us >= 0.07 && v <= vr) {
            return static_cast<std::uint64_t>(kd);
        }
        if (kd < 0.0 || (us < 0.013 && v > us)) {
            continue;
        }
        const double lhs = std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b);
        const double rhs = -lambda + kd * loglam - std::lgamma(kd + 1.0);
        if (lhs <= rhs) {
            return static_cast<std::uint64_t>(kd);
        }
    }
}

}  // namespace

std::uint64_t poisson_variate(double lambda, Rng& rng) {
    if (lambda <= 0.0) {
        return 0;
    }
    return lambda < 10.0 ? poisson_inversion(lambda, rng) : poisson_ptrs(lambda, rng);
}

}  // namespace wlasso
