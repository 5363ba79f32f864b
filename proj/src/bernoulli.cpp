#include "wlasso/bernoulli.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "wlasso/concentration.hpp"
#include "wlasso/errors.hpp"

namespace wlasso {

namespace {

double default_theta(const BernoulliInstance& inst, const BernoulliWeightOptions& opts) {
    return opts.theta.value_or(3.0 * std::log(static_cast<double>(inst.p)));
}

void check_observations(const BernoulliInstance& inst, const Vector& y) {
    if (y.size() != inst.n) {
        throw InvalidArgument("bernoulli: expected " + std::to_string(inst.n) +
                              " observations, got " + std::to_string(y.size()));
    }
    if (!y.allFinite()) {
        throw InvalidArgument("bernoulli: non-finite observation");
    }
}

// Correction for the U-statistic residual term shared by both weight families:
// c (theta / n + theta^2 max(q^2, (1-q)^2) / (n^2 q (1-q))) N_hat.
double residual_term(const BernoulliInstance& inst, double theta, double c, double n_hat) {
    const double n = static_cast<double>(inst.n);
    const double q = inst.q;
    const double spread = std::max(q * q, (1.0 - q) * (1.0 - q));
    return c * (theta / n + theta * theta * spread / (n * n * q * (1.0 - q))) * n_hat;
}

// max_l |R_l| for the direction R behind coordinate k; the same for every k.
double direction_sup(const BernoulliInstance& inst) {
    const double n = static_cast<double>(inst.n);
    return 1.0 / ((n - 1.0) * inst.q * (1.0 - inst.q));
}

}  // namespace

BernoulliInstance sample_bernoulli_matrix(Index n, Index p, double q, Rng& rng) {
    if (!(q > 0.0 && q < 1.0)) {
        throw InvalidArgument("sample_bernoulli_matrix: q must lie in (0, 1)");
    }
    if (n < 1 || p < 1) {
        throw InvalidArgument("sample_bernoulli_matrix: n and p must be positive");
    }
    BernoulliInstance inst;
    inst.n = n;
    inst.p = p;
    inst.q = q;
    inst.A.resize(n, p);
    inst.column_sums = Vector::Zero(p);
    for (Index k = 0; k < p; ++k) {
        long sum = 0;
        for (Index l = 0; l < n; ++l) {
            const std::uint8_t bit = rng.bernoulli(q) ? 1 : 0;
            inst.A(l, k) = bit;
            sum += bit;
        }
        inst.column_sums(k) = static_cast<double>(sum);
    }
    return inst;
}

Vector bernoulli_intensity(const BernoulliInstance& inst, const Vector& x) {
    if (x.size() != inst.p) {
        throw InvalidArgument("bernoulli_intensity: dimension mismatch");
    }
    Vector out = Vector::Zero(inst.n);
    for (Index k = 0; k < inst.p; ++k) {
        if (x(k) == 0.0) {
            continue;
        }
        for (Index l = 0; l < inst.n; ++l) {
            if (inst.A(l, k) != 0) {
                out(l) += x(k);
            }
        }
    }
    return out;
}

SurrogatePair surrogate_bernoulli(const BernoulliInstance& inst, const Vector& y) {
    if (inst.n < 2) {
        throw InvalidArgument("surrogate_bernoulli: n must be at least 2");
    }
    check_observations(inst, y);
    const double n = static_cast<double>(inst.n);
    const double q = inst.q;
    const double scale = std::sqrt(n * q * (1.0 - q));

    Matrix a_tilde = (inst.A.cast<double>().array() - q) / scale;
    const double total = y.sum();
    Vector y_tilde = (n * y.array() - total) / ((n - 1.0) * scale);
    return SurrogatePair{LinearOperator::dense(std::move(a_tilde)), std::move(y_tilde)};
}

SurrogatePair surrogate_bernoulli(const BernoulliInstance& inst, const PoissonObservations& y) {
    return surrogate_bernoulli(inst, y.as_vector());
}

double bernoulli_regime_denominator(const BernoulliInstance& inst, double theta) {
    const double n = static_cast<double>(inst.n);
    const double q = inst.q;
    return n * q - std::sqrt(2.0 * n * q * (1.0 - q) * theta) - std::max(q, 1.0 - q) * theta / 3.0;
}

double l1_norm_estimator(const BernoulliInstance& inst, const Vector& y,
                         std::optional<double> theta) {
    check_observations(inst, y);
    const double th = theta.value_or(3.0 * std::log(static_cast<double>(inst.p)));
    const double denom = bernoulli_regime_denominator(inst, th);
    if (!(denom > 0.0)) {
        std::ostringstream msg;
        msg << "l1_norm_estimator: nq - sqrt(6 nq(1-q) log p) - max(q,1-q) log p = " << denom
            << " <= 0 (n = " << inst.n << ", q = " << inst.q << ", p = " << inst.p
            << "); the estimator needs nq >= 12 max(q, 1-q) log p";
        throw RegimeViolation(msg.str());
    }
    // Column sums of A are at least `denom` with probability 1 - e^-theta,
    // and the total count is Poisson with mean sum_k S_k x_k.
    return variance_envelope(1.0, y.sum(), th) / denom;
}

double bernoulli_max_w(const BernoulliInstance& inst) {
    const double n = static_cast<double>(inst.n);
    const double q = inst.q;
    const Matrix co = kernels::parallel::column_cooccurrence(inst.A);
    const Vector& s = inst.column_sums;
    // a(l,k) = 1 contributes (n - S_k)^2, a(l,k) = 0 contributes S_k^2.
    double best = 0.0;
    for (Index k = 0; k < inst.p; ++k) {
        const double hit = (n - s(k)) * (n - s(k));
        const double miss = s(k) * s(k);
        for (Index u = 0; u < inst.p; ++u) {
            const double w = co(u, k) * hit + (s(u) - co(u, k)) * miss;
            best = std::max(best, w);
        }
    }
    const double scale = n * (n - 1.0) * q * (1.0 - q);
    return best / (scale * scale);
}

Vector bernoulli_vk_dot_y(const BernoulliInstance& inst, const Vector& y) {
    check_observations(inst, y);
    const double n = static_cast<double>(inst.n);
    Vector aty(inst.p);
    kernels::parallel::binary_transpose_apply(
        inst.A, {y.data(), static_cast<std::size_t>(y.size())},
        {aty.data(), static_cast<std::size_t>(aty.size())});
    const double total = y.sum();
    const double scale = n * (n - 1.0) * inst.q * (1.0 - inst.q);
    Vector out(inst.p);
    for (Index k = 0; k < inst.p; ++k) {
        const double s = inst.column_sums(k);
        out(k) = ((n - s) * (n - s) * aty(k) + s * s * (total - aty(k))) / (scale * scale);
    }
    return out;
}

WeightVector constant_weight_bernoulli(const BernoulliInstance& inst, const Vector& y,
                                       const BernoulliWeightOptions& opts) {
    const double theta = default_theta(inst, opts);
    const double n_hat = l1_norm_estimator(inst, y, theta);
    const double ops = static_cast<double>(inst.n) * static_cast<double>(inst.p) *
                       static_cast<double>(inst.p);
    if (ops > opts.max_exact_w_ops) {
        throw SizeGuard("constant_weight_bernoulli: exact W needs n p^2 = " +
                        std::to_string(ops) + " operations, above the guard of " +
                        std::to_string(opts.max_exact_w_ops));
    }
    const double w_max = bernoulli_max_w(inst);
    const double d = std::sqrt(2.0 * theta * w_max * n_hat) + direction_sup(inst) * theta / 3.0 +
                     residual_term(inst, theta, opts.c, n_hat);
    return WeightVector::constant(inst.p, d);
}

WeightVector nonconstant_weights_bernoulli(const BernoulliInstance& inst, const Vector& y,
                                           const BernoulliWeightOptions& opts) {
    const double theta = default_theta(inst, opts);
    const double n_hat = l1_norm_estimator(inst, y, theta);
    const Vector vy = bernoulli_vk_dot_y(inst, y);
    const double b = direction_sup(inst);
    const double tail = residual_term(inst, theta, opts.c, n_hat);
    Vector d(inst.p);
    for (Index k = 0; k < inst.p; ++k) {
        d(k) = empirical_deviation_bound(b, std::max(0.0, vy(k)), theta) + tail;
    }
    return WeightVector(std::move(d), WeightKind::nonconstant);
}

}  // namespace wlasso
