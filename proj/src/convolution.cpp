#include "wlasso/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>

#include "wlasso/concentration.hpp"
#include "wlasso/errors.hpp"
#include "wlasso/kernels.hpp"

namespace wlasso {

namespace {

constexpr double kOracleFloor = 1e-12;

double default_theta(const ConvolutionInstance& inst, std::optional<double> theta) {
    return theta.value_or(2.0 * std::log(static_cast<double>(inst.p)));
}

void check_observations(const ConvolutionInstance& inst, const Vector& y) {
    if (y.size() != inst.p) {
        throw InvalidArgument("convolution: expected " + std::to_string(inst.p) +
                              " observations, got " + std::to_string(y.size()));
    }
    if (!y.allFinite()) {
        throw InvalidArgument("convolution: non-finite observation");
    }
}

// f(u) = (N(u) - (m-1)/p)^2 / m^2
Vector centred_square_counts(const ConvolutionInstance& inst) {
    const double m = static_cast<double>(inst.m);
    const double centre = (m - 1.0) / static_cast<double>(inst.p);
    Vector f(inst.p);
    for (Index u = 0; u < inst.p; ++u) {
        const double dev = static_cast<double>(inst.counts[static_cast<std::size_t>(u)]) - centre;
        f(u) = dev * dev / (m * m);
    }
    return f;
}

Vector correlate(const Vector& c, const Vector& y) {
    Vector out(c.size());
    kernels::parallel::cyclic_correlate({c.data(), static_cast<std::size_t>(c.size())},
                                        {y.data(), static_cast<std::size_t>(y.size())},
                                        {out.data(), static_cast<std::size_t>(out.size())});
    return out;
}

}  // namespace

ConvolutionInstance ConvolutionInstance::from_counts(std::vector<std::uint64_t> counts) {
    if (counts.size() < 2) {
        throw InvalidArgument("ConvolutionInstance: p must be at least 2");
    }
    ConvolutionInstance inst;
    inst.p = static_cast<Index>(counts.size());
    inst.m = static_cast<Index>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
    if (inst.m < 1) {
        throw InvalidArgument("ConvolutionInstance: at least one parent required");
    }
    inst.counts = std::move(counts);
    return inst;
}

Vector ConvolutionInstance::counts_vector() const {
    Vector v(p);
    for (Index u = 0; u < p; ++u) {
        v(u) = static_cast<double>(counts[static_cast<std::size_t>(u)]);
    }
    return v;
}

ConvolutionInstance sample_parents(Index p, Index m, Rng& rng) {
    if (p < 2) {
        throw InvalidArgument("sample_parents: p must be at least 2");
    }
    if (m < 1) {
        throw InvalidArgument("sample_parents: m must be at least 1");
    }
    ConvolutionInstance inst;
    inst.p = p;
    inst.m = m;
    inst.counts.assign(static_cast<std::size_t>(p), 0);
    inst.parents.resize(static_cast<std::size_t>(m));
    for (auto& u : inst.parents) {
        u = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(p)));
        inst.counts[static_cast<std::size_t>(u)] += 1;
    }
    return inst;
}

LinearOperator operator_A(const ConvolutionInstance& inst) {
    return LinearOperator::circulant(inst.counts_vector());
}

Vector convolution_y_tilde(const ConvolutionInstance& inst, const Vector& y) {
    check_observations(inst, y);
    const double m = static_cast<double>(inst.m);
    const double root = std::sqrt(m);
    const double y_bar = y.sum() / m;
    const double shift = (root - 1.0) / static_cast<double>(inst.p) * y_bar;
    return (y.array() / root - shift).matrix();
}

SurrogatePair surrogate_convolution(const ConvolutionInstance& inst, const Vector& y) {
    const double m = static_cast<double>(inst.m);
    const double root = std::sqrt(m);
    const double shift = (root - 1.0) / static_cast<double>(inst.p);
    Vector generator = (inst.counts_vector().array() / root - shift).matrix();
    return SurrogatePair{LinearOperator::circulant(std::move(generator)),
                         convolution_y_tilde(inst, y)};
}

SurrogatePair surrogate_convolution(const ConvolutionInstance& inst,
                                    const PoissonObservations& y) {
    return surrogate_convolution(inst, y.as_vector());
}

double convolution_B(const ConvolutionInstance& inst) {
    const double m = static_cast<double>(inst.m);
    const double centre = (m - 1.0) / static_cast<double>(inst.p);
    double best = 0.0;
    for (auto n : inst.counts) {
        best = std::max(best, std::fabs(static_cast<double>(n) - centre));
    }
    return best / m;
}

Vector convolution_w(const ConvolutionInstance& inst) {
    return correlate(centred_square_counts(inst), inst.counts_vector());
}

Vector convolution_v_hat(const ConvolutionInstance& inst, const Vector& y) {
    check_observations(inst, y);
    return correlate(centred_square_counts(inst), y);
}

WeightVector constant_weight_convolution(const ConvolutionInstance& inst, const Vector& y,
                                         std::optional<double> theta) {
    check_observations(inst, y);
    const double th = default_theta(inst, theta);
    const double m = static_cast<double>(inst.m);
    const double w_max = convolution_w(inst).maxCoeff();
    const double y_bar = y.sum() / m;
    const double b = convolution_B(inst);
    // theta = 2 log p gives sqrt(4 W log p)(sqrt(Ybar + 5 log p / 3m) + sqrt(log p / m)) + 2 B log p / 3.
    const double d = std::sqrt(2.0 * th * w_max) *
                         (std::sqrt(std::max(0.0, y_bar) + 5.0 * th / (6.0 * m)) +
                          std::sqrt(th / (2.0 * m))) +
                     b * th / 3.0;
    return WeightVector::constant(inst.p, d);
}

WeightVector nonconstant_weights_convolution(const ConvolutionInstance& inst, const Vector& y,
                                             std::optional<double> theta) {
    const double th = default_theta(inst, theta);
    const Vector v_hat = convolution_v_hat(inst, y);
    const double b = convolution_B(inst);
    Vector d(inst.p);
    for (Index k = 0; k < inst.p; ++k) {
        d(k) = empirical_deviation_bound(b, std::max(0.0, v_hat(k)), th);
    }
    return WeightVector(std::move(d), WeightKind::nonconstant);
}

Vector noise_deviation(const SurrogatePair& surrogate, const Vector& x_star) {
    if (x_star.size() != surrogate.p()) {
        throw InvalidArgument("noise_deviation: dimension mismatch");
    }
    return surrogate.A_tilde.apply_adjoint(surrogate.Y_tilde - surrogate.A_tilde.apply(x_star));
}

WeightVector oracle_weights(const SurrogatePair& surrogate, const Vector& x_star) {
    Vector d = noise_deviation(surrogate, x_star).cwiseAbs().cwiseMax(kOracleFloor);
    return WeightVector(std::move(d), WeightKind::oracle);
}

}  // namespace wlasso
