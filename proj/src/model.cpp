#include "wlasso/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>

#include "wlasso/errors.hpp"
#include "wlasso/kernels.hpp"

namespace wlasso {

namespace {

std::span<const double> view(const Vector& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

std::span<double> view(Vector& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

SparseSignal::SparseSignal(std::size_t p, std::vector<std::size_t> support,
                           std::vector<double> values)
    : p_(p), support_(std::move(support)), values_(std::move(values)), l1_(0.0) {
    if (support_.size() != values_.size()) {
        throw InvalidArgument("SparseSignal: support and values differ in length");
    }
    for (std::size_t i = 0; i < support_.size(); ++i) {
        if (support_[i] >= p_) {
            throw InvalidArgument("SparseSignal: support index out of range");
        }
        if (i > 0 && support_[i] <= support_[i - 1]) {
            throw InvalidArgument("SparseSignal: support must be strictly increasing");
        }
        if (!(values_[i] > 0.0) || !std::isfinite(values_[i])) {
            throw InvalidArgument("SparseSignal: values must be positive and finite");
        }
    }
    l1_ = std::accumulate(values_.begin(), values_.end(), 0.0);
}

Vector SparseSignal::dense() const {
    Vector x = Vector::Zero(static_cast<Index>(p_));
    for (std::size_t i = 0; i < support_.size(); ++i) {
        x(static_cast<Index>(support_[i])) = values_[i];
    }
    return x;
}

bool SparseSignal::contains(std::size_t k) const {
    return std::binary_search(support_.begin(), support_.end(), k);
}

std::uint64_t PoissonObservations::total() const noexcept {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

Vector PoissonObservations::as_vector() const {
    Vector y(static_cast<Index>(counts.size()));
    for (std::size_t i = 0; i < counts.size(); ++i) {
        y(static_cast<Index>(i)) = static_cast<double>(counts[i]);
    }
    return y;
}

LinearOperator LinearOperator::dense(Matrix m) {
    if (!m.allFinite()) {
        throw InvalidArgument("LinearOperator: non-finite matrix entry");
    }
    LinearOperator op;
    op.kind_ = OperatorKind::dense;
    op.dense_ = std::move(m);
    return op;
}

LinearOperator LinearOperator::circulant(Vector generator) {
    if (generator.size() == 0) {
        throw InvalidArgument("LinearOperator: empty circulant generator");
    }
    if (!generator.allFinite()) {
        throw InvalidArgument("LinearOperator: non-finite generator entry");
    }
    LinearOperator op;
    op.kind_ = OperatorKind::circulant;
    op.circulant_norm_sq_ = generator.squaredNorm();
    op.generator_ = std::move(generator);
    return op;
}

Index LinearOperator::rows() const noexcept {
    return kind_ == OperatorKind::dense ? dense_.rows() : generator_.size();
}

Index LinearOperator::cols() const noexcept {
    return kind_ == OperatorKind::dense ? dense_.cols() : generator_.size();
}

Vector LinearOperator::apply(const Vector& x) const {
    if (x.size() != cols()) {
        throw InvalidArgument("apply: expected length " + std::to_string(cols()) +
                              ", got " + std::to_string(x.size()));
    }
    if (kind_ == OperatorKind::dense) {
        return dense_ * x;
    }
    Vector out(rows());
    kernels::parallel::cyclic_convolve(view(generator_), view(x), view(out));
    return out;
}

Vector LinearOperator::apply_adjoint(const Vector& y) const {
    if (y.size() != rows()) {
        throw InvalidArgument("apply_adjoint: expected length " + std::to_string(rows()) +
                              ", got " + std::to_string(y.size()));
    }
    if (kind_ == OperatorKind::dense) {
        return dense_.transpose() * y;
    }
    Vector out(cols());
    kernels::parallel::cyclic_correlate(view(generator_), view(y), view(out));
    return out;
}

Vector LinearOperator::column(Index k) const {
    if (k < 0 || k >= cols()) {
        throw InvalidArgument("column: index out of range");
    }
    if (kind_ == OperatorKind::dense) {
        return dense_.col(k);
    }
    const Index p = generator_.size();
    Vector col(p);
    for (Index l = 0; l < p; ++l) {
        col(l) = generator_((l - k + p) % p);
    }
    return col;
}

double LinearOperator::column_norm_sq(Index k) const {
    if (k < 0 || k >= cols()) {
        throw InvalidArgument("column_norm_sq: index out of range");
    }
    return kind_ == OperatorKind::dense ? dense_.col(k).squaredNorm() : circulant_norm_sq_;
}

Vector LinearOperator::column_norms_sq() const {
    if (kind_ == OperatorKind::dense) {
        return dense_.colwise().squaredNorm().transpose();
    }
    return Vector::Constant(cols(), circulant_norm_sq_);
}

Matrix LinearOperator::materialize() const {
    if (kind_ == OperatorKind::dense) {
        return dense_;
    }
    const Index p = generator_.size();
    Matrix m(p, p);
    for (Index k = 0; k < p; ++k) {
        for (Index l = 0; l < p; ++l) {
            m(l, k) = generator_((l - k + p) % p);
        }
    }
    return m;
}

Matrix LinearOperator::restrict_columns(const std::vector<Index>& cols) const {
    Matrix out(rows(), static_cast<Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        out.col(static_cast<Index>(j)) = column(cols[j]);
    }
    return out;
}

SparseSignal make_sparse_signal(std::size_t p, std::size_t s, double target_l1, Rng& rng) {
    if (s > p) {
        throw InvalidArgument("make_sparse_signal: s = " + std::to_string(s) +
                              " exceeds p = " + std::to_string(p));
    }
    if (s == 0) {
        return SparseSignal(p, {}, {});
    }
    if (!(target_l1 > 0.0) || !std::isfinite(target_l1)) {
        throw InvalidArgument("make_sparse_signal: target_l1 must be positive");
    }

    // Partial Fisher-Yates: the first s slots are a uniform s-subset.
    std::vector<std::size_t> pool(p);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < s; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.uniform_index(p - i));
        std::swap(pool[i], pool[j]);
    }
    // Magnitudes are attached in draw order, so which location gets the
    // largest value is random too.
    std::vector<std::pair<std::size_t, double>> entries(s);
    double raw_sum = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
        const double v = std::exp(-static_cast<double>(j) / static_cast<double>(s)) + 0.2;
        entries[j] = {pool[j], v};
        raw_sum += v;
    }
    std::sort(entries.begin(), entries.end());

    std::vector<std::size_t> support(s);
    std::vector<double> values(s);
    for (std::size_t j = 0; j < s; ++j) {
        support[j] = entries[j].first;
        values[j] = entries[j].second * (target_l1 / raw_sum);
    }
    return SparseSignal(p, std::move(support), std::move(values));
}

PoissonObservations sample_poisson(const Vector& intensity, Rng& rng) {
    PoissonObservations obs;
    obs.counts.resize(static_cast<std::size_t>(intensity.size()));
    for (Index i = 0; i < intensity.size(); ++i) {
        const double lambda = intensity(i);
        if (!std::isfinite(lambda) || lambda < 0.0) {
            throw InvalidArgument("sample_poisson: intensity " + std::to_string(i) +
                                  " is negative or non-finite");
        }
        obs.counts[static_cast<std::size_t>(i)] = poisson_variate(lambda, rng);
    }
    return obs;
}

}  // namespace wlasso
