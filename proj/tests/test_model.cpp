#include <doctest.h>

#include <cmath>
#include <numeric>

#include "support.hpp"
#include "wlasso/errors.hpp"
#include "wlasso/model.hpp"

using namespace wlasso;
using testing::random_vector;

TEST_CASE("make_sparse_signal: empty signal") {
    Rng rng(1);
    const SparseSignal x = make_sparse_signal(10, 0, 0.0, rng);
    CHECK(x.sparsity() == 0);
    CHECK(x.l1() == 0.0);
    CHECK(x.dense().isZero(0.0));
}

TEST_CASE("make_sparse_signal: p = 5000, s = 5 keeps the l1 norm") {
    Rng rng(2);
    const SparseSignal x = make_sparse_signal(5000, 5, 37.5, rng);
    CHECK(x.sparsity() == 5);
    const double sum = std::accumulate(x.values().begin(), x.values().end(), 0.0);
    CHECK(std::fabs(sum - 37.5) <= 1e-12 * 37.5);
}

TEST_CASE("make_sparse_signal: full support") {
    Rng rng(3);
    const SparseSignal x = make_sparse_signal(8, 8, 1.0, rng);
    REQUIRE(x.sparsity() == 8);
    for (std::size_t k = 0; k < 8; ++k) {
        CHECK(x.support()[k] == k);
    }
    CHECK(std::fabs(x.l1() - 1.0) <= 1e-12);
}

TEST_CASE("make_sparse_signal: values are the shifted exponential series") {
    Rng rng(4);
    const std::size_t s = 6;
    const SparseSignal x = make_sparse_signal(50, s, 10.0, rng);
    std::vector<double> raw(s);
    for (std::size_t j = 0; j < s; ++j) {
        raw[j] = std::exp(-static_cast<double>(j) / s) + 0.2;
    }
    const double scale = 10.0 / std::accumulate(raw.begin(), raw.end(), 0.0);
    std::vector<double> got = x.values();
    std::sort(got.begin(), got.end());
    std::sort(raw.begin(), raw.end());
    for (std::size_t j = 0; j < s; ++j) {
        CHECK(got[j] == doctest::Approx(raw[j] * scale).epsilon(1e-14));
    }
}

TEST_CASE("make_sparse_signal: invariants over random sizes") {
    Rng gen(5);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = static_cast<std::size_t>(1 + gen.uniform_index(300));
        const auto s = static_cast<std::size_t>(gen.uniform_index(p + 1));
        const double l1 = s == 0 ? 0.0 : 0.1 + 1000.0 * gen.uniform();
        Rng rng(99, static_cast<std::uint64_t>(trial));
        const SparseSignal x = make_sparse_signal(p, s, l1, rng);
        REQUIRE(x.sparsity() == s);
        double sum = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
            CHECK(x.values()[j] > 0.0);
            CHECK(x.support()[j] < p);
            if (j > 0) {
                CHECK(x.support()[j] > x.support()[j - 1]);
            }
            sum += x.values()[j];
        }
        CHECK(std::fabs(sum - l1) <= 1e-12 * std::max(1.0, l1));
    }
}

TEST_CASE("make_sparse_signal: deterministic in the seed") {
    Rng a(17, 3);
    Rng b(17, 3);
    const SparseSignal x = make_sparse_signal(400, 9, 12.0, a);
    const SparseSignal y = make_sparse_signal(400, 9, 12.0, b);
    CHECK(x.support() == y.support());
    CHECK(x.values() == y.values());
}

TEST_CASE("make_sparse_signal: errors") {
    Rng rng(6);
    CHECK_THROWS_AS(make_sparse_signal(3, 4, 1.0, rng), InvalidArgument);
    CHECK_THROWS_AS(make_sparse_signal(3, 2, 0.0, rng), InvalidArgument);
    CHECK_THROWS_AS(make_sparse_signal(3, 2, -1.0, rng), InvalidArgument);
}

TEST_CASE("make_sparse_signal: support is uniform") {
    // Each index should be selected with probability s / p.
    const std::size_t p = 20;
    const std::size_t s = 4;
    const int draws = 20000;
    std::vector<int> hits(p, 0);
    for (int t = 0; t < draws; ++t) {
        Rng rng(8, static_cast<std::uint64_t>(t));
        const SparseSignal x = make_sparse_signal(p, s, 1.0, rng);
        for (auto k : x.support()) {
            ++hits[k];
        }
    }
    const double pi = static_cast<double>(s) / p;
    const double sd = std::sqrt(draws * pi * (1.0 - pi));
    for (std::size_t k = 0; k < p; ++k) {
        CHECK(std::fabs(hits[k] - draws * pi) < 4.5 * sd);
    }
}

TEST_CASE("SparseSignal: constructor validation") {
    CHECK_THROWS_AS(SparseSignal(5, {1, 1}, {1.0, 2.0}), InvalidArgument);
    CHECK_THROWS_AS(SparseSignal(5, {3, 1}, {1.0, 2.0}), InvalidArgument);
    CHECK_THROWS_AS(SparseSignal(5, {5}, {1.0}), InvalidArgument);
    CHECK_THROWS_AS(SparseSignal(5, {1}, {0.0}), InvalidArgument);
    CHECK_THROWS_AS(SparseSignal(5, {1, 2}, {1.0}), InvalidArgument);
    const SparseSignal x(5, {1, 3}, {0.5, 2.0});
    CHECK(x.contains(3));
    CHECK_FALSE(x.contains(2));
    CHECK(x.l1() == 2.5);
}

TEST_CASE("sample_poisson: zero intensity gives zero counts") {
    Rng rng(9);
    const PoissonObservations y = sample_poisson(Vector::Zero(3), rng);
    REQUIRE(y.size() == 3);
    CHECK(y.total() == 0);
}

TEST_CASE("sample_poisson: rejects bad intensities") {
    Rng rng(10);
    Vector bad(2);
    bad << 1.0, -0.5;
    CHECK_THROWS_AS(sample_poisson(bad, rng), InvalidArgument);
    bad << 1.0, std::nan("");
    CHECK_THROWS_AS(sample_poisson(bad, rng), InvalidArgument);
}

TEST_CASE("sample_poisson: mean of Poisson(4)") {
    const int draws = 100000;
    Rng rng(11);
    const PoissonObservations y = sample_poisson(Vector::Constant(draws, 4.0), rng);
    const double mean = static_cast<double>(y.total()) / draws;
    CHECK(std::fabs(mean - 4.0) <= 3.0 * std::sqrt(4.0 / draws));
}

TEST_CASE("sample_poisson: P(Y = 0) for Poisson(2)") {
    const int draws = 100000;
    Rng rng(12);
    const PoissonObservations y = sample_poisson(Vector::Constant(draws, 2.0), rng);
    const auto zeros = std::count(y.counts.begin(), y.counts.end(), std::uint64_t{0});
    const double p0 = std::exp(-2.0);
    const double se = std::sqrt(p0 * (1.0 - p0) / draws);
    CHECK(std::fabs(static_cast<double>(zeros) / draws - p0) <= 3.0 * se);
}

TEST_CASE("poisson_variate: mean and variance on both sides of the method switch") {
    // Exact first two moments; z-scores on the sample mean and on the sample
    // variance (variance of s^2 is lambda + 2 lambda^2 / (n - 1) asymptotically).
    for (double lambda : {0.3, 3.0, 9.5, 10.0, 37.0, 250.0, 5000.0}) {
        const int draws = 60000;
        Rng rng(13, static_cast<std::uint64_t>(lambda * 10));
        double sum = 0.0;
        double sum_sq = 0.0;
        for (int i = 0; i < draws; ++i) {
            const auto y = static_cast<double>(poisson_variate(lambda, rng));
            sum += y;
            sum_sq += y * y;
        }
        const double mean = sum / draws;
        const double var = (sum_sq - draws * mean * mean) / (draws - 1);
        CAPTURE(lambda);
        CHECK(std::fabs(mean - lambda) <= 4.0 * std::sqrt(lambda / draws));
        const double var_se = std::sqrt((lambda + 2.0 * lambda * lambda) / draws);
        CHECK(std::fabs(var - lambda) <= 4.0 * var_se);
    }
}

TEST_CASE("poisson_variate: pmf of Poisson(14) against the exact distribution") {
    // Chi-square goodness of fit over bins up to 35, upper tail pooled.
    const double lambda = 14.0;
    const int draws = 200000;
    const int bins = 36;
    std::vector<double> observed(bins, 0.0);
    Rng rng(14);
    for (int i = 0; i < draws; ++i) {
        const auto y = poisson_variate(lambda, rng);
        observed[std::min<std::size_t>(y, bins - 1)] += 1.0;
    }
    std::vector<double> pmf(bins, 0.0);
    double term = std::exp(-lambda);
    double acc = 0.0;
    for (int k = 0; k < bins - 1; ++k) {
        pmf[k] = term;
        acc += term;
        term *= lambda / (k + 1);
    }
    pmf[bins - 1] = 1.0 - acc;
    // Pool 0..2 so every expected count is above 5: 33 dof remain.
    pmf[2] += pmf[0] + pmf[1];
    observed[2] += observed[0] + observed[1];
    double chi2 = 0.0;
    for (int k = 2; k < bins; ++k) {
        const double expected = draws * pmf[k];
        chi2 += (observed[k] - expected) * (observed[k] - expected) / expected;
    }
    // 0.9999 quantile of chi-square with 33 dof.
    CHECK(chi2 < 72.0);
}

TEST_CASE("sample_poisson: deterministic in the seed") {
    const Vector lambda = Vector::LinSpaced(40, 0.0, 60.0);
    Rng a(15);
    Rng b(15);
    CHECK(sample_poisson(lambda, a).counts == sample_poisson(lambda, b).counts);
}

TEST_CASE("LinearOperator: identity generator") {
    Vector c = Vector::Zero(7);
    c(0) = 1.0;
    const LinearOperator op = LinearOperator::circulant(c);
    Rng rng(16);
    const Vector x = random_vector(7, rng);
    CHECK(testing::max_abs_diff(op.apply(x), x) == 0.0);
    CHECK(testing::max_abs_diff(op.apply_adjoint(x), x) == 0.0);
}

TEST_CASE("LinearOperator: circulant agrees with its definition") {
    Rng rng(17);
    for (Index p : {1, 2, 3, 16, 33, 64}) {
        const Vector c = random_vector(p, rng);
        const Matrix dense = testing::circulant_by_definition(c);
        const LinearOperator op = LinearOperator::circulant(c);
        CHECK((op.materialize() - dense).cwiseAbs().maxCoeff() == 0.0);
        const Vector x = random_vector(p, rng);
        CHECK(testing::max_abs_diff(op.apply(x), dense * x) <= 1e-12);
        CHECK(testing::max_abs_diff(op.apply_adjoint(x), dense.transpose() * x) <= 1e-12);
        for (Index k = 0; k < p; ++k) {
            CHECK(testing::max_abs_diff(op.column(k), dense.col(k)) == 0.0);
            CHECK(op.column_norm_sq(k) == doctest::Approx(dense.col(k).squaredNorm()));
        }
    }
}

TEST_CASE("LinearOperator: Gram columns from apply_adjoint(apply(e_k))") {
    Rng rng(18);
    const Index p = 12;
    const Vector c = random_vector(p, rng);
    const LinearOperator op = LinearOperator::circulant(c);
    const Matrix dense = testing::circulant_by_definition(c);
    const Matrix gram = dense.transpose() * dense;
    Matrix from_op(p, p);
    for (Index k = 0; k < p; ++k) {
        from_op.col(k) = op.apply_adjoint(op.apply(Vector::Unit(p, k)));
    }
    CHECK((from_op - gram).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((from_op - from_op.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("LinearOperator: duality <Ax, y> = <x, A^T y>") {
    Rng rng(19);
    for (int trial = 0; trial < 100; ++trial) {
        const bool circ = trial % 2 == 0;
        const Index p = 1 + static_cast<Index>(rng.uniform_index(64));
        const Index n = circ ? p : 1 + static_cast<Index>(rng.uniform_index(64));
        const LinearOperator op = circ ? LinearOperator::circulant(random_vector(p, rng))
                                       : LinearOperator::dense(testing::random_matrix(n, p, rng));
        const Vector x = random_vector(p, rng);
        const Vector y = random_vector(n, rng);
        const double lhs = op.apply(x).dot(y);
        const double rhs = x.dot(op.apply_adjoint(y));
        CHECK(std::fabs(lhs - rhs) <= 1e-10 * std::max(1.0, std::fabs(lhs)));
    }
}

TEST_CASE("LinearOperator: dimension checks") {
    const LinearOperator op = LinearOperator::dense(Matrix::Ones(3, 2));
    CHECK_THROWS_AS(op.apply(Vector::Ones(3)), InvalidArgument);
    CHECK_THROWS_AS(op.apply_adjoint(Vector::Ones(2)), InvalidArgument);
    const LinearOperator circ = LinearOperator::circulant(Vector::Ones(4));
    CHECK_THROWS_AS(circ.apply(Vector::Ones(3)), InvalidArgument);
}

TEST_CASE("LinearOperator: restrict_columns") {
    Rng rng(20);
    const Vector c = random_vector(9, rng);
    const LinearOperator op = LinearOperator::circulant(c);
    const Matrix dense = op.materialize();
    const Matrix sub = op.restrict_columns({1, 4, 8});
    REQUIRE(sub.cols() == 3);
    CHECK(sub.col(0) == dense.col(1));
    CHECK(sub.col(1) == dense.col(4));
    CHECK(sub.col(2) == dense.col(8));
}

TEST_CASE("Rng: streams are reproducible and distinct") {
    Rng a(1, 2);
    Rng b(1, 2);
    Rng c(1, 3);
    bool differ = false;
    for (int i = 0; i < 16; ++i) {
        const auto x = a();
        CHECK(x == b());
        differ = differ || x != c();
    }
    CHECK(differ);
}

TEST_CASE("Rng: uniform_index is unbiased on a small range") {
    Rng rng(21);
    const int draws = 70000;
    std::vector<int> hits(7, 0);
    for (int i = 0; i < draws; ++i) {
        ++hits[rng.uniform_index(7)];
    }
    double chi2 = 0.0;
    for (int h : hits) {
        const double e = draws / 7.0;
        chi2 += (h - e) * (h - e) / e;
    }
    // 6 dof, 0.9999 quantile about 27.9.
    CHECK(chi2 < 27.9);
}
