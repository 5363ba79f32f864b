#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "wlasso/convolution.hpp"
#include "wlasso/errors.hpp"
#include "wlasso/solver.hpp"

using namespace wlasso;
using testing::random_matrix;
using testing::random_vector;

namespace {

SurrogatePair identity_pair() {
    Vector y(2);
    y << 3.0, -1.0;
    return SurrogatePair{LinearOperator::dense(Matrix::Identity(2, 2)), y};
}

SurrogatePair random_dense_pair(Index n, Index p, Rng& rng) {
    return SurrogatePair{LinearOperator::dense(random_matrix(n, p, rng)), random_vector(n, rng)};
}

WeightVector random_weights(Index p, Rng& rng) {
    return WeightVector(random_vector(p, rng, 0.2, 2.0), WeightKind::nonconstant);
}

/// Matrix with exactly orthonormal columns: Householder reflector columns.
Matrix orthonormal_columns(Index n, Index p, Rng& rng) {
    Vector v = random_vector(n, rng);
    v.normalize();
    const Matrix h = Matrix::Identity(n, n) - 2.0 * v * v.transpose();
    return h.leftCols(p);
}

}  // namespace

TEST_CASE("soft_threshold") {
    CHECK(soft_threshold(3.0, 2.0) == 1.0);
    CHECK(soft_threshold(-3.0, 2.0) == -1.0);
    CHECK(soft_threshold(1.0, 2.0) == 0.0);
    CHECK(soft_threshold(-2.0, 2.0) == 0.0);
    static_assert(soft_threshold(5.0, 1.5) == 3.5);
}

TEST_CASE("objective: worked example and zero point") {
    const SurrogatePair sur = identity_pair();
    const WeightVector w = WeightVector::constant(2, 1.0);
    Vector x(2);
    x << 1.0, 0.0;
    CHECK(objective(sur, w, 4.0, x) == doctest::Approx(9.0).epsilon(1e-15));
    CHECK(objective(sur, w, 4.0, Vector::Zero(2)) == doctest::Approx(10.0));
    CHECK_THROWS_AS(objective(sur, w, 4.0, Vector::Zero(3)), InvalidArgument);
}

TEST_CASE("weighted_lasso: orthonormal worked example") {
    const SurrogatePair sur = identity_pair();
    const WeightVector w = WeightVector::constant(2, 1.0);
    SolverConfig cfg;
    cfg.gamma = 4.0;
    const SolveResult r = weighted_lasso(sur, w, cfg);
    CHECK(r.converged);
    CHECK(r.x_hat(0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.x_hat(1) == 0.0);
    CHECK(kkt_check(sur, w, 4.0, r.x_hat) <= 1e-12);
}

TEST_CASE("weighted_lasso: zero data gives zero in one sweep") {
    Rng rng(1);
    SurrogatePair sur = random_dense_pair(10, 15, rng);
    sur.Y_tilde.setZero();
    SolverConfig cfg;
    const SolveResult r = weighted_lasso(sur, random_weights(15, rng), cfg);
    CHECK(r.x_hat.isZero(0.0));
    CHECK(r.iterations == 1);
    CHECK(kkt_check(sur, random_weights(15, rng), 4.0, Vector::Zero(15)) == 0.0);
}

TEST_CASE("weighted_lasso: KKT on random 20 x 40 instances") {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const SurrogatePair sur = random_dense_pair(20, 40, rng);
        const WeightVector w = random_weights(40, rng);
        SolverConfig cfg;
        cfg.gamma = 0.5 + 4.0 * rng.uniform();
        const SolveResult r = weighted_lasso(sur, w, cfg);
        REQUIRE(r.converged);
        CHECK(r.kkt_residual <= 1e-8);
        CHECK(r.kkt_residual == doctest::Approx(kkt_check(sur, w, cfg.gamma, r.x_hat)).epsilon(1e-10));
        CHECK(r.objective == doctest::Approx(objective(sur, w, cfg.gamma, r.x_hat)).epsilon(1e-10));
    }
}

TEST_CASE("weighted_lasso: circulant and dense paths agree") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const Index p = 30 + static_cast<Index>(rng.uniform_index(40));
        const Vector c = random_vector(p, rng);
        const Vector y = random_vector(p, rng, -3.0, 3.0);
        const SurrogatePair circ{LinearOperator::circulant(c), y};
        const SurrogatePair dense{LinearOperator::dense(testing::circulant_by_definition(c)), y};
        const WeightVector w = random_weights(p, rng);
        SolverConfig cfg;
        cfg.gamma = 1.0;
        cfg.tol_coord = 1e-13;
        const SolveResult a = weighted_lasso(circ, w, cfg);
        const SolveResult b = weighted_lasso(dense, w, cfg);
        REQUIRE(a.converged);
        REQUIRE(b.converged);
        CHECK(testing::max_abs_diff(a.x_hat, b.x_hat) <= 1e-8);
    }
}

TEST_CASE("weighted_lasso: monotone descent across sweeps") {
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const bool circ = trial % 2 == 1;
        const Index p = 40;
        const SurrogatePair sur =
            circ ? SurrogatePair{LinearOperator::circulant(random_vector(p, rng)),
                                 random_vector(p, rng, -2.0, 2.0)}
                 : random_dense_pair(25, p, rng);
        SolverConfig cfg;
        cfg.gamma = 0.3;
        cfg.record_trace = true;
        const SolveResult r = weighted_lasso(sur, random_weights(p, rng), cfg);
        REQUIRE(r.objective_trace.size() >= 2);
        for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
            CHECK(r.objective_trace[i] <= r.objective_trace[i - 1] + 1e-12);
        }
    }
}

TEST_CASE("weighted_lasso: orthonormal columns reduce to soft thresholding") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = 30;
        const Index p = 1 + static_cast<Index>(rng.uniform_index(30));
        const Matrix a = orthonormal_columns(n, p, rng);
        const SurrogatePair sur{LinearOperator::dense(a), random_vector(n, rng, -3.0, 3.0)};
        const WeightVector w = random_weights(p, rng);
        SolverConfig cfg;
        cfg.gamma = 0.5 + 3.0 * rng.uniform();
        const SolveResult r = weighted_lasso(sur, w, cfg);
        const Vector z = a.transpose() * sur.Y_tilde;
        for (Index k = 0; k < p; ++k) {
            CHECK(std::fabs(r.x_hat(k) - soft_threshold(z(k), cfg.gamma * w[k] / 2.0)) <= 1e-10);
        }
    }
}

TEST_CASE("weighted_lasso: only the product gamma d matters") {
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const SurrogatePair sur = random_dense_pair(20, 30, rng);
        const Vector d = random_vector(30, rng, 0.2, 2.0);
        const double c = 0.25 + 3.0 * rng.uniform();
        SolverConfig base;
        base.gamma = 1.5;
        base.tol_coord = 1e-14;
        SolverConfig scaled = base;
        scaled.gamma = base.gamma * c;
        const SolveResult a =
            weighted_lasso(sur, WeightVector(d * c, WeightKind::nonconstant), base);
        const SolveResult b = weighted_lasso(sur, WeightVector(d, WeightKind::nonconstant), scaled);
        CHECK(testing::max_abs_diff(a.x_hat, b.x_hat) <= 1e-10);
    }
}

TEST_CASE("weighted_lasso: rescaled-column form gives the same estimate") {
    // With z = D x and columns a_k / d_k, the weighted problem becomes a
    // constant-weight LASSO in z.
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const Index n = 25;
        const Index p = 35;
        const Matrix a = random_matrix(n, p, rng);
        const Vector y = random_vector(n, rng, -2.0, 2.0);
        const Vector d = random_vector(p, rng, 0.3, 3.0);
        SolverConfig cfg;
        cfg.gamma = 1.2;
        cfg.tol_coord = 1e-14;
        const SolveResult wl = weighted_lasso(SurrogatePair{LinearOperator::dense(a), y},
                                              WeightVector(d, WeightKind::nonconstant), cfg);
        const Matrix a_scaled = a * d.cwiseInverse().asDiagonal();
        const SolveResult flat = weighted_lasso(SurrogatePair{LinearOperator::dense(a_scaled), y},
                                                WeightVector::constant(p, 1.0), cfg);
        const Vector x_back = flat.x_hat.cwiseQuotient(d);
        CHECK(testing::max_abs_diff(wl.x_hat, x_back) <= 1e-8);
    }
}

TEST_CASE("weighted_lasso: warm start reaches the same optimum") {
    Rng rng(8);
    const SurrogatePair sur = random_dense_pair(20, 40, rng);
    const WeightVector w = random_weights(40, rng);
    SolverConfig cfg;
    cfg.gamma = 0.8;
    const SolveResult cold = weighted_lasso(sur, w, cfg);
    const SolveResult warm = weighted_lasso(sur, w, cfg, Vector(random_vector(40, rng)));
    CHECK(warm.kkt_residual <= 1e-8);
    CHECK(testing::max_abs_diff(cold.x_hat, warm.x_hat) <= 1e-6);
}

TEST_CASE("weighted_lasso: input errors") {
    Rng rng(9);
    Matrix a = random_matrix(5, 4, rng);
    a.col(2).setZero();
    const SurrogatePair sur{LinearOperator::dense(a), random_vector(5, rng)};
    SolverConfig cfg;
    try {
        weighted_lasso(sur, WeightVector::constant(4, 1.0), cfg);
        FAIL("expected DegenerateColumn");
    } catch (const DegenerateColumn& e) {
        CHECK(e.column() == 2);
    }
    SurrogatePair bad = random_dense_pair(5, 4, rng);
    bad.Y_tilde(1) = std::nan("");
    CHECK_THROWS_AS(weighted_lasso(bad, WeightVector::constant(4, 1.0), cfg), InvalidArgument);
    CHECK_THROWS_AS(weighted_lasso(random_dense_pair(5, 4, rng), WeightVector::constant(3, 1.0), cfg),
                    InvalidArgument);
    SolverConfig neg;
    neg.gamma = -1.0;
    CHECK_THROWS_AS(neg.validate(), InvalidArgument);
    SolverConfig zero_iter;
    zero_iter.max_iter = 0;
    CHECK_THROWS_AS(zero_iter.validate(), InvalidArgument);
}

TEST_CASE("WeightVector: validation and rho") {
    CHECK_THROWS_AS(WeightVector(Vector::Zero(3), WeightKind::nonconstant), InvalidArgument);
    Vector uneven(2);
    uneven << 1.0, 2.0;
    CHECK_THROWS_AS(WeightVector(uneven, WeightKind::constant), InvalidArgument);
    const WeightVector w(uneven, WeightKind::nonconstant);
    CHECK(w.rho(4.0) == doctest::Approx(3.0 * 2.0));
    CHECK(parse_weight_kind("oracle") == WeightKind::oracle);
    CHECK(to_string(WeightKind::nonconstant) == "nonconstant");
    CHECK_THROWS_AS(parse_weight_kind("flat"), InvalidArgument);
}

TEST_CASE("kkt_check: zero point with zero data") {
    Rng rng(10);
    SurrogatePair sur = random_dense_pair(6, 8, rng);
    sur.Y_tilde.setZero();
    CHECK(kkt_check(sur, WeightVector::constant(8, 0.5), 2.0, Vector::Zero(8)) == 0.0);
}

TEST_CASE("kkt_check: perturbing an active coordinate") {
    // At an optimum g_k = (gamma d_k / 2) sign(x_k); moving x_k by t shifts
    // g_k by -t |a_k|^2, so the violation grows to t |a_k|^2.
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const SurrogatePair sur = random_dense_pair(20, 30, rng);
        const WeightVector w = random_weights(30, rng);
        SolverConfig cfg;
        cfg.gamma = 0.4;
        const SolveResult r = weighted_lasso(sur, w, cfg);
        Index k = -1;
        for (Index j = 0; j < 30; ++j) {
            if (r.x_hat(j) != 0.0 && std::fabs(r.x_hat(j)) > 0.2) {
                k = j;
                break;
            }
        }
        if (k < 0) {
            continue;
        }
        Vector x = r.x_hat;
        x(k) += std::copysign(0.1, x(k));
        const double expected = 0.1 * sur.A_tilde.column_norm_sq(k);
        CHECK(kkt_check(sur, w, cfg.gamma, x) >= expected - 1e-8);
    }
}

TEST_CASE("oracle_least_squares: identity design") {
    Rng rng(12);
    const Vector y = random_vector(6, rng);
    const SurrogatePair sur{LinearOperator::dense(Matrix::Identity(6, 6)), y};
    const Vector x = oracle_least_squares(sur, {2});
    Vector expected = Vector::Zero(6);
    expected(2) = y(2);
    CHECK(testing::max_abs_diff(x, expected) == 0.0);
}

TEST_CASE("oracle_least_squares: noiseless interpolation and normal equations") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix a = random_matrix(30, 50, rng);
        Vector x_star = Vector::Zero(50);
        std::vector<Index> support;
        for (Index k = 0; k < 50; k += 13) {
            support.push_back(k);
            x_star(k) = 1.0 + rng.uniform();
        }
        const SurrogatePair exact{LinearOperator::dense(a), a * x_star};
        CHECK(testing::max_abs_diff(oracle_least_squares(exact, support), x_star) <= 1e-10);

        const SurrogatePair noisy{LinearOperator::dense(a), random_vector(30, rng)};
        const Vector x = oracle_least_squares(noisy, support);
        const Vector r = noisy.Y_tilde - a * x;
        for (Index k : support) {
            CHECK(std::fabs(a.col(k).dot(r)) <= 1e-10);
        }
    }
}

TEST_CASE("oracle_least_squares: errors") {
    Rng rng(14);
    Matrix a = random_matrix(10, 5, rng);
    a.col(3) = 2.0 * a.col(1);
    const SurrogatePair sur{LinearOperator::dense(a), random_vector(10, rng)};
    CHECK_THROWS_AS(oracle_least_squares(sur, {}), InvalidArgument);
    CHECK_THROWS_AS(oracle_least_squares(sur, {7}), InvalidArgument);
    try {
        oracle_least_squares(sur, {1, 3});
        FAIL("expected SingularDesign");
    } catch (const SingularDesign& e) {
        CHECK(e.sigma_min() < 1e-10);
    }
    const SurrogatePair wide{LinearOperator::dense(random_matrix(2, 5, rng)), random_vector(2, rng)};
    CHECK_THROWS_AS(oracle_least_squares(wide, {0, 1, 2}), SingularDesign);
}

TEST_CASE("two_step: empty first stage") {
    Rng rng(15);
    const SurrogatePair sur = random_dense_pair(8, 10, rng);
    SolveResult first;
    first.x_hat = Vector::Zero(10);
    const TwoStepResult r = two_step(first, sur, 1e-9);
    CHECK(r.support.empty());
    CHECK(r.x_hat.isZero(0.0));
}

TEST_CASE("two_step: exact support on noiseless data recovers the truth") {
    Rng rng(16);
    const Matrix a = random_matrix(20, 30, rng);
    Vector x_star = Vector::Zero(30);
    x_star(4) = 2.0;
    x_star(17) = 0.5;
    const SurrogatePair sur{LinearOperator::dense(a), a * x_star};
    SolveResult first;
    first.x_hat = Vector::Zero(30);
    first.x_hat(4) = 1.0;
    first.x_hat(17) = 0.1;
    const TwoStepResult r = two_step(first, sur, 1e-9);
    CHECK(r.support == std::vector<Index>{4, 17});
    CHECK(testing::max_abs_diff(r.x_hat, x_star) <= 1e-10);
}

TEST_CASE("two_step: debiasing helps on convolution trials") {
    // p = 200, m = 20, s = 5, nonconstant weights at gamma = 4.
    int better = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        Rng rng(17, static_cast<std::uint64_t>(t));
        const SparseSignal truth = make_sparse_signal(200, 5, 100.0, rng);
        const ConvolutionInstance inst = sample_parents(200, 20, rng);
        const Vector y = sample_poisson(operator_A(inst).apply(truth.dense()), rng).as_vector();
        const SurrogatePair sur = surrogate_convolution(inst, y);
        SolverConfig cfg;
        cfg.gamma = 4.0;
        const SolveResult first = weighted_lasso(sur, nonconstant_weights_convolution(inst, y), cfg);
        const TwoStepResult second = two_step(first, sur, cfg.support_eps);
        const Vector x = truth.dense();
        if ((second.x_hat - x).squaredNorm() <= (first.x_hat - x).squaredNorm()) {
            ++better;
        }
    }
    CHECK(better >= 160);
}
