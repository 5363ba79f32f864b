#include "wlasso/solver.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "wlasso/errors.hpp"
#include "wlasso/kernels.hpp"

namespace wlasso {

std::string_view to_string(WeightKind kind) noexcept {
    switch (kind) {
        case WeightKind::constant:
            return "constant";
        case WeightKind::nonconstant:
            return "nonconstant";
        case WeightKind::oracle:
            return "oracle";
    }
    return "unknown";
}

WeightKind parse_weight_kind(std::string_view text) {
    if (text == "constant") {
        return WeightKind::constant;
    }
    if (text == "nonconstant") {
        return WeightKind::nonconstant;
    }
    if (text == "oracle") {
        return WeightKind::oracle;
    }
    throw InvalidArgument("unknown weight kind '" + std::string(text) + "'");
}

WeightVector::WeightVector(Vector d, WeightKind kind) : d_(std::move(d)), kind_(kind) {
    if (d_.size() == 0) {
        throw InvalidArgument("WeightVector: empty");
    }
    for (Index k = 0; k < d_.size(); ++k) {
        if (!(d_(k) > 0.0) || !std::isfinite(d_(k))) {
            throw InvalidArgument("WeightVector: d_" + std::to_string(k) +
                                  " must be positive and finite");
        }
    }
    if (kind_ == WeightKind::constant && d_.maxCoeff() != d_.minCoeff()) {
        throw InvalidArgument("WeightVector: constant kind with unequal entries");
    }
}

WeightVector WeightVector::constant(Index p, double d) {
    return WeightVector(Vector::Constant(p, d), WeightKind::constant);
}

double WeightVector::rho(double gamma) const noexcept {
    return (gamma + 2.0) / (gamma - 2.0) * max() / min();
}

void SolverConfig::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw InvalidArgument("SolverConfig: gamma must be positive");
    }
    if (tol_coord && !(*tol_coord > 0.0)) {
        throw InvalidArgument("SolverConfig: tol_coord must be positive");
    }
    if (!(tol_kkt > 0.0)) {
        throw InvalidArgument("SolverConfig: tol_kkt must be positive");
    }
    if (max_iter < 1) {
        throw InvalidArgument("SolverConfig: max_iter must be at least 1");
    }
    if (!(support_eps >= 0.0)) {
        throw InvalidArgument("SolverConfig: support_eps must be non-negative");
    }
}

namespace {

void check_dims(const SurrogatePair& s, const WeightVector& w, const Vector& x) {
    if (s.Y_tilde.size() != s.n()) {
        throw InvalidArgument("surrogate: Y_tilde has length " +
                              std::to_string(s.Y_tilde.size()) + ", operator has " +
                              std::to_string(s.n()) + " rows");
    }
    if (w.size() != s.p() || x.size() != s.p()) {
        throw InvalidArgument("dimension mismatch: p = " + std::to_string(s.p()) +
                              ", weights " + std::to_string(w.size()) + ", x " +
                              std::to_string(x.size()));
    }
}

double kkt_violation(const Vector& grad, const WeightVector& w, double gamma, const Vector& x) {
    double worst = 0.0;
    for (Index k = 0; k < x.size(); ++k) {
        const double t = 0.5 * gamma * w[k];
        double v;
        if (x(k) != 0.0) {
            v = std::fabs(grad(k) - (x(k) > 0.0 ? t : -t));
        } else {
            v = std::max(0.0, std::fabs(grad(k)) - t);
        }
        worst = std::max(worst, v);
    }
    return worst;
}

Vector gram_generator(const LinearOperator& op) {
    const Vector& c = op.generator();
    Vector h(c.size());
    kernels::parallel::cyclic_autocorrelation({c.data(), static_cast<std::size_t>(c.size())},
                                              {h.data(), static_cast<std::size_t>(h.size())});
    return h;
}

}  // namespace

double objective(const SurrogatePair& surrogate, const WeightVector& w, double gamma,
                 const Vector& x) {
    check_dims(surrogate, w, x);
    const Vector r = surrogate.Y_tilde - surrogate.A_tilde.apply(x);
    return r.squaredNorm() + gamma * w.values().cwiseProduct(x.cwiseAbs()).sum();
}

double kkt_check(const SurrogatePair& surrogate, const WeightVector& w, double gamma,
                 const Vector& x) {
    check_dims(surrogate, w, x);
    const Vector r = surrogate.Y_tilde - surrogate.A_tilde.apply(x);
    return kkt_violation(surrogate.A_tilde.apply_adjoint(r), w, gamma, x);
}

SolveResult weighted_lasso(const SurrogatePair& surrogate, const WeightVector& w,
                           const SolverConfig& cfg, const std::optional<Vector>& x0) {
    cfg.validate();
    const Index p = surrogate.p();
    const LinearOperator& A = surrogate.A_tilde;
    const Vector& Y = surrogate.Y_tilde;

    Vector x = x0 ? *x0 : Vector::Zero(p);
    check_dims(surrogate, w, x);
    if (!Y.allFinite() || !x.allFinite()) {
        throw InvalidArgument("weighted_lasso: non-finite data or warm start");
    }
    const Vector norms = A.column_norms_sq();
    for (Index k = 0; k < p; ++k) {
        if (!(norms(k) > 0.0)) {
            throw DegenerateColumn(static_cast<std::size_t>(k));
        }
    }
    const double tol_coord = cfg.tol_coord.value_or(1e-9 * (1.0 + Y.lpNorm<Eigen::Infinity>()));
    const Vector thresholds = 0.5 * cfg.gamma * w.values();

    const bool circulant = A.kind() == OperatorKind::circulant;
    const Matrix& dense = A.matrix();
    Vector residual;
    Vector grad;
    Vector gram;
    auto refresh = [&] {
        residual = Y - A.apply(x);
        if (circulant) {
            grad = A.apply_adjoint(residual);
        }
    };
    refresh();
    if (circulant) {
        gram = gram_generator(A);
    }

    SolveResult result;
    if (cfg.record_trace) {
        result.objective_trace.push_back(objective(surrogate, w, cfg.gamma, x));
    }

    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        double max_change = 0.0;
        for (Index k = 0; k < p; ++k) {
            const double gk = circulant ? grad(k) : dense.col(k).dot(residual);
            const double updated = soft_threshold(gk + norms(k) * x(k), thresholds(k)) / norms(k);
            const double delta = updated - x(k);
            if (delta == 0.0) {
                continue;
            }
            x(k) = updated;
            max_change = std::max(max_change, std::fabs(delta));
            if (circulant) {
                // G(j, k) = gram[(j - k) mod p]
                const double* h = gram.data();
                double* g = grad.data();
                for (Index j = 0; j < k; ++j) {
                    g[j] -= delta * h[j - k + p];
                }
                for (Index j = k; j < p; ++j) {
                    g[j] -= delta * h[j - k];
                }
            } else {
                residual.noalias() -= delta * dense.col(k);
            }
        }
        result.iterations = iter;
        if (cfg.record_trace) {
            result.objective_trace.push_back(objective(surrogate, w, cfg.gamma, x));
        }
        if (max_change < tol_coord) {
            // Drop accumulated update error before certifying.
            refresh();
            const Vector g = circulant ? grad : Vector(A.apply_adjoint(residual));
            if (kkt_violation(g, w, cfg.gamma, x) < cfg.tol_kkt) {
                result.converged = true;
                break;
            }
        }
    }

    result.objective = objective(surrogate, w, cfg.gamma, x);
    result.kkt_residual = kkt_check(surrogate, w, cfg.gamma, x);
    result.x_hat = std::move(x);
    return result;
}

Vector oracle_least_squares(const SurrogatePair& surrogate, const std::vector<Index>& support) {
    const Index p = surrogate.p();
    if (support.empty()) {
        throw InvalidArgument("oracle_least_squares: empty support");
    }
    for (Index k : support) {
        if (k < 0 || k >= p) {
            throw InvalidArgument("oracle_least_squares: support index out of range");
        }
    }
    if (surrogate.Y_tilde.size() != surrogate.n()) {
        throw InvalidArgument("oracle_least_squares: Y_tilde length mismatch");
    }
    const Matrix sub = surrogate.A_tilde.restrict_columns(support);
    const Index s = sub.cols();
    if (sub.rows() < s) {
        throw SingularDesign(0.0, sub.norm());
    }

    Eigen::HouseholderQR<Matrix> qr(sub);
    // Singular values of A_S equal those of the triangular factor.
    const Matrix r = qr.matrixQR().topRows(s).triangularView<Eigen::Upper>();
    const Vector sigma = Eigen::JacobiSVD<Matrix>(r).singularValues();
    const double sigma_max = sigma(0);
    const double sigma_min = sigma(s - 1);
    if (!(sigma_min > 1e-10 * sigma_max)) {
        throw SingularDesign(sigma_min, sigma_max);
    }
    const Vector z = qr.solve(surrogate.Y_tilde);

    Vector x = Vector::Zero(p);
    for (Index j = 0; j < s; ++j) {
        x(support[static_cast<std::size_t>(j)]) = z(j);
    }
    return x;
}

std::vector<Index> support_of(const Vector& x, double eps) {
    std::vector<Index> out;
    for (Index k = 0; k < x.size(); ++k) {
        if (std::fabs(x(k)) > eps) {
            out.push_back(k);
        }
    }
    return out;
}

TwoStepResult two_step(const SolveResult& first_stage, const SurrogatePair& surrogate,
                       double support_eps) {
    if (!first_stage.x_hat.allFinite()) {
        throw InvalidArgument("two_step: non-finite first-stage estimate");
    }
    TwoStepResult out;
    out.support = support_of(first_stage.x_hat, support_eps);
    if (out.support.empty()) {
        out.x_hat = Vector::Zero(surrogate.p());
    } else {
        out.x_hat = oracle_least_squares(surrogate, out.support);
    }
    return out;
}

}  // namespace wlasso
