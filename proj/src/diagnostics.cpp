#include "wlasso/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

#include <Eigen/Eigenvalues>

#include "wlasso/bernoulli.hpp"
#include "wlasso/errors.hpp"
#include "wlasso/kernels.hpp"

namespace wlasso {

namespace {

Vector circulant_gram_generator(const LinearOperator& op) {
    const Vector& c = op.generator();
    Vector h(c.size());
    kernels::parallel::cyclic_autocorrelation({c.data(), static_cast<std::size_t>(c.size())},
                                              {h.data(), static_cast<std::size_t>(h.size())});
    // h(d) = h(p - d) exactly; mirror so the Gram matrix is symmetric to the bit.
    const Index p = h.size();
    for (Index d = 1; d < (p + 1) / 2; ++d) {
        h(p - d) = h(d);
    }
    return h;
}

double binomial(Index n, Index k) {
    if (k < 0 || k > n) {
        return 0.0;
    }
    k = std::min(k, n - k);
    double out = 1.0;
    for (Index i = 1; i <= k; ++i) {
        out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return std::round(out);
}

// Lexicographic rank -> combination of s elements from {0..p-1}.
std::vector<Index> unrank_combination(long rank, Index p, Index s) {
    std::vector<Index> comb(static_cast<std::size_t>(s));
    Index x = 0;
    for (Index i = 0; i < s; ++i) {
        for (;;) {
            const auto block = static_cast<long>(binomial(p - x - 1, s - i - 1));
            if (block > rank) {
                break;
            }
            rank -= block;
            ++x;
        }
        comb[static_cast<std::size_t>(i)] = x++;
    }
    return comb;
}

bool next_combination(std::vector<Index>& comb, Index p) {
    const auto s = static_cast<Index>(comb.size());
    for (Index i = s - 1; i >= 0; --i) {
        auto& c = comb[static_cast<std::size_t>(i)];
        if (c < p - s + i) {
            ++c;
            for (Index j = i + 1; j < s; ++j) {
                comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
            }
            return true;
        }
    }
    return false;
}

double sum_sq_on(const WeightVector& d, const std::vector<Index>& support) {
    double acc = 0.0;
    for (Index k : support) {
        acc += d[k] * d[k];
    }
    return acc;
}

struct EntryMoments {
    Vector mean;
    Vector sd;
};

// Column-wise mean and sample standard deviation over rows (one row per draw),
// folded in draw order.
EntryMoments moments(const Matrix& samples) {
    const double draws = static_cast<double>(samples.rows());
    EntryMoments out;
    out.mean = samples.colwise().mean().transpose();
    const Matrix centred = samples.rowwise() - out.mean.transpose();
    out.sd = (centred.colwise().squaredNorm().transpose() / std::max(1.0, draws - 1.0))
                 .cwiseSqrt();
    return out;
}

GramExpectation summarize(const EntryMoments& mom, const Vector& target,
                          const std::vector<bool>& diagonal, double draws) {
    GramExpectation out;
    for (Index e = 0; e < mom.mean.size(); ++e) {
        const double dev = std::fabs(mom.mean(e) - target(e));
        const double se = mom.sd(e) / std::sqrt(draws);
        if (dev > out.max_abs_dev) {
            out.max_abs_dev = dev;
            out.stderr_at_max = se;
        }
        if (se > 0.0) {
            out.max_z = std::max(out.max_z, dev / se);
        } else if (dev > 0.0) {
            out.max_z = std::numeric_limits<double>::infinity();
        }
        if (diagonal[static_cast<std::size_t>(e)]) {
            out.max_diag_dev = std::max(out.max_diag_dev, dev);
        }
    }
    return out;
}

}  // namespace

Matrix gram_matrix(const LinearOperator& op, Index max_p) {
    const Index p = op.cols();
    if (p > max_p) {
        throw SizeGuard("gram_matrix: p = " + std::to_string(p) + " exceeds " +
                        std::to_string(max_p));
    }
    if (op.kind() == OperatorKind::dense) {
        return op.matrix().transpose() * op.matrix();
    }
    const Vector h = circulant_gram_generator(op);
    Matrix g(p, p);
    for (Index k = 0; k < p; ++k) {
        for (Index l = 0; l < p; ++l) {
            g(k, l) = h((l - k + p) % p);
        }
    }
    return g;
}

double gram_deviation(const LinearOperator& op, Index max_p) {
    if (op.kind() == OperatorKind::circulant) {
        const Vector h = circulant_gram_generator(op);
        double xi = std::fabs(h(0) - 1.0);
        for (Index d = 1; d < h.size(); ++d) {
            xi = std::max(xi, std::fabs(h(d)));
        }
        return xi;
    }
    const Matrix g = gram_matrix(op, max_p);
    return (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

double rip_lower_bruteforce(const LinearOperator& op, Index s, double max_supports) {
    const Index p = op.cols();
    if (s < 1 || s > p) {
        throw InvalidArgument("rip_lower_bruteforce: need 1 <= s <= p");
    }
    const double total = binomial(p, s);
    if (total > max_supports) {
        throw SizeGuard("rip_lower_bruteforce: C(" + std::to_string(p) + ", " +
                        std::to_string(s) + ") = " + std::to_string(total) +
                        " supports exceeds the guard of " + std::to_string(max_supports));
    }
    const Matrix g = gram_matrix(op);
    const auto count = static_cast<long>(total);
    constexpr long kChunk = 2048;
    const long chunks = (count + kChunk - 1) / kChunk;

    double best = std::numeric_limits<double>::infinity();
#pragma omp parallel for schedule(dynamic) reduction(min : best)
    for (long c = 0; c < chunks; ++c) {
        std::vector<Index> comb = unrank_combination(c * kChunk, p, s);
        const long end = std::min(count, (c + 1) * kChunk);
        Matrix sub(s, s);
        Eigen::SelfAdjointEigenSolver<Matrix> eig;
        for (long r = c * kChunk; r < end; ++r) {
            for (Index i = 0; i < s; ++i) {
                for (Index j = 0; j < s; ++j) {
                    sub(i, j) = g(comb[static_cast<std::size_t>(i)], comb[static_cast<std::size_t>(j)]);
                }
            }
            const double lam = s == 1 ? sub(0, 0)
                                      : eig.compute(sub, Eigen::EigenvaluesOnly).eigenvalues()(0);
            best = std::min(best, lam);
            next_combination(comb, p);
        }
    }
    return best;
}

ReConstant re_constant_from_xi(double xi, double s, double c0) {
    if (!(xi >= 0.0) || !(s >= 0.0) || !(c0 >= 0.0)) {
        throw InvalidArgument("re_constant_from_xi: inputs must be non-negative");
    }
    ReConstant out;
    out.delta = (1.0 + 2.0 * c0) * xi * s;
    out.valid = out.delta < 1.0;
    return out;
}

CoverResult weights_cover(const SurrogatePair& surrogate, const Vector& x_star,
                          const WeightVector& w) {
    const Vector dev = noise_deviation(surrogate, x_star);
    if (w.size() != dev.size()) {
        throw InvalidArgument("weights_cover: dimension mismatch");
    }
    CoverResult out;
    out.margin = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < dev.size(); ++k) {
        const double margin = w[k] - std::fabs(dev(k));
        if (margin < out.margin) {
            out.margin = margin;
            out.worst_k = k;
        }
    }
    out.pass = out.margin >= 0.0;
    return out;
}

SupportCondition support_condition_check(double xi, double gamma, double delta_s0,
                                         const WeightVector& d,
                                         const std::vector<Index>& support) {
    if (!(gamma > 2.0)) {
        throw InvalidArgument("support_condition_check: gamma must exceed 2");
    }
    if (!(delta_s0 >= 0.0 && delta_s0 < 1.0)) {
        throw InvalidArgument("support_condition_check: delta must lie in [0, 1)");
    }
    std::vector<bool> on(static_cast<std::size_t>(d.size()), false);
    for (Index k : support) {
        on[static_cast<std::size_t>(k)] = true;
    }
    double off_min = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < d.size(); ++k) {
        if (!on[static_cast<std::size_t>(k)]) {
            off_min = std::min(off_min, d[k]);
        }
    }
    if (!std::isfinite(off_min)) {
        throw InvalidArgument("support_condition_check: support covers every coordinate");
    }
    const double s = static_cast<double>(support.size());
    SupportCondition out;
    out.lhs = xi * (2.0 * gamma / (1.0 - delta_s0)) * std::sqrt(s * sum_sq_on(d, support));
    out.rhs = (gamma / 2.0 - 1.0) * off_min;
    out.pass = out.lhs < out.rhs;
    return out;
}

SparseBounds theoretical_l2_bound(double gamma, double delta_s0, const WeightVector& d,
                                  const std::vector<Index>& support) {
    if (!(gamma > 2.0)) {
        throw InvalidArgument("theoretical_l2_bound: gamma must exceed 2");
    }
    if (!(delta_s0 >= 0.0 && delta_s0 < 1.0)) {
        throw InvalidArgument("theoretical_l2_bound: delta must lie in [0, 1)");
    }
    SparseBounds out;
    out.l2 = 2.0 * gamma / (1.0 - delta_s0) * std::sqrt(sum_sq_on(d, support));
    out.l1 = out.l2 * std::sqrt(static_cast<double>(support.size()));
    out.linf = gamma * d.max();
    return out;
}

double oracle_ls_bound_sq(double delta_s0, const Vector& deviation,
                          const std::vector<Index>& support) {
    double acc = 0.0;
    for (Index k : support) {
        acc += deviation(k) * deviation(k);
    }
    return acc / ((1.0 - delta_s0) * (1.0 - delta_s0));
}

double prediction_bound_sq(double gamma, double delta_s_2rho, const WeightVector& d,
                           const std::vector<Index>& support) {
    return 8.0 * gamma * gamma / (1.0 - delta_s_2rho) * sum_sq_on(d, support);
}

double general_l2_bound(double gamma, double delta_2s_2rho, const WeightVector& d,
                        const std::vector<Index>& support) {
    const double rho = d.rho(gamma);
    return 2.0 * std::sqrt(2.0) * gamma * (1.0 + 2.0 * rho) / (1.0 - delta_2s_2rho) *
           std::sqrt(sum_sq_on(d, support));
}

Vector convolution_ustat(const ConvolutionInstance& inst) {
    const Index p = inst.p;
    const double m = static_cast<double>(inst.m);
    const double centre = m * (m - 1.0) / static_cast<double>(p);
    const Vector n = inst.counts_vector();
    Vector u(p);
    kernels::parallel::cyclic_autocorrelation({n.data(), static_cast<std::size_t>(p)},
                                              {u.data(), static_cast<std::size_t>(p)});
    u.array() -= centre;
    u(0) -= m;
    return u;
}

double ustat_check(const ConvolutionInstance& inst, Index max_p) {
    if (inst.p > max_p) {
        throw SizeGuard("ustat_check: p = " + std::to_string(inst.p) + " exceeds " +
                        std::to_string(max_p));
    }
    const Index p = inst.p;
    const double m = static_cast<double>(inst.m);
    const SurrogatePair sur = surrogate_convolution(inst, Vector::Zero(p));
    const Matrix a = sur.A_tilde.materialize();
    const Matrix g = a.transpose() * a - Matrix::Identity(p, p);
    const Vector u = convolution_ustat(inst);
    double worst = 0.0;
    for (Index k = 0; k < p; ++k) {
        for (Index l = 0; l < p; ++l) {
            worst = std::max(worst, std::fabs(m * g(k, l) - u((k - l + p) % p)));
        }
    }
    return worst;
}

GramExpectation bernoulli_gram_expectation_check(Index n, Index p, double q, int n_draws,
                                                 std::uint64_t seed) {
    if (n_draws < 2) {
        throw InvalidArgument("bernoulli_gram_expectation_check: need at least 2 draws");
    }
    const double nd = static_cast<double>(n);
    Matrix samples(n_draws, p * p);
#pragma omp parallel for schedule(static)
    for (int t = 0; t < n_draws; ++t) {
        Rng rng(seed, static_cast<std::uint64_t>(t));
        const BernoulliInstance inst = sample_bernoulli_matrix(n, p, q, rng);
        const Matrix co = kernels::serial::column_cooccurrence(inst.A);
        const Vector& s = inst.column_sums;
        for (Index k = 0; k < p; ++k) {
            for (Index l = 0; l < p; ++l) {
                samples(t, k * p + l) =
                    (co(k, l) - q * s(k) - q * s(l) + nd * q * q) / (nd * q * (1.0 - q));
            }
        }
    }
    Vector target = Vector::Zero(p * p);
    std::vector<bool> diagonal(static_cast<std::size_t>(p * p), false);
    for (Index k = 0; k < p; ++k) {
        target(k * p + k) = 1.0;
        diagonal[static_cast<std::size_t>(k * p + k)] = true;
    }
    return summarize(moments(samples), target, diagonal, n_draws);
}

GramExpectation convolution_gram_expectation_check(Index p, Index m, int n_draws,
                                                   std::uint64_t seed) {
    if (n_draws < 2) {
        throw InvalidArgument("convolution_gram_expectation_check: need at least 2 draws");
    }
    // G_tilde is circulant, so its p lags carry every entry.
    Matrix samples(n_draws, p);
#pragma omp parallel for schedule(static)
    for (int t = 0; t < n_draws; ++t) {
        Rng rng(seed, static_cast<std::uint64_t>(t));
        const ConvolutionInstance inst = sample_parents(p, m, rng);
        const SurrogatePair sur = surrogate_convolution(inst, Vector::Zero(p));
        const Vector& c = sur.A_tilde.generator();
        Vector h(p);
        kernels::serial::cyclic_autocorrelation({c.data(), static_cast<std::size_t>(p)},
                                                {h.data(), static_cast<std::size_t>(p)});
        samples.row(t) = h.transpose();
    }
    Vector target = Vector::Zero(p);
    target(0) = 1.0;
    std::vector<bool> diagonal(static_cast<std::size_t>(p), false);
    diagonal[0] = true;
    return summarize(moments(samples), target, diagonal, n_draws);
}

AssumptionReport assess(const SurrogatePair& surrogate, const SparseSignal& truth,
                        const WeightVector& w, const AssessOptions& opts) {
    AssumptionReport rep;
    rep.gamma = opts.gamma;
    rep.theta_used = opts.theta;
    rep.xi_hat = gram_deviation(surrogate.A_tilde);

    std::vector<Index> support;
    for (auto k : truth.support()) {
        support.push_back(static_cast<Index>(k));
    }
    const auto s = static_cast<Index>(support.size());

    const ReConstant re = re_constant_from_xi(rep.xi_hat, static_cast<double>(s), 0.0);
    rep.re_bound = re.delta;
    rep.re_valid = re.valid;
    if (opts.brute_force_rip && s >= 1 && binomial(surrogate.p(), s) <= opts.max_supports &&
        surrogate.p() <= 4096) {
        rep.rip_lower = rip_lower_bruteforce(surrogate.A_tilde, s, opts.max_supports);
    }
    if (rep.rip_lower) {
        rep.delta_s0 = std::max(0.0, 1.0 - *rep.rip_lower);
    } else {
        rep.delta_s0 = re.delta;
    }

    const CoverResult cover = weights_cover(surrogate, truth.dense(), w);
    rep.weights_cover = cover.pass;
    rep.worst_k = cover.worst_k;
    rep.worst_margin = cover.margin;

    const bool delta_ok = rep.delta_s0 >= 0.0 && rep.delta_s0 < 1.0;
    if (opts.gamma > 2.0 && delta_ok && s < surrogate.p()) {
        const SupportCondition cond =
            support_condition_check(rep.xi_hat, opts.gamma, rep.delta_s0, w, support);
        rep.support_cond = cond.pass;
        rep.support_lhs = cond.lhs;
        rep.support_rhs = cond.rhs;
    }
    if (opts.gamma > 2.0 && delta_ok) {
        rep.bounds = theoretical_l2_bound(opts.gamma, rep.delta_s0, w, support);
        const ReConstant re2 = re_constant_from_xi(rep.xi_hat, 2.0 * static_cast<double>(s),
                                                   2.0 * w.rho(opts.gamma));
        rep.general_l2 = re2.valid ? general_l2_bound(opts.gamma, re2.delta, w, support)
                                   : std::numeric_limits<double>::infinity();
    } else {
        rep.bounds.l2 = rep.bounds.l1 = std::numeric_limits<double>::infinity();
        rep.bounds.linf = opts.gamma * w.max();
        rep.general_l2 = std::numeric_limits<double>::infinity();
    }
    double smallest = std::numeric_limits<double>::infinity();
    for (double v : truth.values()) {
        smallest = std::min(smallest, v);
    }
    rep.exact_support_margin = s > 0 && smallest > opts.gamma * w.max();
    return rep;
}

void write_report(std::ostream& os, const AssumptionReport& r) {
    const auto flags = os.flags();
    os << std::setprecision(10);
    os << "Gram deviation xi_hat            " << r.xi_hat << '\n';
    if (r.rip_lower) {
        os << "restricted eigenvalue (exact)    " << *r.rip_lower << '\n';
    } else {
        os << "restricted eigenvalue (exact)    skipped\n";
    }
    os << "delta_{s,0} from xi              " << *r.re_bound
       << (r.re_valid ? "" : "  (s xi >= 1: not a valid constant)") << '\n';
    os << "weights cover the noise          " << (r.weights_cover ? "yes" : "no")
       << "  worst k = " << r.worst_k << ", margin = " << r.worst_margin << '\n';
    os << "support screening condition      " << (r.support_cond ? "holds" : "fails")
       << "  lhs = " << r.support_lhs << ", rhs = " << r.support_rhs << '\n';
    os << "l2 / l1 / linf bounds            " << r.bounds.l2 << " / " << r.bounds.l1 << " / "
       << r.bounds.linf << '\n';
    os << "general l2 bound (ratio)         " << r.general_l2 << "  ("
       << (r.bounds.l2 > 0.0 ? r.general_l2 / r.bounds.l2 : 0.0) << "x sparse bound)\n";
    os << "exact support margin (gamma)     " << (r.exact_support_margin ? "yes" : "no")
       << "  [unnamed constant read as gamma]\n";

    os << "xi_hat=" << r.xi_hat << '\n';
    os << "rip_lower=";
    if (r.rip_lower) {
        os << *r.rip_lower;
    } else {
        os << "NA";
    }
    os << '\n';
    os << "re_bound=" << *r.re_bound << '\n';
    os << "re_valid=" << (r.re_valid ? 1 : 0) << '\n';
    os << "delta_s0=" << r.delta_s0 << '\n';
    os << "weights_cover=" << (r.weights_cover ? 1 : 0) << '\n';
    os << "worst_k=" << r.worst_k << '\n';
    os << "worst_margin=" << r.worst_margin << '\n';
    os << "support_cond=" << (r.support_cond ? 1 : 0) << '\n';
    os << "support_lhs=" << r.support_lhs << '\n';
    os << "support_rhs=" << r.support_rhs << '\n';
    os << "l2_bound=" << r.bounds.l2 << '\n';
    os << "l1_bound=" << r.bounds.l1 << '\n';
    os << "linf_bound=" << r.bounds.linf << '\n';
    os << "general_l2_bound=" << r.general_l2 << '\n';
    os << "gamma=" << r.gamma << '\n';
    os << "theta_used=" << r.theta_used << '\n';
    os.flags(flags);
}

}  // namespace wlasso
