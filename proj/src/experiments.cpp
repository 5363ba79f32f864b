#include "wlasso/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>

#include <omp.h>

#include "wlasso/bernoulli.hpp"
#include "wlasso/convolution.hpp"
#include "wlasso/errors.hpp"

namespace wlasso {

namespace {

// Sub-streams of a trial.
constexpr std::uint64_t kSignalStream = 0;
constexpr std::uint64_t kSensingStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

template <typename T>
bool strictly_increasing(const std::vector<T>& v) {
    return std::adjacent_find(v.begin(), v.end(), [](T a, T b) { return !(a < b); }) == v.end();
}

struct TrialData {
    SparseSignal truth{0, {}, {}};
    SurrogatePair surrogate;
    // Per weight kind, unset when the weights could not be formed.
    std::optional<WeightVector> weights[3];
    std::string weight_error[3];
};

std::size_t slot(WeightKind kind) { return static_cast<std::size_t>(kind); }

template <typename F>
void try_weights(TrialData& data, WeightKind kind, F&& make) {
    try {
        data.weights[slot(kind)] = make();
    } catch (const std::exception& e) {
        data.weight_error[slot(kind)] = e.what();
    }
}

TrialData draw_trial(const ExperimentConfig& cfg, const SweepPoint& point,
                     const std::vector<bool>& needed, Rng& trial_rng) {
    Rng signal_rng = trial_rng.split(kSignalStream);
    Rng sensing_rng = trial_rng.split(kSensingStream);
    Rng noise_rng = trial_rng.split(kNoiseStream);

    TrialData data;
    data.truth = make_sparse_signal(static_cast<std::size_t>(point.p),
                                    static_cast<std::size_t>(cfg.s), cfg.target_l1, signal_rng);
    const Vector x_star = data.truth.dense();

    if (cfg.model == ModelKind::convolution) {
        const ConvolutionInstance inst = sample_parents(point.p, point.m, sensing_rng);
        const Vector intensity = operator_A(inst).apply(x_star);
        const Vector y = cfg.noiseless ? intensity : sample_poisson(intensity, noise_rng).as_vector();
        data.surrogate = surrogate_convolution(inst, y);
        if (needed[slot(WeightKind::constant)]) {
            try_weights(data, WeightKind::constant,
                        [&] { return constant_weight_convolution(inst, y); });
        }
        if (needed[slot(WeightKind::nonconstant)]) {
            try_weights(data, WeightKind::nonconstant,
                        [&] { return nonconstant_weights_convolution(inst, y); });
        }
    } else {
        const BernoulliInstance inst = sample_bernoulli_matrix(point.n, point.p, cfg.q, sensing_rng);
        const Vector intensity = bernoulli_intensity(inst, x_star);
        const Vector y = cfg.noiseless ? intensity : sample_poisson(intensity, noise_rng).as_vector();
        data.surrogate = surrogate_bernoulli(inst, y);
        BernoulliWeightOptions opts;
        opts.c = cfg.c;
        if (needed[slot(WeightKind::constant)]) {
            try_weights(data, WeightKind::constant,
                        [&] { return constant_weight_bernoulli(inst, y, opts); });
        }
        if (needed[slot(WeightKind::nonconstant)]) {
            try_weights(data, WeightKind::nonconstant,
                        [&] { return nonconstant_weights_bernoulli(inst, y, opts); });
        }
    }
    if (needed[slot(WeightKind::oracle)]) {
        try_weights(data, WeightKind::oracle,
                    [&] { return oracle_weights(data.surrogate, x_star); });
    }
    return data;
}

std::vector<bool> needed_kinds(const std::vector<Variant>& vs) {
    std::vector<bool> needed(3, false);
    for (const auto& v : vs) {
        if (v.has_weights) {
            needed[slot(v.weight_kind)] = true;
        }
    }
    return needed;
}

Vector least_squares_on(const SurrogatePair& sur, const std::vector<Index>& support) {
    if (support.empty()) {
        return Vector::Zero(sur.p());
    }
    return oracle_least_squares(sur, support);
}

VariantOutcome solve_variant(const TrialData& data, const Variant& v,
                             double gamma, const std::vector<bool>& covered) {
    VariantOutcome out;
    try {
        Vector x_hat;
        if (v.estimator == Estimator::ls_oracle) {
            std::vector<Index> support(data.truth.support().begin(), data.truth.support().end());
            x_hat = least_squares_on(data.surrogate, support);
            out.covered = true;
        } else {
            const auto& w = data.weights[slot(v.weight_kind)];
            if (!w) {
                throw RegimeViolation(data.weight_error[slot(v.weight_kind)]);
            }
            SolverConfig sc;
            sc.gamma = gamma;
            const SolveResult first = weighted_lasso(data.surrogate, *w, sc);
            x_hat = two_step(first, data.surrogate, sc.support_eps).x_hat;
            out.covered = covered[slot(v.weight_kind)];
        }
        out.nmse = normalized_mse(x_hat, data.truth);
        out.ok = std::isfinite(out.nmse);
        if (!out.ok) {
            out.error = "non-finite error";
        }
    } catch (const std::exception& e) {
        out.ok = false;
        out.error = e.what();
    }
    return out;
}

std::vector<bool> coverage_flags(const TrialData& data) {
    std::vector<bool> covered(3, false);
    bool have_any = false;
    for (const auto& w : data.weights) {
        have_any = have_any || w.has_value();
    }
    if (!have_any) {
        return covered;
    }
    const Vector dev = noise_deviation(data.surrogate, data.truth.dense()).cwiseAbs();
    for (std::size_t k = 0; k < 3; ++k) {
        if (data.weights[k]) {
            covered[k] = (data.weights[k]->values().array() >= dev.array()).all();
        }
    }
    return covered;
}

Rng trial_stream(const ExperimentConfig& cfg, std::uint64_t split, int trial_index) {
    return Rng(cfg.seed, split).split(static_cast<std::uint64_t>(trial_index));
}

void apply_threads(const ExperimentConfig& cfg) {
    if (cfg.threads > 0) {
        omp_set_num_threads(cfg.threads);
    }
}

std::string format_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

using TuneTable = std::vector<std::vector<std::vector<double>>>;

double mean_over_trials(const TuneTable& nmse, std::size_t i, std::size_t g) {
    double sum = 0.0;
    int count = 0;
    for (const auto& trial : nmse) {
        const double v = trial[i][g];
        if (!std::isnan(v)) {
            sum += v;
            ++count;
        }
    }
    return count > 0 ? sum / count : std::numeric_limits<double>::infinity();
}

// Mean of nmse(g) - nmse(best) over trials where both solved, against
// `k` paired standard errors. k = 0 keeps only exact ties.
bool paired_tie(const TuneTable& nmse, std::size_t i, std::size_t g, std::size_t best, double k) {
    std::vector<double> diff;
    for (const auto& trial : nmse) {
        const double a = trial[i][g];
        const double b = trial[i][best];
        if (!std::isnan(a) && !std::isnan(b)) {
            diff.push_back(a - b);
        }
    }
    if (diff.empty()) {
        return false;
    }
    const double n = static_cast<double>(diff.size());
    const double mean = std::accumulate(diff.begin(), diff.end(), 0.0) / n;
    if (mean <= 0.0) {
        return true;
    }
    if (diff.size() < 2) {
        return false;
    }
    double ss = 0.0;
    for (double d : diff) {
        ss += (d - mean) * (d - mean);
    }
    return mean <= k * std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

std::string_view to_string(ModelKind kind) noexcept {
    return kind == ModelKind::bernoulli ? "bernoulli" : "convolution";
}

std::string_view to_string(SweepKind kind) noexcept { return kind == SweepKind::m ? "m" : "p"; }

std::string_view to_string(Estimator kind) noexcept {
    switch (kind) {
    case Estimator::ls_oracle:
        return "ls_oracle";
    case Estimator::lasso_two_step:
        return "lasso_two_step";
    case Estimator::wlasso_two_step:
        return "wlasso_two_step";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view text) {
    if (text == "bernoulli") {
        return ModelKind::bernoulli;
    }
    if (text == "convolution") {
        return ModelKind::convolution;
    }
    throw InvalidArgument("unknown model '" + std::string(text) + "'");
}

SweepKind parse_sweep_kind(std::string_view text) {
    if (text == "m") {
        return SweepKind::m;
    }
    if (text == "p") {
        return SweepKind::p;
    }
    throw InvalidArgument("unknown sweep '" + std::string(text) + "' (expected m or p)");
}

Estimator parse_estimator(std::string_view text) {
    for (Estimator e : {Estimator::ls_oracle, Estimator::lasso_two_step, Estimator::wlasso_two_step}) {
        if (text == to_string(e)) {
            return e;
        }
    }
    throw InvalidArgument("unknown estimator '" + std::string(text) + "'");
}

void ExperimentConfig::validate() const {
    if (p < 2) {
        throw InvalidArgument("experiment: p must be at least 2");
    }
    if (s < 0 || s > p) {
        throw InvalidArgument("experiment: need 0 <= s <= p");
    }
    if (!(q > 0.0 && q < 1.0)) {
        throw InvalidArgument("experiment: q must lie in (0, 1)");
    }
    if (trials < 1 || tune_trials < 1) {
        throw InvalidArgument("experiment: trials and tune_trials must be at least 1");
    }
    if (!strictly_increasing(m_grid) || !strictly_increasing(p_grid)) {
        throw InvalidArgument("experiment: grids must be strictly increasing");
    }
    for (Index m : m_grid) {
        if (m < (model == ModelKind::bernoulli ? 2 : 1)) {
            throw InvalidArgument("experiment: m_grid entries too small");
        }
    }
    for (Index pp : p_grid) {
        if (pp < std::max<Index>(2, s)) {
            throw InvalidArgument("experiment: p_grid entries must be at least max(2, s)");
        }
    }
    if (gamma_grid.empty()) {
        throw InvalidArgument("experiment: gamma_grid is empty");
    }
    if (!strictly_increasing(gamma_grid)) {
        throw InvalidArgument("experiment: gamma_grid must be strictly increasing");
    }
    for (double g : gamma_grid) {
        if (!(g > 0.0) || (!allow_gamma_le_2 && !(g > 2.0))) {
            throw InvalidArgument("experiment: gamma_grid values must exceed 2 "
                                  "(set allow_gamma_le_2 to explore below)");
        }
    }
    if (!(target_l1 >= 0.0) || !std::isfinite(target_l1) || (s > 0 && target_l1 == 0.0)) {
        throw InvalidArgument("experiment: target_l1 must be positive when s > 0");
    }
    if (!(gamma_tie_se >= 0.0) || !std::isfinite(gamma_tie_se)) {
        throw InvalidArgument("experiment: gamma_tie_se must be a finite non-negative number");
    }
    if (!(c_m > 0.0) || !(c >= 0.0)) {
        throw InvalidArgument("experiment: c_m must be positive and c non-negative");
    }
    if (sweep == SweepKind::p && model == ModelKind::bernoulli && n < 2) {
        throw InvalidArgument("experiment: Bernoulli p-sweep needs n >= 2");
    }
    if (threads < 0) {
        throw InvalidArgument("experiment: threads must be non-negative");
    }
}

std::string Variant::weight_label() const {
    return has_weights ? std::string(to_string(weight_kind)) : std::string("none");
}

std::vector<Variant> variants(const ExperimentConfig& cfg) {
    std::vector<Variant> out;
    auto wants = [&](Estimator e) {
        return std::find(cfg.estimators.begin(), cfg.estimators.end(), e) != cfg.estimators.end();
    };
    if (wants(Estimator::ls_oracle)) {
        out.push_back({Estimator::ls_oracle, false, WeightKind::constant});
    }
    if (wants(Estimator::lasso_two_step)) {
        out.push_back({Estimator::lasso_two_step, true, WeightKind::constant});
    }
    if (wants(Estimator::wlasso_two_step)) {
        for (WeightKind k : {WeightKind::nonconstant, WeightKind::oracle}) {
            if (std::find(cfg.weight_kinds.begin(), cfg.weight_kinds.end(), k) !=
                cfg.weight_kinds.end()) {
                out.push_back({Estimator::wlasso_two_step, true, k});
            }
        }
    }
    return out;
}

Index m_rule(Index p, double c_m) {
    const double pd = static_cast<double>(p);
    return std::max<Index>(1, static_cast<Index>(std::llround(c_m * std::sqrt(pd) * std::log(pd))));
}

std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg) {
    std::vector<SweepPoint> out;
    const bool conv = cfg.model == ModelKind::convolution;
    if (cfg.sweep == SweepKind::m) {
        for (Index m : cfg.m_grid) {
            out.push_back(conv ? SweepPoint{cfg.p, m, 0} : SweepPoint{cfg.p, 0, m});
        }
    } else {
        for (Index p : cfg.p_grid) {
            out.push_back(conv ? SweepPoint{p, m_rule(p, cfg.c_m), 0} : SweepPoint{p, 0, cfg.n});
        }
    }
    return out;
}

double normalized_mse(const Vector& x_hat, const SparseSignal& truth) {
    const double err = (x_hat - truth.dense()).squaredNorm();
    return truth.l1() > 0.0 ? err / truth.l1() : err;
}

std::vector<VariantOutcome> run_trial(const ExperimentConfig& cfg, const SweepPoint& point,
                                      const std::vector<double>& gammas, int trial_index,
                                      std::uint64_t split) {
    const std::vector<Variant> vs = variants(cfg);
    if (gammas.size() != vs.size()) {
        throw InvalidArgument("run_trial: one gamma per variant required");
    }
    std::vector<VariantOutcome> out(vs.size());
    try {
        Rng rng = trial_stream(cfg, split, trial_index);
        const TrialData data = draw_trial(cfg, point, needed_kinds(vs), rng);
        const std::vector<bool> covered = coverage_flags(data);
        for (std::size_t i = 0; i < vs.size(); ++i) {
            out[i] = solve_variant(data, vs[i], gammas[i], covered);
        }
    } catch (const std::exception& e) {
        for (auto& o : out) {
            o.ok = false;
            o.error = e.what();
        }
    }
    return out;
}

TuneResult tune_gamma(const ExperimentConfig& cfg, const SweepPoint& point, std::uint64_t split) {
    if (cfg.gamma_grid.empty()) {
        throw InvalidArgument("tune_gamma: empty gamma grid");
    }
    if (split == 0) {
        throw InvalidArgument("tune_gamma: split 0 is reserved for evaluation");
    }
    apply_threads(cfg);
    const std::vector<Variant> vs = variants(cfg);
    const std::size_t n_gamma = cfg.gamma_grid.size();
    const int trials = cfg.tune_trials;

    // nmse[t][variant][gamma], NaN on failure.
    std::vector<std::vector<std::vector<double>>> nmse(
        static_cast<std::size_t>(trials),
        std::vector<std::vector<double>>(vs.size(),
                                         std::vector<double>(n_gamma, std::nan(""))));
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < trials; ++t) {
        try {
            Rng rng = trial_stream(cfg, split, t);
            const TrialData data = draw_trial(cfg, point, needed_kinds(vs), rng);
            const std::vector<bool> covered(3, false);
            for (std::size_t i = 0; i < vs.size(); ++i) {
                // The oracle least squares has no gamma; solve it once.
                const std::size_t reps = vs[i].has_weights ? n_gamma : 1;
                for (std::size_t g = 0; g < reps; ++g) {
                    const VariantOutcome o =
                        solve_variant(data, vs[i], cfg.gamma_grid[g], covered);
                    if (o.ok) {
                        nmse[static_cast<std::size_t>(t)][i][g] = o.nmse;
                    }
                }
            }
        } catch (const std::exception&) {
            // Whole trial lost; every entry stays NaN.
        }
    }

    TuneResult res;
    res.gamma_star.assign(vs.size(), 0.0);
    res.mean_nmse.assign(vs.size(), std::vector<double>(n_gamma, 0.0));
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (!vs[i].has_weights) {
            res.mean_nmse[i].assign(n_gamma, mean_over_trials(nmse, i, 0));
            continue;
        }
        std::size_t best_g = 0;
        for (std::size_t g = 0; g < n_gamma; ++g) {
            res.mean_nmse[i][g] = mean_over_trials(nmse, i, g);
            if (res.mean_nmse[i][g] < res.mean_nmse[i][best_g]) {
                best_g = g;
            }
        }
        // Smallest gamma whose paired excess over the argmin is within
        // gamma_tie_se standard errors of zero.
        std::size_t pick = best_g;
        for (std::size_t g = 0; g < best_g; ++g) {
            if (paired_tie(nmse, i, g, best_g, cfg.gamma_tie_se)) {
                pick = g;
                break;
            }
        }
        res.gamma_star[i] = cfg.gamma_grid[pick];
    }
    return res;
}

std::vector<ExperimentRow> run_point(const ExperimentConfig& cfg, const SweepPoint& point) {
    apply_threads(cfg);
    const std::vector<Variant> vs = variants(cfg);
    if (vs.empty()) {
        return {};
    }
    std::vector<double> gammas(vs.size(), 0.0);
    bool any_weighted = false;
    for (const auto& v : vs) {
        any_weighted = any_weighted || v.has_weights;
    }
    if (any_weighted) {
        if (cfg.gamma_grid.size() == 1) {
            for (std::size_t i = 0; i < vs.size(); ++i) {
                gammas[i] = vs[i].has_weights ? cfg.gamma_grid[0] : 0.0;
            }
        } else {
            gammas = tune_gamma(cfg, point, 1).gamma_star;
        }
    }

    std::vector<std::vector<VariantOutcome>> outcomes(static_cast<std::size_t>(cfg.trials));
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < cfg.trials; ++t) {
        outcomes[static_cast<std::size_t>(t)] = run_trial(cfg, point, gammas, t, 0);
    }

    std::vector<ExperimentRow> rows;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        ExperimentRow row;
        row.model = std::string(to_string(cfg.model));
        row.p = point.p;
        row.s = cfg.s;
        row.m = point.m;
        row.n = point.n;
        row.q = cfg.model == ModelKind::bernoulli ? cfg.q : 0.0;
        row.estimator = std::string(to_string(vs[i].estimator));
        row.weight_kind = vs[i].weight_label();
        row.gamma_star = gammas[i];
        row.trials = cfg.trials;
        row.seed = cfg.seed;

        // Fold in trial order so the sums do not depend on scheduling.
        double sum = 0.0;
        double sum_sq = 0.0;
        int ok = 0;
        int covered = 0;
        for (const auto& trial : outcomes) {
            const VariantOutcome& o = trial[i];
            if (!o.ok) {
                continue;
            }
            ++ok;
            sum += o.nmse;
            covered += o.covered ? 1 : 0;
        }
        row.failures = cfg.trials - ok;
        if (ok > 0) {
            row.nmse_mean = sum / ok;
            for (const auto& trial : outcomes) {
                if (trial[i].ok) {
                    const double d = trial[i].nmse - row.nmse_mean;
                    sum_sq += d * d;
                }
            }
            row.nmse_stderr = ok > 1 ? std::sqrt(sum_sq / (ok - 1) / ok) : 0.0;
            row.coverage_rate = static_cast<double>(covered) / ok;
        } else {
            row.nmse_mean = std::nan("");
            row.nmse_stderr = std::nan("");
            row.coverage_rate = 0.0;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ExperimentRow> run_mse_vs_m(const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.sweep = SweepKind::m;
    c.validate();
    std::vector<ExperimentRow> rows;
    for (const SweepPoint& pt : sweep_points(c)) {
        auto part = run_point(c, pt);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

std::vector<ExperimentRow> run_mse_vs_p(const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.sweep = SweepKind::p;
    c.validate();
    std::vector<ExperimentRow> rows;
    for (const SweepPoint& pt : sweep_points(c)) {
        auto part = run_point(c, pt);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg) {
    return cfg.sweep == SweepKind::m ? run_mse_vs_m(cfg) : run_mse_vs_p(cfg);
}

const char* const kCsvHeader =
    "model,p,s,m,n,q,estimator,weight_kind,gamma_star,trials,failures,nmse_mean,nmse_stderr,"
    "coverage_rate,seed";

void write_csv(std::ostream& os, const std::vector<ExperimentRow>& rows) {
    os << kCsvHeader << '\n';
    for (const auto& r : rows) {
        os << r.model << ',' << r.p << ',' << r.s << ',' << r.m << ',' << r.n << ','
           << format_number(r.q) << ',' << r.estimator << ',' << r.weight_kind << ','
           << format_number(r.gamma_star) << ',' << r.trials << ',' << r.failures << ','
           << format_number(r.nmse_mean) << ',' << format_number(r.nmse_stderr) << ','
           << format_number(r.coverage_rate) << ',' << r.seed << '\n';
    }
}

}  // namespace wlasso
