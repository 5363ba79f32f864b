#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "wlasso/model.hpp"
#include "wlasso/solver.hpp"

namespace wlasso {

enum class ModelKind { bernoulli, convolution };
enum class SweepKind { m, p };
enum class Estimator { ls_oracle, lasso_two_step, wlasso_two_step };

std::string_view to_string(ModelKind kind) noexcept;
std::string_view to_string(SweepKind kind) noexcept;
std::string_view to_string(Estimator kind) noexcept;
ModelKind parse_model_kind(std::string_view text);
SweepKind parse_sweep_kind(std::string_view text);
Estimator parse_estimator(std::string_view text);

struct ExperimentConfig {
    ModelKind model = ModelKind::convolution;
    SweepKind sweep = SweepKind::m;
    Index p = 1000;
    Index s = 5;
    Index n = 2000;    ///< Bernoulli rows for the p-sweep
    double q = 0.5;
    /// m values (convolution) or n values (Bernoulli) for the m-sweep.
    std::vector<Index> m_grid{10, 20, 40, 80, 160, 320};
    std::vector<Index> p_grid{250, 500, 1000, 2000};
    /// p-sweep rule m = round(c_m sqrt(p) log p).
    double c_m = 0.25;
    int trials = 100;
    /// Trials per gamma in the tuning split.
    int tune_trials = 50;
    std::vector<double> gamma_grid{2.1, 3.0, 4.0, 6.0, 8.0};
    /// A smaller gamma ties with the argmin when its mean paired nmse excess
    /// is within this many standard errors; 0 keeps only exact ties.
    double gamma_tie_se = 2.0;
    double target_l1 = 100.0;
    std::uint64_t seed = 0;
    std::vector<WeightKind> weight_kinds{WeightKind::constant, WeightKind::nonconstant};
    std::vector<Estimator> estimators{Estimator::ls_oracle, Estimator::lasso_two_step,
                                      Estimator::wlasso_two_step};
    /// Multiplier of the Bernoulli N_hat correction term.
    double c = 1.0;
    /// Replace Y by the intensity A x*.
    bool noiseless = false;
    bool allow_gamma_le_2 = false;
    /// 0 leaves the OpenMP default.
    int threads = 0;

    void validate() const;
};

/// One (estimator, weight) pairing reported as its own row. The LASSO uses
/// the constant weight; the weighted LASSO runs once per other weight kind.
struct Variant {
    Estimator estimator = Estimator::ls_oracle;
    bool has_weights = false;
    WeightKind weight_kind = WeightKind::constant;

    std::string weight_label() const;
};
std::vector<Variant> variants(const ExperimentConfig& cfg);

/// A resolved sweep point: the sizes one batch of trials runs at.
struct SweepPoint {
    Index p = 0;
    Index m = 0;  ///< convolution parents, 0 for Bernoulli
    Index n = 0;  ///< Bernoulli rows, 0 for convolution
};
std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg);

/// round(c_m sqrt(p) log p), at least 1.
Index m_rule(Index p, double c_m);

struct VariantOutcome {
    bool ok = false;
    double nmse = 0.0;
    bool covered = false;  ///< weights dominate the noise deviation at every k
    std::string error;
};

/**
 * One signal, sensing and Poisson draw for `point`, then every variant solved
 * at its gamma (gammas[i] pairs with variants(cfg)[i]; ignored for the oracle
 * least squares). `split` 0 is the evaluation split, larger values are tuning
 * splits; the draws depend only on (seed, split, trial_index).
 */
std::vector<VariantOutcome> run_trial(const ExperimentConfig& cfg, const SweepPoint& point,
                                      const std::vector<double>& gammas, int trial_index,
                                      std::uint64_t split = 0);

struct TuneResult {
    /// Per variant: the smallest gamma tied with the best mean nmse.
    std::vector<double> gamma_star;
    /// mean_nmse[variant][grid index], infinity where every trial failed.
    std::vector<std::vector<double>> mean_nmse;
};

/// Tuning split `split` (>= 1) of cfg.tune_trials trials at `point`.
TuneResult tune_gamma(const ExperimentConfig& cfg, const SweepPoint& point,
                      std::uint64_t split = 1);

struct ExperimentRow {
    std::string model;
    Index p = 0;
    Index s = 0;
    Index m = 0;
    Index n = 0;
    double q = 0.0;
    std::string estimator;
    std::string weight_kind;
    double gamma_star = 0.0;
    int trials = 0;
    int failures = 0;
    double nmse_mean = 0.0;
    double nmse_stderr = 0.0;
    double coverage_rate = 0.0;
    std::uint64_t seed = 0;
};

/// Tunes gamma, runs cfg.trials evaluation trials and aggregates, per point.
std::vector<ExperimentRow> run_point(const ExperimentConfig& cfg, const SweepPoint& point);
std::vector<ExperimentRow> run_mse_vs_m(const ExperimentConfig& cfg);
std::vector<ExperimentRow> run_mse_vs_p(const ExperimentConfig& cfg);
/// Dispatches on cfg.sweep.
std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg);

extern const char* const kCsvHeader;
void write_csv(std::ostream& os, const std::vector<ExperimentRow>& rows);

/// ||x_hat - x*||^2 / ||x*||_1, or ||x_hat||^2 when x* = 0.
double normalized_mse(const Vector& x_hat, const SparseSignal& truth);

}  // namespace wlasso
