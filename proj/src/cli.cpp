#include "wlasso/cli.hpp"

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <omp.h>

#include "wlasso/bernoulli.hpp"
#include "wlasso/concentration.hpp"
#include "wlasso/config.hpp"
#include "wlasso/convolution.hpp"
#include "wlasso/diagnostics.hpp"
#include "wlasso/errors.hpp"
#include "wlasso/experiments.hpp"

namespace wlasso {

namespace {

struct CommonOptions {
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string out_path;
};

struct ProblemOptions {
    std::string model = "convolution";
    Index p = 200;
    Index s = 5;
    Index m = 20;
    Index n = 2000;
    double q = 0.5;
    double l1 = 100.0;
    std::optional<double> theta;
    double c = 1.0;
    bool noiseless = false;
    std::string instance_path;
};

struct SolveOptions {
    double gamma = 4.0;
    std::string weights = "nonconstant";
};

struct ExperimentOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    bool dump_config = false;
};

struct ConcentrationOptions {
    double theta = 5.0;
    std::size_t trials = 100000;
    Index length = 50;
    double lambda = 2.0;
};

struct DiagnoseOptions {
    double gamma = 4.0;
    std::string weights = "nonconstant";
    bool no_rip = false;
};

/// One problem instance plus what is needed to form weights on it.
struct Problem {
    ModelKind model = ModelKind::convolution;
    std::optional<ConvolutionInstance> conv;
    std::optional<BernoulliInstance> bern;
    Vector y;
    std::optional<SparseSignal> truth;
    SurrogatePair surrogate;
    std::optional<double> theta;
    double c = 1.0;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag,
                           std::optional<std::uint64_t> config_seed = std::nullopt) {
    if (flag) {
        return *flag;
    }
    if (config_seed) {
        return *config_seed;
    }
    if (const char* env = std::getenv("WLASSO_SEED"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const auto value = std::strtoull(env, &end, 10);
        if (*end != '\0') {
            throw ConfigError(std::string("WLASSO_SEED is not an unsigned integer: ") + env);
        }
        return value;
    }
    return 0;
}

std::vector<double> parse_doubles(std::string_view key, const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw ConfigError("instance: '" + std::string(key) + "' has a bad entry '" + item + "'");
        }
    }
    return out;
}

// A convolution instance on disk: `counts`, `y` and optionally `x_star`
// (dense, length p) as comma-separated lists in key = value form.
Problem load_convolution_instance(const std::string& path, const ProblemOptions& po) {
    const KeyValueConfig kv = KeyValueConfig::from_file(path);
    for (const auto& [key, value] : kv.entries()) {
        if (key != "counts" && key != "y" && key != "x_star" && key != "model") {
            throw ConfigError("instance: unknown key '" + key + "'");
        }
    }
    if (auto model = kv.get("model"); model && *model != "convolution") {
        throw ConfigError("instance: only convolution instances can be read from file");
    }
    const auto counts_text = kv.get("counts");
    const auto y_text = kv.get("y");
    if (!counts_text || !y_text) {
        throw ConfigError("instance: 'counts' and 'y' are required");
    }
    std::vector<std::uint64_t> counts;
    for (double c : parse_doubles("counts", *counts_text)) {
        if (c < 0.0 || c != std::floor(c)) {
            throw ConfigError("instance: counts must be non-negative integers");
        }
        counts.push_back(static_cast<std::uint64_t>(c));
    }
    const auto yv = parse_doubles("y", *y_text);

    Problem pr;
    pr.model = ModelKind::convolution;
    pr.conv = ConvolutionInstance::from_counts(std::move(counts));
    pr.y = Eigen::Map<const Vector>(yv.data(), static_cast<Index>(yv.size()));
    pr.surrogate = surrogate_convolution(*pr.conv, pr.y);
    pr.theta = po.theta;
    if (auto xs = kv.get("x_star")) {
        const auto x = parse_doubles("x_star", *xs);
        if (static_cast<Index>(x.size()) != pr.conv->p) {
            throw ConfigError("instance: x_star must have length p");
        }
        std::vector<std::size_t> support;
        std::vector<double> values;
        for (std::size_t k = 0; k < x.size(); ++k) {
            if (x[k] != 0.0) {
                support.push_back(k);
                values.push_back(x[k]);
            }
        }
        pr.truth = SparseSignal(x.size(), std::move(support), std::move(values));
    }
    return pr;
}

Problem make_problem(const ProblemOptions& po, std::uint64_t seed) {
    if (!po.instance_path.empty()) {
        return load_convolution_instance(po.instance_path, po);
    }
    Problem pr;
    pr.model = parse_model_kind(po.model);
    pr.theta = po.theta;
    pr.c = po.c;
    Rng root(seed, 0);
    Rng signal_rng = root.split(0);
    Rng sensing_rng = root.split(1);
    Rng noise_rng = root.split(2);
    pr.truth = make_sparse_signal(static_cast<std::size_t>(po.p), static_cast<std::size_t>(po.s),
                                  po.l1, signal_rng);
    const Vector x_star = pr.truth->dense();
    if (pr.model == ModelKind::convolution) {
        pr.conv = sample_parents(po.p, po.m, sensing_rng);
        const Vector intensity = operator_A(*pr.conv).apply(x_star);
        pr.y = po.noiseless ? intensity : sample_poisson(intensity, noise_rng).as_vector();
        pr.surrogate = surrogate_convolution(*pr.conv, pr.y);
    } else {
        pr.bern = sample_bernoulli_matrix(po.n, po.p, po.q, sensing_rng);
        const Vector intensity = bernoulli_intensity(*pr.bern, x_star);
        pr.y = po.noiseless ? intensity : sample_poisson(intensity, noise_rng).as_vector();
        pr.surrogate = surrogate_bernoulli(*pr.bern, pr.y);
    }
    return pr;
}

WeightVector make_weights(const Problem& pr, WeightKind kind) {
    if (kind == WeightKind::oracle) {
        if (!pr.truth) {
            throw InvalidArgument("oracle weights need the true signal");
        }
        return oracle_weights(pr.surrogate, pr.truth->dense());
    }
    if (pr.conv) {
        return kind == WeightKind::constant
                   ? constant_weight_convolution(*pr.conv, pr.y, pr.theta)
                   : nonconstant_weights_convolution(*pr.conv, pr.y, pr.theta);
    }
    BernoulliWeightOptions opts;
    opts.c = pr.c;
    opts.theta = pr.theta;
    return kind == WeightKind::constant ? constant_weight_bernoulli(*pr.bern, pr.y, opts)
                                        : nonconstant_weights_bernoulli(*pr.bern, pr.y, opts);
}

double default_theta(const Problem& pr) {
    if (pr.theta) {
        return *pr.theta;
    }
    const double p = static_cast<double>(pr.surrogate.p());
    return pr.model == ModelKind::convolution ? 2.0 * std::log(p) : 3.0 * std::log(p);
}

/// Writes to --out when given, otherwise to `out`.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) {
                throw std::runtime_error("cannot open " + path + " for writing");
            }
            os_ = file_.get();
        }
    }
    std::ostream& stream() { return *os_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_;
};

void add_problem_options(CLI::App* cmd, ProblemOptions& po) {
    cmd->add_option("--model", po.model, "bernoulli or convolution")
        ->check(CLI::IsMember({"bernoulli", "convolution"}))
        ->capture_default_str();
    cmd->add_option("--p", po.p, "signal length")->capture_default_str();
    cmd->add_option("--s", po.s, "sparsity")->capture_default_str();
    cmd->add_option("--m", po.m, "parents (convolution)")->capture_default_str();
    cmd->add_option("--n", po.n, "rows (Bernoulli)")->capture_default_str();
    cmd->add_option("--q", po.q, "entry probability (Bernoulli)")->capture_default_str();
    cmd->add_option("--l1", po.l1, "l1 norm of the signal")->capture_default_str();
    cmd->add_option("--theta", po.theta, "tail level (default 2 log p / 3 log p)");
    cmd->add_option("--c", po.c, "Bernoulli correction multiplier")->capture_default_str();
    cmd->add_flag("--noiseless", po.noiseless, "use Y = A x* instead of Poisson counts");
    cmd->add_option("--instance", po.instance_path,
                    "convolution instance file with counts, y and optional x_star");
}

void add_common_options(CLI::App* cmd, CommonOptions& co) {
    cmd->add_option("--seed", co.seed, "master seed (falls back to WLASSO_SEED, then 0)");
    cmd->add_option("--threads", co.threads, "worker threads, 0 = OpenMP default")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--out", co.out_path, "output file (default stdout)");
}

void apply_threads(int threads) {
    if (threads > 0) {
        omp_set_num_threads(threads);
    }
}

int run_solve(const CommonOptions& co, const ProblemOptions& po, const SolveOptions& so,
              std::ostream& out) {
    apply_threads(co.threads);
    const Problem pr = make_problem(po, resolve_seed(co.seed));
    const WeightKind kind = parse_weight_kind(so.weights);
    Sink sink(co.out_path, out);
    std::ostream& os = sink.stream();
    os << std::setprecision(10);

    SolverConfig sc;
    sc.gamma = so.gamma;
    auto report = [&](std::string_view estimator, std::string_view label, const Vector& x,
                      const SolveResult* first, std::size_t support) {
        os << "estimator=" << estimator << " weight_kind=" << label;
        if (pr.truth) {
            os << " nmse=" << normalized_mse(x, *pr.truth);
        }
        if (first != nullptr) {
            os << " gamma=" << so.gamma << " kkt_residual=" << first->kkt_residual
               << " iterations=" << first->iterations
               << " converged=" << (first->converged ? "yes" : "no");
        }
        os << " support_size=" << support << '\n';
    };

    if (pr.truth) {
        std::vector<Index> support(pr.truth->support().begin(), pr.truth->support().end());
        const Vector x = support.empty() ? Vector::Zero(pr.surrogate.p())
                                         : oracle_least_squares(pr.surrogate, support);
        report("ls_oracle", "none", x, nullptr, support.size());
    }
    const WeightVector flat = make_weights(pr, WeightKind::constant);
    const SolveResult lasso = weighted_lasso(pr.surrogate, flat, sc);
    const TwoStepResult lasso2 = two_step(lasso, pr.surrogate, sc.support_eps);
    report("lasso_two_step", "constant", lasso2.x_hat, &lasso, lasso2.support.size());

    const WeightVector w = make_weights(pr, kind);
    const SolveResult wl = weighted_lasso(pr.surrogate, w, sc);
    const TwoStepResult wl2 = two_step(wl, pr.surrogate, sc.support_eps);
    report("wlasso_two_step", to_string(kind), wl2.x_hat, &wl, wl2.support.size());
    return kExitOk;
}

int run_weights(const CommonOptions& co, const ProblemOptions& po, const std::string& kind_text,
                std::ostream& out) {
    apply_threads(co.threads);
    const Problem pr = make_problem(po, resolve_seed(co.seed));
    const WeightVector w = make_weights(pr, parse_weight_kind(kind_text));
    Sink sink(co.out_path, out);
    std::ostream& os = sink.stream();
    os << "k,d\n";
    char buf[64];
    for (Index k = 0; k < w.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.10g", w[k]);
        os << k << ',' << buf << '\n';
    }
    return kExitOk;
}

int run_diagnose(const CommonOptions& co, const ProblemOptions& po, const DiagnoseOptions& dopt,
                 std::ostream& out) {
    apply_threads(co.threads);
    const Problem pr = make_problem(po, resolve_seed(co.seed));
    if (!pr.truth) {
        throw InvalidArgument("diagnose needs the true signal (x_star in the instance file)");
    }
    const WeightVector w = make_weights(pr, parse_weight_kind(dopt.weights));
    AssessOptions ao;
    ao.gamma = dopt.gamma;
    ao.theta = default_theta(pr);
    ao.brute_force_rip = !dopt.no_rip;
    const AssumptionReport rep = assess(pr.surrogate, *pr.truth, w, ao);
    Sink sink(co.out_path, out);
    write_report(sink.stream(), rep);
    return kExitOk;
}

int run_experiment_cmd(const CommonOptions& co, const ExperimentOptions& eo, std::ostream& out) {
    KeyValueConfig kv;
    if (!eo.config_path.empty()) {
        kv = KeyValueConfig::from_file(eo.config_path);
    }
    for (const auto& o : eo.overrides) {
        kv.apply_override(o);
    }
    // Seed sources, lowest first: WLASSO_SEED, config file, overrides, --seed.
    std::optional<std::uint64_t> config_seed;
    if (kv.get("seed")) {
        config_seed = to_experiment_config(kv).seed;
    }
    ExperimentConfig cfg = to_experiment_config(kv);
    cfg.seed = resolve_seed(co.seed, config_seed);
    if (co.threads > 0) {
        cfg.threads = co.threads;
    }
    if (eo.dump_config) {
        Sink sink(co.out_path, out);
        from_experiment_config(cfg).dump(sink.stream());
        return kExitOk;
    }
    const auto rows = run_experiment(cfg);
    Sink sink(co.out_path, out);
    write_csv(sink.stream(), rows);
    return kExitOk;
}

int run_concentration(const CommonOptions& co, const ConcentrationOptions& copt,
                      std::ostream& out) {
    apply_threads(co.threads);
    const std::uint64_t seed = resolve_seed(co.seed);
    if (copt.length < 1 || !(copt.lambda >= 0.0)) {
        throw InvalidArgument("concentration-test: need length >= 1 and lambda >= 0");
    }
    // The direction and intensity come from a stream separate from the trials.
    Rng setup(seed, ~std::uint64_t{0});
    Vector r(copt.length);
    Vector intensity(copt.length);
    for (Index l = 0; l < copt.length; ++l) {
        r(l) = 2.0 * setup.uniform() - 1.0;
        intensity(l) = copt.lambda * setup.uniform();
    }
    const TailCoverage tc = tail_coverage_test(r, intensity, copt.theta, copt.trials, seed);
    Sink sink(co.out_path, out);
    std::ostream& os = sink.stream();
    os << std::setprecision(10);
    os << "trials=" << tc.trials << '\n';
    os << "theta=" << copt.theta << '\n';
    os << "bernstein_failure=" << tc.bernstein_failure << '\n';
    os << "bernstein_reference=" << 2.0 * std::exp(-copt.theta) << '\n';
    os << "empirical_failure=" << tc.empirical_failure << '\n';
    os << "empirical_reference=" << 3.0 * std::exp(-copt.theta) << '\n';
    os << "envelope_failure=" << tc.envelope_failure << '\n';
    os << "envelope_reference=" << std::exp(-copt.theta) << '\n';
    return kExitOk;
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Weighted LASSO for sparse Poisson inverse problems", "wlasso"};
    app.require_subcommand(1);

    CommonOptions co;
    ProblemOptions po;
    SolveOptions so;
    ExperimentOptions eo;
    ConcentrationOptions copt;
    DiagnoseOptions dopt;
    std::string weights_kind = "nonconstant";

    auto* solve = app.add_subcommand("solve", "solve one instance with every estimator");
    add_common_options(solve, co);
    add_problem_options(solve, po);
    solve->add_option("--gamma", so.gamma, "penalty multiplier")->capture_default_str();
    solve->add_option("--weights", so.weights, "weights for the weighted LASSO")
        ->check(CLI::IsMember({"constant", "nonconstant", "oracle"}))
        ->capture_default_str();

    auto* weights = app.add_subcommand("weights", "print the weight vector as CSV");
    add_common_options(weights, co);
    add_problem_options(weights, po);
    weights->add_option("--weights", weights_kind, "constant, nonconstant or oracle")
        ->check(CLI::IsMember({"constant", "nonconstant", "oracle"}))
        ->capture_default_str();

    auto* diagnose = app.add_subcommand("diagnose", "check the theory's assumptions on an instance");
    add_common_options(diagnose, co);
    add_problem_options(diagnose, po);
    diagnose->add_option("--gamma", dopt.gamma, "penalty multiplier")->capture_default_str();
    diagnose->add_option("--weights", dopt.weights, "constant, nonconstant or oracle")
        ->check(CLI::IsMember({"constant", "nonconstant", "oracle"}))
        ->capture_default_str();
    diagnose->add_flag("--no-rip", dopt.no_rip, "skip the exhaustive restricted-eigenvalue search");

    auto* experiment = app.add_subcommand("experiment", "run an MSE sweep and write CSV");
    add_common_options(experiment, co);
    experiment->add_option("--config", eo.config_path, "key = value config file")
        ->check(CLI::ExistingFile);
    experiment->add_flag("--dump-config", eo.dump_config,
                         "print the effective config instead of running");
    experiment->add_option("overrides", eo.overrides, "key=value overrides applied after the file");

    auto* conc = app.add_subcommand("concentration-test", "Monte Carlo check of the tail bounds");
    add_common_options(conc, co);
    conc->add_option("--theta", copt.theta, "tail level")->capture_default_str();
    conc->add_option("--trials", copt.trials, "Monte Carlo trials")->capture_default_str();
    conc->add_option("--length", copt.length, "length of the direction R")->capture_default_str();
    conc->add_option("--lambda", copt.lambda, "largest intensity")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << "error: " << e.what() << "\n\n" << sub->help();
        return kExitUsage;
    }

    try {
        if (*solve) {
            return run_solve(co, po, so, out);
        }
        if (*weights) {
            return run_weights(co, po, weights_kind, out);
        }
        if (*diagnose) {
            return run_diagnose(co, po, dopt, out);
        }
        if (*experiment) {
            return run_experiment_cmd(co, eo, out);
        }
        return run_concentration(co, copt, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace wlasso
