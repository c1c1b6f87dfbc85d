#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "riskscope/report_json.hpp"
#include "riskscope/solver.hpp"

namespace riskscope {

// ---------------------------------------------------------------------------
// Experiment orchestration: three named experiments driven by JSON configs,
// each producing a report with premise accounting, per-replication records,
// Clopper-Pearson bands, and a PASS / FAIL / SKIPPED verdict.
//
//   compat_lower  — adversarial target on a support T; the risk must exceed
//                   (99/100) lam sqrt(|T|) / phi(T,1) with probability >= 0.49.
//   sandwich      — planted sparse target; risk <= C_bar lam sqrt(s) with
//                   probability >= 0.76 and the two-sided sandwich with
//                   probability >= 0.25, conditional on the lambda-tuning,
//                   C_bar <= 2 C_under, and beta-min premises.
//   small_lambda  — lambda below the small-lambda threshold forces
//                   E[risk] >= ((1 - delta_2d) / (8 (1 + delta_d)))
//                              sigma sqrt(d log(p / (5 d))).
//
// Every verdict is a pure function of (config, master_seed): designs are
// seeded, replication noise uses mix_seed(master_seed, rep) as in the Monte
// Carlo engine, and all multi-start searches use fixed internal seeds.
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kExperimentsSeed = 0x4558504552494dULL;
inline constexpr double kProbabilitySlack = 0.03;
inline constexpr double kExperimentConfidence = 0.99;

enum class Verdict { Pass, Fail, Skipped };

inline std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "PASS";
        case Verdict::Fail: return "FAIL";
        case Verdict::Skipped: return "SKIPPED";
    }
    return "FAIL";
}

enum class ExperimentKind { compat_lower, sandwich, small_lambda };

inline std::string experiment_kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::compat_lower: return "compat_lower";
        case ExperimentKind::sandwich: return "sandwich";
        case ExperimentKind::small_lambda: return "small_lambda";
    }
    return "unknown";
}

enum class DesignGeneratorKind { gaussian_iid, rademacher, from_file };

struct DesignSpec {
    DesignGeneratorKind generator = DesignGeneratorKind::gaussian_iid;
    int n = 0;  // required for generated designs; cross-checked for from_file
    int p = 0;
    std::uint64_t seed = 0;
    std::filesystem::path file;  // from_file only
};

enum class LambdaRuleKind { explicit_value, asymptotic, threshold, threshold_fraction };

// threshold / threshold_fraction refer to the lambda-tuning threshold
// sigma (1+gamma)(1+delta_s)(1+sqrt(2 log(9ep/s))) for compat_lower and
// sandwich, and to the small-lambda premise threshold
// ((1-delta_2d)/8) sigma sqrt(log(p/(5d))) for small_lambda.
struct LambdaRule {
    LambdaRuleKind kind = LambdaRuleKind::explicit_value;
    double value = 0.0;     // explicit_value
    double fraction = 1.0;  // threshold_fraction
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::compat_lower;
    std::string label;  // report file stem; defaults to the experiment name
    DesignSpec design;
    int s = 0;  // support / sparsity size (compat_lower, sandwich)
    int d = 0;  // packing dimension (small_lambda)
    double gamma = 0.0;
    bool has_gamma = false;
    LambdaRule lambda_rule;
    double sigma = 1.0;
    int reps = 0;
    std::uint64_t master_seed = 0;
    std::optional<Vector> fixed_noise;  // overrides Gaussian noise when present
    double beta_scale = 1.0;            // multiplies the planted magnitude (sandwich)
    std::int64_t rip_budget = 20000;
    int restarts = 8;
    bool inject_fail = false;  // test mode: force a FAIL verdict
    Json echo = Json::object();
};

struct EventStats {
    std::string name;
    double threshold = 0.0;  // risk threshold defining the event
    std::string comparison;  // ">=", "<=", or "in" for two-sided membership
    double threshold_lo = 0.0;  // two-sided events only
    int count = 0;
    int reps = 0;
    double frequency = 0.0;
    double cp_lower = 0.0;
    double cp_upper = 0.0;
    double level = 0.0;  // probability level claimed by the theory
    double slack = kProbabilitySlack;
    bool pass = false;      // cp_lower >= level - slack
    bool advisory = false;  // premises unmet: reported but not binding
};

struct MeanCheck {
    double mean_hat = 0.0;
    double std_err = 0.0;
    double stat = 0.0;       // mean_hat + 3 std_err
    double threshold = 0.0;  // required lower bound on E[risk]
    bool pass = false;
};

struct ExperimentReport {
    std::string name;
    std::string label;
    Verdict verdict = Verdict::Skipped;
    std::string reason;
    std::vector<Premise> premises;
    std::vector<EventStats> events;
    bool has_mean_check = false;
    MeanCheck mean_check;
    std::vector<std::pair<std::string, double>> quantities;
    std::vector<std::string> notes;
    std::vector<double> risks;  // rep order; NaN marks a failed solve
    std::vector<std::vector<std::uint8_t>> indicators;  // one column per event
    int reps = 0;
    int solver_failures = 0;
    double summary_frequency = 0.0;
    double summary_cp_lower = 0.0;
    double summary_threshold = 0.0;
    Json config_echo = Json::object();
};

// ---------------------------------------------------------------------------
// Config schema
// ---------------------------------------------------------------------------

namespace detail {

inline void reject_unknown_keys(const Json& j, const std::set<std::string>& allowed,
                                const std::string& context) {
    for (const auto& item : j.items())
        if (!allowed.contains(item.key()))
            throw SchemaError(context + ": unknown field '" + item.key() + "'");
}

inline std::uint64_t parse_seed(const Json& j, const char* field, const std::string& context) {
    if (!j.contains(field)) return 0;
    const Json& v = j.at(field);
    if (!v.is_number_integer())
        throw SchemaError(context + ": field '" + field + "' must be an integer");
    if (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)
        throw SchemaError(context + ": field '" + field + "' must be nonnegative");
    return v.get<std::uint64_t>();
}

}  // namespace detail

inline DesignSpec design_from_json(const Json& j, const std::string& context,
                                   const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw SchemaError(context + ": expected an object");
    detail::reject_unknown_keys(j, {"generator", "n", "p", "seed", "file"}, context);
    DesignSpec d;
    const std::string gen = require_typed<std::string>(j, "generator", context.c_str());
    if (gen == "gaussian_iid") d.generator = DesignGeneratorKind::gaussian_iid;
    else if (gen == "rademacher") d.generator = DesignGeneratorKind::rademacher;
    else if (gen == "from_file") d.generator = DesignGeneratorKind::from_file;
    else throw SchemaError(context + ": unknown generator '" + gen + "'");

    if (d.generator == DesignGeneratorKind::from_file) {
        std::filesystem::path file =
            require_typed<std::string>(j, "file", context.c_str());
        if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
        d.file = std::move(file);
        if (j.contains("n")) d.n = require_typed<int>(j, "n", context.c_str());
        if (j.contains("p")) d.p = require_typed<int>(j, "p", context.c_str());
    } else {
        d.n = require_typed<int>(j, "n", context.c_str());
        d.p = require_typed<int>(j, "p", context.c_str());
        if (d.n < 1 || d.p < 1)
            throw SchemaError(context + ": n and p must be at least 1");
        if (j.contains("file"))
            throw SchemaError(context + ": 'file' is only valid with generator from_file");
    }
    d.seed = detail::parse_seed(j, "seed", context);
    return d;
}

inline LambdaRule lambda_rule_from_json(const Json& j, const std::string& context) {
    if (!j.is_object()) throw SchemaError(context + ": expected an object");
    detail::reject_unknown_keys(j, {"rule", "value", "fraction"}, context);
    LambdaRule r;
    const std::string rule = require_typed<std::string>(j, "rule", context.c_str());
    if (rule == "explicit") {
        r.kind = LambdaRuleKind::explicit_value;
        r.value = require_typed<double>(j, "value", context.c_str());
        if (!(r.value >= 0.0))
            throw SchemaError(context + ": explicit lambda must be nonnegative");
    } else if (rule == "asymptotic") {
        r.kind = LambdaRuleKind::asymptotic;
    } else if (rule == "threshold") {
        r.kind = LambdaRuleKind::threshold;
    } else if (rule == "threshold_fraction") {
        r.kind = LambdaRuleKind::threshold_fraction;
        r.fraction = require_typed<double>(j, "fraction", context.c_str());
        if (!(r.fraction > 0.0))
            throw SchemaError(context + ": fraction must be positive");
    } else {
        throw SchemaError(context + ": unknown lambda rule '" + rule + "'");
    }
    if (rule != "explicit" && j.contains("value"))
        throw SchemaError(context + ": 'value' is only valid with rule explicit");
    if (rule != "threshold_fraction" && j.contains("fraction"))
        throw SchemaError(context + ": 'fraction' is only valid with rule threshold_fraction");
    return r;
}

inline ExperimentConfig experiment_config_from_json(
    const Json& j, const std::string& context,
    const std::filesystem::path& base_dir = {}) {
    if (!j.is_object()) throw SchemaError(context + ": expected an object");
    detail::reject_unknown_keys(
        j,
        {"name", "label", "design", "s", "d", "gamma", "lambda_rule", "sigma", "reps",
         "master_seed", "noise", "beta_scale", "rip_budget", "restarts", "inject_fail"},
        context);

    ExperimentConfig cfg;
    const std::string name = require_typed<std::string>(j, "name", context.c_str());
    if (name == "compat_lower") cfg.kind = ExperimentKind::compat_lower;
    else if (name == "sandwich") cfg.kind = ExperimentKind::sandwich;
    else if (name == "small_lambda") cfg.kind = ExperimentKind::small_lambda;
    else throw SchemaError(context + ": unknown experiment name '" + name + "'");
    cfg.label = j.contains("label")
                    ? require_typed<std::string>(j, "label", context.c_str())
                    : name;
    if (cfg.label.empty() ||
        cfg.label.find_first_not_of(
            "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
            std::string::npos)
        throw SchemaError(context + ": label must be a nonempty [A-Za-z0-9_-] string");

    cfg.design = design_from_json(require_field(j, "design", context.c_str()),
                                  context + ".design", base_dir);

    const bool wants_s = cfg.kind != ExperimentKind::small_lambda;
    if (wants_s) {
        cfg.s = require_typed<int>(j, "s", context.c_str());
        if (cfg.s < 1) throw SchemaError(context + ": s must be at least 1");
        if (j.contains("d"))
            throw SchemaError(context + ": 'd' is only valid for small_lambda");
    } else {
        cfg.d = require_typed<int>(j, "d", context.c_str());
        if (cfg.d < 1) throw SchemaError(context + ": d must be at least 1");
        if (j.contains("s"))
            throw SchemaError(context + ": 's' is only valid for compat_lower/sandwich");
    }

    if (j.contains("gamma")) {
        cfg.gamma = require_typed<double>(j, "gamma", context.c_str());
        cfg.has_gamma = true;
        if (!(cfg.gamma > 0.0)) throw SchemaError(context + ": gamma must be positive");
    }
    if (cfg.kind == ExperimentKind::sandwich && !cfg.has_gamma)
        throw SchemaError(context + ": sandwich requires 'gamma'");

    cfg.lambda_rule = lambda_rule_from_json(require_field(j, "lambda_rule", context.c_str()),
                                            context + ".lambda_rule");
    const bool rule_needs_gamma =
        cfg.kind != ExperimentKind::small_lambda &&
        cfg.lambda_rule.kind != LambdaRuleKind::explicit_value;
    if (rule_needs_gamma && !cfg.has_gamma)
        throw SchemaError(context + ": this lambda rule requires 'gamma'");
    if (cfg.kind == ExperimentKind::small_lambda &&
        cfg.lambda_rule.kind == LambdaRuleKind::asymptotic)
        throw SchemaError(context +
                          ": the asymptotic lambda rule needs a sparsity s and does not "
                          "apply to small_lambda");

    cfg.sigma = require_typed<double>(j, "sigma", context.c_str());
    if (!(cfg.sigma > 0.0)) throw SchemaError(context + ": sigma must be positive");
    cfg.reps = require_typed<int>(j, "reps", context.c_str());
    if (cfg.reps < 2)
        throw SchemaError(context +
                          ": reps must be at least 2 (confidence bands are undefined "
                          "for a single replication)");
    cfg.master_seed = detail::parse_seed(j, "master_seed", context);

    if (j.contains("noise")) {
        const Json& nj = j.at("noise");
        if (!nj.is_object()) throw SchemaError(context + ".noise: expected an object");
        detail::reject_unknown_keys(nj, {"type", "values"}, context + ".noise");
        const std::string type =
            require_typed<std::string>(nj, "type", (context + ".noise").c_str());
        if (type != "fixed")
            throw SchemaError(context +
                              ".noise: only a 'fixed' override is accepted; Gaussian "
                              "noise comes from the sigma field");
        cfg.fixed_noise = json_to_vector(require_field(nj, "values", "noise"),
                                         (context + ".noise.values").c_str());
    }
    if (j.contains("beta_scale")) {
        cfg.beta_scale = require_typed<double>(j, "beta_scale", context.c_str());
        if (!(cfg.beta_scale > 0.0))
            throw SchemaError(context + ": beta_scale must be positive");
        if (cfg.kind != ExperimentKind::sandwich)
            throw SchemaError(context + ": beta_scale is only valid for sandwich");
    }
    if (j.contains("rip_budget")) {
        cfg.rip_budget = require_typed<std::int64_t>(j, "rip_budget", context.c_str());
        if (cfg.rip_budget < 1)
            throw SchemaError(context + ": rip_budget must be positive");
    }
    if (j.contains("restarts")) {
        cfg.restarts = require_typed<int>(j, "restarts", context.c_str());
        if (cfg.restarts < 1) throw SchemaError(context + ": restarts must be positive");
    }
    if (j.contains("inject_fail"))
        cfg.inject_fail = require_typed<bool>(j, "inject_fail", context.c_str());

    cfg.echo = j;
    return cfg;
}

// Bundle document: { "experiments": [ {...}, ... ] }.  Labels must be unique
// because they name the per-experiment report files.
inline std::vector<ExperimentConfig> parse_experiment_bundle(
    const Json& j, const std::filesystem::path& base_dir = {}) {
    if (!j.is_object()) throw SchemaError("experiments: expected a top-level object");
    detail::reject_unknown_keys(j, {"experiments"}, "experiments");
    const Json& list = require_field(j, "experiments", "experiments");
    if (!list.is_array()) throw SchemaError("experiments: 'experiments' must be an array");
    std::vector<ExperimentConfig> out;
    std::set<std::string> labels;
    for (std::size_t i = 0; i < list.size(); ++i) {
        out.push_back(experiment_config_from_json(
            list[i], "experiments[" + std::to_string(i) + "]", base_dir));
        if (!labels.insert(out.back().label).second)
            throw SchemaError("experiments: duplicate label '" + out.back().label + "'");
    }
    return out;
}

inline std::vector<ExperimentConfig> load_experiment_bundle(
    const std::filesystem::path& path) {
    Json j;
    try {
        j = Json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("experiments json: ") + e.what(), 1);
    }
    return parse_experiment_bundle(j, path.parent_path());
}

// ---------------------------------------------------------------------------
// Design generation and lambda rules
// ---------------------------------------------------------------------------

inline Matrix build_design(const DesignSpec& d) {
    switch (d.generator) {
        case DesignGeneratorKind::gaussian_iid: {
            Rng rng(mix_seed(kExperimentsSeed, d.seed));
            Matrix X(d.n, d.p);
            for (int i = 0; i < d.n; ++i)
                for (int j = 0; j < d.p; ++j) X(i, j) = rng.gaussian();
            return X;
        }
        case DesignGeneratorKind::rademacher: {
            Rng rng(mix_seed(kExperimentsSeed ^ 0x52414445ULL, d.seed));
            Matrix X(d.n, d.p);
            for (int i = 0; i < d.n; ++i)
                for (int j = 0; j < d.p; ++j)
                    X(i, j) = static_cast<double>(rng.sign());
            return X;
        }
        case DesignGeneratorKind::from_file: {
            Matrix X = read_csv_matrix(d.file);
            if (d.n > 0 && X.rows() != d.n)
                throw ConfigError("design: file has " + std::to_string(X.rows()) +
                                  " rows but n = " + std::to_string(d.n));
            if (d.p > 0 && X.cols() != d.p)
                throw ConfigError("design: file has " + std::to_string(X.cols()) +
                                  " columns but p = " + std::to_string(d.p));
            return X;
        }
    }
    throw NumericError("build_design: unreachable generator dispatch");
}

inline double lambda_asymptotic(int p, int s, double gamma, double sigma) {
    if (!(p > s))
        throw ConfigError("lambda rule asymptotic: requires p > s for log(p/s)");
    return sigma * (1.0 + 2.0 * gamma) *
           std::sqrt(2.0 * std::log(static_cast<double>(p) / s));
}

inline double lambda_tuning_threshold(int p, int s, double gamma, double sigma,
                                      double delta_s) {
    const double log_arg = 9.0 * std::numbers::e * static_cast<double>(p) / s;
    if (!(log_arg > 1.0))
        throw ConfigError("lambda tuning threshold: log argument 9ep/s must exceed 1");
    return sigma * (1.0 + gamma) * (1.0 + delta_s) *
           (1.0 + std::sqrt(2.0 * std::log(log_arg)));
}

inline double small_lambda_threshold(int p, int d, double sigma, double delta_2d) {
    return (1.0 - delta_2d) / 8.0 * sigma *
           std::sqrt(std::log(static_cast<double>(p) / (5.0 * d)));
}

// ---------------------------------------------------------------------------
// Shared machinery
// ---------------------------------------------------------------------------

namespace detail {

struct RepOutcome {
    double risk = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
};

inline std::vector<RepOutcome> run_replications(const ProblemInstance& inst, int reps,
                                                std::uint64_t master_seed,
                                                const SolverConfig& scfg) {
    std::vector<RepOutcome> out(static_cast<std::size_t>(reps));
    parallel_for(reps, [&](std::int64_t rep) {
        const Vector eps = replication_noise(inst, master_seed, rep);
        const Vector y = response(inst, eps);
        try {
            out[static_cast<std::size_t>(rep)] = {solve(inst, y, scfg).risk, true};
        } catch (const ConvergenceError&) {
        } catch (const NumericError&) {
        }
    });
    return out;
}

inline EventStats make_event(std::string name, std::string comparison, double threshold,
                             double threshold_lo, const std::vector<std::uint8_t>& ind,
                             double level, bool advisory) {
    EventStats ev;
    ev.name = std::move(name);
    ev.comparison = std::move(comparison);
    ev.threshold = threshold;
    ev.threshold_lo = threshold_lo;
    ev.reps = static_cast<int>(ind.size());
    for (std::uint8_t b : ind) ev.count += b;
    ev.frequency = ev.reps > 0 ? static_cast<double>(ev.count) / ev.reps : 0.0;
    ev.cp_lower = clopper_pearson_lower(ev.count, ev.reps, kExperimentConfidence);
    ev.cp_upper = clopper_pearson_upper(ev.count, ev.reps, kExperimentConfidence);
    ev.level = level;
    ev.slack = kProbabilitySlack;
    ev.pass = ev.cp_lower >= level - kProbabilitySlack;
    ev.advisory = advisory;
    return ev;
}

inline void record_risks(ExperimentReport& rep, const std::vector<RepOutcome>& outcomes) {
    rep.reps = static_cast<int>(outcomes.size());
    rep.risks.reserve(outcomes.size());
    for (const auto& o : outcomes) {
        rep.risks.push_back(o.risk);
        if (!o.ok) ++rep.solver_failures;
    }
}

inline void apply_fail_injection(ExperimentReport& rep, const ExperimentConfig& cfg) {
    if (!cfg.inject_fail) return;
    rep.verdict = Verdict::Fail;
    rep.reason = "fail-injection";
    rep.notes.push_back("fail-injected");
}

// Noise the replications will use; the Gaussian seed field is informational
// (the Monte Carlo engine reseeds from master_seed).
inline NoiseSpec experiment_noise(const ExperimentConfig& cfg) {
    if (cfg.fixed_noise) return FixedNoise{*cfg.fixed_noise};
    return GaussianNoise{cfg.sigma, cfg.master_seed};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// compat_lower
// ---------------------------------------------------------------------------

inline ExperimentReport run_compat_lower(const ExperimentConfig& cfg) {
    if (cfg.kind != ExperimentKind::compat_lower)
        throw ArgumentError("run_compat_lower: config names a different experiment");
    const Matrix X = build_design(cfg.design);
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    if (cfg.s > p)
        throw ConfigError("compat_lower: s exceeds the number of design columns");
    if (cfg.fixed_noise && cfg.fixed_noise->size() != n)
        throw ConfigError("compat_lower: fixed noise length does not match the design");

    // A deterministic noise vector is a symmetric distribution only when it
    // equals its own negation, i.e. it is identically zero.
    const double asymmetry =
        cfg.fixed_noise ? cfg.fixed_noise->lpNorm<Eigen::Infinity>() : 0.0;
    if (asymmetry > 0.0)
        throw ConfigError(
            "compat_lower: fixed noise violates the symmetric-noise premise (a "
            "deterministic vector is symmetric only when it is zero)");

    double lambda = 0.0;
    double delta_s = 0.0;
    bool used_rip = false;
    switch (cfg.lambda_rule.kind) {
        case LambdaRuleKind::explicit_value: lambda = cfg.lambda_rule.value; break;
        case LambdaRuleKind::asymptotic:
            lambda = lambda_asymptotic(p, cfg.s, cfg.gamma, cfg.sigma);
            break;
        case LambdaRuleKind::threshold:
        case LambdaRuleKind::threshold_fraction: {
            delta_s = rip_delta(X, cfg.s, cfg.rip_budget).delta_s;
            used_rip = true;
            const double thr =
                lambda_tuning_threshold(p, cfg.s, cfg.gamma, cfg.sigma, delta_s);
            lambda = cfg.lambda_rule.kind == LambdaRuleKind::threshold
                         ? thr
                         : cfg.lambda_rule.fraction * thr;
            break;
        }
    }
    if (!(lambda > 0.0))
        throw ConfigError("compat_lower: lambda must be positive");

    std::vector<int> T(static_cast<std::size_t>(cfg.s));
    std::iota(T.begin(), T.end(), 0);
    const CompatAdversary adversary =
        construct_compatibility_adversary(X, T, lambda, cfg.sigma, 0.99, cfg.restarts);

    ProblemInstance inst;
    inst.X = X;
    inst.beta_star = adversary.beta_star;
    inst.noise = detail::experiment_noise(cfg);
    inst.penalty = ScaledL1{lambda, n};
    validate_instance(inst);

    const double threshold =
        0.99 * lambda * std::sqrt(static_cast<double>(cfg.s)) / adversary.phi;
    const auto outcomes =
        detail::run_replications(inst, cfg.reps, cfg.master_seed, SolverConfig{});

    std::vector<std::uint8_t> ind(outcomes.size(), 0);
    for (std::size_t r = 0; r < outcomes.size(); ++r)
        ind[r] = outcomes[r].ok && outcomes[r].risk >= threshold;

    ExperimentReport rep;
    rep.name = experiment_kind_name(cfg.kind);
    rep.label = cfg.label;
    rep.config_echo = cfg.echo;
    rep.premises.push_back(make_premise("noise-symmetry", "<=", asymmetry, 0.0));
    rep.premises.push_back(make_premise("compat-positive", ">=", adversary.phi, 1e-10));
    rep.events.push_back(
        detail::make_event("risk-lower-event", ">=", threshold, 0.0, ind, 0.49, false));
    rep.indicators.push_back(std::move(ind));
    detail::record_risks(rep, outcomes);

    const EventStats& ev = rep.events.front();
    rep.verdict = ev.pass ? Verdict::Pass : Verdict::Fail;
    rep.reason = ev.pass ? "risk-lower-event holds at the required level"
                         : "risk-lower-event misses the required level";
    rep.notes.push_back("estimate-conditional");

    rep.quantities = {{"n", static_cast<double>(n)},
                      {"p", static_cast<double>(p)},
                      {"s", static_cast<double>(cfg.s)},
                      {"lambda", lambda},
                      {"phi", adversary.phi},
                      {"q", adversary.q},
                      {"gamma_adversary", adversary.gamma},
                      {"t0", adversary.t0},
                      {"risk_threshold", threshold}};
    if (used_rip) rep.quantities.emplace_back("delta_s", delta_s);

    rep.summary_frequency = ev.frequency;
    rep.summary_cp_lower = ev.cp_lower;
    rep.summary_threshold = threshold;
    detail::apply_fail_injection(rep, cfg);
    return rep;
}

// ---------------------------------------------------------------------------
// sandwich
// ---------------------------------------------------------------------------

inline ExperimentReport run_sandwich(const ExperimentConfig& cfg) {
    if (cfg.kind != ExperimentKind::sandwich)
        throw ArgumentError("run_sandwich: config names a different experiment");
    if (cfg.fixed_noise)
        throw ConfigError("sandwich: the theory assumes Gaussian noise; a fixed noise "
                          "override is not accepted");
    const Matrix X = build_design(cfg.design);
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    if (cfg.s > p)
        throw ConfigError("sandwich: s exceeds the number of design columns");

    const RipReport rip = rip_delta(X, cfg.s, cfg.rip_budget);
    const double delta_s = rip.delta_s;
    const double c0 = (1.0 + cfg.gamma + std::sqrt(3.0)) / cfg.gamma;
    const ConeConstantReport re = re_constant(X, cfg.s, c0, cfg.restarts);
    const double kappa = re.value;
    // A numerically vanishing restricted-eigenvalue estimate (the cone meets
    // the null space, typical when p greatly exceeds n) would blow up the
    // derived constants; floor it so the premise checks can still report the
    // failure instead of throwing.
    const bool kappa_floored = kappa < 1e-12;
    const double kappa_est = kappa_floored ? 1e-12 : kappa;

    double lambda = 0.0;
    switch (cfg.lambda_rule.kind) {
        case LambdaRuleKind::explicit_value: lambda = cfg.lambda_rule.value; break;
        case LambdaRuleKind::asymptotic:
            lambda = lambda_asymptotic(p, cfg.s, cfg.gamma, cfg.sigma);
            break;
        case LambdaRuleKind::threshold:
        case LambdaRuleKind::threshold_fraction: {
            const double thr =
                lambda_tuning_threshold(p, cfg.s, cfg.gamma, cfg.sigma, delta_s);
            lambda = cfg.lambda_rule.kind == LambdaRuleKind::threshold
                         ? thr
                         : cfg.lambda_rule.fraction * thr;
            break;
        }
    }
    const LassoConstants constants =
        lasso_constants(X, cfg.s, cfg.gamma, cfg.sigma, lambda, kappa_est, delta_s);

    const Premise lambda_premise =
        make_premise("lambda-tuning-log-9ep-s", ">=", lambda, constants.lambda_threshold);
    const Premise cbar_premise =
        make_premise("cbar-at-most-2cunder", "<=", constants.C_bar,
                     2.0 * constants.C_under);

    // Planted target: the beta-min magnitude times a 1.05 safety margin (times
    // the configured scale), positive sign, supported on the first s columns.
    // A nonpositive beta-min makes the premise vacuous and zero satisfies it,
    // so nothing is planted in that case.
    const double beta_min =
        (2.0 * constants.C_under - constants.C_bar) * constants.C_under * lambda /
        std::sqrt(static_cast<double>(n));
    const double planted = std::max(beta_min, 0.0) * 1.05 * cfg.beta_scale;
    const Premise beta_premise = make_premise("beta-min", ">=", planted, beta_min);

    ProblemInstance inst;
    inst.X = X;
    inst.beta_star = Vector::Zero(p);
    for (int j = 0; j < cfg.s; ++j) inst.beta_star[j] = planted;
    inst.noise = detail::experiment_noise(cfg);
    inst.penalty = ScaledL1{lambda, n};
    validate_instance(inst);

    const double sqrt_s = std::sqrt(static_cast<double>(cfg.s));
    const double upper_threshold = constants.C_bar * lambda * sqrt_s;
    const double ratio = std::max(constants.C_bar / constants.C_under - 1.0, 0.0);
    const double lower_threshold =
        constants.C_under * lambda * sqrt_s * (1.0 - std::sqrt(ratio));

    const auto outcomes =
        detail::run_replications(inst, cfg.reps, cfg.master_seed, SolverConfig{});

    const bool theorem_ok = lambda_premise.satisfied && cbar_premise.satisfied;
    const bool sandwich_ok = theorem_ok && beta_premise.satisfied;

    std::vector<std::uint8_t> ind_upper(outcomes.size(), 0);
    std::vector<std::uint8_t> ind_sandwich(outcomes.size(), 0);
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
        const bool up = outcomes[r].ok && outcomes[r].risk <= upper_threshold;
        ind_upper[r] = up;
        ind_sandwich[r] = up && outcomes[r].risk >= lower_threshold;
    }

    ExperimentReport rep;
    rep.name = experiment_kind_name(cfg.kind);
    rep.label = cfg.label;
    rep.config_echo = cfg.echo;
    rep.premises = {lambda_premise, cbar_premise, beta_premise};
    rep.events.push_back(detail::make_event("upper-event", "<=", upper_threshold, 0.0,
                                            ind_upper, 0.76, !theorem_ok));
    rep.events.push_back(detail::make_event("sandwich-event", "in", upper_threshold,
                                            lower_threshold, ind_sandwich, 0.25,
                                            !sandwich_ok));
    rep.indicators.push_back(std::move(ind_upper));
    rep.indicators.push_back(std::move(ind_sandwich));
    detail::record_risks(rep, outcomes);

    const EventStats& upper_ev = rep.events[0];
    const EventStats& sandwich_ev = rep.events[1];
    if (!theorem_ok) {
        rep.verdict = Verdict::Skipped;
        rep.reason = !lambda_premise.satisfied ? "lambda-tuning-log-9ep-s"
                                               : "cbar-at-most-2cunder";
        rep.notes.push_back("premise-failed: " + rep.reason);
        rep.notes.push_back("event frequencies reported as advisory only");
    } else if (!beta_premise.satisfied) {
        rep.verdict = upper_ev.pass ? Verdict::Pass : Verdict::Fail;
        rep.reason = "beta-min unmet: sandwich event demoted to advisory; verdict "
                     "rests on the upper event";
        rep.notes.push_back("premise-failed: beta-min");
    } else {
        const bool pass = upper_ev.pass && sandwich_ev.pass;
        rep.verdict = pass ? Verdict::Pass : Verdict::Fail;
        rep.reason = pass ? "upper and sandwich events hold at the required levels"
                          : (upper_ev.pass ? "sandwich-event misses the required level"
                                           : "upper-event misses the required level");
    }
    if (kappa_floored)
        rep.notes.push_back("kappa-estimate-floored: restricted-eigenvalue estimate "
                            "numerically zero; derived constants use 1e-12");
    rep.notes.push_back("estimate-conditional");

    rep.quantities = {{"n", static_cast<double>(n)},
                      {"p", static_cast<double>(p)},
                      {"s", static_cast<double>(cfg.s)},
                      {"gamma", cfg.gamma},
                      {"lambda", lambda},
                      {"lambda_threshold", constants.lambda_threshold},
                      {"delta_s", delta_s},
                      {"kappa", kappa},
                      {"c0", constants.c0},
                      {"C_bar", constants.C_bar},
                      {"C_under", constants.C_under},
                      {"beta_min", beta_min},
                      {"planted_magnitude", planted},
                      {"upper_threshold", upper_threshold},
                      {"lower_threshold", lower_threshold},
                      {"rip_supports_checked", static_cast<double>(rip.supports_checked)},
                      {"rip_sampled", rip.method == RipMethod::sampled ? 1.0 : 0.0}};

    rep.summary_frequency = sandwich_ev.frequency;
    rep.summary_cp_lower = sandwich_ev.cp_lower;
    rep.summary_threshold = upper_threshold;
    detail::apply_fail_injection(rep, cfg);
    return rep;
}

// ---------------------------------------------------------------------------
// small_lambda
// ---------------------------------------------------------------------------

inline ExperimentReport run_small_lambda(const ExperimentConfig& cfg) {
    if (cfg.kind != ExperimentKind::small_lambda)
        throw ArgumentError("run_small_lambda: config names a different experiment");
    if (cfg.fixed_noise)
        throw ConfigError("small_lambda: the theory assumes Gaussian noise; a fixed "
                          "noise override is not accepted");
    const Matrix X = build_design(cfg.design);
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());

    // Propagates the d < p/5 domain check of the packing lemma.
    const VgPacking packing = vg_packing(p, cfg.d);
    const double log_card_bound =
        0.5 * cfg.d * std::log(static_cast<double>(p) / (5.0 * cfg.d));

    const double delta_d = rip_delta(X, cfg.d, cfg.rip_budget).delta_s;
    const double delta_2d = rip_delta(X, 2 * cfg.d, cfg.rip_budget).delta_s;
    const double threshold = small_lambda_threshold(p, cfg.d, cfg.sigma, delta_2d);

    double lambda = 0.0;
    switch (cfg.lambda_rule.kind) {
        case LambdaRuleKind::explicit_value: lambda = cfg.lambda_rule.value; break;
        case LambdaRuleKind::threshold: lambda = threshold; break;
        case LambdaRuleKind::threshold_fraction:
            lambda = cfg.lambda_rule.fraction * threshold;
            break;
        case LambdaRuleKind::asymptotic:
            throw ConfigError("small_lambda: the asymptotic lambda rule does not apply");
    }
    const Premise lambda_premise =
        make_premise("lambda-too-small-log-p-5d", "<=", lambda, threshold);
    if (!lambda_premise.satisfied)
        throw ConfigError(
            "small_lambda: lambda exceeds the small-lambda premise threshold "
            "(lambda-too-small-log-p-5d): lambda = " + format_double(lambda) +
            " > " + format_double(threshold));

    ProblemInstance inst;
    inst.X = X;
    inst.beta_star = Vector::Zero(p);
    inst.noise = detail::experiment_noise(cfg);
    inst.penalty = ScaledL1{lambda, n};
    validate_instance(inst);

    const auto outcomes =
        detail::run_replications(inst, cfg.reps, cfg.master_seed, SolverConfig{});
    std::vector<double> successes;
    successes.reserve(outcomes.size());
    for (const auto& o : outcomes)
        if (o.ok) successes.push_back(o.risk);
    if (successes.size() < 2)
        throw NumericError("small_lambda: fewer than two replications solved");

    double std_err = 0.0;
    const double mean_hat = detail::mean_and_std_err(successes, std_err);
    const double lower_bound = (1.0 - delta_2d) / (8.0 * (1.0 + delta_d)) * cfg.sigma *
                               std::sqrt(cfg.d * std::log(static_cast<double>(p) /
                                                          (5.0 * cfg.d)));

    ExperimentReport rep;
    rep.name = experiment_kind_name(cfg.kind);
    rep.label = cfg.label;
    rep.config_echo = cfg.echo;
    rep.premises.push_back(lambda_premise);
    rep.premises.push_back(
        make_premise("packing-cardinality", ">=", packing.log_card, log_card_bound));
    rep.premises.push_back(make_premise("d-below-p-over-5", "<=",
                                        static_cast<double>(cfg.d),
                                        static_cast<double>(p) / 5.0));
    detail::record_risks(rep, outcomes);

    rep.has_mean_check = true;
    rep.mean_check.mean_hat = mean_hat;
    rep.mean_check.std_err = std_err;
    rep.mean_check.stat = mean_hat + 3.0 * std_err;
    rep.mean_check.threshold = lower_bound;
    rep.mean_check.pass = rep.mean_check.stat >= lower_bound;

    rep.verdict = rep.mean_check.pass ? Verdict::Pass : Verdict::Fail;
    rep.reason = rep.mean_check.pass
                     ? "mean risk plus three standard errors clears the lower bound"
                     : "mean risk plus three standard errors misses the lower bound";
    rep.notes.push_back("estimate-conditional");

    rep.quantities = {{"n", static_cast<double>(n)},
                      {"p", static_cast<double>(p)},
                      {"d", static_cast<double>(cfg.d)},
                      {"lambda", lambda},
                      {"small_lambda_threshold", threshold},
                      {"delta_d", delta_d},
                      {"delta_2d", delta_2d},
                      {"lower_bound", lower_bound},
                      {"mean_hat", mean_hat},
                      {"std_err", std_err},
                      {"packing_cardinality", static_cast<double>(packing.omega.size())},
                      {"packing_log_card", packing.log_card}};

    rep.summary_frequency = mean_hat;
    rep.summary_cp_lower = mean_hat - 3.0 * std_err;
    rep.summary_threshold = lower_bound;
    detail::apply_fail_injection(rep, cfg);
    return rep;
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
        case ExperimentKind::compat_lower: return run_compat_lower(cfg);
        case ExperimentKind::sandwich: return run_sandwich(cfg);
        case ExperimentKind::small_lambda: return run_small_lambda(cfg);
    }
    throw NumericError("run_experiment: unreachable dispatch");
}

// ---------------------------------------------------------------------------
// Report serialization and the bundle runner
// ---------------------------------------------------------------------------

inline Json premise_to_json(const Premise& p) {
    Json pj;
    pj["name"] = p.name;
    pj["op"] = p.op;
    pj["lhs"] = extended_to_json(p.lhs);
    pj["rhs"] = extended_to_json(p.rhs);
    pj["satisfied"] = p.satisfied;
    pj["margin"] = extended_to_json(p.margin);
    return pj;
}

inline Json event_to_json(const EventStats& e) {
    Json j;
    j["name"] = e.name;
    j["comparison"] = e.comparison;
    j["threshold"] = e.threshold;
    if (e.comparison == "in") j["threshold_lo"] = e.threshold_lo;
    j["count"] = e.count;
    j["reps"] = e.reps;
    j["frequency"] = e.frequency;
    j["cp_lower"] = e.cp_lower;
    j["cp_upper"] = e.cp_upper;
    j["level"] = e.level;
    j["slack"] = e.slack;
    j["pass"] = e.pass;
    j["advisory"] = e.advisory;
    return j;
}

inline std::string utc_timestamp() {
    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// `generated_at` is the only field that varies between identical reruns;
// comparisons should drop it.
inline Json experiment_report_to_json(const ExperimentReport& rep) {
    Json j;
    j["name"] = rep.name;
    j["label"] = rep.label;
    j["generated_at"] = utc_timestamp();
    j["verdict"] = verdict_name(rep.verdict);
    j["reason"] = rep.reason;
    j["config"] = rep.config_echo;
    j["quantities"] = flags_to_json(rep.quantities);
    Json premises = Json::array();
    for (const auto& p : rep.premises) premises.push_back(premise_to_json(p));
    j["premises"] = std::move(premises);
    Json events = Json::array();
    for (const auto& e : rep.events) events.push_back(event_to_json(e));
    j["events"] = std::move(events);
    if (rep.has_mean_check) {
        Json m;
        m["mean_hat"] = rep.mean_check.mean_hat;
        m["std_err"] = rep.mean_check.std_err;
        m["stat"] = rep.mean_check.stat;
        m["threshold"] = rep.mean_check.threshold;
        m["pass"] = rep.mean_check.pass;
        j["mean_check"] = std::move(m);
    }
    Json notes = Json::array();
    for (const auto& n : rep.notes) notes.push_back(n);
    j["notes"] = std::move(notes);
    Json summary;
    summary["frequency"] = rep.summary_frequency;
    summary["cp_lower"] = rep.summary_cp_lower;
    summary["threshold"] = rep.summary_threshold;
    j["summary"] = std::move(summary);
    j["reps"] = rep.reps;
    j["solver_failures"] = rep.solver_failures;
    Json columns = Json::array();
    columns.push_back("risk");
    for (const auto& e : rep.events) columns.push_back(e.name);
    j["replication_columns"] = std::move(columns);
    Json rows = Json::array();
    for (std::size_t r = 0; r < rep.risks.size(); ++r) {
        Json row = Json::array();
        if (std::isfinite(rep.risks[r])) row.push_back(rep.risks[r]);
        else row.push_back(nullptr);  // failed solve
        for (const auto& column : rep.indicators)
            row.push_back(static_cast<int>(column[r]));
        rows.push_back(std::move(row));
    }
    j["replications"] = std::move(rows);
    return j;
}

inline std::string experiments_summary_csv(const std::vector<ExperimentReport>& reports) {
    std::string out = "name,verdict,frequency,cp_lower,threshold\n";
    for (const auto& r : reports) {
        out += r.label;
        out += ',';
        out += verdict_name(r.verdict);
        out += ',';
        out += format_double(r.summary_frequency);
        out += ',';
        out += format_double(r.summary_cp_lower);
        out += ',';
        out += format_double(r.summary_threshold);
        out += '\n';
    }
    return out;
}

struct RunAllResult {
    std::vector<ExperimentReport> reports;
    std::string summary_csv;
    std::vector<std::filesystem::path> report_paths;
    int exit_code = 0;  // nonzero iff any verdict is FAIL
};

// Runs every experiment sequentially (replications run concurrently inside
// each), writing <out_dir>/<label>.json per experiment plus summary.csv.
inline RunAllResult run_all(const std::vector<ExperimentConfig>& configs,
                            const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    RunAllResult result;
    for (const auto& cfg : configs) {
        result.reports.push_back(run_experiment(cfg));
        const auto& rep = result.reports.back();
        const std::filesystem::path path = out_dir / (rep.label + ".json");
        write_text_file(path, experiment_report_to_json(rep).dump(2) + "\n");
        result.report_paths.push_back(path);
        if (rep.verdict == Verdict::Fail) result.exit_code = 1;
    }
    result.summary_csv = experiments_summary_csv(result.reports);
    write_text_file(out_dir / "summary.csv", result.summary_csv);
    return result;
}

inline RunAllResult run_all_from_file(const std::filesystem::path& config_path,
                                      const std::filesystem::path& out_dir) {
    // Full-bundle validation happens before any experiment executes.
    return run_all(load_experiment_bundle(config_path), out_dir);
}

}  // namespace riskscope
