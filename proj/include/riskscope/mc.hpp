#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "riskscope/certificates.hpp"
#include "riskscope/curves.hpp"
#include "riskscope/parallel.hpp"
#include "riskscope/stats.hpp"

namespace riskscope {

// Monte Carlo engine for the Gaussian-noise theory: the mean curve
// f(t) = E[F(t)], its maximizer t_f, risk samples, and the concentration /
// proximity checks built on them.  Replication `rep` always draws its noise
// from mix_seed(master_seed, rep), so every estimator in this header shares
// common random numbers with the others; a Gaussian noise spec's own seed is
// ignored here (it keys single-shot materialization, not replication).

struct McConfig {
    int reps = 1000;             // >= 2 so variance is estimable
    std::uint64_t master_seed = 0;
    std::vector<double> t_grid;  // strictly increasing, nonnegative
    double confidence = 0.99;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct FCurveEstimate {
    std::vector<double> grid;     // grid entries at or above the critical radius
    std::vector<double> f_hat;    // MC mean of F(t) on `grid`
    std::vector<double> std_err;  // standard error of each mean
    double t_f_hat = 0.0;
    Interval t_f_ci{};
    std::vector<double> excluded;  // grid entries below the critical radius
    std::vector<std::pair<std::string, double>> flags;
};

struct RiskSample {
    std::vector<double> risks;  // one per successful replication, in rep order
    double median_hat = 0.0;
    double mean_hat = 0.0;
    double std_err = 0.0;  // standard error of mean_hat
    int reps = 0;          // replications attempted
    int failures = 0;      // solver failures, excluded from `risks`
    std::vector<std::pair<std::string, double>> flags;
};

// Evenly spaced grid with `points` entries covering [lo, hi].
inline std::vector<double> linear_grid(double lo, double hi, int points) {
    if (points < 2) throw ArgumentError("linear_grid: points must be >= 2");
    if (!(hi > lo)) throw ArgumentError("linear_grid: hi must exceed lo");
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
    g.back() = hi;
    return g;
}

// Log-spaced grid with `points` entries covering [lo, hi], lo > 0.
inline std::vector<double> geometric_grid(double lo, double hi, int points) {
    if (points < 2) throw ArgumentError("geometric_grid: points must be >= 2");
    if (!(lo > 0.0 && hi > lo)) throw ArgumentError("geometric_grid: need 0 < lo < hi");
    std::vector<double> g(points);
    const double ratio = std::log(hi / lo);
    for (int i = 0; i < points; ++i)
        g[i] = lo * std::exp(ratio * static_cast<double>(i) / (points - 1));
    g.back() = hi;
    return g;
}

namespace detail {

inline void validate_mc(const McConfig& mc, bool need_grid) {
    if (mc.reps < 2) throw ArgumentError("mc: reps must be at least 2");
    if (!(mc.confidence > 0.0 && mc.confidence < 1.0))
        throw ArgumentError("mc: confidence must lie in (0,1)");
    if (!need_grid) return;
    if (mc.t_grid.empty()) throw ArgumentError("mc: t_grid must be nonempty");
    for (std::size_t i = 0; i < mc.t_grid.size(); ++i) {
        if (!std::isfinite(mc.t_grid[i]) || mc.t_grid[i] < 0.0)
            throw ArgumentError("mc: t_grid entries must be finite and nonnegative");
        if (i > 0 && !(mc.t_grid[i] > mc.t_grid[i - 1]))
            throw ArgumentError("mc: t_grid must be strictly increasing");
    }
}

// Noise for one replication: Gaussian specs draw from the replication
// stream, fixed specs repeat their vector.
inline Vector replication_noise(const ProblemInstance& inst, std::uint64_t master_seed,
                                std::int64_t rep) {
    if (const auto* fixed = std::get_if<FixedNoise>(&inst.noise)) return fixed->values;
    const auto& g = std::get<GaussianNoise>(inst.noise);
    Rng rng(mix_seed(master_seed, static_cast<std::uint64_t>(rep)));
    Vector eps(inst.n());
    for (int i = 0; i < inst.n(); ++i) eps[i] = g.sigma * rng.gaussian();
    return eps;
}

// Vertex of the parabola through three points, clamped to [x0, x2]; returns
// the middle abscissa when the points are not strictly concave.
inline double parabola_vertex(double x0, double y0, double x1, double y1, double x2,
                              double y2) {
    const double d1 = (y1 - y0) / (x1 - x0);
    const double d2 = (y2 - y1) / (x2 - x1);
    const double curv = (d2 - d1) / (x2 - x0);
    if (!(curv < 0.0)) return x1;
    const double v = 0.5 * (x0 + x1) - d1 / (2.0 * curv);
    return std::clamp(v, x0, x2);
}

inline double mean_and_std_err(const std::vector<double>& vals, double& std_err_out) {
    const std::size_t k = vals.size();
    const double mean = pairwise_sum(vals.data(), k) / static_cast<double>(k);
    std::vector<double> dev(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double d = vals[i] - mean;
        dev[i] = d * d;
    }
    std_err_out = std::sqrt(pairwise_sum(dev.data(), k) /
                            static_cast<double>(k - 1) / static_cast<double>(k));
    return mean;
}

// Distribution-free order-statistic confidence interval for the median:
// [X_(a), X_(b)] with BinCDF(a-1; n, 1/2) <= alpha/2 <= ... <= BinCDF(b).
inline Interval median_order_ci(const std::vector<double>& sorted, double confidence) {
    const std::int64_t n = static_cast<std::int64_t>(sorted.size());
    const double half_alpha = 0.5 * (1.0 - confidence);
    std::int64_t lo = 0, hi = n - 1;
    while (lo < hi) {  // largest a with BinCDF(a-1) <= alpha/2
        const std::int64_t mid = (lo + hi + 1) / 2;
        if (binomial_cdf(mid - 1, n, 0.5) <= half_alpha) lo = mid;
        else hi = mid - 1;
    }
    const std::int64_t a = lo;
    lo = 0;
    hi = n - 1;
    while (lo < hi) {  // smallest b with BinCDF(b) >= 1 - alpha/2
        const std::int64_t mid = (lo + hi) / 2;
        if (binomial_cdf(mid, n, 0.5) >= 1.0 - half_alpha) hi = mid;
        else lo = mid + 1;
    }
    return {sorted[a], sorted[lo]};
}

}  // namespace detail

// --------------------------------------------------------------------------
// f(t) = E[F(t)] on a shared grid with common random numbers across t.  Each
// replication sweeps one warm-started evaluator over the grid (checking that
// its M values are non-decreasing, up to the evaluator's own dual-scale
// tolerance), grid entries below the critical radius are dropped and flagged,
// and 1% of replications verify that the grid argmax of F sits within one
// grid step of that replication's solver risk.  t_f_hat refines the grid
// argmax by golden-section on the frozen-noise mean between its neighbors;
// the CI comes from a 200-resample replication bootstrap.
// --------------------------------------------------------------------------
inline FCurveEstimate estimate_f_curve(const ProblemInstance& inst, const McConfig& mc,
                                       const CurveConfig& cfg = {}) {
    validate_instance(inst);
    detail::validate_mc(mc, true);

    // The critical radius and h(beta*) do not depend on the noise.
    CurveEvaluator probe(inst, Vector::Zero(inst.n()), cfg);
    const double t_c = probe.t_critical();
    const double h_star = probe.h_beta_star();
    if (!std::isfinite(h_star) && mc.t_grid.front() < t_c)
        throw ArgumentError(
            "estimate_f_curve: h(beta_star) is infinite and the grid starts below t_c");

    FCurveEstimate est;
    for (double t : mc.t_grid) {
        const bool kept = t >= t_c - cfg.rad_tol * std::max(1.0, t);
        (kept ? est.grid : est.excluded).push_back(t);
    }
    if (est.grid.empty())
        throw ArgumentError("estimate_f_curve: entire grid lies below the critical radius");

    const int reps = mc.reps;
    const int K = static_cast<int>(est.grid.size());
    const int spot_stride = 100;  // 1% of replications get the argmax spot check

    std::vector<Vector> eps_store(reps);
    Matrix f_mat(reps, K);
    std::vector<char> spot_run(reps, 0), spot_fail(reps, 0);

    parallel_for(reps, [&](std::int64_t rep) {
        Vector eps = detail::replication_noise(inst, mc.master_seed, rep);
        CurveEvaluator ev(inst, eps, cfg);
        double prev_m = -kInf;
        double prev_tol = 0.0;
        int argmax_k = 0;
        for (int k = 0; k < K; ++k) {
            const double t = est.grid[k];
            const CurveEval e = ev.eval_M(t);
            if (!std::isfinite(e.value))
                throw NumericError("estimate_f_curve: M evaluated to -inf on a kept grid point");
            if (e.value < prev_m - prev_tol)
                throw NumericError(
                    "estimate_f_curve: per-replication M is not non-decreasing on the grid");
            prev_m = e.value;
            // The Lagrangian value can overshoot M(t) by at most
            // dual_mu * t * radius_band; allow that on top of the 1e-9 slack.
            prev_tol = 1e-9 * (1.0 + std::fabs(e.value)) +
                       e.dual_mu * t * cfg.rad_tol * std::max(1.0, t);
            f_mat(rep, k) = e.value - 0.5 * t * t;
            if (f_mat(rep, k) > f_mat(rep, argmax_k)) argmax_k = k;
        }
        if (rep % spot_stride == 0) {
            SolveResult sol = solve(inst, inst.X * inst.beta_star + eps, cfg.solver);
            spot_run[rep] = 1;
            if (sol.risk >= est.grid.front() && sol.risk <= est.grid.back() && K >= 2) {
                double step = 0.0;
                if (argmax_k > 0)
                    step = std::max(step, est.grid[argmax_k] - est.grid[argmax_k - 1]);
                if (argmax_k + 1 < K)
                    step = std::max(step, est.grid[argmax_k + 1] - est.grid[argmax_k]);
                if (std::fabs(est.grid[argmax_k] - sol.risk) > step + 1e-6 * (1.0 + sol.risk))
                    spot_fail[rep] = 1;
            }
        }
        eps_store[rep] = std::move(eps);
    });

    est.f_hat.resize(K);
    est.std_err.resize(K);
    std::vector<double> col(reps);
    for (int k = 0; k < K; ++k) {
        for (int r = 0; r < reps; ++r) col[r] = f_mat(r, k);
        est.f_hat[k] = detail::mean_and_std_err(col, est.std_err[k]);
    }

    int j_star = 0;
    for (int k = 1; k < K; ++k)
        if (est.f_hat[k] > est.f_hat[j_star]) j_star = k;

    // Refinement queries re-evaluate every replication at an off-grid t with
    // the same frozen noise, so their means are comparable with f_hat.
    double t_best = est.grid[j_star];
    double f_best = est.f_hat[j_star];
    std::int64_t refine_queries = 0;
    const auto query = [&](double t) {
        std::vector<double> vals(reps);
        parallel_for(reps, [&](std::int64_t rep) {
            CurveEvaluator ev(inst, eps_store[rep], cfg);
            const CurveEval e = ev.eval_M(t);
            if (!std::isfinite(e.value))
                throw NumericError("estimate_f_curve: M evaluated to -inf during refinement");
            vals[rep] = e.value - 0.5 * t * t;
        });
        ++refine_queries;
        const double f = pairwise_mean(vals);
        if (f > f_best) {
            f_best = f;
            t_best = t;
        }
        return f;
    };

    if (K >= 2) {
        double a = est.grid[std::max(j_star - 1, 0)];
        double b = est.grid[std::min(j_star + 1, K - 1)];
        if (j_star > 0 && j_star + 1 < K) {
            const double v = detail::parabola_vertex(est.grid[j_star - 1], est.f_hat[j_star - 1],
                                                     est.grid[j_star], est.f_hat[j_star],
                                                     est.grid[j_star + 1], est.f_hat[j_star + 1]);
            if (v > a && v < b) query(v);
        }
        constexpr double invphi = 0.6180339887498949;
        const double width = b - a;
        double x1 = b - invphi * (b - a);
        double x2 = a + invphi * (b - a);
        double f1 = query(x1);
        double f2 = query(x2);
        for (int it = 0; it < 60 && b - a > 1e-3 * width; ++it) {
            if (f1 < f2) {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + invphi * (b - a);
                f2 = query(x2);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - invphi * (b - a);
                f1 = query(x1);
            }
        }
    }
    est.t_f_hat = t_best;

    // Replication bootstrap: resample whole replications, take each
    // resample's grid argmax with a parabolic touch-up (no re-solves).
    constexpr int kBootstrap = 200;
    std::vector<double> boot_tf(kBootstrap);
    parallel_for(kBootstrap, [&](std::int64_t b) {
        Rng rng(mix_seed(mc.master_seed, (std::uint64_t{1} << 32) + static_cast<std::uint64_t>(b)));
        std::vector<double> sum(K, 0.0);
        for (int r = 0; r < reps; ++r) {
            const auto pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(reps)));
            for (int k = 0; k < K; ++k) sum[k] += f_mat(pick, k);
        }
        int jm = 0;
        for (int k = 1; k < K; ++k)
            if (sum[k] > sum[jm]) jm = k;
        double tf = est.grid[jm];
        if (jm > 0 && jm + 1 < K)
            tf = detail::parabola_vertex(est.grid[jm - 1], sum[jm - 1], est.grid[jm], sum[jm],
                                         est.grid[jm + 1], sum[jm + 1]);
        boot_tf[b] = tf;
    });
    std::sort(boot_tf.begin(), boot_tf.end());
    const double alpha = 1.0 - mc.confidence;
    const auto ilo = static_cast<int>(std::floor(0.5 * alpha * (kBootstrap - 1)));
    const auto ihi = static_cast<int>(std::ceil((1.0 - 0.5 * alpha) * (kBootstrap - 1)));
    est.t_f_ci = {std::min(boot_tf[ilo], est.t_f_hat), std::max(boot_tf[ihi], est.t_f_hat)};

    // Advisory concavity of the mean curve: each interior point should reach
    // its chord up to twice the combined standard errors.
    double concavity_violations = 0.0;
    for (int k = 1; k + 1 < K; ++k) {
        const double lam = (est.grid[k + 1] - est.grid[k]) / (est.grid[k + 1] - est.grid[k - 1]);
        const double chord = lam * est.f_hat[k - 1] + (1.0 - lam) * est.f_hat[k + 1];
        const double tol = 2.0 * (est.std_err[k] + lam * est.std_err[k - 1] +
                                  (1.0 - lam) * est.std_err[k + 1]);
        if (est.f_hat[k] < chord - tol - 1e-9 * (1.0 + std::fabs(chord)))
            concavity_violations += 1.0;
    }

    double spot_checks = 0.0, spot_failures = 0.0;
    for (int r = 0; r < reps; ++r) {
        spot_checks += spot_run[r];
        spot_failures += spot_fail[r];
    }
    est.flags.emplace_back("t_c", t_c);
    est.flags.emplace_back("excluded_below_tc", static_cast<double>(est.excluded.size()));
    est.flags.emplace_back("concavity_violations", concavity_violations);
    est.flags.emplace_back("spot_checks", spot_checks);
    est.flags.emplace_back("spot_check_failures", spot_failures);
    est.flags.emplace_back("refine_queries", static_cast<double>(refine_queries));
    est.flags.emplace_back("bootstrap_resamples", static_cast<double>(kBootstrap));
    return est;
}

// --------------------------------------------------------------------------
// Risk draws: solve one problem per replication and collect the risks.
// Solver failures are excluded and counted; everything else is deterministic
// in the master seed.
// --------------------------------------------------------------------------
inline RiskSample sample_risks(const ProblemInstance& inst, const McConfig& mc,
                               const SolverConfig& solver_cfg = {}) {
    validate_instance(inst);
    detail::validate_mc(mc, false);
    const int reps = mc.reps;
    std::vector<double> slot(reps, 0.0);
    std::vector<char> ok(reps, 0);
    parallel_for(reps, [&](std::int64_t rep) {
        const Vector eps = detail::replication_noise(inst, mc.master_seed, rep);
        try {
            const SolveResult sol = solve(inst, inst.X * inst.beta_star + eps, solver_cfg);
            slot[rep] = sol.risk;
            ok[rep] = 1;
        } catch (const ConvergenceError&) {
        } catch (const NumericError&) {
        }
    });

    RiskSample out;
    out.reps = reps;
    for (int r = 0; r < reps; ++r) {
        if (ok[r]) out.risks.push_back(slot[r]);
        else ++out.failures;
    }
    const std::size_t k = out.risks.size();
    if (k < 2) throw NumericError("sample_risks: fewer than two replications solved");
    out.mean_hat = detail::mean_and_std_err(out.risks, out.std_err);
    std::vector<double> sorted = out.risks;
    std::sort(sorted.begin(), sorted.end());
    out.median_hat = (k % 2 == 1) ? sorted[k / 2] : 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]);
    out.flags.emplace_back("reps", static_cast<double>(reps));
    out.flags.emplace_back("failures", static_cast<double>(out.failures));
    return out;
}

struct TailCheck {
    double x = 0.0;
    double limit = 0.0;       // Gaussian tail bound at x
    double upper_freq = 0.0;  // freq{risk >= median_hat + sigma x}
    double upper_cp_lower = 0.0;
    bool upper_pass = false;
    double lower_freq = 0.0;  // freq{risk <= median_hat - sigma x}
    double lower_cp_lower = 0.0;
    bool lower_pass = false;
};

struct ConcentrationReport {
    double sigma = 0.0;
    double confidence = 0.99;
    double median_hat = 0.0;
    std::int64_t samples = 0;
    std::int64_t needed_reps = 0;
    bool underpowered = false;
    bool all_pass = true;
    std::vector<TailCheck> checks;
};

// --------------------------------------------------------------------------
// Two-sided concentration around the empirical median: for each x the tail
// {risk >= median + sigma x} (and its mirror) may occur with probability at
// most the Gaussian tail at x.  A tail passes when the one-sided
// Clopper-Pearson lower bound of its frequency stays below that limit.
// needed_reps is where the one-sided Hoeffding band at `confidence` drops
// below the smallest limit tested -- the sample size at which the check
// stops being vacuous; smaller samples are flagged underpowered but still
// evaluated.  The verdict depends on the sample only through its sorted
// order, so it is invariant to permuting the risks.
// --------------------------------------------------------------------------
inline ConcentrationReport concentration_check(const RiskSample& sample, double sigma,
                                               const std::vector<double>& x_list,
                                               double confidence = 0.99) {
    if (!(sigma >= 0.0)) throw ArgumentError("concentration_check: sigma must be nonnegative");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw ArgumentError("concentration_check: confidence must lie in (0,1)");
    if (x_list.empty()) throw ArgumentError("concentration_check: x_list must be nonempty");
    const auto n = static_cast<std::int64_t>(sample.risks.size());
    if (n < 2) throw ArgumentError("concentration_check: sample needs at least two risks");

    ConcentrationReport rep;
    rep.sigma = sigma;
    rep.confidence = confidence;
    rep.median_hat = sample.median_hat;
    rep.samples = n;
    double min_limit = 1.0;
    for (double x : x_list) {
        if (!(x >= 0.0))
            throw ArgumentError("concentration_check: x values must be nonnegative");
        TailCheck chk;
        chk.x = x;
        chk.limit = normal_sf(x);
        min_limit = std::min(min_limit, chk.limit);
        std::int64_t up = 0, down = 0;
        for (double r : sample.risks) {
            if (r >= sample.median_hat + sigma * x) ++up;
            if (r <= sample.median_hat - sigma * x) ++down;
        }
        chk.upper_freq = static_cast<double>(up) / static_cast<double>(n);
        chk.lower_freq = static_cast<double>(down) / static_cast<double>(n);
        chk.upper_cp_lower = clopper_pearson_lower(up, n, confidence);
        chk.lower_cp_lower = clopper_pearson_lower(down, n, confidence);
        chk.upper_pass = chk.upper_cp_lower <= chk.limit + 1e-12;
        chk.lower_pass = chk.lower_cp_lower <= chk.limit + 1e-12;
        rep.all_pass = rep.all_pass && chk.upper_pass && chk.lower_pass;
        rep.checks.push_back(chk);
    }
    rep.needed_reps = static_cast<std::int64_t>(
        std::ceil(-std::log(1.0 - confidence) / (2.0 * min_limit * min_limit)));
    rep.underpowered = n < rep.needed_reps;
    return rep;
}

struct ProximityCheck {
    std::string name;        // which statistic t_f is compared against
    double constant = 0.0;   // multiple of sqrt(sigma) allowed by the theory
    double gap = 0.0;        // |sqrt(t_f_hat) - sqrt(statistic)|
    double ci_slack = 0.0;   // MC uncertainty mapped through the square root
    double limit = 0.0;      // constant * sqrt(sigma) + ci_slack
    bool pass = false;
};

struct ProximityReport {
    double sigma = 0.0;
    double t_f_hat = 0.0;
    double median_hat = 0.0;
    double mean_hat = 0.0;
    ProximityCheck median_check;
    ProximityCheck mean_check;
    bool all_pass = false;
};

// --------------------------------------------------------------------------
// Proximity of t_f to the risk median and mean in square-root scale:
// |sqrt(t_f) - sqrt(median)| <= 3.25 sqrt(sigma) and
// |sqrt(t_f) - sqrt(mean)|   <= 4.40 sqrt(sigma), inflated by the MC bands
// (t_f CI half-width, order-statistic median CI, normal mean CI) mapped
// through the square root.  Both inputs must come from the same instance.
// --------------------------------------------------------------------------
inline ProximityReport tf_proximity_check(const FCurveEstimate& fcurve,
                                          const RiskSample& sample, double sigma,
                                          double confidence = 0.99) {
    if (!(sigma >= 0.0)) throw ArgumentError("tf_proximity_check: sigma must be nonnegative");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw ArgumentError("tf_proximity_check: confidence must lie in (0,1)");
    if (sample.risks.size() < 2)
        throw ArgumentError("tf_proximity_check: sample needs at least two risks");

    const auto rt = [](double v) { return std::sqrt(std::max(v, 0.0)); };
    ProximityReport rep;
    rep.sigma = sigma;
    rep.t_f_hat = fcurve.t_f_hat;
    rep.median_hat = sample.median_hat;
    rep.mean_hat = sample.mean_hat;

    const double s_tf = std::max(rt(fcurve.t_f_hat) - rt(fcurve.t_f_ci.lo),
                                 rt(fcurve.t_f_ci.hi) - rt(fcurve.t_f_hat));
    std::vector<double> sorted = sample.risks;
    std::sort(sorted.begin(), sorted.end());
    const Interval med_ci = detail::median_order_ci(sorted, confidence);
    const double s_med = std::max(rt(sample.median_hat) - rt(med_ci.lo),
                                  rt(med_ci.hi) - rt(sample.median_hat));
    const double z = normal_quantile(0.5 * (1.0 + confidence));
    const double s_mean =
        std::max(rt(sample.mean_hat) - rt(sample.mean_hat - z * sample.std_err),
                 rt(sample.mean_hat + z * sample.std_err) - rt(sample.mean_hat));

    const auto build = [&](std::string name, double constant, double stat, double stat_slack) {
        ProximityCheck c;
        c.name = std::move(name);
        c.constant = constant;
        c.gap = std::fabs(rt(fcurve.t_f_hat) - rt(stat));
        c.ci_slack = s_tf + stat_slack;
        c.limit = constant * std::sqrt(sigma) + c.ci_slack;
        c.pass = c.gap <= c.limit + 1e-12;
        return c;
    };
    rep.median_check = build("median", 3.25, sample.median_hat, s_med);
    rep.mean_check = build("mean", 4.40, sample.mean_hat, s_mean);
    rep.all_pass = rep.median_check.pass && rep.mean_check.pass;
    return rep;
}

// --------------------------------------------------------------------------
// Statistical upper condition for t_f: if f(s) + h(beta*) <= s^2 / 2 then
// t_f <= s.  (1-strong concavity of f gives, for a supergradient d at s,
// f(0) <= f(s) - d s - s^2/2; with f(0) >= -h(beta*) the condition forces
// d <= 0, so f is non-increasing at s and its maximizer sits in [0, s].)
// The MC estimate carries a one-sided confidence band; Verified means even
// the upper confidence bound of f(s) clears the inequality, an inconclusive
// band gives NotApplicable, and s below the critical radius is flagged as
// invalid input rather than vacuously verified.
// --------------------------------------------------------------------------
inline Certificate tf_upper_condition(const ProblemInstance& inst, double s_val,
                                      const McConfig& mc, const CurveConfig& cfg = {}) {
    validate_instance(inst);
    detail::validate_mc(mc, false);
    if (!(s_val > 0.0)) throw ArgumentError("tf_upper_condition: s_val must be positive");

    Certificate cert;
    cert.kind = CertificateKind::tf_upper;
    cert.direction = "upper";
    cert.bound = s_val;

    CurveEvaluator probe(inst, Vector::Zero(inst.n()), cfg);
    const double t_c = probe.t_critical();
    const double h_star = probe.h_beta_star();
    if (s_val < t_c - cfg.rad_tol * std::max(1.0, s_val)) {
        cert.verdict = CertVerdict::NotApplicable;
        cert.premises.push_back(make_premise("s_val >= t_c", ">=", s_val, t_c));
        cert.slack = cert.premises.back().margin;
        cert.flags.emplace_back("invalid_input_below_tc", 1.0);
        cert.flags.emplace_back("t_c", t_c);
        return cert;
    }
    if (!std::isfinite(h_star)) {
        // The condition can never hold; report it as unmet rather than error.
        cert.verdict = CertVerdict::NotApplicable;
        cert.premises.push_back(make_premise("f_hat(s) + band + h(beta_star) <= s^2 / 2", "<=",
                                             kInf, 0.5 * s_val * s_val));
        cert.slack = cert.premises.back().margin;
        cert.flags.emplace_back("h_beta_star_infinite", 1.0);
        cert.flags.emplace_back("t_c", t_c);
        return cert;
    }

    const int reps = mc.reps;
    std::vector<double> vals(reps);
    parallel_for(reps, [&](std::int64_t rep) {
        const Vector eps = detail::replication_noise(inst, mc.master_seed, rep);
        CurveEvaluator ev(inst, eps, cfg);
        const CurveEval e = ev.eval_M(s_val);
        if (!std::isfinite(e.value))
            throw NumericError("tf_upper_condition: M evaluated to -inf at s_val");
        vals[rep] = e.value - 0.5 * s_val * s_val;
    });
    double se = 0.0;
    const double f_hat = detail::mean_and_std_err(vals, se);
    const double band = normal_quantile(mc.confidence) * se;

    cert.premises.push_back(make_premise("f_hat(s) + band + h(beta_star) <= s^2 / 2", "<=",
                                         f_hat + band + h_star, 0.5 * s_val * s_val));
    cert.verdict = cert.premises.back().satisfied ? CertVerdict::Verified
                                                  : CertVerdict::NotApplicable;
    cert.slack = cert.premises.back().margin;
    cert.flags.emplace_back("f_hat", f_hat);
    cert.flags.emplace_back("std_err", se);
    cert.flags.emplace_back("band", band);
    cert.flags.emplace_back("t_c", t_c);
    cert.flags.emplace_back("reps", static_cast<double>(reps));
    return cert;
}

}  // namespace riskscope
