// Acceptance gate: one [PASS]/[FAIL] line per criterion, nonzero exit if any
// criterion fails.  Every check here reruns the underlying computation from
// scratch; nothing is read from cached results.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "riskscope/experiments.hpp"

using namespace riskscope;

namespace {

constexpr double kInfty = std::numeric_limits<double>::infinity();

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Shared instance family for the curve criteria: n <= 20, p <= 30, penalties
// cycling through none / l1 / squared-l2 / box indicator, noise N(0, sigma^2).
// ---------------------------------------------------------------------------

ProblemInstance family_instance(std::uint64_t seed, int which) {
    Rng rng(seed);
    ProblemInstance inst;
    const int n = 4 + static_cast<int>(rng.below(17));  // 4..20
    // The box-indicator case runs through the projected-gradient solver, whose
    // linear rate needs a strongly convex quadratic: keep p <= n there and
    // redraw until the design is well conditioned.  The other penalties get
    // the full overcomplete range.
    const bool boxed = which % 4 == 3;
    const int p_hi = boxed ? std::max(3, (7 * n) / 10) : 30;
    const int p = 3 + static_cast<int>(rng.below(std::uint64_t(p_hi - 2)));
    inst.X = Matrix(n, p);
    for (int attempt = 0; attempt < 100; ++attempt) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < p; ++j) inst.X(i, j) = rng.gaussian() / std::sqrt(double(n));
        if (!boxed ||
            inst.X.jacobiSvd().singularValues().minCoeff() >= 0.25)
            break;
    }
    inst.beta_star = Vector::Zero(p);
    const int nnz = 1 + static_cast<int>(rng.below(3));
    for (int k = 0; k < nnz; ++k)
        inst.beta_star[static_cast<int>(rng.below(std::uint64_t(p)))] = rng.gaussian();
    const double sigma = 0.5 + rng.uniform();
    inst.noise = GaussianNoise{sigma, seed};
    switch (which % 4) {
        case 0: inst.penalty = ZeroPenalty{}; break;
        case 1: inst.penalty = ScaledL1{0.1 + 0.5 * rng.uniform(), n}; break;
        case 2: inst.penalty = SquaredL2{0.1 + 0.4 * rng.uniform()}; break;
        default: {
            const double b = inst.beta_star.cwiseAbs().maxCoeff() + 0.5;
            inst.penalty = IndicatorPenalty{
                BoxSet{Vector::Constant(p, -b), Vector::Constant(p, b)}};
            break;
        }
    }
    return inst;
}

Vector noise_draw(const ProblemInstance& inst, std::uint64_t seed, int rep) {
    const double sigma = std::get<GaussianNoise>(inst.noise).sigma;
    Rng rng(mix_seed(seed, std::uint64_t(rep)));
    Vector eps(inst.n());
    for (int i = 0; i < inst.n(); ++i) eps[i] = sigma * rng.gaussian();
    return eps;
}

// Grid-argmax of the strictly concave F by ternary search on grid indices,
// finished with an exact scan of the final bracket.
int grid_argmax_f(CurveEvaluator& ev, double step, int hi_index) {
    std::map<int, double> cache;
    const auto f = [&](int k) {
        auto it = cache.find(k);
        if (it != cache.end()) return it->second;
        const double v = ev.eval_F(step * k).value;
        cache.emplace(k, v);
        return v;
    };
    int lo = 0, hi = hi_index;
    while (hi - lo > 16) {
        const int m1 = lo + (hi - lo) / 3;
        const int m2 = hi - (hi - lo) / 3;
        if (f(m1) < f(m2)) lo = m1 + 1;
        else hi = m2;
    }
    int best = lo;
    for (int k = lo + 1; k <= hi; ++k)
        if (f(k) > f(best)) best = k;
    return best;
}

struct CurveRealization {
    double argmax_gap_ratio = 0.0;  // |grid argmax - risk| / allowance
    double upper_margin = kInfty;   // upper bound - (risk - 1e-6)
    int verified_lowers = 0;
    int lower_violations = 0;       // verified lower bound > risk + 1e-6
};

// Criteria 1 and 3 share these realizations (50 instances x 5 draws).
std::vector<CurveRealization> run_curve_family() {
    constexpr int kInstances = 50, kDraws = 5;
    std::vector<CurveRealization> out(kInstances * kDraws);
    parallel_for(kInstances * kDraws, [&](std::int64_t idx) {
        const int ii = static_cast<int>(idx) / kDraws;
        const int rep = static_cast<int>(idx) % kDraws;
        const ProblemInstance inst = family_instance(9000 + std::uint64_t(ii), ii);
        const Vector eps = noise_draw(inst, 500 + std::uint64_t(ii), rep);
        const SolveResult sol = solve(inst, response(inst, eps));
        CurveEvaluator ev(inst, eps);

        CurveRealization r;
        const double step = 1e-3 * eps.norm();
        const double allowance = step + 1e-6;
        const double t_hi = std::max(3.0 * eps.norm(), 1.3 * sol.risk + 10.0 * step);
        const int k_hi = std::min(8000, static_cast<int>(std::ceil(t_hi / step)));
        const int k_star = grid_argmax_f(ev, step, k_hi);
        r.argmax_gap_ratio = std::fabs(step * k_star - sol.risk) / allowance;

        const Certificate up = fixed_point_upper(ev);
        r.upper_margin = up.bound - (sol.risk - 1e-6);
        // Probes just below the computed fixed point; the certificate's
        // premise window sits in [bound / (1 + alpha^2), bound].
        const double base = std::max(up.bound, 1e-9);
        const std::pair<double, double> probes[] = {{0.99 * base, 0.25},
                                                    {0.96 * base, 0.30}};
        for (const auto& [rad, alpha] : probes) {
            const Certificate lowc = almost_fixed_point_lower(ev, rad, alpha);
            if (!lowc.verified()) continue;
            ++r.verified_lowers;
            if (lowc.bound > sol.risk + 1e-6) ++r.lower_violations;
        }
        out[static_cast<std::size_t>(idx)] = r;
    });
    return out;
}

Outcome criterion_1(const std::vector<CurveRealization>& rs) {
    double worst = 0.0;
    int misses = 0;
    for (const auto& r : rs) {
        worst = std::max(worst, r.argmax_gap_ratio);
        if (r.argmax_gap_ratio > 1.0) ++misses;
    }
    return {misses == 0, std::to_string(rs.size()) + " realizations, worst gap " +
                             fmt(worst) + "x of tolerance"};
}

Outcome criterion_2() {
    constexpr int kPoints = 241, kTriples = 1000;
    const std::uint64_t seeds[] = {21, 22, 23, 24, 25, 26};
    int violations = 0, checked = 0;
    double min_margin = kInfty;
    for (int ii = 0; ii < 6; ++ii) {
        const ProblemInstance inst = family_instance(seeds[ii], ii);
        const Vector eps = noise_draw(inst, 1700 + std::uint64_t(ii), 0);
        CurveEvaluator ev(inst, eps);
        const double step = 3.0 * eps.norm() / (kPoints - 1);
        std::vector<double> m(kPoints);
        for (int k = 0; k < kPoints; ++k) m[size_t(k)] = ev.eval_M(step * k).value;
        Rng rng(7000 + std::uint64_t(ii));
        for (int t = 0; t < kTriples; ++t) {
            const int mid = 1 + static_cast<int>(rng.below(kPoints - 2));
            const int span = std::min(mid, kPoints - 1 - mid);
            const int w = 1 + static_cast<int>(rng.below(std::uint64_t(span)));
            const double lhs = m[size_t(mid)];
            const double rhs = 0.5 * (m[size_t(mid - w)] + m[size_t(mid + w)]);
            ++checked;
            if (std::isinf(rhs)) continue;  // an endpoint below the critical radius
            min_margin = std::min(min_margin, lhs - rhs);
            if (lhs < rhs - 1e-6) ++violations;
        }
    }
    return {violations == 0, std::to_string(checked) + " triples, " +
                                 std::to_string(violations) + " violations, min margin " +
                                 fmt(min_margin)};
}

Outcome criterion_3(const std::vector<CurveRealization>& rs) {
    if (rs.empty()) return {false, "no realizations available"};
    double min_upper_margin = kInfty;
    int upper_viol = 0, verified = 0, lower_viol = 0;
    for (const auto& r : rs) {
        min_upper_margin = std::min(min_upper_margin, r.upper_margin);
        if (r.upper_margin < 0.0) ++upper_viol;
        verified += r.verified_lowers;
        lower_viol += r.lower_violations;
    }
    // Require the lower-bound side to be exercised, not vacuously true.
    const bool pass = upper_viol == 0 && lower_viol == 0 && verified >= 50;
    return {pass, "upper margin >= " + fmt(min_upper_margin) + ", " +
                      std::to_string(verified) + " verified lower bounds, " +
                      std::to_string(lower_viol) + " violations"};
}

Outcome criterion_4() {
    constexpr int kInstances = 100;
    std::vector<double> margins(kInstances, kInfty);
    std::vector<int> flags(kInstances, 0);  // 1 = large-lambda case failed bound 0
    parallel_for(kInstances, [&](std::int64_t idx) {
        const int ii = static_cast<int>(idx);
        Rng rng(3100 + std::uint64_t(ii));
        const int n = 5 + static_cast<int>(rng.below(8));
        const int p = 4 + static_cast<int>(rng.below(15));
        ProblemInstance inst;
        inst.X = Matrix(n, p);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < p; ++j) inst.X(i, j) = rng.gaussian() / std::sqrt(double(n));
        inst.beta_star = Vector::Zero(p);
        inst.beta_star[0] = rng.gaussian();
        inst.noise = GaussianNoise{1.0, 0};
        Vector eps(n);
        for (int i = 0; i < n; ++i) eps[i] = rng.gaussian();

        double lam;
        const bool large = ii >= 95;
        if (ii == 0) lam = 0.01;
        else if (large)
            lam = 1.5 * (inst.X.transpose() * eps).cwiseAbs().maxCoeff() / std::sqrt(double(n));
        else lam = 0.05 + 0.5 * rng.uniform();
        inst.penalty = ScaledL1{lam, n};

        const SolveResult sol = solve(inst, response(inst, eps));
        const Certificate cert = norm_dual_lower(inst, eps);
        margins[size_t(ii)] = (sol.risk + 1e-6) - cert.bound;
        if (large && cert.bound > 1e-9) flags[size_t(ii)] = 1;
    });
    const double min_margin = *std::min_element(margins.begin(), margins.end());
    const int zero_case_misses = std::accumulate(flags.begin(), flags.end(), 0);
    return {min_margin >= 0.0 && zero_case_misses == 0,
            "100 instances incl. lambda 0.01 and 5 dominated cases, min margin " +
                fmt(min_margin)};
}

Outcome criterion_5() {
    ProblemInstance inst;
    const int n = 7;
    inst.X = Matrix::Identity(n, n);
    inst.beta_star = Vector::Zero(n);
    inst.noise = GaussianNoise{1.0, 0};
    inst.penalty = ZeroPenalty{};
    double worst_upper = 0.0, worst_h = 0.0, worst_risk = 0.0;
    for (int rep = 0; rep < 3; ++rep) {
        const Vector eps = noise_draw(inst, 41, rep);
        const double norm = eps.norm();
        const SolveResult sol = solve(inst, response(inst, eps));
        worst_risk = std::max(worst_risk, std::fabs(sol.risk - norm));
        CurveEvaluator ev(inst, eps);
        const Certificate up = fixed_point_upper(ev);
        worst_upper = std::max(worst_upper, std::fabs(up.bound - norm));
        for (double t : geometric_grid(0.05 * norm, 50.0 * norm, 25))
            worst_h = std::max(worst_h, std::fabs(ev.eval_H(t).value - norm));
    }
    return {worst_upper <= 1e-8 && worst_h <= 1e-8 && worst_risk <= 1e-8,
            "|upper - ||eps||| <= " + fmt(worst_upper) + ", |H - ||eps||| <= " +
                fmt(worst_h) + " over 3 decades"};
}

Outcome criterion_6() {
    // Identity design sqrt(n) I_20 written to disk, then a random
    // well-conditioned tall design; both at 2000 replications.
    const auto dir = std::filesystem::temp_directory_path() / "riskscope_acceptance";
    std::filesystem::create_directories(dir);
    const auto id_path = dir / "identity20.csv";
    const int n_id = 20;
    write_csv_matrix(id_path, std::sqrt(double(n_id)) * Matrix::Identity(n_id, n_id));

    ExperimentConfig id_cfg;
    id_cfg.kind = ExperimentKind::compat_lower;
    id_cfg.label = "accept_compat_identity";
    id_cfg.design = {DesignGeneratorKind::from_file, n_id, n_id, 0, id_path};
    id_cfg.s = 3;
    id_cfg.lambda_rule = {LambdaRuleKind::explicit_value, 1.0, 1.0};
    id_cfg.sigma = 1.0;
    id_cfg.reps = 2000;
    id_cfg.master_seed = 11;
    const ExperimentReport id_rep = run_compat_lower(id_cfg);

    ExperimentConfig rnd_cfg = id_cfg;
    rnd_cfg.label = "accept_compat_gaussian";
    rnd_cfg.design = {DesignGeneratorKind::gaussian_iid, 50, 12, 9, {}};
    rnd_cfg.master_seed = 12;
    const ExperimentReport rnd_rep = run_compat_lower(rnd_cfg);

    const bool pass = id_rep.verdict == Verdict::Pass &&
                      rnd_rep.verdict == Verdict::Pass &&
                      id_rep.events.at(0).cp_lower >= 0.46 &&
                      rnd_rep.events.at(0).cp_lower >= 0.46;
    return {pass, "cp lower bounds " + fmt(id_rep.events.at(0).cp_lower) + " (identity), " +
                      fmt(rnd_rep.events.at(0).cp_lower) + " (gaussian 50x12), level 0.46"};
}

Outcome criterion_7() {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::sandwich;
    cfg.label = "accept_sandwich";
    cfg.design = {DesignGeneratorKind::gaussian_iid, 100, 500, 2, {}};
    cfg.s = 3;
    cfg.gamma = 0.5;
    cfg.has_gamma = true;
    cfg.lambda_rule = {LambdaRuleKind::asymptotic, 0.0, 1.0};
    cfg.sigma = 1.0;
    cfg.reps = 500;
    cfg.master_seed = 23;
    const ExperimentReport rep = run_sandwich(cfg);

    // At this scale the tuning premise cannot hold; the report must say so
    // (never silently pass) and still carry the event frequencies.
    bool premises_reported = rep.premises.size() == 3;
    bool tuning_listed = false;
    for (const auto& pr : rep.premises) {
        premises_reported = premises_reported && std::isfinite(pr.margin);
        if (pr.name == "lambda-tuning-log-9ep-s") tuning_listed = !pr.satisfied;
    }
    const EventStats& upper = rep.events.at(0);
    const EventStats& sandwich = rep.events.at(1);
    const bool conditional_ok =
        rep.verdict == Verdict::Skipped && rep.reason == "lambda-tuning-log-9ep-s" &&
        upper.advisory && sandwich.advisory;
    const bool pass = premises_reported && tuning_listed && conditional_ok &&
                      rep.solver_failures == 0 && upper.cp_lower >= 0.73 &&
                      sandwich.cp_lower >= 0.22;
    return {pass, "premise failure reported (" + rep.reason + "), cp lower bounds " +
                      fmt(upper.cp_lower) + " / " + fmt(sandwich.cp_lower) +
                      " vs 0.73 / 0.22"};
}

Outcome criterion_8() {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::small_lambda;
    cfg.label = "accept_small_zero";
    cfg.design = {DesignGeneratorKind::gaussian_iid, 100, 400, 77, {}};
    cfg.d = 5;
    cfg.lambda_rule = {LambdaRuleKind::explicit_value, 0.0, 1.0};
    cfg.sigma = 1.0;
    cfg.reps = 300;
    cfg.master_seed = 31;
    const ExperimentReport zero = run_small_lambda(cfg);

    cfg.label = "accept_small_half";
    cfg.lambda_rule = {LambdaRuleKind::threshold_fraction, 0.0, 0.5};
    const ExperimentReport half = run_small_lambda(cfg);

    const bool pass = zero.verdict == Verdict::Pass && half.verdict == Verdict::Pass &&
                      zero.mean_check.pass && half.mean_check.pass;
    return {pass, "mean + 3 se = " + fmt(zero.mean_check.stat) + " (lambda 0) / " +
                      fmt(half.mean_check.stat) + " (half threshold) vs bound " +
                      fmt(zero.mean_check.threshold)};
}

Outcome criterion_9() {
    McConfig mc;
    mc.reps = 5000;
    const std::vector<double> xs = {0.5, 1.0, 2.0};

    // Scalar least squares: risk = |eps|, with the analytic two-sided tail
    // at x = 1 equal to 2 Phi_bar(1 + Phi^-1(3/4)).
    ProblemInstance scalar;
    scalar.X = Matrix::Identity(1, 1);
    scalar.beta_star = Vector::Zero(1);
    scalar.noise = GaussianNoise{1.0, 0};
    scalar.penalty = ZeroPenalty{};
    mc.master_seed = 3;
    const RiskSample s1 = sample_risks(scalar, mc);
    const ConcentrationReport r1 = concentration_check(s1, 1.0, xs);

    const double true_tail = 0.09403438715225497;
    const TailCheck& at1 = r1.checks.at(1);
    const auto hits = static_cast<std::int64_t>(std::llround(at1.upper_freq * mc.reps));
    const bool analytic_ok = clopper_pearson_lower(hits, mc.reps, 0.99) <= true_tail &&
                             clopper_pearson_upper(hits, mc.reps, 0.99) >= true_tail;

    ProblemInstance plane;
    plane.X = Matrix::Identity(2, 2);
    plane.beta_star = Vector::Zero(2);
    plane.noise = GaussianNoise{1.0, 0};
    plane.penalty = ZeroPenalty{};
    mc.master_seed = 19;
    const ConcentrationReport r2 = concentration_check(sample_risks(plane, mc), 1.0, xs);

    Rng rng(55);
    ProblemInstance lasso;
    lasso.X = Matrix(10, 16);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 16; ++j) lasso.X(i, j) = rng.gaussian();
    lasso.beta_star = Vector::Zero(16);
    lasso.beta_star[1] = rng.gaussian();
    lasso.beta_star[7] = rng.gaussian();
    lasso.noise = GaussianNoise{1.0, 0};
    lasso.penalty = ScaledL1{0.4, 10};
    mc.master_seed = 21;
    const ConcentrationReport r3 = concentration_check(sample_risks(lasso, mc), 1.0, xs);

    const bool pass = r1.all_pass && r2.all_pass && r3.all_pass && analytic_ok;
    return {pass, "3 instances x 5000 reps within bands; empirical tail " +
                      fmt(at1.upper_freq) + " brackets " + fmt(true_tail)};
}

Outcome criterion_10() {
    int passed = 0;
    const auto check = [&](const ProblemInstance& inst, double sigma, double lo, double hi,
                           int points, int reps, std::uint64_t seed) {
        McConfig mc;
        mc.reps = reps;
        mc.master_seed = seed;
        mc.t_grid = linear_grid(lo, hi, points);
        const FCurveEstimate fc = estimate_f_curve(inst, mc);
        const RiskSample rs = sample_risks(inst, mc);
        if (tf_proximity_check(fc, rs, sigma).all_pass) ++passed;
    };

    ProblemInstance a;  // plain least squares
    a.X = Matrix::Identity(3, 3);
    a.beta_star = Vector::Zero(3);
    a.noise = GaussianNoise{1.0, 0};
    a.penalty = ZeroPenalty{};
    check(a, 1.0, 0.2, 4.0, 20, 1200, 13);

    Rng rng(55);  // l1 penalty on a random design
    ProblemInstance b;
    b.X = Matrix(10, 16);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 16; ++j) b.X(i, j) = rng.gaussian();
    b.beta_star = Vector::Zero(16);
    b.beta_star[1] = rng.gaussian();
    b.beta_star[7] = rng.gaussian();
    b.noise = GaussianNoise{1.0, 0};
    b.penalty = ScaledL1{0.4, 10};
    check(b, 1.0, 0.2, 6.0, 16, 500, 17);

    Rng rng2(60);  // ridge
    ProblemInstance c;
    c.X = Matrix(8, 6);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 6; ++j) c.X(i, j) = rng2.gaussian() / std::sqrt(8.0);
    c.beta_star = Vector::Zero(6);
    c.beta_star[0] = 1.0;
    c.beta_star[3] = -0.5;
    c.noise = GaussianNoise{1.0, 0};
    c.penalty = SquaredL2{0.5};
    check(c, 1.0, 0.1, 4.0, 17, 800, 23);

    Rng rng3(61);  // l2-norm penalty
    ProblemInstance d;
    d.X = Matrix(6, 5);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 5; ++j) d.X(i, j) = rng3.gaussian() / std::sqrt(6.0);
    d.beta_star = Vector::Zero(5);
    d.beta_star[2] = 0.8;
    d.noise = GaussianNoise{1.0, 0};
    d.penalty = ScaledLqNorm{0.3, 1, NamedNorm::l2};
    check(d, 1.0, 0.1, 4.0, 17, 800, 29);

    ProblemInstance e;  // box indicator with beta* interior
    e.X = Matrix::Identity(4, 4);
    e.beta_star = Vector{{0.5, -0.25, 0.0, 0.0}};
    e.noise = GaussianNoise{1.0, 0};
    e.penalty = IndicatorPenalty{BoxSet{Vector::Constant(4, -1.5), Vector::Constant(4, 1.5)}};
    check(e, 1.0, 0.0, 4.0, 17, 800, 31);

    // Analytic scalar case: t_f = sqrt(2/pi), estimator sd about 0.006 at
    // 1e4 replications, so 0.02 is a 3-sigma band.
    ProblemInstance scalar;
    scalar.X = Matrix::Identity(1, 1);
    scalar.beta_star = Vector::Zero(1);
    scalar.noise = GaussianNoise{1.0, 0};
    scalar.penalty = ZeroPenalty{};
    McConfig mc;
    mc.reps = 10000;
    mc.master_seed = 7;
    mc.t_grid = linear_grid(0.0, 2.0, 21);
    const FCurveEstimate est = estimate_f_curve(scalar, mc);
    const double t_f = std::sqrt(2.0 / std::numbers::pi);
    const double analytic_gap = std::fabs(est.t_f_hat - t_f);

    const bool pass = passed == 5 && analytic_gap <= 0.02;
    return {pass, std::to_string(passed) + "/5 penalty families pass, analytic |t_f_hat"
                  " - sqrt(2/pi)| = " + fmt(analytic_gap)};
}

Outcome criterion_11() {
    const std::pair<int, int> cases[] = {{10, 1}, {25, 2}, {100, 5}, {200, 10}};
    long pairs_checked = 0;
    bool ok = true;
    std::string sizes;
    for (const auto& [p, d] : cases) {
        const VgPacking pack = vg_packing(p, d);
        const double bound = 0.5 * d * std::log(double(p) / (5.0 * d));
        ok = ok && pack.log_card >= bound - 1e-12;
        ok = ok && std::fabs(std::log(double(pack.omega.size())) - pack.log_card) <= 1e-12;
        for (const auto& w : pack.omega) {
            ok = ok && static_cast<int>(std::llround(w.sum())) == d;
            ok = ok && w.minCoeff() >= 0.0 && w.maxCoeff() <= 1.0;
        }
        for (std::size_t i = 0; i < pack.omega.size(); ++i)
            for (std::size_t j = i + 1; j < pack.omega.size(); ++j) {
                const double dist2 = (pack.omega[i] - pack.omega[j]).squaredNorm();
                ok = ok && dist2 > double(d);
                ++pairs_checked;
            }
        sizes += (sizes.empty() ? "" : "/") + std::to_string(pack.omega.size());
    }
    return {ok, "cardinalities " + sizes + ", " + std::to_string(pairs_checked) +
                    " pairs all separated"};
}

Outcome criterion_12() {
    // Orthonormal designs: delta vanishes.
    Rng rng(401);
    Matrix G(8, 5);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 5; ++j) G(i, j) = rng.gaussian();
    const Matrix Q = Eigen::HouseholderQR<Matrix>(G).householderQ() *
                     Matrix::Identity(8, 5);
    const Matrix ortho = std::sqrt(8.0) * Q;
    double worst_ortho = 0.0;
    for (int s = 1; s <= 3; ++s)
        worst_ortho = std::max(worst_ortho, rip_delta(ortho, s, 1000).delta_s);
    worst_ortho = std::max(worst_ortho, rip_delta(2.0 * Matrix::Identity(4, 4), 2, 10).delta_s);

    // Two unit columns at correlation 1/2: extreme singular values
    // sqrt(1.5), sqrt(0.5), so delta_2 = 1 - sqrt(0.5).
    Matrix two(2, 2);
    two.col(0) << 1.0, 0.0;
    two.col(1) << 0.5, std::sqrt(0.75);
    two *= std::numbers::sqrt2;
    const double rho_gap =
        std::fabs(rip_delta(two, 2, 10).delta_s - (1.0 - std::sqrt(0.5)));

    // Identity designs: compatibility and restricted-eigenvalue constants are 1.
    const int n = 12;
    const Matrix id = std::sqrt(double(n)) * Matrix::Identity(n, n);
    double worst_cone = 0.0;
    for (double c0 : {1.0, 3.0}) {
        worst_cone = std::max(
            worst_cone,
            std::fabs(compatibility_constant(id, {0, 1, 2}, c0, 4).value - 1.0));
        worst_cone = std::max(worst_cone, std::fabs(re_constant(id, 2, c0, 4).value - 1.0));
    }

    const bool pass = worst_ortho <= 1e-12 && rho_gap <= 1e-8 && worst_cone <= 1e-6;
    return {pass, "orthonormal delta <= " + fmt(worst_ortho) + ", correlated-pair gap " +
                      fmt(rho_gap) + ", identity cone constants within " + fmt(worst_cone)};
}

}  // namespace

int main() {
    struct Entry {
        const char* title;
        std::function<Outcome()> run;
    };
    std::vector<CurveRealization> family;

    const Entry entries[] = {
        {"maximizer identity: grid argmax of F equals the solver risk",
         [&] { family = run_curve_family(); return criterion_1(family); }},
        {"strong concavity: midpoint inequality for M", criterion_2},
        {"fixed-point sandwich: upper above risk, verified lowers below",
         [&] { return criterion_3(family); }},
        {"norm-dual lower bound on random l1 instances", criterion_4},
        {"least-squares exactness: bound and H equal the noise norm", criterion_5},
        {"compat-lower experiment at desk scale (identity and gaussian)", criterion_6},
        {"sandwich experiment at desk scale with premise accounting", criterion_7},
        {"small-lambda experiment at desk scale (zero and half threshold)", criterion_8},
        {"risk concentration around the median with analytic tail", criterion_9},
        {"maximizer proximity to risk median and mean across penalties", criterion_10},
        {"packing supports: pairwise distance and cardinality", criterion_11},
        {"diagnostics oracles: isometry, correlated pair, identity cones", criterion_12},
    };

    int failures = 0;
    int index = 0;
    for (const auto& entry : entries) {
        ++index;
        Outcome out;
        try {
            out = entry.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] %2d. %s — %s\n", out.pass ? "PASS" : "FAIL", index, entry.title,
                    out.detail.c_str());
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    std::printf("%d/12 criteria passed\n", 12 - failures);
    return failures == 0 ? 0 : 1;
}
