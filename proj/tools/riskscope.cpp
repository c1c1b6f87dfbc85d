// riskscope — command-line front end for the risk-curve library.
//
// Subcommands: solve, curve, certify, diagnose, mc, experiment.
// Exit codes: 0 success; 1 at least one experiment verdict FAIL;
// 2 bad input (arguments, schema, parse, config); 3 unsupported capability;
// 4 numeric/convergence failure; 5 unexpected error.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "riskscope/experiments.hpp"

namespace rs = riskscope;

namespace {

std::vector<double> parse_grid_spec(const std::string& spec) {
    double lo = 0.0, hi = 0.0;
    int points = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(spec);
    in >> lo >> c1 >> hi >> c2 >> points;
    if (!in || c1 != ':' || c2 != ':' || !in.eof())
        throw rs::ArgumentError("--grid expects t0:t1:points, got '" + spec + "'");
    if (points < 2) throw rs::ArgumentError("--grid needs at least 2 points");
    return rs::linear_grid(lo, hi, points);
}

void print_json(const rs::Json& j) { std::cout << j.dump(2) << "\n"; }

// --------------------------------------------------------- solve ----------
struct SolveArgs {
    std::string instance, y;
    double tol = 1e-9;
    int max_iter = 20000;
    std::string method = "auto";
};

int run_solve(const SolveArgs& a) {
    const rs::ProblemInstance inst = rs::load_instance(a.instance);
    const rs::Vector y = rs::read_csv_vector(a.y);
    rs::SolverConfig cfg;
    cfg.tol = a.tol;
    cfg.max_iter = a.max_iter;
    if (a.method == "auto") cfg.method = rs::SolveMethod::auto_select;
    else if (a.method == "closed_form") cfg.method = rs::SolveMethod::closed_form;
    else if (a.method == "coordinate_descent") cfg.method = rs::SolveMethod::coordinate_descent;
    else if (a.method == "fista") cfg.method = rs::SolveMethod::fista;
    else cfg.method = rs::SolveMethod::projected_gradient;
    print_json(rs::solve_result_to_json(rs::solve(inst, y, cfg)));
    return 0;
}

// --------------------------------------------------------- curve ----------
struct CurveArgs {
    std::string which, grid, instance, eps;
    double rad_tol = 1e-6;
};

int run_curve(const CurveArgs& a) {
    const rs::ProblemInstance inst = rs::load_instance(a.instance);
    const rs::Vector eps = rs::read_csv_vector(a.eps);
    rs::CurveConfig cfg;
    cfg.rad_tol = a.rad_tol;
    // G compares against the solver risk on the same realization.
    double risk = 0.0;
    if (a.which == "G") risk = rs::solve(inst, rs::response(inst, eps), cfg.solver).risk;
    rs::CurveEvaluator ev(inst, eps, cfg);
    std::cout << "t,value,active,dual_mu\n";
    for (double t : parse_grid_spec(a.grid)) {
        if (a.which == "H" && t <= 0.0) continue;  // H is defined for t > 0 only
        rs::CurveEval e;
        if (a.which == "F") e = ev.eval_F(t);
        else if (a.which == "G") e = ev.eval_G(t, risk);
        else if (a.which == "H") e = ev.eval_H(t);
        else e = ev.eval_M(t);
        std::cout << rs::format_double(e.t) << ',' << rs::format_double(e.value) << ','
                  << (e.active ? 1 : 0) << ',' << rs::format_double(e.dual_mu) << "\n";
    }
    return 0;
}

// --------------------------------------------------------- certify --------
struct CertifyArgs {
    std::string kind, instance, eps;
    double rel_tol = 1e-6;
    double t_max = 1e4;
    int doublings = 8;
    double t0 = 0.0, gamma = 0.0;
    double r = 0.0, alpha = 0.0;
};

int run_certify(const CertifyArgs& a) {
    const rs::ProblemInstance inst = rs::load_instance(a.instance);
    const rs::Vector eps = rs::read_csv_vector(a.eps);
    rs::Certificate cert;
    if (a.kind == "norm-dual") {
        cert = rs::norm_dual_lower(inst, eps);
    } else {
        rs::CurveEvaluator ev(inst, eps);
        if (a.kind == "fixed-point") {
            cert = rs::fixed_point_upper(ev, a.rel_tol);
        } else if (a.kind == "limit") {
            cert = rs::limit_lower(ev, a.t_max, a.doublings);
        } else if (a.kind == "t0gamma") {
            if (!(a.t0 > 0.0) || !(a.gamma > 0.0))
                throw rs::ArgumentError("certify t0gamma: --t0 and --gamma must be positive");
            const rs::SolveResult sol = rs::solve(inst, rs::response(inst, eps));
            cert = rs::t0_gamma_lower(ev, sol, a.t0, a.gamma);
        } else {  // almost-fp
            if (!(a.r > 0.0) || !(a.alpha > 0.0 && a.alpha < 1.0))
                throw rs::ArgumentError(
                    "certify almost-fp: --r must be positive and --alpha in (0,1)");
            cert = rs::almost_fixed_point_lower(ev, a.r, a.alpha);
        }
    }
    print_json(rs::certificate_to_json(cert));
    return 0;
}

// --------------------------------------------------------- diagnose -------
struct DiagnoseArgs {
    std::string what, design;
    int s = 0, d = 0, p = 0;
    std::int64_t budget = 20000;
    std::vector<int> support;
    double c0 = 1.0;
    int restarts = 8;
    std::uint64_t seed = rs::kDiagnosticsSeed;
    double gamma = 0.0, sigma = 0.0, lambda = -1.0;
    double kappa = -1.0, delta = -1.0;
};

int run_diagnose(const DiagnoseArgs& a) {
    const auto need_design = [&]() -> rs::Matrix {
        if (a.design.empty())
            throw rs::ArgumentError("diagnose " + a.what + ": --design is required");
        return rs::read_csv_matrix(a.design);
    };
    if (a.what == "rip") {
        if (a.s <= 0) throw rs::ArgumentError("diagnose rip: --s must be positive");
        print_json(rs::rip_report_to_json(rs::rip_delta(need_design(), a.s, a.budget)));
    } else if (a.what == "compat") {
        if (a.support.empty())
            throw rs::ArgumentError("diagnose compat: --support is required");
        print_json(rs::cone_report_to_json(
            rs::compatibility_constant(need_design(), a.support, a.c0, a.restarts)));
    } else if (a.what == "re") {
        if (a.s <= 0) throw rs::ArgumentError("diagnose re: --s must be positive");
        print_json(rs::cone_report_to_json(
            rs::re_constant(need_design(), a.s, a.c0, a.restarts)));
    } else if (a.what == "vg") {
        if (a.p <= 0 || a.d <= 0)
            throw rs::ArgumentError("diagnose vg: --p and --d must be positive");
        print_json(rs::vg_packing_to_json(rs::vg_packing(a.p, a.d, a.seed)));
    } else {  // constants
        if (a.s <= 0 || !(a.gamma > 0.0) || !(a.sigma > 0.0) || !(a.lambda >= 0.0))
            throw rs::ArgumentError(
                "diagnose constants: --s, --gamma, --sigma must be positive and "
                "--lambda nonnegative");
        const rs::Matrix X = need_design();
        const double c0 = (1.0 + a.gamma + std::sqrt(3.0)) / a.gamma;
        double delta = a.delta;
        if (delta < 0.0) delta = rs::rip_delta(X, a.s, a.budget).delta_s;
        double kappa = a.kappa;
        bool floored = false;
        if (kappa < 0.0) {
            kappa = rs::re_constant(X, a.s, c0, a.restarts).value;
            if (kappa < 1e-12) { kappa = 1e-12; floored = true; }
        }
        rs::Json out;
        out["inputs"] = {{"s", a.s},         {"gamma", a.gamma}, {"sigma", a.sigma},
                         {"lambda", a.lambda}, {"kappa", kappa},   {"delta", delta},
                         {"kappa_estimate_floored", floored}};
        out["constants"] = rs::lasso_constants_to_json(
            rs::lasso_constants(X, a.s, a.gamma, a.sigma, a.lambda, kappa, delta));
        print_json(out);
    }
    return 0;
}

// --------------------------------------------------------- mc -------------
struct McArgs {
    std::string instance, grid, curve_csv;
    int reps = 2000;
    std::uint64_t seed = 1;
    double confidence = 0.99;
    std::vector<double> xs;
    double sigma = -1.0;
    bool no_risks = false;
};

int run_mc(const McArgs& a) {
    const rs::ProblemInstance inst = rs::load_instance(a.instance);
    rs::McConfig mc;
    mc.reps = a.reps;
    mc.master_seed = a.seed;
    mc.confidence = a.confidence;
    mc.t_grid = parse_grid_spec(a.grid);

    double sigma = a.sigma;
    if (sigma < 0.0) {
        const auto* g = std::get_if<rs::GaussianNoise>(&inst.noise);
        if (!g)
            throw rs::ArgumentError(
                "mc: --sigma is required when the instance noise is not Gaussian");
        sigma = g->sigma;
    }
    const std::vector<double> xs = a.xs.empty() ? std::vector<double>{0.5, 1.0, 2.0} : a.xs;

    const rs::FCurveEstimate fcurve = rs::estimate_f_curve(inst, mc);
    const rs::RiskSample sample = rs::sample_risks(inst, mc);
    const rs::ConcentrationReport conc =
        rs::concentration_check(sample, sigma, xs, a.confidence);
    const rs::ProximityReport prox =
        rs::tf_proximity_check(fcurve, sample, sigma, a.confidence);

    rs::Json out;
    out["f_curve"] = rs::fcurve_to_json(fcurve);
    out["risk_sample"] = rs::risk_sample_to_json(sample, !a.no_risks);
    out["concentration"] = rs::concentration_to_json(conc);
    out["proximity"] = rs::proximity_to_json(prox);
    print_json(out);
    if (!a.curve_csv.empty()) rs::write_text_file(a.curve_csv, rs::fcurve_to_csv(fcurve));
    return 0;
}

// --------------------------------------------------------- experiment -----
struct ExperimentArgs {
    std::string config, out;
};

int run_experiment(const ExperimentArgs& a) {
    const rs::RunAllResult result = rs::run_all_from_file(a.config, a.out);
    std::cout << result.summary_csv;
    std::cerr << "wrote " << result.report_paths.size() << " report(s) to " << a.out << "\n";
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"riskscope — prediction-error curves, certified bounds, "
                 "design diagnostics, and Monte-Carlo experiments for convex "
                 "regularized least squares"};
    app.require_subcommand(1);

    SolveArgs sa;
    auto* solve = app.add_subcommand("solve", "Solve one penalized least-squares instance");
    solve->add_option("--instance", sa.instance, "Instance JSON")->required()
        ->check(CLI::ExistingFile);
    solve->add_option("--y", sa.y, "Response vector CSV")->required()
        ->check(CLI::ExistingFile);
    solve->add_option("--tol", sa.tol, "Stationarity tolerance");
    solve->add_option("--max-iter", sa.max_iter, "Iteration cap");
    solve->add_option("--method", sa.method, "Solver method")
        ->check(CLI::IsMember({"auto", "closed_form", "coordinate_descent", "fista",
                               "projected_gradient"}));

    CurveArgs ca;
    auto* curve = app.add_subcommand("curve", "Evaluate a variational curve on a grid "
                                              "(CSV t,value,active,dual_mu on stdout)");
    curve->add_option("--which", ca.which, "Curve: F, G, H, or M")->required()
        ->check(CLI::IsMember({"F", "G", "H", "M"}));
    curve->add_option("--grid", ca.grid, "t0:t1:points (H skips t=0)")->required();
    curve->add_option("--instance", ca.instance, "Instance JSON")->required()
        ->check(CLI::ExistingFile);
    curve->add_option("--eps", ca.eps, "Noise realization CSV")->required()
        ->check(CLI::ExistingFile);
    curve->add_option("--rad-tol", ca.rad_tol, "Radius bisection tolerance");

    CertifyArgs ta;
    auto* certify = app.add_subcommand("certify", "Emit a bound certificate (JSON)");
    certify->add_option("--kind", ta.kind,
                        "fixed-point | limit | t0gamma | almost-fp | norm-dual")
        ->required()
        ->check(CLI::IsMember({"fixed-point", "limit", "t0gamma", "almost-fp",
                               "norm-dual"}));
    certify->add_option("--instance", ta.instance, "Instance JSON")->required()
        ->check(CLI::ExistingFile);
    certify->add_option("--eps", ta.eps, "Noise realization CSV")->required()
        ->check(CLI::ExistingFile);
    certify->add_option("--rel-tol", ta.rel_tol, "fixed-point: bisection tolerance");
    certify->add_option("--t-max", ta.t_max, "limit: starting probe");
    certify->add_option("--doublings", ta.doublings, "limit: doubling steps");
    certify->add_option("--t0", ta.t0, "t0gamma: evaluation point");
    certify->add_option("--gamma", ta.gamma, "t0gamma: slack");
    certify->add_option("--r", ta.r, "almost-fp: candidate radius");
    certify->add_option("--alpha", ta.alpha, "almost-fp: contraction in (0,1)");

    DiagnoseArgs da;
    auto* diagnose = app.add_subcommand("diagnose", "Design diagnostics (JSON)");
    diagnose->add_option("--what", da.what, "rip | compat | re | vg | constants")
        ->required()
        ->check(CLI::IsMember({"rip", "compat", "re", "vg", "constants"}));
    diagnose->add_option("--design", da.design, "Design matrix CSV")
        ->check(CLI::ExistingFile);
    diagnose->add_option("--s", da.s, "Sparsity (rip, re, constants)");
    diagnose->add_option("--budget", da.budget, "Support budget (rip, constants)");
    diagnose->add_option("--support", da.support, "compat: support indices")
        ->delimiter(',');
    diagnose->add_option("--c0", da.c0, "Cone constant (compat, re)");
    diagnose->add_option("--restarts", da.restarts, "Search restarts");
    diagnose->add_option("--p", da.p, "vg: ambient dimension");
    diagnose->add_option("--d", da.d, "vg: sparsity");
    diagnose->add_option("--seed", da.seed, "vg: packing seed");
    diagnose->add_option("--gamma", da.gamma, "constants: tuning parameter");
    diagnose->add_option("--sigma", da.sigma, "constants: noise level");
    diagnose->add_option("--lambda", da.lambda, "constants: penalty level");
    diagnose->add_option("--kappa", da.kappa, "constants: override the RE estimate");
    diagnose->add_option("--delta", da.delta, "constants: override the isometry estimate");

    McArgs ma;
    auto* mc = app.add_subcommand("mc", "Monte-Carlo f-curve, risk sample, "
                                        "concentration and proximity checks (JSON)");
    mc->add_option("--instance", ma.instance, "Instance JSON")->required()
        ->check(CLI::ExistingFile);
    mc->add_option("--reps", ma.reps, "Replications")->check(CLI::PositiveNumber);
    mc->add_option("--seed", ma.seed, "Master seed");
    mc->add_option("--grid", ma.grid, "t0:t1:points for the f-curve")->required();
    mc->add_option("--confidence", ma.confidence, "Band confidence");
    mc->add_option("--x", ma.xs, "Concentration offsets (default 0.5,1,2)")
        ->delimiter(',');
    mc->add_option("--sigma", ma.sigma,
                   "Noise scale override (required for non-Gaussian noise)");
    mc->add_option("--curve-csv", ma.curve_csv, "Also write the f-curve as CSV here");
    mc->add_flag("--no-risks", ma.no_risks, "Omit per-replication risks from the JSON");

    ExperimentArgs ea;
    auto* experiment = app.add_subcommand(
        "experiment", "Run an experiment bundle; summary CSV on stdout; exit 1 on FAIL");
    experiment->add_option("--config", ea.config, "Bundle JSON")->required()
        ->check(CLI::ExistingFile);
    experiment->add_option("--out", ea.out, "Report directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*solve) return run_solve(sa);
        if (*curve) return run_curve(ca);
        if (*certify) return run_certify(ta);
        if (*diagnose) return run_diagnose(da);
        if (*mc) return run_mc(ma);
        return run_experiment(ea);
    } catch (const rs::CapabilityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const rs::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const rs::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const rs::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 5;
    }
}
