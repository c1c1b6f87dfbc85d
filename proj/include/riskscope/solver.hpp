#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "riskscope/errors.hpp"
#include "riskscope/instance.hpp"
#include "riskscope/penalty.hpp"
#include "riskscope/types.hpp"

namespace riskscope {

// Largest singular value of X by power iteration on the Gram operator.
// Deterministic start, relative tolerance 1e-10, at most 1e4 iterations.
inline double sigma_max(const Matrix& X, double tol = 1e-10, int max_iter = 10000) {
    const int p = static_cast<int>(X.cols());
    Vector v(p);
    for (int j = 0; j < p; ++j) v[j] = 1.0 + 1e-3 * static_cast<double>(j) / (p + 1.0);
    v.normalize();
    double est = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Vector w = X.transpose() * (X * v);
        const double norm_w = w.norm();
        if (norm_w == 0.0) return 0.0;
        v = w / norm_w;
        const double next = std::sqrt((X * v).squaredNorm());
        if (std::fabs(next - est) <= tol * std::max(1.0, next)) return next;
        est = next;
    }
    return est;
}

enum class SolveMethod { auto_select, closed_form, coordinate_descent, fista, projected_gradient };

inline std::string method_name(SolveMethod m) {
    switch (m) {
        case SolveMethod::auto_select: return "auto";
        case SolveMethod::closed_form: return "closed_form";
        case SolveMethod::coordinate_descent: return "coordinate_descent";
        case SolveMethod::fista: return "fista";
        case SolveMethod::projected_gradient: return "projected_gradient";
    }
    return "unknown";
}

struct SolverConfig {
    SolveMethod method = SolveMethod::auto_select;
    double tol = 1e-9;
    int max_iter = 20000;
    bool trace = false;                 // record per-iteration objective values
    std::optional<Vector> x0;           // warm start
    std::optional<double> sigma_max_hint;  // reuse a precomputed sigma_max(X)
};

struct SolveResult {
    Vector beta_hat;
    double risk = 0.0;        // ||X (beta_hat - beta_star)||
    double objective = 0.0;   // ||X beta_hat - y||^2 + 2 h(beta_hat)
    double opt_residual = 0.0;
    int iterations = 0;
    SolveMethod method = SolveMethod::auto_select;
    std::vector<double> objective_trace;
};

inline double objective_value(const ProblemInstance& inst, const Vector& y, const Vector& beta) {
    return (inst.X * beta - y).squaredNorm() + 2.0 * eval_penalty(inst.penalty, beta);
}

// Norm of the smallest subgradient of the objective at beta.  Formula is
// variant-specific: gradient norm for smooth cases, the l-infinity
// soft-threshold stationarity violation for ScaledL1, and the prox
// fixed-point (gradient mapping) residual otherwise.
inline double kkt_residual(const ProblemInstance& inst, const Vector& y, const Vector& beta,
                           std::optional<double> smax_hint = std::nullopt) {
    const Vector grad = 2.0 * (inst.X.transpose() * (inst.X * beta - y));
    if (std::holds_alternative<ZeroPenalty>(inst.penalty)) return grad.norm();
    if (const auto* sq = std::get_if<SquaredL2>(&inst.penalty))
        return (grad + 4.0 * sq->lam * beta).norm();
    if (const auto* l1 = std::get_if<ScaledL1>(&inst.penalty)) {
        const double c = 2.0 * std::sqrt(static_cast<double>(l1->n)) * l1->lam;
        double worst = 0.0;
        for (int j = 0; j < beta.size(); ++j) {
            double viol;
            if (beta[j] > 0.0) viol = std::fabs(grad[j] + c);
            else if (beta[j] < 0.0) viol = std::fabs(grad[j] - c);
            else viol = std::max(std::fabs(grad[j]) - c, 0.0);
            worst = std::max(worst, viol);
        }
        return worst;
    }
    const double smax = smax_hint ? *smax_hint : sigma_max(inst.X);
    const double step = smax > 0.0 ? 1.0 / (2.0 * smax * smax) : 1.0;
    const Vector next = prox_penalty(inst.penalty, beta - step * grad, 2.0 * step);
    return (beta - next).norm() / step;
}

namespace detail {

inline SolveResult finish(const ProblemInstance& inst, const Vector& y, Vector beta,
                          int iterations, SolveMethod method, std::vector<double> trace,
                          std::optional<double> smax_hint) {
    SolveResult res;
    res.risk = (inst.X * (beta - inst.beta_star)).norm();
    res.objective = objective_value(inst, y, beta);
    res.opt_residual = kkt_residual(inst, y, beta, smax_hint);
    res.beta_hat = std::move(beta);
    res.iterations = iterations;
    res.method = method;
    res.objective_trace = std::move(trace);
    return res;
}

inline Vector least_squares(const Matrix& X, const Vector& y) {
    // Minimum-norm minimizer of ||X b - y||; handles p > n.
    return X.completeOrthogonalDecomposition().solve(y);
}

inline SolveResult solve_closed_form(const ProblemInstance& inst, const Vector& y,
                                     const SolverConfig& cfg) {
    Vector beta;
    if (std::holds_alternative<ZeroPenalty>(inst.penalty)) {
        beta = least_squares(inst.X, y);
    } else if (const auto* sq = std::get_if<SquaredL2>(&inst.penalty)) {
        if (sq->lam == 0.0) {
            beta = least_squares(inst.X, y);
        } else {
            Matrix gram = inst.X.transpose() * inst.X;
            gram.diagonal().array() += 2.0 * sq->lam;
            beta = gram.ldlt().solve(inst.X.transpose() * y);
        }
    } else if (const auto* l1 = std::get_if<ScaledL1>(&inst.penalty); l1 && l1->lam == 0.0) {
        beta = least_squares(inst.X, y);
    } else {
        throw CapabilityError("solve: closed form is only available for Zero, SquaredL2, "
                              "and lam = 0 ScaledL1 penalties");
    }
    return finish(inst, y, std::move(beta), 1, SolveMethod::closed_form, {},
                  cfg.sigma_max_hint);
}

inline SolveResult solve_coordinate_descent(const ProblemInstance& inst, const Vector& y,
                                            const SolverConfig& cfg) {
    const auto* l1 = std::get_if<ScaledL1>(&inst.penalty);
    if (!l1)
        throw CapabilityError("solve: coordinate descent is implemented for ScaledL1 only");
    const int p = inst.p();
    const double thr = std::sqrt(static_cast<double>(l1->n)) * l1->lam;
    Vector beta = cfg.x0 ? *cfg.x0 : Vector::Zero(p);
    Vector col_sq(p);
    for (int j = 0; j < p; ++j) col_sq[j] = inst.X.col(j).squaredNorm();
    Vector resid = y - inst.X * beta;
    std::vector<double> trace;
    if (cfg.trace) trace.push_back(objective_value(inst, y, beta));
    double best_res = kInf;
    for (int sweep = 1; sweep <= cfg.max_iter; ++sweep) {
        for (int j = 0; j < p; ++j) {
            if (col_sq[j] == 0.0) {
                if (beta[j] != 0.0) {
                    beta[j] = 0.0;  // zero column: coordinate is free, pick 0
                }
                continue;
            }
            const double rho = inst.X.col(j).dot(resid) + col_sq[j] * beta[j];
            const double updated = soft_threshold(rho, thr) / col_sq[j];
            if (updated != beta[j]) {
                resid += inst.X.col(j) * (beta[j] - updated);
                beta[j] = updated;
            }
        }
        if (cfg.trace) trace.push_back(objective_value(inst, y, beta));
        // Exact stationarity violation in l-infinity, from the current residual.
        const Vector grad = -2.0 * (inst.X.transpose() * resid);
        double worst = 0.0;
        const double c = 2.0 * thr;
        for (int j = 0; j < p; ++j) {
            double viol;
            if (beta[j] > 0.0) viol = std::fabs(grad[j] + c);
            else if (beta[j] < 0.0) viol = std::fabs(grad[j] - c);
            else viol = std::max(std::fabs(grad[j]) - c, 0.0);
            worst = std::max(worst, viol);
        }
        best_res = std::min(best_res, worst);
        if (worst <= cfg.tol)
            return finish(inst, y, std::move(beta), sweep, SolveMethod::coordinate_descent,
                          std::move(trace), cfg.sigma_max_hint);
    }
    throw ConvergenceError("solve: coordinate descent exhausted max_iter", best_res);
}

inline SolveResult solve_proximal(const ProblemInstance& inst, const Vector& y,
                                  const SolverConfig& cfg, bool accelerated) {
    const int p = inst.p();
    const double smax = cfg.sigma_max_hint ? *cfg.sigma_max_hint : sigma_max(inst.X);
    const double step = smax > 0.0 ? 1.0 / (2.0 * smax * smax) : 1.0;
    Vector x = cfg.x0 ? *cfg.x0 : prox_penalty(inst.penalty, Vector::Zero(p), step);
    Vector momentum = x;
    double t_k = 1.0;
    std::vector<double> trace;
    if (cfg.trace) trace.push_back(objective_value(inst, y, x));
    double prev_obj = kInf;
    double best_res = kInf;
    const SolveMethod tag =
        accelerated ? SolveMethod::fista : SolveMethod::projected_gradient;
    for (int it = 1; it <= cfg.max_iter; ++it) {
        const Vector& point = accelerated ? momentum : x;
        const Vector grad = 2.0 * (inst.X.transpose() * (inst.X * point - y));
        Vector x_next = prox_penalty(inst.penalty, point - step * grad, 2.0 * step);
        if (accelerated) {
            // Adaptive restart keeps the momentum sequence well behaved.
            const double obj = objective_value(inst, y, x_next);
            if (obj > prev_obj) {
                t_k = 1.0;
                momentum = x;
                prev_obj = kInf;
                continue;
            }
            prev_obj = obj;
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_k * t_k));
            momentum = x_next + ((t_k - 1.0) / t_next) * (x_next - x);
            t_k = t_next;
        }
        const double move = (x_next - x).norm() / step;
        x = std::move(x_next);
        if (cfg.trace) trace.push_back(objective_value(inst, y, x));
        if (move <= 0.5 * cfg.tol || it % 10 == 0 || it == cfg.max_iter) {
            const double res = kkt_residual(inst, y, x, smax);
            best_res = std::min(best_res, res);
            if (res <= cfg.tol)
                return finish(inst, y, std::move(x), it, tag, std::move(trace), smax);
        }
    }
    throw ConvergenceError("solve: proximal iteration exhausted max_iter", best_res);
}

}  // namespace detail

// argmin_b ||X b - y||^2 + 2 h(b).  Method auto_select routes Zero/SquaredL2
// (and lam = 0 ScaledL1) to the closed form, ScaledL1 to cyclic coordinate
// descent, Indicator to projected gradient with step 1/(2 sigma_max(X)^2),
// and everything else to FISTA on the same step.
inline SolveResult solve(const ProblemInstance& inst, const Vector& y,
                         const SolverConfig& cfg = {}) {
    validate_instance(inst);
    if (y.size() != inst.n()) throw ArgumentError("solve: y length does not match X rows");
    if (!(cfg.tol > 0.0)) throw ArgumentError("solve: tol must be positive");
    if (cfg.max_iter < 1) throw ArgumentError("solve: max_iter must be positive");
    if (cfg.x0 && cfg.x0->size() != inst.p())
        throw ArgumentError("solve: warm start length does not match p");
    SolveMethod method = cfg.method;
    if (method == SolveMethod::auto_select) {
        if (std::holds_alternative<ZeroPenalty>(inst.penalty) ||
            std::holds_alternative<SquaredL2>(inst.penalty)) {
            method = SolveMethod::closed_form;
        } else if (const auto* l1 = std::get_if<ScaledL1>(&inst.penalty)) {
            method = l1->lam == 0.0 ? SolveMethod::closed_form : SolveMethod::coordinate_descent;
        } else if (std::holds_alternative<IndicatorPenalty>(inst.penalty)) {
            method = SolveMethod::projected_gradient;
        } else {
            method = SolveMethod::fista;
        }
    }
    switch (method) {
        case SolveMethod::closed_form: return detail::solve_closed_form(inst, y, cfg);
        case SolveMethod::coordinate_descent:
            return detail::solve_coordinate_descent(inst, y, cfg);
        case SolveMethod::fista: return detail::solve_proximal(inst, y, cfg, true);
        case SolveMethod::projected_gradient:
            return detail::solve_proximal(inst, y, cfg, false);
        case SolveMethod::auto_select: break;
    }
    throw NumericError("solve: unreachable method dispatch");
}

}  // namespace riskscope
