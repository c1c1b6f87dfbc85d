#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "riskscope/errors.hpp"
#include "riskscope/solver.hpp"

namespace riskscope {

// Variational objects attached to one noise realization eps:
//   M(t) = sup { eps' X (b - beta*) - h(b) : ||X (b - beta*)|| <= t }
//   F(t) = M(t) - t^2 / 2
//   H(t) = (M(t) + h(beta*)) / t          (t > 0, h(beta*) finite)
//   G(t) = M(t) - t * risk
// An empty constraint set (t below the critical radius) gives M = -inf.

struct CurveConfig {
    double rad_tol = 1e-6;   // |r(mu) - t| <= rad_tol * max(1, t) at termination
    double mu_floor = 1e-12; // below this mu the constraint is declared inactive
    double mu_cap = 1e12;    // forces the radius toward its infimum (t ~ 0 cases)
    SolverConfig solver{};
};

struct CurveEval {
    double t = 0.0;
    double value = -kInf;
    bool active = false;   // whether the radius constraint binds at the optimum
    double dual_mu = 0.0;  // Lagrange multiplier scale; 0 when inactive
    std::optional<Vector> attaining_beta;
};

struct CriticalRadius {
    double t_c = 0.0;
    Vector beta0;
};

// t_c = inf { ||X (b - beta*)|| : h(b) < inf } with a point attaining it.
// Finite-everywhere penalties give 0 at beta*; indicator domains are handled
// by minimizing the smooth radius objective over the set.
inline CriticalRadius critical_radius(const ProblemInstance& inst,
                                      const SolverConfig& solver_cfg = {}) {
    validate_instance(inst);
    const auto domain = penalty_domain(inst.penalty);
    if (!domain) return {0.0, inst.beta_star};
    ProblemInstance sub{inst.X, inst.beta_star, FixedNoise{Vector::Zero(inst.n())},
                        IndicatorPenalty{*domain}};
    SolverConfig cfg = solver_cfg;
    cfg.method = SolveMethod::fista;
    SolveResult res = solve(sub, inst.X * inst.beta_star, cfg);
    return {res.risk, std::move(res.beta_hat)};
}

// Evaluates the curves by bisection on the dual scale mu: the inner problem
//   argmin ||X b - (X beta* + eps/mu)||^2 + (2/mu) h(b)
// has radius r(mu) = ||X (b - beta*)|| non-increasing in mu.  mu is bisected
// until the feasible-side radius lies within rad_tol of t; the reported value
// is the Lagrangian value psi + (mu/2)(t^2 - r^2), which is second-order
// accurate in the radius residual.  Evaluations share warm starts, so grid
// sweeps are much cheaper than isolated calls.
class CurveEvaluator {
public:
    CurveEvaluator(ProblemInstance inst, Vector eps, CurveConfig cfg = {})
        : inst_(std::move(inst)), eps_(std::move(eps)), cfg_(cfg) {
        validate_instance(inst_);
        if (eps_.size() != inst_.n())
            throw ArgumentError("CurveEvaluator: eps length does not match X rows");
        if (!(cfg_.rad_tol > 0.0))
            throw ArgumentError("CurveEvaluator: rad_tol must be positive");
        smax_ = sigma_max(inst_.X);
        x_star_ = inst_.X * inst_.beta_star;
        xt_eps_ = inst_.X.transpose() * eps_;
        h_star_ = eval_penalty(inst_.penalty, inst_.beta_star);
        if (penalty_domain(inst_.penalty)) {
            auto cr = critical_radius(inst_, cfg_.solver);
            t_c_ = cr.t_c;
        }
        inner_ = inst_;
    }

    const ProblemInstance& instance() const { return inst_; }
    const Vector& eps() const { return eps_; }
    double h_beta_star() const { return h_star_; }
    double t_critical() const { return t_c_; }

    CurveEval eval_M(double t) {
        if (!(t >= 0.0)) throw ArgumentError("eval_M: t must be nonnegative");
        const double band = cfg_.rad_tol * std::max(1.0, t);
        if (t_c_ > 0.0 && t < t_c_ - band) return CurveEval{t, -kInf, false, 0.0, {}};

        double mu = warm_mu_ > 0.0 ? warm_mu_ : 1.0;
        Probe pr = probe(mu);
        double mu_lo = 0.0, mu_hi = 0.0;
        Probe pr_hi;
        if (pr.r > t) {
            mu_lo = mu;
            double m = std::max(mu, 1.0);
            for (;;) {
                m *= 2.0;
                Probe cand = probe(m);
                if (cand.r <= t) {
                    mu_hi = m;
                    pr_hi = std::move(cand);
                    break;
                }
                mu_lo = m;
                if (m > cfg_.mu_cap) {
                    // The radius stalls above t at the mu cap.  Within the
                    // band this is the boundary case (t ~ 0 or t ~ t_c); the
                    // primal value at the near-feasible point is reported,
                    // since the Lagrangian correction degenerates with mu
                    // this large.  Far outside the band the target radius is
                    // infeasible (only indicator domains can cause this).
                    if (cand.r > t + 10.0 * band)
                        return CurveEval{t, -kInf, false, 0.0, {}};
                    return CurveEval{t, cand.psi, true, m, std::move(cand.beta)};
                }
            }
        } else {
            mu_hi = mu;
            pr_hi = pr;
            double m = std::min(mu, 1.0);
            double last_r = pr.r, last_psi = pr.psi;
            bool bracketed = false;
            while (m > cfg_.mu_floor) {
                m *= 0.5;
                Probe cand = probe(m);
                if (cand.r >= t) {
                    mu_lo = m;
                    bracketed = true;
                    break;
                }
                mu_hi = m;
                pr_hi = std::move(cand);
                // The radius and value have both stopped moving: the
                // unconstrained supremum sits strictly inside the ball.
                const bool r_stable =
                    std::fabs(pr_hi.r - last_r) <= 1e-9 * std::max(1.0, t);
                const bool psi_stable =
                    std::fabs(pr_hi.psi - last_psi) <= 1e-10 * (1.0 + std::fabs(pr_hi.psi));
                last_r = pr_hi.r;
                last_psi = pr_hi.psi;
                if (r_stable && psi_stable) break;
            }
            if (!bracketed) {
                warm_mu_ = std::max(mu_hi, cfg_.mu_floor);
                return CurveEval{t, pr_hi.psi, false, 0.0, std::move(pr_hi.beta)};
            }
        }

        // Bisect in log(mu) until the feasible side reaches the band; the
        // returned iterate always satisfies r <= t.
        for (int it = 0; it < 200 && t - pr_hi.r > band; ++it) {
            const double mid = std::sqrt(mu_lo * mu_hi);
            if (!(mid > mu_lo && mid < mu_hi)) break;
            Probe cand = probe(mid);
            if (cand.r >= t) {
                mu_lo = mid;
            } else {
                mu_hi = mid;
                pr_hi = std::move(cand);
            }
        }
        if (t - pr_hi.r > 100.0 * band)
            throw NumericError("eval_M: dual bisection failed to approach the target radius");
        warm_mu_ = mu_hi;
        return CurveEval{t, lagrangian(pr_hi, t, mu_hi), true, mu_hi, std::move(pr_hi.beta)};
    }

    CurveEval eval_F(double t) {
        CurveEval ev = eval_M(t);
        if (std::isfinite(ev.value)) ev.value -= 0.5 * t * t;
        return ev;
    }

    CurveEval eval_H(double t) {
        if (!(t > 0.0)) throw ArgumentError("eval_H: t must be positive");
        if (!std::isfinite(h_star_))
            throw CapabilityError("eval_H: h(beta_star) is infinite for this instance");
        CurveEval ev = eval_M(t);
        if (std::isfinite(ev.value)) ev.value = (ev.value + h_star_) / t;
        return ev;
    }

    CurveEval eval_G(double t, double risk) {
        if (!(risk >= 0.0)) throw ArgumentError("eval_G: risk must be nonnegative");
        CurveEval ev = eval_M(t);
        if (std::isfinite(ev.value)) ev.value -= t * risk;
        return ev;
    }

private:
    struct Probe {
        double r = 0.0;
        double psi = 0.0;  // eps' X (b - beta*) - h(b) at the inner solution
        Vector beta;
    };

    Probe probe(double mu) {
        inner_.penalty = scale_penalty(inst_.penalty, 1.0 / mu);
        const Vector y = x_star_ + eps_ / mu;
        SolverConfig cfg = cfg_.solver;
        cfg.sigma_max_hint = smax_;
        if (warm_beta_.size() == inst_.p()) cfg.x0 = warm_beta_;
        SolveResult res = solve(inner_, y, cfg);
        Probe pr;
        pr.r = res.risk;
        pr.psi = xt_eps_.dot(res.beta_hat - inst_.beta_star) -
                 eval_penalty(inst_.penalty, res.beta_hat);
        pr.beta = std::move(res.beta_hat);
        warm_beta_ = pr.beta;
        return pr;
    }

    static double lagrangian(const Probe& pr, double t, double mu) {
        return pr.psi + 0.5 * mu * (t * t - pr.r * pr.r);
    }

    ProblemInstance inst_;
    ProblemInstance inner_;
    Vector eps_;
    Vector x_star_;
    Vector xt_eps_;
    CurveConfig cfg_;
    double smax_ = 0.0;
    double h_star_ = 0.0;
    double t_c_ = 0.0;
    double warm_mu_ = 0.0;
    Vector warm_beta_;
};

// One-shot wrappers; grid work should construct a CurveEvaluator directly.
inline CurveEval eval_M(const ProblemInstance& inst, const Vector& eps, double t,
                        const CurveConfig& cfg = {}) {
    return CurveEvaluator(inst, eps, cfg).eval_M(t);
}

inline CurveEval eval_F(const ProblemInstance& inst, const Vector& eps, double t,
                        const CurveConfig& cfg = {}) {
    return CurveEvaluator(inst, eps, cfg).eval_F(t);
}

inline CurveEval eval_H(const ProblemInstance& inst, const Vector& eps, double t,
                        const CurveConfig& cfg = {}) {
    return CurveEvaluator(inst, eps, cfg).eval_H(t);
}

inline CurveEval eval_G(const ProblemInstance& inst, const Vector& eps, double t, double risk,
                        const CurveConfig& cfg = {}) {
    return CurveEvaluator(inst, eps, cfg).eval_G(t, risk);
}

}  // namespace riskscope
