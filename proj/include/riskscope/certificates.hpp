#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "riskscope/curves.hpp"

namespace riskscope {

enum class CertificateKind {
    fixed_point_upper,
    limit_lower,
    t0_gamma_lower,
    almost_fixed_point_lower,
    norm_dual_lower,
    tf_upper,
};

inline std::string certificate_kind_name(CertificateKind k) {
    switch (k) {
        case CertificateKind::fixed_point_upper: return "fixed_point_upper";
        case CertificateKind::limit_lower: return "limit_lower";
        case CertificateKind::t0_gamma_lower: return "t0_gamma_lower";
        case CertificateKind::almost_fixed_point_lower: return "almost_fixed_point_lower";
        case CertificateKind::norm_dual_lower: return "norm_dual_lower";
        case CertificateKind::tf_upper: return "tf_upper";
    }
    return "unknown";
}

enum class CertVerdict { Verified, NotApplicable };

// One checked inequality lhs <op> rhs; satisfied with 1e-9 scaled slack.
struct Premise {
    std::string name;
    std::string op;  // "<=" or ">="
    double lhs = 0.0;
    double rhs = 0.0;
    bool satisfied = false;
    double margin = 0.0;  // slack in the favorable direction
};

inline Premise make_premise(std::string name, std::string op, double lhs, double rhs) {
    Premise pr;
    pr.name = std::move(name);
    pr.op = std::move(op);
    pr.lhs = lhs;
    pr.rhs = rhs;
    const double tol = 1e-9 * (1.0 + std::max(std::fabs(lhs), std::fabs(rhs)));
    if (pr.op == "<=") {
        pr.margin = rhs - lhs;
        pr.satisfied = lhs <= rhs + tol;
    } else {
        pr.margin = lhs - rhs;
        pr.satisfied = lhs >= rhs - tol;
    }
    return pr;
}

struct Certificate {
    CertificateKind kind = CertificateKind::fixed_point_upper;
    std::string direction;  // "upper" or "lower"
    double bound = 0.0;
    CertVerdict verdict = CertVerdict::NotApplicable;
    double slack = 0.0;
    std::vector<Premise> premises;
    std::vector<std::pair<std::string, double>> flags;

    bool verified() const { return verdict == CertVerdict::Verified; }
};

// --------------------------------------------------------------------------
// Upper bound: risk <= inf { r > 0 : H(r) <= r }.
// Exponential search brackets a sign change of H(r) - r, bisection shrinks it
// to relative width 1e-6, and a secant polish sharpens the root; the reported
// bound sits on the feasible side (H(bound) <= bound), so the guarantee
// risk <= bound + tol holds by the fixed-point theorem.
// --------------------------------------------------------------------------
inline Certificate fixed_point_upper(CurveEvaluator& ev, double rel_tol = 1e-6) {
    Certificate cert;
    cert.kind = CertificateKind::fixed_point_upper;
    cert.direction = "upper";
    const double scale = std::max(1.0, ev.eps().norm() + ev.h_beta_star());
    const double floor_r = 1e-12 * scale;

    const auto H = [&ev](double r) { return ev.eval_H(r).value; };

    double r_hi = scale;
    double phi_hi = H(r_hi) - r_hi;
    int guard = 0;
    while (phi_hi > 0.0 && guard++ < 200) {
        r_hi *= 2.0;
        phi_hi = H(r_hi) - r_hi;
    }
    if (phi_hi > 0.0) throw NumericError("fixed_point_upper: no feasible radius found");

    // Exponential descent from r_hi toward the infeasible side.  Reaching the
    // floor without a sign change means the fixed point sits below numerical
    // resolution; the smallest verified radius is reported, flagged.
    double r_lo = 0.0;
    double phi_lo = 0.0;
    bool bracketed = false;
    for (double r = r_hi / 2.0; r > floor_r; r /= 2.0) {
        const double phi = H(r) - r;
        if (phi > 0.0) {
            r_lo = r;
            phi_lo = phi;
            bracketed = true;
            break;
        }
        r_hi = r;
        phi_hi = phi;
    }
    if (!bracketed) {
        cert.bound = r_hi;
        cert.verdict = CertVerdict::Verified;
        cert.premises.push_back(make_premise("H(bound) <= bound", "<=", r_hi + phi_hi, r_hi));
        cert.slack = -phi_hi;
        cert.flags.emplace_back("numerical_floor", 1.0);
        return cert;
    }

    while (r_hi - r_lo > rel_tol * r_hi) {
        const double mid = 0.5 * (r_lo + r_hi);
        const double phi = H(mid) - mid;
        if (phi > 0.0) {
            r_lo = mid;
            phi_lo = phi;
        } else {
            r_hi = mid;
            phi_hi = phi;
        }
    }
    for (int it = 0; it < 12 && r_hi - r_lo > 1e-15 * r_hi; ++it) {
        const double denom = phi_hi - phi_lo;
        if (denom == 0.0) break;
        double cand = r_hi - phi_hi * (r_hi - r_lo) / denom;
        if (!(cand > r_lo && cand < r_hi)) cand = 0.5 * (r_lo + r_hi);
        const double phi = H(cand) - cand;
        if (std::fabs(phi) <= 1e-13 * scale && phi <= 0.0) {
            r_hi = cand;
            phi_hi = phi;
            break;
        }
        if (phi > 0.0) {
            r_lo = cand;
            phi_lo = phi;
        } else {
            r_hi = cand;
            phi_hi = phi;
        }
    }

    cert.bound = r_hi;
    cert.verdict = CertVerdict::Verified;
    cert.premises.push_back(make_premise("H(bound) <= bound", "<=", r_hi + phi_hi, r_hi));
    cert.slack = -phi_hi;
    return cert;
}

// --------------------------------------------------------------------------
// Heuristic limit lower bound: lim_{t->inf} H(t) = inf_t H(t) <= risk.  The
// limit is approximated by H on a doubling sequence t_max * 2^k; Verified
// only when the tail has stabilized, and always flagged as heuristic since a
// stalled-but-unconverged sequence is indistinguishable from a limit.
// --------------------------------------------------------------------------
inline Certificate limit_lower(CurveEvaluator& ev, double t_max, int doublings = 8,
                               double stab_tol = 1e-6) {
    if (!(t_max > 0.0)) throw ArgumentError("limit_lower: t_max must be positive");
    if (doublings < 1) throw ArgumentError("limit_lower: doublings must be >= 1");
    Certificate cert;
    cert.kind = CertificateKind::limit_lower;
    cert.direction = "lower";
    double t = t_max;
    double prev = ev.eval_H(t).value;
    double last = prev;
    for (int k = 0; k < doublings; ++k) {
        t *= 2.0;
        prev = last;
        last = ev.eval_H(t).value;
    }
    const double gap = std::fabs(last - prev);
    const double tol = stab_tol * std::max(1.0, std::fabs(last));
    cert.bound = last;
    cert.premises.push_back(make_premise("tail stabilization |H_K - H_{K-1}|", "<=", gap, tol));
    cert.verdict = cert.premises.back().satisfied ? CertVerdict::Verified
                                                  : CertVerdict::NotApplicable;
    cert.slack = tol - gap;
    cert.flags.emplace_back("stabilization_heuristic", 1.0);
    cert.flags.emplace_back("t_final", t);
    return cert;
}

// --------------------------------------------------------------------------
// t0-gamma lower bound: if eps' X (bhat - beta*) + h(beta*) - h(bhat) - risk^2
// <= t0 * gamma, then H(t0) <= risk + gamma, so H(t0) - gamma is a valid
// lower bound for this realization.
// --------------------------------------------------------------------------
inline Certificate t0_gamma_lower(CurveEvaluator& ev, const SolveResult& sol, double t0,
                                  double gamma) {
    if (!(t0 > 0.0)) throw ArgumentError("t0_gamma_lower: t0 must be positive");
    if (!(gamma >= 0.0)) throw ArgumentError("t0_gamma_lower: gamma must be nonnegative");
    const ProblemInstance& inst = ev.instance();
    if (sol.beta_hat.size() != inst.p())
        throw ArgumentError("t0_gamma_lower: solve result does not match the instance");
    Certificate cert;
    cert.kind = CertificateKind::t0_gamma_lower;
    cert.direction = "lower";
    const double lhs = ev.eps().dot(inst.X * (sol.beta_hat - inst.beta_star)) +
                       ev.h_beta_star() - eval_penalty(inst.penalty, sol.beta_hat) -
                       sol.risk * sol.risk;
    cert.premises.push_back(make_premise("surplus <= t0 * gamma", "<=", lhs, t0 * gamma));
    cert.flags.emplace_back("t0", t0);
    cert.flags.emplace_back("gamma", gamma);
    if (!cert.premises.back().satisfied) {
        cert.verdict = CertVerdict::NotApplicable;
        cert.bound = -kInf;
        cert.slack = cert.premises.back().margin;
        return cert;
    }
    cert.bound = ev.eval_H(t0).value - gamma;
    cert.verdict = CertVerdict::Verified;
    cert.slack = cert.premises.back().margin;
    return cert;
}

// --------------------------------------------------------------------------
// Almost-fixed-point lower bound: for alpha in (0,1) and r > 0, if
//   H((1-alpha) r) <= (1+alpha^2) r   and   H((1-alpha^2) r) >= r,
// then risk >= (1-alpha) r.
// --------------------------------------------------------------------------
inline Certificate almost_fixed_point_lower(CurveEvaluator& ev, double r, double alpha) {
    if (!(r > 0.0)) throw ArgumentError("almost_fixed_point_lower: r must be positive");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ArgumentError("almost_fixed_point_lower: alpha must lie in (0,1)");
    Certificate cert;
    cert.kind = CertificateKind::almost_fixed_point_lower;
    cert.direction = "lower";
    const double h1 = ev.eval_H((1.0 - alpha) * r).value;
    const double h2 = ev.eval_H((1.0 - alpha * alpha) * r).value;
    cert.premises.push_back(
        make_premise("H((1-a) r) <= (1+a^2) r", "<=", h1, (1.0 + alpha * alpha) * r));
    cert.premises.push_back(make_premise("H((1-a^2) r) >= r", ">=", h2, r));
    cert.flags.emplace_back("r", r);
    cert.flags.emplace_back("alpha", alpha);
    const bool ok = cert.premises[0].satisfied && cert.premises[1].satisfied;
    cert.slack = std::min(cert.premises[0].margin, cert.premises[1].margin);
    if (!ok) {
        cert.verdict = CertVerdict::NotApplicable;
        cert.bound = -kInf;
        return cert;
    }
    cert.verdict = CertVerdict::Verified;
    cert.bound = (1.0 - alpha) * r;
    return cert;
}

// --------------------------------------------------------------------------
// Norm-dual lower bound (h must be a norm): almost surely
//   sup { eps' X u - h(u) : ||X u|| <= 1 } <= risk.
// The supremum is M(1) of the instance re-centered at beta* = 0.
// --------------------------------------------------------------------------
inline Certificate norm_dual_lower(const ProblemInstance& inst, const Vector& eps,
                                   const CurveConfig& cfg = {}) {
    if (!penalty_is_norm(inst.penalty))
        throw CapabilityError("norm_dual_lower: penalty is not a norm");
    ProblemInstance centered = inst;
    centered.beta_star = Vector::Zero(inst.p());
    CurveEvaluator ev(std::move(centered), eps, cfg);
    Certificate cert;
    cert.kind = CertificateKind::norm_dual_lower;
    cert.direction = "lower";
    const CurveEval m1 = ev.eval_M(1.0);
    // The supremum is >= 0 (u = 0 is feasible); clip solver noise.
    cert.bound = std::max(m1.value, 0.0);
    cert.verdict = CertVerdict::Verified;
    cert.premises.push_back(make_premise("penalty is a norm", "<=", 1.0, 1.0));
    cert.slack = 0.0;
    cert.flags.emplace_back("dual_mu", m1.dual_mu);
    return cert;
}

}  // namespace riskscope
