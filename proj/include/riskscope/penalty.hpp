#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "riskscope/errors.hpp"
#include "riskscope/types.hpp"

namespace riskscope {

// ---------------------------------------------------------------------------
// Penalty specification.  A penalty h is one of:
//   Zero                    h(b) = 0
//   ScaledL1{lam, n}        h(b) = sqrt(n) * lam * ||b||_1
//   ScaledLqNorm{lam, q, N} h(b) = lam * N(b)^q,  N in {l1, l2, linf}
//   SquaredL2{lam}          h(b) = lam * ||b||_2^2
//   Indicator{K}            h(b) = 0 on K, +inf outside (K box/ball/singleton)
//   Sum{finite, indicator}  h(b) = finite(b) + indicator(b)
// ScaledL1 carries the row count n of the design it is meant for, so the
// sqrt(n) factor is part of the spec rather than an evaluation-time argument.
// ---------------------------------------------------------------------------

enum class NamedNorm { l1, l2, linf };

struct ZeroPenalty {};

struct ScaledL1 {
    double lam = 0.0;
    int n = 1;
};

struct ScaledLqNorm {
    double lam = 0.0;
    int q = 1;
    NamedNorm norm = NamedNorm::l2;
};

struct SquaredL2 {
    double lam = 0.0;
};

struct BoxSet {
    Vector lo, hi;
};

struct BallSet {
    Vector center;
    double radius = 0.0;
};

struct SingletonSet {
    Vector point;
};

using ConvexSet = std::variant<BoxSet, BallSet, SingletonSet>;

struct IndicatorPenalty {
    ConvexSet set;
};

using FinitePenalty = std::variant<ZeroPenalty, ScaledL1, ScaledLqNorm, SquaredL2>;

struct SumPenalty {
    FinitePenalty finite;
    IndicatorPenalty indicator;
};

using PenaltySpec =
    std::variant<ZeroPenalty, ScaledL1, ScaledLqNorm, SquaredL2, IndicatorPenalty, SumPenalty>;

// ---------------------------------------------------------------------------
// Convex set helpers.
// ---------------------------------------------------------------------------

inline int set_dim(const ConvexSet& set) {
    return std::visit(
        [](const auto& s) -> int {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, BoxSet>) return static_cast<int>(s.lo.size());
            else if constexpr (std::is_same_v<S, BallSet>) return static_cast<int>(s.center.size());
            else return static_cast<int>(s.point.size());
        },
        set);
}

inline void validate_set(const ConvexSet& set, int p) {
    std::visit(
        [p](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, BoxSet>) {
                if (s.lo.size() != p || s.hi.size() != p)
                    throw ArgumentError("indicator box: bound dimensions do not match p");
                for (int j = 0; j < p; ++j)
                    if (!(s.lo[j] <= s.hi[j]))
                        throw ArgumentError("indicator box: empty set (lo > hi at coordinate " +
                                            std::to_string(j) + ")");
            } else if constexpr (std::is_same_v<S, BallSet>) {
                if (s.center.size() != p)
                    throw ArgumentError("indicator ball: center dimension does not match p");
                if (!(s.radius >= 0.0))
                    throw ArgumentError("indicator ball: empty set (negative radius)");
            } else {
                if (s.point.size() != p)
                    throw ArgumentError("indicator singleton: point dimension does not match p");
            }
        },
        set);
}

// Closed-set membership with 1e-12 relative slack, so that exact projections
// followed by float roundoff still count as members.
inline bool set_contains(const ConvexSet& set, const Vector& x) {
    return std::visit(
        [&x](const auto& s) -> bool {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, BoxSet>) {
                for (int j = 0; j < x.size(); ++j) {
                    const double tol =
                        1e-12 * (1.0 + std::max(std::fabs(s.lo[j]), std::fabs(s.hi[j])));
                    if (x[j] < s.lo[j] - tol || x[j] > s.hi[j] + tol) return false;
                }
                return true;
            } else if constexpr (std::is_same_v<S, BallSet>) {
                const double tol = 1e-12 * (1.0 + s.radius);
                return (x - s.center).norm() <= s.radius + tol;
            } else {
                const double tol = 1e-12 * (1.0 + s.point.norm());
                return (x - s.point).norm() <= tol;
            }
        },
        set);
}

inline Vector project_onto(const ConvexSet& set, const Vector& z) {
    return std::visit(
        [&z](const auto& s) -> Vector {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, BoxSet>) {
                return z.cwiseMax(s.lo).cwiseMin(s.hi);
            } else if constexpr (std::is_same_v<S, BallSet>) {
                const Vector d = z - s.center;
                const double nd = d.norm();
                if (nd <= s.radius) return z;
                if (nd == 0.0) return s.center;
                return s.center + d * (s.radius / nd);
            } else {
                return s.point;
            }
        },
        set);
}

// ---------------------------------------------------------------------------
// Scalar helpers.
// ---------------------------------------------------------------------------

inline double soft_threshold(double x, double thr) {
    if (x > thr) return x - thr;
    if (x < -thr) return x + thr;
    return 0.0;
}

inline double named_norm(NamedNorm which, const Vector& b) {
    switch (which) {
        case NamedNorm::l1: return b.lpNorm<1>();
        case NamedNorm::l2: return b.norm();
        case NamedNorm::linf: return b.size() == 0 ? 0.0 : b.lpNorm<Eigen::Infinity>();
    }
    return 0.0;
}

// Euclidean projection of z onto the l1 ball of radius c (duality of the
// simplex projection; sort-based, O(p log p)).
inline Vector project_l1_ball(const Vector& z, double c) {
    if (c < 0.0) throw ArgumentError("project_l1_ball: negative radius");
    if (z.lpNorm<1>() <= c) return z;
    const int p = static_cast<int>(z.size());
    std::vector<double> mags(p);
    for (int j = 0; j < p; ++j) mags[j] = std::fabs(z[j]);
    std::sort(mags.begin(), mags.end(), std::greater<double>());
    double cum = 0.0, tau = 0.0;
    for (int k = 0; k < p; ++k) {
        cum += mags[k];
        const double cand = (cum - c) / static_cast<double>(k + 1);
        if (k + 1 == p || mags[k + 1] <= cand) {
            tau = cand;
            break;
        }
    }
    Vector out(p);
    for (int j = 0; j < p; ++j) out[j] = soft_threshold(z[j], tau);
    return out;
}

// ---------------------------------------------------------------------------
// Validation, evaluation, prox.
// ---------------------------------------------------------------------------

inline void validate_finite_penalty(const FinitePenalty& pen) {
    std::visit(
        [](const auto& h) {
            using H = std::decay_t<decltype(h)>;
            if constexpr (std::is_same_v<H, ScaledL1>) {
                if (!(h.lam >= 0.0)) throw ArgumentError("ScaledL1: lam must be nonnegative");
                if (h.n < 1) throw ArgumentError("ScaledL1: n must be a positive row count");
            } else if constexpr (std::is_same_v<H, ScaledLqNorm>) {
                if (!(h.lam >= 0.0)) throw ArgumentError("ScaledLqNorm: lam must be nonnegative");
                if (h.q < 1) throw ArgumentError("ScaledLqNorm: q must be an integer >= 1");
            } else if constexpr (std::is_same_v<H, SquaredL2>) {
                if (!(h.lam >= 0.0)) throw ArgumentError("SquaredL2: lam must be nonnegative");
            }
        },
        pen);
}

// Checks parameter domains and (where the variant pins dimensions) agreement
// with the ambient dimension p; n_rows cross-checks the ScaledL1 factor.
inline void validate_penalty(const PenaltySpec& pen, int p, int n_rows = 0) {
    std::visit(
        [p, n_rows](const auto& h) {
            using H = std::decay_t<decltype(h)>;
            if constexpr (std::is_same_v<H, IndicatorPenalty>) {
                validate_set(h.set, p);
            } else if constexpr (std::is_same_v<H, SumPenalty>) {
                validate_finite_penalty(h.finite);
                validate_set(h.indicator.set, p);
                if (n_rows > 0)
                    if (const auto* l1 = std::get_if<ScaledL1>(&h.finite); l1 && l1->n != n_rows)
                        throw ArgumentError("ScaledL1: stored n does not match the design rows");
            } else {
                validate_finite_penalty(FinitePenalty{h});
                if constexpr (std::is_same_v<H, ScaledL1>) {
                    if (n_rows > 0 && h.n != n_rows)
                        throw ArgumentError("ScaledL1: stored n does not match the design rows");
                }
            }
        },
        pen);
}

inline double eval_finite_penalty(const FinitePenalty& pen, const Vector& beta) {
    return std::visit(
        [&beta](const auto& h) -> double {
            using H = std::decay_t<decltype(h)>;
            if constexpr (std::is_same_v<H, ZeroPenalty>) {
                return 0.0;
            } else if constexpr (std::is_same_v<H, ScaledL1>) {
                return std::sqrt(static_cast<double>(h.n)) * h.lam * beta.lpNorm<1>();
            } else if constexpr (std::is_same_v<H, ScaledLqNorm>) {
                return h.lam * std::pow(named_norm(h.norm, beta), h.q);
            } else {
                return h.lam * beta.squaredNorm();
            }
        },
        pen);
}

// h(beta) on the extended reals; +inf outside indicator domains.
inline double eval_penalty(const PenaltySpec& pen, const Vector& beta) {
    return std::visit(
        [&beta](const auto& h) -> double {
            using H = std::decay_t<decltype(h)>;
            if constexpr (std::is_same_v<H, IndicatorPenalty>) {
                return set_contains(h.set, beta) ? 0.0 : kInf;
            } else if constexpr (std::is_same_v<H, SumPenalty>) {
                if (!set_contains(h.indicator.set, beta)) return kInf;
                return eval_finite_penalty(h.finite, beta);
            } else {
                return eval_finite_penalty(FinitePenalty{h}, beta);
            }
        },
        pen);
}

namespace detail {

// Root of t + coef * t^(q-1) = target over t >= 0 (monotone; bisection).
inline double shrink_radial(double target, double coef, int q) {
    if (target <= 0.0) return 0.0;
    double lo = 0.0, hi = target;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mid + coef * std::pow(mid, q - 1) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline Vector prox_scaled_lq(const ScaledLqNorm& h, const Vector& z, double step) {
    const double c = step * h.lam;
    if (c == 0.0) return z;
    if (h.q == 1) {
        switch (h.norm) {
            case NamedNorm::l1: {
                Vector out(z.size());
                for (int j = 0; j < z.size(); ++j) out[j] = soft_threshold(z[j], c);
                return out;
            }
            case NamedNorm::l2: {
                const double nz = z.norm();
                if (nz <= c) return Vector::Zero(z.size());
                return z * (1.0 - c / nz);
            }
            case NamedNorm::linf:
                // Moreau: prox_{c||.||_inf}(z) = z - P_{c B_1}(z).
                return z - project_l1_ball(z, c);
        }
    }
    const double cq = c * static_cast<double>(h.q);
    switch (h.norm) {
        case NamedNorm::l2: {
            const double nz = z.norm();
            if (nz == 0.0) return z;
            const double t = shrink_radial(nz, cq, h.q);
            return z * (t / nz);
        }
        case NamedNorm::l1: {
            // b = S(z, tau) with tau = cq * ||S(z,tau)||_1^(q-1); tau - rhs is
            // increasing in tau, so bisect on [0, ||z||_inf].
            double lo = 0.0;
            double hi = z.size() == 0 ? 0.0 : z.lpNorm<Eigen::Infinity>();
            const auto l1_after = [&z](double tau) {
                double s = 0.0;
                for (int j = 0; j < z.size(); ++j) s += std::fabs(soft_threshold(z[j], tau));
                return s;
            };
            for (int i = 0; i < 200; ++i) {
                const double mid = 0.5 * (lo + hi);
                const double rhs = cq * std::pow(l1_after(mid), h.q - 1);
                (mid < rhs ? lo : hi) = mid;
            }
            const double tau = 0.5 * (lo + hi);
            Vector out(z.size());
            for (int j = 0; j < z.size(); ++j) out[j] = soft_threshold(z[j], tau);
            return out;
        }
        case NamedNorm::linf:
            throw CapabilityError("prox_penalty: ScaledLqNorm with linf norm and q >= 2 is not supported");
    }
    throw NumericError("prox_scaled_lq: unreachable");
}

inline Vector prox_sum(const SumPenalty& h, const Vector& z, double step) {
    // Exact combinations only; anything else is a capability error.
    if (std::holds_alternative<SingletonSet>(h.indicator.set))
        return std::get<SingletonSet>(h.indicator.set).point;
    if (std::holds_alternative<ZeroPenalty>(h.finite))
        return project_onto(h.indicator.set, z);
    if (const auto* box = std::get_if<BoxSet>(&h.indicator.set)) {
        // Separable finite part + box: 1-D prox then clip, exact per coordinate.
        if (const auto* l1 = std::get_if<ScaledL1>(&h.finite)) {
            const double thr = step * std::sqrt(static_cast<double>(l1->n)) * l1->lam;
            Vector out(z.size());
            for (int j = 0; j < z.size(); ++j)
                out[j] = std::clamp(soft_threshold(z[j], thr), box->lo[j], box->hi[j]);
            return out;
        }
        if (const auto* sq = std::get_if<SquaredL2>(&h.finite)) {
            const double shrink = 1.0 / (1.0 + 2.0 * step * sq->lam);
            Vector out(z.size());
            for (int j = 0; j < z.size(); ++j)
                out[j] = std::clamp(z[j] * shrink, box->lo[j], box->hi[j]);
            return out;
        }
        if (const auto* lq = std::get_if<ScaledLqNorm>(&h.finite);
            lq && lq->q == 1 && lq->norm == NamedNorm::l1) {
            Vector out(z.size());
            for (int j = 0; j < z.size(); ++j)
                out[j] = std::clamp(soft_threshold(z[j], step * lq->lam), box->lo[j], box->hi[j]);
            return out;
        }
    }
    if (const auto* ball = std::get_if<BallSet>(&h.indicator.set)) {
        // Origin-centered ball + l2-radial finite part: radial 1-D reduction.
        if (ball->center.isZero(0.0)) {
            const double nz = z.norm();
            if (const auto* sq = std::get_if<SquaredL2>(&h.finite)) {
                const double t =
                    std::clamp(nz / (1.0 + 2.0 * step * sq->lam), 0.0, ball->radius);
                return nz == 0.0 ? Vector::Zero(z.size()) : Vector(z * (t / nz));
            }
            if (const auto* lq = std::get_if<ScaledLqNorm>(&h.finite);
                lq && lq->norm == NamedNorm::l2) {
                if (nz == 0.0) return Vector::Zero(z.size());
                double t;
                if (lq->q == 1)
                    t = std::max(0.0, nz - step * lq->lam);
                else
                    t = shrink_radial(nz, step * lq->lam * lq->q, lq->q);
                t = std::min(t, ball->radius);
                return Vector(z * (t / nz));
            }
        }
    }
    throw CapabilityError("prox_penalty: this Sum combination has no exact prox; "
                          "supported: finite+singleton, zero+any set, separable finite+box, "
                          "l2-radial finite+origin ball");
}

}  // namespace detail

// prox_penalty(pen, z, step) = argmin_b  (1/2)||b - z||^2 + step * h(b).
inline Vector prox_penalty(const PenaltySpec& pen, const Vector& z, double step) {
    if (!(step >= 0.0)) throw ArgumentError("prox_penalty: step must be nonnegative");
    return std::visit(
        [&z, step](const auto& h) -> Vector {
            using H = std::decay_t<decltype(h)>;
            if constexpr (std::is_same_v<H, ZeroPenalty>) {
                return z;
            } else if constexpr (std::is_same_v<H, ScaledL1>) {
                const double thr = step * std::sqrt(static_cast<double>(h.n)) * h.lam;
                Vector out(z.size());
                for (int j = 0; j < z.size(); ++j) out[j] = soft_threshold(z[j], thr);
                return out;
            } else if constexpr (std::is_same_v<H, ScaledLqNorm>) {
                return detail::prox_scaled_lq(h, z, step);
            } else if constexpr (std::is_same_v<H, SquaredL2>) {
                return z / (1.0 + 2.0 * step * h.lam);
            } else if constexpr (std::is_same_v<H, IndicatorPenalty>) {
                return project_onto(h.set, z);
            } else {
                return detail::prox_sum(h, z, step);
            }
        },
        pen);
}

// h -> factor * h, staying inside the same variant family (indicators are
// invariant under positive scaling).  Used by the dual bisection in curves.
inline PenaltySpec scale_penalty(const PenaltySpec& pen, double factor) {
    if (!(factor > 0.0)) throw ArgumentError("scale_penalty: factor must be positive");
    const auto scale_finite = [factor](FinitePenalty f) -> FinitePenalty {
        std::visit(
            [factor](auto& h) {
                using H = std::decay_t<decltype(h)>;
                if constexpr (!std::is_same_v<H, ZeroPenalty>) h.lam *= factor;
            },
            f);
        return f;
    };
    return std::visit(
        [&](const auto& h) -> PenaltySpec {
            using H = std::decay_t<decltype(h)>;
            if constexpr (std::is_same_v<H, IndicatorPenalty>) {
                return h;
            } else if constexpr (std::is_same_v<H, SumPenalty>) {
                return SumPenalty{scale_finite(h.finite), h.indicator};
            } else if constexpr (std::is_same_v<H, ZeroPenalty>) {
                return h;
            } else {
                auto scaled = h;
                scaled.lam *= factor;
                return scaled;
            }
        },
        pen);
}

// True when h is a norm (positively homogeneous, definite): positive-weight
// scaled l1, or a ScaledLqNorm with q = 1 and positive weight.
inline bool penalty_is_norm(const PenaltySpec& pen) {
    if (const auto* l1 = std::get_if<ScaledL1>(&pen)) return l1->lam > 0.0;
    if (const auto* lq = std::get_if<ScaledLqNorm>(&pen)) return lq->q == 1 && lq->lam > 0.0;
    return false;
}

inline bool penalty_finite_everywhere(const PenaltySpec& pen) {
    return !std::holds_alternative<IndicatorPenalty>(pen) &&
           !std::holds_alternative<SumPenalty>(pen);
}

// Indicator domain if the penalty has one.
inline std::optional<ConvexSet> penalty_domain(const PenaltySpec& pen) {
    if (const auto* ind = std::get_if<IndicatorPenalty>(&pen)) return ind->set;
    if (const auto* sum = std::get_if<SumPenalty>(&pen)) return sum->indicator.set;
    return std::nullopt;
}

}  // namespace riskscope
