#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "riskscope/errors.hpp"
#include "riskscope/parallel.hpp"
#include "riskscope/penalty.hpp"
#include "riskscope/rng.hpp"
#include "riskscope/stats.hpp"
#include "riskscope/types.hpp"

namespace riskscope {

// Sparse-design diagnostics: the restricted isometry constant delta_s, the
// compatibility constant phi(T, c0), the restricted eigenvalue kappa(c0, s),
// the derived Lasso constants, an adversarial target construction for
// ill-conditioned supports, and a greedy Varshamov-Gilbert packing.

inline constexpr int kSignBudgetBits = 12;  // exact sign enumeration up to 2^12
inline constexpr std::uint64_t kDiagnosticsSeed = 0x5249534b53434f50ULL;

// C(p, s) saturated at cap + 1 so callers can compare against a budget
// without overflow.
inline std::int64_t binomial_capped(int p, int s, std::int64_t cap) {
    if (s < 0 || s > p) return 0;
    cap = std::min<std::int64_t>(cap, std::int64_t{1} << 62);
    s = std::min(s, p - s);
    unsigned __int128 result = 1;
    for (int i = 1; i <= s; ++i) {
        // Exact at every step: the running value is C(p - s + i, i).
        result = result * static_cast<unsigned>(p - s + i) / static_cast<unsigned>(i);
        if (result > static_cast<unsigned __int128>(cap)) return cap + 1;
    }
    return static_cast<std::int64_t>(result);
}

// ---------------------------------------------------------------------------
// Restricted isometry constant
// ---------------------------------------------------------------------------

enum class RipMethod { exhaustive, sampled };

inline std::string rip_method_name(RipMethod m) {
    return m == RipMethod::exhaustive ? "exhaustive" : "sampled";
}

struct RipReport {
    int s = 0;
    double delta_s = 0.0;
    std::vector<int> worst_support;
    RipMethod method = RipMethod::exhaustive;
    std::int64_t supports_checked = 0;
};

namespace detail {

// Worst deviation of the singular values of X_S / sqrt(n) from 1, via the
// s x s Gram eigenproblem.
inline double support_deviation(const Matrix& X, const std::vector<int>& support) {
    const int s = static_cast<int>(support.size());
    const double n = static_cast<double>(X.rows());
    Matrix gram(s, s);
    for (int a = 0; a < s; ++a) {
        for (int b = a; b < s; ++b) {
            gram(a, b) = X.col(support[a]).dot(X.col(support[b])) / n;
            gram(b, a) = gram(a, b);
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
    const double lo = std::sqrt(std::max(es.eigenvalues().minCoeff(), 0.0));
    const double hi = std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
    return std::max(1.0 - lo, hi - 1.0);
}

// Sorted uniform random support of size s, by partial Fisher-Yates.
inline std::vector<int> random_support(Rng& rng, int p, int s) {
    std::vector<int> pool(static_cast<std::size_t>(p));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < s; ++i) {
        const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(p - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    std::vector<int> support(pool.begin(), pool.begin() + s);
    std::sort(support.begin(), support.end());
    return support;
}

}  // namespace detail

// delta_s of X: exhaustive over all size-s supports when C(p, s) fits the
// budget (exact), otherwise over `budget` uniformly sampled supports, which
// only gives a lower estimate and is labeled as such by method = sampled.
inline RipReport rip_delta(const Matrix& X, int s, std::int64_t budget) {
    const int p = static_cast<int>(X.cols());
    if (X.rows() < 1 || p < 1) throw ArgumentError("rip_delta: X must be nonempty");
    if (s < 1) throw ArgumentError("rip_delta: s must be at least 1");
    if (s > p) throw ArgumentError("rip_delta: s exceeds the number of columns");
    if (budget < 1) throw ArgumentError("rip_delta: budget must be positive");

    RipReport report;
    report.s = s;

    std::vector<std::vector<int>> supports;
    if (binomial_capped(p, s, budget) <= budget) {
        report.method = RipMethod::exhaustive;
        std::vector<int> idx(static_cast<std::size_t>(s));
        std::iota(idx.begin(), idx.end(), 0);
        for (;;) {
            supports.push_back(idx);
            int j = s - 1;
            while (j >= 0 && idx[static_cast<std::size_t>(j)] == p - s + j) --j;
            if (j < 0) break;
            ++idx[static_cast<std::size_t>(j)];
            for (int k = j + 1; k < s; ++k)
                idx[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(k - 1)] + 1;
        }
    } else {
        // Distinct uniform supports, so a budget that covers the whole pool
        // reproduces the exhaustive enumeration.
        report.method = RipMethod::sampled;
        std::set<std::vector<int>> seen;
        Rng rng(kDiagnosticsSeed);
        const std::int64_t attempt_cap = 64 * budget;
        for (std::int64_t attempt = 0;
             attempt < attempt_cap &&
             static_cast<std::int64_t>(seen.size()) < budget;
             ++attempt)
            seen.insert(detail::random_support(rng, p, s));
        supports.assign(seen.begin(), seen.end());
    }

    std::vector<double> deviation(supports.size(), 0.0);
    parallel_for(static_cast<std::int64_t>(supports.size()), [&](std::int64_t i) {
        deviation[static_cast<std::size_t>(i)] =
            detail::support_deviation(X, supports[static_cast<std::size_t>(i)]);
    });

    std::size_t worst = 0;
    for (std::size_t i = 1; i < deviation.size(); ++i)
        if (deviation[i] > deviation[worst]) worst = i;
    report.delta_s = deviation[worst];
    report.worst_support = supports[worst];
    report.supports_checked = static_cast<std::int64_t>(supports.size());
    return report;
}

// ---------------------------------------------------------------------------
// Compatibility and restricted eigenvalue constants
// ---------------------------------------------------------------------------

struct ConeConstantReport {
    double value = 0.0;
    Vector minimizer_u;
    double c0 = 1.0;
    std::string certificate_side = "upper_estimate";
    std::vector<std::pair<std::string, double>> flags;
};

namespace detail {

// Denominator of the compatibility ratio for a fixed sign pattern on T:
//   g(u) = sum_{j in T} sign_j u_j - (1/c0) sum_{j not in T} |u_j|,
// which equals ||u_T||_1 - (1/c0) ||u_{T^c}||_1 once the sign constraints
// sign_j u_j >= 0 hold.  g is 1-homogeneous.
struct CompatCone {
    const std::vector<int>* T;
    const std::vector<int>* sign;  // +1 / -1 per T entry
    std::vector<char> in_T;       // indicator over [p]
    double c0 = 1.0;

    double g(const Vector& u) const {
        double head = 0.0;
        for (std::size_t k = 0; k < T->size(); ++k)
            head += (*sign)[k] * u[(*T)[k]];
        double tail = 0.0;
        for (int j = 0; j < u.size(); ++j)
            if (!in_T[static_cast<std::size_t>(j)]) tail += std::fabs(u[j]);
        return head - tail / c0;
    }

    // Euclidean projection onto {sign_j u_j >= 0 on T} intersected with
    // {g(u) >= 1}: closed-form coordinate maps in a scalar multiplier nu,
    // with g(u(nu)) nondecreasing in nu, so nu is found by bisection.
    Vector project(const Vector& z) const {
        const auto at = [&](double nu) {
            Vector u = z;
            for (std::size_t k = 0; k < T->size(); ++k) {
                const int j = (*T)[k];
                const double sgn = (*sign)[k];
                u[j] = sgn * std::max(sgn * z[j] + nu, 0.0);
            }
            if (nu > 0.0) {
                for (int j = 0; j < z.size(); ++j)
                    if (!in_T[static_cast<std::size_t>(j)])
                        u[j] = soft_threshold(z[j], nu / c0);
            }
            return u;
        };
        Vector u = at(0.0);
        if (g(u) >= 1.0) return u;
        double lo = 0.0, hi = 1.0;
        while (g(at(hi)) < 1.0) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e18)
                throw NumericError("compatibility_constant: projection multiplier diverged");
        }
        for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            (g(at(mid)) < 1.0 ? lo : hi) = mid;
        }
        return at(hi);
    }
};

}  // namespace detail

// Upper estimate of the compatibility constant
//   phi(T, c0) = inf sqrt(|T|) ||X u|| / (sqrt(n) (||u_T||_1 - (1/c0)||u_{T^c}||_1))
// over the cone where the denominator is positive.  For each sign pattern of
// u_T the denominator-normalized problem is convex and solved by projected
// gradient; the best feasible point over sign patterns x restarts is
// reported.  |T| beyond kSignBudgetBits falls back to random sign patterns
// and is flagged.
inline ConeConstantReport compatibility_constant(const Matrix& X, const std::vector<int>& T,
                                                 double c0, int restarts) {
    const int p = static_cast<int>(X.cols());
    const int n = static_cast<int>(X.rows());
    if (n < 1 || p < 1) throw ArgumentError("compatibility_constant: X must be nonempty");
    if (T.empty()) throw ArgumentError("compatibility_constant: T must be nonempty");
    for (int j : T)
        if (j < 0 || j >= p)
            throw ArgumentError("compatibility_constant: T contains an out-of-range index");
    {
        std::vector<int> sorted = T;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw ArgumentError("compatibility_constant: T contains a duplicate index");
    }
    if (!(c0 >= 1.0)) throw ArgumentError("compatibility_constant: c0 must be at least 1");
    if (restarts < 1) throw ArgumentError("compatibility_constant: restarts must be positive");

    const int t_size = static_cast<int>(T.size());
    const bool sampled_signs = t_size > kSignBudgetBits;
    const std::int64_t n_patterns =
        sampled_signs ? (std::int64_t{1} << kSignBudgetBits) : (std::int64_t{1} << t_size);

    std::vector<char> in_T(static_cast<std::size_t>(p), 0);
    for (int j : T) in_T[static_cast<std::size_t>(j)] = 1;

    const Matrix gram = X.transpose() * X;
    double lipschitz = 0.0;
    for (int j = 0; j < p; ++j) lipschitz = std::max(lipschitz, gram(j, j));
    // Power-iteration-free safe step: 1/trace bound would be loose; use the
    // largest Gram eigenvalue via a short power iteration on gram itself.
    {
        Vector v = Vector::Ones(p).normalized();
        for (int it = 0; it < 100; ++it) {
            Vector w = gram * v;
            const double norm_w = w.norm();
            if (norm_w == 0.0) break;
            v = w / norm_w;
            lipschitz = std::max(lipschitz, norm_w);
        }
    }
    const double step = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

    const std::int64_t tasks = n_patterns * restarts;
    std::vector<double> best_value(static_cast<std::size_t>(tasks), kInf);
    std::vector<Vector> best_u(static_cast<std::size_t>(tasks));

    parallel_for(tasks, [&](std::int64_t task) {
        const std::int64_t pattern_id = task / restarts;
        const int restart = static_cast<int>(task % restarts);

        std::vector<int> sign(static_cast<std::size_t>(t_size), 1);
        if (sampled_signs) {
            if (pattern_id > 0) {  // pattern 0 stays all-positive
                Rng sign_rng(mix_seed(kDiagnosticsSeed ^ 0xa5a5a5a5ULL,
                                      static_cast<std::uint64_t>(pattern_id)));
                for (auto& s : sign) s = sign_rng.sign();
            }
        } else {
            for (int k = 0; k < t_size; ++k)
                sign[static_cast<std::size_t>(k)] =
                    (pattern_id >> k) & 1 ? -1 : 1;
        }

        detail::CompatCone cone{&T, &sign, in_T, c0};

        Vector u;
        if (restart == 0) {
            // Canonical start: equal magnitudes on T, zero elsewhere,
            // denominator exactly 1.
            u = Vector::Zero(p);
            for (int k = 0; k < t_size; ++k)
                u[T[static_cast<std::size_t>(k)]] =
                    sign[static_cast<std::size_t>(k)] / static_cast<double>(t_size);
        } else {
            Rng rng(mix_seed(kDiagnosticsSeed, static_cast<std::uint64_t>(task)));
            u = Vector(p);
            for (int j = 0; j < p; ++j) u[j] = rng.gaussian();
            u = cone.project(u);
        }

        double prev_obj = kInf;
        for (int it = 0; it < 2000; ++it) {
            const Vector grad = gram * u;
            u = cone.project(u - step * grad);
            const double obj = u.dot(gram * u);
            if (obj >= prev_obj - 1e-14 * (1.0 + std::fabs(prev_obj))) break;
            prev_obj = obj;
        }
        // Exact denominator normalization (g is 1-homogeneous and ~1 here).
        const double denom = cone.g(u);
        if (denom > 0.0) u /= denom;
        best_value[static_cast<std::size_t>(task)] = (X * u).norm();
        best_u[static_cast<std::size_t>(task)] = std::move(u);
    });

    std::size_t winner = 0;
    for (std::size_t i = 1; i < best_value.size(); ++i)
        if (best_value[i] < best_value[winner]) winner = i;

    ConeConstantReport report;
    report.c0 = c0;
    report.minimizer_u = best_u[winner];
    report.value = std::sqrt(static_cast<double>(t_size)) * best_value[winner] /
                   std::sqrt(static_cast<double>(n));
    report.flags.emplace_back("sign_patterns", static_cast<double>(n_patterns));
    report.flags.emplace_back("restarts", static_cast<double>(restarts));
    if (sampled_signs) report.flags.emplace_back("sign_sampling", 1.0);
    return report;
}

namespace detail {

// Sum of the p - s smallest magnitudes of alpha.
inline double l1_tail(const Vector& alpha, int s) {
    const int p = static_cast<int>(alpha.size());
    if (s >= p) return 0.0;
    std::vector<double> mags(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) mags[static_cast<std::size_t>(j)] = std::fabs(alpha[j]);
    std::sort(mags.begin(), mags.end(), std::greater<>());
    double tail = 0.0;
    for (int j = s; j < p; ++j) tail += mags[static_cast<std::size_t>(j)];
    return tail;
}

// Moves alpha into the cone { l1_tail(alpha, s) <= c0 sqrt(s) ||alpha|| } by
// scaling the p - s smallest magnitudes; exact one-step solution of the
// scaled-tail equality.
inline Vector cone_pull(const Vector& alpha, int s, double c0) {
    const int p = static_cast<int>(alpha.size());
    const double limit = c0 * std::sqrt(static_cast<double>(s));
    if (l1_tail(alpha, s) <= limit * alpha.norm()) return alpha;
    std::vector<int> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::fabs(alpha[a]) > std::fabs(alpha[b]);
    });
    double head_sq = 0.0, tail_sum = 0.0, tail_sq = 0.0;
    for (int k = 0; k < p; ++k) {
        const double v = alpha[order[static_cast<std::size_t>(k)]];
        if (k < s) head_sq += v * v;
        else {
            tail_sum += std::fabs(v);
            tail_sq += v * v;
        }
    }
    // Scale the tail by theta so that theta * tail_sum equals
    // limit * sqrt(head_sq + theta^2 tail_sq); infeasibility guarantees the
    // radicand is positive.
    const double radicand = tail_sum * tail_sum - limit * limit * tail_sq;
    Vector pulled = alpha;
    if (radicand <= 0.0 || head_sq == 0.0) {
        for (int k = s; k < p; ++k) pulled[order[static_cast<std::size_t>(k)]] = 0.0;
        return pulled;
    }
    const double theta =
        std::min(1.0, limit * std::sqrt(head_sq) / std::sqrt(radicand));
    for (int k = s; k < p; ++k) pulled[order[static_cast<std::size_t>(k)]] *= theta;
    return pulled;
}

}  // namespace detail

// Upper estimate of the restricted eigenvalue constant
//   kappa(c0, s) = inf ||X alpha|| / (sqrt(n) ||alpha||)
// over the nonconvex cone where the sum of the p - s smallest magnitudes is
// at most c0 sqrt(s) ||alpha||.  Multi-start projected gradient on the unit
// sphere with a sort-based cone pull; all coordinate directions (always
// feasible) are also scored, and the best feasible point wins.
inline ConeConstantReport re_constant(const Matrix& X, int s, double c0, int restarts) {
    const int p = static_cast<int>(X.cols());
    const int n = static_cast<int>(X.rows());
    if (n < 1 || p < 1) throw ArgumentError("re_constant: X must be nonempty");
    if (s < 1) throw ArgumentError("re_constant: s must be at least 1");
    if (s > p) throw ArgumentError("re_constant: s exceeds the number of columns");
    if (!(c0 > 0.0)) throw ArgumentError("re_constant: c0 must be positive");
    if (restarts < 1) throw ArgumentError("re_constant: restarts must be positive");

    const double sqrt_n = std::sqrt(static_cast<double>(n));
    const auto ratio = [&](const Vector& alpha) {
        return (X * alpha).norm() / sqrt_n;  // alpha is kept unit-norm
    };

    const Matrix gram = X.transpose() * X;
    double lipschitz = 0.0;
    {
        Vector v = Vector::Ones(p).normalized();
        for (int it = 0; it < 100; ++it) {
            Vector w = gram * v;
            const double norm_w = w.norm();
            if (norm_w == 0.0) break;
            v = w / norm_w;
            lipschitz = std::max(lipschitz, norm_w);
        }
    }
    const double step = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

    const std::int64_t tasks = restarts;
    std::vector<double> best_value(static_cast<std::size_t>(tasks), kInf);
    std::vector<Vector> best_alpha(static_cast<std::size_t>(tasks));

    parallel_for(tasks, [&](std::int64_t task) {
        Rng rng(mix_seed(kDiagnosticsSeed ^ 0x52455252ULL, static_cast<std::uint64_t>(task)));
        Vector alpha(p);
        if (task % 2 == 0) {
            for (int j = 0; j < p; ++j) alpha[j] = rng.gaussian();
        } else {
            // s-sparse start on a random support: always cone-feasible.
            alpha = Vector::Zero(p);
            const auto support = detail::random_support(rng, p, s);
            for (int j : support) alpha[j] = rng.gaussian();
            if (alpha.norm() == 0.0) alpha[support.front()] = 1.0;
        }
        alpha = detail::cone_pull(alpha, s, c0);
        if (alpha.norm() == 0.0) alpha.setConstant(1.0);
        alpha.normalize();

        double local_best = ratio(alpha);
        Vector local_alpha = alpha;
        for (int it = 0; it < 2000; ++it) {
            const Vector grad = gram * alpha;
            Vector next = detail::cone_pull(alpha - step * grad, s, c0);
            const double norm_next = next.norm();
            if (norm_next < 1e-300) break;
            next /= norm_next;
            const double value = ratio(next);
            if (value < local_best) {
                local_best = value;
                local_alpha = next;
            }
            if ((next - alpha).norm() < 1e-13) break;
            alpha = std::move(next);
        }
        best_value[static_cast<std::size_t>(task)] = local_best;
        best_alpha[static_cast<std::size_t>(task)] = std::move(local_alpha);
    });

    std::size_t winner = 0;
    for (std::size_t i = 1; i < best_value.size(); ++i)
        if (best_value[i] < best_value[winner]) winner = i;
    double value = best_value[winner];
    Vector minimizer = best_alpha[winner];

    // Coordinate directions are 1-sparse, hence always in the cone.
    for (int j = 0; j < p; ++j) {
        const double column_ratio = X.col(j).norm() / sqrt_n;
        if (column_ratio < value) {
            value = column_ratio;
            minimizer = Vector::Zero(p);
            minimizer[j] = 1.0;
        }
    }

    ConeConstantReport report;
    report.c0 = c0;
    report.value = value;
    report.minimizer_u = std::move(minimizer);
    report.flags.emplace_back("s", static_cast<double>(s));
    report.flags.emplace_back("restarts", static_cast<double>(restarts));
    return report;
}

// ---------------------------------------------------------------------------
// Derived Lasso constants
// ---------------------------------------------------------------------------

struct LassoConstants {
    double gamma = 0.0;
    double c0 = 0.0;
    double C_bar = 0.0;
    double C_under = 0.0;
    double lambda_threshold = 0.0;
};

// Pure arithmetic on supplied estimates:
//   c0 = (1 + gamma + sqrt 3) / gamma
//   C_under = sigma / (1 + delta_s)
//   C_bar = (sigma/kappa) (1 + sigma kappa (sqrt s + 2 sqrt(log 3))/(lam sqrt s)
//                            + sqrt 3 / sqrt(log(9 e p / s)))
//   lambda_threshold = sigma (1+gamma)(1+delta_s)(1 + sqrt(2 log(9 e p / s)))
inline LassoConstants lasso_constants(const Matrix& X, int s, double gamma, double sigma,
                                      double lam, double kappa_est, double delta_s_est) {
    const int p = static_cast<int>(X.cols());
    if (p < 1) throw ArgumentError("lasso_constants: X must be nonempty");
    if (s < 1) throw ArgumentError("lasso_constants: s must be at least 1");
    if (!(gamma > 0.0)) throw ArgumentError("lasso_constants: gamma must be positive");
    if (!(sigma > 0.0)) throw ArgumentError("lasso_constants: sigma must be positive");
    if (!(lam > 0.0)) throw ArgumentError("lasso_constants: lam must be positive");
    if (!(kappa_est > 0.0)) throw ArgumentError("lasso_constants: kappa_est must be positive");
    if (!(delta_s_est >= 0.0))
        throw ArgumentError("lasso_constants: delta_s_est must be nonnegative");

    const double log_arg = 9.0 * std::numbers::e * static_cast<double>(p) / s;
    if (!(log_arg > 1.0))
        throw ArgumentError("lasso_constants: log argument 9ep/s must exceed 1");
    const double log_term = std::log(log_arg);
    const double sqrt_s = std::sqrt(static_cast<double>(s));
    const double sqrt3 = std::sqrt(3.0);

    LassoConstants out;
    out.gamma = gamma;
    out.c0 = (1.0 + gamma + sqrt3) / gamma;
    out.C_under = sigma / (1.0 + delta_s_est);
    out.C_bar = sigma / kappa_est *
                (1.0 +
                 sigma * kappa_est * (sqrt_s + 2.0 * std::sqrt(std::log(3.0))) /
                     (lam * sqrt_s) +
                 sqrt3 / std::sqrt(log_term));
    out.lambda_threshold =
        sigma * (1.0 + gamma) * (1.0 + delta_s_est) * (1.0 + std::sqrt(2.0 * log_term));
    return out;
}

// ---------------------------------------------------------------------------
// Adversarial target for ill-conditioned supports
// ---------------------------------------------------------------------------

struct CompatAdversary {
    Vector beta_star;
    double t0 = 0.0;
    double gamma = 0.0;
    double phi = 0.0;  // compatibility estimate at c0 = 1
    double q = 0.0;    // sigma x chi quantile of n degrees of freedom
    Vector u;          // near-minimizer of the compatibility program, ||X u|| = 1
};

// Builds the target vector beta* supported on T for which the penalized
// least-squares risk stays above (99/100) lam sqrt(|T|) / phi(T, 1) with
// probability about 1/2:
//   q     = sigma x chi-quantile(q_prob, n)
//   gamma = lam sqrt(|T|) / (200 phi)
//   t0    = (q + lam sqrt(|T|) / phi)^2 / gamma
//   beta*_T = -t0 u_T with u the near-minimizer normalized to ||X u|| = 1.
inline CompatAdversary construct_compatibility_adversary(const Matrix& X,
                                                         const std::vector<int>& T,
                                                         double lam, double sigma,
                                                         double q_prob = 0.99,
                                                         int restarts = 8) {
    if (!(lam > 0.0))
        throw ArgumentError("construct_compatibility_adversary: lam must be positive");
    if (!(sigma > 0.0))
        throw ArgumentError("construct_compatibility_adversary: sigma must be positive");
    if (!(q_prob > 0.0 && q_prob < 1.0))
        throw ArgumentError("construct_compatibility_adversary: q_prob must lie in (0,1)");

    const ConeConstantReport compat = compatibility_constant(X, T, 1.0, restarts);
    if (compat.value <= 1e-10)
        throw ArgumentError(
            "construct_compatibility_adversary: degenerate design, compatibility estimate "
            "is numerically zero");

    const int p = static_cast<int>(X.cols());
    const int n = static_cast<int>(X.rows());
    const double sqrt_t = std::sqrt(static_cast<double>(T.size()));

    CompatAdversary out;
    out.phi = compat.value;
    out.u = compat.minimizer_u / (X * compat.minimizer_u).norm();
    out.q = sigma * chi_quantile(q_prob, static_cast<double>(n));
    out.gamma = lam * sqrt_t / (200.0 * out.phi);
    const double reach = out.q + lam * sqrt_t / out.phi;
    out.t0 = reach * reach / out.gamma;
    out.beta_star = Vector::Zero(p);
    for (int j : T) out.beta_star[j] = -out.t0 * out.u[j];
    return out;
}

// ---------------------------------------------------------------------------
// Varshamov-Gilbert packing
// ---------------------------------------------------------------------------

struct VgPacking {
    int d = 0;
    int p = 0;
    std::vector<Vector> omega;  // weight-d binary vectors, entries in {0, 1}
    double log_card = 0.0;
};

// Greedy packing of weight-d binary vectors with pairwise squared Hamming
// distance > d, visited in a seeded random order.  Stops once the cardinality
// bound exp((d/2) log(p/(5d))) is met; running out of candidates first would
// contradict the packing bound and raises an internal error.
inline VgPacking vg_packing(int p, int d, std::uint64_t seed = kDiagnosticsSeed) {
    if (d < 1) throw ArgumentError("vg_packing: d must be at least 1");
    if (!(static_cast<double>(d) < static_cast<double>(p) / 5.0))
        throw ArgumentError("vg_packing: d must be less than p / 5");

    const double bound =
        std::exp(0.5 * d * std::log(static_cast<double>(p) / (5.0 * d)));
    const auto target = static_cast<std::int64_t>(std::ceil(bound - 1e-9));

    // Squared Hamming distance between weight-d supports is 2 (d - overlap),
    // so the packing condition ||w - w'||^2 > d is overlap < d / 2.
    std::vector<std::vector<int>> kept;
    const auto far_from_kept = [&](const std::vector<int>& cand) {
        for (const auto& other : kept) {
            int overlap = 0;
            std::size_t a = 0, b = 0;
            while (a < cand.size() && b < other.size()) {
                if (cand[a] == other[b]) {
                    ++overlap;
                    ++a;
                    ++b;
                } else if (cand[a] < other[b]) {
                    ++a;
                } else {
                    ++b;
                }
            }
            if (2 * (d - overlap) <= d) return false;
        }
        return true;
    };

    constexpr std::int64_t kEnumerationCap = 200000;
    if (binomial_capped(p, d, kEnumerationCap) <= kEnumerationCap) {
        // Materialize every support, shuffle, greedily keep.
        std::vector<std::vector<int>> pool;
        std::vector<int> idx(static_cast<std::size_t>(d));
        std::iota(idx.begin(), idx.end(), 0);
        for (;;) {
            pool.push_back(idx);
            int j = d - 1;
            while (j >= 0 && idx[static_cast<std::size_t>(j)] == p - d + j) --j;
            if (j < 0) break;
            ++idx[static_cast<std::size_t>(j)];
            for (int k = j + 1; k < d; ++k)
                idx[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(k - 1)] + 1;
        }
        Rng rng(seed);
        for (std::size_t i = pool.size(); i > 1; --i)
            std::swap(pool[i - 1], pool[rng.below(i)]);
        for (const auto& cand : pool) {
            if (static_cast<std::int64_t>(kept.size()) >= target) break;
            if (far_from_kept(cand)) kept.push_back(cand);
        }
    } else {
        // The candidate pool is astronomically large; a uniform random stream
        // is the seeded random order, with a generous attempt cap standing in
        // for exhaustion.
        Rng rng(seed);
        const std::int64_t max_attempts = std::max<std::int64_t>(1000000, 2000 * target);
        for (std::int64_t attempt = 0;
             attempt < max_attempts && static_cast<std::int64_t>(kept.size()) < target;
             ++attempt) {
            const auto cand = detail::random_support(rng, p, d);
            if (far_from_kept(cand)) kept.push_back(cand);
        }
    }

    if (static_cast<std::int64_t>(kept.size()) < target)
        throw NumericError(
            "vg_packing: candidate pool exhausted before the cardinality bound, which "
            "contradicts the packing guarantee");

    VgPacking out;
    out.p = p;
    out.d = d;
    out.omega.reserve(kept.size());
    for (const auto& support : kept) {
        Vector w = Vector::Zero(p);
        for (int j : support) w[j] = 1.0;
        out.omega.push_back(std::move(w));
    }
    out.log_card = std::log(static_cast<double>(kept.size()));
    return out;
}

}  // namespace riskscope
