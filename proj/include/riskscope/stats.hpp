#pragma once

#include <cmath>
#include <limits>

#include "riskscope/errors.hpp"

namespace riskscope {

// Special functions needed for quantiles and exact binomial bands.  All of
// them are classical series / continued-fraction evaluations on top of
// std::lgamma; accuracy is ~1e-14 relative on the ranges used here, which is
// far below every tolerance in the test suite.

namespace detail {

// Regularized lower incomplete gamma P(a, x) by power series (x < a + 1).
inline double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int k = 0; k < 1000; ++k) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by Lentz continued fraction
// (x >= a + 1).
inline double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for the regularized incomplete beta (Lentz).
inline double beta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 1000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h;
}

}  // namespace detail

// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
inline double gamma_p(double a, double x) {
    if (a <= 0.0) throw ArgumentError("gamma_p: shape a must be positive");
    if (x < 0.0) throw ArgumentError("gamma_p: x must be nonnegative");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return detail::gamma_p_series(a, x);
    return 1.0 - detail::gamma_q_cf(a, x);
}

// Regularized incomplete beta I_x(a, b).
inline double beta_inc(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw ArgumentError("beta_inc: a, b must be positive");
    if (x < 0.0 || x > 1.0) throw ArgumentError("beta_inc: x must lie in [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double front =
        std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                 a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_cf(a, b, x) / a;
    return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

// Standard normal upper tail P(Z >= x).
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Standard normal quantile by bisection on the CDF (abs tol 1e-12).
inline double normal_quantile(double prob) {
    if (!(prob > 0.0 && prob < 1.0))
        throw ArgumentError("normal_quantile: prob must lie in (0,1)");
    double lo = -40.0, hi = 40.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < prob ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Chi-square quantile with dof degrees of freedom: bisection on the
// regularized incomplete gamma to absolute tolerance 1e-10.
inline double chi2_quantile(double prob, double dof) {
    if (!(prob > 0.0 && prob < 1.0))
        throw ArgumentError("chi2_quantile: prob must lie in (0,1)");
    if (dof <= 0.0) throw ArgumentError("chi2_quantile: dof must be positive");
    const auto cdf = [dof](double x) { return gamma_p(0.5 * dof, 0.5 * x); };
    double hi = dof + 1.0;
    while (cdf(hi) < prob) hi *= 2.0;
    double lo = 0.0;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < prob ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Quantile of the chi distribution (the norm of a standard Gaussian vector).
inline double chi_quantile(double prob, double dof) {
    return std::sqrt(chi2_quantile(prob, dof));
}

// Inverse of the regularized incomplete beta in x, by bisection (tol 1e-12).
inline double beta_quantile(double prob, double a, double b) {
    if (!(prob >= 0.0 && prob <= 1.0))
        throw ArgumentError("beta_quantile: prob must lie in [0,1]");
    if (prob == 0.0) return 0.0;
    if (prob == 1.0) return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
        const double mid = 0.5 * (lo + hi);
        (beta_inc(a, b, mid) < prob ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// One-sided Clopper-Pearson lower confidence bound for a binomial proportion:
// with probability >= confidence, the true p is >= the returned value.
inline double clopper_pearson_lower(std::int64_t successes, std::int64_t trials,
                                    double confidence) {
    if (trials <= 0) throw ArgumentError("clopper_pearson_lower: trials must be positive");
    if (successes < 0 || successes > trials)
        throw ArgumentError("clopper_pearson_lower: successes out of range");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw ArgumentError("clopper_pearson_lower: confidence must lie in (0,1)");
    if (successes == 0) return 0.0;
    const double alpha = 1.0 - confidence;
    return beta_quantile(alpha, static_cast<double>(successes),
                         static_cast<double>(trials - successes + 1));
}

// One-sided Clopper-Pearson upper confidence bound.
inline double clopper_pearson_upper(std::int64_t successes, std::int64_t trials,
                                    double confidence) {
    if (trials <= 0) throw ArgumentError("clopper_pearson_upper: trials must be positive");
    if (successes < 0 || successes > trials)
        throw ArgumentError("clopper_pearson_upper: successes out of range");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw ArgumentError("clopper_pearson_upper: confidence must lie in (0,1)");
    if (successes == trials) return 1.0;
    const double alpha = 1.0 - confidence;
    return beta_quantile(1.0 - alpha, static_cast<double>(successes + 1),
                         static_cast<double>(trials - successes));
}

// Binomial CDF P(X <= k) for X ~ Bin(n, p), via the incomplete beta.
inline double binomial_cdf(std::int64_t k, std::int64_t n, double p) {
    if (n <= 0) throw ArgumentError("binomial_cdf: n must be positive");
    if (k < 0) return 0.0;
    if (k >= n) return 1.0;
    return beta_inc(static_cast<double>(n - k), static_cast<double>(k + 1), 1.0 - p);
}

}  // namespace riskscope
