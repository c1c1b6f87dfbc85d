#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/SVD>

#include "riskscope/diagnostics.hpp"
#include "riskscope/stats.hpp"
#include "support/util.hpp"

using namespace riskscope;
using Catch::Matchers::WithinAbs;

namespace {

// Independent oracle: extreme singular values of X_S / sqrt(n) via JacobiSVD
// on the submatrix itself (the library path goes through the s x s Gram).
double support_deviation_oracle(const Matrix& X, const std::vector<int>& support) {
    Matrix sub(X.rows(), static_cast<int>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k)
        sub.col(static_cast<int>(k)) = X.col(support[k]);
    sub /= std::sqrt(static_cast<double>(X.rows()));
    Eigen::JacobiSVD<Matrix> svd(sub);
    const auto& sv = svd.singularValues();
    double smin = sv[sv.size() - 1];
    if (sub.cols() > sub.rows()) smin = 0.0;  // rank-deficient by shape
    return std::max(1.0 - smin, sv[0] - 1.0);
}

double compat_denominator(const Vector& u, const std::vector<int>& T, double c0) {
    std::vector<char> in_T(static_cast<std::size_t>(u.size()), 0);
    for (int j : T) in_T[static_cast<std::size_t>(j)] = 1;
    double head = 0.0, tail = 0.0;
    for (int j = 0; j < u.size(); ++j)
        (in_T[static_cast<std::size_t>(j)] ? head : tail) += std::fabs(u[j]);
    return head - tail / c0;
}

double compat_value_of(const Matrix& X, const Vector& u, const std::vector<int>& T,
                       double c0) {
    const double denom = compat_denominator(u, T, c0);
    return std::sqrt(static_cast<double>(T.size())) * (X * u).norm() /
           (std::sqrt(static_cast<double>(X.rows())) * denom);
}

double re_tail(const Vector& alpha, int s) {
    std::vector<double> mags(static_cast<std::size_t>(alpha.size()));
    for (int j = 0; j < alpha.size(); ++j)
        mags[static_cast<std::size_t>(j)] = std::fabs(alpha[j]);
    std::sort(mags.begin(), mags.end(), std::greater<>());
    double tail = 0.0;
    for (std::size_t k = static_cast<std::size_t>(s); k < mags.size(); ++k)
        tail += mags[k];
    return tail;
}

Matrix orthonormal_scaled_design(Rng& rng, int n, int p) {
    const Matrix raw = testing::random_matrix(rng, n, p);
    const Eigen::HouseholderQR<Matrix> qr(raw);
    const Matrix q = qr.householderQ() * Matrix::Identity(n, p);
    return std::sqrt(static_cast<double>(n)) * q;
}

}  // namespace

TEST_CASE("rip delta vanishes on orthonormal scaled designs") {
    Rng rng(401);
    const Matrix X = orthonormal_scaled_design(rng, 6, 4);
    for (int s = 1; s <= 4; ++s) {
        const RipReport report = rip_delta(X, s, 1000);
        REQUIRE(report.method == RipMethod::exhaustive);
        REQUIRE(report.s == s);
        REQUIRE_THAT(report.delta_s, WithinAbs(0.0, 1e-8));
    }
    const Matrix id = 2.0 * Matrix::Identity(4, 4);  // sqrt(n) I with n = 4
    REQUIRE_THAT(rip_delta(id, 2, 100).delta_s, WithinAbs(0.0, 1e-12));
}

TEST_CASE("rip delta for two unit columns at inner product one half") {
    // Columns of X / sqrt(n) are unit with correlation 0.5; the frame has
    // singular values sqrt(1.5) and sqrt(0.5), so delta_2 = 1 - sqrt(0.5).
    const int n = 2;
    Matrix X(n, 2);
    X.col(0) << 1.0, 0.0;
    X.col(1) << 0.5, std::sqrt(0.75);
    X *= std::sqrt(static_cast<double>(n));
    const RipReport report = rip_delta(X, 2, 10);
    REQUIRE(report.method == RipMethod::exhaustive);
    REQUIRE_THAT(report.delta_s, WithinAbs(1.0 - std::sqrt(0.5), 1e-8));
    REQUIRE(report.worst_support == std::vector<int>{0, 1});
    REQUIRE(report.supports_checked == 1);
}

TEST_CASE("rip exhaustive enumeration satisfies the definition") {
    Rng rng(402);
    const Matrix X = testing::random_matrix(rng, 8, 10);
    const RipReport report = rip_delta(X, 2, 45);
    REQUIRE(report.method == RipMethod::exhaustive);
    REQUIRE(report.supports_checked == 45);
    REQUIRE(report.delta_s >= 0.0);

    // Definitional sandwich on every support, 100 random beta each.
    const double sqrt_n = std::sqrt(8.0);
    for (int a = 0; a < 10; ++a) {
        for (int b = a + 1; b < 10; ++b) {
            for (int k = 0; k < 100; ++k) {
                Vector beta = Vector::Zero(10);
                beta[a] = rng.gaussian();
                beta[b] = rng.gaussian();
                const double lhs = (X * beta).norm() / sqrt_n;
                const double nb = beta.norm();
                REQUIRE(lhs >= (1.0 - report.delta_s) * nb - 1e-9);
                REQUIRE(lhs <= (1.0 + report.delta_s) * nb + 1e-9);
            }
        }
    }

    // The bound is tight on the worst support (independent SVD oracle).
    REQUIRE_THAT(support_deviation_oracle(X, report.worst_support),
                 WithinAbs(report.delta_s, 1e-9));
    double oracle_worst = 0.0;
    for (int a = 0; a < 10; ++a)
        for (int b = a + 1; b < 10; ++b)
            oracle_worst = std::max(oracle_worst, support_deviation_oracle(X, {a, b}));
    REQUIRE_THAT(report.delta_s, WithinAbs(oracle_worst, 1e-9));
}

TEST_CASE("rip sampled path agrees with exhaustive when it covers the pool") {
    // Two duplicated column pairs force delta = 1 on two distinct supports,
    // so missing a single support cannot change the answer.
    Rng rng(403);
    Matrix X = testing::random_matrix(rng, 8, 10);
    for (int j = 0; j < 10; ++j) X.col(j) *= std::sqrt(8.0) / X.col(j).norm();
    X.col(5) = X.col(2);
    X.col(9) = X.col(7);
    const RipReport exhaustive = rip_delta(X, 2, 45);
    REQUIRE(exhaustive.method == RipMethod::exhaustive);
    REQUIRE_THAT(exhaustive.delta_s, WithinAbs(1.0, 1e-12));

    const RipReport sampled = rip_delta(X, 2, 44);
    REQUIRE(sampled.method == RipMethod::sampled);
    REQUIRE(rip_method_name(sampled.method) == "sampled");
    REQUIRE(sampled.supports_checked == 44);
    REQUIRE_THAT(sampled.delta_s, WithinAbs(exhaustive.delta_s, 1e-12));
    // Sampled reports never exceed the exhaustive constant.
    REQUIRE(sampled.delta_s <= exhaustive.delta_s + 1e-12);
}

TEST_CASE("rip delta argument validation") {
    const Matrix X = Matrix::Identity(3, 3);
    REQUIRE_THROWS_AS(rip_delta(X, 0, 10), ArgumentError);
    REQUIRE_THROWS_AS(rip_delta(X, 4, 10), ArgumentError);
    REQUIRE_THROWS_AS(rip_delta(X, 2, 0), ArgumentError);
}

TEST_CASE("compatibility constant equals one on identity designs") {
    const int p = 5;
    const Matrix X = std::sqrt(5.0) * Matrix::Identity(p, p);
    const std::vector<int> T{1, 3};
    for (double c0 : {1.0, 2.0}) {
        const ConeConstantReport report = compatibility_constant(X, T, c0, 3);
        REQUIRE_THAT(report.value, WithinAbs(1.0, 1e-6));
        REQUIRE(report.c0 == c0);
        REQUIRE(report.certificate_side == "upper_estimate");

        // Minimizer shape: constant-sign equal magnitudes on T, zero off T.
        const Vector& u = report.minimizer_u;
        REQUIRE_THAT(std::fabs(u[1]), WithinAbs(std::fabs(u[3]), 1e-6));
        REQUIRE(u[1] * u[3] > 0.0);
        for (int j : {0, 2, 4}) REQUIRE_THAT(u[j], WithinAbs(0.0, 1e-6));

        // Random-restart oracle: no feasible point does better than 1 - 1e-6.
        Rng rng(404);
        double oracle_min = kInf;
        for (int k = 0; k < 2000; ++k) {
            Vector cand = testing::random_vector(rng, p);
            const double denom = compat_denominator(cand, T, c0);
            if (denom < 1e-6) continue;
            oracle_min = std::min(oracle_min, compat_value_of(X, cand, T, c0));
        }
        REQUIRE(oracle_min >= 1.0 - 1e-6);
        REQUIRE(report.value <= oracle_min + 1e-6);
    }
}

TEST_CASE("compatibility constant reduces to a column norm when p is one") {
    Rng rng(405);
    const Matrix X = testing::random_matrix(rng, 3, 1);
    const ConeConstantReport report = compatibility_constant(X, {0}, 1.0, 2);
    REQUIRE_THAT(report.value, WithinAbs(X.col(0).norm() / std::sqrt(3.0), 1e-9));
}

TEST_CASE("compatibility constant with duplicated columns") {
    // X has columns sqrt(n) * [e1, e2, e1].
    const int n = 3;
    Matrix X = std::sqrt(static_cast<double>(n)) * Matrix::Identity(n, 3);
    X.col(2) = X.col(0);

    SECTION("duplicate across the boundary leaves the constant at one") {
        // With T = {0} and the duplicate at index 2 outside T, the direction
        // u_0 = t + 1, u_2 = -t keeps the ratio constant at 1, and no feasible
        // direction does better, so the true infimum is 1 (not 0).
        const ConeConstantReport report = compatibility_constant(X, {0}, 1.0, 4);
        REQUIRE(report.value >= 1.0 - 1e-9);
        REQUIRE(report.value <= 1.0 + 1e-3);

        Rng rng(406);
        double oracle_min = kInf;
        for (int k = 0; k < 5000; ++k) {
            Vector cand = testing::random_vector(rng, 3);
            if (rng.uniform() < 0.5) cand[2] = -cand[0] + 0.3 * rng.gaussian();
            const double denom = compat_denominator(cand, {0}, 1.0);
            if (denom < 1e-6) continue;
            oracle_min = std::min(oracle_min, compat_value_of(X, cand, {0}, 1.0));
        }
        REQUIRE(oracle_min >= 1.0 - 1e-9);
    }

    SECTION("duplicate inside T collapses the constant to zero") {
        const ConeConstantReport report = compatibility_constant(X, {0, 2}, 1.0, 2);
        REQUIRE(report.value <= 1e-6);
        REQUIRE(report.value >= 0.0);
    }
}

TEST_CASE("cone reports are feasible and reproducible") {
    Rng rng(407);
    const Matrix X = testing::random_matrix(rng, 6, 8);

    SECTION("compatibility") {
        const std::vector<int> T{1, 4, 6};
        const double c0 = 1.7;
        const ConeConstantReport report = compatibility_constant(X, T, c0, 4);
        const double denom = compat_denominator(report.minimizer_u, T, c0);
        REQUIRE_THAT(denom, WithinAbs(1.0, 1e-9));
        REQUIRE_THAT(compat_value_of(X, report.minimizer_u, T, c0),
                     WithinAbs(report.value, 1e-8));
    }

    SECTION("restricted eigenvalue") {
        const int s = 2;
        const double c0 = 1.5;
        const ConeConstantReport report = re_constant(X, s, c0, 6);
        const Vector& alpha = report.minimizer_u;
        REQUIRE_THAT(alpha.norm(), WithinAbs(1.0, 1e-9));
        REQUIRE(re_tail(alpha, s) <=
                c0 * std::sqrt(static_cast<double>(s)) * alpha.norm() + 1e-9);
        const double reproduced =
            (X * alpha).norm() / (std::sqrt(6.0) * alpha.norm());
        REQUIRE_THAT(reproduced, WithinAbs(report.value, 1e-8));
    }
}

TEST_CASE("re constant equals one on identity designs") {
    const Matrix X = std::sqrt(6.0) * Matrix::Identity(6, 6);
    const ConeConstantReport report = re_constant(X, 2, 3.0, 4);
    REQUIRE_THAT(report.value, WithinAbs(1.0, 1e-6));
    REQUIRE(report.certificate_side == "upper_estimate");
}

TEST_CASE("re constant finds a zero column through the cone") {
    // alpha = e2 is cone-feasible (its tail sum is 0), so kappa = 0.
    Rng rng(408);
    Matrix X = testing::random_matrix(rng, 4, 2);
    X.col(1).setZero();
    const ConeConstantReport report = re_constant(X, 1, 1.0, 2);
    REQUIRE_THAT(report.value, WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(std::fabs(report.minimizer_u[1]), WithinAbs(1.0, 1e-12));
}

TEST_CASE("re and rip estimates are cross-consistent on random designs") {
    Rng rng(409);
    const Matrix X = testing::random_matrix(rng, 20, 40);
    const double gamma = 0.5;
    const double c0 = (1.0 + gamma + std::sqrt(3.0)) / gamma;
    const ConeConstantReport re = re_constant(X, 3, c0, 6);
    const RipReport rip = rip_delta(X, 3, 12000);
    REQUIRE(rip.method == RipMethod::exhaustive);
    REQUIRE(re.value >= 0.0);
    REQUIRE(std::isfinite(re.value));
    // For the true constants kappa <= 1 - delta_s; our kappa is only an upper
    // estimate, so the comparison is advisory and never asserted.
    if (re.value > (1.0 - rip.delta_s) + 1e-6) {
        WARN("re estimate " << re.value << " exceeds 1 - delta_s = "
                            << 1.0 - rip.delta_s
                            << "; the re search likely missed the minimizer");
    }

    // On the identity the chain holds with exact constants.
    const Matrix id = std::sqrt(8.0) * Matrix::Identity(8, 8);
    const ConeConstantReport re_id = re_constant(id, 2, c0, 3);
    const RipReport rip_id = rip_delta(id, 2, 100);
    REQUIRE(re_id.value <= (1.0 - rip_id.delta_s) + 1e-6);
}

TEST_CASE("cone constant argument validation") {
    const Matrix X = Matrix::Identity(3, 3);
    REQUIRE_THROWS_AS(compatibility_constant(X, {}, 1.0, 2), ArgumentError);
    REQUIRE_THROWS_AS(compatibility_constant(X, {0, 0}, 1.0, 2), ArgumentError);
    REQUIRE_THROWS_AS(compatibility_constant(X, {3}, 1.0, 2), ArgumentError);
    REQUIRE_THROWS_AS(compatibility_constant(X, {0}, 0.5, 2), ArgumentError);
    REQUIRE_THROWS_AS(compatibility_constant(X, {0}, 1.0, 0), ArgumentError);
    REQUIRE_THROWS_AS(re_constant(X, 0, 1.0, 2), ArgumentError);
    REQUIRE_THROWS_AS(re_constant(X, 4, 1.0, 2), ArgumentError);
    REQUIRE_THROWS_AS(re_constant(X, 1, 0.0, 2), ArgumentError);
    REQUIRE_THROWS_AS(re_constant(X, 1, 1.0, 0), ArgumentError);
}

TEST_CASE("lasso constants arithmetic") {
    const Matrix X = Matrix::Identity(10, 100);

    SECTION("gamma one gives the closed-form c0") {
        const LassoConstants c = lasso_constants(X, 4, 1.0, 1.0, 1.0, 1.0, 0.0);
        REQUIRE_THAT(c.c0, WithinAbs(2.0 + std::sqrt(3.0), 1e-12));
        REQUIRE(c.gamma == 1.0);
    }

    SECTION("large lambda limit of C bar") {
        const int s = 4;
        const LassoConstants c = lasso_constants(X, s, 1.0, 1.0, 1e12, 1.0, 0.0);
        const double log_term = std::log(9.0 * std::numbers::e * 100.0 / s);
        REQUIRE_THAT(c.C_bar, WithinAbs(1.0 + std::sqrt(3.0) / std::sqrt(log_term), 1e-6));
        REQUIRE_THAT(c.C_under, WithinAbs(1.0, 1e-12));
    }

    SECTION("threshold formula") {
        const int s = 3;
        const double gamma = 0.5, sigma = 2.0, delta = 0.1;
        const LassoConstants c = lasso_constants(X, s, gamma, sigma, 1.0, 0.8, delta);
        const double log_term = std::log(9.0 * std::numbers::e * 100.0 / s);
        const double expect =
            sigma * (1.0 + gamma) * (1.0 + delta) * (1.0 + std::sqrt(2.0 * log_term));
        REQUIRE_THAT(c.lambda_threshold, WithinAbs(expect, 1e-10));
        REQUIRE_THAT(c.C_under, WithinAbs(sigma / (1.0 + delta), 1e-12));
    }

    SECTION("C bar matches its definition") {
        const int s = 5;
        const double sigma = 1.3, lam = 2.5, kappa = 0.7;
        const LassoConstants c = lasso_constants(X, s, 1.0, sigma, lam, kappa, 0.2);
        const double log_term = std::log(9.0 * std::numbers::e * 100.0 / s);
        const double expect =
            sigma / kappa *
            (1.0 +
             sigma * kappa * (std::sqrt(5.0) + 2.0 * std::sqrt(std::log(3.0))) /
                 (lam * std::sqrt(5.0)) +
             std::sqrt(3.0) / std::sqrt(log_term));
        REQUIRE_THAT(c.C_bar, WithinAbs(expect, 1e-10));
    }

    SECTION("domain guards") {
        REQUIRE_THROWS_AS(lasso_constants(X, 4, 0.0, 1.0, 1.0, 1.0, 0.0), ArgumentError);
        REQUIRE_THROWS_AS(lasso_constants(X, 4, 1.0, 0.0, 1.0, 1.0, 0.0), ArgumentError);
        REQUIRE_THROWS_AS(lasso_constants(X, 4, 1.0, 1.0, 0.0, 1.0, 0.0), ArgumentError);
        REQUIRE_THROWS_AS(lasso_constants(X, 4, 1.0, 1.0, 1.0, 0.0, 0.0), ArgumentError);
        REQUIRE_THROWS_AS(lasso_constants(X, 4, 1.0, 1.0, 1.0, 1.0, -0.1), ArgumentError);
        REQUIRE_THROWS_AS(lasso_constants(X, 0, 1.0, 1.0, 1.0, 1.0, 0.0), ArgumentError);
        // s so large that 9 e p / s <= 1 trips the log-domain guard.
        const Matrix tiny = Matrix::Identity(1, 1);
        REQUIRE_THROWS_AS(lasso_constants(tiny, 25, 1.0, 1.0, 1.0, 1.0, 0.0),
                          ArgumentError);
    }
}

TEST_CASE("compatibility adversary on the one-dimensional identity design") {
    Matrix X(1, 1);
    X << 1.0;
    const CompatAdversary adv = construct_compatibility_adversary(X, {0}, 1.0, 1.0);
    REQUIRE_THAT(adv.phi, WithinAbs(1.0, 1e-9));
    REQUIRE_THAT(adv.u[0], WithinAbs(1.0, 1e-9));
    const double q_oracle = normal_quantile(0.995);  // chi quantile, 1 dof, 0.99
    REQUIRE_THAT(adv.q, WithinAbs(q_oracle, 1e-8));
    REQUIRE_THAT(adv.gamma, WithinAbs(1.0 / 200.0, 1e-12));
    const double t0_expect = (adv.q + 1.0) * (adv.q + 1.0) * 200.0;
    REQUIRE_THAT(adv.t0, WithinAbs(t0_expect, 1e-6 * t0_expect));
    REQUIRE_THAT(adv.beta_star[0], WithinAbs(-adv.t0, 1e-9 * adv.t0));
}

TEST_CASE("compatibility adversary construction in higher dimensions") {
    Rng rng(410);
    const Matrix X = orthonormal_scaled_design(rng, 6, 5);
    const std::vector<int> T{0, 2};
    const CompatAdversary adv = construct_compatibility_adversary(X, T, 0.7, 1.5, 0.95);
    REQUIRE(adv.phi > 0.0);
    REQUIRE_THAT((X * adv.u).norm(), WithinAbs(1.0, 1e-9));
    REQUIRE_THAT(adv.q, WithinAbs(1.5 * chi_quantile(0.95, 6.0), 1e-10));
    const double sqrt_t = std::sqrt(2.0);
    REQUIRE_THAT(adv.gamma, WithinAbs(0.7 * sqrt_t / (200.0 * adv.phi), 1e-12));
    const double reach = adv.q + 0.7 * sqrt_t / adv.phi;
    REQUIRE_THAT(adv.t0, WithinAbs(reach * reach / adv.gamma, 1e-8 * adv.t0));
    // beta* lives on T with the prescribed values.
    for (int j = 0; j < 5; ++j) {
        if (j == 0 || j == 2)
            REQUIRE_THAT(adv.beta_star[j], WithinAbs(-adv.t0 * adv.u[j], 1e-9));
        else
            REQUIRE(adv.beta_star[j] == 0.0);
    }
}

TEST_CASE("compatibility adversary rejects degenerate designs") {
    Matrix X = Matrix::Identity(2, 2);
    X.col(1) = X.col(0);
    REQUIRE_THROWS_AS(construct_compatibility_adversary(X, {0, 1}, 1.0, 1.0),
                      ArgumentError);
    REQUIRE_THROWS_AS(construct_compatibility_adversary(Matrix::Identity(2, 2), {0},
                                                        0.0, 1.0),
                      ArgumentError);
}

namespace {

void check_packing(const VgPacking& pack) {
    const double bound =
        0.5 * pack.d * std::log(static_cast<double>(pack.p) / (5.0 * pack.d));
    REQUIRE(pack.log_card >= bound - 1e-12);
    REQUIRE_THAT(pack.log_card,
                 WithinAbs(std::log(static_cast<double>(pack.omega.size())), 1e-12));
    for (const Vector& w : pack.omega) {
        REQUIRE(w.size() == pack.p);
        double weight = 0.0;
        for (int j = 0; j < w.size(); ++j) {
            REQUIRE((w[j] == 0.0 || w[j] == 1.0));
            weight += w[j];
        }
        REQUIRE(weight == static_cast<double>(pack.d));
    }
    for (std::size_t a = 0; a < pack.omega.size(); ++a)
        for (std::size_t b = a + 1; b < pack.omega.size(); ++b)
            REQUIRE((pack.omega[a] - pack.omega[b]).squaredNorm() >
                    static_cast<double>(pack.d));
}

}  // namespace

TEST_CASE("vg packing meets the cardinality bound and distance condition") {
    SECTION("p 10 d 1") {
        const VgPacking pack = vg_packing(10, 1);
        // Stops as soon as the bound exp((1/2) log 2) ~ 1.414 is met.
        REQUIRE(pack.omega.size() == 2);
        check_packing(pack);
    }
    SECTION("p 25 d 2") {
        const VgPacking pack = vg_packing(25, 2);
        REQUIRE(pack.omega.size() == 3);
        check_packing(pack);
    }
    SECTION("p 100 d 5") {
        const VgPacking pack = vg_packing(100, 5);
        REQUIRE(pack.omega.size() >= 32);
        check_packing(pack);
    }
    SECTION("p 200 d 10") {
        const VgPacking pack = vg_packing(200, 10);
        REQUIRE(pack.omega.size() >= 1024);
        check_packing(pack);
    }
}

TEST_CASE("vg packing is deterministic") {
    const VgPacking a = vg_packing(25, 2);
    const VgPacking b = vg_packing(25, 2);
    REQUIRE(a.omega.size() == b.omega.size());
    for (std::size_t i = 0; i < a.omega.size(); ++i)
        REQUIRE((a.omega[i].array() == b.omega[i].array()).all());
}

TEST_CASE("vg packing argument validation") {
    REQUIRE_THROWS_AS(vg_packing(10, 2), ArgumentError);
    REQUIRE_THROWS_AS(vg_packing(10, 0), ArgumentError);
    REQUIRE_THROWS_AS(vg_packing(5, 1), ArgumentError);
}
