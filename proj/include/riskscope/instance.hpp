#pragma once

#include <cstdint>
#include <variant>

#include "riskscope/errors.hpp"
#include "riskscope/penalty.hpp"
#include "riskscope/rng.hpp"
#include "riskscope/types.hpp"

namespace riskscope {

// Noise is either a fixed vector or an isotropic Gaussian N(0, sigma^2 I_n)
// materialized deterministically from a seed.
struct FixedNoise {
    Vector values;
};

struct GaussianNoise {
    double sigma = 1.0;
    std::uint64_t seed = 0;
};

using NoiseSpec = std::variant<FixedNoise, GaussianNoise>;

// y = X beta_star + eps; the estimator minimizes ||X b - y||^2 + 2 h(b).
struct ProblemInstance {
    Matrix X;
    Vector beta_star;
    NoiseSpec noise = GaussianNoise{};
    PenaltySpec penalty = ZeroPenalty{};

    int n() const { return static_cast<int>(X.rows()); }
    int p() const { return static_cast<int>(X.cols()); }
};

inline void validate_instance(const ProblemInstance& inst) {
    if (inst.X.rows() < 1 || inst.X.cols() < 1)
        throw ArgumentError("instance: X must be nonempty");
    if (inst.beta_star.size() != inst.p())
        throw ArgumentError("instance: beta_star length does not match X columns");
    if (!inst.X.allFinite()) throw ArgumentError("instance: X has non-finite entries");
    if (!inst.beta_star.allFinite())
        throw ArgumentError("instance: beta_star has non-finite entries");
    if (const auto* fixed = std::get_if<FixedNoise>(&inst.noise)) {
        if (fixed->values.size() != inst.n())
            throw ArgumentError("instance: fixed noise length does not match X rows");
    } else {
        const auto& g = std::get<GaussianNoise>(inst.noise);
        if (!(g.sigma >= 0.0)) throw ArgumentError("instance: noise sigma must be nonnegative");
    }
    validate_penalty(inst.penalty, inst.p(), inst.n());
}

// Draws the noise vector: the fixed values, or sigma * N(0, I_n) from the
// stored seed (bit-identical across calls and platforms).
inline Vector materialize_noise(const NoiseSpec& noise, int n) {
    if (const auto* fixed = std::get_if<FixedNoise>(&noise)) {
        if (fixed->values.size() != n)
            throw ArgumentError("materialize_noise: fixed noise length does not match n");
        return fixed->values;
    }
    const auto& g = std::get<GaussianNoise>(noise);
    Rng rng(g.seed);
    Vector eps(n);
    for (int i = 0; i < n; ++i) eps[i] = g.sigma * rng.gaussian();
    return eps;
}

inline Vector materialize_noise(const ProblemInstance& inst) {
    return materialize_noise(inst.noise, inst.n());
}

inline Vector response(const ProblemInstance& inst, const Vector& eps) {
    if (eps.size() != inst.n())
        throw ArgumentError("response: eps length does not match X rows");
    return inst.X * inst.beta_star + eps;
}

inline Vector response(const ProblemInstance& inst) {
    return response(inst, materialize_noise(inst));
}

}  // namespace riskscope
