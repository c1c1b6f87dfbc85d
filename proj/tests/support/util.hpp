#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "riskscope/instance.hpp"
#include "riskscope/rng.hpp"

namespace riskscope::testing {

inline Matrix random_matrix(Rng& rng, int n, int p) {
    Matrix X(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) X(i, j) = rng.gaussian();
    return X;
}

inline Vector random_vector(Rng& rng, int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.gaussian();
    return v;
}

inline Vector sparse_vector(Rng& rng, int p, int nnz, double scale = 1.0) {
    Vector v = Vector::Zero(p);
    for (int k = 0; k < nnz; ++k) {
        const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(p)));
        v[j] = scale * rng.gaussian();
    }
    return v;
}

// Scratch directory for I/O tests; unique per call.
inline std::filesystem::path scratch_dir(const std::string& tag = "io") {
    static int counter = 0;
    auto dir = std::filesystem::temp_directory_path() /
               ("riskscope_test_" + tag + "_" + std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace riskscope::testing
