#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dhelm/util.hpp"

namespace dhelm {

struct NoConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense complex matrix, row-major.
struct DenseComplexMatrix {
    int order = 0;
    std::vector<cx> entries;

    DenseComplexMatrix() = default;
    explicit DenseComplexMatrix(int n) : order(n), entries(static_cast<std::size_t>(n) * n) {}

    cx& at(int i, int j) { return entries[static_cast<std::size_t>(i) * order + j]; }
    const cx& at(int i, int j) const { return entries[static_cast<std::size_t>(i) * order + j]; }

    std::vector<cx> apply(const std::vector<cx>& x) const;
};

double max_row_sum_norm(const DenseComplexMatrix& m);

/// All eigenvalues via balancing, Householder reduction to Hessenberg form
/// and shifted QR iteration. Throws NoConvergenceError if the QR iteration
/// exceeds 30 n sweeps.
std::vector<cx> eigenvalues(DenseComplexMatrix m);

/// max |lambda_i|. Every call cross-checks the result against the
/// max-row-sum norm bound and throws std::logic_error on violation.
double spectral_radius(const DenseComplexMatrix& m);

struct PowerIterationResult {
    double radius = 0.0;
    /// True when the Rayleigh-quotient estimates failed to settle, both on
    /// the matrix itself and on its square (the squared pass resolves the
    /// common case of a dominant +/- eigenvalue pair).
    bool stagnated = false;
};

/// Seeded power iteration estimate of the dominant eigenvalue magnitude.
/// Deterministic given the seed.
PowerIterationResult power_iteration_radius(const DenseComplexMatrix& m, int iters,
                                            std::uint64_t seed);

} // namespace dhelm
