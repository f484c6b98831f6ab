#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "dhelm/spectra.hpp"
#include "dhelm/util.hpp"

using namespace dhelm;

namespace {

DenseComplexMatrix random_matrix(int n, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    DenseComplexMatrix m(n);
    for (auto& e : m.entries) e = scale * rng.complex_normal();
    return m;
}

/// Test-only dense solver (partial-pivoted Gaussian elimination) used to form
/// P^{-1} * X oracles independently of the production eigensolver.
std::vector<cx> solve_dense(DenseComplexMatrix a, std::vector<std::vector<cx>> rhs_cols) {
    const int n = a.order;
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;

    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a.at(i, k)) > std::abs(a.at(p, k))) p = i;
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(a.at(k, j), a.at(p, j));
            for (auto& col : rhs_cols)
                std::swap(col[static_cast<std::size_t>(k)], col[static_cast<std::size_t>(p)]);
        }
        REQUIRE(std::abs(a.at(k, k)) > 0.0);
        for (int i = k + 1; i < n; ++i) {
            const cx m = a.at(i, k) / a.at(k, k);
            if (m == cx(0.0, 0.0)) continue;
            for (int j = k; j < n; ++j) a.at(i, j) -= m * a.at(k, j);
            for (auto& col : rhs_cols)
                col[static_cast<std::size_t>(i)] -= m * col[static_cast<std::size_t>(k)];
        }
    }
    std::vector<cx> flat;
    for (auto& col : rhs_cols) {
        for (int k = n - 1; k >= 0; --k) {
            cx acc = col[static_cast<std::size_t>(k)];
            for (int j = k + 1; j < n; ++j) acc -= a.at(k, j) * col[static_cast<std::size_t>(j)];
            col[static_cast<std::size_t>(k)] = acc / a.at(k, k);
        }
        flat.insert(flat.end(), col.begin(), col.end());
    }
    return flat;
}

/// A = P^{-1} D P for a diagonally dominant random P: known spectrum.
DenseComplexMatrix similarity_of_diagonal(const std::vector<cx>& diag, std::uint64_t seed) {
    const int n = static_cast<int>(diag.size());
    Rng rng(seed);
    DenseComplexMatrix p(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            p.at(i, j) = (i == j) ? cx(4.0, 0.0) + 0.3 * rng.complex_normal()
                                  : 0.3 * rng.complex_normal();
    // columns of D*P
    std::vector<std::vector<cx>> cols(static_cast<std::size_t>(n),
                                      std::vector<cx>(static_cast<std::size_t>(n)));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            cols[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] =
                diag[static_cast<std::size_t>(i)] * p.at(i, j);
    const std::vector<cx> solved = solve_dense(p, cols);
    DenseComplexMatrix a(n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            a.at(i, j) = solved[static_cast<std::size_t>(j) * n + i];
    return a;
}

void check_spectrum(const DenseComplexMatrix& a, std::vector<cx> expected, double tol) {
    std::vector<cx> got = eigenvalues(a);
    REQUIRE(got.size() == expected.size());
    auto by_parts = [](cx l, cx r) {
        if (l.real() != r.real()) return l.real() < r.real();
        return l.imag() < r.imag();
    };
    std::sort(got.begin(), got.end(), by_parts);
    std::sort(expected.begin(), expected.end(), by_parts);
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(std::abs(got[i] - expected[i]) < tol);
}

} // namespace

TEST_CASE("diagonal and triangular spectra") {
    DenseComplexMatrix ident(2);
    ident.at(0, 0) = ident.at(1, 1) = cx(1.0, 0.0);
    CHECK(spectral_radius(ident) == doctest::Approx(1.0).epsilon(1e-14));

    DenseComplexMatrix d(2);
    d.at(0, 0) = cx(0.5, 0.0);
    d.at(1, 1) = cx(0.0, -2.0);
    CHECK(spectral_radius(d) == doctest::Approx(2.0).epsilon(1e-14));

    DenseComplexMatrix one(1);
    one.at(0, 0) = cx(-3.0, 4.0);
    CHECK(spectral_radius(one) == doctest::Approx(5.0).epsilon(1e-14));

    DenseComplexMatrix nil(3); // strictly upper triangular: nilpotent
    nil.at(0, 1) = cx(2.0, 1.0);
    nil.at(0, 2) = cx(-1.0, 0.5);
    nil.at(1, 2) = cx(3.0, -2.0);
    CHECK(spectral_radius(nil) == 0.0);
}

TEST_CASE("known spectra through random similarity transforms") {
    std::vector<cx> diag;
    for (int k = 0; k < 12; ++k)
        diag.push_back(cx(0.7 * k - 3.0, 0.4 * ((k % 3) - 1) + 0.05 * k));
    const DenseComplexMatrix a = similarity_of_diagonal(diag, 99);
    double expected_radius = 0.0;
    for (cx z : diag) expected_radius = std::max(expected_radius, std::abs(z));
    check_spectrum(a, diag, 1e-9);
    CHECK(spectral_radius(a) == doctest::Approx(expected_radius).epsilon(1e-10));
}

TEST_CASE("similarity invariance of the spectral radius") {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        const DenseComplexMatrix m = random_matrix(8, seed);
        const double r0 = spectral_radius(m);

        // well-conditioned P: dominant diagonal keeps cond(P) small
        Rng rng(seed + 1000);
        const int n = m.order;
        DenseComplexMatrix p(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                p.at(i, j) = (i == j) ? cx(5.0, 0.0) : 0.2 * rng.complex_normal();
        // columns of M*P, then P^{-1} (M P)
        std::vector<std::vector<cx>> cols;
        for (int j = 0; j < n; ++j) {
            std::vector<cx> c(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                cx acc(0.0, 0.0);
                for (int k = 0; k < n; ++k) acc += m.at(i, k) * p.at(k, j);
                c[static_cast<std::size_t>(i)] = acc;
            }
            cols.push_back(std::move(c));
        }
        const std::vector<cx> solved = solve_dense(p, cols);
        DenseComplexMatrix t(n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                t.at(i, j) = solved[static_cast<std::size_t>(j) * n + i];

        CHECK(spectral_radius(t) == doctest::Approx(r0).epsilon(1e-8));
    }
}

TEST_CASE("scaling and norm bound") {
    const DenseComplexMatrix m = random_matrix(10, 21);
    const double r = spectral_radius(m);
    const cx c(1.5, -2.0);
    DenseComplexMatrix cm = m;
    for (auto& e : cm.entries) e *= c;
    CHECK(spectral_radius(cm) == doctest::Approx(std::abs(c) * r).epsilon(1e-12));
    CHECK(r <= max_row_sum_norm(m) * (1.0 + 1e-12));
}

TEST_CASE("badly scaled similarity handled by balancing") {
    std::vector<cx> diag = {cx(1.0, 0.5), cx(-2.0, 0.0), cx(0.3, -1.2), cx(2.5, 2.5)};
    DenseComplexMatrix a = similarity_of_diagonal(diag, 5);
    // scale rows/cols by a wild diagonal: spectrum is unchanged
    const double d[4] = {1e7, 1.0, 1e-7, 1e3};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a.at(i, j) *= d[i] / d[j];
    check_spectrum(a, diag, 1e-7);
}

TEST_CASE("power iteration cross-oracle on generic matrices") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const DenseComplexMatrix m = random_matrix(6, seed * 7);
        const double qr = spectral_radius(m);
        PowerIterationResult pi = power_iteration_radius(m, 600, 5);
        if (pi.stagnated) pi = power_iteration_radius(m, 600, 6);
        REQUIRE_FALSE(pi.stagnated);
        CHECK(pi.radius == doctest::Approx(qr).epsilon(1e-6));
    }
}

TEST_CASE("power iteration basics") {
    DenseComplexMatrix ident(3);
    for (int i = 0; i < 3; ++i) ident.at(i, i) = cx(1.0, 0.0);
    const auto one = power_iteration_radius(ident, 1, 42);
    CHECK(one.radius == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_FALSE(one.stagnated);

    DenseComplexMatrix nil(3);
    nil.at(0, 1) = cx(1.0, 0.0);
    nil.at(1, 2) = cx(0.5, 0.5);
    const auto zero = power_iteration_radius(nil, 50, 42);
    CHECK(zero.radius == 0.0);

    CHECK_THROWS_AS(power_iteration_radius(ident, 0, 1), std::invalid_argument);
}

TEST_CASE("power iteration resolves a dominant plus/minus pair") {
    // eigenvalues +-1: plain iteration oscillates, the squared pass settles
    DenseComplexMatrix m(2);
    m.at(0, 1) = cx(2.0, 0.0);
    m.at(1, 0) = cx(0.5, 0.0);
    const auto pi = power_iteration_radius(m, 200, 3);
    CHECK_FALSE(pi.stagnated);
    CHECK(pi.radius == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(spectral_radius(m) == doctest::Approx(1.0).epsilon(1e-12));
}
