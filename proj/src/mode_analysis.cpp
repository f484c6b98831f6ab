#include "dhelm/mode_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dhelm {

namespace {

/// exp(-lambda * dist) with a guard: only decaying arguments may ever be
/// evaluated (Re lambda >= 0 and dist >= 0 by construction).
cx decaying_exp(cx lambda, double dist) {
    const double re = lambda.real() * dist;
    if (re < -1e-12 * (1.0 + std::abs(re)))
        throw std::logic_error("mode assembly produced a growing exponential");
    return std::exp(-lambda * dist);
}

struct Row {
    cx ca; ///< coefficient of A
    cx cb; ///< coefficient of B
};

/// Rows of the 2x2 trace system of subdomain j in the scaled basis.
/// e(a_j) = A + E_w B, e(b_j) = E_w A + B, e'(a_j) = -lambda A + lambda E_w B,
/// e'(b_j) = -lambda E_w A + lambda B, with E_w = exp(-lambda w), w = b_j - a_j.
Row left_row(const ModeProblem& mode, cx e_w, bool dirichlet) {
    if (dirichlet) return {cx(1.0, 0.0), e_w};
    const cx l = mode.lambda, s = mode.coeff.sqrt_eta;
    return {l + s, (s - l) * e_w};
}

Row right_row(const ModeProblem& mode, cx e_w, bool dirichlet) {
    if (dirichlet) return {e_w, cx(1.0, 0.0)};
    const cx l = mode.lambda, s = mode.coeff.sqrt_eta;
    return {(s - l) * e_w, l + s};
}

struct LocalSolveOutcome {
    LocalCoefficients coeffs;
    bool singular = false;
};

LocalSolveOutcome try_local_solve(const ModeProblem& mode, int j, cx g_left, cx g_right) {
    const auto& d = mode.decomp;
    if (j < 1 || j > d.n_subdomains)
        throw std::invalid_argument("local_solve: subdomain index out of range");

    const double w = d.b(j) - d.a(j);
    const cx e_w = decaying_exp(mode.lambda, w);
    const bool dir_left = (j == 1) && (mode.bc.left_x == EdgeCondition::Dirichlet);
    const bool dir_right = (j == d.n_subdomains) && (mode.bc.right_x == EdgeCondition::Dirichlet);
    const Row top = left_row(mode, e_w, dir_left);
    const Row bot = right_row(mode, e_w, dir_right);
    const cx rhs_top = dir_left ? cx(0.0, 0.0) : g_left;
    const cx rhs_bot = dir_right ? cx(0.0, 0.0) : g_right;

    const cx det = top.ca * bot.cb - top.cb * bot.ca;
    const double n_top = std::abs(top.ca) + std::abs(top.cb);
    const double n_bot = std::abs(bot.ca) + std::abs(bot.cb);
    if (std::abs(det) < 1e-13 * n_top * n_bot || det == cx(0.0, 0.0))
        return {{cx(0.0, 0.0), cx(0.0, 0.0)}, true};

    const cx a = (rhs_top * bot.cb - top.cb * rhs_bot) / det;
    const cx b = (top.ca * rhs_bot - rhs_top * bot.ca) / det;
    return {{a, b}, false};
}

} // namespace

cx lambda_of(double xi, const DampedCoefficient& coeff) {
    if (!(xi >= 0.0) || !std::isfinite(xi))
        throw std::invalid_argument("lambda_of: xi must be finite and >= 0");
    const cx lambda = principal_sqrt(cx(xi * xi, 0.0) + coeff.eta);
    if (std::abs(lambda) < 1e-12)
        throw DegenerateModeError("lambda_of: cut-off mode, |lambda| < 1e-12");
    return lambda;
}

ModeProblem make_mode_problem(const DampedCoefficient& coeff, const Decomposition& decomp,
                              const BoundaryConfig& bc, double xi) {
    if (decomp.n_subdomains < 2 ||
        decomp.intervals.size() != static_cast<std::size_t>(decomp.n_subdomains))
        throw std::invalid_argument(
            "make_mode_problem: decomposition not built by build_decomposition");
    try {
        return ModeProblem{xi, xi, false, lambda_of(xi, coeff), coeff, decomp, bc};
    } catch (const DegenerateModeError&) {
        const double nudged = xi + 1e-8 * std::max(1.0, coeff.params.omega);
        return ModeProblem{xi, nudged, true, lambda_of(nudged, coeff), coeff, decomp, bc};
    }
}

LocalCoefficients local_solve(const ModeProblem& mode, int j, cx g_left, cx g_right) {
    const LocalSolveOutcome out = try_local_solve(mode, j, g_left, g_right);
    if (out.singular)
        throw SingularLocalSolveError("local_solve: singular trace system in subdomain " +
                                      std::to_string(j));
    return out.coeffs;
}

SweepResult apply_schwarz_sweep(const ModeProblem& mode, const std::vector<cx>& g) {
    const int n = mode.decomp.n_subdomains;
    const std::size_t order = static_cast<std::size_t>(2 * n - 2);
    if (g.size() != order)
        throw std::invalid_argument("apply_schwarz_sweep: data vector has wrong length");

    // layout: g_j^left at j-2 for j=2..N, g_j^right at (N-1)+(j-1) for j=1..N-1
    auto idx_left = [n](int j) { return static_cast<std::size_t>(j - 2); };
    auto idx_right = [n](int j) { return static_cast<std::size_t>((n - 1) + (j - 1)); };

    SweepResult result;
    result.data.assign(order, cx(0.0, 0.0));

    const auto& d = mode.decomp;
    const cx l = mode.lambda, s = mode.coeff.sqrt_eta;
    for (int j = 1; j <= n; ++j) {
        const cx gl = (j == 1) ? cx(0.0, 0.0) : g[idx_left(j)];
        const cx gr = (j == n) ? cx(0.0, 0.0) : g[idx_right(j)];
        const LocalSolveOutcome out = try_local_solve(mode, j, gl, gr);
        if (out.singular) {
            result.singular = true;
            continue;
        }
        const cx a = out.coeffs.A, b = out.coeffs.B;
        if (j < n) {
            // outgoing (-d/dx + s) e_j evaluated at the right neighbour's left end
            const double dh = d.a(j + 1) - d.a(j);
            const double dl = d.b(j) - d.a(j + 1);
            result.data[idx_left(j + 1)] =
                (l + s) * decaying_exp(l, dh) * a + (s - l) * decaying_exp(l, dl) * b;
        }
        if (j > 1) {
            // outgoing (d/dx + s) e_j evaluated at the left neighbour's right end
            const double dl = d.b(j - 1) - d.a(j);
            const double dh = d.b(j) - d.b(j - 1);
            result.data[idx_right(j - 1)] =
                (s - l) * decaying_exp(l, dl) * a + (l + s) * decaying_exp(l, dh) * b;
        }
    }
    return result;
}

IterationMatrix assemble_iteration_matrix(const ModeProblem& mode) {
    const int order = 2 * mode.decomp.n_subdomains - 2;
    IterationMatrix out;
    out.matrix = DenseComplexMatrix(order);
    std::vector<cx> unit(static_cast<std::size_t>(order), cx(0.0, 0.0));
    for (int k = 0; k < order; ++k) {
        unit[static_cast<std::size_t>(k)] = cx(1.0, 0.0);
        SweepResult col = apply_schwarz_sweep(mode, unit);
        unit[static_cast<std::size_t>(k)] = cx(0.0, 0.0);
        if (col.singular) {
            out.singular_local_solve = true;
            return out;
        }
        for (int i = 0; i < order; ++i)
            out.matrix.at(i, k) = col.data[static_cast<std::size_t>(i)];
    }
    return out;
}

double convergence_factor(const ModeProblem& mode) {
    const IterationMatrix assembled = assemble_iteration_matrix(mode);
    if (assembled.singular_local_solve) return std::numeric_limits<double>::infinity();
    try {
        return spectral_radius(assembled.matrix);
    } catch (const NoConvergenceError&) {
        return power_iteration_radius(assembled.matrix, 2000, 0x5eedu).radius;
    }
}

ModeRho convergence_factor_at(const DampedCoefficient& coeff, const Decomposition& decomp,
                              const BoundaryConfig& bc, double xi) {
    const ModeProblem mode = make_mode_problem(coeff, decomp, bc, xi);
    ModeRho out;
    out.xi_requested = mode.xi_requested;
    out.xi_used = mode.xi;
    out.xi_perturbed = mode.xi_perturbed;
    if (mode.xi_perturbed) out.note = "xi-perturbed";

    const IterationMatrix assembled = assemble_iteration_matrix(mode);
    if (assembled.singular_local_solve) {
        out.rho = std::numeric_limits<double>::infinity();
        out.diverged = true;
        out.note = out.note.empty() ? "singular-local-solve" : out.note + ";singular-local-solve";
        return out;
    }
    try {
        out.rho = spectral_radius(assembled.matrix);
    } catch (const NoConvergenceError&) {
        out.rho = power_iteration_radius(assembled.matrix, 2000, 0x5eedu).radius;
        out.note = out.note.empty() ? "power-fallback" : out.note + ";power-fallback";
    }
    return out;
}

std::vector<ModeRho> convergence_factor_profile(const DampedCoefficient& coeff,
                                                const Decomposition& decomp,
                                                const BoundaryConfig& bc,
                                                const std::vector<double>& xi_grid) {
    std::vector<ModeRho> out;
    out.reserve(xi_grid.size());
    for (double xi : xi_grid) out.push_back(convergence_factor_at(coeff, decomp, bc, xi));
    return out;
}

std::vector<double> physical_mode_grid(double omega) {
    if (!(omega > 0.0)) throw std::invalid_argument("physical_mode_grid: omega must be positive");
    const int k_max = static_cast<int>(std::ceil(3.0 * omega / M_PI));
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) grid.push_back(k * M_PI);
    return grid;
}

std::vector<double> uniform_scan_grid(double omega, double max_ratio, int points) {
    if (!(omega > 0.0)) throw std::invalid_argument("uniform_scan_grid: omega must be positive");
    if (!(max_ratio > 0.0)) throw std::invalid_argument("uniform_scan_grid: max_ratio must be positive");
    if (points < 1) throw std::invalid_argument("uniform_scan_grid: points must be >= 1");
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(points));
    for (int i = 1; i <= points; ++i) grid.push_back(omega * max_ratio * i / points);
    return grid;
}

ModeRho max_mode_rho(const std::vector<ModeRho>& profile) {
    if (profile.empty()) throw std::invalid_argument("max_mode_rho: empty profile");
    std::size_t best = 0;
    for (std::size_t i = 1; i < profile.size(); ++i)
        if (profile[i].rho > profile[best].rho) best = i;
    return profile[best];
}

} // namespace dhelm
