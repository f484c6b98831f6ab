#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "dhelm/boundary.hpp"
#include "dhelm/geometry.hpp"
#include "dhelm/model.hpp"
#include "dhelm/spectra.hpp"

namespace dhelm {

/// Thrown by lambda_of for cut-off modes where the exponent underflows and the
/// two-sided exponential basis degenerates to linear functions.
class DegenerateModeError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Thrown by local_solve when a subdomain's 2x2 trace system is (numerically)
/// singular — a subdomain resonance. Sweeps report the mode as divergent
/// instead of propagating this.
class SingularLocalSolveError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// One lateral Fourier mode of the strip-decomposed problem. In each
/// subdomain the mode solves e'' = lambda^2 e, and the iteration acts on the
/// stacked interface Robin data.
struct ModeProblem {
    double xi_requested = 0.0; ///< lateral frequency as asked for
    double xi = 0.0;           ///< frequency actually used (see xi_perturbed)
    bool xi_perturbed = false; ///< true when a cut-off mode was nudged off the degeneracy
    cx lambda;                 ///< principal_sqrt(xi^2 + eta), Re >= 0
    DampedCoefficient coeff;
    Decomposition decomp;
    BoundaryConfig bc;
};

/// Exponent of the mode's x-dependence: principal_sqrt(xi^2 + eta).
/// Throws DegenerateModeError when |lambda| < 1e-12 (cut-off mode).
cx lambda_of(double xi, const DampedCoefficient& coeff);

/// Builds a ModeProblem, transparently nudging xi by 1e-8 * max(1, omega)
/// when the requested frequency sits on a cut-off (recorded in xi_perturbed).
ModeProblem make_mode_problem(const DampedCoefficient& coeff, const Decomposition& decomp,
                              const BoundaryConfig& bc, double xi);

/// Coefficients of the scaled two-sided basis
///   e_j(x) = A * exp(-lambda (x - a_j)) + B * exp(-lambda (b_j - x)),
/// chosen so every stored exponential has magnitude <= 1.
struct LocalCoefficients {
    cx A;
    cx B;
};

/// Solves subdomain j's 2x2 trace system for incoming Robin data
/// (-d/dx + s) e = g_left at a_j and (d/dx + s) e = g_right at b_j,
/// with s = sqrt(eta). Outer edges use the homogeneous outer condition from
/// the BoundaryConfig instead (Dirichlet rows e = 0, or impedance with g = 0).
/// j is 1-based. Throws SingularLocalSolveError near subdomain resonances.
LocalCoefficients local_solve(const ModeProblem& mode, int j, cx g_left, cx g_right);

/// Result of one parallel (Jacobi) sweep over all subdomains.
struct SweepResult {
    std::vector<cx> data;  ///< new stacked interface data, same layout as input
    bool singular = false; ///< some local solve was singular; data not meaningful
};

/// Applies one parallel Schwarz sweep to the stacked interface data
/// [g_2^left .. g_N^left, g_1^right .. g_{N-1}^right] (length 2N-2).
SweepResult apply_schwarz_sweep(const ModeProblem& mode, const std::vector<cx>& g);

struct IterationMatrix {
    DenseComplexMatrix matrix;        ///< order 2N-2
    bool singular_local_solve = false; ///< mode is flagged divergent when set
};

/// Assembles the interface iteration matrix column by column by sweeping unit
/// data vectors.
IterationMatrix assemble_iteration_matrix(const ModeProblem& mode);

/// Spectral radius of the assembled iteration matrix; +infinity for modes
/// flagged by a singular local solve.
double convergence_factor(const ModeProblem& mode);

/// One evaluated mode with reporting metadata.
struct ModeRho {
    double xi_requested = 0.0;
    double xi_used = 0.0;
    bool xi_perturbed = false;
    double rho = 0.0;
    bool diverged = false; ///< rho is the +infinity marker
    std::string note;      ///< "", "xi-perturbed", "power-fallback", ...
};

/// convergence_factor plus metadata for one requested frequency.
ModeRho convergence_factor_at(const DampedCoefficient& coeff, const Decomposition& decomp,
                              const BoundaryConfig& bc, double xi);

/// Pointwise rho over a frequency grid, in input order.
std::vector<ModeRho> convergence_factor_profile(const DampedCoefficient& coeff,
                                                const Decomposition& decomp,
                                                const BoundaryConfig& bc,
                                                const std::vector<double>& xi_grid);

/// Physical Dirichlet-wall mode frequencies xi_k = k*pi, k = 1..ceil(3*omega/pi).
std::vector<double> physical_mode_grid(double omega);

/// Uniform scan of xi/omega over (0, max_ratio], `points` samples.
std::vector<double> uniform_scan_grid(double omega, double max_ratio = 2.0, int points = 400);

/// Worst mode of a profile (divergent entries dominate). Throws on empty input.
ModeRho max_mode_rho(const std::vector<ModeRho>& profile);

} // namespace dhelm
