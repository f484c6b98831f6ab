#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dhelm/fd_solver.hpp"
#include "dhelm/geometry.hpp"

namespace dhelm {

/// Strip decomposition mapped onto the grid: interface positions snapped to
/// the nearest grid lines with a uniform overlap of an integer number of
/// cells. The snapped overlap replaces the nominal one in all comparisons.
struct SnappedDecomposition {
    int n_subdomains = 0;
    int overlap_cells = 0;
    double overlap_effective = 0.0; ///< overlap_cells * h
    std::vector<int> a_idx;         ///< left node index of subdomain j at [j-1]
    std::vector<int> b_idx;         ///< right node index of subdomain j at [j-1]
};

SnappedDecomposition snap_decomposition(const Decomposition& decomp, const Grid2D& grid);

/// Incoming interface Robin data for every subdomain:
/// left[j-2] is subdomain j's left-edge data (j = 2..N),
/// right[j-1] is subdomain j's right-edge data (j = 1..N-1).
/// Each vector runs over the lateral unknown nodes of an interface line.
struct TraceSet {
    std::vector<std::vector<cx>> left;
    std::vector<std::vector<cx>> right;

    double norm() const;
};

struct SchwarzOptions {
    int max_iters = 60;
    std::uint64_t seed = 1;
    const TraceSet* initial = nullptr;  ///< random complex-normal data when null
    const SourceTerm* source = nullptr; ///< zero (error equation) when null
    bool record_traces = true;          ///< keep full trace history for modal analysis
};

struct SchwarzReport {
    PhysicalParams params{1.0, 0.0, 0.0};
    BoundaryConfig bc;
    int n_interior = 0;
    std::uint64_t seed = 0;
    SnappedDecomposition snapped;
    std::vector<double> trace_norms;     ///< one entry per recorded state, starting at 0
    std::vector<TraceSet> trace_history; ///< same indexing (empty if !record_traces)
    double rate = 0.0;                   ///< least-squares geometric fit, last third
    bool diverged = false;
};

/// Runs the parallel (Jacobi) Schwarz iteration on the homogeneous error
/// equation with random initial interface data, or on a custom setup via
/// SchwarzOptions. Patch problems share one factorization each.
SchwarzReport run_schwarz(const PhysicalParams& params, const Decomposition& decomp,
                          const BoundaryConfig& bc, const Grid2D& grid,
                          const SchwarzOptions& opts);

SchwarzReport run_schwarz(const PhysicalParams& params, const Decomposition& decomp,
                          const BoundaryConfig& bc, const Grid2D& grid, int max_iters,
                          std::uint64_t seed);

/// Deterministic random initial data (complex standard normal per node).
TraceSet random_traces(const SnappedDecomposition& snapped, const Grid2D& grid,
                       const BoundaryConfig& bc, std::uint64_t seed);

/// Incoming Robin traces of a global nodal field at the snapped interfaces
/// (centered differences); used to seed consistency checks with the exact
/// discrete solution.
TraceSet traces_of_field(const ComplexField& field, const SnappedDecomposition& snapped,
                         const BoundaryConfig& bc, const DampedCoefficient& coeff);

/// Geometric rate r such that norms[i] ~ C * r^i, least-squares fitted on the
/// log of the last third of the positive entries; 0 when there is no signal.
double fit_geometric_rate(const std::vector<double>& norms);

struct ModeRate {
    int k = 0;
    double rate = 0.0;
    bool below_floor = false; ///< final amplitude < 1e-13 of the initial norm
};

/// Projects the recorded interface traces onto discrete sine modes sin(k*pi*y)
/// and fits a per-mode contraction rate. Requires Dirichlet lateral sides and
/// at least 10 recorded states; k runs to min(k_max, n_interior/4).
std::vector<ModeRate> per_mode_contraction(const SchwarzReport& report, int k_max);

/// CSV of (iteration, trace_norm) with provenance comments.
void export_trace_norms_csv(const SchwarzReport& report, const std::vector<std::string>& comments,
                            const std::filesystem::path& path);

/// CSV of (k, observed_rate, predicted_rate, below_floor); `predicted` may be
/// empty or match `rates` in length.
void export_mode_rates_csv(const std::vector<ModeRate>& rates,
                           const std::vector<double>& predicted,
                           const std::vector<std::string>& comments,
                           const std::filesystem::path& path);

} // namespace dhelm
