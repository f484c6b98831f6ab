#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "dhelm/boundary.hpp"
#include "dhelm/io.hpp"
#include "dhelm/model.hpp"
#include "dhelm/util.hpp"

namespace dhelm {

class SingularSystemError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class NonConvergedResidualError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Uniform vertex-centered grid on the unit square: nodes at i*h,
/// i = 0..n_interior+1, with h = 1/(n_interior+1). Boundary nodes are
/// unknowns on impedance sides and pinned to zero on Dirichlet sides.
struct Grid2D {
    int n_interior = 0;
    double h = 0.0;
    int n_nodes = 0; ///< n_interior + 2 per direction

    explicit Grid2D(int n_interior_) : n_interior(n_interior_) {
        if (n_interior < 1) throw std::invalid_argument("Grid2D: n_interior must be >= 1");
        h = 1.0 / (n_interior + 1);
        n_nodes = n_interior + 2;
    }

    double coord(int i) const { return i * h; }

    /// Resolution diagnostic 2*pi/(omega*h); rule of thumb says keep >= 10.
    double points_per_wavelength(double omega) const { return 2.0 * M_PI / (omega * h); }
};

/// Right-hand-side source f. Point sources discretize a delta as 1/h^2 at the
/// nearest grid node; grid functions are sampled on the full global node grid.
struct SourceTerm {
    enum class Kind { Point, GridFunction };
    Kind kind = Kind::Point;
    double x = 0.5, y = 0.5;
    std::vector<cx> values; ///< full node grid, values[iy*n_nodes + ix]

    static SourceTerm point(double x, double y) {
        if (!(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0))
            throw std::invalid_argument("SourceTerm: point source must lie inside the open square");
        SourceTerm s;
        s.kind = Kind::Point;
        s.x = x;
        s.y = y;
        return s;
    }

    static SourceTerm grid_function(std::vector<cx> node_values) {
        SourceTerm s;
        s.kind = Kind::GridFunction;
        s.values = std::move(node_values);
        return s;
    }
};

/// Complex nodal field on an x-window of the global grid (full domain uses
/// the whole window). Values on Dirichlet boundary nodes are exact zeros.
struct ComplexField {
    Grid2D grid;
    int ix_lo = 0, ix_hi = 0;          ///< node window in x, inclusive
    std::vector<cx> values;            ///< values[iy*width + (ix - ix_lo)]

    int width() const { return ix_hi - ix_lo + 1; }

    cx at(int ix, int iy) const {
        return values[static_cast<std::size_t>(iy) * width() + (ix - ix_lo)];
    }
    cx& at(int ix, int iy) {
        return values[static_cast<std::size_t>(iy) * width() + (ix - ix_lo)];
    }
};

enum class Side { Left, Right, Bottom, Top };

/// Banded system for -Laplace_h u + eta u = f * rhs_scale on a strip
/// [x(ix_lo), x(ix_hi)] x [0,1] of the grid with per-side Dirichlet or
/// impedance (ghost-eliminated Robin, parameter s = sqrt(eta)) conditions.
/// Strip edges interior to the unit square always get Robin interface
/// conditions. Factor once, then solve many right-hand sides.
class FdSystem {
  public:
    /// Full-domain system.
    FdSystem(const Grid2D& grid, const DampedCoefficient& coeff, const BoundaryConfig& bc);

    /// Strip system on node window [ix_lo, ix_hi].
    FdSystem(const Grid2D& grid, const DampedCoefficient& coeff, const BoundaryConfig& bc,
             int ix_lo, int ix_hi);

    /// Banded LU without pivoting. Throws SingularSystemError when a pivot
    /// falls below 1e-14 of its row scale. Safe to call once.
    void factor();
    bool factored() const { return factored_; }

    int n_unknowns() const { return n_; }
    int nux() const { return nux_; }
    int nuy() const { return nuy_; }
    int ux_lo() const { return ux_lo_; }
    int uy_lo() const { return uy_lo_; }
    const Grid2D& grid() const { return grid_; }
    EdgeCondition edge(Side side) const;

    /// Zero right-hand side of conforming size.
    std::vector<cx> zero_rhs() const { return std::vector<cx>(static_cast<std::size_t>(n_)); }

    /// rhs += f * rhs_scale sampled on the unknowns.
    void add_source(std::vector<cx>& rhs, const SourceTerm& f) const;

    /// rhs += (2/h) * g on the impedance nodes of `side`; g is indexed by the
    /// side's unknown nodes (length nuy for Left/Right, nux for Bottom/Top).
    /// Throws when the side is not an impedance/Robin edge.
    void add_boundary_data(std::vector<cx>& rhs, Side side, const std::vector<cx>& g) const;

    /// LU solve followed by a mandatory residual gate ||Au-b||/||b|| < 1e-8
    /// with one step of iterative refinement; NonConvergedResidualError if
    /// the gate still fails.
    std::vector<cx> solve(const std::vector<cx>& rhs) const;

    /// Stencil matrix-vector product (independent of the factorization).
    std::vector<cx> apply(const std::vector<cx>& u) const;

    /// Scatter an unknown vector into a nodal field of the strip window
    /// (Dirichlet nodes stay zero).
    ComplexField to_field(const std::vector<cx>& u) const;

  private:
    template <class Emit> void stencil_row(int ix, int iy, Emit&& emit) const;
    int row_of(int ix, int iy) const { return (iy - uy_lo_) * nux_ + (ix - ux_lo_); }
    void lu_substitute(std::vector<cx>& x) const;

    Grid2D grid_;
    DampedCoefficient coeff_;
    int ix_lo_ = 0, ix_hi_ = 0;
    EdgeCondition edge_[4]; // indexed by Side
    int ux_lo_ = 0, ux_hi_ = 0, uy_lo_ = 0, uy_hi_ = 0;
    int nux_ = 0, nuy_ = 0, n_ = 0, band_ = 0;
    bool factored_ = false;
    std::vector<double> re_, im_;      ///< band storage, row-major, width 2*band+1
    std::vector<double> row_scale_;    ///< max |entry| per row of the original matrix
};

/// Point-source field for one of the three outer-boundary presets.
ComplexField greens_field(const PhysicalParams& params, const BoundaryConfig& bc,
                          double source_x, double source_y, int n_interior);

/// CSV export with columns x, y, re, im, abs and provenance comments.
void export_field_csv(const ComplexField& field, const std::vector<std::string>& comments,
                      const std::filesystem::path& path);

/// SVG raster of |u| (Magnitude) or Re u (Diverging).
void export_field_svg(const ComplexField& field, io::RasterMap map, const std::string& title,
                      const std::vector<std::string>& comments,
                      const std::filesystem::path& path);

} // namespace dhelm
