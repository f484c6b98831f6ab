#include "dhelm/fd_solver.hpp"

#include <algorithm>
#include <cmath>

namespace dhelm {

namespace {
int side_index(Side s) { return static_cast<int>(s); }
} // namespace

FdSystem::FdSystem(const Grid2D& grid, const DampedCoefficient& coeff, const BoundaryConfig& bc)
    : FdSystem(grid, coeff, bc, 0, grid.n_nodes - 1) {}

FdSystem::FdSystem(const Grid2D& grid, const DampedCoefficient& coeff, const BoundaryConfig& bc,
                   int ix_lo, int ix_hi)
    : grid_(grid), coeff_(coeff), ix_lo_(ix_lo), ix_hi_(ix_hi) {
    if (ix_lo < 0 || ix_hi > grid.n_nodes - 1 || ix_hi - ix_lo < 1)
        throw std::invalid_argument("FdSystem: bad strip window");

    // strip edges interior to the square are always Robin interfaces
    edge_[side_index(Side::Left)] = (ix_lo_ == 0) ? bc.left_x : EdgeCondition::Impedance;
    edge_[side_index(Side::Right)] =
        (ix_hi_ == grid.n_nodes - 1) ? bc.right_x : EdgeCondition::Impedance;
    edge_[side_index(Side::Bottom)] = bc.bottom_y;
    edge_[side_index(Side::Top)] = bc.top_y;

    ux_lo_ = (edge_[side_index(Side::Left)] == EdgeCondition::Dirichlet) ? ix_lo_ + 1 : ix_lo_;
    ux_hi_ = (edge_[side_index(Side::Right)] == EdgeCondition::Dirichlet) ? ix_hi_ - 1 : ix_hi_;
    uy_lo_ = (edge_[side_index(Side::Bottom)] == EdgeCondition::Dirichlet) ? 1 : 0;
    uy_hi_ = (edge_[side_index(Side::Top)] == EdgeCondition::Dirichlet) ? grid.n_nodes - 2
                                                                        : grid.n_nodes - 1;

    nux_ = ux_hi_ - ux_lo_ + 1;
    nuy_ = uy_hi_ - uy_lo_ + 1;
    if (nux_ < 1 || nuy_ < 1) throw std::invalid_argument("FdSystem: window has no unknowns");
    n_ = nux_ * nuy_;
    band_ = nux_;
}

EdgeCondition FdSystem::edge(Side side) const { return edge_[side_index(side)]; }

/// Emits the row additively, with the diagonal split into its zeroth-order
/// and per-direction pieces so that callers tracking the row scale see the
/// magnitude of terms that may cancel in the sum.
template <class Emit> void FdSystem::stencil_row(int ix, int iy, Emit&& emit) const {
    const double h = grid_.h;
    const double ih2 = 1.0 / (h * h);
    const cx s = coeff_.sqrt_eta;
    const int r = row_of(ix, iy);
    emit(r, coeff_.eta);

    // x direction: boundary unknowns exist only on impedance/Robin edges
    if (ix == ix_lo_) {
        emit(r, 2.0 * ih2 + 2.0 * s / h);
        emit(row_of(ix + 1, iy), cx(-2.0 * ih2, 0.0));
    } else if (ix == ix_hi_) {
        emit(r, 2.0 * ih2 + 2.0 * s / h);
        emit(row_of(ix - 1, iy), cx(-2.0 * ih2, 0.0));
    } else {
        emit(r, cx(2.0 * ih2, 0.0));
        if (ix - 1 >= ux_lo_) emit(row_of(ix - 1, iy), cx(-ih2, 0.0));
        if (ix + 1 <= ux_hi_) emit(row_of(ix + 1, iy), cx(-ih2, 0.0));
    }

    // y direction
    if (iy == 0) {
        emit(r, 2.0 * ih2 + 2.0 * s / h);
        emit(row_of(ix, iy + 1), cx(-2.0 * ih2, 0.0));
    } else if (iy == grid_.n_nodes - 1) {
        emit(r, 2.0 * ih2 + 2.0 * s / h);
        emit(row_of(ix, iy - 1), cx(-2.0 * ih2, 0.0));
    } else {
        emit(r, cx(2.0 * ih2, 0.0));
        if (iy - 1 >= uy_lo_) emit(row_of(ix, iy - 1), cx(-ih2, 0.0));
        if (iy + 1 <= uy_hi_) emit(row_of(ix, iy + 1), cx(-ih2, 0.0));
    }
}

void FdSystem::factor() {
    if (factored_) throw std::logic_error("FdSystem::factor called twice");
    const int w = 2 * band_ + 1;
    re_.assign(static_cast<std::size_t>(n_) * w, 0.0);
    im_.assign(static_cast<std::size_t>(n_) * w, 0.0);
    row_scale_.assign(static_cast<std::size_t>(n_), 0.0);

    for (int iy = uy_lo_; iy <= uy_hi_; ++iy) {
        for (int ix = ux_lo_; ix <= ux_hi_; ++ix) {
            const int r = row_of(ix, iy);
            const std::size_t base = static_cast<std::size_t>(r) * w;
            stencil_row(ix, iy, [&](int c, cx v) {
                const int off = c - r + band_;
                re_[base + off] += v.real();
                im_[base + off] += v.imag();
                row_scale_[static_cast<std::size_t>(r)] =
                    std::max(row_scale_[static_cast<std::size_t>(r)], std::abs(v));
            });
        }
    }

    for (int k = 0; k < n_; ++k) {
        const std::size_t kb = static_cast<std::size_t>(k) * w;
        const double pr = re_[kb + band_], pi = im_[kb + band_];
        const double pa = std::hypot(pr, pi);
        if (pa < 1e-14 * row_scale_[static_cast<std::size_t>(k)])
            throw SingularSystemError("FdSystem: zero pivot at row " + std::to_string(k));
        const double pp = pr * pr + pi * pi;

        const int jmax = std::min(k + band_, n_ - 1);
        const int cnt = jmax - k;
        if (cnt == 0) continue;
        const double* akr = re_.data() + kb + band_ + 1;
        const double* aki = im_.data() + kb + band_ + 1;

        for (int i = k + 1; i <= std::min(k + band_, n_ - 1); ++i) {
            const std::size_t ib = static_cast<std::size_t>(i) * w;
            const int off_k = k - i + band_;
            const double ar = re_[ib + off_k], ai = im_[ib + off_k];
            if (ar == 0.0 && ai == 0.0) continue;
            const double mr = (ar * pr + ai * pi) / pp;
            const double mi = (ai * pr - ar * pi) / pp;
            re_[ib + off_k] = mr;
            im_[ib + off_k] = mi;

            double* air = re_.data() + ib + off_k + 1;
            double* aii = im_.data() + ib + off_k + 1;
            for (int t = 0; t < cnt; ++t) {
                const double br = akr[t], bi = aki[t];
                air[t] -= mr * br - mi * bi;
                aii[t] -= mr * bi + mi * br;
            }
        }
    }
    factored_ = true;
}

void FdSystem::lu_substitute(std::vector<cx>& x) const {
    const int w = 2 * band_ + 1;
    // forward: L has unit diagonal, multipliers stored below it
    for (int k = 0; k < n_; ++k) {
        const cx xk = x[static_cast<std::size_t>(k)];
        if (xk == cx(0.0, 0.0)) continue;
        const int imax = std::min(k + band_, n_ - 1);
        for (int i = k + 1; i <= imax; ++i) {
            const std::size_t idx = static_cast<std::size_t>(i) * w + (k - i + band_);
            const cx l(re_[idx], im_[idx]);
            x[static_cast<std::size_t>(i)] -= l * xk;
        }
    }
    // backward
    for (int k = n_ - 1; k >= 0; --k) {
        const std::size_t kb = static_cast<std::size_t>(k) * w;
        cx acc = x[static_cast<std::size_t>(k)];
        const int jmax = std::min(k + band_, n_ - 1);
        for (int j = k + 1; j <= jmax; ++j) {
            const std::size_t idx = kb + (j - k + band_);
            acc -= cx(re_[idx], im_[idx]) * x[static_cast<std::size_t>(j)];
        }
        x[static_cast<std::size_t>(k)] = acc / cx(re_[kb + band_], im_[kb + band_]);
    }
}

void FdSystem::add_source(std::vector<cx>& rhs, const SourceTerm& f) const {
    if (rhs.size() != static_cast<std::size_t>(n_))
        throw std::invalid_argument("add_source: rhs size mismatch");
    const cx scale = coeff_.rhs_scale;
    if (f.kind == SourceTerm::Kind::Point) {
        int ix = static_cast<int>(std::lround(f.x / grid_.h));
        int iy = static_cast<int>(std::lround(f.y / grid_.h));
        // A source rounding onto a Dirichlet outer wall snaps to the nearest
        // unknown, but a strip must not absorb sources that live in another
        // strip: beyond an interior interface the restriction of f is zero.
        if (ix < ux_lo_) {
            if (ix_lo_ != 0) return;
            ix = ux_lo_;
        }
        if (ix > ux_hi_) {
            if (ix_hi_ != grid_.n_nodes - 1) return;
            ix = ux_hi_;
        }
        iy = std::clamp(iy, uy_lo_, uy_hi_);
        rhs[static_cast<std::size_t>(row_of(ix, iy))] += scale / (grid_.h * grid_.h);
        return;
    }
    if (f.values.size() != static_cast<std::size_t>(grid_.n_nodes) * grid_.n_nodes)
        throw std::invalid_argument("add_source: grid function must cover the full node grid");
    for (int iy = uy_lo_; iy <= uy_hi_; ++iy)
        for (int ix = ux_lo_; ix <= ux_hi_; ++ix)
            rhs[static_cast<std::size_t>(row_of(ix, iy))] +=
                scale * f.values[static_cast<std::size_t>(iy) * grid_.n_nodes + ix];
}

void FdSystem::add_boundary_data(std::vector<cx>& rhs, Side side, const std::vector<cx>& g) const {
    if (rhs.size() != static_cast<std::size_t>(n_))
        throw std::invalid_argument("add_boundary_data: rhs size mismatch");
    if (edge(side) != EdgeCondition::Impedance)
        throw std::invalid_argument("add_boundary_data: side is not an impedance/Robin edge");
    const double two_over_h = 2.0 / grid_.h;
    switch (side) {
    case Side::Left:
        if (g.size() != static_cast<std::size_t>(nuy_))
            throw std::invalid_argument("add_boundary_data: bad trace length");
        for (int iy = uy_lo_; iy <= uy_hi_; ++iy)
            rhs[static_cast<std::size_t>(row_of(ix_lo_, iy))] +=
                two_over_h * g[static_cast<std::size_t>(iy - uy_lo_)];
        break;
    case Side::Right:
        if (g.size() != static_cast<std::size_t>(nuy_))
            throw std::invalid_argument("add_boundary_data: bad trace length");
        for (int iy = uy_lo_; iy <= uy_hi_; ++iy)
            rhs[static_cast<std::size_t>(row_of(ix_hi_, iy))] +=
                two_over_h * g[static_cast<std::size_t>(iy - uy_lo_)];
        break;
    case Side::Bottom:
        if (g.size() != static_cast<std::size_t>(nux_))
            throw std::invalid_argument("add_boundary_data: bad trace length");
        for (int ix = ux_lo_; ix <= ux_hi_; ++ix)
            rhs[static_cast<std::size_t>(row_of(ix, 0))] +=
                two_over_h * g[static_cast<std::size_t>(ix - ux_lo_)];
        break;
    case Side::Top:
        if (g.size() != static_cast<std::size_t>(nux_))
            throw std::invalid_argument("add_boundary_data: bad trace length");
        for (int ix = ux_lo_; ix <= ux_hi_; ++ix)
            rhs[static_cast<std::size_t>(row_of(ix, grid_.n_nodes - 1))] +=
                two_over_h * g[static_cast<std::size_t>(ix - ux_lo_)];
        break;
    }
}

std::vector<cx> FdSystem::apply(const std::vector<cx>& u) const {
    if (u.size() != static_cast<std::size_t>(n_))
        throw std::invalid_argument("apply: vector size mismatch");
    std::vector<cx> out(static_cast<std::size_t>(n_), cx(0.0, 0.0));
    for (int iy = uy_lo_; iy <= uy_hi_; ++iy) {
        for (int ix = ux_lo_; ix <= ux_hi_; ++ix) {
            const int r = row_of(ix, iy);
            cx acc(0.0, 0.0);
            stencil_row(ix, iy, [&](int c, cx v) { acc += v * u[static_cast<std::size_t>(c)]; });
            out[static_cast<std::size_t>(r)] = acc;
        }
    }
    return out;
}

std::vector<cx> FdSystem::solve(const std::vector<cx>& rhs) const {
    if (!factored_) throw std::logic_error("FdSystem::solve called before factor");
    if (rhs.size() != static_cast<std::size_t>(n_))
        throw std::invalid_argument("solve: rhs size mismatch");

    double b_norm = 0.0;
    for (const cx& v : rhs) b_norm += std::norm(v);
    b_norm = std::sqrt(b_norm);

    std::vector<cx> x = rhs;
    lu_substitute(x);
    if (b_norm == 0.0) return x; // exact zero solution

    auto rel_residual = [&](const std::vector<cx>& sol, std::vector<cx>& res) {
        res = apply(sol);
        double nr = 0.0;
        for (std::size_t i = 0; i < res.size(); ++i) {
            res[i] = rhs[i] - res[i];
            nr += std::norm(res[i]);
        }
        return std::sqrt(nr) / b_norm;
    };

    std::vector<cx> r;
    if (rel_residual(x, r) >= 1e-8) {
        lu_substitute(r); // one step of iterative refinement
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += r[i];
        if (rel_residual(x, r) >= 1e-8)
            throw NonConvergedResidualError("FdSystem::solve: residual gate failed after refinement");
    }
    return x;
}

ComplexField FdSystem::to_field(const std::vector<cx>& u) const {
    if (u.size() != static_cast<std::size_t>(n_))
        throw std::invalid_argument("to_field: vector size mismatch");
    ComplexField field{grid_, ix_lo_, ix_hi_, {}};
    field.values.assign(static_cast<std::size_t>(field.width()) * grid_.n_nodes, cx(0.0, 0.0));
    for (int iy = uy_lo_; iy <= uy_hi_; ++iy)
        for (int ix = ux_lo_; ix <= ux_hi_; ++ix)
            field.at(ix, iy) = u[static_cast<std::size_t>(row_of(ix, iy))];
    return field;
}

ComplexField greens_field(const PhysicalParams& params, const BoundaryConfig& bc, double source_x,
                          double source_y, int n_interior) {
    const Grid2D grid(n_interior);
    const DampedCoefficient coeff = compute_eta(params);
    FdSystem system(grid, coeff, bc);
    system.factor();
    std::vector<cx> rhs = system.zero_rhs();
    system.add_source(rhs, SourceTerm::point(source_x, source_y));
    return system.to_field(system.solve(rhs));
}

void export_field_csv(const ComplexField& field, const std::vector<std::string>& comments,
                      const std::filesystem::path& path) {
    io::CsvTable table;
    table.comments = comments;
    table.header = {"x", "y", "re", "im", "abs"};
    table.rows.reserve(field.values.size());
    for (int iy = 0; iy < field.grid.n_nodes; ++iy) {
        for (int ix = field.ix_lo; ix <= field.ix_hi; ++ix) {
            const cx v = field.at(ix, iy);
            table.rows.push_back({io::format_double(field.grid.coord(ix)),
                                  io::format_double(field.grid.coord(iy)),
                                  io::format_double(v.real()), io::format_double(v.imag()),
                                  io::format_double(std::abs(v))});
        }
    }
    io::write_csv(table, path);
}

void export_field_svg(const ComplexField& field, io::RasterMap map, const std::string& title,
                      const std::vector<std::string>& comments,
                      const std::filesystem::path& path) {
    const int nx = field.width(), ny = field.grid.n_nodes;
    std::vector<double> img(static_cast<std::size_t>(nx) * ny);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const cx v = field.values[static_cast<std::size_t>(iy) * nx + ix];
            img[static_cast<std::size_t>(iy) * nx + ix] =
                (map == io::RasterMap::Magnitude) ? std::abs(v) : v.real();
        }
    io::write_svg_raster(img, nx, ny, map, title, comments, path);
}

} // namespace dhelm
