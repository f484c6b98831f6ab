#include "doctest.h"

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <vector>

#include "dhelm/fd_solver.hpp"

using namespace dhelm;
namespace fs = std::filesystem;

namespace {

/// eta = 0 turns the operator into the plain five-point Laplacian; the rest
/// of the coefficient bundle is irrelevant for all-Dirichlet problems.
DampedCoefficient laplace_coefficient(cx eta = cx(0.0, 0.0)) {
    return DampedCoefficient{PhysicalParams(1.0), eta, principal_sqrt(eta), cx(1.0, 0.0)};
}

std::vector<std::vector<cx>> dense_matrix(const FdSystem& sys) {
    const int n = sys.n_unknowns();
    std::vector<std::vector<cx>> a(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        std::vector<cx> e(static_cast<std::size_t>(n), cx(0.0, 0.0));
        e[static_cast<std::size_t>(j)] = cx(1.0, 0.0);
        const std::vector<cx> col = sys.apply(e);
        for (int i = 0; i < n; ++i) {
            a[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(n));
            a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                col[static_cast<std::size_t>(i)];
        }
    }
    return a;
}

/// Max-norm error of the discrete solution against u = sin(pi x) sin(pi y),
/// which solves -Lap u + eta u = (2 pi^2 + eta) u with impedance data
/// g = -pi sin(pi y) on vertical radiating edges (u vanishes on all walls).
double manufactured_error(int n_interior, const DampedCoefficient& coeff,
                          const BoundaryConfig& bc) {
    const Grid2D grid(n_interior);
    FdSystem sys(grid, coeff, bc);
    sys.factor();

    const int nn = grid.n_nodes;
    std::vector<cx> f(static_cast<std::size_t>(nn) * nn);
    const cx factor = (2.0 * M_PI * M_PI + coeff.eta) / coeff.rhs_scale;
    for (int iy = 0; iy < nn; ++iy)
        for (int ix = 0; ix < nn; ++ix)
            f[static_cast<std::size_t>(iy) * nn + ix] =
                factor * std::sin(M_PI * grid.coord(ix)) * std::sin(M_PI * grid.coord(iy));

    std::vector<cx> rhs = sys.zero_rhs();
    sys.add_source(rhs, SourceTerm::grid_function(f));
    if (sys.edge(Side::Left) == EdgeCondition::Impedance) {
        std::vector<cx> g(static_cast<std::size_t>(sys.nuy()));
        for (int t = 0; t < sys.nuy(); ++t)
            g[static_cast<std::size_t>(t)] = -M_PI * std::sin(M_PI * grid.coord(sys.uy_lo() + t));
        sys.add_boundary_data(rhs, Side::Left, g);
        sys.add_boundary_data(rhs, Side::Right, g);
    }

    const ComplexField u = sys.to_field(sys.solve(rhs));
    double err = 0.0;
    for (int iy = 0; iy < nn; ++iy)
        for (int ix = 0; ix < nn; ++ix) {
            const double exact = std::sin(M_PI * grid.coord(ix)) * std::sin(M_PI * grid.coord(iy));
            err = std::max(err, std::abs(u.at(ix, iy) - cx(exact, 0.0)));
        }
    return err;
}

double peak_magnitude(const ComplexField& u) {
    double m = 0.0;
    for (const cx& v : u.values) m = std::max(m, std::abs(v));
    return m;
}

/// Largest |u| over nodes within `width` of the outer boundary.
double boundary_ring_max(const ComplexField& u, double width) {
    double m = 0.0;
    for (int iy = 0; iy < u.grid.n_nodes; ++iy)
        for (int ix = u.ix_lo; ix <= u.ix_hi; ++ix) {
            const double x = u.grid.coord(ix), y = u.grid.coord(iy);
            const double d = std::min(std::min(x, 1.0 - x), std::min(y, 1.0 - y));
            if (d <= width) m = std::max(m, std::abs(u.at(ix, iy)));
        }
    return m;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path operator/(const std::string& leaf) const { return path / leaf; }
};

} // namespace

TEST_CASE("a single walled unknown reduces to the scalar equation (4/h^2 + eta) u = f") {
    const Grid2D grid(1); // h = 1/2, one interior node
    FdSystem sys(grid, laplace_coefficient(), BoundaryConfig::cavity());
    REQUIRE(sys.n_unknowns() == 1);
    CHECK(sys.apply({cx(1.0, 0.0)})[0] == cx(16.0, 0.0)); // 4/h^2 = 16 exactly

    sys.factor();
    std::vector<cx> rhs = {cx(32.0, 0.0)};
    CHECK(sys.solve(rhs)[0] == cx(2.0, 0.0));
}

TEST_CASE("a pivot annihilated by eta = -4/h^2 is rejected as singular") {
    const Grid2D grid(1);
    FdSystem sys(grid, laplace_coefficient(cx(-16.0, 0.0)), BoundaryConfig::cavity());
    CHECK_THROWS_AS(sys.factor(), SingularSystemError);
}

TEST_CASE("the all-wall operator is symmetric, also for complex eta") {
    for (const cx eta : {cx(0.0, 0.0), cx(-25.0, 7.5)}) {
        const Grid2D grid(4);
        FdSystem sys(grid, laplace_coefficient(eta), BoundaryConfig::cavity());
        const auto a = dense_matrix(sys);
        const int n = sys.n_unknowns();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                CHECK(a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] ==
                      a[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]);
    }
}

TEST_CASE("solving A w for a known w recovers it far below the residual gate") {
    const Grid2D grid(31);
    const DampedCoefficient coeff = compute_eta(PhysicalParams(10.0, 0.5));
    FdSystem sys(grid, coeff, BoundaryConfig::waveguide());
    sys.factor();

    Rng rng(3);
    std::vector<cx> w(static_cast<std::size_t>(sys.n_unknowns()));
    double w_max = 0.0;
    for (cx& v : w) {
        v = rng.complex_normal();
        w_max = std::max(w_max, std::abs(v));
    }
    const std::vector<cx> x = sys.solve(sys.apply(w));
    double err = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) err = std::max(err, std::abs(x[i] - w[i]));
    CHECK(err <= 1e-8 * w_max);
}

TEST_CASE("a zero right-hand side yields the exact zero solution") {
    const Grid2D grid(9);
    FdSystem sys(grid, compute_eta(PhysicalParams(5.0, 1.0)), BoundaryConfig::free_space());
    sys.factor();
    for (const cx& v : sys.solve(sys.zero_rhs())) CHECK(v == cx(0.0, 0.0));
}

TEST_CASE("manufactured smooth solutions converge at second order") {
    const DampedCoefficient coeff = compute_eta(PhysicalParams(2.0, 0.7, 0.01));
    for (const char* name : {"cavity", "waveguide"}) {
        CAPTURE(name);
        const BoundaryConfig bc = BoundaryConfig::from_name(name);
        const double e1 = manufactured_error(31, coeff, bc);
        const double e2 = manufactured_error(63, coeff, bc);
        const double e3 = manufactured_error(127, coeff, bc);
        const double order_a = std::log2(e1 / e2);
        const double order_b = std::log2(e2 / e3);
        CHECK(order_a >= 1.9);
        CHECK(order_b >= 1.9);
        CHECK(order_a <= 2.15);
        CHECK(order_b <= 2.15);
    }
}

TEST_CASE("point sources snap to the nearest unknown only across outer walls") {
    const Grid2D grid(15); // h = 1/16
    const DampedCoefficient coeff = compute_eta(PhysicalParams(5.0));

    // nearest node of x = 0.004 is the wall itself; the source moves inward
    FdSystem walled(grid, coeff, BoundaryConfig::cavity());
    std::vector<cx> rhs = walled.zero_rhs();
    walled.add_source(rhs, SourceTerm::point(0.004, 0.5));
    int nonzeros = 0;
    std::size_t where = 0;
    for (std::size_t i = 0; i < rhs.size(); ++i)
        if (rhs[i] != cx(0.0, 0.0)) {
            ++nonzeros;
            where = i;
        }
    CHECK(nonzeros == 1);
    // ix = 1, iy = 8 with 15 unknowns per row
    CHECK(where == static_cast<std::size_t>((8 - 1) * 15 + 0));
    CHECK(rhs[where] == coeff.rhs_scale * 256.0);

    // a strip never absorbs a source that lives beyond its interior interface
    FdSystem strip(grid, coeff, BoundaryConfig::waveguide(), 0, 8);
    std::vector<cx> strip_rhs = strip.zero_rhs();
    strip.add_source(strip_rhs, SourceTerm::point(0.9, 0.5));
    for (const cx& v : strip_rhs) CHECK(v == cx(0.0, 0.0));

    // but overlapping strips both own a source inside the shared band
    FdSystem left_strip(grid, coeff, BoundaryConfig::waveguide(), 0, 8);
    FdSystem right_strip(grid, coeff, BoundaryConfig::waveguide(), 6, 16);
    std::vector<cx> lr = left_strip.zero_rhs(), rr = right_strip.zero_rhs();
    left_strip.add_source(lr, SourceTerm::point(0.45, 0.5));
    right_strip.add_source(rr, SourceTerm::point(0.45, 0.5));
    const auto count_nonzero = [](const std::vector<cx>& v) {
        int c = 0;
        for (const cx& z : v)
            if (z != cx(0.0, 0.0)) ++c;
        return c;
    };
    CHECK(count_nonzero(lr) == 1);
    CHECK(count_nonzero(rr) == 1);
}

TEST_CASE("strip windows keep Robin interfaces on interior cuts") {
    const Grid2D grid(15);
    const DampedCoefficient coeff = compute_eta(PhysicalParams(5.0));

    FdSystem inner(grid, coeff, BoundaryConfig::cavity(), 4, 10);
    CHECK(inner.edge(Side::Left) == EdgeCondition::Impedance);
    CHECK(inner.edge(Side::Right) == EdgeCondition::Impedance);
    CHECK(inner.edge(Side::Bottom) == EdgeCondition::Dirichlet);
    CHECK(inner.nux() == 7); // impedance cut nodes are unknowns
    CHECK(inner.nuy() == 15);

    FdSystem first(grid, coeff, BoundaryConfig::cavity(), 0, 8);
    CHECK(first.edge(Side::Left) == EdgeCondition::Dirichlet); // outer wall survives
    CHECK(first.edge(Side::Right) == EdgeCondition::Impedance);
    CHECK(first.nux() == 8);

    CHECK_THROWS_AS(FdSystem(grid, coeff, BoundaryConfig::cavity(), 4, 4),
                    std::invalid_argument);
    CHECK_THROWS_AS(FdSystem(grid, coeff, BoundaryConfig::cavity(), -1, 8),
                    std::invalid_argument);
    CHECK_THROWS_AS(FdSystem(grid, coeff, BoundaryConfig::cavity(), 4, 17),
                    std::invalid_argument);
}

TEST_CASE("near-resonant forcing inflates the response yet passes the residual gate") {
    const Grid2D grid(63);
    const auto peak_for = [&](double omega_sq) {
        FdSystem sys(grid, compute_eta(PhysicalParams(std::sqrt(omega_sq))),
                     BoundaryConfig::cavity());
        sys.factor();
        std::vector<cx> rhs = sys.zero_rhs();
        sys.add_source(rhs, SourceTerm::point(0.5, 0.5));
        return peak_magnitude(sys.to_field(sys.solve(rhs)));
    };
    // omega^2 = 2 pi^2 sits within O(h^2) of the lowest wall-mode eigenvalue;
    // the response magnitude explodes while the residual stays gated.
    const double on = peak_for(2.0 * M_PI * M_PI);
    const double off = peak_for(9.0);
    CHECK(on > 50.0 * off);
    CHECK(std::isfinite(on));
}

TEST_CASE("center-source wall fields inherit the grid reflection symmetry") {
    const ComplexField u =
        greens_field(PhysicalParams(30.0, 1.0), BoundaryConfig::cavity(), 0.5, 0.5, 63);
    const int last = u.grid.n_nodes - 1;
    const double scale = peak_magnitude(u);
    double worst = 0.0;
    for (int iy = 0; iy <= last; ++iy)
        for (int ix = 0; ix <= last; ++ix) {
            worst = std::max(worst, std::abs(u.at(ix, iy) - u.at(last - ix, last - iy)));
            worst = std::max(worst, std::abs(u.at(ix, iy) - u.at(last - ix, iy)));
        }
    CHECK(worst <= 1e-10 * scale);
}

TEST_CASE("source and observer are exchangeable in a walled domain") {
    const Grid2D grid(31);
    FdSystem sys(grid, compute_eta(PhysicalParams(5.0, 0.3)), BoundaryConfig::cavity());
    sys.factor();
    const auto field_from = [&](double x, double y) {
        std::vector<cx> rhs = sys.zero_rhs();
        sys.add_source(rhs, SourceTerm::point(x, y));
        return sys.to_field(sys.solve(rhs));
    };
    // both points lie exactly on grid nodes (multiples of h = 1/32)
    const ComplexField up = field_from(0.25, 0.375);
    const ComplexField uq = field_from(0.625, 0.75);
    const cx at_q = up.at(20, 24);
    const cx at_p = uq.at(8, 12);
    CHECK(std::abs(at_q - at_p) <= 1e-8 * std::abs(at_q));
}

TEST_CASE("first-order damping drains the boundary ring of a walled domain") {
    const ComplexField undamped =
        greens_field(PhysicalParams(40.0), BoundaryConfig::cavity(), 0.5, 0.5, 127);
    const ComplexField damped =
        greens_field(PhysicalParams(40.0, 1.0), BoundaryConfig::cavity(), 0.5, 0.5, 127);
    const double ring0 = boundary_ring_max(undamped, 0.1);
    const double ring1 = boundary_ring_max(damped, 0.1);
    CAPTURE(ring0);
    CAPTURE(ring1);
    CHECK(ring1 < ring0);
}

TEST_CASE("walls trap near-resonant energy that radiating edges shed") {
    const Grid2D grid(127);
    // discrete eigenvalue of the (5,15) wall mode, then sit half a unit away
    const double lam = (2.0 / (grid.h * grid.h)) *
                       (2.0 - std::cos(5.0 * M_PI * grid.h) - std::cos(15.0 * M_PI * grid.h));
    const double omega = std::sqrt(lam + 0.5);
    const double walled =
        peak_magnitude(greens_field(PhysicalParams(omega), BoundaryConfig::cavity(), 0.5, 0.5,
                                    grid.n_interior));
    const double radiating =
        peak_magnitude(greens_field(PhysicalParams(omega), BoundaryConfig::free_space(), 0.5, 0.5,
                                    grid.n_interior));
    CAPTURE(omega);
    CAPTURE(walled);
    CAPTURE(radiating);
    CHECK(walled > 2.0 * radiating);
}

TEST_CASE("recorded baseline: walled vs radiating peaks between resonances") {
    // At omega = 50 the walled spectrum has no eigenvalue near omega^2 = 2500
    // (the flanking discrete eigenvalues sit at about 2463 and 2529), so the
    // trapped standing waves interfere destructively near the source and the
    // walled peak measures BELOW the radiating one. Recorded, not assumed.
    const double walled =
        peak_magnitude(greens_field(PhysicalParams(50.0), BoundaryConfig::cavity(), 0.5, 0.5, 255));
    const double radiating = peak_magnitude(
        greens_field(PhysicalParams(50.0), BoundaryConfig::free_space(), 0.5, 0.5, 255));
    MESSAGE("peaks at n=255, omega=50, center source: walled=", walled,
            " radiating=", radiating);
    CHECK(walled == doctest::Approx(0.370).epsilon(0.05));
    CHECK(radiating == doctest::Approx(0.592).epsilon(0.05));
    CHECK(walled < radiating); // anti-resonant configuration
}

TEST_CASE("field exports are structured and re-readable") {
    TempDir dir("dhelm_test_field_export");
    const Grid2D grid(3);
    const DampedCoefficient coeff = compute_eta(PhysicalParams(5.0, 1.0));
    FdSystem sys(grid, coeff, BoundaryConfig::waveguide());
    sys.factor();
    std::vector<cx> rhs = sys.zero_rhs();
    sys.add_source(rhs, SourceTerm::point(0.5, 0.5));
    const ComplexField u = sys.to_field(sys.solve(rhs));

    const fs::path csv = dir / "field.csv";
    export_field_csv(u, {"test field"}, csv);
    const io::CsvTable table = io::read_csv(csv);
    CHECK(table.header == std::vector<std::string>{"x", "y", "re", "im", "abs"});
    CHECK(table.rows.size() == static_cast<std::size_t>(grid.n_nodes) * grid.n_nodes);
    CHECK(io::parse_double(table.rows[0][0]) == 0.0);
    // |u| column is consistent with re/im
    for (const auto& row : table.rows) {
        const double re = io::parse_double(row[2]), im = io::parse_double(row[3]);
        CHECK(io::parse_double(row[4]) == doctest::Approx(std::hypot(re, im)).epsilon(1e-12));
    }

    const fs::path svg = dir / "field.svg";
    export_field_svg(u, io::RasterMap::Magnitude, "test", {"one comment"}, svg);
    std::ifstream in(svg);
    std::string first;
    std::getline(in, first);
    CHECK(first.rfind("<svg", 0) == 0);
}

TEST_CASE("lifecycle and size validations") {
    const Grid2D grid(5);
    const DampedCoefficient coeff = compute_eta(PhysicalParams(5.0));
    FdSystem sys(grid, coeff, BoundaryConfig::waveguide());

    CHECK_THROWS_AS(sys.solve(sys.zero_rhs()), std::logic_error); // factor first
    sys.factor();
    CHECK(sys.factored());
    CHECK_THROWS_AS(sys.factor(), std::logic_error); // only once

    std::vector<cx> wrong(3, cx(0.0, 0.0));
    CHECK_THROWS_AS(sys.solve(wrong), std::invalid_argument);
    CHECK_THROWS_AS(sys.apply(wrong), std::invalid_argument);
    CHECK_THROWS_AS(sys.to_field(wrong), std::invalid_argument);
    std::vector<cx> rhs = sys.zero_rhs();
    CHECK_THROWS_AS(sys.add_source(wrong, SourceTerm::point(0.5, 0.5)), std::invalid_argument);
    CHECK_THROWS_AS(sys.add_source(rhs, SourceTerm::grid_function({cx(1.0, 0.0)})),
                    std::invalid_argument);
    CHECK_THROWS_AS(sys.add_boundary_data(rhs, Side::Bottom, std::vector<cx>(7)),
                    std::invalid_argument); // Dirichlet wall takes no data
    CHECK_THROWS_AS(sys.add_boundary_data(rhs, Side::Left, std::vector<cx>(3)),
                    std::invalid_argument); // wrong trace length

    CHECK_THROWS_AS(Grid2D(0), std::invalid_argument);
    CHECK_THROWS_AS(SourceTerm::point(0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(SourceTerm::point(0.5, 1.0), std::invalid_argument);
    CHECK(Grid2D(255).points_per_wavelength(100.0) ==
          doctest::Approx(2.0 * M_PI * 2.56).epsilon(1e-14));
}
