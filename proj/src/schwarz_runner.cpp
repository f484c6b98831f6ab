#include "dhelm/schwarz_runner.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace dhelm {

namespace {

/// Lateral unknown range shared by every strip (y sides come from the outer
/// boundary config).
std::pair<int, int> lateral_unknown_range(const Grid2D& grid, const BoundaryConfig& bc) {
    const int lo = (bc.bottom_y == EdgeCondition::Dirichlet) ? 1 : 0;
    const int hi = (bc.top_y == EdgeCondition::Dirichlet) ? grid.n_nodes - 2 : grid.n_nodes - 1;
    return {lo, hi};
}

} // namespace

double TraceSet::norm() const {
    double acc = 0.0;
    for (const auto& v : left)
        for (const cx& z : v) acc += std::norm(z);
    for (const auto& v : right)
        for (const cx& z : v) acc += std::norm(z);
    return std::sqrt(acc);
}

SnappedDecomposition snap_decomposition(const Decomposition& decomp, const Grid2D& grid) {
    const double h = grid.h;
    const int last = grid.n_nodes - 1;
    const int n = decomp.n_subdomains;
    if (n < 2 || decomp.intervals.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument(
            "snap_decomposition: decomposition not built by build_decomposition");

    SnappedDecomposition s;
    s.n_subdomains = n;
    s.overlap_cells = static_cast<int>(std::lround(decomp.overlap / h));
    s.overlap_effective = s.overlap_cells * h;
    s.a_idx.assign(static_cast<std::size_t>(n), 0);
    s.b_idx.assign(static_cast<std::size_t>(n), last);
    for (int j = 2; j <= n; ++j)
        s.a_idx[static_cast<std::size_t>(j - 1)] = static_cast<int>(std::lround(decomp.a(j) / h));
    for (int j = 1; j < n; ++j)
        s.b_idx[static_cast<std::size_t>(j - 1)] =
            s.a_idx[static_cast<std::size_t>(j)] + s.overlap_cells;

    if (s.overlap_cells < 0) throw std::invalid_argument("snap_decomposition: negative overlap");
    for (int j = 0; j < n; ++j) {
        if (s.b_idx[static_cast<std::size_t>(j)] - s.a_idx[static_cast<std::size_t>(j)] < 2)
            throw std::invalid_argument("snap_decomposition: subdomain thinner than two cells");
        if (s.b_idx[static_cast<std::size_t>(j)] > last || s.a_idx[static_cast<std::size_t>(j)] < 0)
            throw std::invalid_argument("snap_decomposition: subdomain leaves the grid");
        if (j > 0 && s.a_idx[static_cast<std::size_t>(j)] <= s.a_idx[static_cast<std::size_t>(j - 1)])
            throw std::invalid_argument("snap_decomposition: interfaces collapsed onto each other");
    }
    for (int j = 0; j + 2 < n; ++j)
        if (s.a_idx[static_cast<std::size_t>(j + 2)] < s.b_idx[static_cast<std::size_t>(j)])
            throw TripleOverlapError("snap_decomposition: three subdomains overlap after snapping");
    return s;
}

TraceSet random_traces(const SnappedDecomposition& snapped, const Grid2D& grid,
                       const BoundaryConfig& bc, std::uint64_t seed) {
    const auto [lo, hi] = lateral_unknown_range(grid, bc);
    const std::size_t len = static_cast<std::size_t>(hi - lo + 1);
    const int n = snapped.n_subdomains;
    Rng rng(seed);
    TraceSet g;
    g.left.resize(static_cast<std::size_t>(n - 1));
    g.right.resize(static_cast<std::size_t>(n - 1));
    for (auto& v : g.left) {
        v.resize(len);
        for (cx& z : v) z = rng.complex_normal();
    }
    for (auto& v : g.right) {
        v.resize(len);
        for (cx& z : v) z = rng.complex_normal();
    }
    return g;
}

TraceSet traces_of_field(const ComplexField& field, const SnappedDecomposition& snapped,
                         const BoundaryConfig& bc, const DampedCoefficient& coeff) {
    const Grid2D& grid = field.grid;
    if (field.ix_lo != 0 || field.ix_hi != grid.n_nodes - 1)
        throw std::invalid_argument("traces_of_field: field must cover the full domain");
    const auto [lo, hi] = lateral_unknown_range(grid, bc);
    const double inv2h = 1.0 / (2.0 * grid.h);
    const cx s = coeff.sqrt_eta;
    const int n = snapped.n_subdomains;

    TraceSet g;
    g.left.resize(static_cast<std::size_t>(n - 1));
    g.right.resize(static_cast<std::size_t>(n - 1));
    for (int j = 2; j <= n; ++j) {
        const int line = snapped.a_idx[static_cast<std::size_t>(j - 1)];
        auto& v = g.left[static_cast<std::size_t>(j - 2)];
        v.resize(static_cast<std::size_t>(hi - lo + 1));
        for (int iy = lo; iy <= hi; ++iy)
            v[static_cast<std::size_t>(iy - lo)] =
                (field.at(line - 1, iy) - field.at(line + 1, iy)) * inv2h + s * field.at(line, iy);
    }
    for (int j = 1; j < n; ++j) {
        const int line = snapped.b_idx[static_cast<std::size_t>(j - 1)];
        auto& v = g.right[static_cast<std::size_t>(j - 1)];
        v.resize(static_cast<std::size_t>(hi - lo + 1));
        for (int iy = lo; iy <= hi; ++iy)
            v[static_cast<std::size_t>(iy - lo)] =
                (field.at(line + 1, iy) - field.at(line - 1, iy)) * inv2h + s * field.at(line, iy);
    }
    return g;
}

double fit_geometric_rate(const std::vector<double>& norms) {
    const std::size_t m = norms.size();
    if (m < 2) return 0.0;
    std::size_t i0 = m - std::max<std::size_t>(2, m / 3);

    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = i0; i < m; ++i)
        if (norms[i] > 0.0 && std::isfinite(norms[i]))
            pts.emplace_back(static_cast<double>(i), std::log(norms[i]));
    if (pts.size() < 2) return 0.0;

    double sx = 0.0, sy = 0.0;
    for (auto [x, y] : pts) {
        sx += x;
        sy += y;
    }
    const double mx = sx / pts.size(), my = sy / pts.size();
    double sxx = 0.0, sxy = 0.0;
    for (auto [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx == 0.0) return 0.0;
    return std::exp(sxy / sxx);
}

SchwarzReport run_schwarz(const PhysicalParams& params, const Decomposition& decomp,
                          const BoundaryConfig& bc, const Grid2D& grid,
                          const SchwarzOptions& opts) {
    if (opts.max_iters < 1) throw std::invalid_argument("run_schwarz: max_iters must be >= 1");
    const DampedCoefficient coeff = compute_eta(params);
    const SnappedDecomposition snapped = snap_decomposition(decomp, grid);
    const int n = snapped.n_subdomains;
    const auto [uy_lo, uy_hi] = lateral_unknown_range(grid, bc);
    const std::size_t len = static_cast<std::size_t>(uy_hi - uy_lo + 1);

    std::vector<FdSystem> systems;
    systems.reserve(static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j) {
        systems.emplace_back(grid, coeff, bc, snapped.a_idx[static_cast<std::size_t>(j - 1)],
                             snapped.b_idx[static_cast<std::size_t>(j - 1)]);
        systems.back().factor();
    }

    TraceSet g = opts.initial ? *opts.initial : random_traces(snapped, grid, bc, opts.seed);
    if (g.left.size() != static_cast<std::size_t>(n - 1) ||
        g.right.size() != static_cast<std::size_t>(n - 1))
        throw std::invalid_argument("run_schwarz: initial trace set has wrong shape");
    for (const auto& v : g.left)
        if (v.size() != len) throw std::invalid_argument("run_schwarz: bad trace length");
    for (const auto& v : g.right)
        if (v.size() != len) throw std::invalid_argument("run_schwarz: bad trace length");

    SchwarzReport report;
    report.params = params;
    report.bc = bc;
    report.n_interior = grid.n_interior;
    report.seed = opts.seed;
    report.snapped = snapped;
    const double norm0 = g.norm();
    report.trace_norms.push_back(norm0);
    if (opts.record_traces) report.trace_history.push_back(g);

    const cx s = coeff.sqrt_eta;
    const double inv2h = 1.0 / (2.0 * grid.h);

    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        // solve phase (Jacobi: every patch reads only previous-iteration data)
        std::vector<ComplexField> fields;
        fields.reserve(static_cast<std::size_t>(n));
        for (int j = 1; j <= n; ++j) {
            const FdSystem& sys = systems[static_cast<std::size_t>(j - 1)];
            std::vector<cx> rhs = sys.zero_rhs();
            if (opts.source) sys.add_source(rhs, *opts.source);
            if (j > 1) sys.add_boundary_data(rhs, Side::Left, g.left[static_cast<std::size_t>(j - 2)]);
            if (j < n) sys.add_boundary_data(rhs, Side::Right, g.right[static_cast<std::size_t>(j - 1)]);
            fields.push_back(sys.to_field(sys.solve(rhs)));
        }

        // exchange phase
        TraceSet ng;
        ng.left.assign(static_cast<std::size_t>(n - 1), std::vector<cx>(len));
        ng.right.assign(static_cast<std::size_t>(n - 1), std::vector<cx>(len));
        for (int j = 1; j < n; ++j) {
            const ComplexField& uj = fields[static_cast<std::size_t>(j - 1)];
            const ComplexField& ujp = fields[static_cast<std::size_t>(j)];
            const int line_a = snapped.a_idx[static_cast<std::size_t>(j)];     // a_{j+1}
            const int line_b = snapped.b_idx[static_cast<std::size_t>(j - 1)]; // b_j
            auto& to_left = ng.left[static_cast<std::size_t>(j - 1)];   // next data for j+1
            auto& to_right = ng.right[static_cast<std::size_t>(j - 1)]; // next data for j
            if (snapped.overlap_cells >= 1) {
                for (int iy = uy_lo; iy <= uy_hi; ++iy) {
                    const std::size_t t = static_cast<std::size_t>(iy - uy_lo);
                    to_left[t] = (uj.at(line_a - 1, iy) - uj.at(line_a + 1, iy)) * inv2h +
                                 s * uj.at(line_a, iy);
                    to_right[t] = (ujp.at(line_b + 1, iy) - ujp.at(line_b - 1, iy)) * inv2h +
                                  s * ujp.at(line_b, iy);
                }
            } else {
                // coincident interfaces: flip the incoming Robin datum through
                // the boundary identity (d/dx+s)u + (-d/dx+s)u = 2su
                const auto& in_right = g.right[static_cast<std::size_t>(j - 1)]; // j's right data
                const auto& in_left = g.left[static_cast<std::size_t>(j - 1)];   // (j+1)'s left data
                for (int iy = uy_lo; iy <= uy_hi; ++iy) {
                    const std::size_t t = static_cast<std::size_t>(iy - uy_lo);
                    to_left[t] = 2.0 * s * uj.at(line_b, iy) - in_right[t];
                    to_right[t] = 2.0 * s * ujp.at(line_a, iy) - in_left[t];
                }
            }
        }
        g = std::move(ng);

        const double nrm = g.norm();
        report.trace_norms.push_back(nrm);
        if (opts.record_traces) report.trace_history.push_back(g);
        if (norm0 > 0.0 && nrm > 1e12 * norm0) {
            report.diverged = true;
            break;
        }
        if (nrm < 1e-300) break;
    }

    report.rate = fit_geometric_rate(report.trace_norms);
    return report;
}

SchwarzReport run_schwarz(const PhysicalParams& params, const Decomposition& decomp,
                          const BoundaryConfig& bc, const Grid2D& grid, int max_iters,
                          std::uint64_t seed) {
    SchwarzOptions opts;
    opts.max_iters = max_iters;
    opts.seed = seed;
    return run_schwarz(params, decomp, bc, grid, opts);
}

std::vector<ModeRate> per_mode_contraction(const SchwarzReport& report, int k_max) {
    if (report.trace_history.size() < 10)
        throw std::invalid_argument("per_mode_contraction: need at least 10 recorded iterations");
    if (!report.bc.lateral_dirichlet())
        throw std::invalid_argument("per_mode_contraction: sine modes need Dirichlet lateral sides");
    const int n = report.n_interior;
    const int k_hi = std::min(k_max, n / 4); // stay away from the grid Nyquist
    const double h = 1.0 / (n + 1);
    const double floor = 1e-13 * report.trace_norms.front();

    std::vector<ModeRate> out;
    out.reserve(static_cast<std::size_t>(std::max(0, k_hi)));
    std::vector<double> sines(static_cast<std::size_t>(n));
    std::vector<double> amps;

    for (int k = 1; k <= k_hi; ++k) {
        for (int m = 1; m <= n; ++m)
            sines[static_cast<std::size_t>(m - 1)] = std::sin(k * M_PI * m * h);
        const double scale = 2.0 * h; // = 2/(n+1)

        amps.clear();
        for (const TraceSet& g : report.trace_history) {
            double acc = 0.0;
            auto project = [&](const std::vector<cx>& trace) {
                cx c(0.0, 0.0);
                for (int m = 1; m <= n; ++m)
                    c += trace[static_cast<std::size_t>(m - 1)] * sines[static_cast<std::size_t>(m - 1)];
                acc += std::norm(scale * c);
            };
            for (const auto& v : g.left) project(v);
            for (const auto& v : g.right) project(v);
            amps.push_back(std::sqrt(acc));
        }

        ModeRate mr;
        mr.k = k;
        mr.below_floor = amps.back() < floor;
        // fit only up to the last state still carrying signal
        std::size_t end = amps.size();
        while (end > 0 && amps[end - 1] < floor) --end;
        if (end >= 2)
            mr.rate = fit_geometric_rate(std::vector<double>(amps.begin(),
                                                             amps.begin() + static_cast<long>(end)));
        out.push_back(mr);
    }
    return out;
}

void export_trace_norms_csv(const SchwarzReport& report, const std::vector<std::string>& comments,
                            const std::filesystem::path& path) {
    io::CsvTable table;
    table.comments = comments;
    table.comments.push_back("rate=" + io::format_double(report.rate) +
                             " diverged=" + (report.diverged ? std::string("true") : "false"));
    table.header = {"iteration", "trace_norm"};
    for (std::size_t i = 0; i < report.trace_norms.size(); ++i)
        table.rows.push_back({std::to_string(i), io::format_double(report.trace_norms[i])});
    io::write_csv(table, path);
}

void export_mode_rates_csv(const std::vector<ModeRate>& rates, const std::vector<double>& predicted,
                           const std::vector<std::string>& comments,
                           const std::filesystem::path& path) {
    if (!predicted.empty() && predicted.size() != rates.size())
        throw std::invalid_argument("export_mode_rates_csv: predicted/observed size mismatch");
    io::CsvTable table;
    table.comments = comments;
    table.header = {"k", "observed_rate", "predicted_rate", "below_floor"};
    for (std::size_t i = 0; i < rates.size(); ++i) {
        const std::string pred =
            predicted.empty() ? std::string("nan") : io::format_double(predicted[i]);
        table.rows.push_back({std::to_string(rates[i].k), io::format_double(rates[i].rate), pred,
                              rates[i].below_floor ? "true" : "false"});
    }
    io::write_csv(table, path);
}

} // namespace dhelm
