#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dhelm/io.hpp"
#include "dhelm/presets.hpp"
#include "dhelm/schwarz_runner.hpp"
#include "dhelm/validate.hpp"

namespace fs = std::filesystem;
using namespace dhelm;

namespace {

std::string format_cx(cx z) {
    const std::string re = io::format_double(z.real());
    const std::string im = io::format_double(std::abs(z.imag()));
    return re + (z.imag() < 0.0 ? " - " : " + ") + im + "i";
}

SweepConfig::ModeGrid parse_modes(const std::string& text) {
    if (text == "physical") return SweepConfig::ModeGrid::Physical;
    if (text == "scan") return SweepConfig::ModeGrid::Scan;
    throw std::invalid_argument("--modes: expected 'physical' or 'scan', got '" + text + "'");
}

} // namespace

int main(int argc, char** argv) try {
    CLI::App app{"contraction factors of the parallel Schwarz method for the "
                 "damped Helmholtz equation on strip decompositions"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("dhelm ") + kToolVersion);
    int exit_code = 0;

    // ---- eta: closed-form coefficient of one parameter set -----------------
    double e_omega = 100.0, e_r = 0.0, e_gamma = 0.0;
    CLI::App* eta = app.add_subcommand("eta", "print the zeroth-order coefficient, its "
                                              "principal square root and the damping ratio");
    eta->add_option("--omega", e_omega, "angular frequency")->capture_default_str();
    eta->add_option("--r", e_r, "first-order damping")->capture_default_str();
    eta->add_option("--gamma", e_gamma, "viscoelastic damping")->capture_default_str();
    eta->callback([&] {
        const DampedCoefficient c = compute_eta(PhysicalParams(e_omega, e_r, e_gamma));
        std::cout << "eta = " << format_cx(c.eta) << "\n";
        std::cout << "sqrt(eta) = " << format_cx(c.sqrt_eta) << "\n";
        if (c.rhs_scale != cx(1.0, 0.0))
            std::cout << "rhs scale = " << format_cx(c.rhs_scale) << "\n";
        if ((e_r > 0.0) != (e_gamma > 0.0))
            std::cout << "Im/Re(-eta) = "
                      << io::format_double(imag_real_ratio(PhysicalParams(e_omega, e_r, e_gamma)))
                      << "\n";
    });

    // ---- rho: contraction profile of one configuration ---------------------
    double p_omega = 100.0, p_r = 0.0, p_gamma = 0.0, p_ratio = 2.0;
    int p_n = 2, p_points = 400;
    std::string p_overlap = "0", p_bc = "waveguide", p_modes = "scan", p_out = ".";
    std::uint64_t p_seed = 1;
    CLI::App* rho = app.add_subcommand(
        "rho", "contraction factor over a frequency grid for one configuration");
    rho->add_option("--omega", p_omega, "angular frequency")->capture_default_str();
    rho->add_option("--r", p_r, "first-order damping")->capture_default_str();
    rho->add_option("--gamma", p_gamma, "viscoelastic damping")->capture_default_str();
    rho->add_option("--N", p_n, "number of strips")->capture_default_str();
    rho->add_option("--L", p_overlap, "overlap width, or a rule 'm/(3omega)' / 'c/N'")
        ->capture_default_str();
    rho->add_option("--bc", p_bc, "waveguide | cavity | free-space")->capture_default_str();
    rho->add_option("--modes", p_modes, "frequency grid: physical | scan")->capture_default_str();
    rho->add_option("--xi-max-ratio", p_ratio, "scan grid reach in xi/omega")
        ->capture_default_str();
    rho->add_option("--xi-points", p_points, "scan grid sample count")->capture_default_str();
    rho->add_option("--out", p_out, "output directory")->capture_default_str();
    rho->add_option("--seed", p_seed, "seed recorded in the provenance header")
        ->capture_default_str();
    rho->callback([&] {
        if (p_r > 0.0 && p_gamma > 0.0)
            throw std::invalid_argument("rho: set at most one of --r and --gamma");
        SweepConfig cfg;
        cfg.name = "rho";
        cfg.bc = BoundaryConfig::from_name(p_bc);
        if (p_gamma > 0.0)
            cfg.gamma_list = {p_gamma};
        else
            cfg.r_list = {p_r};
        cfg.omega_list = {p_omega};
        cfg.n_list = {p_n};
        cfg.overlap_list = {OverlapRule::parse(p_overlap)};
        cfg.mode_grid = parse_modes(p_modes);
        cfg.xi_max_ratio = p_ratio;
        cfg.xi_points = p_points;
        cfg.out_dir = p_out;
        cfg.seed = p_seed;
        const SweepOutputs outs = run_sweep(cfg);
        for (const fs::path& f : outs.csv_files) std::cout << "wrote " << f.string() << "\n";
        for (const fs::path& f : outs.svg_files) std::cout << "wrote " << f.string() << "\n";
    });

    // ---- sweep: preset or JSON-configured curve families --------------------
    std::string s_preset, s_config, s_bc, s_curves, s_modes, s_out;
    std::vector<double> s_r, s_gamma, s_omega;
    std::vector<int> s_n;
    std::vector<std::string> s_overlap;
    double s_ratio = 0.0;
    int s_points = 0;
    std::uint64_t s_seed = 0;
    bool s_seed_set = false, s_ratio_set = false, s_points_set = false;
    CLI::App* sweep = app.add_subcommand("sweep", "contraction-factor curve families "
                                                  "(CSV + SVG per parameter combination)");
    sweep->add_option("--preset", s_preset,
                      "built-in family: " + [] {
                          std::string names;
                          for (const std::string& n : preset_names())
                              names += (names.empty() ? "" : ", ") + n;
                          return names;
                      }());
    sweep->add_option("--config", s_config, "JSON sweep description (applied over --preset)");
    sweep->add_option("--bc", s_bc, "waveguide | cavity | free-space");
    sweep->add_option("--curves", s_curves, "curve axis: r | gamma | omega | N | L");
    sweep->add_option("--r", s_r, "first-order damping values");
    sweep->add_option("--gamma", s_gamma, "viscoelastic damping values");
    sweep->add_option("--omega", s_omega, "angular frequencies");
    sweep->add_option("--N", s_n, "strip counts");
    sweep->add_option("--L", s_overlap, "overlap widths or rules 'm/(3omega)' / 'c/N'");
    sweep->add_option("--modes", s_modes, "frequency grid: physical | scan");
    sweep->add_option("--xi-max-ratio", s_ratio, "scan grid reach in xi/omega")
        ->each([&](const std::string&) { s_ratio_set = true; });
    sweep->add_option("--xi-points", s_points, "scan grid sample count")
        ->each([&](const std::string&) { s_points_set = true; });
    sweep->add_option("--out", s_out, "output directory");
    sweep->add_option("--seed", s_seed, "seed recorded in the provenance header")
        ->each([&](const std::string&) { s_seed_set = true; });
    sweep->callback([&] {
        SweepConfig cfg;
        bool have_base = false;
        if (!s_preset.empty()) {
            cfg = preset_config(s_preset);
            have_base = true;
        }
        if (!s_config.empty()) {
            cfg = load_sweep_config(s_config, cfg);
            have_base = true;
        }
        if (!s_bc.empty()) cfg.bc = BoundaryConfig::from_name(s_bc);
        if (!s_curves.empty()) {
            if (s_curves == "r" || s_curves == "gamma" || s_curves == "damping")
                cfg.curve_axis = CurveAxis::Damping;
            else if (s_curves == "omega")
                cfg.curve_axis = CurveAxis::Omega;
            else if (s_curves == "N")
                cfg.curve_axis = CurveAxis::Subdomains;
            else if (s_curves == "L")
                cfg.curve_axis = CurveAxis::Overlap;
            else
                throw std::invalid_argument("--curves: expected r, gamma, omega, N or L");
        }
        if (!s_r.empty()) {
            cfg.r_list = s_r;
            cfg.gamma_list.clear();
        }
        if (!s_gamma.empty()) {
            cfg.gamma_list = s_gamma;
            cfg.r_list.clear();
        }
        if (!s_omega.empty()) cfg.omega_list = s_omega;
        if (!s_n.empty()) cfg.n_list = s_n;
        if (!s_overlap.empty()) {
            cfg.overlap_list.clear();
            for (const std::string& rule : s_overlap)
                cfg.overlap_list.push_back(OverlapRule::parse(rule));
        }
        if (!s_modes.empty()) cfg.mode_grid = parse_modes(s_modes);
        if (s_ratio_set) cfg.xi_max_ratio = s_ratio;
        if (s_points_set) cfg.xi_points = s_points;
        if (!s_out.empty()) cfg.out_dir = s_out;
        if (s_seed_set) cfg.seed = s_seed;
        if (!have_base && s_r.empty() && s_gamma.empty())
            throw std::invalid_argument(
                "sweep: give --preset, --config, or explicit axis lists (see --help)");
        const SweepOutputs outs = run_sweep(cfg);
        for (const fs::path& f : outs.csv_files) std::cout << "wrote " << f.string() << "\n";
        for (const fs::path& f : outs.svg_files) std::cout << "wrote " << f.string() << "\n";
    });

    // ---- greens: point-source response field --------------------------------
    double g_omega = 100.0, g_r = 0.0, g_gamma = 0.0, g_x = 0.5, g_y = 0.5;
    int g_grid = 255;
    std::string g_bc = "waveguide", g_out = ".";
    CLI::App* greens = app.add_subcommand("greens", "point-source response field "
                                                    "(CSV + SVG raster of |u|)");
    greens->add_option("--omega", g_omega, "angular frequency")->capture_default_str();
    greens->add_option("--r", g_r, "first-order damping")->capture_default_str();
    greens->add_option("--gamma", g_gamma, "viscoelastic damping")->capture_default_str();
    greens->add_option("--bc", g_bc, "waveguide | cavity | free-space")->capture_default_str();
    greens->add_option("--grid", g_grid, "interior nodes per direction")->capture_default_str();
    greens->add_option("--source-x", g_x, "source x in (0,1)")->capture_default_str();
    greens->add_option("--source-y", g_y, "source y in (0,1)")->capture_default_str();
    greens->add_option("--out", g_out, "output directory")->capture_default_str();
    greens->callback([&] {
        const PhysicalParams params(g_omega, g_r, g_gamma);
        const BoundaryConfig bc = BoundaryConfig::from_name(g_bc);
        const ComplexField field = greens_field(params, bc, g_x, g_y, g_grid);
        double peak = 0.0;
        for (const cx& v : field.values) peak = std::max(peak, std::abs(v));
        const std::vector<std::string> comments = {
            std::string("tool: dhelm ") + kToolVersion,
            "bc: " + bc.name(),
            "omega: " + io::format_double(g_omega),
            "r: " + io::format_double(g_r),
            "gamma: " + io::format_double(g_gamma),
            "grid: " + std::to_string(g_grid) + " interior nodes per direction",
            "source: (" + io::format_double(g_x) + ", " + io::format_double(g_y) + ")",
        };
        fs::create_directories(g_out);
        const fs::path csv = fs::path(g_out) / "greens.csv";
        const fs::path svg = fs::path(g_out) / "greens.svg";
        export_field_csv(field, comments, csv);
        export_field_svg(field, io::RasterMap::Magnitude,
                         "point-source response (" + bc.name() + ")", comments, svg);
        std::cout << "peak |u| = " << io::format_double(peak) << "\n";
        std::cout << "wrote " << csv.string() << "\n";
        std::cout << "wrote " << svg.string() << "\n";
    });

    // ---- run-schwarz: the discrete iteration --------------------------------
    double w_omega = 100.0, w_r = 0.0, w_gamma = 0.0;
    int w_n = 2, w_grid = 255, w_iters = 40;
    std::string w_overlap = "0", w_bc = "waveguide", w_out = ".";
    std::uint64_t w_seed = 1;
    CLI::App* schwarz = app.add_subcommand(
        "run-schwarz", "run the parallel Schwarz iteration on the discrete error equation");
    schwarz->add_option("--omega", w_omega, "angular frequency")->capture_default_str();
    schwarz->add_option("--r", w_r, "first-order damping")->capture_default_str();
    schwarz->add_option("--gamma", w_gamma, "viscoelastic damping")->capture_default_str();
    schwarz->add_option("--N", w_n, "number of strips")->capture_default_str();
    schwarz->add_option("--L", w_overlap, "overlap width, or a rule 'm/(3omega)' / 'c/N'")
        ->capture_default_str();
    schwarz->add_option("--bc", w_bc, "waveguide | cavity | free-space")->capture_default_str();
    schwarz->add_option("--grid", w_grid, "interior nodes per direction")->capture_default_str();
    schwarz->add_option("--iters", w_iters, "maximum sweeps")->capture_default_str();
    schwarz->add_option("--seed", w_seed, "seed of the random initial interface data")
        ->capture_default_str();
    schwarz->add_option("--out", w_out, "output directory")->capture_default_str();
    schwarz->callback([&] {
        const PhysicalParams params(w_omega, w_r, w_gamma);
        const BoundaryConfig bc = BoundaryConfig::from_name(w_bc);
        const Grid2D grid(w_grid);
        const double nominal = OverlapRule::parse(w_overlap).width(w_omega, w_n);
        const Decomposition decomp = build_decomposition(w_n, nominal);
        SchwarzOptions opts;
        opts.max_iters = w_iters;
        opts.seed = w_seed;
        const SchwarzReport report = run_schwarz(params, decomp, bc, grid, opts);

        std::cout << "snapped overlap: " << report.snapped.overlap_cells << " cells ("
                  << io::format_double(report.snapped.overlap_effective) << ", nominal "
                  << io::format_double(nominal) << ")\n";
        std::cout << "rate = " << io::format_double(report.rate) << "\n";
        std::cout << "diverged = " << (report.diverged ? "true" : "false") << "\n";

        const std::vector<std::string> comments = {
            std::string("tool: dhelm ") + kToolVersion,
            "bc: " + bc.name(),
            "omega: " + io::format_double(w_omega),
            "r: " + io::format_double(w_r),
            "gamma: " + io::format_double(w_gamma),
            "N: " + std::to_string(w_n),
            "L nominal: " + io::format_double(nominal),
            "L effective: " + io::format_double(report.snapped.overlap_effective) + " (" +
                std::to_string(report.snapped.overlap_cells) + " cells)",
            "grid: " + std::to_string(w_grid) + " interior nodes per direction",
            "seed: " + std::to_string(w_seed),
        };
        fs::create_directories(w_out);
        const fs::path norms_csv = fs::path(w_out) / "trace_norms.csv";
        export_trace_norms_csv(report, comments, norms_csv);
        std::cout << "wrote " << norms_csv.string() << "\n";

        io::Curve curve;
        curve.label = "trace norm";
        for (std::size_t i = 0; i < report.trace_norms.size(); ++i) {
            curve.x.push_back(static_cast<double>(i));
            curve.y.push_back(report.trace_norms[i]);
        }
        io::AxesSpec axes;
        axes.title = "Schwarz trace norms (" + bc.name() + ")";
        axes.x_label = "iteration";
        axes.y_label = "interface trace norm";
        axes.log_y = true;
        const fs::path norms_svg = fs::path(w_out) / "trace_norms.svg";
        io::write_svg_lineplot({curve}, axes, norms_svg);
        std::cout << "wrote " << norms_svg.string() << "\n";

        if (bc.lateral_dirichlet() && !report.trace_history.empty() &&
            report.trace_history.size() >= 10) {
            const std::vector<ModeRate> rates = per_mode_contraction(report, 10);
            const DampedCoefficient coeff = compute_eta(params);
            const Decomposition snapped =
                build_decomposition(w_n, report.snapped.overlap_effective);
            std::vector<double> predicted;
            for (const ModeRate& m : rates)
                predicted.push_back(
                    convergence_factor_at(coeff, snapped, bc, m.k * M_PI).rho);
            const fs::path modes_csv = fs::path(w_out) / "mode_rates.csv";
            export_mode_rates_csv(rates, predicted, comments, modes_csv);
            std::cout << "wrote " << modes_csv.string() << "\n";
        }
    });

    // ---- validate: the acceptance gate --------------------------------------
    CLI::App* validate = app.add_subcommand(
        "validate", "run the acceptance suite and print one verdict per criterion");
    validate->callback([&] {
        const std::vector<CriterionResult> results = run_acceptance(std::cout);
        const bool ok = all_passed(results);
        std::cout << (ok ? "all criteria passed" : "ACCEPTANCE FAILED") << "\n";
        if (!ok) exit_code = 1;
    });

    CLI11_PARSE(app, argc, argv);
    return exit_code;
} catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
}
