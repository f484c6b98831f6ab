#include "dhelm/presets.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"

#include "dhelm/io.hpp"
#include "dhelm/util.hpp"

namespace dhelm {

namespace {

/// Filesystem-safe spelling of a numeric token: 0.1 -> 0p1, 1e-05 -> 1em05.
std::string sanitize_number(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (c == '.')
            out.push_back('p');
        else if (c == '-')
            out.push_back('m');
        else if (c != '+')
            out.push_back(c);
    }
    return out;
}

std::string strip_spaces(const std::string& text) {
    std::string out;
    for (char c : text)
        if (c != ' ' && c != '\t') out.push_back(c);
    return out;
}

} // namespace

OverlapRule OverlapRule::fixed(double width) { return {Kind::Fixed, width}; }
OverlapRule OverlapRule::third_wavelength(double multiplier) {
    return {Kind::ThirdWavelength, multiplier};
}
OverlapRule OverlapRule::over_n(double c) { return {Kind::OverN, c}; }

OverlapRule OverlapRule::parse(const std::string& text) {
    const std::string s = strip_spaces(text);
    const std::string third_tail = "/(3omega)";
    const std::string over_n_tail = "/N";
    if (s.size() > third_tail.size() &&
        s.compare(s.size() - third_tail.size(), third_tail.size(), third_tail) == 0) {
        const double m = io::parse_double(s.substr(0, s.size() - third_tail.size()));
        if (!(m > 0.0))
            throw std::invalid_argument("overlap rule '" + text + "': multiplier must be > 0");
        return third_wavelength(m);
    }
    if (s.size() > over_n_tail.size() &&
        s.compare(s.size() - over_n_tail.size(), over_n_tail.size(), over_n_tail) == 0) {
        const double c = io::parse_double(s.substr(0, s.size() - over_n_tail.size()));
        if (!(c >= 0.0))
            throw std::invalid_argument("overlap rule '" + text + "': constant must be >= 0");
        return over_n(c);
    }
    double width = 0.0;
    try {
        width = io::parse_double(s);
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("overlap rule '" + text +
                                    "': expected a width, 'm/(3omega)' or 'c/N'");
    }
    if (!(width >= 0.0))
        throw std::invalid_argument("overlap rule '" + text + "': width must be >= 0");
    return fixed(width);
}

double OverlapRule::width(double omega, int n_subdomains) const {
    switch (kind) {
    case Kind::Fixed: return value;
    case Kind::ThirdWavelength: return value / (3.0 * omega);
    case Kind::OverN: return value / static_cast<double>(n_subdomains);
    }
    throw std::logic_error("OverlapRule: bad kind");
}

std::string OverlapRule::describe() const {
    switch (kind) {
    case Kind::Fixed: return io::format_double(value);
    case Kind::ThirdWavelength: return io::format_double(value) + "/(3omega)";
    case Kind::OverN: return io::format_double(value) + "/N";
    }
    throw std::logic_error("OverlapRule: bad kind");
}

std::string OverlapRule::file_token() const {
    switch (kind) {
    case Kind::Fixed: return "L" + sanitize_number(io::format_double(value));
    case Kind::ThirdWavelength:
        return value == 1.0 ? std::string("Lthird")
                            : "L" + sanitize_number(io::format_double(value)) + "third";
    case Kind::OverN: return "L" + sanitize_number(io::format_double(value)) + "overN";
    }
    throw std::logic_error("OverlapRule: bad kind");
}

void SweepConfig::validate() const {
    if (!r_list.empty() && !gamma_list.empty())
        throw std::invalid_argument(
            "config: exactly one damping list (r or gamma) may be populated");
    if (r_list.empty() && gamma_list.empty())
        throw std::invalid_argument("config: one damping list (r or gamma) must be populated");
    for (double r : r_list)
        if (!(r >= 0.0)) throw std::invalid_argument("config field 'r': values must be >= 0");
    for (double g : gamma_list)
        if (!(g >= 0.0)) throw std::invalid_argument("config field 'gamma': values must be >= 0");
    if (omega_list.empty())
        throw std::invalid_argument("config field 'omega': list must be nonempty");
    for (double w : omega_list)
        if (!(w > 0.0)) throw std::invalid_argument("config field 'omega': values must be > 0");
    if (n_list.empty()) throw std::invalid_argument("config field 'N': list must be nonempty");
    for (int n : n_list)
        if (n < 2) throw std::invalid_argument("config field 'N': values must be >= 2");
    if (overlap_list.empty())
        throw std::invalid_argument("config field 'L': list must be nonempty");
    if (mode_grid == ModeGrid::Scan) {
        if (!(xi_max_ratio > 0.0))
            throw std::invalid_argument("config field 'xi_max_ratio': must be > 0");
        if (xi_points < 2)
            throw std::invalid_argument("config field 'xi_points': must be >= 2");
    }
}

SweepConfig preset_config(const std::string& name) {
    SweepConfig c;
    c.name = name;
    if (name == "fig1" || name == "fig1-cavity") {
        c.bc = name == "fig1" ? BoundaryConfig::waveguide() : BoundaryConfig::cavity();
        c.curve_axis = CurveAxis::Damping;
        c.r_list = {0.0, 0.1, 1.0, 10.0, 100.0};
        c.omega_list = {100.0};
        c.n_list = {2};
        c.overlap_list = {OverlapRule::fixed(0.0), OverlapRule::third_wavelength()};
    } else if (name == "gamma" || name == "gamma-cavity") {
        c.bc = name == "gamma" ? BoundaryConfig::waveguide() : BoundaryConfig::cavity();
        c.curve_axis = CurveAxis::Damping;
        c.gamma_list = {1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3};
        c.omega_list = {100.0};
        c.n_list = {2};
        c.overlap_list = {OverlapRule::fixed(0.0), OverlapRule::third_wavelength()};
    } else if (name == "omega") {
        c.bc = BoundaryConfig::waveguide();
        c.curve_axis = CurveAxis::Omega;
        c.r_list = {1.0};
        c.omega_list = {25.0, 50.0, 100.0, 200.0, 400.0};
        c.n_list = {2};
        c.overlap_list = {OverlapRule::third_wavelength()};
    } else if (name == "nscaling") {
        c.bc = BoundaryConfig::waveguide();
        c.curve_axis = CurveAxis::Subdomains;
        c.gamma_list = {1e-3};
        c.omega_list = {100.0};
        c.n_list = {2, 4, 8, 16, 32};
        c.overlap_list = {OverlapRule::over_n(0.1)};
    } else if (name == "overlap") {
        c.bc = BoundaryConfig::waveguide();
        c.curve_axis = CurveAxis::Overlap;
        c.r_list = {1.0};
        c.omega_list = {100.0};
        c.n_list = {2};
        c.overlap_list = {OverlapRule::fixed(0.0), OverlapRule::third_wavelength(1.0),
                          OverlapRule::third_wavelength(2.0)};
    } else {
        throw std::invalid_argument("unknown preset '" + name + "'");
    }
    return c;
}

std::vector<std::string> preset_names() {
    return {"fig1", "fig1-cavity", "gamma", "gamma-cavity", "omega", "nscaling", "overlap"};
}

namespace {

using nlohmann::json;

std::vector<double> number_list(const json& j, const std::string& key) {
    const json& v = j.at(key);
    if (!v.is_array())
        throw std::invalid_argument("config field '" + key + "': expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const json& e : v) {
        if (!e.is_number())
            throw std::invalid_argument("config field '" + key + "': expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<int> int_list(const json& j, const std::string& key) {
    const json& v = j.at(key);
    if (!v.is_array())
        throw std::invalid_argument("config field '" + key + "': expected an array of integers");
    std::vector<int> out;
    out.reserve(v.size());
    for (const json& e : v) {
        if (!e.is_number_integer())
            throw std::invalid_argument("config field '" + key +
                                        "': expected an array of integers");
        out.push_back(e.get<int>());
    }
    return out;
}

std::string string_field(const json& j, const std::string& key) {
    const json& v = j.at(key);
    if (!v.is_string())
        throw std::invalid_argument("config field '" + key + "': expected a string");
    return v.get<std::string>();
}

CurveAxis parse_curve_axis(const std::string& text) {
    if (text == "r" || text == "gamma" || text == "damping") return CurveAxis::Damping;
    if (text == "omega") return CurveAxis::Omega;
    if (text == "N") return CurveAxis::Subdomains;
    if (text == "L") return CurveAxis::Overlap;
    throw std::invalid_argument("config field 'curves': expected r, gamma, omega, N or L, got '" +
                                text + "'");
}

} // namespace

SweepConfig parse_sweep_config(const std::string& json_text, SweepConfig base,
                               const std::string& origin) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(origin + ": " + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument(origin + ": top level must be a JSON object");

    if (j.contains("preset")) {
        base = preset_config(string_field(j, "preset"));
        j.erase("preset");
    }
    for (const auto& item : j.items()) {
        const std::string& key = item.key();
        if (key == "name") {
            base.name = string_field(j, key);
        } else if (key == "bc") {
            base.bc = BoundaryConfig::from_name(string_field(j, key));
        } else if (key == "curves") {
            base.curve_axis = parse_curve_axis(string_field(j, key));
        } else if (key == "r") {
            base.r_list = number_list(j, key);
            if (!base.r_list.empty()) base.gamma_list.clear();
        } else if (key == "gamma") {
            base.gamma_list = number_list(j, key);
            if (!base.gamma_list.empty()) base.r_list.clear();
        } else if (key == "omega") {
            base.omega_list = number_list(j, key);
        } else if (key == "N") {
            base.n_list = int_list(j, key);
        } else if (key == "L") {
            const json& v = j.at(key);
            if (!v.is_array())
                throw std::invalid_argument(
                    "config field 'L': expected an array of widths or rule strings");
            base.overlap_list.clear();
            for (const json& e : v) {
                if (e.is_number())
                    base.overlap_list.push_back(OverlapRule::fixed(e.get<double>()));
                else if (e.is_string())
                    base.overlap_list.push_back(OverlapRule::parse(e.get<std::string>()));
                else
                    throw std::invalid_argument(
                        "config field 'L': entries must be numbers or rule strings");
            }
        } else if (key == "modes") {
            const std::string m = string_field(j, key);
            if (m == "physical")
                base.mode_grid = SweepConfig::ModeGrid::Physical;
            else if (m == "scan")
                base.mode_grid = SweepConfig::ModeGrid::Scan;
            else
                throw std::invalid_argument(
                    "config field 'modes': expected 'physical' or 'scan', got '" + m + "'");
        } else if (key == "xi_max_ratio") {
            if (!j.at(key).is_number())
                throw std::invalid_argument("config field 'xi_max_ratio': expected a number");
            base.xi_max_ratio = j.at(key).get<double>();
        } else if (key == "xi_points") {
            if (!j.at(key).is_number_integer())
                throw std::invalid_argument("config field 'xi_points': expected an integer");
            base.xi_points = j.at(key).get<int>();
        } else if (key == "out") {
            base.out_dir = string_field(j, key);
        } else if (key == "seed") {
            if (!j.at(key).is_number_unsigned())
                throw std::invalid_argument("config field 'seed': expected a non-negative integer");
            base.seed = j.at(key).get<std::uint64_t>();
        } else {
            throw std::invalid_argument(origin + ": unknown config field '" + key + "'");
        }
    }
    base.validate();
    return base;
}

SweepConfig load_sweep_config(const std::filesystem::path& path, SweepConfig base) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_sweep_config(buf.str(), std::move(base), path.string());
}

namespace {

/// One fully resolved parameter point of a sweep.
struct ParamPoint {
    double r = 0.0;
    double gamma = 0.0;
    double omega = 0.0;
    int n_subdomains = 0;
    OverlapRule overlap;
};

std::string list_text(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += io::format_double(values[i]);
    }
    return out;
}

} // namespace

SweepOutputs run_sweep(const SweepConfig& config, unsigned threads) {
    config.validate();
    std::filesystem::create_directories(config.out_dir);

    const bool damping_is_r = !config.r_list.empty();
    const std::vector<double>& damping_values = damping_is_r ? config.r_list : config.gamma_list;
    const std::string damping_name = damping_is_r ? "r" : "gamma";

    // Per-family fixed values: every axis except the curve axis contributes
    // one dimension to the cartesian product.
    const bool curve_damping = config.curve_axis == CurveAxis::Damping;
    const bool curve_omega = config.curve_axis == CurveAxis::Omega;
    const bool curve_n = config.curve_axis == CurveAxis::Subdomains;
    const bool curve_overlap = config.curve_axis == CurveAxis::Overlap;

    const std::size_t n_damping = curve_damping ? 1 : damping_values.size();
    const std::size_t n_omega = curve_omega ? 1 : config.omega_list.size();
    const std::size_t n_sub = curve_n ? 1 : config.n_list.size();
    const std::size_t n_overlap = curve_overlap ? 1 : config.overlap_list.size();

    const std::size_t n_curves = curve_damping  ? damping_values.size()
                                 : curve_omega  ? config.omega_list.size()
                                 : curve_n      ? config.n_list.size()
                                                : config.overlap_list.size();

    SweepOutputs outputs;
    for (std::size_t fd = 0; fd < n_damping; ++fd)
        for (std::size_t fw = 0; fw < n_omega; ++fw)
            for (std::size_t fn = 0; fn < n_sub; ++fn)
                for (std::size_t fl = 0; fl < n_overlap; ++fl) {
                    // Resolve the parameter point of curve `c` in this family.
                    auto point_of = [&](std::size_t c) {
                        ParamPoint p;
                        const double d = damping_values[curve_damping ? c : fd];
                        (damping_is_r ? p.r : p.gamma) = d;
                        p.omega = config.omega_list[curve_omega ? c : fw];
                        p.n_subdomains = config.n_list[curve_n ? c : fn];
                        p.overlap = config.overlap_list[curve_overlap ? c : fl];
                        return p;
                    };

                    // Flatten (curve, xi) into one task list so the parallel
                    // map covers the whole family.
                    std::vector<std::vector<double>> grids(n_curves);
                    std::vector<std::pair<std::size_t, double>> tasks;
                    for (std::size_t c = 0; c < n_curves; ++c) {
                        const ParamPoint p = point_of(c);
                        grids[c] = config.mode_grid == SweepConfig::ModeGrid::Physical
                                       ? physical_mode_grid(p.omega)
                                       : uniform_scan_grid(p.omega, config.xi_max_ratio,
                                                           config.xi_points);
                        for (double xi : grids[c]) tasks.emplace_back(c, xi);
                    }

                    std::vector<ModeRho> results = parallel_map_index(
                        tasks.size(),
                        [&](std::size_t i) {
                            const auto [c, xi] = tasks[i];
                            const ParamPoint p = point_of(c);
                            const DampedCoefficient coeff =
                                compute_eta(PhysicalParams(p.omega, p.r, p.gamma));
                            const Decomposition decomp = build_decomposition(
                                p.n_subdomains, p.overlap.width(p.omega, p.n_subdomains));
                            return convergence_factor_at(coeff, decomp, config.bc, xi);
                        },
                        threads);

                    // Provenance shared by the CSV and the chart.
                    const ParamPoint p0 = point_of(0);
                    std::vector<std::string> comments;
                    comments.push_back(std::string("tool: dhelm ") + kToolVersion);
                    comments.push_back("preset: " + config.name);
                    comments.push_back("bc: " + config.bc.name());
                    if (curve_damping)
                        comments.push_back("curves: " + damping_name + " in {" +
                                           list_text(damping_values) + "}");
                    else
                        comments.push_back(damping_name + ": " +
                                           io::format_double(damping_is_r ? p0.r : p0.gamma));
                    if (curve_omega)
                        comments.push_back("curves: omega in {" + list_text(config.omega_list) +
                                           "}");
                    else
                        comments.push_back("omega: " + io::format_double(p0.omega));
                    if (curve_n) {
                        std::string txt = "curves: N in {";
                        for (std::size_t i = 0; i < config.n_list.size(); ++i)
                            txt += (i ? ", " : "") + std::to_string(config.n_list[i]);
                        comments.push_back(txt + "}");
                    } else {
                        comments.push_back("N: " + std::to_string(p0.n_subdomains));
                    }
                    if (curve_overlap) {
                        std::string txt = "curves: L in {";
                        for (std::size_t i = 0; i < config.overlap_list.size(); ++i)
                            txt += (i ? ", " : "") + config.overlap_list[i].describe();
                        comments.push_back(txt + "}");
                    } else {
                        comments.push_back("L: " + p0.overlap.describe());
                    }
                    comments.push_back(
                        config.mode_grid == SweepConfig::ModeGrid::Physical
                            ? std::string("mode grid: physical, xi = k*pi up to 3*omega")
                            : "mode grid: scan, " + std::to_string(config.xi_points) +
                                  " points, xi/omega <= " + io::format_double(config.xi_max_ratio));
                    comments.push_back("seed: " + std::to_string(config.seed));
                    comments.push_back("L columns: nominal = rule width; mode analysis is "
                                       "continuous, only discrete runs snap overlaps");

                    // File name: sweep name plus the fixed (non-curve) axes.
                    std::string suffix;
                    if (!curve_damping)
                        suffix += std::string("_") + (damping_is_r ? "r" : "g") +
                                  sanitize_number(io::format_double(damping_is_r ? p0.r : p0.gamma));
                    if (!curve_omega)
                        suffix += "_w" + sanitize_number(io::format_double(p0.omega));
                    if (!curve_n) suffix += "_N" + std::to_string(p0.n_subdomains);
                    if (!curve_overlap) suffix += "_" + p0.overlap.file_token();
                    const std::string stem = config.name + suffix;

                    io::CsvTable table;
                    table.comments = comments;
                    table.header = {"preset", "bc",    "omega",         "r",
                                    "gamma",  "N",     "L_nominal",     "L_effective",
                                    "xi",     "xi_over_omega", "rho",   "diverged",
                                    "note"};
                    std::vector<io::Curve> curves(n_curves);
                    std::size_t t = 0;
                    for (std::size_t c = 0; c < n_curves; ++c) {
                        const ParamPoint p = point_of(c);
                        const double width = p.overlap.width(p.omega, p.n_subdomains);
                        if (curve_damping)
                            curves[c].label =
                                damping_name + "=" + io::format_double(damping_values[c]);
                        else if (curve_omega)
                            curves[c].label = "omega=" + io::format_double(p.omega);
                        else if (curve_n)
                            curves[c].label = "N=" + std::to_string(p.n_subdomains);
                        else
                            curves[c].label = "L=" + p.overlap.describe();
                        for (std::size_t g = 0; g < grids[c].size(); ++g, ++t) {
                            const ModeRho& m = results[t];
                            table.rows.push_back({config.name, config.bc.name(),
                                                  io::format_double(p.omega),
                                                  io::format_double(p.r),
                                                  io::format_double(p.gamma),
                                                  std::to_string(p.n_subdomains),
                                                  io::format_double(width),
                                                  io::format_double(width),
                                                  io::format_double(m.xi_used),
                                                  io::format_double(m.xi_used / p.omega),
                                                  io::format_double(m.rho),
                                                  m.diverged ? "true" : "false", m.note});
                            curves[c].x.push_back(m.xi_used / p.omega);
                            curves[c].y.push_back(m.rho);
                        }
                    }

                    const std::filesystem::path csv_path = config.out_dir / (stem + ".csv");
                    io::write_csv(table, csv_path);
                    outputs.csv_files.push_back(csv_path);

                    io::AxesSpec axes;
                    axes.title = config.name + " (" + config.bc.name() + ")";
                    axes.x_label = "xi / omega";
                    axes.y_label = "contraction factor";
                    axes.log_y = true;
                    const std::filesystem::path svg_path = config.out_dir / (stem + ".svg");
                    io::write_svg_lineplot(curves, axes, svg_path);
                    outputs.svg_files.push_back(svg_path);
                }
    return outputs;
}

} // namespace dhelm
