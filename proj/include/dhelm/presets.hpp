#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dhelm/mode_analysis.hpp"

namespace dhelm {

inline constexpr const char* kToolVersion = "0.1.0";

/// How the overlap width of a curve is chosen. Fixed uses the stored width
/// directly; ThirdWavelength evaluates multiplier/(3*omega) per curve;
/// OverN evaluates c/N per curve.
struct OverlapRule {
    enum class Kind { Fixed, ThirdWavelength, OverN };
    Kind kind = Kind::Fixed;
    double value = 0.0; ///< Fixed: the width; ThirdWavelength: multiplier; OverN: c

    static OverlapRule fixed(double width);
    static OverlapRule third_wavelength(double multiplier = 1.0);
    static OverlapRule over_n(double c);

    /// Parses "0.01", "1/(3omega)", "2/(3omega)" or "0.1/N".
    static OverlapRule parse(const std::string& text);

    double width(double omega, int n_subdomains) const;
    /// Human-readable form, e.g. "0.01", "1/(3omega)", "0.1/N".
    std::string describe() const;
    /// Filesystem-safe form, e.g. "L0p01", "Lthird", "L2third", "L0p1overN".
    std::string file_token() const;
};

/// Which parameter varies between the curves of one chart; all other
/// parameters are held fixed within a chart and their combinations become
/// separate output files.
enum class CurveAxis { Damping, Omega, Subdomains, Overlap };

/// A family of contraction-factor sweeps. Exactly one damping list (r or
/// gamma) may be populated; the inactive mechanism is zero. Validate with
/// `validate()` before running.
struct SweepConfig {
    std::string name = "custom";
    BoundaryConfig bc = BoundaryConfig::waveguide();
    CurveAxis curve_axis = CurveAxis::Damping;

    std::vector<double> r_list;     ///< first-order damping values
    std::vector<double> gamma_list; ///< viscoelastic damping values
    std::vector<double> omega_list{100.0};
    std::vector<int> n_list{2};
    std::vector<OverlapRule> overlap_list{OverlapRule::fixed(0.0)};

    enum class ModeGrid { Physical, Scan };
    ModeGrid mode_grid = ModeGrid::Scan;
    double xi_max_ratio = 2.0; ///< scan grid reaches xi/omega = xi_max_ratio
    int xi_points = 400;       ///< scan grid sample count

    std::filesystem::path out_dir = ".";
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Built-in sweep families; throws std::invalid_argument for unknown names.
///   fig1         waveguide, r in {0, 0.1, 1, 10, 100}, omega 100, N 2,
///                overlaps {0, 1/(3omega)}
///   fig1-cavity  the cavity counterpart of fig1
///   gamma        waveguide, gamma in {1e-8 .. 1e-3}, omega 100, N 2,
///                overlaps {0, 1/(3omega)}
///   gamma-cavity the cavity counterpart of gamma
///   omega        curves omega in {25, 50, 100, 200, 400}, r 1, N 2,
///                L = 1/(3omega)
///   nscaling     curves N in {2, 4, 8, 16, 32}, gamma 1e-3, omega 100,
///                L = 0.1/N
///   overlap      curves L in {0, 1/(3omega), 2/(3omega)}, r 1, omega 100, N 2
SweepConfig preset_config(const std::string& name);

std::vector<std::string> preset_names();

/// Reads a JSON sweep description and applies it on top of `base` (typically
/// a preset or a default-constructed config). Unknown keys and type errors
/// are reported with the offending field name; parse errors carry the
/// position diagnostics of the JSON parser.
SweepConfig load_sweep_config(const std::filesystem::path& path, SweepConfig base = {});
SweepConfig parse_sweep_config(const std::string& json_text, SweepConfig base = {},
                               const std::string& origin = "<config>");

/// Everything written by run_sweep, in emission order.
struct SweepOutputs {
    std::vector<std::filesystem::path> csv_files;
    std::vector<std::filesystem::path> svg_files;
};

/// Evaluates the contraction factor over the configured grids and writes one
/// CSV and one SVG chart per combination of the non-curve parameters.
/// Deterministic: identical configs produce byte-identical files, whatever
/// the worker count (0 = hardware concurrency).
SweepOutputs run_sweep(const SweepConfig& config, unsigned threads = 0);

} // namespace dhelm
