#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace dhelm::io {

/// Shortest round-trip decimal form of v ("inf", "-inf", "nan" for non-finite).
std::string format_double(double v);

/// Inverse of format_double. Throws std::invalid_argument on junk.
double parse_double(const std::string& text);

/// Minimal CSV with '#'-prefixed provenance comments before the header row.
/// Fields must not contain commas, quotes or newlines (we only ever store
/// numbers and short tokens); write_csv enforces this.
struct CsvTable {
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

void write_csv(const CsvTable& table, const std::filesystem::path& path);
CsvTable read_csv(const std::filesystem::path& path);

/// One labelled curve of a line chart. Non-finite y values are rendered as
/// capped markers at the top of the axis (used for the rho = +inf sentinel).
struct Curve {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct AxesSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
};

/// Self-contained SVG line chart with legend; byte-deterministic for
/// identical inputs. Throws std::invalid_argument when no curve carries data.
void write_svg_lineplot(const std::vector<Curve>& curves, const AxesSpec& axes,
                        const std::filesystem::path& path);

enum class RasterMap {
    Magnitude, ///< white (0) to black (max |value|)
    Diverging, ///< blue (negative) / white (0) / red (positive), symmetric
};

/// SVG raster of a scalar field sampled on an (nx x ny) node grid,
/// values[iy*nx + ix] with iy = 0 at the bottom. Grids larger than ~160 per
/// axis are block-averaged before rendering; the CSV export keeps full
/// resolution, this is only the picture.
void write_svg_raster(const std::vector<double>& values, int nx, int ny, RasterMap map,
                      const std::string& title, const std::vector<std::string>& comments,
                      const std::filesystem::path& path);

} // namespace dhelm::io
