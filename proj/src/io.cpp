#include "dhelm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dhelm::io {

namespace {

void check_field(const std::string& field) {
    if (field.find_first_of(",\"\n\r") != std::string::npos)
        throw std::invalid_argument("csv field contains a delimiter: " + field);
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += c;
        }
    }
    return out;
}

/// Fixed two-decimal pixel coordinates keep the SVG byte-deterministic.
std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

struct LinearTicks {
    std::vector<double> values;
};

LinearTicks nice_ticks(double lo, double hi) {
    LinearTicks t;
    const double range = hi - lo;
    if (!(range > 0.0)) {
        t.values = {lo};
        return t;
    }
    double step = std::pow(10.0, std::floor(std::log10(range / 5.0)));
    if (range / step > 10.0) step *= 2.0;
    if (range / step > 10.0) step *= 2.5;
    if (range / step > 10.0) step *= 2.0;
    const double first = std::ceil(lo / step) * step;
    for (double v = first; v <= hi + 1e-9 * range; v += step) t.values.push_back(v);
    return t;
}

std::string tick_label(double v) {
    char buf[32];
    const double av = std::abs(v);
    if (v == 0.0)
        std::snprintf(buf, sizeof(buf), "0");
    else if (av >= 1e4 || av < 1e-3)
        std::snprintf(buf, sizeof(buf), "%.1e", v);
    else
        std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string rgb_hex(int r, int g, int b) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

} // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw std::invalid_argument("not a number: '" + text + "'");
    return v;
}

void write_csv(const CsvTable& table, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    for (const auto& c : table.comments) out << "# " << c << "\n";
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        check_field(table.header[i]);
        out << table.header[i] << (i + 1 < table.header.size() ? "," : "");
    }
    out << "\n";
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw std::invalid_argument("csv row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            check_field(row[i]);
            out << row[i] << (i + 1 < row.size() ? "," : "");
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line.front() == '#') {
            std::string c = line.substr(1);
            if (!c.empty() && c.front() == ' ') c.erase(c.begin());
            table.comments.push_back(c);
            continue;
        }
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ss(line);
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (line.empty() || (!line.empty() && line.back() == ',')) fields.push_back("");
        if (line.empty()) continue;
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
        } else {
            table.rows.push_back(std::move(fields));
        }
    }
    return table;
}

void write_svg_lineplot(const std::vector<Curve>& curves, const AxesSpec& axes,
                        const std::filesystem::path& path) {
    if (curves.empty()) throw std::invalid_argument("svg lineplot: no curves");

    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    double y_pos_min = x_lo; // smallest positive value, for log scaling
    bool any_finite = false;
    for (const auto& c : curves) {
        if (c.x.size() != c.y.size())
            throw std::invalid_argument("svg lineplot: curve '" + c.label + "' x/y length mismatch");
        for (std::size_t i = 0; i < c.x.size(); ++i) {
            if (!std::isfinite(c.x[i])) continue;
            x_lo = std::min(x_lo, c.x[i]);
            x_hi = std::max(x_hi, c.x[i]);
            if (std::isfinite(c.y[i])) {
                any_finite = true;
                y_lo = std::min(y_lo, c.y[i]);
                y_hi = std::max(y_hi, c.y[i]);
                if (c.y[i] > 0.0) y_pos_min = std::min(y_pos_min, c.y[i]);
            }
        }
    }
    if (!any_finite || !(x_hi >= x_lo))
        throw std::invalid_argument("svg lineplot: no finite data points");

    if (x_hi == x_lo) {
        x_lo -= 0.5;
        x_hi += 0.5;
    }

    // vertical transform (possibly log10) and padded range
    double ty_lo, ty_hi;
    double log_floor = 0.0;
    if (axes.log_y) {
        if (!std::isfinite(y_pos_min)) y_pos_min = 1e-16;
        log_floor = y_pos_min / 10.0;
        ty_lo = std::log10(log_floor);
        ty_hi = std::log10(std::max(y_hi, y_pos_min));
        if (ty_hi == ty_lo) ty_hi += 1.0;
    } else {
        ty_lo = y_lo;
        ty_hi = y_hi;
        if (ty_hi == ty_lo) {
            ty_lo -= 0.5;
            ty_hi += 0.5;
        }
        const double pad = 0.05 * (ty_hi - ty_lo);
        ty_lo -= pad;
        ty_hi += pad;
    }

    const double width = 800, height = 520;
    const double ml = 74, mr = 190, mt = 42, mb = 58;
    const double pw = width - ml - mr, ph = height - mt - mb;

    auto tx = [&](double x) { return ml + pw * (x - x_lo) / (x_hi - x_lo); };
    auto ty = [&](double y) {
        double v;
        if (axes.log_y)
            v = std::log10(std::max(y, log_floor));
        else
            v = y;
        v = std::clamp(v, ty_lo, ty_hi);
        return mt + ph * (1.0 - (v - ty_lo) / (ty_hi - ty_lo));
    };

    std::ofstream out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << px(ml + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << xml_escape(axes.title) << "</text>\n";

    // frame
    out << "<rect x=\"" << px(ml) << "\" y=\"" << px(mt) << "\" width=\"" << px(pw)
        << "\" height=\"" << px(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

    // x ticks
    for (double v : nice_ticks(x_lo, x_hi).values) {
        const double X = tx(v);
        out << "<line x1=\"" << px(X) << "\" y1=\"" << px(mt + ph) << "\" x2=\"" << px(X)
            << "\" y2=\"" << px(mt + ph + 5) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << px(X) << "\" y=\"" << px(mt + ph + 20)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << tick_label(v) << "</text>\n";
    }
    // y ticks
    if (axes.log_y) {
        const int d_lo = static_cast<int>(std::ceil(ty_lo));
        const int d_hi = static_cast<int>(std::floor(ty_hi));
        for (int d = d_lo; d <= d_hi; ++d) {
            const double Y = mt + ph * (1.0 - (d - ty_lo) / (ty_hi - ty_lo));
            out << "<line x1=\"" << px(ml - 5) << "\" y1=\"" << px(Y) << "\" x2=\"" << px(ml)
                << "\" y2=\"" << px(Y) << "\" stroke=\"black\"/>\n";
            out << "<text x=\"" << px(ml - 8) << "\" y=\"" << px(Y + 4)
                << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" << d
                << "</text>\n";
        }
    } else {
        for (double v : nice_ticks(ty_lo, ty_hi).values) {
            const double Y = ty(v);
            out << "<line x1=\"" << px(ml - 5) << "\" y1=\"" << px(Y) << "\" x2=\"" << px(ml)
                << "\" y2=\"" << px(Y) << "\" stroke=\"black\"/>\n";
            out << "<text x=\"" << px(ml - 8) << "\" y=\"" << px(Y + 4)
                << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
                << tick_label(v) << "</text>\n";
        }
    }

    out << "<text x=\"" << px(ml + pw / 2) << "\" y=\"" << px(height - 14)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << xml_escape(axes.x_label) << "</text>\n";
    out << "<text x=\"20\" y=\"" << px(mt + ph / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 20 " << px(mt + ph / 2) << ")\">" << xml_escape(axes.y_label)
        << "</text>\n";

    for (std::size_t ci = 0; ci < curves.size(); ++ci) {
        const auto& c = curves[ci];
        const char* color = kPalette[ci % (sizeof(kPalette) / sizeof(kPalette[0]))];
        std::vector<std::pair<double, double>> run; // pixel points of a contiguous segment
        std::vector<std::pair<double, double>> caps; // +inf markers

        auto flush = [&]() {
            if (run.size() >= 2) {
                out << "<polyline fill=\"none\" stroke=\"" << color
                    << "\" stroke-width=\"1.5\" points=\"";
                for (std::size_t i = 0; i < run.size(); ++i)
                    out << (i ? " " : "") << px(run[i].first) << "," << px(run[i].second);
                out << "\"/>\n";
            } else if (run.size() == 1) {
                out << "<circle cx=\"" << px(run[0].first) << "\" cy=\"" << px(run[0].second)
                    << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
            }
            run.clear();
        };

        for (std::size_t i = 0; i < c.x.size(); ++i) {
            if (!std::isfinite(c.x[i]) || std::isnan(c.y[i])) {
                flush();
                continue;
            }
            const double X = tx(c.x[i]);
            double Y;
            if (std::isinf(c.y[i]) && c.y[i] > 0) {
                Y = mt; // capped at the axis top
                caps.emplace_back(X, Y);
            } else if (std::isinf(c.y[i])) {
                flush();
                continue;
            } else {
                Y = ty(c.y[i]);
            }
            run.emplace_back(X, Y);
        }
        flush();
        for (auto [X, Y] : caps)
            out << "<path d=\"M " << px(X - 4) << " " << px(Y + 6) << " L " << px(X) << " "
                << px(Y) << " L " << px(X + 4) << " " << px(Y + 6) << " Z\" fill=\"" << color
                << "\"/>\n";

        // legend entry
        const double ly = mt + 14 + 18.0 * static_cast<double>(ci);
        out << "<line x1=\"" << px(ml + pw + 12) << "\" y1=\"" << px(ly) << "\" x2=\""
            << px(ml + pw + 34) << "\" y2=\"" << px(ly) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << px(ml + pw + 40) << "\" y=\"" << px(ly + 4)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(c.label)
            << "</text>\n";
    }

    out << "</svg>\n";
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_svg_raster(const std::vector<double>& values, int nx, int ny, RasterMap map,
                      const std::string& title, const std::vector<std::string>& comments,
                      const std::filesystem::path& path) {
    if (nx < 1 || ny < 1 || values.size() != static_cast<std::size_t>(nx) * ny)
        throw std::invalid_argument("svg raster: size mismatch");

    // block-average oversized grids down to a renderable pixel count
    const int max_px = 160;
    const int block = std::max(1, (std::max(nx, ny) + max_px - 1) / max_px);
    const int mx = (nx + block - 1) / block;
    const int my = (ny + block - 1) / block;
    std::vector<double> img(static_cast<std::size_t>(mx) * my, 0.0);
    for (int by = 0; by < my; ++by) {
        for (int bx = 0; bx < mx; ++bx) {
            double acc = 0.0;
            int cnt = 0;
            for (int iy = by * block; iy < std::min(ny, (by + 1) * block); ++iy)
                for (int ix = bx * block; ix < std::min(nx, (bx + 1) * block); ++ix) {
                    acc += values[static_cast<std::size_t>(iy) * nx + ix];
                    ++cnt;
                }
            img[static_cast<std::size_t>(by) * mx + bx] = cnt ? acc / cnt : 0.0;
        }
    }

    double vmax = 0.0;
    for (double v : img) vmax = std::max(vmax, std::abs(v));
    if (vmax == 0.0) vmax = 1.0;

    const int ps = std::max(2, 480 / std::max(mx, my));
    const double mt = 36, ml = 10;
    const double width = ml + mx * ps + 10, height = mt + my * ps + 12;

    std::ofstream out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    for (const auto& c : comments) out << "<!-- " << xml_escape(c) << " -->\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << px(width / 2) << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"14\">" << xml_escape(title) << "</text>\n";

    for (int by = 0; by < my; ++by) {
        for (int bx = 0; bx < mx; ++bx) {
            const double v = img[static_cast<std::size_t>(by) * mx + bx];
            std::string fill;
            if (map == RasterMap::Magnitude) {
                const double t = std::clamp(std::abs(v) / vmax, 0.0, 1.0);
                const int g = static_cast<int>(std::lround(255.0 * (1.0 - t)));
                fill = rgb_hex(g, g, g);
            } else {
                const double t = std::clamp(v / vmax, -1.0, 1.0);
                if (t >= 0.0) {
                    const int g = static_cast<int>(std::lround(255.0 * (1.0 - t)));
                    fill = rgb_hex(255, g, g);
                } else {
                    const int g = static_cast<int>(std::lround(255.0 * (1.0 + t)));
                    fill = rgb_hex(g, g, 255);
                }
            }
            const int row = my - 1 - by; // y axis points up
            out << "<rect x=\"" << ml + bx * ps << "\" y=\"" << mt + row * ps << "\" width=\""
                << ps << "\" height=\"" << ps << "\" fill=\"" << fill << "\"/>\n";
        }
    }
    out << "</svg>\n";
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

} // namespace dhelm::io
