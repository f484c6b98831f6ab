#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "dhelm/io.hpp"

using namespace dhelm;
namespace fs = std::filesystem;

namespace {

/// Scratch directory that cleans up after the test case.
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path operator/(const std::string& leaf) const { return path / leaf; }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
         pos = haystack.find(needle, pos + needle.size()))
        ++n;
    return n;
}

} // namespace

TEST_CASE("doubles round-trip through their shortest decimal form") {
    const double values[] = {0.0,    -0.0,       0.1,     1.0 / 3.0, 1e-300, 2.5e300,
                             -1.25,  6.02214e23, 1e-8,    123456.75, M_PI,   -M_PI,
                             5e-324, 1.0 + 1e-15};
    for (double v : values) {
        const std::string text = io::format_double(v);
        CHECK(io::parse_double(text) == v);
    }
    // shortest form, not a fixed 17-digit dump
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::format_double(1.0) == "1");
    CHECK(io::format_double(-0.5) == "-0.5");
}

TEST_CASE("non-finite values have fixed spellings") {
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(io::format_double(inf) == "inf");
    CHECK(io::format_double(-inf) == "-inf");
    CHECK(io::format_double(std::nan("")) == "nan");
    CHECK(io::parse_double("inf") == inf);
    CHECK(io::parse_double("-inf") == -inf);
    CHECK(std::isnan(io::parse_double("nan")));
}

TEST_CASE("parse_double rejects trailing garbage and empty input") {
    CHECK_THROWS_AS(io::parse_double(""), std::invalid_argument);
    CHECK_THROWS_AS(io::parse_double("1.5x"), std::invalid_argument);
    CHECK_THROWS_AS(io::parse_double("one"), std::invalid_argument);
    CHECK_THROWS_AS(io::parse_double("1.5 "), std::invalid_argument);
    CHECK(io::parse_double("-2.5e-3") == -2.5e-3);
}

TEST_CASE("csv write/read round-trip preserves comments, header and rows") {
    TempDir dir("dhelm_test_csv_roundtrip");
    io::CsvTable table;
    table.comments = {"produced by a unit test", "seed=42"};
    table.header = {"xi", "rho", "note"};
    table.rows = {{"3.14", "0.25", ""}, {"6.28", "1e-3", "perturbed"}, {"0", "inf", ""}};

    const fs::path file = dir / "t.csv";
    io::write_csv(table, file);
    const io::CsvTable back = io::read_csv(file);

    CHECK(back.comments == table.comments);
    CHECK(back.header == table.header);
    REQUIRE(back.rows.size() == table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) CHECK(back.rows[i] == table.rows[i]);
}

TEST_CASE("csv writes are byte-deterministic") {
    TempDir dir("dhelm_test_csv_bytes");
    io::CsvTable table;
    table.header = {"a", "b"};
    table.rows = {{"1", "2"}, {"3", "4"}};
    io::write_csv(table, dir / "one.csv");
    io::write_csv(table, dir / "two.csv");
    CHECK(slurp(dir / "one.csv") == slurp(dir / "two.csv"));
    CHECK(slurp(dir / "one.csv") == "a,b\n1,2\n3,4\n");
}

TEST_CASE("csv rejects fields that would corrupt the format") {
    TempDir dir("dhelm_test_csv_validate");
    io::CsvTable table;
    table.header = {"a"};
    table.rows = {{"contains,comma"}};
    CHECK_THROWS_AS(io::write_csv(table, dir / "bad.csv"), std::invalid_argument);
    table.rows = {{"line\nbreak"}};
    CHECK_THROWS_AS(io::write_csv(table, dir / "bad.csv"), std::invalid_argument);
    table.rows = {{"ok"}, {"two", "fields"}};
    CHECK_THROWS_AS(io::write_csv(table, dir / "bad.csv"), std::invalid_argument);
}

TEST_CASE("svg lineplot renders one polyline per connected curve") {
    TempDir dir("dhelm_test_svg_line");
    io::Curve c;
    c.label = "contraction";
    c.x = {0.0, 1.0, 2.0};
    c.y = {1.0, 0.5, 0.25};
    io::AxesSpec axes;
    axes.title = "decay";
    axes.x_label = "iteration";
    axes.y_label = "norm";
    const fs::path file = dir / "line.svg";
    io::write_svg_lineplot({c}, axes, file);
    const std::string svg = slurp(file);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(count_occurrences(svg, "<polyline") == 1);
    CHECK(svg.find("contraction") != std::string::npos);
    CHECK(svg.find("iteration") != std::string::npos);

    // byte determinism
    io::write_svg_lineplot({c}, axes, dir / "again.svg");
    CHECK(slurp(dir / "again.svg") == svg);
}

TEST_CASE("svg lineplot escapes markup in labels") {
    TempDir dir("dhelm_test_svg_escape");
    io::Curve c;
    c.label = "a<b & c";
    c.x = {0.0, 1.0};
    c.y = {0.0, 1.0};
    io::AxesSpec axes;
    axes.title = "x<y";
    io::write_svg_lineplot({c}, axes, dir / "esc.svg");
    const std::string svg = slurp(dir / "esc.svg");
    CHECK(svg.find("a&lt;b &amp; c") != std::string::npos);
    CHECK(svg.find("x&lt;y") != std::string::npos);
}

TEST_CASE("svg lineplot requires drawable data") {
    TempDir dir("dhelm_test_svg_empty");
    CHECK_THROWS_AS(io::write_svg_lineplot({}, io::AxesSpec{}, dir / "no.svg"),
                    std::invalid_argument);
    io::Curve empty;
    empty.label = "empty";
    CHECK_THROWS_AS(io::write_svg_lineplot({empty}, io::AxesSpec{}, dir / "no.svg"),
                    std::invalid_argument);
    io::Curve nans;
    nans.x = {0.0, 1.0};
    nans.y = {std::nan(""), std::nan("")};
    CHECK_THROWS_AS(io::write_svg_lineplot({nans}, io::AxesSpec{}, dir / "no.svg"),
                    std::invalid_argument);
    io::Curve mismatched;
    mismatched.x = {0.0, 1.0};
    mismatched.y = {0.0};
    CHECK_THROWS_AS(io::write_svg_lineplot({mismatched}, io::AxesSpec{}, dir / "no.svg"),
                    std::invalid_argument);
}

TEST_CASE("svg lineplot marks +inf samples instead of dropping the curve") {
    TempDir dir("dhelm_test_svg_inf");
    io::Curve c;
    c.label = "diverged";
    c.x = {0.0, 1.0, 2.0, 3.0};
    c.y = {0.5, std::numeric_limits<double>::infinity(), 0.7, 0.9};
    io::write_svg_lineplot({c}, io::AxesSpec{}, dir / "inf.svg");
    const std::string svg = slurp(dir / "inf.svg");
    // capped marker triangles are emitted as filled paths
    CHECK(svg.find("<path d=\"M ") != std::string::npos);
    CHECK(count_occurrences(svg, "<polyline") == 1);
}

TEST_CASE("svg lineplot splits segments at nan gaps") {
    TempDir dir("dhelm_test_svg_gap");
    io::Curve c;
    c.label = "gappy";
    c.x = {0.0, 1.0, 2.0, 3.0, 4.0};
    c.y = {1.0, 2.0, std::nan(""), 3.0, 4.0};
    io::write_svg_lineplot({c}, io::AxesSpec{}, dir / "gap.svg");
    CHECK(count_occurrences(slurp(dir / "gap.svg"), "<polyline") == 2);
}

TEST_CASE("log-scale lineplot accepts data spanning many decades") {
    TempDir dir("dhelm_test_svg_log");
    io::Curve c;
    c.label = "norms";
    for (int i = 0; i < 12; ++i) {
        c.x.push_back(static_cast<double>(i));
        c.y.push_back(std::pow(10.0, -i));
    }
    io::AxesSpec axes;
    axes.log_y = true;
    io::write_svg_lineplot({c}, axes, dir / "log.svg");
    const std::string svg = slurp(dir / "log.svg");
    CHECK(count_occurrences(svg, "<polyline") == 1);
    CHECK(svg.find("1e-11") != std::string::npos); // decade tick labels
}

TEST_CASE("svg raster draws one cell per grid value on small grids") {
    TempDir dir("dhelm_test_svg_raster");
    const int nx = 4, ny = 3;
    std::vector<double> values(static_cast<std::size_t>(nx) * ny);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<double>(i) - 5.0;
    const fs::path file = dir / "r.svg";
    io::write_svg_raster(values, nx, ny, io::RasterMap::Diverging, "field", {"comment"}, file);
    const std::string svg = slurp(file);
    CHECK(svg.rfind("<svg", 0) == 0);
    // background rect + nx*ny cells
    CHECK(count_occurrences(svg, "<rect") == 1 + static_cast<std::size_t>(nx) * ny);
    CHECK(svg.find("<!-- comment -->") != std::string::npos);
    CHECK(svg.find("field") != std::string::npos);

    io::write_svg_raster(values, nx, ny, io::RasterMap::Diverging, "field", {"comment"},
                         dir / "r2.svg");
    CHECK(slurp(dir / "r2.svg") == svg);
}

TEST_CASE("svg raster block-averages oversized grids") {
    TempDir dir("dhelm_test_svg_raster_big");
    const int nx = 320, ny = 320;
    std::vector<double> values(static_cast<std::size_t>(nx) * ny, 1.0);
    io::write_svg_raster(values, nx, ny, io::RasterMap::Magnitude, "big", {}, dir / "big.svg");
    const std::string svg = slurp(dir / "big.svg");
    const std::size_t cells = count_occurrences(svg, "<rect") - 1;
    CHECK(cells == 160u * 160u); // 2x2 blocks
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("svg raster validates its dimensions") {
    TempDir dir("dhelm_test_svg_raster_bad");
    std::vector<double> values(6, 0.0);
    CHECK_THROWS_AS(io::write_svg_raster(values, 4, 2, io::RasterMap::Magnitude, "", {},
                                         dir / "bad.svg"),
                    std::invalid_argument);
    CHECK_THROWS_AS(io::write_svg_raster(values, 0, 6, io::RasterMap::Magnitude, "", {},
                                         dir / "bad.svg"),
                    std::invalid_argument);
}

TEST_CASE("csv reader tolerates blank lines and CRLF endings") {
    TempDir dir("dhelm_test_csv_crlf");
    const fs::path file = dir / "win.csv";
    {
        std::ofstream out(file, std::ios::binary);
        out << "# note\r\n" << "a,b\r\n" << "\r\n" << "1,2\r\n";
    }
    const io::CsvTable t = io::read_csv(file);
    REQUIRE(t.header.size() == 2);
    CHECK(t.comments == std::vector<std::string>{"note"});
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0] == std::vector<std::string>{"1", "2"});
}
