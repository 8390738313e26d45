#include "shssa/io.hpp"

#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "shssa/error.hpp"

namespace shssa::io {

namespace {

std::string_view trim(std::string_view s)
{
    const auto blank = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!s.empty() && blank(s.front())) s.remove_prefix(1);
    while (!s.empty() && blank(s.back())) s.remove_suffix(1);
    return s;
}

bool iequals(std::string_view a, std::string_view b)
{
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) return out;
        start = pos + 1;
    }
}

std::vector<std::string_view> lines_of(std::string_view text)
{
    auto lines = split(text, '\n');
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    return lines;
}

template<class Int>
std::optional<Int> parse_int(std::string_view s)
{
    s = trim(s);
    Int v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

/// Reads rows of comma-separated fields with a per-field converter, rejecting ragged input.
template<class T, class Convert>
std::vector<T> parse_table(std::string_view text, const std::string& source, std::size_t& rows, std::size_t& cols,
                           Convert convert)
{
    const auto lines = lines_of(text);
    if (lines.empty()) throw FormatError(source + ": no data rows");
    std::vector<T> values;
    rows = lines.size();
    cols = 0;
    for (std::size_t r = 0; r < lines.size(); ++r) {
        const auto fields = split(lines[r], ',');
        if (r == 0) {
            cols = fields.size();
        } else if (fields.size() != cols) {
            throw FormatError(source + ": line " + std::to_string(r + 1) + " has " + std::to_string(fields.size())
                              + " fields, expected " + std::to_string(cols));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            auto v = convert(trim(fields[c]));
            if (!v) {
                throw FormatError(source + ": line " + std::to_string(r + 1) + ", column " + std::to_string(c + 1)
                                  + ": cannot parse '" + std::string(trim(fields[c])) + "'");
            }
            values.push_back(*v);
        }
    }
    return values;
}

} // namespace

std::string format_double(double v)
{
    if (std::isnan(v)) return "NaN";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

std::optional<double> parse_double(std::string_view field)
{
    field = trim(field);
    if (field.empty() || iequals(field, "nan")) return std::numeric_limits<double>::quiet_NaN();
    if (field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) return std::nullopt;
    return v;
}

Grid parse_grid_csv(std::string_view text, const std::string& source)
{
    Grid g;
    g.values = parse_table<double>(text, source, g.rows, g.cols, parse_double);
    return g;
}

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Grid read_grid_csv(const fs::path& path)
{
    return parse_grid_csv(read_text(path), path.string());
}

Grid read_pgm(const fs::path& path)
{
    const auto data = read_text(path);
    std::size_t pos = 0;
    auto token = [&]() -> std::string {
        for (;;) {
            while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
            if (pos < data.size() && data[pos] == '#') {
                while (pos < data.size() && data[pos] != '\n') ++pos;
                continue;
            }
            break;
        }
        const auto start = pos;
        while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
        return data.substr(start, pos - start);
    };
    const auto magic = token();
    if (magic != "P5" && magic != "P2") throw FormatError(path.string() + ": not a P2/P5 graymap");
    const auto w = parse_int<std::size_t>(token());
    const auto h = parse_int<std::size_t>(token());
    const auto maxval = parse_int<int>(token());
    if (!w || !h || !maxval || *w == 0 || *h == 0 || *maxval < 1 || *maxval > 255) {
        throw FormatError(path.string() + ": bad graymap header (only 8-bit images are supported)");
    }
    Grid g{*h, *w, std::vector<double>(*w * *h)};
    if (magic == "P5") {
        ++pos; // single whitespace after maxval
        if (data.size() < pos + g.values.size()) throw FormatError(path.string() + ": truncated pixel data");
        for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = static_cast<unsigned char>(data[pos + i]);
    } else {
        for (auto& v : g.values) {
            const auto t = parse_int<int>(token());
            if (!t || *t < 0 || *t > *maxval) throw FormatError(path.string() + ": bad pixel value");
            v = *t;
        }
    }
    return g;
}

Grid read_grid(const fs::path& path)
{
    auto ext = path.extension().string();
    std::ranges::transform(ext, ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".pgm" ? read_pgm(path) : read_grid_csv(path);
}

Mask read_mask_csv(const fs::path& path)
{
    Mask m;
    m.values = parse_table<std::uint8_t>(read_text(path), path.string(), m.rows, m.cols,
                                         [](std::string_view f) -> std::optional<std::uint8_t> {
                                             if (f == "0") return 0;
                                             if (f == "1") return 1;
                                             return std::nullopt;
                                         });
    return m;
}

ShapedArray to_shaped(const Grid& grid, const Topology& topo, const Mask* mask)
{
    if (mask && (mask->rows != grid.rows || mask->cols != grid.cols)) {
        throw FormatError("mask is " + std::to_string(mask->rows) + "x" + std::to_string(mask->cols) + " but the grid is "
                          + std::to_string(grid.rows) + "x" + std::to_string(grid.cols));
    }
    if (auto t = topo.period_x(); t && static_cast<std::size_t>(*t) != grid.rows) {
        throw ConfigError("period t_x = " + std::to_string(*t) + " does not match the " + std::to_string(grid.rows)
                          + " grid rows");
    }
    if (auto t = topo.period_y(); t && static_cast<std::size_t>(*t) != grid.cols) {
        throw ConfigError("period t_y = " + std::to_string(*t) + " does not match the " + std::to_string(grid.cols)
                          + " grid columns");
    }
    std::vector<IndexPair> idx;
    std::vector<double> vals;
    for (std::size_t r = 0; r < grid.rows; ++r) {
        for (std::size_t c = 0; c < grid.cols; ++c) {
            const double v = grid.at(r, c);
            if (std::isnan(v) || (mask && !mask->values[r * grid.cols + c])) continue;
            idx.push_back({static_cast<Coord>(r + 1), static_cast<Coord>(c + 1)});
            vals.push_back(v);
        }
    }
    if (idx.empty()) throw ShapeError("input has no present cells");
    return {Shape(topo, std::move(idx)), std::move(vals)};
}

ShapedArray load_grid(const fs::path& path, const std::optional<fs::path>& mask_path, const Topology& topo)
{
    const auto grid = read_grid(path);
    if (!mask_path) return to_shaped(grid, topo);
    const auto mask = read_mask_csv(*mask_path);
    return to_shaped(grid, topo, &mask);
}

Grid to_grid(const ShapedArray& arr, std::size_t rows, std::size_t cols)
{
    Grid g{rows, cols, std::vector<double>(rows * cols, std::numeric_limits<double>::quiet_NaN())};
    for (std::size_t k = 0; k < arr.size(); ++k) {
        const auto& p = arr.shape()[k];
        if (p.x < 1 || p.y < 1 || static_cast<std::size_t>(p.x) > rows || static_cast<std::size_t>(p.y) > cols) {
            throw ShapeError("cell " + to_string(p) + " lies outside the " + std::to_string(rows) + "x"
                             + std::to_string(cols) + " output grid");
        }
        g.values[static_cast<std::size_t>(p.x - 1) * cols + static_cast<std::size_t>(p.y - 1)] = arr[k];
    }
    return g;
}

Grid to_grid(const ShapedArray& arr)
{
    const auto& b = arr.shape().bounds();
    return to_grid(arr, static_cast<std::size_t>(b.max.x), static_cast<std::size_t>(b.max.y));
}

std::string format_grid_csv(const Grid& grid)
{
    std::string out;
    out.reserve(grid.values.size() * 20);
    for (std::size_t r = 0; r < grid.rows; ++r) {
        for (std::size_t c = 0; c < grid.cols; ++c) {
            if (c) out += ',';
            out += format_double(grid.at(r, c));
        }
        out += '\n';
    }
    return out;
}

void write_grid_csv(const fs::path& path, const Grid& grid)
{
    atomic_write(path, format_grid_csv(grid));
}

void atomic_write(const fs::path& path, std::string_view content)
{
    const auto dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    const auto tmp = dir / ("." + path.filename().string() + ".tmp-" + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw FormatError("write to " + tmp.string() + " failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw FormatError("cannot move output into place at " + path.string());
    }
}

Grouping parse_groups(std::string_view text)
{
    Grouping out;
    text = trim(text);
    if (text.empty()) return out;
    for (auto part : split(text, ';')) {
        part = trim(part);
        if (part.empty()) throw ConfigError("empty group in '" + std::string(text) + "'");
        std::vector<std::size_t> g;
        for (auto item : split(part, ',')) {
            item = trim(item);
            const auto dash = item.find('-');
            if (dash == std::string_view::npos) {
                const auto v = parse_int<std::size_t>(item);
                if (!v || *v == 0) throw ConfigError("bad eigentriple number '" + std::string(item) + "'");
                g.push_back(*v);
            } else {
                const auto a = parse_int<std::size_t>(item.substr(0, dash));
                const auto b = parse_int<std::size_t>(item.substr(dash + 1));
                if (!a || !b || *a == 0 || *a > *b) throw ConfigError("bad eigentriple range '" + std::string(item) + "'");
                for (auto i = *a; i <= *b; ++i) g.push_back(i);
            }
        }
        out.push_back(std::move(g));
    }
    return out;
}

Topology parse_topology(std::string_view text)
{
    const auto parts = split(text, ',');
    if (parts.size() != 2) throw ConfigError("topology must be 'tx,ty', got '" + std::string(text) + "'");
    auto axis = [&](std::string_view s) -> std::optional<Coord> {
        s = trim(s);
        if (iequals(s, "inf")) return std::nullopt;
        const auto v = parse_int<Coord>(s);
        if (!v || *v < 1) throw ConfigError("period must be a positive integer or 'inf', got '" + std::string(s) + "'");
        return *v;
    };
    return {axis(parts[0]), axis(parts[1])};
}

WindowSpec parse_window(std::string_view text)
{
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw ConfigError("window must be rect:LX,LY, circle:R or mask:<path>");
    const auto kind = trim(text.substr(0, colon));
    const auto arg = text.substr(colon + 1);
    WindowSpec w;
    if (kind == "rect") {
        const auto p = split(arg, ',');
        const auto lx = p.size() == 2 ? parse_int<Coord>(p[0]) : std::nullopt;
        const auto ly = p.size() == 2 ? parse_int<Coord>(p[1]) : std::nullopt;
        if (!lx || !ly || *lx < 1 || *ly < 1) throw ConfigError("bad rectangle window '" + std::string(text) + "'");
        w.kind = WindowSpec::Kind::rect;
        w.lx = *lx;
        w.ly = *ly;
    } else if (kind == "circle") {
        const auto r = parse_double(arg);
        if (!r || !(*r >= 1.0) || std::isinf(*r)) throw ConfigError("bad circle radius '" + std::string(arg) + "'");
        w.kind = WindowSpec::Kind::circle;
        w.radius = *r;
    } else if (kind == "mask") {
        if (trim(arg).empty()) throw ConfigError("mask window needs a path");
        w.kind = WindowSpec::Kind::mask;
        w.mask = std::string(trim(arg));
    } else {
        throw ConfigError("unknown window kind '" + std::string(kind) + "'");
    }
    return w;
}

std::string to_string(const WindowSpec& w)
{
    switch (w.kind) {
    case WindowSpec::Kind::rect: return "rect:" + std::to_string(w.lx) + "," + std::to_string(w.ly);
    case WindowSpec::Kind::circle: return "circle:" + format_double(w.radius);
    default: return "mask:" + w.mask.string();
    }
}

Shape build_window(const WindowSpec& spec, const Topology& topo)
{
    switch (spec.kind) {
    case WindowSpec::Kind::rect: return shapes::rectangle(spec.lx, spec.ly, topo);
    case WindowSpec::Kind::circle: {
        const auto c = static_cast<Coord>(std::floor(spec.radius)) + 1;
        return shapes::disc({c, c}, spec.radius, topo);
    }
    default: {
        const auto m = read_mask_csv(spec.mask);
        return shapes::from_mask(m.values, m.rows, m.cols, topo);
    }
    }
}

} // namespace shssa::io
