#include "shssa/config.hpp"

#include <nlohmann/json.hpp>

#include <random>
#include <set>

#include "shssa/error.hpp"

namespace shssa::io {

using nlohmann::json;

namespace {

json parse_json(std::string_view text, const char* what)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string(what) + " is not valid JSON: " + e.what());
    }
}

fs::path resolve(const fs::path& base, const std::string& p)
{
    fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

std::optional<Coord> period(const json& j, const char* axis)
{
    if (!j.contains(axis) || j[axis].is_null()) return std::nullopt;
    const auto& v = j[axis];
    if (v.is_string()) {
        if (v.get<std::string>() == "inf") return std::nullopt;
        throw ConfigError(std::string("topology.") + axis + " must be an integer or \"inf\"");
    }
    if (!v.is_number_integer() || v.get<Coord>() < 1) {
        throw ConfigError(std::string("topology.") + axis + " must be a positive integer or \"inf\"");
    }
    return v.get<Coord>();
}

Topology topology_of(const json& j)
{
    if (j.is_string()) return parse_topology(j.get<std::string>());
    if (!j.is_object()) throw ConfigError("topology must be an object {t_x, t_y} or a string \"tx,ty\"");
    return {period(j, "t_x"), period(j, "t_y")};
}

json topology_json(const Topology& t)
{
    auto axis = [](const std::optional<Coord>& p) { return p ? json(*p) : json("inf"); };
    return {{"t_x", axis(t.period_x())}, {"t_y", axis(t.period_y())}};
}

Complex complex_of(const json& j, const char* what)
{
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw ConfigError(std::string(what) + " must be a number or [re, im]");
}

json complex_json(Complex z)
{
    return json::array({z.real(), z.imag()});
}

template<class T>
T get_or(const json& j, const char* key, T fallback)
{
    if (!j.contains(key) || j[key].is_null()) return fallback;
    try {
        return j[key].get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("field '") + key + "' has the wrong type");
    }
}

ComponentList components_of(const json& list)
{
    if (!list.is_array()) throw ConfigError("components must be an array");
    ComponentList out;
    for (const auto& c : list) {
        if (c.contains("harmonic")) {
            const auto& h = c["harmonic"];
            const auto parts = real_harmonic(get_or(h, "fx", 0.0), get_or(h, "fy", 0.0), get_or(h, "amplitude", 1.0),
                                             get_or(h, "phase", 0.0), get_or(h, "rate_x", 0.0), get_or(h, "rate_y", 0.0));
            out.insert(out.end(), parts.begin(), parts.end());
            continue;
        }
        ExponentialComponent e;
        e.mu = c.contains("mu") ? complex_of(c["mu"], "mu") : Complex{1.0};
        e.nu = c.contains("nu") ? complex_of(c["nu"], "nu") : Complex{1.0};
        if (c.contains("poly")) {
            e.poly.clear();
            for (const auto& term : c["poly"]) {
                e.poly[{get_or(term, "l", 0), get_or(term, "n", 0)}]
                    += term.contains("coef") ? complex_of(term["coef"], "coef") : Complex{1.0};
            }
        } else {
            e.poly = {{{0, 0}, c.contains("amplitude") ? complex_of(c["amplitude"], "amplitude") : Complex{1.0}}};
        }
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace

JobConfig parse_job_config(std::string_view json_text, const fs::path& base_dir)
{
    const auto j = parse_json(json_text, "job configuration");
    if (!j.is_object()) throw ConfigError("job configuration must be a JSON object");
    JobConfig c;
    if (j.contains("topology")) c.topology = topology_of(j["topology"]);
    if (j.contains("input")) {
        const auto& in = j["input"];
        if (in.is_string()) {
            c.input = resolve(base_dir, in.get<std::string>());
        } else {
            c.input = resolve(base_dir, get_or<std::string>(in, "grid", ""));
            if (in.contains("mask") && !in["mask"].is_null()) c.mask = resolve(base_dir, in["mask"].get<std::string>());
        }
    }
    if (j.contains("window")) {
        const auto& w = j["window"];
        if (w.is_string()) {
            c.window = parse_window(w.get<std::string>());
        } else {
            const auto kind = get_or<std::string>(w, "kind", "rect");
            WindowSpec s;
            if (kind == "rect") {
                s.kind = WindowSpec::Kind::rect;
                s.lx = get_or<Coord>(w, "lx", 0);
                s.ly = get_or<Coord>(w, "ly", 0);
                if (s.lx < 1 || s.ly < 1) throw ConfigError("rect window needs positive lx and ly");
            } else if (kind == "circle") {
                s.kind = WindowSpec::Kind::circle;
                s.radius = get_or(w, "radius", 0.0);
                if (!(s.radius >= 1.0)) throw ConfigError("circle window needs radius >= 1");
            } else if (kind == "mask") {
                s.kind = WindowSpec::Kind::mask;
                s.mask = resolve(base_dir, get_or<std::string>(w, "path", ""));
            } else {
                throw ConfigError("unknown window kind '" + kind + "'");
            }
            c.window = s;
        }
    }
    c.neig = get_or<std::size_t>(j, "neig", c.neig);
    if (j.contains("groups")) {
        const auto& g = j["groups"];
        if (g.is_string()) {
            c.groups = parse_groups(g.get<std::string>());
        } else {
            try {
                c.groups = g.get<Grouping>();
            } catch (const json::exception&) {
                throw ConfigError("groups must be a list of index lists or a string like \"1-6;7,8\"");
            }
        }
    }
    if (j.contains("esprit")) {
        const auto& e = j["esprit"];
        c.esprit.enabled = get_or(e, "enabled", true);
        c.esprit.r = get_or<std::size_t>(e, "r", c.esprit.r);
        c.esprit.method = parse_esprit_method(get_or<std::string>(e, "method", "ls"));
        c.esprit.basis = get_or<std::vector<std::size_t>>(e, "basis", {});
        c.esprit.row_space = get_or(e, "row_space", false);
    }
    if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j["output_dir"].get<std::string>());
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.plots = get_or(j, "plots", c.plots);
    c.tol = get_or(j, "tol", c.tol);
    c.max_iter = get_or<std::size_t>(j, "max_iter", c.max_iter);
    return c;
}

JobConfig load_job_config(const fs::path& path)
{
    return parse_job_config(read_text(path), path.parent_path());
}

void validate(const JobConfig& c)
{
    if (c.input.empty()) throw ConfigError("no input grid given");
    if (!c.window) throw ConfigError("no window given");
    if (c.neig < 1) throw ConfigError("neig must be at least 1");
    std::set<std::size_t> seen;
    for (const auto& g : c.groups) {
        if (g.empty()) throw ConfigError("empty group");
        for (auto i : g) {
            if (i < 1 || i > c.neig) {
                throw ConfigError("group index " + std::to_string(i) + " outside 1.." + std::to_string(c.neig));
            }
            if (!seen.insert(i).second) throw ConfigError("eigentriple " + std::to_string(i) + " is in two groups");
        }
    }
    if (c.esprit.enabled) {
        if (c.esprit.r < 1) throw ConfigError("esprit.r must be at least 1");
        if (!c.esprit.basis.empty() && c.esprit.basis.size() != c.esprit.r) {
            throw ConfigError("esprit.basis must list exactly r indices");
        }
    }
    if (!(c.tol > 0.0)) throw ConfigError("tol must be positive");
}

Manifest parse_manifest(std::string_view json_text, const fs::path& base_dir)
{
    const auto j = parse_json(json_text, "manifest");
    if (!j.is_object()) throw ConfigError("manifest must be a JSON object");
    Manifest m;
    if (j.contains("topology")) m.topology = topology_of(j["topology"]);
    if (!j.contains("grid")) throw ConfigError("manifest needs grid {rows, cols}");
    m.rows = get_or<std::size_t>(j["grid"], "rows", 0);
    m.cols = get_or<std::size_t>(j["grid"], "cols", 0);
    if (m.rows == 0 || m.cols == 0) throw ConfigError("manifest grid needs positive rows and cols");
    if (j["grid"].contains("mask") && !j["grid"]["mask"].is_null()) {
        m.mask = resolve(base_dir, j["grid"]["mask"].get<std::string>());
    }
    if (!j.contains("components")) throw ConfigError("manifest needs a components list");
    m.components = components_of(j["components"]);
    if (j.contains("noise")) {
        m.noise.sigma = get_or(j["noise"], "sigma", 0.0);
        m.noise.seed = get_or<std::uint64_t>(j["noise"], "seed", 0);
        if (!(m.noise.sigma >= 0.0)) throw ConfigError("noise.sigma must be non-negative");
    }
    return m;
}

Manifest load_manifest(const fs::path& path)
{
    return parse_manifest(read_text(path), path.parent_path());
}

std::string manifest_to_json(const Manifest& m)
{
    json comps = json::array();
    for (const auto& c : m.components) {
        json poly = json::array();
        for (const auto& [deg, coef] : c.poly) poly.push_back({{"l", deg.first}, {"n", deg.second}, {"coef", complex_json(coef)}});
        comps.push_back({{"mu", complex_json(c.mu)}, {"nu", complex_json(c.nu)}, {"poly", poly}});
    }
    json grid{{"rows", m.rows}, {"cols", m.cols}};
    if (m.mask) grid["mask"] = m.mask->string();
    const json out{{"topology", topology_json(m.topology)},
                   {"grid", grid},
                   {"components", comps},
                   {"noise", {{"sigma", m.noise.sigma}, {"seed", m.noise.seed}}}};
    return out.dump(2) + "\n";
}

Shape manifest_region(const Manifest& m)
{
    Grid g{m.rows, m.cols, std::vector<double>(m.rows * m.cols, 0.0)};
    if (!m.mask) return to_shaped(g, m.topology).shape();
    const auto mask = read_mask_csv(*m.mask);
    return to_shaped(g, m.topology, &mask).shape();
}

ShapedArray realize(const Manifest& m)
{
    const auto region = manifest_region(m);
    auto s = generate(m.components, region);
    if (m.noise.sigma == 0.0) return s;
    std::mt19937_64 rng(m.noise.seed);
    std::normal_distribution<double> noise(0.0, m.noise.sigma);
    std::vector<double> v(s.values().begin(), s.values().end());
    for (auto& x : v) x += noise(rng);
    return {region, std::move(v)};
}

} // namespace shssa::io
