#include "shssa/job.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <sstream>

#include "shssa/error.hpp"
#include "shssa/plot.hpp"

namespace shssa::io {

using nlohmann::json;

namespace {

template<class F>
auto stage(const char* name, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string(name) + ": " + e.what());
    }
}

json finite_or_null(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

json optional_json(const std::optional<double>& v)
{
    return v ? finite_or_null(*v) : json(nullptr);
}

void write_json(const fs::path& path, const json& j, JobOutcome& out)
{
    atomic_write(path, j.dump(2) + "\n");
    out.written.push_back(path);
}

void write_csv(const fs::path& path, const Grid& g, JobOutcome& out)
{
    write_grid_csv(path, g);
    out.written.push_back(path);
}

void write_png(const fs::path& path, const Grid& g, JobOutcome& out)
{
    write_heatmap_png(path, g);
    out.written.push_back(path);
}

struct Input {
    Grid grid;
    ShapedArray data;
    Shape window;
};

Input load(const JobConfig& c)
{
    auto grid = stage("load", [&] { return read_grid(c.input); });
    auto data = stage("load", [&] {
        if (!c.mask) return to_shaped(grid, c.topology);
        const auto mask = read_mask_csv(*c.mask);
        return to_shaped(grid, c.topology, &mask);
    });
    auto window = stage("window", [&] { return build_window(*c.window, c.topology); });
    return {std::move(grid), std::move(data), std::move(window)};
}

json eigentriples_json(const Decomposition& dec)
{
    const auto contrib = contributions(dec);
    json triples = json::array();
    for (std::size_t i = 0; i < dec.triples.size(); ++i) {
        const auto& t = dec.triples[i];
        triples.push_back({{"index", t.index},
                           {"sigma", t.sigma},
                           {"contribution", contrib[i]},
                           {"residual", t.residual},
                           {"converged", t.converged}});
    }
    return {{"method", to_string(dec.method)},
            {"seed", dec.seed},
            {"window_size", dec.plan.window_size()},
            {"origin_count", dec.plan.origin_count()},
            {"covered_cells", dec.plan.covered().size()},
            {"uncovered_cells", dec.plan.dropped().size()},
            {"frobenius_sq", dec.frobenius_sq},
            {"restarts", dec.restarts},
            {"products", dec.products},
            {"triples", triples}};
}

json esprit_json(const EspritResult& r, const EspritConfig& c)
{
    json comps = json::array();
    for (const auto& k : r.components) {
        comps.push_back({{"mu_re", k.mu.real()},
                         {"mu_im", k.mu.imag()},
                         {"nu_re", k.nu.real()},
                         {"nu_im", k.nu.imag()},
                         {"period_x", finite_or_null(k.period_x)},
                         {"period_y", finite_or_null(k.period_y)},
                         {"rate_x", k.rate_x},
                         {"rate_y", k.rate_y},
                         {"angle_deg", optional_json(k.angle_deg)},
                         {"width", optional_json(k.width)}});
    }
    json pairs = json::array();
    for (const auto& [mu, nu] : r.pairing.pairs) {
        pairs.push_back({{"mu_re", mu.real()}, {"mu_im", mu.imag()}, {"nu_re", nu.real()}, {"nu_im", nu.imag()}});
    }
    std::vector<std::size_t> basis = c.basis;
    if (basis.empty()) {
        for (std::size_t i = 1; i <= c.r; ++i) basis.push_back(i);
    }
    return {{"method", to_string(c.method)},
            {"r", c.r},
            {"basis", basis},
            {"row_space", c.row_space},
            {"condition_level", to_string(r.level)},
            {"residual_x", r.residual_x},
            {"residual_y", r.residual_y},
            {"eigenvector_condition", r.pairing.condition},
            {"min_eigen_gap", finite_or_null(r.pairing.min_gap)},
            {"warnings", r.warnings},
            {"pairs", pairs},
            {"components", comps}};
}

JobOutcome run_rank(const JobConfig& c, const Input& in)
{
    JobOutcome out;
    const auto pl = stage("plan", [&] { return plan(in.data.shape(), in.window); });
    const std::size_t entries = pl.window_size() * pl.origin_count();
    if (entries > rank_entry_limit) {
        throw ConfigError("rank: trajectory matrix has " + std::to_string(entries) + " entries; the limit is "
                          + std::to_string(rank_entry_limit));
    }
    const auto sv = stage("rank", [&] { return trajectory_spectrum(in.data, in.window); });
    std::size_t rank = 0;
    if (!sv.empty() && sv[0] > 0) {
        for (double s : sv) rank += s > rank_tol * sv[0] ? 1 : 0;
    }
    fs::create_directories(c.output_dir);
    write_json(c.output_dir / "rank.json",
               {{"rank", rank},
                {"threshold", rank_tol},
                {"window_size", pl.window_size()},
                {"origin_count", pl.origin_count()},
                {"singular_values", sv}},
               out);
    out.summary = "shaped rank " + std::to_string(rank) + "\n";
    return out;
}

} // namespace

JobOutcome run_job(Command command, const JobConfig& config)
{
    stage("config", [&] { validate(config); });
    const auto in = load(config);
    if (command == Command::rank) return run_rank(config, in);
    if (command == Command::gen) throw ConfigError("gen takes a manifest, not a job configuration");

    JobOutcome out;
    const bool want_esprit = command == Command::esprit || config.esprit.enabled;
    EspritConfig ec = config.esprit;
    std::size_t neig = config.neig;
    if (want_esprit) {
        neig = std::max(neig, ec.r);
        for (auto i : ec.basis) neig = std::max(neig, i);
    }

    const auto pl = stage("plan", [&] { return plan(in.data.shape(), in.window); });
    DecomposeOptions dopt;
    dopt.neig = neig;
    dopt.tol = config.tol;
    dopt.max_iter = config.max_iter;
    dopt.seed = config.seed;
    const auto dec = stage("decompose", [&] { return decompose(in.data, pl, dopt); });

    std::error_code ec_dir;
    fs::create_directories(config.output_dir, ec_dir);
    if (ec_dir) throw FormatError("write: cannot create " + config.output_dir.string());
    const auto& dir = config.output_dir;
    stage("write", [&] {
        write_json(dir / "eigentriples.json", eigentriples_json(dec), out);
        for (const auto& t : dec.triples) {
            write_csv(dir / ("eigenarray_" + std::to_string(t.index) + ".csv"), to_grid(t.u), out);
            write_csv(dir / ("factor_" + std::to_string(t.index) + ".csv"), to_grid(t.v), out);
        }
    });

    std::ostringstream summary;
    summary << "decomposition: L=" << pl.window_size() << " K=" << pl.origin_count() << " method=" << to_string(dec.method)
            << "\n";
    const auto contrib = contributions(dec);
    for (std::size_t i = 0; i < dec.triples.size(); ++i) {
        summary << "  " << dec.triples[i].index << "  sigma=" << format_double(dec.triples[i].sigma)
                << "  share=" << format_double(contrib[i]) << "%\n";
    }

    Grouping groups = config.groups;
    if (groups.empty() && command == Command::reconstruct) {
        groups.emplace_back();
        for (std::size_t i = 1; i <= dec.triples.size(); ++i) groups.back().push_back(i);
    }
    if (!groups.empty()) {
        const auto parts = stage("reconstruct", [&] { return reconstruct(dec, groups); });
        stage("write", [&] {
            const auto covered = restrict_to(in.data, pl.covered());
            std::vector<double> resid(covered.values().begin(), covered.values().end());
            for (std::size_t g = 0; g < parts.size(); ++g) {
                const auto grid = to_grid(parts[g], in.grid.rows, in.grid.cols);
                write_csv(dir / ("reconstruction_" + std::to_string(g + 1) + ".csv"), grid, out);
                if (config.plots) write_png(dir / ("reconstruction_" + std::to_string(g + 1) + ".png"), grid, out);
                for (std::size_t k = 0; k < resid.size(); ++k) resid[k] -= parts[g][k];
            }
            const auto rgrid = to_grid(ShapedArray(pl.covered(), resid), in.grid.rows, in.grid.cols);
            write_csv(dir / "residual.csv", rgrid, out);
            if (config.plots) write_png(dir / "residual.png", rgrid, out);
        });
        summary << "reconstructed " << parts.size() << " group(s)\n";
    }

    if (want_esprit) {
        EspritOptions eo;
        eo.r = ec.r;
        eo.method = ec.method;
        eo.basis = ec.basis;
        eo.row_space = ec.row_space;
        const auto res = stage("esprit", [&] { return esprit(dec, eo); });
        stage("write", [&] {
            write_json(dir / "esprit.json", esprit_json(res, ec), out);
            const auto table = format_table(res.components);
            atomic_write(dir / "esprit.txt", table);
            out.written.push_back(dir / "esprit.txt");
            summary << table;
        });
        out.warnings.insert(out.warnings.end(), res.warnings.begin(), res.warnings.end());
    }

    if (config.plots) {
        stage("plot", [&] {
            write_png(dir / "input.png", to_grid(in.data, in.grid.rows, in.grid.cols), out);
            const std::size_t n = std::min<std::size_t>(dec.triples.size(), 6);
            for (std::size_t i = 0; i < n; ++i) {
                const auto& t = dec.triples[i];
                write_png(dir / ("eigenarray_" + std::to_string(t.index) + ".png"), to_grid(t.u), out);
                write_png(dir / ("factor_" + std::to_string(t.index) + ".png"), to_grid(t.v), out);
            }
        });
    }
    out.summary = summary.str();
    return out;
}

JobOutcome run_gen(const Manifest& manifest, const fs::path& out_dir, std::optional<std::uint64_t> seed)
{
    Manifest m = manifest;
    if (seed) m.noise.seed = *seed;
    const auto arr = stage("gen", [&] { return realize(m); });
    JobOutcome out;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw FormatError("write: cannot create " + out_dir.string());
    stage("write", [&] {
        write_csv(out_dir / "grid.csv", to_grid(arr, m.rows, m.cols), out);
        atomic_write(out_dir / "manifest.json", manifest_to_json(m));
        out.written.push_back(out_dir / "manifest.json");
    });
    out.summary = "generated " + std::to_string(arr.size()) + " cells from " + std::to_string(m.components.size())
                  + " component(s)\n";
    return out;
}

} // namespace shssa::io
