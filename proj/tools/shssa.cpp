#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "shssa/error.hpp"
#include "shssa/job.hpp"
#include "shssa/parallel.hpp"

namespace {

using namespace shssa;
using namespace shssa::io;

constexpr int exit_ok = 0;
constexpr int exit_input = 2;
constexpr int exit_numerical = 3;
constexpr int exit_config = 4;

int exit_code(ErrorKind k)
{
    switch (k) {
    case ErrorKind::input: return exit_input;
    case ErrorKind::numerical: return exit_numerical;
    default: return exit_config;
    }
}

struct Flags {
    std::optional<std::string> config;
    std::optional<std::string> input;
    std::optional<std::string> mask;
    std::optional<std::string> topology;
    std::optional<std::string> window;
    std::optional<std::size_t> neig;
    std::optional<std::string> groups;
    std::optional<std::size_t> esprit_r;
    std::optional<std::string> esprit_method;
    std::optional<std::string> esprit_basis;
    bool row_space = false;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    bool plots = false;
    std::optional<std::string> manifest;
};

void add_job_flags(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--config", f.config, "JSON job configuration; flags override its fields");
    cmd->add_option("--input", f.input, "grid CSV (rows = x, columns = y; empty or NaN = absent) or 8-bit PGM");
    cmd->add_option("--mask", f.mask, "0/1 CSV of the same size; cells with 0 are excluded");
    cmd->add_option("--topology", f.topology, "periods 'tx,ty', each an integer or inf (default inf,inf)");
    cmd->add_option("--window", f.window, "rect:LX,LY | circle:R | mask:<path>");
    cmd->add_option("--neig", f.neig, "number of eigentriples (default 10)");
    cmd->add_option("--groups", f.groups, "grouping such as \"1-6;7,8\"");
    cmd->add_option("--esprit-r", f.esprit_r, "ESPRIT signal rank r (enables ESPRIT)");
    cmd->add_option("--esprit-method", f.esprit_method, "ls or tls (default ls)");
    cmd->add_option("--esprit-basis", f.esprit_basis, "eigentriples forming the ESPRIT basis, e.g. \"1-4\"");
    cmd->add_flag("--row-space", f.row_space, "ESPRIT on factor vectors instead of eigenarrays");
    cmd->add_option("--seed", f.seed, "seed of the iterative solver's start vector");
    cmd->add_option("--out", f.out, "output directory (default .)");
    cmd->add_flag("--plots", f.plots, "also write PNG heatmaps");
}

JobConfig build_config(const Flags& f)
{
    JobConfig c = f.config ? load_job_config(*f.config) : JobConfig{};
    if (f.input) c.input = *f.input;
    if (f.mask) c.mask = fs::path(*f.mask);
    if (f.topology) c.topology = parse_topology(*f.topology);
    if (f.window) c.window = parse_window(*f.window);
    if (f.neig) c.neig = *f.neig;
    if (f.groups) c.groups = parse_groups(*f.groups);
    if (f.esprit_r) {
        c.esprit.enabled = true;
        c.esprit.r = *f.esprit_r;
    }
    if (f.esprit_method) c.esprit.method = parse_esprit_method(*f.esprit_method);
    if (f.esprit_basis) {
        const auto g = parse_groups(*f.esprit_basis);
        if (g.size() != 1) throw ConfigError("--esprit-basis takes a single list such as \"1-4\"");
        c.esprit.basis = g[0];
    }
    if (f.row_space) c.esprit.row_space = true;
    if (f.seed) c.seed = *f.seed;
    if (f.out) c.output_dir = *f.out;
    if (f.plots) c.plots = true;
    return c;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Shaped singular spectrum analysis and shaped 2D-ESPRIT for arrays on planar, cylindrical and "
                 "toroidal domains.\nSHSSA_THREADS caps the number of worker threads."};
    app.require_subcommand(1);
    Flags f;
    const std::pair<const char*, Command> names[] = {
        {"decompose", Command::decompose}, {"reconstruct", Command::reconstruct},
        {"esprit", Command::esprit},       {"rank", Command::rank},
    };
    const char* help[] = {
        "eigentriples, eigenarrays and factor vectors (plus reconstructions / ESPRIT if configured)",
        "grouped reconstructions and the residual",
        "frequency, rate and strip estimates by shaped 2D-ESPRIT",
        "numerical shaped rank of a small input",
    };
    std::vector<std::pair<CLI::App*, Command>> cmds;
    for (std::size_t i = 0; i < std::size(names); ++i) {
        auto* cmd = app.add_subcommand(names[i].first, help[i]);
        add_job_flags(cmd, f);
        cmds.emplace_back(cmd, names[i].second);
    }
    auto* gen = app.add_subcommand("gen", "write a finite-rank fixture grid from a component manifest");
    gen->add_option("--manifest,--config", f.manifest, "manifest JSON")->required();
    gen->add_option("--seed", f.seed, "noise seed (overrides the manifest)");
    gen->add_option("--out", f.out, "output directory (default .)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }

    parallel::apply_environment();
    try {
        JobOutcome out;
        if (gen->parsed()) {
            out = run_gen(load_manifest(*f.manifest), f.out ? fs::path(*f.out) : fs::path("."), f.seed);
        } else {
            for (const auto& [cmd, which] : cmds) {
                if (!cmd->parsed()) continue;
                JobConfig config;
                try {
                    config = build_config(f);
                } catch (const Error& e) {
                    throw Error(e.kind(), std::string("config: ") + e.what());
                }
                out = run_job(which, config);
            }
        }
        for (const auto& w : out.warnings) std::cerr << "shssa: warning: " << w << "\n";
        std::cout << out.summary;
        return exit_ok;
    } catch (const Error& e) {
        std::cerr << "shssa: error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "shssa: error: " << e.what() << "\n";
        return 1;
    }
}
