#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "shssa/config.hpp"
#include "shssa/error.hpp"
#include "shssa/io.hpp"
#include "shssa/job.hpp"
#include "test_support.hpp"

using namespace shssa;
using namespace shssa::io;

namespace {

const double nan_v = std::numeric_limits<double>::quiet_NaN();

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("shssa_io_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

bool same_bits(double a, double b)
{
    return std::memcmp(&a, &b, sizeof a) == 0;
}

std::vector<double> grid_values(const fs::path& p)
{
    return read_grid_csv(p).values;
}

} // namespace

TEST(Doubles, ShortestRoundTrip)
{
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::uint64_t> bits;
    for (int i = 0; i < 20000; ++i) {
        double v;
        const auto b = bits(rng);
        std::memcpy(&v, &b, sizeof v);
        if (!std::isfinite(v)) continue;
        const auto s = format_double(v);
        ASSERT_TRUE(same_bits(*parse_double(s), v)) << s;
    }
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(nan_v), "NaN");
    EXPECT_EQ(format_double(-0.0), "-0");
    EXPECT_TRUE(std::isnan(*parse_double("")));
    EXPECT_TRUE(std::isnan(*parse_double(" NaN ")));
    EXPECT_EQ(*parse_double("+2.5"), 2.5);
    EXPECT_FALSE(parse_double("1.5x").has_value());
    EXPECT_FALSE(parse_double("abc").has_value());
}

TEST(GridCsv, Examples)
{
    const Topology planar;
    const auto full = to_shaped(parse_grid_csv("1,2\n3,4\n"), planar);
    EXPECT_EQ(full.shape(), shapes::rectangle(2, 2, planar));
    EXPECT_EQ(full.at({2, 1}), 3.0);

    const auto holes = to_shaped(parse_grid_csv("1,NaN\r\n3,4"), planar);
    EXPECT_EQ(holes.size(), 3u);
    EXPECT_FALSE(holes.shape().contains({1, 2}));
    EXPECT_EQ(to_shaped(parse_grid_csv("1,,3\n4,5,6\n"), planar).size(), 5u);

    try {
        (void)parse_grid_csv("1,2\n3\n", "x.csv");
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
    EXPECT_THROW(parse_grid_csv("1,zz\n"), FormatError);
    EXPECT_THROW(parse_grid_csv(""), FormatError);
    EXPECT_THROW(to_shaped(parse_grid_csv("NaN,NaN\n"), planar), ShapeError);
    EXPECT_THROW(to_shaped(parse_grid_csv("1,2\n3,4\n"), Topology(3, std::nullopt)), ConfigError);
}

TEST(GridCsv, MaskIntersection)
{
    const auto dir = scratch("mask");
    atomic_write(dir / "g.csv", "1,2,3\n4,NaN,6\n");
    atomic_write(dir / "m.csv", "1,1,0\n1,1,1\n");
    atomic_write(dir / "bad.csv", "1,1\n1,1\n");
    atomic_write(dir / "two.csv", "1,2\n1,1\n");
    const auto a = load_grid(dir / "g.csv", dir / "m.csv", Topology());
    EXPECT_EQ(std::vector<IndexPair>(a.shape().begin(), a.shape().end()),
              (std::vector<IndexPair>{{1, 1}, {1, 2}, {2, 1}, {2, 3}}));
    EXPECT_THROW(load_grid(dir / "g.csv", dir / "bad.csv", Topology()), FormatError);
    EXPECT_THROW(read_mask_csv(dir / "two.csv"), FormatError);
    EXPECT_THROW(load_grid(dir / "missing.csv", std::nullopt, Topology()), FormatError);
}

TEST(GridCsv, WriteReadBitExact)
{
    const auto dir = scratch("roundtrip");
    std::mt19937_64 rng(5);
    std::normal_distribution<double> d(0.0, 1e3);
    Grid g{7, 9, {}};
    for (int i = 0; i < 63; ++i) g.values.push_back(i % 10 == 3 ? nan_v : d(rng) * std::pow(10.0, i % 7 - 3));
    write_grid_csv(dir / "g.csv", g);
    const auto back = read_grid_csv(dir / "g.csv");
    ASSERT_EQ(back.rows, 7u);
    ASSERT_EQ(back.cols, 9u);
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        if (std::isnan(g.values[i])) {
            EXPECT_TRUE(std::isnan(back.values[i]));
        } else {
            EXPECT_TRUE(same_bits(g.values[i], back.values[i]));
        }
    }
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
    EXPECT_EQ(files, 1u);
}

TEST(Pgm, BinaryAndAscii)
{
    const auto dir = scratch("pgm");
    std::string p5 = "P5\n# comment\n3 2\n255\n";
    for (unsigned char c : {0, 10, 20, 30, 40, 255}) p5 += static_cast<char>(c);
    atomic_write(dir / "a.pgm", p5);
    const auto a = read_grid(dir / "a.pgm");
    EXPECT_EQ(a.rows, 2u);
    EXPECT_EQ(a.cols, 3u);
    EXPECT_EQ(a.values, (std::vector<double>{0, 10, 20, 30, 40, 255}));
    atomic_write(dir / "b.pgm", "P2 2 1 15 3 15\n");
    EXPECT_EQ(read_grid(dir / "b.pgm").values, (std::vector<double>{3, 15}));
    atomic_write(dir / "c.pgm", "P6 1 1 255 abc");
    EXPECT_THROW(read_grid(dir / "c.pgm"), FormatError);
}

TEST(Parsers, GroupsTopologyWindow)
{
    EXPECT_EQ(parse_groups("1-6;7,8"), (Grouping{{1, 2, 3, 4, 5, 6}, {7, 8}}));
    EXPECT_EQ(parse_groups(" 3 ; 1 , 2 "), (Grouping{{3}, {1, 2}}));
    EXPECT_TRUE(parse_groups("").empty());
    EXPECT_THROW(parse_groups("1;;2"), ConfigError);
    EXPECT_THROW(parse_groups("3-1"), ConfigError);
    EXPECT_THROW(parse_groups("0"), ConfigError);
    EXPECT_THROW(parse_groups("a"), ConfigError);

    EXPECT_EQ(parse_topology("inf,inf").kind(), TopologyKind::planar);
    EXPECT_EQ(parse_topology("24,inf"), Topology(24, std::nullopt));
    EXPECT_EQ(parse_topology("5, 7"), Topology(5, 7));
    EXPECT_THROW(parse_topology("5"), ConfigError);
    EXPECT_THROW(parse_topology("0,inf"), ConfigError);

    const Topology planar;
    EXPECT_EQ(build_window(parse_window("rect:3,2"), planar), shapes::rectangle(3, 2, planar));
    const auto disc = build_window(parse_window("circle:1"), planar);
    EXPECT_EQ(disc, Shape(planar, {{1, 2}, {2, 1}, {2, 2}, {2, 3}, {3, 2}}));
    EXPECT_EQ(to_string(parse_window("rect:3,2")), "rect:3,2");
    EXPECT_THROW(parse_window("rect:3"), ConfigError);
    EXPECT_THROW(parse_window("circle:0.5"), ConfigError);
    EXPECT_THROW(parse_window("hex:3"), ConfigError);

    const auto dir = scratch("window");
    atomic_write(dir / "w.csv", "0,1\n1,1\n");
    const auto w = build_window(parse_window("mask:" + (dir / "w.csv").string()), planar);
    EXPECT_EQ(w, Shape(planar, {{1, 2}, {2, 1}, {2, 2}}));
}

TEST(Config, ParseAndValidate)
{
    const auto c = parse_job_config(R"({
        "topology": {"t_x": 24, "t_y": "inf"},
        "input": {"grid": "data.csv", "mask": "m.csv"},
        "window": {"kind": "rect", "lx": 5, "ly": 6},
        "neig": 8,
        "groups": [[1, 2], [3]],
        "esprit": {"enabled": true, "r": 2, "method": "tls", "basis": [1, 2]},
        "output_dir": "out",
        "seed": 7
    })",
                                    "/base");
    EXPECT_EQ(c.topology, Topology(24, std::nullopt));
    EXPECT_EQ(c.input, fs::path("/base/data.csv"));
    EXPECT_EQ(*c.mask, fs::path("/base/m.csv"));
    EXPECT_EQ(c.window->lx, 5);
    EXPECT_EQ(c.neig, 8u);
    EXPECT_EQ(c.groups, (Grouping{{1, 2}, {3}}));
    EXPECT_TRUE(c.esprit.enabled);
    EXPECT_EQ(c.esprit.method, EspritMethod::tls);
    EXPECT_EQ(c.output_dir, fs::path("/base/out"));
    EXPECT_EQ(c.seed, 7u);
    EXPECT_NO_THROW(validate(c));

    auto bad = c;
    bad.groups = {{1, 2}, {2}};
    EXPECT_THROW(validate(bad), ConfigError);
    bad.groups = {{9}};
    EXPECT_THROW(validate(bad), ConfigError);
    bad = c;
    bad.window.reset();
    EXPECT_THROW(validate(bad), ConfigError);
    EXPECT_THROW(parse_job_config("{not json"), ConfigError);
    EXPECT_THROW(parse_job_config(R"({"topology": {"t_x": -3}})"), ConfigError);
    EXPECT_THROW(parse_job_config(R"({"esprit": {"method": "music"}})"), ConfigError);
    EXPECT_EQ(parse_job_config(R"({"groups": "1-3;4", "window": "circle:2"})").groups, (Grouping{{1, 2, 3}, {4}}));
}

TEST(Manifest, ExpandedRoundTripIsBitExact)
{
    const auto m = parse_manifest(R"({
        "topology": {"t_x": 12, "t_y": "inf"},
        "grid": {"rows": 12, "cols": 15},
        "components": [
            {"harmonic": {"fx": 0.25, "fy": 0.1, "amplitude": 1.5, "phase": 0.3, "rate_y": -0.01}},
            {"mu": 1, "nu": 0.97, "poly": [{"l": 0, "n": 1, "coef": 0.2}]}
        ],
        "noise": {"sigma": 0.1, "seed": 99}
    })");
    EXPECT_EQ(m.components.size(), 3u);
    const auto a = realize(m);
    const auto again = realize(parse_manifest(manifest_to_json(m)));
    ASSERT_EQ(a.size(), again.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(same_bits(a[i], again[i]));
    EXPECT_EQ(manifest_to_json(parse_manifest(manifest_to_json(m))), manifest_to_json(m));

    auto quiet = m;
    quiet.noise.sigma = 0.0;
    EXPECT_LT(shssa::testing::rel_err(realize(quiet).values(), generate(m.components, a.shape()).values()), 1e-15);

    EXPECT_THROW(realize(parse_manifest(R"({"topology": {"t_x": 12, "t_y": "inf"}, "grid": {"rows": 12, "cols": 4},
        "components": [{"mu": 0.9}]})")),
                 TopologyError);
    EXPECT_THROW(parse_manifest(R"({"grid": {"rows": 0, "cols": 4}, "components": []})"), ConfigError);
}

TEST(Job, DecomposeReconstructRoundTrip)
{
    const auto dir = scratch("job");
    Manifest m;
    m.rows = 20;
    m.cols = 18;
    m.components = {ExponentialComponent::constant(0.98, 1.03, 2.0)};
    run_gen(m, dir / "fixture");

    JobConfig c;
    c.input = dir / "fixture" / "grid.csv";
    c.window = parse_window("rect:6,5");
    c.neig = 3;
    c.groups = {{1}, {2}, {3}};
    c.output_dir = dir / "out";
    const auto out = run_job(Command::decompose, c);
    EXPECT_FALSE(out.written.empty());

    const auto input = grid_values(c.input);
    const auto r1 = grid_values(dir / "out" / "reconstruction_1.csv");
    const auto r2 = grid_values(dir / "out" / "reconstruction_2.csv");
    const auto r3 = grid_values(dir / "out" / "reconstruction_3.csv");
    EXPECT_LT(shssa::testing::rel_err(r1, input), 1e-8);

    c.groups = {{1, 2, 3}};
    c.output_dir = dir / "full";
    run_job(Command::reconstruct, c);
    const auto full = grid_values(dir / "full" / "reconstruction_1.csv");
    double worst = 0.0;
    for (std::size_t i = 0; i < full.size(); ++i) worst = std::max(worst, std::abs(r1[i] + r2[i] + r3[i] - full[i]));
    EXPECT_LT(worst, 1e-10);
    EXPECT_TRUE(fs::exists(dir / "out" / "eigentriples.json"));
    EXPECT_TRUE(fs::exists(dir / "out" / "residual.csv"));
}

TEST(Job, EspritMatchesManifest)
{
    const auto dir = scratch("job_esprit");
    Manifest m;
    m.rows = 24;
    m.cols = 22;
    m.components = real_harmonic(0.15, -0.08, 1.0, 0.2, -0.01, 0.0);
    run_gen(m, dir);
    JobConfig c;
    c.input = dir / "grid.csv";
    c.window = parse_window("rect:8,8");
    c.neig = 2;
    c.esprit.enabled = true;
    c.esprit.r = 2;
    c.output_dir = dir / "out";
    c.plots = true;
    const auto out = run_job(Command::esprit, c);
    const auto text = read_text(dir / "out" / "esprit.json");
    EXPECT_NE(text.find("\"condition_level\": \"squares\""), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "out" / "esprit.txt"));
    EXPECT_TRUE(fs::exists(dir / "out" / "input.png"));
    EXPECT_NE(out.summary.find("6.7"), std::string::npos); // period 1/0.15
}

TEST(Job, RankCommand)
{
    const auto dir = scratch("job_rank");
    Manifest m;
    m.rows = 10;
    m.cols = 10;
    m.components = {ExponentialComponent::constant(0.9, 1.1, 1.0), ExponentialComponent::constant(1.05, 0.8, -2.0),
                    ExponentialComponent::constant(-0.7, 0.95, 0.5)};
    run_gen(m, dir);
    JobConfig c;
    c.input = dir / "grid.csv";
    c.window = parse_window("rect:4,4");
    c.output_dir = dir;
    EXPECT_NE(run_job(Command::rank, c).summary.find("rank 3"), std::string::npos);
}
