#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "shssa/esprit.hpp"
#include "shssa/io.hpp"
#include "shssa/rank_model.hpp"

namespace shssa::io {

struct EspritConfig {
    bool enabled = false;
    std::size_t r = 2;
    EspritMethod method = EspritMethod::ls;
    std::vector<std::size_t> basis; ///< empty means 1..r
    bool row_space = false;
};

struct JobConfig {
    Topology topology;
    fs::path input;
    std::optional<fs::path> mask;
    std::optional<WindowSpec> window;
    std::size_t neig = 10;
    Grouping groups;
    EspritConfig esprit;
    fs::path output_dir = ".";
    std::uint64_t seed = 20240601;
    bool plots = false;
    double tol = 1e-9;
    std::size_t max_iter = 500;
};

/// Parses a JSON job description. Relative paths are resolved against `base_dir`.
JobConfig parse_job_config(std::string_view json_text, const fs::path& base_dir = {});
JobConfig load_job_config(const fs::path& path);

/// Groups disjoint and within 1..neig, ESPRIT basis within range, window and input present.
void validate(const JobConfig& config);

struct NoiseSpec {
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Fixture description for `gen`.
struct Manifest {
    Topology topology;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::optional<fs::path> mask;
    ComponentList components;
    NoiseSpec noise;
};

Manifest parse_manifest(std::string_view json_text, const fs::path& base_dir = {});
Manifest load_manifest(const fs::path& path);

/// Fully expanded manifest (explicit μ, ν and polynomial per component); parsing it
/// regenerates the same array bit for bit.
std::string manifest_to_json(const Manifest& m);

/// Region of the manifest's grid (minus masked cells).
Shape manifest_region(const Manifest& m);

/// Generated array plus seeded Gaussian noise, in shape order.
ShapedArray realize(const Manifest& m);

} // namespace shssa::io
