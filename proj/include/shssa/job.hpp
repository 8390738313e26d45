#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shssa/config.hpp"

namespace shssa::io {

enum class Command { decompose, reconstruct, esprit, rank, gen };

struct JobOutcome {
    std::vector<fs::path> written;
    std::vector<std::string> warnings;
    std::string summary; ///< human-readable lines for stdout
};

/// `decompose` writes eigentriples.json and the eigenarray / factor-vector CSVs, plus
/// reconstructions when groups are given and esprit.json when ESPRIT is enabled.
/// `reconstruct` always writes reconstructions (all triples in one group by default);
/// `esprit` always runs ESPRIT; `rank` writes rank.json. Failures are rethrown with the
/// stage name prepended, keeping their error kind.
JobOutcome run_job(Command command, const JobConfig& config);

/// grid.csv and manifest.json in `out_dir`; `seed` overrides the manifest's noise seed.
JobOutcome run_gen(const Manifest& manifest, const fs::path& out_dir, std::optional<std::uint64_t> seed = {});

/// Largest L·K the `rank` command accepts.
inline constexpr std::size_t rank_entry_limit = 1'000'000;

} // namespace shssa::io
