#pragma once

// The fit / eval / export operations behind the command-line tool.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lutfit/artifact.hpp"
#include "lutfit/config.hpp"
#include "lutfit/evalbench.hpp"

namespace lutfit {

/// Config restricted to a single seed; its hash identifies a per-seed table.
RunConfig for_seed(const RunConfig& cfg, std::uint64_t seed);

/// Fit one table (one seed) without touching the filesystem.
TableArtifact fit_one(const RunConfig& cfg, std::uint64_t seed,
                      std::vector<double>* history = nullptr);

struct FitOutcome {
    std::vector<TableArtifact> per_seed;
    std::size_t best = 0;
    std::vector<std::filesystem::path> written;
};

/// Runs every seed (concurrently), then writes into <output.dir>:
///   <fn>-<entries>-seed<s>.json   per-seed table artifacts
///   <fn>-<entries>-best.json      copy of the lowest-fitness seed's artifact
///   <fn>-<entries>-fit.csv        seed,generation,best_fitness
/// Nothing is written if the config is invalid or any seed fails.
FitOutcome cmd_fit(const RunConfig& cfg);

struct EvalOutcome {
    /// Scale-carrying operators.
    std::optional<ScaleSweepReport> sweep;
    /// Wide-range operators: overall MSE plus one row per region.
    std::optional<double> wide_mse;
    std::vector<std::pair<std::string, double>> regions;
    std::vector<std::filesystem::path> written;
};

/// Per-region MSE rows for a wide-range table ("inner", "sub0", ...).
std::vector<std::pair<std::string, double>> wide_range_regions(const PwlTable& table,
                                                               const RangeScalingPlan& plan,
                                                               const DatapathConfig& datapath);

/// Evaluate an artifact under cfg's quantization settings and write
/// <fn>-<entries>-eval.csv plus <fn>-<entries>-eval.json into output.dir.
/// Refuses artifacts whose operator or λ differ from cfg.
EvalOutcome cmd_eval(const RunConfig& cfg, const TableArtifact& artifact);

/// Build the stored LUT for an artifact: quantize_table at `exponent` for
/// scale-carrying operators, fxp_quantize_table otherwise.
QPwlTable build_qtable(const TableArtifact& artifact, const RunConfig& cfg,
                       std::optional<int> exponent);

/// Supported: "data" (.json), "header" (.h), "memh" (.memh).
std::string render_export(const QPwlTable& table, const Provenance& provenance,
                          const std::string& format);

/// Export in `format` for every exponent in `exponents` (scale-carrying) or
/// once (wide-range). Returns the written paths.
std::vector<std::filesystem::path> cmd_export(const RunConfig& cfg, const TableArtifact& artifact,
                                              const std::string& format,
                                              const std::vector<int>& exponents);

}  // namespace lutfit
