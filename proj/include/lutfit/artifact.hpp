#pragma once

// On-disk formats.
//
//  * table artifact (JSON): a fitted, FXP-rounded PwlTable plus provenance;
//    what `fit` writes and `eval`/`export` read.
//  * data export (JSON): every QPwlTable field plus provenance; reads back
//    to an identical QPwlTable.
//  * C header: integer arrays and LUT constants as macros.
//  * memh: one hex word per LUT entry, {slope, intercept, breakpoint}
//    packed most-significant field first, two's complement, entry 0 first.

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "lutfit/config.hpp"
#include "lutfit/pwl.hpp"
#include "lutfit/quant.hpp"

namespace lutfit {

struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string tool_version = kToolVersion;

    bool operator==(const Provenance&) const = default;
};

struct TableArtifact {
    PwlTable table;
    int lambda = 5;
    std::string method;  ///< "gaussian" or "rm"
    std::string fitness;  ///< "float" or "fxp"
    double float_mse = 0.0;
    double best_fitness = 0.0;
    Provenance provenance;
};

nlohmann::json to_json(const TableArtifact& artifact);
TableArtifact table_artifact_from_json(const nlohmann::json& j);
TableArtifact load_table_artifact(const std::filesystem::path& path);

nlohmann::json to_json(const QPwlTable& table, const Provenance& provenance);
/// Throws std::invalid_argument on schema violations.
QPwlTable qtable_from_json(const nlohmann::json& j, Provenance* provenance = nullptr);

std::string to_c_header(const QPwlTable& table, const Provenance& provenance);

/// One line per entry, upper-case hex, ceil(total_bits / 4) digits, after a
/// `//` comment block documenting the layout. The last entry has no
/// breakpoint; its field is zero.
std::string to_memh(const QPwlTable& table, const Provenance& provenance);

/// Hex word for one entry (no separators).
std::string pack_entry(std::int64_t slope, std::int64_t intercept, std::int64_t breakpoint,
                       const FieldWidths& widths);

/// Write via a temporary sibling and rename, so readers never see a
/// partial file.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace lutfit
