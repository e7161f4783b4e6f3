#pragma once

// Run configuration: one JSON document describing a fit/eval/export run.
//
//   {
//     "schema_version": 1,
//     "function": {"name": "gelu", "range": [-4, 4]},
//     "ga": {"n_breakpoints": 7, "population_size": 50, ...},
//     "quant": {"bits": 8, "signed": true, "exponents": [-6, ..., 0],
//               "plan": "div-int8" | {"inner": [..], "sub_ranges": [..]}},
//     "datapath": {"input_bits": 8, "slope_bits": 8, "intercept_bits": 16,
//                  "breakpoint_bits": 8, "lambda": 5, "acc_bits": 32},
//     "seeds": [0],
//     "output": {"dir": "out", "formats": ["data"]}
//   }
//
// Every section is optional except function.name; missing keys take the
// per-operator defaults. Unknown keys are rejected.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lutfit/evolve.hpp"
#include "lutfit/intsim.hpp"
#include "lutfit/nonlin.hpp"
#include "lutfit/quant.hpp"

namespace lutfit {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "lutfit 1.0.0";

/// Invalid configuration; the message starts with the offending field path.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct OutputConfig {
    std::string dir = "out";
    std::vector<std::string> formats{"data"};

    bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
    NonLinSpec function = NonLinSpec::defaults(FunctionKind::Gelu);
    GaConfig ga;
    QuantSpec quant = QuantSpec::signed_bits(8);
    std::vector<int> exponents = {-6, -5, -4, -3, -2, -1, 0};
    /// Present for wide-range operators.
    std::optional<RangeScalingPlan> plan;
    DatapathConfig datapath;
    std::vector<std::uint64_t> seeds{0};
    OutputConfig output;

    /// Operator defaults for an `entries`-entry table.
    static RunConfig defaults(FunctionKind kind, int entries = 8);

    int entries() const { return ga.entries(); }

    /// Throws ConfigError.
    void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);

/// Overlay `j` on the defaults of j["function"]["name"]. Throws ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);

RunConfig load_run_config(const std::string& path);

/// FNV-1a 64 of the canonical JSON dump without the output section, as 16
/// hex digits.
std::string config_hash(const RunConfig& cfg);

/// FNV-1a 64 of arbitrary bytes.
std::uint64_t fnv1a64(std::string_view bytes);

nlohmann::json plan_to_json(const RangeScalingPlan& plan);
RangeScalingPlan plan_from_json(const nlohmann::json& j);

}  // namespace lutfit
