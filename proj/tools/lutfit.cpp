// lutfit: fit, evaluate and export quantization-aware pwl lookup tables.
//
//   lutfit fit    --function gelu --entries 8 --seeds 0,1,2 --out out/
//   lutfit eval   --table out/gelu-8-best.json --out out/
//   lutfit export --table out/gelu-8-best.json --format memh --exponent -5

#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "lutfit/commands.hpp"

using namespace lutfit;

namespace {

struct CommonFlags {
    std::string function;
    std::optional<int> entries;
    std::vector<std::uint64_t> seeds;
    std::string config;
    std::string out;
    std::string mutation;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--function", f.function, "gelu, hswish, exp, div, rsqrt or linear");
    cmd->add_option("--entries", f.entries, "LUT entries")->check(CLI::Range(2, 1024));
    cmd->add_option("--seed,--seeds", f.seeds, "RNG seed(s)")->delimiter(',');
    cmd->add_option("--config", f.config, "JSON run configuration");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--mutation", f.mutation, "gaussian or rm");
}

// Config file (if any) first, then flags on top.
RunConfig resolve(const CommonFlags& f, std::optional<FunctionKind> fallback_kind) {
    RunConfig cfg;
    if (!f.config.empty()) {
        cfg = load_run_config(f.config);
        if (!f.function.empty() && parse_kind(f.function) != cfg.function.kind()) {
            throw ConfigError("function.name: --function disagrees with the config file");
        }
        if (f.entries) {
            cfg.ga.n_breakpoints = *f.entries - 1;
        }
    } else {
        FunctionKind kind{};
        if (!f.function.empty()) {
            kind = parse_kind(f.function);
        } else if (fallback_kind) {
            kind = *fallback_kind;
        } else {
            throw ConfigError("function.name: pass --function or --config");
        }
        cfg = RunConfig::defaults(kind, f.entries.value_or(8));
    }
    if (!f.mutation.empty()) cfg.ga.mutation = parse_mutation(f.mutation);
    if (!f.seeds.empty()) cfg.seeds = f.seeds;
    if (!f.out.empty()) cfg.output.dir = f.out;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fit, evaluate and export quantization-aware piecewise-linear LUTs"};
    app.require_subcommand(1);

    CommonFlags fit_flags;
    auto* fit = app.add_subcommand("fit", "run the genetic fitter and write table artifacts");
    add_common(fit, fit_flags);

    CommonFlags eval_flags;
    std::string eval_table;
    auto* eval = app.add_subcommand("eval", "quantization-aware accuracy report for a table");
    add_common(eval, eval_flags);
    eval->add_option("--table", eval_table, "table artifact from fit")->required();

    CommonFlags export_flags;
    std::string export_table;
    std::vector<std::string> formats;
    std::vector<int> exponents;
    auto* exp = app.add_subcommand("export", "write hardware tables for an artifact");
    add_common(exp, export_flags);
    exp->add_option("--table", export_table, "table artifact from fit")->required();
    exp->add_option("--format", formats, "data, header or memh")->delimiter(',');
    exp->add_option("--exponent", exponents, "scale exponent(s); default: config sweep")
        ->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit->parsed()) {
            const RunConfig cfg = resolve(fit_flags, std::nullopt);
            const FitOutcome out = cmd_fit(cfg);
            for (const auto& a : out.per_seed) {
                std::printf("seed %llu: fitness %.6e (float-parameter mse %.6e)\n",
                            static_cast<unsigned long long>(a.provenance.seed), a.best_fitness,
                            a.float_mse);
            }
            for (const auto& p : out.written) std::printf("wrote %s\n", p.c_str());
        } else if (eval->parsed()) {
            const TableArtifact artifact = load_table_artifact(eval_table);
            const RunConfig cfg = resolve(eval_flags, artifact.table.spec.kind());
            const EvalOutcome out = cmd_eval(cfg, artifact);
            if (out.sweep) {
                for (const auto& r : out.sweep->per_scale) {
                    std::printf("e=%3d  mse %.6e\n", r.exponent, r.mse);
                }
                std::printf("average mse %.6e\n", out.sweep->average_mse);
            } else {
                for (const auto& [name, v] : out.regions) std::printf("%-6s mse %.6e\n", name.c_str(), v);
                std::printf("wide-range mse %.6e\n", *out.wide_mse);
            }
            for (const auto& p : out.written) std::printf("wrote %s\n", p.c_str());
        } else if (exp->parsed()) {
            const TableArtifact artifact = load_table_artifact(export_table);
            RunConfig cfg = resolve(export_flags, artifact.table.spec.kind());
            if (formats.empty()) formats = cfg.output.formats;
            if (exponents.empty()) exponents = cfg.exponents;
            for (const auto& format : formats) {
                for (const auto& p : cmd_export(cfg, artifact, format, exponents)) {
                    std::printf("wrote %s\n", p.c_str());
                }
            }
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "lutfit: error: %s\n", e.what());
        return 1;
    }
    return 0;
}
