#include "lutfit/commands.hpp"

#include <cmath>
#include <future>
#include <map>
#include <sstream>

namespace lutfit {

namespace fs = std::filesystem;

namespace {

std::string stem(const RunConfig& cfg) {
    return std::string(cfg.function.name()) + "-" + std::to_string(cfg.entries());
}

std::string stem(const TableArtifact& a) {
    return std::string(a.table.spec.name()) + "-" + std::to_string(a.table.entries());
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

RunConfig for_seed(const RunConfig& cfg, std::uint64_t seed) {
    RunConfig one = cfg;
    one.seeds = {seed};
    return one;
}

TableArtifact fit_one(const RunConfig& cfg, std::uint64_t seed, std::vector<double>* history) {
    GaConfig ga = cfg.ga;
    ga.seed = seed;
    EvolveResult r = evolve(cfg.function, ga);
    if (history) *history = r.best_history;
    return {std::move(r.table),
            ga.frac_bits,
            std::string(mutation_name(ga.mutation)),
            std::string(fitness_name(ga.fitness)),
            r.float_mse,
            r.best_fitness,
            {config_hash(for_seed(cfg, seed)), seed, kToolVersion}};
}

FitOutcome cmd_fit(const RunConfig& cfg) {
    cfg.validate();

    struct SeedRun {
        TableArtifact artifact;
        std::vector<double> history;
    };
    std::vector<std::future<SeedRun>> jobs;
    for (std::uint64_t seed : cfg.seeds) {
        jobs.push_back(std::async(std::launch::async, [&cfg, seed] {
            std::vector<double> history;
            TableArtifact artifact = fit_one(cfg, seed, &history);
            return SeedRun{std::move(artifact), std::move(history)};
        }));
    }
    std::vector<SeedRun> runs;
    for (auto& job : jobs) runs.push_back(job.get());

    FitOutcome out;
    std::ostringstream log;
    log << "seed,generation,best_fitness\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& h = runs[i].history;
        for (std::size_t g = 0; g < h.size(); ++g) {
            log << runs[i].artifact.provenance.seed << "," << g << "," << fmt_double(h[g]) << "\n";
        }
        if (runs[i].artifact.best_fitness < runs[out.best].artifact.best_fitness) out.best = i;
        out.per_seed.push_back(runs[i].artifact);
    }

    const fs::path dir = cfg.output.dir;
    const std::string base = stem(cfg);
    for (const auto& a : out.per_seed) {
        const fs::path p = dir / (base + "-seed" + std::to_string(a.provenance.seed) + ".json");
        write_atomic(p, dump(to_json(a)));
        out.written.push_back(p);
    }
    const fs::path best = dir / (base + "-best.json");
    write_atomic(best, dump(to_json(out.per_seed[out.best])));
    out.written.push_back(best);
    const fs::path log_path = dir / (base + "-fit.csv");
    write_atomic(log_path, log.str());
    out.written.push_back(log_path);
    return out;
}

std::vector<std::pair<std::string, double>> wide_range_regions(const PwlTable& table,
                                                               const RangeScalingPlan& plan,
                                                               const DatapathConfig& datapath) {
    const QPwlTable qt = fxp_quantize_table(table, datapath.lambda, datapath.widths);
    std::vector<std::pair<std::string, double>> rows;
    auto region_mse = [&](const std::vector<double>& xs) {
        double sum = 0.0;
        for (double x : xs) {
            const double d = eval_scaled(qt, plan, x) - eval_ref(table.spec, x);
            sum += d * d;
        }
        return sum / static_cast<double>(xs.size());
    };
    RangeScalingPlan inner_only = plan;
    inner_only.sub_ranges.clear();
    rows.emplace_back("inner", region_mse(wide_range_samples(inner_only, 0)));
    for (std::size_t i = 0; i < plan.sub_ranges.size(); ++i) {
        const auto& sr = plan.sub_ranges[i];
        if (std::isinf(sr.hi)) continue;
        std::vector<double> xs;
        for (std::size_t k = 0; k < 1024; ++k) {
            xs.push_back(sr.lo + (sr.hi - sr.lo) * static_cast<double>(k) / 1024.0);
        }
        rows.emplace_back("sub" + std::to_string(i), region_mse(xs));
    }
    return rows;
}

EvalOutcome cmd_eval(const RunConfig& cfg, const TableArtifact& artifact) {
    cfg.validate();
    if (artifact.table.spec.kind() != cfg.function.kind()) {
        throw std::invalid_argument("eval: table is for " + std::string(artifact.table.spec.name()) +
                                    " but the config is for " + std::string(cfg.function.name()));
    }
    if (artifact.lambda != cfg.datapath.lambda) {
        throw std::invalid_argument("eval: table lambda " + std::to_string(artifact.lambda) +
                                    " differs from datapath lambda " +
                                    std::to_string(cfg.datapath.lambda));
    }

    EvalOutcome out;
    std::ostringstream csv;
    nlohmann::json summary{{"function", cfg.function.name()},
                           {"entries", artifact.table.entries()},
                           {"method", artifact.method},
                           {"provenance",
                            {{"config_hash", artifact.provenance.config_hash},
                             {"seed", artifact.provenance.seed},
                             {"tool_version", artifact.provenance.tool_version}}}};
    if (cfg.function.scale_carrying()) {
        auto report = sweep_scales(artifact.table, cfg.exponents, cfg.quant, cfg.datapath,
                                   artifact.method);
        csv << "exponent,mse\n";
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : report.per_scale) {
            csv << r.exponent << "," << fmt_double(r.mse) << "\n";
            rows.push_back({{"exponent", r.exponent}, {"mse", r.mse}});
        }
        summary["per_scale"] = rows;
        summary["average_mse"] = report.average_mse;
        out.sweep = std::move(report);
    } else {
        const double mse = wide_range_mse(artifact.table, *cfg.plan, cfg.datapath.lambda,
                                          cfg.datapath.widths);
        out.regions = wide_range_regions(artifact.table, *cfg.plan, cfg.datapath);
        csv << "region,mse\n";
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& [name, v] : out.regions) {
            csv << name << "," << fmt_double(v) << "\n";
            rows.push_back({{"region", name}, {"mse", v}});
        }
        summary["regions"] = rows;
        summary["average_mse"] = mse;
        out.wide_mse = mse;
    }

    const fs::path dir = cfg.output.dir;
    const std::string base = stem(artifact);
    const fs::path csv_path = dir / (base + "-eval.csv");
    const fs::path json_path = dir / (base + "-eval.json");
    write_atomic(csv_path, csv.str());
    write_atomic(json_path, dump(summary));
    out.written = {csv_path, json_path};
    return out;
}

QPwlTable build_qtable(const TableArtifact& artifact, const RunConfig& cfg,
                       std::optional<int> exponent) {
    if (artifact.table.spec.scale_carrying()) {
        if (!exponent) throw std::invalid_argument("export: a scale exponent is required");
        return quantize_table(artifact.table, PowTwoScale{*exponent}, cfg.quant, artifact.lambda,
                              cfg.datapath.widths);
    }
    return fxp_quantize_table(artifact.table, artifact.lambda, cfg.datapath.widths);
}

std::string render_export(const QPwlTable& table, const Provenance& provenance,
                          const std::string& format) {
    if (format == "data") return dump(to_json(table, provenance));
    if (format == "header") return to_c_header(table, provenance);
    if (format == "memh") return to_memh(table, provenance);
    throw std::invalid_argument("unsupported format '" + format +
                                "' (supported: data, header, memh)");
}

std::vector<fs::path> cmd_export(const RunConfig& cfg, const TableArtifact& artifact,
                                 const std::string& format, const std::vector<int>& exponents) {
    static const std::map<std::string, std::string> ext{
        {"data", ".json"}, {"header", ".h"}, {"memh", ".memh"}};
    if (!ext.count(format)) {
        throw std::invalid_argument("unsupported format '" + format +
                                    "' (supported: data, header, memh)");
    }
    if (artifact.table.spec.kind() != cfg.function.kind()) {
        throw std::invalid_argument("export: table operator does not match the config");
    }
    std::vector<std::pair<fs::path, std::string>> files;
    const fs::path dir = cfg.output.dir;
    const std::string base = stem(artifact) + "-lut";
    if (artifact.table.spec.scale_carrying()) {
        if (exponents.empty()) throw std::invalid_argument("export: no scale exponents given");
        for (int e : exponents) {
            const auto qt = build_qtable(artifact, cfg, e);
            files.emplace_back(dir / (base + "-e" + std::to_string(e) + ext.at(format)),
                               render_export(qt, artifact.provenance, format));
        }
    } else {
        const auto qt = build_qtable(artifact, cfg, std::nullopt);
        files.emplace_back(dir / (base + ext.at(format)),
                           render_export(qt, artifact.provenance, format));
    }
    std::vector<fs::path> written;
    for (const auto& [path, content] : files) {
        write_atomic(path, content);
        written.push_back(path);
    }
    return written;
}

}  // namespace lutfit
