#include "lutfit/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

namespace lutfit {

using nlohmann::json;

namespace {

// Reads typed keys from one JSON object and rejects anything it did not read.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    template <typename T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(field(key) + ": wrong type");
        }
    }

    bool has(const char* key) const { return j_.contains(key); }
    const json& at(const char* key) {
        seen_.insert(key);
        return j_.at(key);
    }
    std::string field(const char* key) const { return path_ + "." + key; }

    void finish() const {
        for (const auto& [key, _] : j_.items()) {
            if (!seen_.count(key)) throw ConfigError(path_ + "." + key + ": unknown key");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <typename Fn>
void rethrow_as(const std::string& field, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(field + ": " + e.what());
    }
}

json bound_to_json(double v) { return std::isinf(v) ? json("inf") : json(v); }

double bound_from_json(const json& j, const std::string& field) {
    if (j.is_string() && j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    if (!j.is_number()) throw ConfigError(field + ": expected a number or \"inf\"");
    return j.get<double>();
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

RunConfig RunConfig::defaults(FunctionKind kind, int entries) {
    RunConfig cfg;
    cfg.function = NonLinSpec::defaults(kind);
    cfg.ga = GaConfig::for_function(kind, entries);
    if (!is_scale_carrying(kind)) cfg.plan = RangeScalingPlan::preset_for(kind);
    return cfg;
}

void RunConfig::validate() const {
    try {
        ga.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());  // already prefixed with "ga.<field>"
    }
    if (ga.frac_bits != datapath.lambda) {
        throw ConfigError("datapath.lambda: must equal ga.frac_bits (" +
                          std::to_string(ga.frac_bits) + ")");
    }
    if (function.scale_carrying()) {
        if (exponents.empty()) throw ConfigError("quant.exponents: must not be empty");
        int max_shift = 0;
        for (int e : exponents) max_shift = std::max(max_shift, -e);
        rethrow_as("datapath", [&] { datapath.validate(max_shift); });
        if (plan) throw ConfigError("quant.plan: only valid for div and rsqrt");
    } else {
        if (!plan) throw ConfigError("quant.plan: required for " + std::string(function.name()));
        rethrow_as("quant.plan", [&] { plan->validate(); });
        if (plan->op != function.kind()) {
            throw ConfigError("quant.plan: operator does not match function.name");
        }
        if (plan->inner != function.search_range()) {
            throw ConfigError("quant.plan.inner: must equal function.range");
        }
        rethrow_as("datapath", [&] { datapath.validate(0); });
    }
    if (seeds.empty()) throw ConfigError("seeds: must not be empty");
    static const std::set<std::string> formats{"data", "header", "memh"};
    for (const auto& f : output.formats) {
        if (!formats.count(f)) {
            throw ConfigError("output.formats: unsupported '" + f + "' (supported: data, header, memh)");
        }
    }
}

json plan_to_json(const RangeScalingPlan& plan) {
    json subs = json::array();
    for (const auto& sr : plan.sub_ranges) {
        subs.push_back({{"lo", sr.lo}, {"hi", bound_to_json(sr.hi)}, {"exponent", sr.scale.exponent}});
    }
    return {{"op", kind_name(plan.op)},
            {"inner", {plan.inner.lo, plan.inner.hi}},
            {"sub_ranges", subs}};
}

RangeScalingPlan plan_from_json(const json& j) {
    if (j.is_string()) {
        RangeScalingPlan plan;
        rethrow_as("quant.plan", [&] { plan = RangeScalingPlan::preset(j.get<std::string>()); });
        return plan;
    }
    Section s(j, "quant.plan");
    RangeScalingPlan plan;
    std::string op;
    std::vector<double> inner;
    s.read("op", op);
    s.read("inner", inner);
    rethrow_as(s.field("op"), [&] { plan.op = parse_kind(op); });
    if (inner.size() != 2) throw ConfigError("quant.plan.inner: expected [lo, hi]");
    plan.inner = {inner[0], inner[1]};
    if (s.has("sub_ranges")) {
        const json& subs = s.at("sub_ranges");
        if (!subs.is_array()) throw ConfigError("quant.plan.sub_ranges: expected an array");
        for (std::size_t i = 0; i < subs.size(); ++i) {
            const std::string path = "quant.plan.sub_ranges[" + std::to_string(i) + "]";
            Section sub(subs[i], path);
            SubRange sr;
            sub.read("lo", sr.lo);
            if (sub.has("hi")) sr.hi = bound_from_json(sub.at("hi"), path + ".hi");
            sub.read("exponent", sr.scale.exponent);
            sub.finish();
            plan.sub_ranges.push_back(sr);
        }
    }
    s.finish();
    return plan;
}

json to_json(const RunConfig& cfg) {
    const auto& ga = cfg.ga;
    json j;
    j["schema_version"] = kSchemaVersion;
    j["function"] = {{"name", cfg.function.name()},
                     {"range", {cfg.function.search_range().lo, cfg.function.search_range().hi}}};
    j["ga"] = {{"n_breakpoints", ga.n_breakpoints},
               {"population_size", ga.population_size},
               {"cross_prob", ga.cross_prob},
               {"mutate_prob", ga.mutate_prob},
               {"rm_prob", ga.rm_prob},
               {"rm_range", {ga.rm_min, ga.rm_max}},
               {"iterations", ga.iterations},
               {"frac_bits", ga.frac_bits},
               {"mutation", mutation_name(ga.mutation)},
               {"fitness", fitness_name(ga.fitness)},
               {"gaussian_sigma", ga.sigma_for(cfg.function.search_range())},
               {"grid_step", ga.grid_step}};
    j["quant"] = {{"bits", cfg.quant.bits}, {"signed", cfg.quant.is_signed}, {"exponents", cfg.exponents}};
    if (cfg.plan) j["quant"]["plan"] = plan_to_json(*cfg.plan);
    const auto& dp = cfg.datapath;
    j["datapath"] = {{"input_bits", dp.input_bits},
                     {"slope_bits", dp.widths.slope_bits},
                     {"intercept_bits", dp.widths.intercept_bits},
                     {"breakpoint_bits", dp.widths.breakpoint_bits},
                     {"lambda", dp.lambda},
                     {"acc_bits", dp.acc_bits}};
    j["seeds"] = cfg.seeds;
    j["output"] = {{"dir", cfg.output.dir}, {"formats", cfg.output.formats}};
    return j;
}

RunConfig run_config_from_json(const json& j) {
    Section root(j, "config");
    int version = kSchemaVersion;
    root.read("schema_version", version);
    if (version != kSchemaVersion) {
        throw ConfigError("schema_version: unsupported version " + std::to_string(version));
    }
    if (!root.has("function")) throw ConfigError("function.name: required");

    Section fn(root.at("function"), "function");
    std::string name;
    fn.read("name", name);
    if (name.empty()) throw ConfigError("function.name: required");
    FunctionKind kind{};
    rethrow_as("function.name", [&] { kind = parse_kind(name); });

    int entries = 8;
    if (root.has("ga") && root.at("ga").is_object() && root.at("ga").contains("n_breakpoints")) {
        const auto& nb = root.at("ga").at("n_breakpoints");
        if (!nb.is_number_integer()) throw ConfigError("ga.n_breakpoints: wrong type");
        entries = std::max(nb.get<int>(), 1) + 1;
    }
    RunConfig cfg = RunConfig::defaults(kind, entries);

    std::vector<double> range;
    fn.read("range", range);
    if (fn.has("range")) {
        if (range.size() != 2) throw ConfigError("function.range: expected [lo, hi]");
        rethrow_as("function.range", [&] { cfg.function = NonLinSpec(kind, {range[0], range[1]}); });
    }
    fn.finish();

    if (root.has("ga")) {
        Section ga(root.at("ga"), "ga");
        auto& g = cfg.ga;
        ga.read("n_breakpoints", g.n_breakpoints);
        ga.read("population_size", g.population_size);
        ga.read("cross_prob", g.cross_prob);
        ga.read("mutate_prob", g.mutate_prob);
        ga.read("rm_prob", g.rm_prob);
        std::vector<int> rm_range{g.rm_min, g.rm_max};
        ga.read("rm_range", rm_range);
        if (rm_range.size() != 2) throw ConfigError("ga.rm_range: expected [min, max]");
        g.rm_min = rm_range[0];
        g.rm_max = rm_range[1];
        ga.read("iterations", g.iterations);
        ga.read("frac_bits", g.frac_bits);
        std::string mutation(mutation_name(g.mutation));
        ga.read("mutation", mutation);
        rethrow_as("ga.mutation", [&] { g.mutation = parse_mutation(mutation); });
        std::string fitness(fitness_name(g.fitness));
        ga.read("fitness", fitness);
        rethrow_as("ga.fitness", [&] { g.fitness = parse_fitness(fitness); });
        if (ga.has("gaussian_sigma")) {
            double sigma = 0.0;
            ga.read("gaussian_sigma", sigma);
            g.gaussian_sigma = sigma;
        }
        ga.read("grid_step", g.grid_step);
        ga.finish();
        cfg.datapath.lambda = g.frac_bits;
    }

    if (root.has("quant")) {
        Section q(root.at("quant"), "quant");
        int bits = cfg.quant.bits;
        bool is_signed = cfg.quant.is_signed;
        q.read("bits", bits);
        q.read("signed", is_signed);
        rethrow_as("quant.bits", [&] {
            cfg.quant = is_signed ? QuantSpec::signed_bits(bits) : QuantSpec::unsigned_bits(bits);
        });
        q.read("exponents", cfg.exponents);
        if (q.has("plan")) cfg.plan = plan_from_json(q.at("plan"));
        q.finish();
    }

    if (root.has("datapath")) {
        Section d(root.at("datapath"), "datapath");
        auto& dp = cfg.datapath;
        d.read("input_bits", dp.input_bits);
        d.read("slope_bits", dp.widths.slope_bits);
        d.read("intercept_bits", dp.widths.intercept_bits);
        d.read("breakpoint_bits", dp.widths.breakpoint_bits);
        d.read("lambda", dp.lambda);
        d.read("acc_bits", dp.acc_bits);
        d.finish();
    }

    root.read("seeds", cfg.seeds);

    if (root.has("output")) {
        Section o(root.at("output"), "output");
        o.read("dir", cfg.output.dir);
        o.read("formats", cfg.output.formats);
        o.finish();
    }
    root.finish();

    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config: parse error in '" + path + "': " + e.what());
    }
    return run_config_from_json(j);
}

std::string config_hash(const RunConfig& cfg) {
    // Where results are written does not affect them, so the output section
    // is left out: the same fit sent to two directories hashes identically.
    json j = to_json(cfg);
    j.erase("output");
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(j.dump())));
    return buf;
}

}  // namespace lutfit
