#include "lutfit/artifact.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace lutfit {

using nlohmann::json;

namespace {

json provenance_json(const Provenance& p) {
    return {{"config_hash", p.config_hash}, {"seed", p.seed}, {"tool_version", p.tool_version}};
}

Provenance provenance_from(const json& j) {
    return {j.at("config_hash").get<std::string>(), j.at("seed").get<std::uint64_t>(),
            j.at("tool_version").get<std::string>()};
}

template <typename Fn>
auto parse_guard(const char* what, Fn&& fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string(what) + ": " + e.what());
    }
}

std::string c_type(int bits) {
    if (bits <= 8) return "int8_t";
    if (bits <= 16) return "int16_t";
    if (bits <= 32) return "int32_t";
    return "int64_t";
}

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    return os.str();
}

}  // namespace

json to_json(const TableArtifact& a) {
    const auto& t = a.table;
    return {{"kind", "lutfit.table"},
            {"schema_version", kSchemaVersion},
            {"function", t.spec.name()},
            {"range", {t.spec.search_range().lo, t.spec.search_range().hi}},
            {"entries", t.entries()},
            {"lambda", a.lambda},
            {"method", a.method},
            {"fitness", a.fitness},
            {"slopes", t.slopes},
            {"intercepts", t.intercepts},
            {"breakpoints", t.breakpoints},
            {"float_mse", a.float_mse},
            {"best_fitness", a.best_fitness},
            {"provenance", provenance_json(a.provenance)}};
}

TableArtifact table_artifact_from_json(const json& j) {
    return parse_guard("table artifact", [&] {
        if (j.at("kind").get<std::string>() != "lutfit.table") {
            throw std::invalid_argument("table artifact: not a lutfit.table document");
        }
        const auto range = j.at("range").get<std::vector<double>>();
        if (range.size() != 2) throw std::invalid_argument("table artifact: bad range");
        NonLinSpec spec(parse_kind(j.at("function").get<std::string>()), {range[0], range[1]});
        TableArtifact a{PwlTable{spec, j.at("slopes").get<std::vector<double>>(),
                                 j.at("intercepts").get<std::vector<double>>(),
                                 j.at("breakpoints").get<std::vector<double>>()},
                        j.at("lambda").get<int>(),
                        j.at("method").get<std::string>(),
                        j.at("fitness").get<std::string>(),
                        j.at("float_mse").get<double>(),
                        j.at("best_fitness").get<double>(),
                        provenance_from(j.at("provenance"))};
        const auto n = a.table.slopes.size();
        if (n == 0 || a.table.intercepts.size() != n || a.table.breakpoints.size() + 1 != n ||
            j.at("entries").get<std::size_t>() != n) {
            throw std::invalid_argument("table artifact: inconsistent entry counts");
        }
        if (!std::is_sorted(a.table.breakpoints.begin(), a.table.breakpoints.end())) {
            throw std::invalid_argument("table artifact: breakpoints not ascending");
        }
        return a;
    });
}

TableArtifact load_table_artifact(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    const json j = parse_guard("table artifact", [&] { return json::parse(text); });
    return table_artifact_from_json(j);
}

json to_json(const QPwlTable& t, const Provenance& provenance) {
    json j{{"kind", "lutfit.qtable"},
           {"schema_version", kSchemaVersion},
           {"function", kind_name(t.kind)},
           {"lambda", t.lambda},
           {"widths",
            {{"slope_bits", t.widths.slope_bits},
             {"intercept_bits", t.widths.intercept_bits},
             {"breakpoint_bits", t.widths.breakpoint_bits}}},
           {"encoding", t.encoding == BreakpointEncoding::Integer ? "integer" : "fixed_point"},
           {"slopes", t.slopes},
           {"intercepts", t.intercepts},
           {"breakpoints", t.breakpoints},
           {"source_entry", t.source_entry},
           {"warnings", t.warnings},
           {"provenance", provenance_json(provenance)}};
    j["scale_exponent"] = t.scale ? json(t.scale->exponent) : json(nullptr);
    return j;
}

QPwlTable qtable_from_json(const json& j, Provenance* provenance) {
    return parse_guard("qtable", [&] {
        if (j.at("kind").get<std::string>() != "lutfit.qtable") {
            throw std::invalid_argument("qtable: not a lutfit.qtable document");
        }
        QPwlTable t;
        t.kind = parse_kind(j.at("function").get<std::string>());
        t.lambda = j.at("lambda").get<int>();
        const auto& w = j.at("widths");
        t.widths = {w.at("slope_bits").get<int>(), w.at("intercept_bits").get<int>(),
                    w.at("breakpoint_bits").get<int>()};
        const auto enc = j.at("encoding").get<std::string>();
        if (enc == "integer") {
            t.encoding = BreakpointEncoding::Integer;
        } else if (enc == "fixed_point") {
            t.encoding = BreakpointEncoding::FixedPoint;
        } else {
            throw std::invalid_argument("qtable: unknown encoding '" + enc + "'");
        }
        if (!j.at("scale_exponent").is_null()) {
            t.scale = PowTwoScale{j.at("scale_exponent").get<int>()};
        }
        t.slopes = j.at("slopes").get<std::vector<std::int64_t>>();
        t.intercepts = j.at("intercepts").get<std::vector<std::int64_t>>();
        t.breakpoints = j.at("breakpoints").get<std::vector<std::int64_t>>();
        t.source_entry = j.at("source_entry").get<std::vector<int>>();
        t.warnings = j.at("warnings").get<std::vector<std::string>>();
        const auto n = t.slopes.size();
        if (n == 0 || t.intercepts.size() != n || t.breakpoints.size() + 1 != n ||
            t.source_entry.size() != n) {
            throw std::invalid_argument("qtable: inconsistent entry counts");
        }
        if ((t.encoding == BreakpointEncoding::Integer) != t.scale.has_value()) {
            throw std::invalid_argument("qtable: integer encoding requires a scale exponent");
        }
        if (provenance) *provenance = provenance_from(j.at("provenance"));
        return t;
    });
}

std::string to_c_header(const QPwlTable& t, const Provenance& provenance) {
    const std::string name(kind_name(t.kind));
    const std::string macro = "LUTFIT_" + upper(name);
    const std::string guard = macro + "_LUT_H_";
    std::ostringstream os;
    os << "// Generated by " << provenance.tool_version << "; config " << provenance.config_hash
       << ", seed " << provenance.seed << ".\n"
       << "// Slopes and intercepts are fixed point with " << t.lambda << " fractional bits.\n";
    if (t.encoding == BreakpointEncoding::Integer) {
        os << "// Breakpoints are quantized inputs q at scale 2^" << t.scale->exponent
           << "; intercepts are shifted by the scale exponent at run time.\n";
    } else {
        os << "// Breakpoints are fixed point with " << t.lambda << " fractional bits.\n";
    }
    os << "#ifndef " << guard << "\n#define " << guard << "\n\n#include <stdint.h>\n\n"
       << "#define " << macro << "_ENTRIES " << t.entries() << "\n"
       << "#define " << macro << "_LAMBDA " << t.lambda << "\n";
    if (t.scale) os << "#define " << macro << "_SCALE_EXP (" << t.scale->exponent << ")\n";
    os << "#define " << macro << "_SLOPE_BITS " << t.widths.slope_bits << "\n"
       << "#define " << macro << "_INTERCEPT_BITS " << t.widths.intercept_bits << "\n"
       << "#define " << macro << "_BREAKPOINT_BITS " << t.widths.breakpoint_bits << "\n\n"
       << "static const " << c_type(t.widths.slope_bits) << " " << name << "_lut_slope["
       << t.entries() << "] = {" << join(t.slopes) << "};\n"
       << "static const " << c_type(t.widths.intercept_bits) << " " << name << "_lut_intercept["
       << t.entries() << "] = {" << join(t.intercepts) << "};\n";
    if (!t.breakpoints.empty()) {
        os << "static const " << c_type(t.widths.breakpoint_bits) << " " << name
           << "_lut_breakpoint[" << t.breakpoints.size() << "] = {" << join(t.breakpoints)
           << "};\n";
    }
    os << "\n#endif  // " << guard << "\n";
    return os.str();
}

std::string pack_entry(std::int64_t slope, std::int64_t intercept, std::int64_t breakpoint,
                       const FieldWidths& widths) {
    const int total = widths.slope_bits + widths.intercept_bits + widths.breakpoint_bits;
    if (total > 128) throw std::invalid_argument("pack_entry: entry wider than 128 bits");
    __extension__ typedef unsigned __int128 word_t;
    word_t word = 0;
    auto put = [&word](std::int64_t v, int bits) {
        if (saturate(v, bits) != v) {
            throw std::invalid_argument("pack_entry: value " + std::to_string(v) +
                                        " does not fit " + std::to_string(bits) + " bits");
        }
        const word_t mask = (word_t{1} << bits) - 1;
        word = (word << bits) | (static_cast<word_t>(static_cast<std::uint64_t>(v)) & mask);
    };
    put(slope, widths.slope_bits);
    put(intercept, widths.intercept_bits);
    put(breakpoint, widths.breakpoint_bits);

    const int digits = (total + 3) / 4;
    std::string hex(static_cast<std::size_t>(digits), '0');
    for (int i = digits - 1; i >= 0; --i) {
        hex[static_cast<std::size_t>(i)] = "0123456789ABCDEF"[static_cast<int>(word & 0xF)];
        word >>= 4;
    }
    return hex;
}

std::string to_memh(const QPwlTable& t, const Provenance& provenance) {
    const auto& w = t.widths;
    std::ostringstream os;
    os << "// " << kind_name(t.kind) << " LUT, " << t.entries() << " entries, generated by "
       << provenance.tool_version << " (config " << provenance.config_hash << ", seed "
       << provenance.seed << ")\n"
       << "// word = {slope[" << w.slope_bits << "], intercept[" << w.intercept_bits
       << "], breakpoint[" << w.breakpoint_bits << "]}, most significant field first\n"
       << "// fields are two's complement; slope/intercept carry " << t.lambda
       << " fractional bits\n";
    if (t.scale) {
        os << "// breakpoint = quantized input q (scale 2^" << t.scale->exponent
           << "); entry i covers q < breakpoint[i]\n";
    } else {
        os << "// breakpoint = fixed point, " << t.lambda
           << " fractional bits; entry i covers x < breakpoint[i]\n";
    }
    os << "// last entry has no breakpoint (field is zero); entry 0 is the first line\n";
    for (std::size_t i = 0; i < t.entries(); ++i) {
        const std::int64_t bp = i < t.breakpoints.size() ? t.breakpoints[i] : 0;
        os << pack_entry(t.slopes[i], t.intercepts[i], bp, w) << "\n";
    }
    return os.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw std::runtime_error("write failed for '" + tmp.string() + "'");
        }
    }
    fs::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace lutfit
