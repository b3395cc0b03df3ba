#include "triphase/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "json.hpp"

#include "triphase/designs.hpp"
#include "triphase/estimator.hpp"
#include "triphase/oracle.hpp"
#include "triphase/random.hpp"

namespace triphase::io {

namespace {
using nlohmann::json;
}

// ---------------------------------------------------------------------------
// Json
// ---------------------------------------------------------------------------

Json Json::object() {
    Json j;
    j.type_ = Type::Object;
    return j;
}

Json Json::array() {
    Json j;
    j.type_ = Type::Array;
    return j;
}

Json Json::boolean(bool b) {
    Json j;
    j.type_ = Type::Bool;
    j.bool_ = b;
    return j;
}

Json Json::integer(std::int64_t i) {
    Json j;
    j.type_ = Type::Int;
    j.int_ = i;
    return j;
}

Json Json::number(double d) {
    Json j;
    j.type_ = Type::Double;
    j.double_ = d;
    return j;
}

Json Json::string(std::string s) {
    Json j;
    j.type_ = Type::String;
    j.string_ = std::move(s);
    return j;
}

Json& Json::set(std::string key, Json value) {
    members_.emplace_back(std::move(key), std::move(value));
    return *this;
}

Json& Json::push(Json value) {
    items_.push_back(std::move(value));
    return *this;
}

namespace {

void write_escaped(std::string& out, const std::string& s) {
    out.push_back('"');
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                    out += buf;
                } else {
                    out.push_back(ch);
                }
        }
    }
    out.push_back('"');
}

}  // namespace

void Json::write(std::string& out, int depth) const {
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    const std::string pad_in(static_cast<std::size_t>(depth + 1) * 2, ' ');
    switch (type_) {
        case Type::Null: out += "null"; break;
        case Type::Bool: out += bool_ ? "true" : "false"; break;
        case Type::Int: out += std::to_string(int_); break;
        case Type::Double: {
            if (!std::isfinite(double_)) {
                throw DataError("report serialization: non-finite number");
            }
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", double_);
            out += buf;
            break;
        }
        case Type::String: write_escaped(out, string_); break;
        case Type::Array: {
            if (items_.empty()) {
                out += "[]";
                break;
            }
            out += "[\n";
            for (std::size_t i = 0; i < items_.size(); ++i) {
                out += pad_in;
                items_[i].write(out, depth + 1);
                if (i + 1 < items_.size()) out += ",";
                out += "\n";
            }
            out += pad + "]";
            break;
        }
        case Type::Object: {
            if (members_.empty()) {
                out += "{}";
                break;
            }
            out += "{\n";
            for (std::size_t i = 0; i < members_.size(); ++i) {
                out += pad_in;
                write_escaped(out, members_[i].first);
                out += ": ";
                members_[i].second.write(out, depth + 1);
                if (i + 1 < members_.size()) out += ",";
                out += "\n";
            }
            out += pad + "}";
            break;
        }
    }
}

std::string Json::dump() const {
    std::string out;
    write(out, 0);
    out.push_back('\n');
    return out;
}

// ---------------------------------------------------------------------------
// Hashing and file access
// ---------------------------------------------------------------------------

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : bytes) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string content_hash(std::string_view bytes) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw DataError("failed reading file: " + path);
    return ss.str();
}

// ---------------------------------------------------------------------------
// CSV parsing
// ---------------------------------------------------------------------------

namespace {

struct CsvRow {
    std::size_t line = 0;  // 1-based
    std::vector<std::string> fields;
};

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

// Splits into header + rows; the header must match `expected` exactly, except
// that trailing names listed in `optional_tail` may be omitted.
std::vector<CsvRow> read_csv(const std::string& content, const std::string& name,
                             const std::vector<std::string>& expected,
                             std::size_t required_columns, std::size_t* column_count) {
    std::vector<CsvRow> rows;
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;
    std::size_t columns = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        CsvRow row;
        row.line = line_no;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            row.fields.push_back(trim(line.substr(start, comma - start)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (rows.empty() && columns == 0) {
            // header line
            if (row.fields.size() < required_columns || row.fields.size() > expected.size()) {
                throw DataError(name + " line 1: expected header " +
                                [&] {
                                    std::string h;
                                    for (std::size_t i = 0; i < expected.size(); ++i) {
                                        if (i) h += ",";
                                        h += expected[i];
                                    }
                                    return h;
                                }());
            }
            for (std::size_t i = 0; i < row.fields.size(); ++i) {
                if (row.fields[i] != expected[i]) {
                    throw DataError(name + " line 1: expected column '" + expected[i] +
                                    "', found '" + row.fields[i] + "'");
                }
            }
            columns = row.fields.size();
            continue;
        }
        if (row.fields.size() != columns) {
            throw DataError(name + " line " + std::to_string(line_no) + ": expected " +
                            std::to_string(columns) + " fields, found " +
                            std::to_string(row.fields.size()));
        }
        rows.push_back(std::move(row));
    }
    if (columns == 0) throw DataError(name + ": empty file (missing header)");
    if (column_count) *column_count = columns;
    return rows;
}

double parse_double(const std::string& s, const std::string& name, std::size_t line,
                    const std::string& what) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end || s.empty()) {
        throw DataError(name + " line " + std::to_string(line) + ": invalid " + what + " '" + s +
                        "'");
    }
    if (!std::isfinite(v)) {
        throw DataError(name + " line " + std::to_string(line) + ": non-finite " + what);
    }
    return v;
}

std::int64_t parse_int(const std::string& s, const std::string& name, std::size_t line,
                       const std::string& what) {
    std::int64_t v = 0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end || s.empty()) {
        throw DataError(name + " line " + std::to_string(line) + ": invalid " + what + " '" + s +
                        "'");
    }
    return v;
}

}  // namespace

Population parse_population_csv(const std::string& content, const std::string& name) {
    std::size_t columns = 0;
    const auto rows = read_csv(content, name, {"unit_id", "y", "stratum"}, 2, &columns);
    std::vector<Unit> units;
    std::map<UnitId, std::size_t> seen;  // id -> line
    units.reserve(rows.size());
    for (const CsvRow& row : rows) {
        Unit u;
        u.id = parse_int(row.fields[0], name, row.line, "unit_id");
        u.y = parse_double(row.fields[1], name, row.line, "y");
        if (columns == 3 && !row.fields[2].empty()) u.stratum = row.fields[2];
        const auto [it, inserted] = seen.emplace(u.id, row.line);
        if (!inserted) {
            throw DataError(name + " line " + std::to_string(row.line) + ": duplicate unit_id " +
                            std::to_string(u.id) + " (first seen line " +
                            std::to_string(it->second) + ")");
        }
        units.push_back(std::move(u));
    }
    if (units.empty()) throw DataError(name + ": no data rows");
    return Population(std::move(units));
}

Population load_population(const std::string& path) {
    return parse_population_csv(read_file(path), path);
}

JasAlusFrame parse_jas_alus_csv(const std::string& substrata_csv, const std::string& segments_csv,
                                const std::string& tracts_csv) {
    using SubKey = std::pair<std::string, std::string>;

    const auto sub_rows = read_csv(substrata_csv, "substrata",
                                   {"stratum", "substratum", "e", "a", "n", "n_prime"}, 6, nullptr);
    std::map<SubKey, Substratum> subs;
    for (const CsvRow& row : sub_rows) {
        Substratum s;
        s.stratum = row.fields[0];
        s.substratum = row.fields[1];
        s.e = parse_double(row.fields[2], "substrata", row.line, "e");
        s.a = parse_double(row.fields[3], "substrata", row.line, "a");
        const std::int64_t n = parse_int(row.fields[4], "substrata", row.line, "n");
        const std::int64_t np = parse_int(row.fields[5], "substrata", row.line, "n_prime");
        if (s.e < 1.0 || s.a < 1.0) {
            throw DataError("substrata line " + std::to_string(row.line) +
                            ": expansion factors must be >= 1");
        }
        if (n < 0 || np < 0) {
            throw DataError("substrata line " + std::to_string(row.line) +
                            ": negative segment count");
        }
        s.n = static_cast<std::size_t>(n);
        s.n_prime = static_cast<std::size_t>(np);
        const SubKey key{s.stratum, s.substratum};
        if (!subs.emplace(key, std::move(s)).second) {
            throw DataError("substrata line " + std::to_string(row.line) +
                            ": duplicate substratum " + row.fields[0] + "/" + row.fields[1]);
        }
    }

    const auto seg_rows = read_csv(segments_csv, "segments",
                                   {"stratum", "substratum", "segment", "r", "accurate_flag"}, 5,
                                   nullptr);
    // Values are (owning substratum, position); positions stay valid while
    // segments are appended.
    std::map<std::tuple<std::string, std::string, std::int64_t>,
             std::pair<Substratum*, std::size_t>>
        seg_index;
    for (const CsvRow& row : seg_rows) {
        const SubKey key{row.fields[0], row.fields[1]};
        const auto sub_it = subs.find(key);
        if (sub_it == subs.end()) {
            throw DataError("segments line " + std::to_string(row.line) + ": unknown substratum " +
                            row.fields[0] + "/" + row.fields[1]);
        }
        Segment seg;
        seg.segment_id = parse_int(row.fields[2], "segments", row.line, "segment");
        seg.r = parse_double(row.fields[3], "segments", row.line, "r");
        if (seg.r < 1.0) {
            throw DataError("segments line " + std::to_string(row.line) +
                            ": response factor r must be >= 1");
        }
        if (row.fields[4] == "0") {
            seg.accurate = false;
        } else if (row.fields[4] == "1") {
            seg.accurate = true;
        } else {
            throw DataError("segments line " + std::to_string(row.line) +
                            ": accurate_flag must be 0 or 1");
        }
        const auto seg_key = std::make_tuple(row.fields[0], row.fields[1], seg.segment_id);
        if (seg_index.count(seg_key)) {
            throw DataError("segments line " + std::to_string(row.line) + ": duplicate segment " +
                            row.fields[2] + " in substratum " + row.fields[0] + "/" +
                            row.fields[1]);
        }
        Substratum& sub = sub_it->second;
        sub.segments.push_back(std::move(seg));
        seg_index[seg_key] = {&sub, sub.segments.size() - 1};
    }

    const auto tract_rows = read_csv(
        tracts_csv, "tracts", {"stratum", "substratum", "segment", "tract", "t_ratio"}, 5, nullptr);
    std::set<std::tuple<std::string, std::string, std::int64_t, std::int64_t>> tract_seen;
    for (const CsvRow& row : tract_rows) {
        const std::int64_t seg_id = parse_int(row.fields[2], "tracts", row.line, "segment");
        const auto seg_key = std::make_tuple(row.fields[0], row.fields[1], seg_id);
        const auto seg_it = seg_index.find(seg_key);
        if (seg_it == seg_index.end()) {
            throw DataError("tracts line " + std::to_string(row.line) + ": unknown segment " +
                            row.fields[2] + " in substratum " + row.fields[0] + "/" +
                            row.fields[1]);
        }
        Tract t;
        t.tract_id = parse_int(row.fields[3], "tracts", row.line, "tract");
        t.ratio = parse_double(row.fields[4], "tracts", row.line, "t_ratio");
        if (t.ratio < 0.0 || t.ratio > 1.0) {
            throw DataError("tracts line " + std::to_string(row.line) +
                            ": t_ratio must lie in [0,1]");
        }
        if (!tract_seen
                 .emplace(row.fields[0], row.fields[1], seg_id, t.tract_id)
                 .second) {
            throw DataError("tracts line " + std::to_string(row.line) + ": duplicate tract " +
                            row.fields[3] + " in segment " + row.fields[2]);
        }
        seg_it->second.first->segments[seg_it->second.second].tracts.push_back(t);
    }

    std::vector<Substratum> list;
    list.reserve(subs.size());
    for (auto& [key, sub] : subs) list.push_back(std::move(sub));
    return JasAlusFrame(std::move(list));
}

JasAlusFrame load_jas_alus(const std::string& substrata_path, const std::string& segments_path,
                           const std::string& tracts_path) {
    return parse_jas_alus_csv(read_file(substrata_path), read_file(segments_path),
                              read_file(tracts_path));
}

// ---------------------------------------------------------------------------
// Command runner
// ---------------------------------------------------------------------------

namespace {

const json& require(const json& cfg, const char* key) {
    if (!cfg.contains(key)) throw DataError(std::string("config: missing key '") + key + "'");
    return cfg.at(key);
}

double as_double(const json& v, const std::string& what) {
    if (!v.is_number()) throw DataError("config: " + what + " must be a number");
    return v.get<double>();
}

std::int64_t as_int(const json& v, const std::string& what) {
    if (!v.is_number_integer()) throw DataError("config: " + what + " must be an integer");
    return v.get<std::int64_t>();
}

std::uint64_t as_uint(const json& v, const std::string& what) {
    const std::int64_t i = as_int(v, what);
    if (i < 0) throw DataError("config: " + what + " must be nonnegative");
    return static_cast<std::uint64_t>(i);
}

std::string as_string(const json& v, const std::string& what) {
    if (!v.is_string()) throw DataError("config: " + what + " must be a string");
    return v.get<std::string>();
}

UnitId parse_unit_key(const std::string& key, const std::string& what) {
    UnitId id = 0;
    const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
    if (ec != std::errc{} || ptr != key.data() + key.size()) {
        throw DataError("config: " + what + " key '" + key + "' is not a unit id");
    }
    return id;
}

PhaseDesign design_from_config(const json& spec, const Population& pop, const std::string& which) {
    const std::string kind = as_string(require(spec, "kind"), which + ".kind");
    if (kind == "srswor") {
        const std::int64_t n = as_int(require(spec, "n"), which + ".n");
        if (n <= 0) throw DataError("config: " + which + ".n must be positive");
        return PhaseDesign::srswor(static_cast<std::size_t>(n));
    }
    if (kind == "stratified_srswor") {
        const json& sizes = require(spec, "sizes");
        if (!sizes.is_object()) throw DataError("config: " + which + ".sizes must be an object");
        std::map<std::string, std::size_t> out;
        for (const auto& [label, v] : sizes.items()) {
            const std::int64_t n = as_int(v, which + ".sizes." + label);
            if (n <= 0) throw DataError("config: " + which + ".sizes." + label + " must be positive");
            out[label] = static_cast<std::size_t>(n);
        }
        const auto strata = pop.strata();
        if (strata.empty()) {
            throw DataError("config: " + which +
                            " is stratified but the population has no stratum column");
        }
        return PhaseDesign::stratified_srswor(std::move(out), strata);
    }
    if (kind == "bernoulli") {
        const double p = as_double(require(spec, "p"), which + ".p");
        std::map<UnitId, double> per_unit;
        if (spec.contains("per_unit")) {
            const json& pu = spec.at("per_unit");
            if (!pu.is_object()) {
                throw DataError("config: " + which + ".per_unit must be an object");
            }
            for (const auto& [key, v] : pu.items()) {
                per_unit[parse_unit_key(key, which + ".per_unit")] =
                    as_double(v, which + ".per_unit." + key);
            }
        }
        return PhaseDesign::bernoulli(p, std::move(per_unit));
    }
    if (kind == "census") return PhaseDesign::census();
    if (kind == "table") {
        const json& pi = require(spec, "pi");
        if (!pi.is_object()) throw DataError("config: " + which + ".pi must be an object");
        std::map<UnitId, double> first;
        for (const auto& [key, v] : pi.items()) {
            first[parse_unit_key(key, which + ".pi")] = as_double(v, which + ".pi." + key);
        }
        std::vector<std::tuple<UnitId, UnitId, double>> joint;
        if (spec.contains("pi_joint")) {
            const json& pj = spec.at("pi_joint");
            if (!pj.is_array()) throw DataError("config: " + which + ".pi_joint must be an array");
            for (const json& entry : pj) {
                if (!entry.is_array() || entry.size() != 3) {
                    throw DataError("config: " + which + ".pi_joint entries must be [k,p,value]");
                }
                joint.emplace_back(as_int(entry[0], which + ".pi_joint"),
                                   as_int(entry[1], which + ".pi_joint"),
                                   as_double(entry[2], which + ".pi_joint"));
            }
        }
        return PhaseDesign::table(std::move(first), joint);
    }
    throw DataError("config: unknown design kind '" + kind + "' for " + which);
}

IdSet idset_from_config(const json& arr, const std::string& what) {
    if (!arr.is_array()) throw DataError("config: " + what + " must be an array of unit ids");
    IdSet out;
    out.reserve(arr.size());
    for (const json& v : arr) out.push_back(as_int(v, what));
    std::sort(out.begin(), out.end());
    return out;
}

PhaseProbabilities probabilities_or_empty(const PhaseDesign& d, const IdSet& frame) {
    if (frame.empty()) return PhaseProbabilities({}, {}, {});
    return inclusion_probabilities(d, frame);
}

struct LoadedInput {
    std::string path;
    std::string hash;
};

Json provenance_json(const std::string& command, const std::string& config_digest,
                     const std::vector<LoadedInput>& inputs) {
    Json prov = Json::object();
    prov.set("command", Json::string(command));
    prov.set("config_digest", Json::string(config_digest));
    Json in = Json::array();
    for (const LoadedInput& i : inputs) {
        Json f = Json::object();
        f.set("path", Json::string(i.path));
        f.set("hash", Json::string(i.hash));
        in.push(std::move(f));
    }
    prov.set("inputs", std::move(in));
    return prov;
}

Json warnings_json(const std::vector<std::string>& warnings) {
    Json w = Json::array();
    for (const std::string& s : warnings) w.push(Json::string(s));
    return w;
}

Json checks_json(const std::vector<CheckResult>& checks) {
    Json arr = Json::array();
    for (const CheckResult& c : checks) {
        Json j = Json::object();
        j.set("name", Json::string(c.name));
        j.set("lhs", Json::number(c.lhs));
        j.set("rhs", Json::number(c.rhs));
        j.set("rel_gap", Json::number(c.rel_gap));
        j.set("tolerance", Json::number(c.tolerance));
        j.set("pass", Json::boolean(c.pass));
        arr.push(std::move(j));
    }
    return arr;
}

struct CommandContext {
    const json& cfg;
    std::vector<LoadedInput>& inputs;
};

Population load_population_input(CommandContext& ctx) {
    const std::string path = as_string(require(ctx.cfg, "population"), "population");
    const std::string content = read_file(path);
    ctx.inputs.push_back({path, content_hash(content)});
    return parse_population_csv(content, path);
}

struct Designs {
    PhaseDesign d1;
    PhaseDesign d2;
    PhaseDesign d3;
};

Designs load_designs(CommandContext& ctx, const Population& pop) {
    return Designs{design_from_config(require(ctx.cfg, "phase1"), pop, "phase1"),
                   design_from_config(require(ctx.cfg, "phase2"), pop, "phase2"),
                   design_from_config(require(ctx.cfg, "phase3"), pop, "phase3")};
}

EnumerationLimits load_limits(const json& cfg) {
    EnumerationLimits limits;
    if (cfg.contains("enumeration_cap")) {
        limits.max_frame =
            static_cast<std::size_t>(as_uint(cfg.at("enumeration_cap"), "enumeration_cap"));
    }
    if (cfg.contains("max_outcomes")) {
        limits.max_outcomes =
            static_cast<std::size_t>(as_uint(cfg.at("max_outcomes"), "max_outcomes"));
    }
    return limits;
}

CheckTolerances load_tolerances(const json& cfg) {
    CheckTolerances tol;
    if (!cfg.contains("tolerances")) return tol;
    const json& t = cfg.at("tolerances");
    if (!t.is_object()) throw DataError("config: tolerances must be an object");
    if (t.contains("mass")) tol.mass = as_double(t.at("mass"), "tolerances.mass");
    if (t.contains("point")) tol.point = as_double(t.at("point"), "tolerances.point");
    if (t.contains("variance")) tol.variance = as_double(t.at("variance"), "tolerances.variance");
    if (t.contains("decomposition")) {
        tol.decomposition = as_double(t.at("decomposition"), "tolerances.decomposition");
    }
    if (t.contains("identity")) tol.identity = as_double(t.at("identity"), "tolerances.identity");
    return tol;
}

RunResult run_estimate(CommandContext& ctx, const std::string& command,
                       const std::string& config_digest) {
    const Population pop = load_population_input(ctx);
    const Designs designs = load_designs(ctx, pop);

    NestedSample sample;
    if (ctx.cfg.contains("samples")) {
        const json& s = ctx.cfg.at("samples");
        sample.S = idset_from_config(require(s, "S"), "samples.S");
        sample.R = idset_from_config(require(s, "R"), "samples.R");
        sample.F = idset_from_config(require(s, "F"), "samples.F");
    } else {
        const std::uint64_t seed = as_uint(require(ctx.cfg, "seed"), "seed");
        RandomStream stream(seed);
        sample.S = draw(designs.d1, pop.ids(), stream);
        sample.R = draw(designs.d2, sample.S, stream);
        sample.F = draw(designs.d3, sample.R, stream);
    }
    sample.validate_within(pop.ids());
    validate_realization(designs.d1, pop.ids(), sample.S);
    validate_realization(designs.d2, sample.S, sample.R);
    validate_realization(designs.d3, sample.R, sample.F);

    const ProbabilityChain chain(inclusion_probabilities(designs.d1, pop.ids()),
                                 probabilities_or_empty(designs.d2, sample.S),
                                 probabilities_or_empty(designs.d3, sample.R));
    const EstimateReport rep = variance_estimate(sample, chain, pop.values());

    Json out = Json::object();
    out.set("point", Json::number(rep.point));
    out.set("variance", Json::number(rep.variance));
    Json terms = Json::array();
    terms.push(Json::number(rep.term1));
    terms.push(Json::number(rep.term2));
    terms.push(Json::number(rep.term3));
    out.set("terms", std::move(terms));
    out.set("warnings", warnings_json(rep.warnings));
    out.set("provenance", provenance_json(command, config_digest, ctx.inputs));
    return RunResult{0, out.dump()};
}

RunResult run_check(CommandContext& ctx, const std::string& command,
                    const std::string& config_digest) {
    const Population pop = load_population_input(ctx);
    const Designs designs = load_designs(ctx, pop);
    const EnumerationLimits limits = load_limits(ctx.cfg);
    const CheckTolerances tol = load_tolerances(ctx.cfg);

    const OutcomeDistribution dist =
        enumerate_three_phase(pop, designs.d1, designs.d2, designs.d3, limits);
    ExpectationReport rep = expectation_check(dist, pop, tol);

    if (ctx.cfg.contains("constant_identity")) {
        const json& ci = ctx.cfg.at("constant_identity");
        const std::uint64_t count = as_uint(require(ci, "count"), "constant_identity.count");
        const std::uint64_t seed = as_uint(require(ci, "seed"), "constant_identity.seed");
        for (std::uint64_t i = 0; i < count; ++i) {
            const std::vector<double> c = random_pair_constants(pop.size(), seed, i);
            const IdentityReport id_rep = arbitrary_constant_identity(
                pop, designs.d1, designs.d2, designs.d3, c, limits);
            CheckResult check;
            check.name = "constant_identity_" + std::to_string(i);
            check.lhs = id_rep.lhs;
            check.rhs = id_rep.rhs;
            check.rel_gap = id_rep.rel_gap;
            check.tolerance = tol.identity;
            check.pass = id_rep.rel_gap < tol.identity;
            rep.all_pass = rep.all_pass && check.pass;
            rep.checks.push_back(std::move(check));
        }
    }

    Json out = Json::object();
    out.set("checks", checks_json(rep.checks));
    out.set("warnings", warnings_json({}));
    out.set("provenance", provenance_json(command, config_digest, ctx.inputs));
    return RunResult{rep.all_pass ? 0 : 3, out.dump()};
}

RunResult run_simulate(CommandContext& ctx, const std::string& command,
                       const std::string& config_digest) {
    const Population pop = load_population_input(ctx);
    const Designs designs = load_designs(ctx, pop);
    MonteCarloOptions options;
    options.reps = as_uint(require(ctx.cfg, "reps"), "reps");
    options.seed = as_uint(require(ctx.cfg, "seed"), "seed");
    if (ctx.cfg.contains("threads")) {
        options.threads = static_cast<unsigned>(as_uint(ctx.cfg.at("threads"), "threads"));
    }
    const MonteCarloReport rep =
        monte_carlo(pop, designs.d1, designs.d2, designs.d3, options);

    Json out = Json::object();
    out.set("reps", Json::integer(static_cast<std::int64_t>(rep.reps)));
    out.set("population_total", Json::number(rep.population_total));
    out.set("mean_t", Json::number(rep.mean_t));
    out.set("se_mean_t", Json::number(rep.se_mean_t));
    out.set("mean_v", Json::number(rep.mean_v));
    out.set("se_mean_v", Json::number(rep.se_mean_v));
    out.set("emp_var_t", Json::number(rep.emp_var_t));
    out.set("se_emp_var_t", Json::number(rep.se_emp_var_t));
    out.set("warnings", warnings_json({}));
    out.set("provenance", provenance_json(command, config_digest, ctx.inputs));
    return RunResult{0, out.dump()};
}

RunResult run_jas_alus(CommandContext& ctx, const std::string& command,
                       const std::string& config_digest) {
    const std::string sub_path = as_string(require(ctx.cfg, "substrata"), "substrata");
    const std::string seg_path = as_string(require(ctx.cfg, "segments"), "segments");
    const std::string tract_path = as_string(require(ctx.cfg, "tracts"), "tracts");
    const std::string sub_content = read_file(sub_path);
    const std::string seg_content = read_file(seg_path);
    const std::string tract_content = read_file(tract_path);
    ctx.inputs.push_back({sub_path, content_hash(sub_content)});
    ctx.inputs.push_back({seg_path, content_hash(seg_content)});
    ctx.inputs.push_back({tract_path, content_hash(tract_content)});

    const JasAlusFrame frame = parse_jas_alus_csv(sub_content, seg_content, tract_content);
    const JasAlusReport rep = jas_alus_report(frame);

    Json out = Json::object();
    out.set("t1", Json::number(rep.t1));
    out.set("var_t1", Json::number(rep.var_t1));
    out.set("t1_prime", Json::number(rep.t1_prime));
    out.set("t2_prime", Json::number(rep.t2_prime));
    out.set("t2", Json::number(rep.t2));
    out.set("var_t1_prime", Json::number(rep.var_t1_prime));
    out.set("var_t2prime_hat", Json::number(rep.var_t2prime_hat));
    out.set("var_t2prime_five_term", Json::number(rep.var_t2prime_five_term));
    out.set("var_t2", Json::number(rep.var_t2));
    Json subs = Json::array();
    for (const SubstratumVariance& v : rep.substrata) {
        Json s = Json::object();
        s.set("i", Json::string(v.stratum));
        s.set("j", Json::string(v.substratum));
        s.set("v_ij", Json::number(v.v_ij));
        subs.push(std::move(s));
    }
    out.set("substrata", std::move(subs));
    out.set("warnings", warnings_json(rep.warnings));
    out.set("provenance", provenance_json(command, config_digest, ctx.inputs));
    return RunResult{0, out.dump()};
}

RunResult error_result(int code, const std::string& category, const std::string& message) {
    Json out = Json::object();
    Json err = Json::object();
    err.set("category", Json::string(category));
    err.set("message", Json::string(message));
    out.set("error", std::move(err));
    return RunResult{code, out.dump()};
}

}  // namespace

RunResult run_command(const std::string& command, const std::string& config_path) {
    try {
        if (command != "estimate" && command != "check" && command != "simulate" &&
            command != "jas-alus") {
            return error_result(1, "usage", "unknown command '" + command + "'");
        }
        const std::string config_content = read_file(config_path);
        json cfg;
        try {
            cfg = json::parse(config_content);
        } catch (const json::exception& e) {
            throw DataError("config: " + std::string(e.what()));
        }
        if (!cfg.is_object()) throw DataError("config: top level must be an object");
        const std::string config_digest = content_hash(config_content);

        std::vector<LoadedInput> inputs;
        CommandContext ctx{cfg, inputs};
        if (command == "estimate") return run_estimate(ctx, command, config_digest);
        if (command == "check") return run_check(ctx, command, config_digest);
        if (command == "simulate") return run_simulate(ctx, command, config_digest);
        return run_jas_alus(ctx, command, config_digest);
    } catch (const EnumerationLimitError& e) {
        return error_result(2, "data", e.what());
    } catch (const ValidationError& e) {
        return error_result(2, "data", e.what());
    } catch (const DataError& e) {
        return error_result(2, "data", e.what());
    } catch (const std::exception& e) {
        return error_result(2, "data", e.what());
    }
}

}  // namespace triphase::io
