#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "triphase/common.hpp"
#include "triphase/jas_alus.hpp"
#include "triphase/population.hpp"

namespace triphase::io {

// ---------------------------------------------------------------------------
// Report JSON
// ---------------------------------------------------------------------------

// Minimal JSON document builder for reports. Objects preserve insertion
// order and doubles are printed with 17 significant digits, so identical
// inputs always serialize to identical bytes.
class Json {
public:
    Json() = default;

    static Json object();
    static Json array();
    static Json boolean(bool b);
    static Json integer(std::int64_t i);
    static Json number(double d);
    static Json string(std::string s);

    Json& set(std::string key, Json value);  // object members, insertion order
    Json& push(Json value);                  // array elements

    std::string dump() const;  // two-space indentation, trailing newline

private:
    enum class Type { Null, Bool, Int, Double, String, Array, Object };
    Type type_ = Type::Null;
    bool bool_ = false;
    std::int64_t int_ = 0;
    double double_ = 0.0;
    std::string string_;
    std::vector<Json> items_;
    std::vector<std::pair<std::string, Json>> members_;

    void write(std::string& out, int depth) const;
};

// FNV-1a 64-bit content hash, as "fnv1a64:<16 hex digits>".
std::uint64_t fnv1a64(std::string_view bytes);
std::string content_hash(std::string_view bytes);

// Whole file as bytes; throws DataError when unreadable.
std::string read_file(const std::string& path);

// ---------------------------------------------------------------------------
// CSV input
// ---------------------------------------------------------------------------

// Population CSV, header `unit_id,y[,stratum]`. Errors carry 1-based line
// numbers. `name` labels the source in messages.
Population parse_population_csv(const std::string& content,
                                const std::string& name = "population");
Population load_population(const std::string& path);

// JAS-ALUS frame from three CSVs:
//   substrata: stratum,substratum,e,a,n,n_prime
//   segments:  stratum,substratum,segment,r,accurate_flag
//   tracts:    stratum,substratum,segment,tract,t_ratio
// Referential failures and range violations name the offending row.
JasAlusFrame parse_jas_alus_csv(const std::string& substrata_csv,
                                const std::string& segments_csv,
                                const std::string& tracts_csv);
JasAlusFrame load_jas_alus(const std::string& substrata_path, const std::string& segments_path,
                           const std::string& tracts_path);

// ---------------------------------------------------------------------------
// Command runner
// ---------------------------------------------------------------------------

// Exit codes: 0 success, 1 usage, 2 data/validation, 3 tolerance failure.
struct RunResult {
    int exit_code = 0;
    std::string report;  // JSON, also for errors
};

// Executes `command` in {estimate, check, simulate, jas-alus} against a JSON
// config file. Never throws; failures come back as {"error": ...} reports
// with the matching exit code.
RunResult run_command(const std::string& command, const std::string& config_path);

}  // namespace triphase::io
