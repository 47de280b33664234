#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "voterperc/field.hpp"
#include "voterperc/stats.hpp"

namespace voterperc {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// Shortest decimal that round-trips, always with '.' as separator.
std::string format_double(double v);

// A CSV table: '#'-prefixed comment lines, then a mandatory header row.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::string to_string() const;
};

// Standard comment block: version, each config entry, master seed.
std::vector<std::string> header_comments(
    const std::map<std::string, std::string>& config, std::uint64_t seed);

// Columns estimate, stderr, ci_lo, ci_hi, n.
std::vector<std::string> estimate_columns(const EstimateWithCI& e);
inline const std::vector<std::string> kEstimateHeader = {"estimate", "stderr",
                                                         "ci_lo", "ci_hi", "n"};

// FieldSample as JSON: schema_version, provenance, geometry, and run-length
// encoded values over the storage box in lexicographic order (undefined
// sites encoded as 255).
std::string field_to_json(const FieldSample& xi,
                          const std::map<std::string, std::string>& config = {});
FieldSample field_from_json(const std::string& text);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Run-length encoding as [value, count] pairs.
std::vector<std::pair<std::uint8_t, std::uint64_t>> run_length_encode(
    const std::vector<std::uint8_t>& values);
std::vector<std::uint8_t> run_length_decode(
    const std::vector<std::pair<std::uint8_t, std::uint64_t>>& runs);

}  // namespace voterperc
