#include "voterperc/io.hpp"

#include <charconv>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace voterperc {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (!header.empty() && row.size() != header.size()) {
    throw std::invalid_argument("csv row has " + std::to_string(row.size()) +
                                " fields, header has " +
                                std::to_string(header.size()));
  }
  rows.push_back(std::move(row));
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void append_row(std::string& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    out += csv_field(row[i]);
  }
  out += '\n';
}

}  // namespace

std::string CsvTable::to_string() const {
  if (header.empty()) throw std::logic_error("csv table without header");
  std::string out;
  for (const auto& c : comments) out += "# " + c + '\n';
  append_row(out, header);
  for (const auto& r : rows) append_row(out, r);
  return out;
}

std::vector<std::string> header_comments(
    const std::map<std::string, std::string>& config, std::uint64_t seed) {
  std::vector<std::string> out;
  out.push_back(std::string("voterperc version ") + kVersion);
  for (const auto& [k, v] : config) out.push_back("config " + k + "=" + v);
  out.push_back("seed " + std::to_string(seed));
  return out;
}

std::vector<std::string> estimate_columns(const EstimateWithCI& e) {
  return {format_double(e.estimate), format_double(e.std_error),
          format_double(e.ci_lo), format_double(e.ci_hi), std::to_string(e.n)};
}

std::vector<std::pair<std::uint8_t, std::uint64_t>> run_length_encode(
    const std::vector<std::uint8_t>& values) {
  std::vector<std::pair<std::uint8_t, std::uint64_t>> runs;
  for (auto v : values) {
    if (!runs.empty() && runs.back().first == v) {
      ++runs.back().second;
    } else {
      runs.emplace_back(v, 1);
    }
  }
  return runs;
}

std::vector<std::uint8_t> run_length_decode(
    const std::vector<std::pair<std::uint8_t, std::uint64_t>>& runs) {
  std::vector<std::uint8_t> out;
  for (const auto& [v, n] : runs) out.insert(out.end(), n, v);
  return out;
}

std::string field_to_json(const FieldSample& xi,
                          const std::map<std::string, std::string>& config) {
  const auto& p = xi.provenance();
  json j;
  j["schema_version"] = kSchemaVersion;
  j["version"] = kVersion;
  j["config"] = config;
  j["provenance"] = {{"sampler", p.sampler},
                     {"d", p.d},
                     {"R", p.R},
                     {"alpha", p.alpha},
                     {"seed", p.seed},
                     {"horizon_kind", p.horizon_kind},
                     {"horizon", p.horizon},
                     {"extra", p.extra}};
  j["origin"] = xi.origin().coords();
  j["extent"] = xi.extent().coords();
  j["sites"] = xi.size();
  const auto raw = xi.raw();
  json runs = json::array();
  for (const auto& [v, n] : run_length_encode({raw.begin(), raw.end()})) {
    runs.push_back({v, n});
  }
  j["values_rle"] = std::move(runs);
  return j.dump(1) + '\n';
}

FieldSample field_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.at("schema_version").get<int>() != kSchemaVersion) {
    throw std::runtime_error("unsupported schema_version");
  }
  const Point origin(j.at("origin").get<std::vector<int>>());
  const Point extent(j.at("extent").get<std::vector<int>>());
  std::vector<std::pair<std::uint8_t, std::uint64_t>> runs;
  for (const auto& r : j.at("values_rle")) {
    runs.emplace_back(r.at(0).get<std::uint8_t>(), r.at(1).get<std::uint64_t>());
  }
  const auto raw = run_length_decode(runs);
  std::vector<Point> sites;
  std::vector<std::uint8_t> values;
  const int d = origin.dim();
  Point cur = origin;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    std::size_t rest = i;
    for (int a = d - 1; a >= 0; --a) {
      cur[a] = origin[a] + static_cast<int>(rest % static_cast<std::size_t>(extent[a]));
      rest /= static_cast<std::size_t>(extent[a]);
    }
    if (raw[i] == FieldSample::kUndefined) continue;
    sites.push_back(cur);
    values.push_back(raw[i]);
  }
  Provenance p;
  const auto& jp = j.at("provenance");
  p.sampler = jp.at("sampler").get<std::string>();
  p.d = jp.at("d").get<int>();
  p.R = jp.at("R").get<int>();
  p.alpha = jp.at("alpha").get<double>();
  p.seed = jp.at("seed").get<std::uint64_t>();
  p.horizon_kind = jp.at("horizon_kind").get<std::string>();
  p.horizon = jp.at("horizon").get<double>();
  p.extra = jp.at("extra").get<std::map<std::string, std::string>>();
  return FieldSample::on_sites(sites, values, std::move(p));
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace voterperc
