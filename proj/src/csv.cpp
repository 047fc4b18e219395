#include "vfm/csv.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace vfm {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_number(const std::string& s, std::size_t row) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  while (begin != end && *begin == ' ') ++begin;
  double v = 0;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseFailure(row, "not a number: '" + s + "'");
  }
  if (!std::isfinite(v)) throw ParseFailure(row, "non-finite number");
  return v;
}

constexpr std::array<const char*, 14> kColumns = {
    "well_id", "asset_id", "t_days",    "choke_pct", "p1_bar",
    "p2_bar",  "temp_c",   "phi_g",     "phi_o",     "phi_w",
    "qg_ksm3d", "qo_sm3d", "qw_sm3d",   "source"};

// Fixed output precision keeps save/load a round trip at full double fidelity.
void put(std::ostream& os, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  os.write(buf, ptr - buf);
}

}  // namespace

AssetDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty file");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  const auto names = split_line(header);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < names.size(); ++i) col[names[i]] = i;
  for (const char* c : kColumns) {
    if (!col.count(c)) throw MissingColumn(c);
  }

  std::vector<WellObservation> obs;
  std::string line;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_line(line);
    if (f.size() < names.size()) throw ParseFailure(row, "too few fields");
    WellObservation o;
    o.well_id = f[col["well_id"]];
    o.asset_id = f[col["asset_id"]];
    o.t = parse_number(f[col["t_days"]], row);
    o.u = parse_number(f[col["choke_pct"]], row) / 100.0;
    o.p1 = parse_number(f[col["p1_bar"]], row);
    o.p2 = parse_number(f[col["p2_bar"]], row);
    o.T = parse_number(f[col["temp_c"]], row);
    o.phi_g = parse_number(f[col["phi_g"]], row);
    o.phi_o = parse_number(f[col["phi_o"]], row);
    o.phi_w = parse_number(f[col["phi_w"]], row);
    o.q_g = parse_number(f[col["qg_ksm3d"]], row);
    o.q_o = parse_number(f[col["qo_sm3d"]], row);
    o.q_w = parse_number(f[col["qw_sm3d"]], row);
    try {
      o.source = source_from_string(f[col["source"]]);
    } catch (const std::invalid_argument& e) {
      throw ParseFailure(row, e.what());
    }
    o.weight = source_weight(o.source);
    try {
      validate_observation(o);
    } catch (const InvariantViolation& e) {
      throw InvariantViolation("row " + std::to_string(row) + ": " + e.what());
    }
    obs.push_back(std::move(o));
  }
  return AssetDataset(std::move(obs));
}

void save_dataset(const AssetDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    out << (i ? "," : "") << kColumns[i];
  }
  out << "\n";
  for (const auto& o : data.observations()) {
    out << o.well_id << ',' << o.asset_id << ',';
    put(out, o.t); out << ',';
    put(out, o.u * 100.0); out << ',';
    put(out, o.p1); out << ',';
    put(out, o.p2); out << ',';
    put(out, o.T); out << ',';
    put(out, o.phi_g); out << ',';
    put(out, o.phi_o); out << ',';
    put(out, o.phi_w); out << ',';
    put(out, o.q_g); out << ',';
    put(out, o.q_o); out << ',';
    put(out, o.q_w); out << ',';
    out << to_string(o.source) << "\n";
  }
}

void save_splits(const AssetDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "well_id,t_days,split\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& o = data.obs(i);
    out << o.well_id << ',';
    put(out, o.t);
    out << ',' << to_string(data.split(i)) << "\n";
  }
}

void load_splits(AssetDataset& data, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);  // header
  // (well_id, t) keys to the first matching unlabelled observation, so
  // duplicate times within a well label one row each.
  std::map<std::pair<std::string, double>, std::vector<std::size_t>> lookup;
  for (std::size_t i = 0; i < data.size(); ++i) {
    lookup[{data.obs(i).well_id, data.obs(i).t}].push_back(i);
  }
  std::vector<SplitLabel> labels(data.size(), SplitLabel::Unassigned);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_line(line);
    if (f.size() < 3) throw ParseFailure(row, "too few fields");
    auto it = lookup.find({f[0], parse_number(f[1], row)});
    if (it == lookup.end() || it->second.empty()) {
      throw ParseFailure(row, "no matching observation for split row");
    }
    labels[it->second.front()] = split_from_string(f[2]);
    it->second.erase(it->second.begin());
  }
  data.set_splits(std::move(labels));
}

}  // namespace vfm
