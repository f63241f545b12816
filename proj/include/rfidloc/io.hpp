#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfidloc/coverage.hpp"
#include "rfidloc/experiments.hpp"

namespace rfidloc {

// All emitted floats carry 9 significant digits.
inline std::string fmt9(double v) { return format_double(v, 9); }

inline double parse_double(const std::string& token) {
  if (token == "inf") return std::numeric_limits<double>::infinity();
  if (token == "-inf") return -std::numeric_limits<double>::infinity();
  if (token == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(token, &used);
  if (used != token.size()) throw std::invalid_argument("bad float token '" + token + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string theta_tag(double theta) {
  const struct { double value; const char* tag; } named[] = {
      {kPi / 4, "pi4"}, {kPi / 3, "pi3"}, {kPi / 2, "pi2"}, {kPi / 6, "pi6"}};
  for (const auto& n : named) {
    if (std::abs(theta - n.value) < 1e-12) return n.tag;
  }
  return "r" + format_double(theta, 6);
}

inline std::string result_file_name(const SweepKey& key) {
  char power[32];
  std::snprintf(power, sizeof(power), "%d", static_cast<int>(std::lround(key.power_mw)));
  return to_string(key.placement) + "_" + theta_tag(key.theta) + "_" + power + "mw_" +
         to_string(key.mode) + ".csv";
}

// ---- coverage map ----------------------------------------------------------

struct CoverageCsvRow {
  double x = 0.0;
  double y = 0.0;
  int m = 0;
  int localizable = 0;
  double max_rss_dbm = 0.0;
};

inline std::string coverage_csv(const CoverageMap& map) {
  std::ostringstream os;
  os << "x,y,m,localizable,max_rss_dbm\n";
  for (std::size_t k = 0; k < map.grid.cell_count(); ++k) {
    const Position3D c = map.grid.cell_center(k);
    os << fmt9(c.x) << ',' << fmt9(c.y) << ',' << map.m_count[k] << ','
       << int(map.localizable[k]) << ',' << fmt9(map.max_rss_dbm[k]) << '\n';
  }
  return os.str();
}

inline std::vector<CoverageCsvRow> parse_coverage_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "x,y,m,localizable,max_rss_dbm")
    throw std::invalid_argument("bad coverage CSV header");
  std::vector<CoverageCsvRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) throw std::invalid_argument("bad coverage CSV row: " + line);
    rows.push_back({parse_double(f[0]), parse_double(f[1]), std::stoi(f[2]), std::stoi(f[3]),
                    parse_double(f[4])});
  }
  return rows;
}

inline nlohmann::ordered_json coverage_summary_json(const Scenario& scenario,
                                                    const CoverageMap& map) {
  nlohmann::ordered_json j;
  j["scenario_hash"] = scenario.content_hash_hex();
  j["placement"] = to_string(scenario.placement);
  j["mode"] = to_string(scenario.mode);
  j["grid_step_m"] = scenario.room.step;
  j["cells"] = map.grid.cell_count();
  j["coverage_percentage"] = coverage_percentage(map);
  return j;
}

// ---- accuracy / CRLB maps --------------------------------------------------

inline std::string accuracy_csv(const AccuracyPoint& point) {
  std::ostringstream os;
  os << "x,y,m,crlb_rmse_m,mle_rmse_m\n";
  for (const auto& c : point.cells) {
    os << fmt9(c.x) << ',' << fmt9(c.y) << ',' << c.m << ',' << fmt9(c.crlb_rmse) << ','
       << fmt9(c.mle_rmse) << '\n';
  }
  return os.str();
}

inline std::vector<AccuracyCell> parse_accuracy_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "x,y,m,crlb_rmse_m,mle_rmse_m")
    throw std::invalid_argument("bad accuracy CSV header");
  std::vector<AccuracyCell> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) throw std::invalid_argument("bad accuracy CSV row: " + line);
    AccuracyCell c;
    c.x = parse_double(f[0]);
    c.y = parse_double(f[1]);
    c.m = std::stoi(f[2]);
    c.crlb_rmse = parse_double(f[3]);
    c.mle_rmse = parse_double(f[4]);
    rows.push_back(c);
  }
  return rows;
}

// CDF samples over the localizable population: one row per cell value
inline std::string cdf_csv(const AccuracyPoint& point) {
  std::ostringstream os;
  os << "kind,error_m,probability\n";
  auto emit = [&os](const char* kind, const std::vector<double>& sorted) {
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      os << kind << ',' << fmt9(sorted[i]) << ',' << fmt9((i + 1) / n) << '\n';
    }
  };
  emit("mle", point.cdf_mle);
  emit("crlb", point.cdf_crlb);
  return os.str();
}

// ---- sweep summaries -------------------------------------------------------

inline std::string sweep_csv(const std::vector<CoverageSweepRow>& rows) {
  std::ostringstream os;
  os << "placement,theta_rad,power_mw,mode,coverage_pct\n";
  for (const auto& r : rows) {
    os << to_string(r.key.placement) << ',' << fmt9(r.key.theta) << ',' << fmt9(r.key.power_mw)
       << ',' << to_string(r.key.mode) << ',' << fmt9(r.coverage_pct) << '\n';
  }
  return os.str();
}

inline std::vector<CoverageSweepRow> parse_sweep_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "placement,theta_rad,power_mw,mode,coverage_pct")
    throw std::invalid_argument("bad sweep CSV header");
  std::vector<CoverageSweepRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) throw std::invalid_argument("bad sweep CSV row: " + line);
    CoverageSweepRow r;
    r.key.placement = f[0] == "side"     ? Placement::side
                      : f[0] == "corner" ? Placement::corner
                                         : Placement::custom;
    r.key.theta = parse_double(f[1]);
    r.key.power_mw = parse_double(f[2]);
    r.key.mode = f[3] == "monostatic" ? Mode::monostatic : Mode::bistatic;
    r.coverage_pct = parse_double(f[4]);
    rows.push_back(r);
  }
  return rows;
}

// Sweep-point statistics; medians are blank until coverage reaches 50%.
inline std::string accuracy_sweep_csv(const std::vector<AccuracyPoint>& points) {
  std::ostringstream os;
  os << "placement,theta_rad,power_mw,mode,coverage_pct,median_crlb_rmse_m,median_mle_rmse_m\n";
  for (const auto& p : points) {
    os << to_string(p.key.placement) << ',' << fmt9(p.key.theta) << ',' << fmt9(p.key.power_mw)
       << ',' << to_string(p.key.mode) << ',' << fmt9(p.coverage_pct) << ','
       << (p.median_crlb_rmse ? fmt9(*p.median_crlb_rmse) : "") << ','
       << (p.median_mle_rmse ? fmt9(*p.median_mle_rmse) : "") << '\n';
  }
  return os.str();
}

inline nlohmann::ordered_json scenario_manifest_json(const Scenario& scenario,
                                                     const std::vector<std::string>& files,
                                                     const CalibrationResult* calibration = nullptr) {
  nlohmann::ordered_json j;
  j["content_hash"] = scenario.content_hash_hex();
  nlohmann::ordered_json sc;
  std::istringstream is(scenario.canonical_text());
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) sc[line.substr(0, eq)] = line.substr(eq + 1);
  }
  j["scenario"] = sc;
  if (calibration) {
    j["calibration"] = {{"link_product", calibration->product},
                        {"achieved_coverage_pct", calibration->achieved_pct}};
  }
  j["files"] = files;
  return j;
}

// ---- filesystem helpers ----------------------------------------------------

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace rfidloc
