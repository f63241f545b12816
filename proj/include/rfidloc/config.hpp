#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfidloc/io.hpp"
#include "rfidloc/scenario.hpp"

namespace rfidloc {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "pi", "pi/4", "pi4" or a plain radian value
inline double parse_angle(const std::string& token) {
  if (token == "pi") return kPi;
  if (token.rfind("pi/", 0) == 0 || (token.rfind("pi", 0) == 0 && token.size() > 2)) {
    const std::string den = token[2] == '/' ? token.substr(3) : token.substr(2);
    std::size_t used = 0;
    const double n = std::stod(den, &used);
    if (used != den.size() || n == 0.0) throw std::invalid_argument("bad angle '" + token + "'");
    return kPi / n;
  }
  return parse_double(token);
}

// Flat sectioned key=value file with '#' comments. Every key must be
// consumed; leftovers are reported with their line numbers.
class Config {
 public:
  struct Entry {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;
    mutable bool used = false;
  };

  static Config parse(const std::string& text, const std::string& name) {
    Config cfg;
    cfg.name_ = name;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError(cfg.where(lineno) + "unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) throw ConfigError(cfg.where(lineno) + "empty section name");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(cfg.where(lineno) + "expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError(cfg.where(lineno) + "empty key");
      if (section.empty())
        throw ConfigError(cfg.where(lineno) + "key '" + key + "' outside any section");
      for (const auto& e : cfg.entries_) {
        if (e.section == section && e.key == key)
          throw ConfigError(cfg.where(lineno) + "duplicate key '" + key + "' in section [" +
                            section + "] (first at line " + std::to_string(e.line) + ")");
      }
      cfg.entries_.push_back({section, key, value, lineno});
    }
    return cfg;
  }

  static Config load(const std::filesystem::path& path) {
    return parse(read_text_file(path), path.string());
  }

  bool has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
  }

  std::optional<std::string> get_string(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    e->used = true;
    return e->value;
  }

  std::optional<double> get_double(const std::string& section, const std::string& key) const {
    const auto s = get_string(section, key);
    if (!s) return std::nullopt;
    try {
      return parse_double(*s);
    } catch (const std::exception&) {
      throw ConfigError(where(line_of(section, key)) + "bad number '" + *s + "' for " + key);
    }
  }

  std::optional<double> get_angle(const std::string& section, const std::string& key) const {
    const auto s = get_string(section, key);
    if (!s) return std::nullopt;
    try {
      return parse_angle(*s);
    } catch (const std::exception&) {
      throw ConfigError(where(line_of(section, key)) + "bad angle '" + *s + "' for " + key);
    }
  }

  std::optional<std::uint64_t> get_uint64(const std::string& section, const std::string& key) const {
    const auto s = get_string(section, key);
    if (!s) return std::nullopt;
    try {
      std::size_t used = 0;
      const auto v = std::stoull(*s, &used);
      if (used != s->size()) throw std::invalid_argument(*s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(where(line_of(section, key)) + "bad integer '" + *s + "' for " + key);
    }
  }

  std::optional<int> get_int(const std::string& section, const std::string& key) const {
    const auto v = get_uint64(section, key);
    if (!v) return std::nullopt;
    return static_cast<int>(*v);
  }

  std::optional<bool> get_bool(const std::string& section, const std::string& key) const {
    const auto s = get_string(section, key);
    if (!s) return std::nullopt;
    if (*s == "true" || *s == "1") return true;
    if (*s == "false" || *s == "0") return false;
    throw ConfigError(where(line_of(section, key)) + "bad boolean '" + *s + "' for " + key);
  }

  std::optional<std::vector<std::string>> get_list(const std::string& section,
                                                   const std::string& key) const {
    const auto s = get_string(section, key);
    if (!s) return std::nullopt;
    std::vector<std::string> out;
    std::string cur;
    for (char ch : *s) {
      if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
        if (!cur.empty()) out.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    if (!cur.empty()) out.push_back(cur);
    if (out.empty())
      throw ConfigError(where(line_of(section, key)) + "empty list for " + key);
    return out;
  }

  // every key must have been consumed by now
  void fail_on_unused() const {
    for (const auto& e : entries_) {
      if (!e.used)
        throw ConfigError(where(e.line) + "unknown key '" + e.key + "' in section [" +
                          e.section + "]");
    }
  }

 private:
  static std::string trim(const std::string& s) {
    auto b = s.begin();
    auto e = s.end();
    while (b != e && std::isspace(static_cast<unsigned char>(*b))) ++b;
    while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
    return std::string(b, e);
  }

  const Entry* find(const std::string& section, const std::string& key) const {
    for (const auto& e : entries_) {
      if (e.section == section && e.key == key) return &e;
    }
    return nullptr;
  }

  int line_of(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    return e ? e->line : 0;
  }

  std::string where(int line) const { return name_ + ":" + std::to_string(line) + ": "; }

  std::string name_;
  std::vector<Entry> entries_;
};

inline Placement parse_placement(const std::string& s) {
  if (s == "side") return Placement::side;
  if (s == "corner") return Placement::corner;
  if (s == "custom") return Placement::custom;
  throw ConfigError("unknown placement '" + s + "' (side, corner or custom)");
}

inline Mode parse_mode(const std::string& s) {
  if (s == "monostatic") return Mode::monostatic;
  if (s == "bistatic") return Mode::bistatic;
  throw ConfigError("unknown mode '" + s + "' (monostatic or bistatic)");
}

// Builds the configured scenario; standard system parameters fill anything
// the file does not set.
inline Scenario scenario_from_config(const Config& cfg) {
  const Placement placement =
      parse_placement(cfg.get_string("placement", "style").value_or("corner"));
  const double theta = cfg.get_angle("placement", "elevation").value_or(kPi / 4);
  const double power_mw = cfg.get_double("radio", "tx_power_mw").value_or(1000.0);

  ScenarioOverrides ov;
  ov.allow_any_power = cfg.get_bool("radio", "allow_any_power").value_or(false);
  ov.antenna_height = cfg.get_double("placement", "antenna_height");
  ov.reader_sensitivity_dbm = cfg.get_double("radio", "reader_sensitivity_dbm");
  ov.tag_sensitivity_dbm = cfg.get_double("radio", "tag_sensitivity_dbm");
  ov.link_product = cfg.get_double("radio", "link_product");
  ov.grid_step = cfg.get_double("grid", "step");
  ov.tag_height = cfg.get_double("grid", "tag_height");
  ov.room_width = cfg.get_double("grid", "x_max");
  ov.room_length = cfg.get_double("grid", "y_max");
  ov.noise_sigma_db = cfg.get_double("noise", "sigma_db");
  ov.mle_grid_step = cfg.get_double("estimation", "grid_step");
  ov.accuracy_subgrid_step = cfg.get_double("estimation", "subgrid_step");
  ov.trials_per_cell = cfg.get_int("estimation", "trials");
  ov.seed = cfg.get_uint64("sim", "seed");

  Scenario s;
  if (placement == Placement::custom) {
    s = build_scenario(Placement::corner, theta, power_mw, Mode::bistatic, ov);
    s.placement = Placement::custom;
    s.antennas.clear();
    for (int i = 1;; ++i) {
      const auto spec = cfg.get_list("placement", "antenna" + std::to_string(i));
      if (!spec) break;
      if (spec->size() != 5)
        throw ConfigError("antenna" + std::to_string(i) +
                          " needs 5 values: x y z elevation azimuth");
      try {
        ReaderAntenna a;
        a.id = i;
        a.position = {parse_double((*spec)[0]), parse_double((*spec)[1]),
                      parse_double((*spec)[2])};
        a.elevation = parse_angle((*spec)[3]);
        a.azimuth = parse_angle((*spec)[4]);
        s.antennas.push_back(a);
      } catch (const std::invalid_argument& err) {
        throw ConfigError("antenna" + std::to_string(i) + ": " + err.what());
      }
    }
    if (s.antennas.empty())
      throw ConfigError("custom placement needs antenna1..antennaN in [placement]");
  } else {
    s = build_scenario(placement, theta, power_mw, Mode::bistatic, ov);
  }
  if (const auto m = cfg.get_string("sim", "mode")) s.mode = parse_mode(*m);
  if (const auto f = cfg.get_double("radio", "frequency_hz")) s.radio.frequency_hz = *f;
  if (const auto v = cfg.get_double("radio", "modulation_efficiency"))
    s.radio.modulation_efficiency = *v;
  if (const auto v = cfg.get_double("radio", "power_transfer_efficiency"))
    s.radio.power_transfer_efficiency = *v;
  if (const auto v = cfg.get_double("radio", "polarization_loss")) s.radio.polarization_loss = *v;
  if (const auto v = cfg.get_double("radio", "tag_gain_dbi"))
    s.radio.tag_gain = std::pow(10.0, *v / 10.0);
  if (const auto v = cfg.get_double("radio", "reflection_coeff_sq"))
    s.radio.reflection_coeff_sq = *v;
  if (const auto v = cfg.get_double("radio", "channel_gain_sq")) s.radio.channel_gain_sq = *v;
  if (const auto v = cfg.get_bool("radio", "allow_eirp_above_limit"))
    s.radio.allow_eirp_above_limit = *v;
  if (const auto v = cfg.get_double("grid", "x_min")) s.room.x_min = *v;
  if (const auto v = cfg.get_double("grid", "y_min")) s.room.y_min = *v;
  return s;
}

struct SweepConfig {
  std::string kind = "coverage";  // coverage | accuracy
  std::vector<Placement> placements;
  std::vector<double> thetas;
  std::vector<double> powers_mw;
  std::vector<Mode> modes;
};

inline SweepConfig sweep_from_config(const Config& cfg) {
  SweepConfig sw;
  sw.kind = cfg.get_string("sweep", "kind").value_or("coverage");
  if (sw.kind != "coverage" && sw.kind != "accuracy")
    throw ConfigError("sweep kind must be coverage or accuracy, got '" + sw.kind + "'");
  for (const auto& p : cfg.get_list("sweep", "placements").value_or(
           std::vector<std::string>{"corner", "side"}))
    sw.placements.push_back(parse_placement(p));
  for (const auto& t :
       cfg.get_list("sweep", "thetas").value_or(std::vector<std::string>{"pi4", "pi3", "pi2"}))
    sw.thetas.push_back(parse_angle(t));
  for (const auto& p : cfg.get_list("sweep", "powers_mw")
                           .value_or(std::vector<std::string>{"1000", "1500", "2000", "2500",
                                                              "3000"}))
    sw.powers_mw.push_back(parse_double(p));
  for (const auto& m : cfg.get_list("sweep", "modes").value_or(
           std::vector<std::string>{"monostatic", "bistatic"}))
    sw.modes.push_back(parse_mode(m));
  return sw;
}

}  // namespace rfidloc
