#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfidloc/core.hpp"
#include "rfidloc/radio.hpp"

namespace rfidloc {

enum class Placement { side, corner, custom };

inline std::string to_string(Placement p) {
  switch (p) {
    case Placement::side: return "side";
    case Placement::corner: return "corner";
    default: return "custom";
  }
}

// Four antennas at the wall midpoints, boresight perpendicular to the wall.
inline std::vector<ReaderAntenna> side_antennas(double elevation, double height,
                                                double width, double length) {
  return {
      {1, {width / 2, 0.0, height}, elevation, kPi / 2},
      {2, {width, length / 2, height}, elevation, kPi},
      {3, {width / 2, length, height}, elevation, -kPi / 2},
      {4, {0.0, length / 2, height}, elevation, 0.0},
  };
}

// Four antennas at the room corners, boresight along the diagonal.
inline std::vector<ReaderAntenna> corner_antennas(double elevation, double height,
                                                  double width, double length) {
  return {
      {1, {0.0, 0.0, height}, elevation, kPi / 4},
      {2, {width, 0.0, height}, elevation, 3 * kPi / 4},
      {3, {width, length, height}, elevation, -3 * kPi / 4},
      {4, {0.0, length, height}, elevation, -kPi / 4},
  };
}

struct Scenario {
  GridSpec room;
  std::vector<ReaderAntenna> antennas;
  Placement placement = Placement::custom;
  Mode mode = Mode::bistatic;
  RadioParams radio;
  double noise_sigma_db = 2.0;
  double mle_grid_step = 0.05;
  double accuracy_subgrid_step = 0.5;
  int trials_per_cell = 100;
  std::uint64_t seed = 0;

  // Throws on hard violations; soft issues (elevations outside the studied
  // range, duplicate-free ids enforced hard) go to `warnings` when non-null.
  void validate(std::vector<std::string>* warnings = nullptr) const {
    room.validate();
    radio.validate();
    if (antennas.empty()) throw std::domain_error("scenario needs at least one antenna");
    for (std::size_t i = 0; i < antennas.size(); ++i) {
      for (std::size_t j = i + 1; j < antennas.size(); ++j) {
        if (antennas[i].id == antennas[j].id)
          throw std::domain_error("duplicate antenna id " + std::to_string(antennas[i].id));
      }
      const double th = antennas[i].elevation;
      if (warnings && (th < kPi / 4 - 1e-12 || th > kPi / 2 + 1e-12)) {
        warnings->push_back("antenna " + std::to_string(antennas[i].id) +
                            " elevation outside the studied [pi/4, pi/2] range");
      }
    }
    if (!(noise_sigma_db >= 0.0)) throw std::domain_error("noise sigma must be non-negative");
    if (!(mle_grid_step > 0.0)) throw std::domain_error("estimation grid step must be positive");
    if (trials_per_cell < 1) throw std::domain_error("trials per cell must be at least 1");
  }

  // Deterministic key=value rendering; the basis of the content hash
  std::string canonical_text() const {
    std::ostringstream os;
    auto put = [&os](const char* key, double v) {
      os << key << '=' << format_double(v, 17) << '\n';
    };
    os << "placement=" << to_string(placement) << '\n';
    os << "mode=" << to_string(mode) << '\n';
    put("room.x_min", room.x_min);
    put("room.x_max", room.x_max);
    put("room.y_min", room.y_min);
    put("room.y_max", room.y_max);
    put("room.step", room.step);
    put("room.tag_height", room.tag_height);
    for (const auto& a : antennas) {
      os << "antenna." << a.id << '=' << format_double(a.position.x, 17) << ','
         << format_double(a.position.y, 17) << ',' << format_double(a.position.z, 17) << ','
         << format_double(a.elevation, 17) << ',' << format_double(a.azimuth, 17) << '\n';
    }
    put("radio.frequency_hz", radio.frequency_hz);
    put("radio.tx_power_dbm", radio.tx_power_dbm);
    put("radio.modulation_efficiency", radio.modulation_efficiency);
    put("radio.power_transfer_efficiency", radio.power_transfer_efficiency);
    put("radio.polarization_loss", radio.polarization_loss);
    put("radio.tag_gain", radio.tag_gain);
    put("radio.reflection_coeff_sq", radio.reflection_coeff_sq);
    put("radio.channel_gain_sq", radio.channel_gain_sq);
    put("radio.reader_sensitivity_dbm", radio.reader_sensitivity_dbm);
    put("radio.tag_sensitivity_dbm", radio.tag_sensitivity_dbm);
    put("noise_sigma_db", noise_sigma_db);
    put("mle_grid_step", mle_grid_step);
    put("accuracy_subgrid_step", accuracy_subgrid_step);
    os << "trials_per_cell=" << trials_per_cell << '\n';
    os << "seed=" << seed << '\n';
    return os.str();
  }

  std::uint64_t content_hash() const { return fnv1a64(canonical_text()); }
  std::string content_hash_hex() const { return hex16(content_hash()); }
};

struct ScenarioOverrides {
  std::optional<double> reader_sensitivity_dbm;
  std::optional<double> tag_sensitivity_dbm;
  std::optional<double> grid_step;
  std::optional<double> noise_sigma_db;
  std::optional<double> mle_grid_step;
  std::optional<double> accuracy_subgrid_step;
  std::optional<int> trials_per_cell;
  std::optional<std::uint64_t> seed;
  std::optional<double> antenna_height;
  std::optional<double> tag_height;
  std::optional<double> room_width;
  std::optional<double> room_length;
  std::optional<double> link_product;
  bool allow_any_power = false;
};

// Scenario with the standard system parameters: 865.7 MHz, tau = 0.5,
// rho_L = 0.5, 0 dBi tag, -75 dBm reader / -20 dBm tag sensitivity, antennas
// at 2 m, tags at 1 m, 8 m x 8 m room, 10 cm coverage grid.
inline Scenario build_scenario(Placement placement, double elevation, double power_mw,
                               Mode mode, const ScenarioOverrides& ov = {}) {
  if ((power_mw < 1000.0 || power_mw > 3000.0) && !ov.allow_any_power)
    throw std::domain_error("tx power outside the studied 1000-3000 mW range "
                            "(override to allow)");
  Scenario s;
  s.placement = placement;
  s.mode = mode;
  s.room.x_min = 0.0;
  s.room.x_max = ov.room_width.value_or(8.0);
  s.room.y_min = 0.0;
  s.room.y_max = ov.room_length.value_or(8.0);
  s.room.step = ov.grid_step.value_or(0.1);
  s.room.tag_height = ov.tag_height.value_or(1.0);
  const double height = ov.antenna_height.value_or(2.0);
  switch (placement) {
    case Placement::side:
      s.antennas = side_antennas(elevation, height, s.room.x_max, s.room.y_max);
      break;
    case Placement::corner:
      s.antennas = corner_antennas(elevation, height, s.room.x_max, s.room.y_max);
      break;
    case Placement::custom:
      throw std::domain_error("custom placement requires explicit antennas");
  }
  s.radio.set_tx_power_mw(power_mw);
  if (ov.reader_sensitivity_dbm) s.radio.reader_sensitivity_dbm = *ov.reader_sensitivity_dbm;
  if (ov.tag_sensitivity_dbm) s.radio.tag_sensitivity_dbm = *ov.tag_sensitivity_dbm;
  if (ov.link_product) s.radio.set_link_product(*ov.link_product);
  if (ov.noise_sigma_db) s.noise_sigma_db = *ov.noise_sigma_db;
  if (ov.mle_grid_step) s.mle_grid_step = *ov.mle_grid_step;
  if (ov.accuracy_subgrid_step) s.accuracy_subgrid_step = *ov.accuracy_subgrid_step;
  if (ov.trials_per_cell) s.trials_per_cell = *ov.trials_per_cell;
  if (ov.seed) s.seed = *ov.seed;
  return s;
}

}  // namespace rfidloc
