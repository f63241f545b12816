#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "rfidloc/core.hpp"

namespace rfidloc {

// EIRP cap for UHF RFID readers (2 W ERP).
inline constexpr double kEirpLimitDbm = 35.15;

// Link-budget constants of the passive UHF RFID system. Gains and efficiency
// factors are linear; powers and sensitivities are dBm.
struct RadioParams {
  double frequency_hz = 865.7e6;
  double tx_power_dbm = 30.0;              // EIRP
  double modulation_efficiency = 0.5;      // tau
  double power_transfer_efficiency = 0.8;  // mu_T
  double polarization_loss = 0.5;          // rho_L
  double tag_gain = 1.0;                   // G_T, linear (0 dBi)
  double reflection_coeff_sq = 0.5;        // |Gamma|^2
  double channel_gain_sq = 1.0;            // |h_i|^2, one value per link
  double reader_sensitivity_dbm = -75.0;
  double tag_sensitivity_dbm = -20.0;
  bool allow_eirp_above_limit = false;

  double wavelength() const { return kSpeedOfLight / frequency_hz; }
  double tx_power_mw() const { return mw_from_dbm(tx_power_dbm); }
  void set_tx_power_mw(double mw) { tx_power_dbm = dbm_from_mw(mw); }

  // mu_T * |Gamma|^2; the only way the two factors enter the link budget
  double link_product() const { return power_transfer_efficiency * reflection_coeff_sq; }
  void set_link_product(double product) {
    if (!(product > 0.0) || product > 1.0)
      throw std::domain_error("link product must lie in (0, 1]");
    power_transfer_efficiency = std::sqrt(product);
    reflection_coeff_sq = std::sqrt(product);
  }

  void validate() const {
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!(frequency_hz > 0.0)) throw std::domain_error("frequency must be positive");
    if (!(modulation_efficiency > 0.0) || modulation_efficiency > 1.0)
      throw std::domain_error("modulation efficiency must lie in (0, 1]");
    if (!in_unit(power_transfer_efficiency))
      throw std::domain_error("power transfer efficiency must lie in [0, 1]");
    if (!(polarization_loss > 0.0) || polarization_loss > 1.0)
      throw std::domain_error("polarization loss factor must lie in (0, 1]");
    if (!(tag_gain > 0.0)) throw std::domain_error("tag gain must be positive");
    if (!in_unit(reflection_coeff_sq))
      throw std::domain_error("reflection coefficient must lie in [0, 1]");
    if (!(channel_gain_sq >= 0.0)) throw std::domain_error("channel gain must be non-negative");
    if (tx_power_dbm > kEirpLimitDbm && !allow_eirp_above_limit)
      throw std::domain_error("tx power " + std::to_string(tx_power_dbm) +
                              " dBm exceeds the EIRP limit " + std::to_string(kEirpLimitDbm) +
                              " dBm (set the override to allow)");
  }
};

}  // namespace rfidloc
