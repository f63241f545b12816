#pragma once

#include <cmath>
#include <stdexcept>

#include "rfidloc/core.hpp"
#include "rfidloc/radio.hpp"

namespace rfidloc {

// Peak factor of the modeled patch-antenna radiation pattern.
inline constexpr double kPatchPeakFactor = 3.136;

// Free-space path gain (lambda / (4 pi d))^2.
inline double path_loss_linear(double distance_m, double lambda_m) {
  if (!(distance_m > 0.0))
    throw std::domain_error("path loss undefined: tag coincident with antenna");
  if (!(lambda_m > 0.0)) throw std::domain_error("wavelength must be positive");
  const double a = lambda_m / (4.0 * kPi * distance_m);
  return a * a;
}

// Differential reflection coefficient 4 pi sigma_rcs / (lambda^2 G_T^2).
inline double reflection_coefficient_sq(double sigma_rcs_m2, double lambda_m,
                                        double tag_gain) {
  if (sigma_rcs_m2 < 0.0) throw std::domain_error("radar cross section must be non-negative");
  if (!(lambda_m > 0.0)) throw std::domain_error("wavelength must be positive");
  if (!(tag_gain > 0.0)) throw std::domain_error("tag gain must be positive");
  return 4.0 * kPi * sigma_rcs_m2 / (lambda_m * lambda_m * tag_gain * tag_gain);
}

// Directional patch-antenna gain in its polar parametrization,
//   3.136 [tan(a) sin(pi/2 cos a) cos(pi/2 sin a sin phi)]^2.
// The tan*sin product tends to +-pi/2 as a -> +-pi/2; inside a narrow band
// around the poles it is replaced by that limit so the formula stays finite.
inline double patch_gain_polar(double alpha, double phi) {
  const double pole_gap = kPi / 2.0 - std::abs(alpha);
  double elev;
  if (std::abs(pole_gap) < 1e-6) {
    elev = kPi / 2.0;
  } else {
    elev = std::tan(alpha) * std::sin(0.5 * kPi * std::cos(alpha));
  }
  const double az = std::cos(0.5 * kPi * std::sin(alpha) * std::sin(phi));
  const double amp = elev * az;
  return kPatchPeakFactor * amp * amp;
}

namespace detail {

// sin(pi/2 c)/c, continuous through c = 0 where it tends to pi/2
inline double halfpi_sinc(double c) {
  constexpr double k = kPi / 2.0;
  if (std::abs(c) < 1e-6) {
    return k - k * k * k * c * c / 6.0;
  }
  return std::sin(k * c) / c;
}

// derivative of halfpi_sinc
inline double halfpi_sinc_deriv(double c) {
  constexpr double k = kPi / 2.0;
  if (std::abs(c) < 1e-4) {
    return -k * k * k * c / 3.0 + k * k * k * k * k * c * c * c / 30.0;
  }
  return (k * c * std::cos(k * c) - std::sin(k * c)) / (c * c);
}

}  // namespace detail

// Cartesian view of the pattern angles for one antenna/tag pairing. All
// members are ratio-space quantities; no inverse trigonometry involved.
struct PatchGeometry {
  double dist = 0.0;       // 3D antenna-tag distance
  double horiz = 0.0;      // horizontal projection of that distance
  double drop = 0.0;       // antenna height minus tag height
  double sin_alpha = 0.0;  // pattern elevation angle alpha, as sin/cos pair
  double cos_alpha = 0.0;
  double sin_rel_az = 0.0;  // sine of the bearing angle off boresight
};

inline PatchGeometry patch_geometry(const ReaderAntenna& antenna, const Position3D& tag) {
  PatchGeometry g;
  const double px = tag.x - antenna.position.x;
  const double py = tag.y - antenna.position.y;
  g.drop = antenna.position.z - tag.z;
  g.horiz = std::hypot(px, py);
  g.dist = std::sqrt(px * px + py * py + g.drop * g.drop);
  if (!(g.dist > 0.0))
    throw std::domain_error("tag coincident with antenna");
  const double st = std::sin(antenna.elevation);
  const double ct = std::cos(antenna.elevation);
  g.sin_alpha = (g.horiz * st - g.drop * ct) / g.dist;
  g.cos_alpha = (g.horiz * ct + g.drop * st) / g.dist;
  if (g.horiz > 0.0) {
    // sin of (boresight azimuth - antenna-to-tag bearing)
    g.sin_rel_az = (std::sin(antenna.azimuth) * px - std::cos(antenna.azimuth) * py) / g.horiz;
  } else {
    g.sin_rel_az = std::numeric_limits<double>::quiet_NaN();
  }
  return g;
}

namespace detail {

inline double patch_gain_from_geometry(const PatchGeometry& g) {
  const double u = g.sin_alpha * halfpi_sinc(g.cos_alpha);
  const double v = std::cos(0.5 * kPi * g.sin_alpha * g.sin_rel_az);
  const double amp = u * v;
  return kPatchPeakFactor * amp * amp;
}

}  // namespace detail

// Pattern gain evaluated directly from Cartesian coordinates. Stays in ratio
// space throughout, so it is an independent route to the polar form.
inline double patch_gain_cartesian(const ReaderAntenna& antenna, const Position3D& tag) {
  const PatchGeometry g = patch_geometry(antenna, tag);
  if (!(g.horiz > 0.0))
    throw std::domain_error("singular geometry: tag on the antenna vertical axis");
  return detail::patch_gain_from_geometry(g);
}

// Gain used by the link budget. Identical to patch_gain_cartesian except that
// the vertical-axis singularity (horiz = 0, azimuth undefined) is resolved by
// the polar form at alpha = elevation -/+ pi/2 with the azimuth factor taken
// at its most-tapered limit (sin of relative azimuth = 1).
inline double antenna_gain(const ReaderAntenna& antenna, const Position3D& tag) {
  const PatchGeometry g = patch_geometry(antenna, tag);
  if (!(g.horiz > 0.0)) {
    const double alpha = antenna.elevation - std::copysign(kPi / 2.0, g.drop);
    return patch_gain_polar(alpha, kPi / 2.0);
  }
  return detail::patch_gain_from_geometry(g);
}

// Forward (power-up) link RSS at the tag, in dBm:
//   10 log10(rho_L P_Tx G_T G_R L(d) |h|^2), P_Tx in mW.
// Returns the no-signal sentinel when the pattern gain is zero.
inline double forward_rss_dbm(const RadioParams& params, const ReaderAntenna& antenna,
                              const Position3D& tag) {
  const double g = antenna_gain(antenna, tag);
  if (!(g > 0.0)) return kNoSignalDbm;
  const double d = distance(antenna.position, tag);
  const double pl = path_loss_linear(d, params.wavelength());
  return 10.0 * std::log10(params.polarization_loss * params.tx_power_mw() * params.tag_gain *
                           g * pl * params.channel_gain_sq);
}

// Round-trip backscatter RSS for a transmit/receive antenna pair, in dBm.
// Five-term sum: constant link factors, the two reader gains, the two path
// losses. Grouped so that swapping tx and rx reproduces the value exactly.
inline double bistatic_rss_dbm(const RadioParams& params, const ReaderAntenna& tx,
                               const ReaderAntenna& rx, const Position3D& tag) {
  const double gi = antenna_gain(tx, tag);
  const double gj = antenna_gain(rx, tag);
  if (!(gi > 0.0) || !(gj > 0.0)) return kNoSignalDbm;
  const double lambda = params.wavelength();
  const double li = path_loss_linear(distance(tx.position, tag), lambda);
  const double lj = path_loss_linear(distance(rx.position, tag), lambda);
  const double h4 = params.channel_gain_sq * params.channel_gain_sq;
  const double constant = 10.0 * std::log10(params.modulation_efficiency *
                                            params.power_transfer_efficiency *
                                            params.polarization_loss * params.tx_power_mw() *
                                            params.tag_gain * params.tag_gain * h4 *
                                            params.reflection_coeff_sq);
  const double gain_terms = 10.0 * std::log10(gi) + 10.0 * std::log10(gj);
  const double loss_terms = 10.0 * std::log10(li) + 10.0 * std::log10(lj);
  return constant + gain_terms + loss_terms;
}

// Monostatic round trip is the bistatic diagonal, bit for bit.
inline double monostatic_rss_dbm(const RadioParams& params, const ReaderAntenna& antenna,
                                 const Position3D& tag) {
  return bistatic_rss_dbm(params, antenna, antenna, tag);
}

}  // namespace rfidloc
