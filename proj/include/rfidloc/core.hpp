#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rfidloc {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = std::numbers::pi;

// Sentinel for links with no signal (pattern null, dark geometry).
inline constexpr double kNoSignalDbm = -std::numeric_limits<double>::infinity();

inline bool is_no_signal(double rss_dbm) { return !(rss_dbm > kNoSignalDbm); }

inline double dbm_from_mw(double mw) { return 10.0 * std::log10(mw); }
inline double mw_from_dbm(double dbm) { return std::pow(10.0, dbm / 10.0); }

struct Position3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline double distance(const Position3D& a, const Position3D& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Wall-mounted reader antenna. `elevation` is the tilt from the azimuth plane,
// `azimuth` the bearing of the boresight direction measured from +x.
struct ReaderAntenna {
  int id = 0;
  Position3D position;
  double elevation = kPi / 4;
  double azimuth = 0.0;
};

enum class Mode { monostatic, bistatic };

inline std::string to_string(Mode m) {
  return m == Mode::monostatic ? "monostatic" : "bistatic";
}

// Rectangular tag grid sampled at cell centers, all tags at a known height.
struct GridSpec {
  double x_min = 0.0;
  double x_max = 8.0;
  double y_min = 0.0;
  double y_max = 8.0;
  double step = 0.1;
  double tag_height = 1.0;

  // ceil with a tolerance so spans that are exact multiples of the step do not
  // gain a cell from floating-point noise
  static int cells_along(double span, double step) {
    return static_cast<int>(std::ceil(span / step - 1e-9));
  }

  int nx() const { return cells_along(x_max - x_min, step); }
  int ny() const { return cells_along(y_max - y_min, step); }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(nx()) * static_cast<std::size_t>(ny());
  }

  double x_at(int ix) const { return x_min + (ix + 0.5) * step; }
  double y_at(int iy) const { return y_min + (iy + 0.5) * step; }

  // y-major linear index: ascending index walks lowest y first, then lowest x
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx()) + ix;
  }
  int ix_of(std::size_t k) const { return static_cast<int>(k % nx()); }
  int iy_of(std::size_t k) const { return static_cast<int>(k / nx()); }

  Position3D cell_center(std::size_t k) const {
    return {x_at(ix_of(k)), y_at(iy_of(k)), tag_height};
  }

  void validate() const {
    if (!(step > 0.0)) throw std::domain_error("grid step must be positive");
    if (!(x_max > x_min) || !(y_max > y_min))
      throw std::domain_error("grid bounds are degenerate");
    if (!std::isfinite(tag_height)) throw std::domain_error("tag height must be finite");
  }
};

// Fixed-significant-digit rendering. Infinities and NaN render as inf/-inf/nan.
inline std::string format_double(double v, int significant_digits) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, v);
  return buf;
}

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace rfidloc
