#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "rfidloc/coverage.hpp"
#include "rfidloc/parallel.hpp"
#include "rfidloc/rng.hpp"

namespace rfidloc {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Measurement {
  AntennaPair pair;
  double rss_dbm = 0.0;
};

// One simulated interrogation of a tag: noisy round-trip RSS for every pair
// that covers the true position. The true position is retained for scoring
// only; estimators never read it.
struct MeasurementSet {
  std::vector<Measurement> entries;
  double noise_sigma_db = 0.0;
  Position3D true_position;
};

// Gaussian dB noise on every covered pair, deterministic in the seed. Draws
// consume the engine in pair order, so equal seeds give equal sets.
inline MeasurementSet simulate_measurements(const Scenario& scenario, const Position3D& tag,
                                            std::uint64_t rng_seed) {
  MeasurementSet set;
  set.noise_sigma_db = scenario.noise_sigma_db;
  set.true_position = tag;
  std::mt19937_64 engine(rng_seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (const auto& p :
       pairs_for_mode(static_cast<int>(scenario.antennas.size()), scenario.mode)) {
    const auto& tx = scenario.antennas[p.tx];
    const auto& rx = scenario.antennas[p.rx];
    if (!pair_coverage(scenario.radio, tx, rx, tag)) continue;
    const double rss = bistatic_rss_dbm(scenario.radio, tx, rx, tag);
    set.entries.push_back({p, rss + scenario.noise_sigma_db * unit(engine)});
  }
  return set;
}

// How candidate cells account for measured pairs they cannot see:
// sensitivity_floor scores such pairs against a prediction clamped at the
// reader sensitivity; drop reproduces the bare gated sum.
enum class MismatchPenalty { sensitivity_floor, drop };

// Log-likelihood of the measurement set at a candidate position. Pairs
// covered at the candidate contribute Gaussian residuals; pairs measured but
// not covered there contribute per the penalty policy.
inline double log_likelihood(const Scenario& scenario, const Position3D& candidate,
                             const MeasurementSet& meas,
                             MismatchPenalty penalty = MismatchPenalty::sensitivity_floor) {
  if (meas.entries.empty()) throw std::domain_error("likelihood of an empty measurement set");
  const double sigma = meas.noise_sigma_db;
  if (!(sigma > 0.0)) throw std::domain_error("likelihood requires positive noise sigma");
  double quad = 0.0;
  for (const auto& entry : meas.entries) {
    const auto& tx = scenario.antennas[entry.pair.tx];
    const auto& rx = scenario.antennas[entry.pair.rx];
    if (pair_coverage(scenario.radio, tx, rx, candidate)) {
      const double resid = bistatic_rss_dbm(scenario.radio, tx, rx, candidate) - entry.rss_dbm;
      quad += resid * resid;
    } else if (penalty == MismatchPenalty::sensitivity_floor) {
      const double resid = scenario.radio.reader_sensitivity_dbm - entry.rss_dbm;
      quad += resid * resid;
    }
  }
  const double m = static_cast<double>(meas.entries.size());
  return -quad / (2.0 * sigma * sigma) - 0.5 * m * std::log(2.0 * kPi * sigma * sigma);
}

namespace detail {

// d ln G / d(tag x, tag y) for one antenna, ratio-space route. Empty when the
// gain is zero or the geometry is singular (vertical axis).
inline std::optional<Vec2> log_gain_gradient_general(const ReaderAntenna& antenna,
                                                     const Position3D& tag) {
  const double px = tag.x - antenna.position.x;
  const double py = tag.y - antenna.position.y;
  const double H = antenna.position.z - tag.z;
  const double l = std::hypot(px, py);
  const double d = std::sqrt(px * px + py * py + H * H);
  if (!(l > 0.0) || !(d > 0.0)) return std::nullopt;
  const double st = std::sin(antenna.elevation);
  const double ct = std::cos(antenna.elevation);
  const double S = (l * st - H * ct) / d;
  const double C = (l * ct + H * st) / d;
  const double q = (std::sin(antenna.azimuth) * px - std::cos(antenna.azimuth) * py) / l;
  const double f = halfpi_sinc(C);
  const double fp = halfpi_sinc_deriv(C);
  const double u = S * f;
  constexpr double k = kPi / 2.0;
  const double v = std::cos(k * S * q);
  if (u == 0.0 || v == 0.0) return std::nullopt;
  const double sv = std::sin(k * S * q);
  Vec2 grad;
  const double dldt[2] = {px / l, py / l};
  const double dddt[2] = {px / d, py / d};
  const double dqdt[2] = {(std::sin(antenna.azimuth) - q * dldt[0]) / l,
                          (-std::cos(antenna.azimuth) - q * dldt[1]) / l};
  double* out[2] = {&grad.x, &grad.y};
  for (int t = 0; t < 2; ++t) {
    const double dS = (st * dldt[t] - S * dddt[t]) / d;
    const double dC = (ct * dldt[t] - C * dddt[t]) / d;
    const double du = dS * f + S * fp * dC;
    const double dv = -k * sv * (dS * q + S * dqdt[t]);
    *out[t] = 2.0 * du / u + 2.0 * dv / v;
  }
  return grad;
}

// Closed-form specialization for elevation pi/4 with boresight along +x,
// written through the half-angle arguments
//   A = sqrt(2) pi (l + H) / (4 d),   B = sqrt(2) pi (l - H) / (4 d) * q
// so that ln G = const + 2 ln|SA| - 2 ln|A| + 2 ln|sin A| + 2 ln|cos B|,
// with SA = sqrt(2) pi (l - H) / (4 d).
inline std::optional<Vec2> log_gain_gradient_tilt45(const ReaderAntenna& antenna,
                                                    const Position3D& tag) {
  const double px = tag.x - antenna.position.x;
  const double py = tag.y - antenna.position.y;
  const double H = antenna.position.z - tag.z;
  const double l = std::hypot(px, py);
  const double d = std::sqrt(px * px + py * py + H * H);
  if (!(l > 0.0) || !(d > 0.0)) return std::nullopt;
  const double c45 = kPi / (2.0 * std::numbers::sqrt2);  // sqrt(2) pi / 4
  const double A = c45 * (l + H) / d;
  const double SA = c45 * (l - H) / d;
  const double q = -py / l;  // boresight along +x
  const double B = SA * q;
  const double sinA = std::sin(A);
  const double cosB = std::cos(B);
  if (A == 0.0 || SA == 0.0 || sinA == 0.0 || cosB == 0.0) return std::nullopt;
  const double cotA = std::cos(A) / sinA;
  const double tanB = std::sin(B) / cosB;
  const double dqdt[2] = {py * px / (l * l * l), -px * px / (l * l * l)};
  const double pt[2] = {px, py};
  Vec2 grad;
  double* out[2] = {&grad.x, &grad.y};
  for (int t = 0; t < 2; ++t) {
    const double dA = c45 * pt[t] * (1.0 / (l * d) - (l + H) / (d * d * d));
    const double dSA = c45 * pt[t] * (1.0 / (l * d) - (l - H) / (d * d * d));
    const double dB = dSA * q + SA * dqdt[t];
    *out[t] = 2.0 * dSA / SA - 2.0 * dA / A + 2.0 * cotA * dA - 2.0 * tanB * dB;
  }
  return grad;
}

inline bool tilt45_applies(const ReaderAntenna& antenna) {
  return antenna.elevation == kPi / 4 && antenna.azimuth == 0.0;
}

inline std::optional<Vec2> log_gain_gradient(const ReaderAntenna& antenna,
                                             const Position3D& tag) {
  if (tilt45_applies(antenna)) return log_gain_gradient_tilt45(antenna, tag);
  return log_gain_gradient_general(antenna, tag);
}

}  // namespace detail

// Central finite difference of the round-trip RSS, the oracle for the
// analytic path. Throws if any stencil point loses signal.
inline Vec2 rss_jacobian_fd(const Scenario& scenario, const AntennaPair& pair,
                            const Position3D& tag, double step = 1e-4) {
  if (!(step > 0.0)) throw std::domain_error("finite-difference step must be positive");
  const auto& tx = scenario.antennas[pair.tx];
  const auto& rx = scenario.antennas[pair.rx];
  auto rss = [&](double x, double y) {
    const double v = bistatic_rss_dbm(scenario.radio, tx, rx, {x, y, tag.z});
    if (!std::isfinite(v))
      throw std::domain_error("finite-difference stencil crosses a dark geometry");
    return v;
  };
  Vec2 j;
  j.x = (rss(tag.x + step, tag.y) - rss(tag.x - step, tag.y)) / (2.0 * step);
  j.y = (rss(tag.x, tag.y + step) - rss(tag.x, tag.y - step)) / (2.0 * step);
  return j;
}

// Analytic gradient of the round-trip RSS in dB per meter: the logarithmic
// chain rule over both reader gains and both path losses. Empty when the
// point is dark (zero gain) or on a vertical axis.
inline std::optional<Vec2> rss_jacobian_analytic(const Scenario& scenario,
                                                 const AntennaPair& pair,
                                                 const Position3D& tag) {
  const double scale = 10.0 / std::numbers::ln10;
  Vec2 total{0.0, 0.0};
  for (int idx : {pair.tx, pair.rx}) {
    const auto& ant = scenario.antennas[idx];
    const auto g = detail::log_gain_gradient(ant, tag);
    if (!g) return std::nullopt;
    const double px = tag.x - ant.position.x;
    const double py = tag.y - ant.position.y;
    const double H = ant.position.z - tag.z;
    const double d2 = px * px + py * py + H * H;
    total.x += g->x - 2.0 * px / d2;
    total.y += g->y - 2.0 * py / d2;
  }
  return Vec2{scale * total.x, scale * total.y};
}

struct FisherInfo {
  double i11 = 0.0;
  double i12 = 0.0;
  double i21 = 0.0;
  double i22 = 0.0;
};

// Lower bound on position RMSE from a 2x2 information matrix, via the
// closed-form inverse. Near-singular matrices give the +inf sentinel.
inline double crlb_rmse(const FisherInfo& fim) {
  const double trace = fim.i11 + fim.i22;
  const double det = fim.i11 * fim.i22 - fim.i12 * fim.i21;
  if (!(det > 1e-12 * trace * trace)) return std::numeric_limits<double>::infinity();
  return std::sqrt(trace / det);
}

// Information about the tag coordinates accumulated over the pairs that
// cover the point; one rank-1 term per physical (unordered) measurement.
inline FisherInfo fisher_information(const Scenario& scenario, const Position3D& tag) {
  const double sigma = scenario.noise_sigma_db;
  if (!(sigma > 0.0)) throw std::domain_error("Fisher information requires positive sigma");
  FisherInfo fim;
  for (const auto& p :
       pairs_for_mode(static_cast<int>(scenario.antennas.size()), scenario.mode)) {
    const auto& tx = scenario.antennas[p.tx];
    const auto& rx = scenario.antennas[p.rx];
    if (!pair_coverage(scenario.radio, tx, rx, tag)) continue;
    const auto j = rss_jacobian_analytic(scenario, p, tag);
    if (!j) throw std::domain_error("covered pair with undefined gradient");
    const double w = 1.0 / (sigma * sigma);
    fim.i11 += w * j->x * j->x;
    fim.i12 += w * j->x * j->y;
    fim.i22 += w * j->y * j->y;
  }
  fim.i21 = fim.i12;
  return fim;
}

struct CrlbResult {
  double rmse_lower_bound = std::numeric_limits<double>::infinity();
  FisherInfo fim;
  bool localizable = false;
};

inline CrlbResult crlb_at(const Scenario& scenario, const Position3D& tag) {
  CrlbResult r;
  r.localizable =
      measurement_count(scenario.radio, scenario.antennas, tag, scenario.mode) >= 2;
  r.fim = fisher_information(scenario, tag);
  r.rmse_lower_bound = crlb_rmse(r.fim);
  return r;
}

struct MleEstimate {
  Position3D position;
  std::size_t cell_index = 0;
  double objective = 0.0;
  bool region_fallback = false;  // constrained region was empty
};

// Precomputed prediction grid for the constrained maximum-likelihood search:
// per cell, the predicted RSS and coverage of every candidate pair plus the
// measurement count M.
struct MleGrid {
  GridSpec grid;
  std::vector<AntennaPair> pairs;
  std::vector<double> pred;        // cell-major, pairs.size() per cell
  std::vector<std::uint8_t> cov;   // same layout
  std::vector<int> m_count;
  double reader_sensitivity_dbm = -75.0;

  static MleGrid build(const Scenario& scenario) {
    MleGrid g;
    g.grid = scenario.room;
    g.grid.step = scenario.mle_grid_step;
    g.pairs = pairs_for_mode(static_cast<int>(scenario.antennas.size()), scenario.mode);
    g.reader_sensitivity_dbm = scenario.radio.reader_sensitivity_dbm;
    const std::size_t cells = g.grid.cell_count();
    const std::size_t np = g.pairs.size();
    g.pred.assign(cells * np, kNoSignalDbm);
    g.cov.assign(cells * np, 0);
    g.m_count.assign(cells, 0);
    parallel_for_blocks(cells, [&](std::size_t begin, std::size_t end) {
      for (std::size_t k = begin; k < end; ++k) {
        const Position3D tag = g.grid.cell_center(k);
        int m = 0;
        for (std::size_t p = 0; p < np; ++p) {
          const auto& pr = g.pairs[p];
          const auto& tx = scenario.antennas[pr.tx];
          const auto& rx = scenario.antennas[pr.rx];
          const double rss = bistatic_rss_dbm(scenario.radio, tx, rx, tag);
          g.pred[k * np + p] = rss;
          const double fwd = forward_rss_dbm(scenario.radio, tx, tag);
          if (fwd >= scenario.radio.tag_sensitivity_dbm &&
              rss >= scenario.radio.reader_sensitivity_dbm) {
            g.cov[k * np + p] = 1;
            ++m;
          }
        }
        g.m_count[k] = m;
      }
    });
    return g;
  }

  std::size_t pair_index(const AntennaPair& p) const {
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if (pairs[i] == p) return i;
    throw std::invalid_argument("measured pair is not a candidate of this mode");
  }

  // Residual objective for measured pair indices/values at one cell
  double objective_at(std::size_t cell, const std::vector<std::size_t>& pidx,
                      const std::vector<double>& values, MismatchPenalty penalty) const {
    const std::size_t np = pairs.size();
    double obj = 0.0;
    for (std::size_t e = 0; e < pidx.size(); ++e) {
      const std::size_t off = cell * np + pidx[e];
      if (cov[off]) {
        const double r = pred[off] - values[e];
        obj += r * r;
      } else if (penalty == MismatchPenalty::sensitivity_floor) {
        const double r = reader_sensitivity_dbm - values[e];
        obj += r * r;
      }
    }
    return obj;
  }

  MleEstimate search(const MeasurementSet& meas,
                     MismatchPenalty penalty = MismatchPenalty::sensitivity_floor) const {
    if (meas.entries.size() < 2)
      throw std::invalid_argument("grid search needs at least two measurements");
    std::vector<std::size_t> pidx;
    std::vector<double> values;
    pidx.reserve(meas.entries.size());
    values.reserve(meas.entries.size());
    for (const auto& e : meas.entries) {
      pidx.push_back(pair_index(e.pair));
      values.push_back(e.rss_dbm);
    }
    const bool exact_two = meas.entries.size() == 2;
    MleEstimate best;
    bool found = false;
    // two passes: the constrained region first, the full localizable region
    // as a flagged fallback when the constrained one is empty
    for (int pass = 0; pass < 2 && !found; ++pass) {
      const bool restrict_two = exact_two && pass == 0;
      if (!exact_two && pass == 1) break;
      for (std::size_t k = 0; k < m_count.size(); ++k) {
        const int m = m_count[k];
        if (restrict_two ? m != 2 : m < 2) continue;
        const double obj = objective_at(k, pidx, values, penalty);
        if (!found || obj < best.objective) {
          found = true;
          best.objective = obj;
          best.cell_index = k;
          best.region_fallback = exact_two && pass == 1;
        }
      }
    }
    if (!found) throw std::runtime_error("no localizable cells on the estimation grid");
    best.position = grid.cell_center(best.cell_index);
    return best;
  }
};

// Constrained grid search: with exactly two measurements only cells with
// M = 2 are candidates, otherwise every localizable cell. Ties resolve to the
// lowest y, then lowest x cell.
inline MleEstimate mle_grid_search(const Scenario& scenario, const MeasurementSet& meas,
                                   MismatchPenalty penalty = MismatchPenalty::sensitivity_floor) {
  return MleGrid::build(scenario).search(meas, penalty);
}

}  // namespace rfidloc
