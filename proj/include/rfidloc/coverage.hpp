#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rfidloc/parallel.hpp"
#include "rfidloc/propagation.hpp"
#include "rfidloc/scenario.hpp"

namespace rfidloc {

// Unordered antenna pair (indices into the scenario antenna list, tx <= rx).
// The lower-index antenna transmits the power-up wave.
struct AntennaPair {
  int tx = 0;
  int rx = 0;
  bool operator==(const AntennaPair&) const = default;
};

inline bool is_monostatic(const AntennaPair& p) { return p.tx == p.rx; }

// Measurement candidates for a mode: the diagonal for monostatic (N pairs),
// all unordered pairs including the diagonal for bistatic (N(N+1)/2).
inline std::vector<AntennaPair> pairs_for_mode(int n_antennas, Mode mode) {
  std::vector<AntennaPair> pairs;
  for (int i = 0; i < n_antennas; ++i) {
    if (mode == Mode::monostatic) {
      pairs.push_back({i, i});
    } else {
      for (int j = i; j < n_antennas; ++j) pairs.push_back({i, j});
    }
  }
  return pairs;
}

// Detection gate for one pair at one location: the round trip must clear the
// reader sensitivity and the transmit antenna's forward link must power the
// tag. No-signal sentinels evaluate false.
inline bool pair_coverage(const RadioParams& params, const ReaderAntenna& tx,
                          const ReaderAntenna& rx, const Position3D& tag) {
  const double forward = forward_rss_dbm(params, tx, tag);
  if (!(forward >= params.tag_sensitivity_dbm)) return false;
  const double round_trip = bistatic_rss_dbm(params, tx, rx, tag);
  return round_trip >= params.reader_sensitivity_dbm;
}

// M(x, y): how many pair measurements see a tag at this location.
inline int measurement_count(const RadioParams& params,
                             const std::vector<ReaderAntenna>& antennas,
                             const Position3D& tag, Mode mode) {
  int m = 0;
  for (const auto& p : pairs_for_mode(static_cast<int>(antennas.size()), mode)) {
    if (pair_coverage(params, antennas[p.tx], antennas[p.rx], tag)) ++m;
  }
  return m;
}

// Per-cell coverage evaluation of a scenario grid. Cells are indexed y-major
// (ascending index walks lowest y first, then lowest x).
struct CoverageMap {
  GridSpec grid;
  Mode mode = Mode::bistatic;
  std::vector<AntennaPair> pairs;
  std::vector<std::uint8_t> pair_covered;  // cell-major, pairs.size() per cell
  std::vector<int> m_count;
  std::vector<std::uint8_t> localizable;
  std::vector<double> max_rss_dbm;

  bool covered(std::size_t cell, std::size_t pair) const {
    return pair_covered[cell * pairs.size() + pair] != 0;
  }
};

inline CoverageMap coverage_map(const Scenario& scenario) {
  scenario.validate();
  CoverageMap map;
  map.grid = scenario.room;
  map.mode = scenario.mode;
  map.pairs = pairs_for_mode(static_cast<int>(scenario.antennas.size()), scenario.mode);
  const std::size_t cells = map.grid.cell_count();
  const std::size_t np = map.pairs.size();
  map.pair_covered.assign(cells * np, 0);
  map.m_count.assign(cells, 0);
  map.localizable.assign(cells, 0);
  map.max_rss_dbm.assign(cells, kNoSignalDbm);

  parallel_for_blocks(cells, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const Position3D tag = map.grid.cell_center(k);
      int m = 0;
      double best = kNoSignalDbm;
      for (std::size_t p = 0; p < np; ++p) {
        const auto& pr = map.pairs[p];
        const auto& tx = scenario.antennas[pr.tx];
        const auto& rx = scenario.antennas[pr.rx];
        const double rss = bistatic_rss_dbm(scenario.radio, tx, rx, tag);
        best = std::max(best, rss);
        const double fwd = forward_rss_dbm(scenario.radio, tx, tag);
        const bool cov = fwd >= scenario.radio.tag_sensitivity_dbm &&
                         rss >= scenario.radio.reader_sensitivity_dbm;
        if (cov) {
          map.pair_covered[k * np + p] = 1;
          ++m;
        }
      }
      map.m_count[k] = m;
      map.localizable[k] = m >= 2 ? 1 : 0;
      map.max_rss_dbm[k] = best;
    }
  });
  return map;
}

// Localizable share of the grid, in percent (Riemann approximation of the
// area ratio).
inline double coverage_percentage(const CoverageMap& map) {
  const std::size_t cells = map.localizable.size();
  if (cells == 0) throw std::domain_error("coverage percentage of an empty grid");
  std::size_t loc = 0;
  for (auto v : map.localizable) loc += v;
  return 100.0 * static_cast<double>(loc) / static_cast<double>(cells);
}

// Best achievable round-trip RSS per cell over the active mode's pairs.
inline std::vector<double> max_rss_map(const Scenario& scenario) {
  return coverage_map(scenario).max_rss_dbm;
}

}  // namespace rfidloc
