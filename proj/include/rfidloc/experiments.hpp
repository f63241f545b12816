#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfidloc/coverage.hpp"
#include "rfidloc/estimation.hpp"
#include "rfidloc/rng.hpp"

namespace rfidloc {

inline std::optional<double> median_of(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

struct SweepKey {
  Placement placement = Placement::corner;
  double theta = kPi / 4;
  double power_mw = 1000.0;
  Mode mode = Mode::bistatic;
};

struct CoverageSweepRow {
  SweepKey key;
  double coverage_pct = 0.0;
};

struct AccuracyCell {
  double x = 0.0;
  double y = 0.0;
  int m = 0;
  double crlb_rmse = 0.0;
  double mle_rmse = 0.0;
};

struct AccuracyPoint {
  SweepKey key;
  double coverage_pct = 0.0;
  std::vector<AccuracyCell> cells;  // localizable sub-grid cells, grid order
  // reported only when coverage reaches 50% (plot convention)
  std::optional<double> median_crlb_rmse;
  std::optional<double> median_mle_rmse;
  std::vector<double> cdf_mle;   // sorted per-cell RMSE samples
  std::vector<double> cdf_crlb;  // sorted per-cell bound samples
};

inline SweepKey key_of(const Scenario& s) {
  SweepKey k;
  k.placement = s.placement;
  k.theta = s.antennas.empty() ? 0.0 : s.antennas.front().elevation;
  k.power_mw = s.radio.tx_power_mw();
  k.mode = s.mode;
  return k;
}

inline std::vector<CoverageSweepRow> run_coverage_sweep(
    const std::vector<Placement>& placements, const std::vector<double>& thetas,
    const std::vector<double>& powers_mw, Mode mode, const ScenarioOverrides& ov = {}) {
  if (placements.empty() || thetas.empty() || powers_mw.empty())
    throw std::domain_error("sweep axes must be non-empty");
  std::vector<CoverageSweepRow> rows;
  for (auto placement : placements) {
    for (double theta : thetas) {
      for (double power : powers_mw) {
        const Scenario s = build_scenario(placement, theta, power, mode, ov);
        rows.push_back({key_of(s), coverage_percentage(coverage_map(s))});
      }
    }
  }
  return rows;
}

// Monte-Carlo localization accuracy of one scenario: CRLB and grid-search
// RMSE at every localizable cell of the accuracy sub-grid. Per-trial noise
// seeds derive from (scenario hash, cell index, trial index), so the result
// does not depend on thread scheduling. The search scores measured-but-dark
// pairs against the sensitivity floor.
inline AccuracyPoint evaluate_accuracy(const Scenario& scenario) {
  scenario.validate();
  AccuracyPoint point;
  point.key = key_of(scenario);
  point.coverage_pct = coverage_percentage(coverage_map(scenario));

  const MleGrid grid = MleGrid::build(scenario);
  const std::size_t np = grid.pairs.size();
  std::vector<std::size_t> cells_two, cells_many;
  for (std::size_t k = 0; k < grid.m_count.size(); ++k) {
    if (grid.m_count[k] == 2) cells_two.push_back(k);
    if (grid.m_count[k] >= 2) cells_many.push_back(k);
  }

  GridSpec sub = scenario.room;
  sub.step = scenario.accuracy_subgrid_step;
  const std::size_t n_sub = sub.cell_count();
  const std::uint64_t base = scenario.content_hash();
  const int trials = scenario.trials_per_cell;

  struct CellSlot {
    bool localizable = false;
    AccuracyCell cell;
  };
  std::vector<CellSlot> slots(n_sub);

  parallel_for_blocks(n_sub, [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> pidx;
    std::vector<double> truth, noisy, packed;
    for (std::size_t c = begin; c < end; ++c) {
      const Position3D tag = sub.cell_center(c);
      pidx.clear();
      truth.clear();
      for (std::size_t p = 0; p < np; ++p) {
        const auto& pr = grid.pairs[p];
        if (!pair_coverage(scenario.radio, scenario.antennas[pr.tx],
                           scenario.antennas[pr.rx], tag))
          continue;
        pidx.push_back(p);
        truth.push_back(
            bistatic_rss_dbm(scenario.radio, scenario.antennas[pr.tx],
                             scenario.antennas[pr.rx], tag));
      }
      const std::size_t m = pidx.size();
      if (m < 2) continue;

      CellSlot& slot = slots[c];
      slot.localizable = true;
      slot.cell.x = tag.x;
      slot.cell.y = tag.y;
      slot.cell.m = static_cast<int>(m);
      slot.cell.crlb_rmse = crlb_rmse(fisher_information(scenario, tag));

      const auto& region = m == 2 ? (cells_two.empty() ? cells_many : cells_two) : cells_many;
      if (region.empty()) throw std::runtime_error("no localizable cells on the estimation grid");
      // compact prediction rows for the region: covered pairs predict their
      // RSS, uncovered ones the sensitivity floor
      packed.assign(region.size() * m, 0.0);
      for (std::size_t r = 0; r < region.size(); ++r) {
        const std::size_t off = region[r] * np;
        for (std::size_t e = 0; e < m; ++e) {
          const std::size_t j = off + pidx[e];
          packed[r * m + e] = grid.cov[j] ? grid.pred[j] : grid.reader_sensitivity_dbm;
        }
      }

      double sum_sq_err = 0.0;
      noisy.resize(m);
      for (int t = 0; t < trials; ++t) {
        const MeasurementSet set =
            simulate_measurements(scenario, tag, derive_seed(base, c, static_cast<std::uint64_t>(t)));
        if (set.entries.size() != m)
          throw std::logic_error("coverage changed between truth and trial evaluation");
        for (std::size_t e = 0; e < m; ++e) noisy[e] = set.entries[e].rss_dbm;
        std::size_t best_r = 0;
        double best_obj = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < region.size(); ++r) {
          const double* row = &packed[r * m];
          double obj = 0.0;
          for (std::size_t e = 0; e < m; ++e) {
            const double resid = row[e] - noisy[e];
            obj += resid * resid;
          }
          if (obj < best_obj) {
            best_obj = obj;
            best_r = r;
          }
        }
        const Position3D est = grid.grid.cell_center(region[best_r]);
        const double dx = est.x - tag.x;
        const double dy = est.y - tag.y;
        sum_sq_err += dx * dx + dy * dy;
      }
      slot.cell.mle_rmse = std::sqrt(sum_sq_err / trials);
    }
  });

  for (const auto& slot : slots) {
    if (slot.localizable) point.cells.push_back(slot.cell);
  }
  std::vector<double> mle_vals, crlb_vals;
  for (const auto& c : point.cells) {
    mle_vals.push_back(c.mle_rmse);
    crlb_vals.push_back(c.crlb_rmse);
  }
  if (point.coverage_pct >= 50.0) {
    point.median_mle_rmse = median_of(mle_vals);
    point.median_crlb_rmse = median_of(crlb_vals);
  }
  std::sort(mle_vals.begin(), mle_vals.end());
  std::sort(crlb_vals.begin(), crlb_vals.end());
  point.cdf_mle = std::move(mle_vals);
  point.cdf_crlb = std::move(crlb_vals);
  return point;
}

inline std::vector<AccuracyPoint> run_accuracy_sweep(
    const std::vector<Placement>& placements, const std::vector<double>& thetas,
    const std::vector<double>& powers_mw, Mode mode, int trials,
    ScenarioOverrides ov = {}) {
  if (trials < 1) throw std::domain_error("accuracy sweep needs at least one trial");
  if (placements.empty() || thetas.empty() || powers_mw.empty())
    throw std::domain_error("sweep axes must be non-empty");
  ov.trials_per_cell = trials;
  std::vector<AccuracyPoint> points;
  for (auto placement : placements) {
    for (double theta : thetas) {
      for (double power : powers_mw) {
        points.push_back(evaluate_accuracy(build_scenario(placement, theta, power, mode, ov)));
      }
    }
  }
  return points;
}

struct CalibrationResult {
  double product = 0.0;      // calibrated mu_T * |Gamma|^2
  double achieved_pct = 0.0;
  int iterations = 0;
};

// Pins the link product so the scenario's localization coverage matches the
// target within half a percentage point. Bisection is valid because coverage
// is non-decreasing in the product.
inline CalibrationResult calibrate_link_budget(double target_coverage_pct,
                                               const Scenario& scenario) {
  auto coverage_with = [&](double product) {
    Scenario s = scenario;
    s.radio.set_link_product(product);
    return coverage_percentage(coverage_map(s));
  };
  double lo = 1e-9;
  double hi = 1.0;
  const double c_lo = coverage_with(lo);
  const double c_hi = coverage_with(hi);
  if (target_coverage_pct < c_lo - 0.5 || target_coverage_pct > c_hi + 0.5) {
    throw std::runtime_error(
        "calibration target " + format_double(target_coverage_pct, 6) +
        "% unreachable; achievable coverage range is [" + format_double(c_lo, 6) + "%, " +
        format_double(c_hi, 6) + "%]");
  }
  CalibrationResult result;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (coverage_with(mid) < target_coverage_pct)
      lo = mid;
    else
      hi = mid;
    result.iterations = i + 1;
  }
  result.product = hi;
  result.achieved_pct = coverage_with(hi);
  if (std::abs(result.achieved_pct - target_coverage_pct) > 0.5) {
    throw std::runtime_error("calibration could not match the target within 0.5 pp "
                             "(achieved " + format_double(result.achieved_pct, 6) + "%)");
  }
  return result;
}

}  // namespace rfidloc
