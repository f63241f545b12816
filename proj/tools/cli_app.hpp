#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rfidloc/config.hpp"
#include "rfidloc/coverage.hpp"
#include "rfidloc/estimation.hpp"
#include "rfidloc/experiments.hpp"
#include "rfidloc/io.hpp"
#include "rfidloc/parallel.hpp"

namespace rfidloc::cli {

namespace fs = std::filesystem;

struct Options {
  std::string config_path;
  std::string output_dir = "out";
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::optional<double> grid_step;
  std::optional<int> trials;
  std::optional<std::string> mode;
  bool full_scale = false;
  int verbosity = 0;
};

inline void apply_flag_overrides(const Options& opt, Scenario& s) {
  if (opt.full_scale) {
    s.room.step = 0.01;
    s.accuracy_subgrid_step = 0.1;
    if (s.trials_per_cell < 500) s.trials_per_cell = 500;
  }
  if (opt.grid_step) s.room.step = *opt.grid_step;
  if (opt.trials) s.trials_per_cell = *opt.trials;
  if (opt.mode) s.mode = parse_mode(*opt.mode);
  if (opt.seed) s.seed = *opt.seed;
}

struct CrlbMapResult {
  std::vector<int> m;
  std::vector<double> bound;
};

inline CrlbMapResult crlb_map_over_grid(const Scenario& scenario) {
  const GridSpec& g = scenario.room;
  const std::size_t cells = g.cell_count();
  CrlbMapResult r;
  r.m.resize(cells);
  r.bound.resize(cells);
  parallel_for_blocks(cells, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const Position3D tag = g.cell_center(k);
      r.m[k] = measurement_count(scenario.radio, scenario.antennas, tag, scenario.mode);
      r.bound[k] = r.m[k] >= 2 ? crlb_rmse(fisher_information(scenario, tag))
                               : std::numeric_limits<double>::infinity();
    }
  });
  return r;
}

inline std::string crlb_map_csv(const Scenario& scenario, const CrlbMapResult& r) {
  std::ostringstream os;
  os << "x,y,m,crlb_rmse_m\n";
  for (std::size_t k = 0; k < scenario.room.cell_count(); ++k) {
    const Position3D c = scenario.room.cell_center(k);
    os << fmt9(c.x) << ',' << fmt9(c.y) << ',' << r.m[k] << ',' << fmt9(r.bound[k]) << '\n';
  }
  return os.str();
}

inline int run_coverage(const Options& opt, const Config& cfg) {
  Scenario s = scenario_from_config(cfg);
  cfg.fail_on_unused();
  apply_flag_overrides(opt, s);
  const CoverageMap map = coverage_map(s);
  const std::string name = result_file_name(key_of(s));
  fs::create_directories(opt.output_dir);
  write_text_file(fs::path(opt.output_dir) / name, coverage_csv(map));
  write_text_file(fs::path(opt.output_dir) / "coverage_summary.json",
                  coverage_summary_json(s, map).dump(2) + "\n");
  write_text_file(fs::path(opt.output_dir) / "manifest.json",
                  scenario_manifest_json(s, {name, "coverage_summary.json"}).dump(2) + "\n");
  std::printf("coverage: %.1f%%\n", coverage_percentage(map));
  return 0;
}

inline int run_crlb_map(const Options& opt, const Config& cfg) {
  Scenario s = scenario_from_config(cfg);
  cfg.fail_on_unused();
  apply_flag_overrides(opt, s);
  const std::string name = "crlb_" + result_file_name(key_of(s));
  fs::create_directories(opt.output_dir);
  const CrlbMapResult map = crlb_map_over_grid(s);
  write_text_file(fs::path(opt.output_dir) / name, crlb_map_csv(s, map));
  write_text_file(fs::path(opt.output_dir) / "manifest.json",
                  scenario_manifest_json(s, {name}).dump(2) + "\n");
  std::vector<double> localizable;
  for (std::size_t k = 0; k < map.m.size(); ++k) {
    if (map.m[k] >= 2) localizable.push_back(map.bound[k]);
  }
  const auto med = median_of(localizable);
  std::printf("localizable cells: %zu of %zu\n", localizable.size(), map.m.size());
  std::printf("median crlb rmse: %s m\n", med ? fmt9(*med).c_str() : "n/a");
  return 0;
}

inline int run_mle_sim(const Options& opt, const Config& cfg) {
  Scenario s = scenario_from_config(cfg);
  cfg.fail_on_unused();
  apply_flag_overrides(opt, s);
  const AccuracyPoint point = evaluate_accuracy(s);
  const std::string base = result_file_name(key_of(s));
  const std::string cells_name = "accuracy_" + base;
  const std::string cdf_name = "cdf_" + base;
  fs::create_directories(opt.output_dir);
  write_text_file(fs::path(opt.output_dir) / cells_name, accuracy_csv(point));
  write_text_file(fs::path(opt.output_dir) / cdf_name, cdf_csv(point));
  write_text_file(fs::path(opt.output_dir) / "manifest.json",
                  scenario_manifest_json(s, {cells_name, cdf_name}).dump(2) + "\n");
  std::printf("coverage: %.1f%%\n", point.coverage_pct);
  std::printf("localizable cells: %zu, trials per cell: %d\n", point.cells.size(),
              s.trials_per_cell);
  std::printf("%-12s %-14s %-14s\n", "", "median [m]", "");
  std::printf("%-12s %-14s\n", "crlb",
              point.median_crlb_rmse ? fmt9(*point.median_crlb_rmse).c_str() : "n/a");
  std::printf("%-12s %-14s\n", "mle",
              point.median_mle_rmse ? fmt9(*point.median_mle_rmse).c_str() : "n/a");
  return 0;
}

inline int run_sweep(const Options& opt, const Config& cfg) {
  Scenario base = scenario_from_config(cfg);
  const SweepConfig sw = sweep_from_config(cfg);
  cfg.fail_on_unused();
  apply_flag_overrides(opt, base);

  ScenarioOverrides ov;
  ov.grid_step = base.room.step;
  ov.noise_sigma_db = base.noise_sigma_db;
  ov.mle_grid_step = base.mle_grid_step;
  ov.accuracy_subgrid_step = base.accuracy_subgrid_step;
  ov.trials_per_cell = base.trials_per_cell;
  ov.seed = base.seed;
  ov.reader_sensitivity_dbm = base.radio.reader_sensitivity_dbm;
  ov.tag_sensitivity_dbm = base.radio.tag_sensitivity_dbm;
  ov.link_product = base.radio.link_product();
  ov.tag_height = base.room.tag_height;
  ov.room_width = base.room.x_max;
  ov.room_length = base.room.y_max;
  if (!base.antennas.empty()) ov.antenna_height = base.antennas.front().position.z;

  fs::create_directories(opt.output_dir);
  std::vector<std::string> files;
  if (sw.kind == "coverage") {
    std::vector<CoverageSweepRow> all;
    for (Mode mode : sw.modes) {
      for (auto placement : sw.placements) {
        for (double theta : sw.thetas) {
          for (double power : sw.powers_mw) {
            const Scenario s = build_scenario(placement, theta, power, mode, ov);
            const CoverageMap map = coverage_map(s);
            all.push_back({key_of(s), coverage_percentage(map)});
            const std::string name = result_file_name(key_of(s));
            write_text_file(fs::path(opt.output_dir) / name, coverage_csv(map));
            files.push_back(name);
            std::printf("%-8s %-4s %6.0f mW %-11s coverage: %5.1f%%\n",
                        to_string(placement).c_str(), theta_tag(theta).c_str(), power,
                        to_string(mode).c_str(), all.back().coverage_pct);
          }
        }
      }
    }
    write_text_file(fs::path(opt.output_dir) / "sweep.csv", sweep_csv(all));
    files.push_back("sweep.csv");
  } else {
    std::vector<AccuracyPoint> points;
    for (Mode mode : sw.modes) {
      auto part = run_accuracy_sweep(sw.placements, sw.thetas, sw.powers_mw, mode,
                                     base.trials_per_cell, ov);
      points.insert(points.end(), part.begin(), part.end());
    }
    for (const auto& p : points) {
      const std::string base_name = result_file_name(p.key);
      write_text_file(fs::path(opt.output_dir) / ("accuracy_" + base_name), accuracy_csv(p));
      write_text_file(fs::path(opt.output_dir) / ("cdf_" + base_name), cdf_csv(p));
      files.push_back("accuracy_" + base_name);
      files.push_back("cdf_" + base_name);
      std::printf("%-8s %-4s %6.0f mW %-11s coverage %5.1f%%  median crlb %-10s median mle %-10s\n",
                  to_string(p.key.placement).c_str(), theta_tag(p.key.theta).c_str(),
                  p.key.power_mw, to_string(p.key.mode).c_str(), p.coverage_pct,
                  p.median_crlb_rmse ? fmt9(*p.median_crlb_rmse).c_str() : "n/a",
                  p.median_mle_rmse ? fmt9(*p.median_mle_rmse).c_str() : "n/a");
    }
    write_text_file(fs::path(opt.output_dir) / "accuracy_sweep.csv", accuracy_sweep_csv(points));
    files.push_back("accuracy_sweep.csv");
  }
  write_text_file(fs::path(opt.output_dir) / "manifest.json",
                  scenario_manifest_json(base, files).dump(2) + "\n");
  return 0;
}

inline int run_calibrate(const Options& opt, const Config& cfg) {
  Scenario s = scenario_from_config(cfg);
  const auto target = cfg.get_double("calibration", "target_coverage_pct");
  cfg.fail_on_unused();
  if (!target) throw ConfigError("calibrate needs [calibration] target_coverage_pct");
  apply_flag_overrides(opt, s);
  const CalibrationResult result = calibrate_link_budget(*target, s);
  fs::create_directories(opt.output_dir);
  nlohmann::ordered_json j;
  j["scenario_hash"] = s.content_hash_hex();
  j["target_coverage_pct"] = *target;
  j["achieved_coverage_pct"] = result.achieved_pct;
  j["link_product"] = result.product;
  j["iterations"] = result.iterations;
  write_text_file(fs::path(opt.output_dir) / "calibration.json", j.dump(2) + "\n");
  std::printf("calibrated link product: %s (coverage %.2f%%)\n", fmt9(result.product).c_str(),
              result.achieved_pct);
  return 0;
}

inline int run(int argc, const char* const* argv) {
  CLI::App app{"Passive UHF RFID localization simulator: coverage maps, position-error"
               " bounds and maximum-likelihood localization error"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--config", opt.config_path, "scenario config file")->required();
  app.add_option("--output-dir", opt.output_dir, "directory for result files");
  app.add_option("--seed", opt.seed, "override the scenario seed");
  app.add_option("--threads", opt.threads, "cap worker threads (0 = all cores)");
  app.add_option("--grid-step", opt.grid_step, "override the coverage grid step [m]");
  app.add_option("--trials", opt.trials, "override Monte Carlo trials per cell");
  app.add_option("--mode", opt.mode, "override the mode (monostatic|bistatic)");
  app.add_flag("--full-scale", opt.full_scale, "1 cm grid and large trial counts");
  app.add_flag("-v,--verbose", opt.verbosity, "more progress output");
  auto* sub_coverage = app.add_subcommand("coverage", "detection/localization coverage map");
  auto* sub_crlb = app.add_subcommand("crlb-map", "position-error lower-bound map");
  auto* sub_mle = app.add_subcommand("mle-sim", "Monte Carlo localization accuracy");
  auto* sub_sweep = app.add_subcommand("sweep", "scenario sweep over placements/angles/powers");
  auto* sub_cal = app.add_subcommand("calibrate", "pin the link product to a coverage target");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  set_thread_cap(opt.threads);
  if (!fs::exists(opt.config_path)) {
    std::fprintf(stderr, "config error: no such file '%s'\n%s\n", opt.config_path.c_str(),
                 app.help().c_str());
    return 1;
  }
  try {
    const Config cfg = Config::load(opt.config_path);
    if (sub_coverage->parsed()) return run_coverage(opt, cfg);
    if (sub_crlb->parsed()) return run_crlb_map(opt, cfg);
    if (sub_mle->parsed()) return run_mle_sim(opt, cfg);
    if (sub_sweep->parsed()) return run_sweep(opt, cfg);
    if (sub_cal->parsed()) return run_calibrate(opt, cfg);
    return 1;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace rfidloc::cli
