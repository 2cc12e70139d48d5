#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "serw/model.hpp"
#include "serw/montecarlo.hpp"
#include "serw/scaling.hpp"
#include "serw/tau.hpp"

namespace serw::cli {

using Json = nlohmann::ordered_json;

struct TauConfig {
  std::int64_t n_max = 100;  // rows of the (n, survival, pmf) table
  SeriesOptions series;
};

struct MsdConfig {
  std::int64_t n_steps = 1024;
  std::int64_t n_walkers = 1000;
  std::vector<std::int64_t> checkpoints;  // resolved; never empty after parsing
  std::uint64_t master_seed = 0;
  std::int64_t tau_bins = 64;
  double window = 0.5;
  bool probe = false;           // add (log n / n) E|S_n|^2 columns
  bool simple_walk = false;     // kernel override test hook
  bool trace = false;           // per-step dump, n_walkers <= 100 only
};

enum class Nu0Mode { Analytic, Fitted, Given };

struct FitConfig {
  std::vector<ScalingFamily> families{std::begin(kAllFamilies), std::end(kAllFamilies)};
  Nu0Mode nu0_mode = Nu0Mode::Analytic;
  double nu0 = 0.0;                 // used when nu0_mode == Given
  std::optional<std::string> input;  // sweep CSV to fit instead of sweeping
};

struct SweepConfig {
  std::vector<double> grid = log_grid(1e-2, 1e-8, 9);
  SeriesOptions series;
};

struct RateCheckConfig {
  std::vector<double> k = log_grid(1e-1, 1e-10, 10);
  std::vector<int> dimensions{1, 2};
  std::vector<std::pair<double, double>> gamma_points{{1.0, 1.0}, {-0.2, 0.2}, {-0.02, 0.02}};
};

/// Everything one invocation needs. Built from a JSON document whose keys are
/// all checked; unknown keys are an error.
struct RunConfig {
  ModelSpec model;
  TauConfig tau;
  MsdConfig msd;
  SweepConfig sweep;
  FitConfig fit;
  RateCheckConfig rate_check;
  std::string out_dir = "serw-out";
};

/// Throws ConfigError with a JSON-path-style message.
RunConfig parse_config(const Json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Effective configuration; parse_config(to_json(c)) reproduces c.
Json to_json(const RunConfig& cfg);

struct Overrides {
  std::optional<double> delta;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void apply_overrides(RunConfig& cfg, const Overrides& o);

/// SERW_THREADS, or hardware concurrency when unset. Throws ConfigError on a
/// malformed value.
int threads_from_env();

}  // namespace serw::cli
