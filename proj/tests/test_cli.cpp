#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "serw/commands.hpp"
#include "serw/config.hpp"
#include "serw/output.hpp"

namespace serw::cli {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "serw_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

// Runs the serw executable with stdout captured to `stdout_file`.
int run_cli(const std::string& args, const fs::path& stdout_file, const std::string& env = "") {
  const std::string cmd = env + " '" SERW_CLI_PATH "' " + args + " > '" + stdout_file.string() +
                          "' 2> '" + stdout_file.string() + ".err'";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Json read_json(const fs::path& p) { return Json::parse(slurp(p)); }

TEST(Format, SeventeenDigitsRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(1e-300), "1e-300");
  EXPECT_EQ(format_double(2.0 / 3.0), "0.66666666666666663");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(format_double(-INFINITY), "-inf");
  for (double x : {std::acos(-1.0), 1.0 / 3.0, 6.02214076e23, -2.5e-17, 0.7944}) {
    EXPECT_EQ(std::strtod(format_double(x).c_str(), nullptr), x);
  }
}

TEST(Csv, WriterAndReader) {
  const auto dir = scratch("csv");
  {
    CsvWriter w(dir / "a.csv", {"delta", "nu", "tag"});
    w.cell(0.5).cell(std::int64_t{3}).cell("x");
    w.end_row();
  }
  {
    CsvWriter w(dir / "short.csv", {"a", "b"});
    EXPECT_THROW(w.cell(1.0).end_row(), std::logic_error);
  }
  const auto t = read_csv(dir / "a.csv");
  EXPECT_EQ(t.header, (std::vector<std::string>{"delta", "nu", "tag"}));
  EXPECT_EQ(t.number(0, t.column("delta")), 0.5);
  EXPECT_THROW((void)t.column("missing"), ConfigError);
  EXPECT_THROW((void)t.number(0, 2), ConfigError);
  write_file(dir / "bad.csv", "a,b\n1\n");
  EXPECT_THROW(read_csv(dir / "bad.csv"), ConfigError);
  EXPECT_THROW(read_csv(dir / "none.csv"), ConfigError);
}

TEST(Config, DefaultsRoundTrip) {
  const RunConfig c = parse_config(Json::object());
  EXPECT_EQ(c.model, ModelSpec::unperturbed(1));
  EXPECT_EQ(c.msd.checkpoints, power_of_two_checkpoints(c.msd.n_steps));
  const Json echoed = to_json(c);
  EXPECT_EQ(to_json(parse_config(echoed)), echoed);
}

TEST(Config, FullDocumentRoundTrip) {
  const Json doc = Json::parse(R"({
    "model": {"dimension": 2, "perturbation": "independent_seq", "delta": 0.01,
              "tail": {"family": "pareto", "j": 0.3}, "scale_rule": {"exponent": 0.5}},
    "tau": {"n_max": 10, "tolerance": 1e-8},
    "msd": {"n_steps": 5000, "n_walkers": 50, "checkpoints": {"spacing": "linear", "stride": 1000},
            "master_seed": 18446744073709551615, "window": 0.4, "kernel": "simple_walk",
            "trace": true},
    "sweep": {"delta_grid": {"hi": 0.1, "lo": 0.0001, "points": 4}},
    "fit": {"families": ["INV_LOG", "OFFSET_POWER"], "nu0": 0.25},
    "rate_check": {"k": [0.5, 0.1], "dimensions": [3], "gamma_points": [[0.5, 2]]},
    "output": {"dir": "elsewhere"}
  })");
  const RunConfig c = parse_config(doc);
  EXPECT_EQ(c.model.perturbation, Perturbation::IndependentSeq);
  EXPECT_EQ(c.model.tail, TailSpec::pareto(0.3));
  EXPECT_EQ(c.model.scale_rule.exponent, 0.5);
  EXPECT_EQ(c.msd.checkpoints, (std::vector<std::int64_t>{1000, 2000, 3000, 4000, 5000}));
  EXPECT_EQ(c.msd.master_seed, 18446744073709551615ull);
  EXPECT_TRUE(c.msd.simple_walk);
  EXPECT_EQ(c.sweep.grid.size(), 4u);
  EXPECT_EQ(c.fit.nu0_mode, Nu0Mode::Given);
  EXPECT_EQ(c.fit.nu0, 0.25);
  EXPECT_EQ(c.rate_check.gamma_points.size(), 1u);
  EXPECT_EQ(c.out_dir, "elsewhere");
  EXPECT_EQ(to_json(parse_config(to_json(c))), to_json(c));
}

TEST(Config, RejectsUnknownKeysAtEveryLevel) {
  for (const char* doc : {R"({"modle": {}})", R"({"model": {"delta_": 0.1}})",
                          R"({"model": {"tail": {"family": "pareto", "gamma": 1}}})",
                          R"({"msd": {"checkpoints": {"spacing": "log", "step": 3}}})",
                          R"({"sweep": {"delta_grid": {"hi": 0.1, "lo": 0.01, "n": 3}}})",
                          R"({"output": {"path": "x"}})"}) {
    EXPECT_THROW(parse_config(Json::parse(doc)), ConfigError) << doc;
  }
}

TEST(Config, RejectsInvalidValues) {
  for (const char* doc :
       {R"({"model": {"dimension": "2"}})", R"({"model": {"dimension": 9}})",
        R"({"model": {"delta": 0.6}})", R"({"model": {"perturbation": "none", "delta": 0.1}})",
        R"({"model": {"delta": 0.1, "perturbation": "iid", "tail": {"family": "levy"}}})",
        R"({"model": {"delta": 0.1, "perturbation": "iid", "tail": {"family": "pareto", "j": 2}}})",
        R"({"msd": {"n_walkers": 0}})", R"({"msd": {"master_seed": -1}})",
        R"({"msd": {"checkpoints": [5, 3]}})", R"({"msd": {"n_walkers": 101, "trace": true}})",
        R"({"msd": {"kernel": "levy"}})", R"({"msd": {"window": 0}})",
        R"({"model": {"dimension": 2}, "msd": {"probe": true}})",
        R"({"sweep": {"delta_grid": [0.01, 0.1]}})", R"({"fit": {"nu0": "guess"}})",
        R"({"fit": {"families": ["INV_SQRT"]}})", R"({"fit": {"families": []}})",
        R"({"rate_check": {"gamma_points": [[1, 0]]}})", R"({"tau": {"n_max": 0}})", R"([1, 2])"}) {
    EXPECT_THROW(parse_config(Json::parse(doc)), ConfigError) << doc;
  }
}

TEST(Config, OverridesWin) {
  RunConfig c = parse_config(Json::parse(R"({"model": {"delta": 0.1}, "msd": {"master_seed": 4}})"));
  apply_overrides(c, Overrides{0.0, 9, "o"});
  EXPECT_EQ(c.model, ModelSpec::unperturbed(1));
  EXPECT_EQ(c.msd.master_seed, 9u);
  EXPECT_EQ(c.out_dir, "o");
  apply_overrides(c, Overrides{0.2, std::nullopt, std::nullopt});
  EXPECT_EQ(c.model, ModelSpec::deterministic(1, 0.2));
  EXPECT_THROW(apply_overrides(c, Overrides{0.9, std::nullopt, std::nullopt}), ConfigError);
}

TEST(Config, ThreadsFromEnvironment) {
  ::setenv("SERW_THREADS", "3", 1);
  EXPECT_EQ(threads_from_env(), 3);
  ::setenv("SERW_THREADS", "3x", 1);
  EXPECT_THROW(threads_from_env(), ConfigError);
  ::setenv("SERW_THREADS", "0", 1);
  EXPECT_THROW(threads_from_env(), ConfigError);
  ::unsetenv("SERW_THREADS");
  EXPECT_GE(threads_from_env(), 1);
}

TEST(Executable, TauDivergesAtZeroDelta) {
  const auto dir = scratch("tau0");
  EXPECT_EQ(run_cli("tau --out '" + (dir / "o").string() + "'", dir / "stdout"), kExitNonConvergence);
  const Json s = read_json(dir / "o" / "tau_summary.json");
  EXPECT_EQ(s["mean_tau"]["status"], "diverges");
  EXPECT_TRUE(fs::exists(dir / "o" / "effective_config.json"));
}

TEST(Executable, TauPmfSumsToOne) {
  const auto dir = scratch("tau1");
  write_file(dir / "c.json", R"({"model": {"delta": 0.1}, "tau": {"n_max": 600}})");
  ASSERT_EQ(run_cli("tau -c '" + (dir / "c.json").string() + "' --out '" + (dir / "o").string() + "'",
                    dir / "stdout"),
            kExitOk);
  const auto t = read_csv(dir / "o" / "tau.csv");
  ASSERT_EQ(t.rows.size(), 600u);
  double sum = 0.0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) sum += t.number(r, t.column("pmf"));
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(Executable, PointMassMatchesDeterministicByteForByte) {
  const auto dir = scratch("pointmass");
  write_file(dir / "pm.json",
             R"({"model": {"dimension": 2, "perturbation": "iid", "delta": 0.05, "tail": {"family": "point_mass"}}})");
  write_file(dir / "det.json", R"({"model": {"dimension": 2, "perturbation": "deterministic", "delta": 0.05}})");
  ASSERT_EQ(run_cli("tau -c '" + (dir / "pm.json").string() + "' --out '" + (dir / "a").string() + "'",
                    dir / "s1"),
            kExitOk);
  ASSERT_EQ(run_cli("tau -c '" + (dir / "det.json").string() + "' --out '" + (dir / "b").string() + "'",
                    dir / "s2"),
            kExitOk);
  EXPECT_EQ(slurp(dir / "a" / "tau.csv"), slurp(dir / "b" / "tau.csv"));
  Json a = read_json(dir / "a" / "tau_summary.json");
  Json b = read_json(dir / "b" / "tau_summary.json");
  a.erase("model");
  b.erase("model");
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(Executable, NuExitCodes) {
  const auto dir = scratch("nu");
  EXPECT_EQ(run_cli("nu --json --out '" + (dir / "a").string() + "'", dir / "s1"), kExitNonConvergence);
  EXPECT_TRUE(read_json(dir / "s1")["subdiffusive"].get<bool>());
  write_file(dir / "d2.json", R"({"model": {"dimension": 2}})");
  EXPECT_EQ(run_cli("nu --json -c '" + (dir / "d2.json").string() + "' --out '" + (dir / "b").string() + "'",
                    dir / "s2"),
            kExitOk);
  const double nu = read_json(dir / "s2")["nu"]["value"].get<double>();
  EXPECT_GT(nu, 0.0);
  EXPECT_LT(nu, 1.0);
}

TEST(Executable, ConfigErrorsExitTwo) {
  const auto dir = scratch("errors");
  write_file(dir / "bad.json", R"({"model": {"dimension": 1, "colour": "red"}})");
  EXPECT_EQ(run_cli("nu -c '" + (dir / "bad.json").string() + "'", dir / "s1"), kExitConfig);
  EXPECT_NE(slurp(dir / "s1.err").find("colour"), std::string::npos);
  write_file(dir / "broken.json", "{");
  EXPECT_EQ(run_cli("nu -c '" + (dir / "broken.json").string() + "'", dir / "s2"), kExitConfig);
  EXPECT_EQ(run_cli("nu -c '" + (dir / "missing.json").string() + "'", dir / "s3"), kExitConfig);
  EXPECT_EQ(run_cli("nu --delta 0.9", dir / "s4"), kExitConfig);
  EXPECT_EQ(run_cli("nu --frobnicate", dir / "s5"), kExitConfig);
  EXPECT_EQ(run_cli("", dir / "s6"), kExitConfig);
  EXPECT_EQ(run_cli("tau", dir / "s7", "SERW_THREADS=many"), kExitConfig);
}

TEST(Executable, MsdIsDeterministicAcrossThreadCounts) {
  const auto dir = scratch("msd");
  write_file(dir / "c.json", R"({"model": {"dimension": 2, "perturbation": "iid", "delta": 0.05,
      "tail": {"family": "half_cauchy", "gamma": 1}},
      "msd": {"n_steps": 3000, "n_walkers": 700, "master_seed": 99}})");
  const std::string cfg = " -c '" + (dir / "c.json").string() + "'";
  ASSERT_EQ(run_cli("msd" + cfg + " --out '" + (dir / "a").string() + "'", dir / "s1", "SERW_THREADS=1"),
            kExitOk);
  ASSERT_EQ(run_cli("msd" + cfg + " --out '" + (dir / "b").string() + "'", dir / "s2", "SERW_THREADS=5"),
            kExitOk);
  int files = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const auto name = entry.path().filename();
    EXPECT_EQ(slurp(entry.path()), slurp(dir / "b" / name)) << name;
    ++files;
  }
  EXPECT_EQ(files, 4);
  EXPECT_EQ(slurp(dir / "s1"), slurp(dir / "s2"));
  ASSERT_EQ(run_cli("msd" + cfg + " --seed 100 --out '" + (dir / "c").string() + "'", dir / "s3"), kExitOk);
  EXPECT_NE(slurp(dir / "a" / "msd.csv"), slurp(dir / "c" / "msd.csv"));
}

TEST(Executable, MsdSingleStep) {
  const auto dir = scratch("msd1");
  write_file(dir / "c.json", R"({"msd": {"n_steps": 1, "n_walkers": 10, "trace": true}})");
  ASSERT_EQ(run_cli("msd -c '" + (dir / "c.json").string() + "' --out '" + (dir / "o").string() + "'",
                    dir / "s"),
            kExitOk);
  const auto t = read_csv(dir / "o" / "msd.csv");
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0], (std::vector<std::string>{"1", "1", "0", "10"}));
  EXPECT_EQ(read_csv(dir / "o" / "trace.csv").rows.size(), 20u);
}

TEST(Executable, MsdProbeColumns) {
  const auto dir = scratch("probe");
  write_file(dir / "c.json", R"({"msd": {"n_steps": 1000, "n_walkers": 100, "probe": true}})");
  ASSERT_EQ(run_cli("msd --json -c '" + (dir / "c.json").string() + "' --out '" + (dir / "o").string() + "'",
                    dir / "s"),
            kExitOk);
  const auto t = read_csv(dir / "o" / "msd.csv");
  EXPECT_NO_THROW((void)t.column("log_n_over_n_msd"));
  EXPECT_NEAR(read_json(dir / "s")["probe"]["limit"].get<double>(), 0.7944, 1e-4);
}

TEST(Executable, FitFromCsvSelectsGeneratingFamily) {
  const auto dir = scratch("fit");
  {
    CsvWriter w(dir / "sweep.csv", {"delta", "nu"});
    for (double delta : log_grid(1e-2, 1e-8, 9)) {
      w.cell(delta).cell(0.9 / std::abs(std::log(delta)));
      w.end_row();
    }
    w.close();
  }
  write_file(dir / "c.json", R"({"fit": {"input": ")" + (dir / "sweep.csv").string() + R"("}})");
  ASSERT_EQ(run_cli("fit --json -c '" + (dir / "c.json").string() + "' --out '" + (dir / "o").string() + "'",
                    dir / "s"),
            kExitOk);
  const Json fit = read_json(dir / "o" / "fit.json");
  EXPECT_EQ(fit["best"], "INV_LOG");
  EXPECT_NEAR(fit["fits"][0]["c"].get<double>(), 0.9, 1e-12);
  EXPECT_TRUE(fs::exists(dir / "o" / "plot_INV_LOG.csv"));
  EXPECT_TRUE(fs::exists(dir / "o" / "plot_OFFSET_POWER.csv"));
}

TEST(Executable, FitWithTooFewPointsIsNumericalFailure) {
  const auto dir = scratch("fit_few");
  write_file(dir / "sweep.csv", "delta,nu\n0.01,0.2\n0.001,0.1\n");
  write_file(dir / "c.json", R"({"fit": {"input": ")" + (dir / "sweep.csv").string() + R"("}})");
  EXPECT_EQ(run_cli("fit -c '" + (dir / "c.json").string() + "' --out '" + (dir / "o").string() + "'",
                    dir / "s"),
            kExitNumerical);
}

TEST(Executable, SweepAndRateCheck) {
  const auto dir = scratch("sweep");
  write_file(dir / "c.json", R"({"sweep": {"delta_grid": [0.1, 0.05, 0.02]}})");
  ASSERT_EQ(run_cli("sweep -c '" + (dir / "c.json").string() + "' --out '" + (dir / "o").string() + "'",
                    dir / "s"),
            kExitOk);
  EXPECT_EQ(read_csv(dir / "o" / "sweep.csv").rows.size(), 3u);
  ASSERT_EQ(run_cli("rate-check --json --out '" + (dir / "r").string() + "'", dir / "s2"), kExitOk);
  const Json rc = read_json(dir / "s2");
  EXPECT_NEAR(rc["gamma"][0]["upper_gamma"].get<double>(), std::exp(-1.0), 1e-15);
  EXPECT_TRUE(fs::exists(dir / "r" / "identity.csv"));
}

TEST(Executable, EffectiveConfigReflectsOverrides) {
  const auto dir = scratch("echo");
  ASSERT_EQ(run_cli("nu --delta 0.25 --seed 7 --out '" + (dir / "o").string() + "'", dir / "s"), kExitOk);
  const Json echo = read_json(dir / "o" / "effective_config.json");
  EXPECT_EQ(echo["model"]["delta"], 0.25);
  EXPECT_EQ(echo["model"]["perturbation"], "deterministic");
  EXPECT_EQ(echo["msd"]["master_seed"], 7);
  EXPECT_FALSE(echo.contains("output"));
}

}  // namespace
}  // namespace serw::cli
