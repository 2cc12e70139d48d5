// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage:
//   serw_acceptance --cli <path to serw> --work <scratch dir> [--only N,...] [--skip N,...]

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "serw/config.hpp"
#include "serw/montecarlo.hpp"
#include "serw/output.hpp"
#include "serw/scaling.hpp"
#include "serw/special.hpp"
#include "serw/tau.hpp"

namespace fs = std::filesystem;
using namespace serw;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path cli;
  fs::path work;
  int threads = 1;
};

std::string fmt(double x, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

void info(const std::string& line) { std::cout << "    " << line << std::endl; }

std::vector<ScalingFit> ranked_fits(const ModelSpec& model, const std::vector<double>& grid,
                                    const Context& ctx, SweepResult* keep = nullptr) {
  const SweepResult sweep = sweep_nu(model, grid, ctx.threads);
  if (!sweep.all_converged()) info("warning: not every sweep point converged");
  if (keep) *keep = sweep;
  FitOptions opts;
  opts.nu0 = analytic_nu0(model.dimension);
  return rank_families(sweep, opts);
}

std::string ranking_line(const std::vector<ScalingFit>& fits) {
  std::string s;
  for (const auto& f : fits) {
    if (!s.empty()) s += ", ";
    s += std::string(to_string(f.family)) + " " + fmt(f.cv_residual, 3);
  }
  return s;
}

// 1. Sum of pmf plus the remaining survival mass equals one.
Outcome normalization(const Context&) {
  const std::vector<std::pair<std::string, TailSpec>> tails{
      {"point_mass", TailSpec::point_mass()},   {"half_cauchy", TailSpec::half_cauchy(1.0)},
      {"pareto(0.5)", TailSpec::pareto(0.5)},   {"log_squared", TailSpec::log_squared()},
      {"exponential", TailSpec::exponential(1.0)}};
  double worst = 0.0;
  std::string worst_case;
  int cases = 0;
  for (int d : {1, 2, 3}) {
    for (double delta : {0.0, 0.01, 0.1}) {
      for (const auto& [name, tail] : tails) {
        const ModelSpec model =
            delta == 0.0 ? ModelSpec::unperturbed(d) : ModelSpec::iid(d, delta, tail);
        const TauLaw law(model);
        const TauSummary s = summarize(law);
        // Independent re-summation of the pmf column.
        CompensatedSum sum;
        for (std::int64_t n = 1; n <= s.terms_used; ++n) sum.add(law.pmf(n));
        sum.add(law.survival(s.terms_used + 1));
        const double err = std::max(std::abs(sum.value() - 1.0), std::abs(s.normalization - 1.0));
        if (err >= worst) {
          worst = err;
          worst_case = "d=" + std::to_string(d) + " delta=" + fmt(delta) + " " + name;
        }
        ++cases;
      }
    }
  }
  return {worst <= 1e-9, std::to_string(cases) + " cases, max |sum - 1| = " + fmt(worst, 3) +
                             " (" + worst_case + ")"};
}

// 2. d = 1 deterministic delta = 0.1: tau law and MSD slope against theory.
Outcome analytic_mc(const Context& ctx) {
  EnsembleConfig cfg;
  cfg.model = ModelSpec::deterministic(1, 0.1);
  cfg.n_steps = 10000;
  cfg.n_walkers = 100000;
  cfg.checkpoints = linear_checkpoints(cfg.n_steps, 500);
  cfg.master_seed = 20240601;
  cfg.tau_bins = 64;
  cfg.threads = ctx.threads;
  const EnsembleResult res = run_ensemble(cfg);

  const TauLaw law(cfg.model);
  double worst_z = 0.0;
  for (std::int64_t n = 1; n <= 20; ++n) {
    const double p = law.survival(n);
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(cfg.n_walkers));
    const double z = se > 0 ? std::abs(res.tau.survival(n) - p) / se : 0.0;
    worst_z = std::max(worst_z, z);
  }
  const bool tau_ok = worst_z <= 3.0;

  const double nu = diffusion_constant(law).nu.value;
  const NuEstimate est = nu_estimate(res.msd, 0.5);
  const double rel = std::abs(est.slope - nu) / nu;
  const bool slope_ok = rel <= 0.05;
  info("(a) max |z| over n <= 20: " + fmt(worst_z, 3) + (tau_ok ? " ok" : " too large"));
  info("(b) slope " + fmt(est.slope, 6) + " +/- " + fmt(est.standard_error, 2) + " vs nu " +
       fmt(nu, 10) + ", rel. diff " + fmt(rel, 3) + (slope_ok ? " ok" : " too large"));
  return {tau_ok && slope_ok,
          "max z " + fmt(worst_z, 3) + ", slope rel. diff " + fmt(100 * rel, 3) + "%"};
}

// 3. d = 1, delta = 0: (log n / n) E|S_n|^2 heads toward its limit.
Outcome subdiffusive(const Context& ctx) {
  EnsembleConfig cfg;
  cfg.model = ModelSpec::unperturbed(1);
  cfg.n_steps = 1000000;
  cfg.n_walkers = 100000;
  cfg.checkpoints = log_checkpoints(cfg.n_steps, 4);
  cfg.master_seed = 314159;
  cfg.threads = ctx.threads;
  const auto started = std::chrono::steady_clock::now();
  std::int64_t last_report = 0;
  const auto probe = subdiffusion_probe(cfg, [&](std::int64_t done, std::int64_t total) {
    if (done - last_report >= total / 10 || done == total) {
      last_report = done;
      std::cerr << "  criterion 3: " << done << '/' << total << " walkers\n";
    }
  });
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  const double limit = subdiffusion_limit();
  auto at = [&](std::int64_t n) {
    for (const auto& p : probe)
      if (p.step == n) return p;
    throw std::logic_error("missing checkpoint");
  };
  const auto early = at(1000);
  const auto late = at(1000000);
  const double rel = std::abs(late.value - limit) / limit;
  const bool closer = std::abs(late.value - limit) < std::abs(early.value - limit);
  info("n=1e3: " + fmt(early.value) + " +/- " + fmt(early.standard_error, 2) +
       ", n=1e6: " + fmt(late.value) + " +/- " + fmt(late.standard_error, 2) + ", limit " +
       fmt(limit) + ", " + fmt(secs, 4) + " s");
  return {rel <= 0.4 && closer, "n=1e6 within " + fmt(100 * rel, 3) + "% of " + fmt(limit, 4) +
                                    (closer ? ", closer than n=1e3" : ", NOT closer than n=1e3")};
}

// 4. Model I in d = 1: nu |log delta| settles and INV_LOG wins.
Outcome inv_log_scaling(const Context& ctx) {
  SweepResult sweep;
  const auto fits = ranked_fits(ModelSpec::deterministic(1, 0.01), log_grid(1e-2, 1e-8, 9), ctx, &sweep);
  std::vector<double> ratio;
  for (std::size_t i = sweep.points.size() - 4; i < sweep.points.size(); ++i)
    ratio.push_back(sweep.points[i].nu * std::abs(std::log(sweep.points[i].delta)));
  const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
  const double spread = (*hi - *lo) / *lo;
  info("nu |log delta| over the four smallest delta: " + fmt(*lo) + " .. " + fmt(*hi));
  info("ranking (LOO relative residual): " + ranking_line(fits));
  const bool ok = spread <= 0.3 && fits.front().family == ScalingFamily::InvLog;
  return {ok, "ratio spread " + fmt(100 * spread, 3) + "%, best " +
                  std::string(to_string(fits.front().family))};
}

// 5. Heavy-tailed d = 1 sweeps select their case laws.
Outcome heavy_tail_laws(const Context& ctx) {
  struct Case {
    std::string name;
    TailSpec tail;
    std::vector<double> grid;
    ScalingFamily expected;
  };
  const std::vector<Case> cases{
      {"half_cauchy", TailSpec::half_cauchy(1.0), log_grid(1e-2, 1e-8, 9), ScalingFamily::InvLog},
      {"pareto(0.5)", TailSpec::pareto(0.5), log_grid(1e-4, 1e-16, 9), ScalingFamily::InvLog},
      {"log_squared", TailSpec::log_squared(), log_grid(1e-4, 1e-40, 9), ScalingFamily::InvLogLog}};
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    const auto fits = ranked_fits(ModelSpec::iid(1, c.grid.front(), c.tail), c.grid, ctx);
    const bool hit = fits.front().family == c.expected;
    ok = ok && hit;
    info(c.name + ": " + ranking_line(fits));
    detail += c.name + "->" + std::string(to_string(fits.front().family)) + (hit ? "" : "(!)") + " ";
  }

  // Effective perturbation mu(delta) = delta * M(2 / (3 delta)) for Pareto;
  // its log-log slope is the exponent j.
  const auto pareto = TailSpec::pareto(0.5);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto grid = log_grid(1e-4, 1e-16, 9);
  for (double delta : grid) {
    const double x = std::log(delta);
    const double y = std::log(delta * pareto.truncated_first_moment(2.0 / (3.0 * delta)));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(grid.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const bool j_ok = std::abs(slope - 0.5) <= 0.05;
  info("pareto effective-perturbation exponent " + fmt(slope) + (j_ok ? " ok" : " off"));
  return {ok && j_ok, detail + "j_eff=" + fmt(slope, 4)};
}

// 6. d = 2 offsets.
Outcome d2_offsets(const Context& ctx) {
  const double nu0 = analytic_nu0(2);
  const bool nu0_ok = nu0 > 0.0 && nu0 < 1.0;
  info("nu0 = " + fmt(nu0, 10));
  const auto grid = log_grid(1e-2, 1e-4, 9);

  const auto lin = ranked_fits(ModelSpec::deterministic(2, 1e-2), grid, ctx);
  const auto lin_fit = *std::find_if(lin.begin(), lin.end(), [](const ScalingFit& f) {
    return f.family == ScalingFamily::OffsetLinear;
  });
  const double lin_resid = lin_fit.rms_residual / nu0;
  const bool lin_ok = lin_resid < 1e-3;
  info("model I: OFFSET_LINEAR rms residual / nu0 = " + fmt(lin_resid, 3) + "; ranking " +
       ranking_line(lin));

  const auto pow = ranked_fits(ModelSpec::iid(2, 1e-2, TailSpec::pareto(0.5)), grid, ctx);
  const auto pow_fit = *std::find_if(pow.begin(), pow.end(), [](const ScalingFit& f) {
    return f.family == ScalingFamily::OffsetPower;
  });
  const bool pow_ok = pow_fit.j >= 0.45 && pow_fit.j <= 0.55;
  info("pareto(0.5): OFFSET_POWER j = " + fmt(pow_fit.j) + "; ranking " + ranking_line(pow));

  const auto ls = ranked_fits(ModelSpec::iid(2, 1e-2, TailSpec::log_squared()), grid, ctx);
  const bool ls_ok = ls.front().family == ScalingFamily::OffsetInvLog2;
  info("log_squared: ranking " + ranking_line(ls));

  return {nu0_ok && lin_ok && pow_ok && ls_ok,
          std::string("nu0 ") + (nu0_ok ? "ok" : "out of range") + ", linear resid " +
              fmt(lin_resid, 3) + ", j " + fmt(pow_fit.j, 4) + ", log_squared best " +
              std::string(to_string(ls.front().family))};
}

// 7. Special functions.
Outcome special_functions(const Context&) {
  const double r = rate_integral(1e-8, 1) / std::abs(std::log(1e-8));
  const bool r_ok = r >= 0.9 && r <= 1.1;
  const double g11 = upper_incomplete_gamma(1.0, 1.0);
  const bool g_ok = std::abs(g11 - std::exp(-1.0)) <= 1e-10;

  bool mono = true;
  double prev = -1.0;
  for (double delta = 0.1; delta >= 1e-6; delta /= 2) {
    const double g = upper_incomplete_gamma(-2 * delta, 2 * delta);
    mono = mono && g > prev;
    prev = g;
  }

  bool identity_ok = true;
  std::string identity;
  for (double delta : {1e-2, 1e-4}) {
    const double k = 2 * delta;
    const double rhs = rate_integral(k, 1);
    const double g = upper_incomplete_gamma(-k, k);
    const double literal = std::pow(k, delta) * g;
    const double corrected = std::pow(k, k) * g;
    const double err = std::abs(literal - rhs) / rhs;
    identity_ok = identity_ok && err <= 1e-6;
    identity += " " + fmt(err, 3);
    info("delta=" + fmt(delta) + ": (2d)^d Gamma = " + fmt(literal, 12) + ", f_1(2d) = " +
         fmt(rhs, 12) + ", rel. err " + fmt(err, 3) + "; with (2d)^(2d) the rel. err is " +
         fmt(std::abs(corrected - rhs) / rhs, 3));
  }
  info("f_1(1e-8)/|log 1e-8| = " + fmt(r, 8) + ", Gamma(1,1) - 1/e = " + fmt(g11 - std::exp(-1.0), 3) +
       ", Gamma(-2d,2d) increasing: " + (mono ? "yes" : "no"));
  return {r_ok && g_ok && mono && identity_ok,
          "ratio " + fmt(r, 4) + ", Gamma(1,1) " + (g_ok ? "ok" : "off") + ", monotone " +
              (mono ? "yes" : "no") + ", identity rel. err" + identity};
}

int run_shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 8. The CLI's Monte Carlo output does not depend on the thread count.
Outcome determinism(const Context& ctx) {
  const std::vector<std::pair<std::string, std::string>> configs{
      {"iid_cauchy_d2", R"({"model": {"dimension": 2, "perturbation": "iid", "delta": 0.05,
          "tail": {"family": "half_cauchy", "gamma": 1}},
          "msd": {"n_steps": 20000, "n_walkers": 3000, "master_seed": 8}})"},
      {"probe_d1", R"({"msd": {"n_steps": 50000, "n_walkers": 1000, "probe": true, "master_seed": 9}})"},
      {"trace_seq_d3", R"({"model": {"dimension": 3, "perturbation": "independent_seq", "delta": 0.001,
          "tail": {"family": "pareto", "j": 0.5}},
          "msd": {"n_steps": 500, "n_walkers": 60, "trace": true, "master_seed": 10}})"}};
  bool ok = true;
  int compared = 0;
  std::string detail;
  for (const auto& [name, json] : configs) {
    const fs::path dir = ctx.work / "determinism" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "config.json") << json;
    std::vector<fs::path> outs;
    for (int threads : {1, 4}) {
      const fs::path out = dir / ("threads" + std::to_string(threads));
      const std::string cmd = "SERW_THREADS=" + std::to_string(threads) + " '" + ctx.cli.string() +
                              "' msd -c '" + (dir / "config.json").string() + "' --out '" +
                              out.string() + "' > '" + out.string() + ".stdout' 2> /dev/null";
      const int code = run_shell(cmd);
      if (code != 0) {
        ok = false;
        detail += name + ": exit " + std::to_string(code) + " ";
      }
      outs.push_back(out);
    }
    for (const auto& entry : fs::directory_iterator(outs[0])) {
      const fs::path other = outs[1] / entry.path().filename();
      const bool same = fs::exists(other) && slurp(entry.path()) == slurp(other);
      ok = ok && same;
      ++compared;
      if (!same) detail += name + "/" + entry.path().filename().string() + " differs ";
    }
    const bool same_stdout = slurp(outs[0].string() + ".stdout") == slurp(outs[1].string() + ".stdout");
    ok = ok && same_stdout;
    if (!same_stdout) detail += name + " stdout differs ";
  }
  return {ok && compared > 0,
          std::to_string(compared) + " files compared at 1 vs 4 threads" +
              (detail.empty() ? ", all identical" : ": " + detail)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serw acceptance suite"};
  Context ctx;
  std::string cli, work = "acceptance-work";
  std::vector<int> only, skip;
  app.add_option("--cli", cli, "path to the serw executable")->required();
  app.add_option("--work", work, "scratch directory");
  app.add_option("--only", only, "run only these criteria")->delimiter(',');
  app.add_option("--skip", skip, "skip these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  ctx.cli = fs::absolute(cli);
  ctx.work = fs::absolute(work);
  fs::create_directories(ctx.work);
  try {
    ctx.threads = serw::cli::threads_from_env();
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }

  const std::vector<std::pair<std::string, std::function<Outcome(const Context&)>>> criteria{
      {"normalization suite", normalization},
      {"analytic-MC agreement", analytic_mc},
      {"sub-diffusive baseline", subdiffusive},
      {"1/|log delta| scaling (model I, d=1)", inv_log_scaling},
      {"heavy-tail case laws (d=1)", heavy_tail_laws},
      {"offsets in d=2", d2_offsets},
      {"special functions", special_functions},
      {"determinism across thread counts", determinism},
  };

  std::cout << "serw acceptance suite, " << ctx.threads << " worker thread(s)" << std::endl;
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    const auto& [name, fn] = criteria[i];
    if ((!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) ||
        std::find(skip.begin(), skip.end(), id) != skip.end()) {
      std::cout << "[SKIP] " << id << ". " << name << std::endl;
      continue;
    }
    const auto started = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = fn(ctx);
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::cout << (out.pass ? "[PASS] " : "[FAIL] ") << id << ". " << name << ": " << out.detail
              << " [" << fmt(secs, 3) << " s]" << std::endl;
    failed += out.pass ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criterion/criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
