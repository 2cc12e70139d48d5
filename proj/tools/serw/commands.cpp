#include "serw/commands.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "serw/output.hpp"
#include "serw/special.hpp"

namespace serw::cli {

namespace {

Json series_json(const SeriesValue& v) {
  return Json{{"value", json_number(v.value)},
              {"truncation_bound", json_number(v.truncation_bound)},
              {"terms_used", v.terms_used},
              {"status", std::string(to_string(v.status))}};
}

std::string with_bound(const SeriesValue& v) {
  return format_double(v.value) + " +/- " + format_double(v.truncation_bound) + " (" +
         std::string(to_string(v.status)) + ", " + std::to_string(v.terms_used) + " terms)";
}

void emit(const CommandContext& ctx, const Json& summary, const std::string& text) {
  if (ctx.json) ctx.out << summary.dump(2) << '\n';
  else ctx.out << text;
}

// Prints whole-percent progress lines, skipping repeats.
ProgressCallback percent_progress(const CommandContext& ctx, std::string label) {
  return [&ctx, label = std::move(label), last = -1](std::int64_t done, std::int64_t total) mutable {
    const int pct = static_cast<int>(100 * done / std::max<std::int64_t>(total, 1));
    if (pct / 5 == last / 5 && done != total) return;
    last = pct;
    ctx.err << label << ": " << done << '/' << total << " walkers (" << pct << "%)\n";
  };
}

EnsembleConfig ensemble_config(const RunConfig& cfg, int threads) {
  EnsembleConfig e;
  e.model = cfg.model;
  e.n_steps = cfg.msd.n_steps;
  e.n_walkers = cfg.msd.n_walkers;
  e.checkpoints = cfg.msd.checkpoints;
  e.master_seed = cfg.msd.master_seed;
  e.tau_bins = cfg.msd.tau_bins;
  e.threads = threads;
  e.kernel = cfg.msd.simple_walk ? KernelOverride::SimpleRandomWalk : KernelOverride::None;
  return e;
}

SweepResult run_sweep(const RunConfig& cfg, const CommandContext& ctx) {
  const std::size_t total = cfg.sweep.grid.size();
  return sweep_nu(cfg.model, cfg.sweep.grid, ctx.threads, cfg.sweep.series,
                  [&ctx, total, done = std::size_t{0}](std::size_t, const SweepPoint& p) mutable {
                    ctx.err << "sweep: " << ++done << '/' << total
                            << " delta=" << format_double(p.delta) << " nu=" << format_double(p.nu)
                            << ' ' << to_string(p.status) << '\n';
                  });
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& sweep) {
  CsvWriter csv(path, {"delta", "nu", "truncation_bound", "mean_tau", "terms_used", "status"});
  for (const auto& p : sweep.points) {
    csv.cell(p.delta).cell(p.nu).cell(p.truncation_bound).cell(p.mean_tau).cell(p.terms_used);
    csv.cell(to_string(p.status));
    csv.end_row();
  }
  csv.close();
}

SweepResult read_sweep_csv(const std::filesystem::path& path, const ModelSpec& model) {
  const CsvTable t = read_csv(path);
  const std::size_t delta = t.column("delta");
  const std::size_t nu = t.column("nu");
  SweepResult out;
  out.model = model.describe_kernel();
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    SweepPoint p;
    p.delta = t.number(r, delta);
    p.nu = t.number(r, nu);
    out.points.push_back(p);
  }
  return out;
}

Json fit_json(const ScalingFit& f) {
  Json j{{"family", std::string(to_string(f.family))},
         {"c", json_number(f.c)},
         {"nu0", json_number(f.nu0)},
         {"nu0_fitted", f.nu0_fitted}};
  if (f.family == ScalingFamily::OffsetPower) j["j"] = json_number(f.j);
  j["points"] = f.points;
  j["rms_residual"] = json_number(f.rms_residual);
  j["normalized_residual"] = json_number(f.normalized_residual);
  j["relative_residual"] = json_number(f.relative_residual);
  j["cv_residual"] = json_number(f.cv_residual);
  return j;
}

}  // namespace

int cmd_tau(const RunConfig& cfg, const CommandContext& ctx) {
  const auto dir = prepare_output(cfg);
  const TauLaw law(cfg.model);

  const auto survival = law.survival_table(cfg.tau.n_max);
  CsvWriter csv(dir / "tau.csv", {"n", "survival", "pmf"});
  for (std::int64_t n = 1; n <= cfg.tau.n_max; ++n) {
    csv.cell(n).cell(survival[static_cast<std::size_t>(n - 1)]).cell(law.pmf(n));
    csv.end_row();
  }
  csv.close();

  const TauSummary s = summarize(law, cfg.tau.series);
  Json summary{{"model", cfg.model.describe()},
               {"mean_tau", series_json(s.mean)},
               {"p_odd", series_json(s.parity.odd)},
               {"p_even", series_json(s.parity.even)},
               {"normalization", json_number(s.normalization)},
               {"terms_used", s.terms_used}};
  write_json(dir / "tau_summary.json", summary);

  emit(ctx, summary,
       cfg.model.describe() + "\n  E[tau]  " + with_bound(s.mean) + "\n  P_odd   " +
           with_bound(s.parity.odd) + "\n  P_even  " + with_bound(s.parity.even) + "\n");
  return s.mean.converged() ? kExitOk : kExitNonConvergence;
}

int cmd_nu(const RunConfig& cfg, const CommandContext& ctx) {
  const auto dir = prepare_output(cfg);
  const TauLaw law(cfg.model);
  const DiffusionConstant dc = diffusion_constant(law, cfg.tau.series);

  Json summary{{"model", cfg.model.describe()},
               {"nu", series_json(dc.nu)},
               {"nu_even_form", series_json(dc.nu_even_form)},
               {"subdiffusive", dc.subdiffusive},
               {"mean_tau", series_json(dc.summary.mean)},
               {"p_odd", series_json(dc.summary.parity.odd)},
               {"p_even", series_json(dc.summary.parity.even)},
               {"normalization", json_number(dc.summary.normalization)}};
  write_json(dir / "nu.json", summary);

  std::string text = cfg.model.describe() + "\n  nu      " + with_bound(dc.nu) + "\n";
  if (dc.subdiffusive) text += "  sub-diffusive: E[tau] diverges, E|S_n|^2 grows like n / log n\n";
  text += "  E[tau]  " + with_bound(dc.summary.mean) + "\n  P_odd   " +
          with_bound(dc.summary.parity.odd) + "\n";
  emit(ctx, summary, text);
  return dc.subdiffusive || !dc.nu.converged() ? kExitNonConvergence : kExitOk;
}

int cmd_msd(const RunConfig& cfg, const CommandContext& ctx) {
  const auto dir = prepare_output(cfg);
  const EnsembleConfig ens = ensemble_config(cfg, ctx.threads);
  const EnsembleResult res = run_ensemble(ens, percent_progress(ctx, "msd"));

  std::vector<std::string> header{"checkpoint", "msd_mean", "msd_se", "n_walkers"};
  std::vector<ProbePoint> probe;
  if (cfg.msd.probe) {
    probe = rescale_subdiffusive(res.msd);
    header.insert(header.end(), {"log_n_over_n_msd", "log_n_over_n_msd_se"});
  }
  CsvWriter csv(dir / "msd.csv", header);
  auto probe_it = probe.begin();
  for (const auto& p : res.msd.points) {
    csv.cell(p.step).cell(p.mean).cell(p.standard_error).cell(p.n_walkers);
    if (cfg.msd.probe) {
      if (probe_it != probe.end() && probe_it->step == p.step) {
        csv.cell(probe_it->value).cell(probe_it->standard_error);
        ++probe_it;
      } else {
        csv.cell("nan").cell("nan");
      }
    }
    csv.end_row();
  }
  csv.close();

  // The analytic column is the SeRW law even under the simple-walk hook.
  const TauLaw law(cfg.model);
  const auto analytic = law.survival_table(static_cast<std::int64_t>(res.tau.counts.size()) + 1);
  CsvWriter hist(dir / "tau_histogram.csv", {"n", "count", "empirical_survival", "analytic_survival"});
  for (std::size_t i = 0; i < res.tau.counts.size(); ++i) {
    const auto n = static_cast<std::int64_t>(i) + 1;
    hist.cell(n).cell(res.tau.counts[i]).cell(res.tau.survival(n)).cell(analytic[i]);
    hist.end_row();
  }
  hist.close();

  Json summary{{"model", cfg.model.describe()},
               {"kernel", cfg.msd.simple_walk ? "simple_walk" : "serw"},
               {"n_steps", cfg.msd.n_steps},
               {"n_walkers", cfg.msd.n_walkers},
               {"master_seed", cfg.msd.master_seed},
               {"final_msd", json_number(res.msd.points.back().mean)},
               {"final_msd_se", json_number(res.msd.points.back().standard_error)}};
  std::string text = cfg.model.describe() + "\n  E|S_n|^2 at n=" +
                     std::to_string(res.msd.points.back().step) + ": " +
                     format_double(res.msd.points.back().mean) + " +/- " +
                     format_double(res.msd.points.back().standard_error) + "\n";
  try {
    const NuEstimate est = nu_estimate(res.msd, cfg.msd.window);
    summary["nu_hat"] = Json{{"slope", json_number(est.slope)},
                             {"standard_error", json_number(est.standard_error)},
                             {"ci_low", json_number(est.ci_low)},
                             {"ci_high", json_number(est.ci_high)},
                             {"points_used", est.points_used},
                             {"window", cfg.msd.window}};
    text += "  nu_hat  " + format_double(est.slope) + " +/- " + format_double(est.standard_error) +
            " (" + std::to_string(est.points_used) + " checkpoints)\n";
  } catch (const EstimatorError& e) {
    summary["nu_hat"] = nullptr;
    summary["nu_hat_error"] = e.what();
    text += std::string("  nu_hat  unavailable: ") + e.what() + "\n";
  }
  summary["tau"] = Json{{"total", res.tau.total},
                        {"resolved_bins", static_cast<std::int64_t>(res.tau.counts.size())},
                        {"beyond", res.tau.beyond},
                        {"censored", res.tau.censored}};
  if (cfg.msd.probe) {
    const double limit = subdiffusion_limit();
    summary["probe"] = Json{{"limit", limit},
                            {"final_step", probe.empty() ? Json(nullptr) : Json(probe.back().step)},
                            {"final_value", probe.empty() ? Json(nullptr) : json_number(probe.back().value)}};
    if (!probe.empty())
      text += "  (log n / n) E|S_n|^2 = " + format_double(probe.back().value) + " (limit " +
              format_double(limit) + ")\n";
  }

  if (cfg.msd.trace) {
    std::vector<std::string> th{"walker", "step"};
    for (int a = 0; a < cfg.model.dimension; ++a) th.push_back("x" + std::to_string(a + 1));
    th.push_back("m");
    CsvWriter trace(dir / "trace.csv", th);
    for (std::int64_t w = 0; w < cfg.msd.n_walkers; ++w) {
      const auto states = trace_walker(ens, static_cast<std::uint64_t>(w));
      for (const auto& s : states) {
        trace.cell(w).cell(s.step_count());
        for (auto x : s.position()) trace.cell(static_cast<std::int64_t>(x));
        trace.cell(s.m());
        trace.end_row();
      }
    }
    trace.close();
  }

  write_json(dir / "msd_summary.json", summary);
  emit(ctx, summary, text);
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const CommandContext& ctx) {
  const auto dir = prepare_output(cfg);
  const SweepResult sweep = run_sweep(cfg, ctx);
  write_sweep_csv(dir / "sweep.csv", sweep);

  Json summary{{"model", sweep.model},
               {"points", static_cast<std::int64_t>(sweep.points.size())},
               {"all_converged", sweep.all_converged()}};
  write_json(dir / "sweep_summary.json", summary);

  std::string text = sweep.model + "\n";
  for (const auto& p : sweep.points)
    text += "  delta=" + format_double(p.delta) + "  nu=" + format_double(p.nu) + "  " +
            std::string(to_string(p.status)) + "\n";
  emit(ctx, summary, text);
  return sweep.all_converged() ? kExitOk : kExitNonConvergence;
}

int cmd_fit(const RunConfig& cfg, const CommandContext& ctx) {
  const auto dir = prepare_output(cfg);
  SweepResult sweep;
  if (cfg.fit.input) {
    sweep = read_sweep_csv(*cfg.fit.input, cfg.model);
  } else {
    sweep = run_sweep(cfg, ctx);
    write_sweep_csv(dir / "sweep.csv", sweep);
  }

  FitOptions opts;
  switch (cfg.fit.nu0_mode) {
    case Nu0Mode::Analytic: opts.nu0 = analytic_nu0(cfg.model.dimension, cfg.sweep.series); break;
    case Nu0Mode::Fitted: break;
    case Nu0Mode::Given: opts.nu0 = cfg.fit.nu0; break;
  }

  std::vector<ScalingFit> fits;
  Json failures = Json::array();
  for (auto family : cfg.fit.families) {
    try {
      fits.push_back(fit_scaling(sweep, family, opts));
    } catch (const FitError& e) {
      failures.push_back(Json{{"family", std::string(to_string(family))}, {"error", e.what()}});
    }
  }
  std::stable_sort(fits.begin(), fits.end(), [](const ScalingFit& a, const ScalingFit& b) {
    return a.cv_residual < b.cv_residual;
  });

  Json ranked = Json::array();
  for (const auto& f : fits) {
    ranked.push_back(fit_json(f));
    CsvWriter plot(dir / ("plot_" + std::string(to_string(f.family)) + ".csv"),
                   {"delta", "x", "nu", "fitted"});
    for (const auto& row : plot_data(sweep, f)) {
      plot.cell(row.delta).cell(row.x).cell(row.nu).cell(row.fitted);
      plot.end_row();
    }
    plot.close();
  }
  Json summary{{"model", sweep.model},
               {"points", static_cast<std::int64_t>(sweep.points.size())},
               {"nu0", opts.nu0 ? json_number(*opts.nu0) : Json("fitted")},
               {"sweep_converged", cfg.fit.input ? Json(nullptr) : Json(sweep.all_converged())},
               {"best", fits.empty() ? Json(nullptr) : Json(std::string(to_string(fits[0].family)))},
               {"fits", ranked},
               {"failures", failures}};
  write_json(dir / "fit.json", summary);

  std::string text = sweep.model + "\n";
  for (const auto& f : fits) {
    text += "  " + std::string(to_string(f.family)) + "  cv=" + format_double(f.cv_residual) +
            "  c=" + format_double(f.c) + "  nu0=" + format_double(f.nu0);
    if (f.family == ScalingFamily::OffsetPower) text += "  j=" + format_double(f.j);
    text += "\n";
  }
  for (const auto& e : failures)
    text += "  " + e["family"].get<std::string>() + "  failed: " + e["error"].get<std::string>() + "\n";
  emit(ctx, summary, text);

  if (fits.empty()) return kExitNumerical;
  if (!cfg.fit.input && !sweep.all_converged()) return kExitNonConvergence;
  return kExitOk;
}

int cmd_rate_check(const RunConfig& cfg, const CommandContext& ctx) {
  const auto dir = prepare_output(cfg);
  const auto& rc = cfg.rate_check;

  CsvWriter rate(dir / "rate.csv", {"dimension", "k", "rate", "rate_over_abs_log_k"});
  Json rate_rows = Json::array();
  for (int d : rc.dimensions) {
    for (double k : rc.k) {
      const double f = rate_integral(k, d);
      const double ratio = f / std::abs(std::log(k));
      rate.cell(static_cast<std::int64_t>(d)).cell(k).cell(f).cell(ratio);
      rate.end_row();
      rate_rows.push_back(Json{{"dimension", d}, {"k", k}, {"rate", json_number(f)}});
    }
  }
  rate.close();

  CsvWriter gamma(dir / "gamma.csv", {"s", "x", "upper_gamma"});
  Json gamma_rows = Json::array();
  for (const auto& [s, x] : rc.gamma_points) {
    const double g = upper_incomplete_gamma(s, x);
    gamma.cell(s).cell(x).cell(g);
    gamma.end_row();
    gamma_rows.push_back(Json{{"s", s}, {"x", x}, {"upper_gamma", json_number(g)}});
  }
  gamma.close();

  // Substituting t = k x in the d = 1 integral gives
  // f_1(k) = k^k Gamma(-k, k); with k = 2 delta the prefactor is (2 delta)^(2 delta).
  // The (2 delta)^delta column is the commonly quoted variant, kept for comparison.
  CsvWriter id(dir / "identity.csv",
               {"delta", "rate", "prefactor_delta", "prefactor_2delta", "rel_err_delta",
                "rel_err_2delta"});
  Json id_rows = Json::array();
  for (double k : rc.k) {
    const double delta = k / 2.0;
    const double f = rate_integral(k, 1);
    const double g = upper_incomplete_gamma(-k, k);
    const double lhs_delta = std::pow(k, delta) * g;
    const double lhs_2delta = std::pow(k, k) * g;
    const double e1 = std::abs(lhs_delta - f) / f;
    const double e2 = std::abs(lhs_2delta - f) / f;
    id.cell(delta).cell(f).cell(lhs_delta).cell(lhs_2delta).cell(e1).cell(e2);
    id.end_row();
    id_rows.push_back(Json{{"delta", delta},
                           {"rel_err_delta", json_number(e1)},
                           {"rel_err_2delta", json_number(e2)}});
  }
  id.close();

  Json summary{{"rate", rate_rows}, {"gamma", gamma_rows}, {"identity", id_rows}};
  write_json(dir / "rate_check.json", summary);

  std::string text;
  for (const auto& r : rate_rows)
    text += "  f_" + std::to_string(r["dimension"].get<int>()) + "(" +
            format_double(r["k"].get<double>()) + ") = " + r["rate"].dump() + "\n";
  for (const auto& g : gamma_rows)
    text += "  Gamma(" + format_double(g["s"].get<double>()) + ", " +
            format_double(g["x"].get<double>()) + ") = " + g["upper_gamma"].dump() + "\n";
  emit(ctx, summary, text);
  return kExitOk;
}

}  // namespace serw::cli
