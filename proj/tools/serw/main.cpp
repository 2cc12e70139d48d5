#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "serw/commands.hpp"
#include "serw/config.hpp"
#include "serw/montecarlo.hpp"
#include "serw/scaling.hpp"

namespace {

using serw::cli::CommandContext;
using serw::cli::RunConfig;
using Command = std::function<int(const RunConfig&, const CommandContext&)>;

}  // namespace

int main(int argc, char** argv) {
  using namespace serw::cli;

  CLI::App app{"serw: senile reinforced random walks with perturbation"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<double> delta;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool json = false;

  const std::map<std::string, std::pair<Command, std::string>> commands{
      {"tau", {cmd_tau, "law of tau: survival/pmf table, E[tau] and parity split"}},
      {"nu", {cmd_nu, "diffusion constant nu with truncation bounds"}},
      {"msd", {cmd_msd, "Monte Carlo mean squared displacement and slope estimate"}},
      {"sweep", {cmd_sweep, "nu over a grid of delta values"}},
      {"fit", {cmd_fit, "fit scaling families to a sweep"}},
      {"rate-check", {cmd_rate_check, "rate integral and incomplete gamma over a grid"}},
  };
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.second);
    sub->add_option("-c,--config", config_path, "JSON config file (defaults apply when omitted)");
    sub->add_option("--delta", delta, "override model.delta");
    sub->add_option("--seed", seed, "override msd.master_seed");
    sub->add_option("--out", out, "override output.dir");
    sub->add_flag("--json", json, "print the summary as JSON");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  try {
    RunConfig cfg = config_path.empty() ? parse_config(Json::object()) : load_config(config_path);
    apply_overrides(cfg, Overrides{delta, seed, out});
    const CommandContext ctx{std::cout, std::cerr, json, threads_from_env()};
    return commands.at(chosen->get_name()).first(cfg, ctx);
  } catch (const serw::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}
