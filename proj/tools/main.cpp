#include <CLI11.hpp>

#include "commands.hpp"

#include <clocale>
#include <string>

int main(int argc, char** argv) {
  std::setlocale(LC_ALL, "C");

  CLI::App app{"Fisher-information loss from binning event-list Poisson data"};
  app.require_subcommand(1);

  struct SubOptions {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> nodes;
  };

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"analyze", "FIMs, loss report and detectability for one configuration"},
      {"sweep-bins", "loss table across a list of bin counts"},
      {"conv-example", "band-limited convolution example: Nyquist loss, bandwidth sweep, scaling control"},
      {"mc-validate", "Monte Carlo check of binned means against expected values"},
  };

  std::map<std::string, SubOptions> options;
  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(name, description);
    SubOptions& opt = options[name];
    sub->add_option("--config", opt.config, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory")->required();
    sub->add_option("--seed", opt.seed, "override the config seed");
    sub->add_option("--nodes", opt.nodes, "override quadrature nodes_per_axis");
  }

  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  const SubOptions& opt = options[name];
  binfim_cli::Overrides overrides;
  overrides.seed = opt.seed;
  overrides.nodes_per_axis = opt.nodes;
  return binfim_cli::run_command(name, opt.config, opt.out, overrides);
}
