// marten: minimize | study | evolve driven by a run configuration file.

#include "marten/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Thin-film martensite microstructure simulator"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool quiet = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "run configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides [output] dir)");
    sub->add_option("--seed", seed, "nucleation seed (overrides [nucleation] seed)");
    sub->add_flag("--quiet", quiet, "suppress progress messages");
  };
  CLI::App* minimize = app.add_subcommand("minimize", "minimize the film energy for one temperature");
  CLI::App* study = app.add_subcommand("study", "mesh refinement study of a laminate");
  CLI::App* evolve = app.add_subcommand("evolve", "quasi-static evolution over a temperature schedule");
  for (CLI::App* sub : {minimize, study, evolve}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : marten::kExitConfig;
  }

  marten::CommandOverrides o;
  if (!out.empty()) o.out = out;
  for (CLI::App* sub : {minimize, study, evolve}) {
    if (sub->count("--seed")) o.seed = seed;
  }
  o.quiet = quiet;

  if (minimize->parsed()) return marten::cmd_minimize(config, o);
  if (study->parsed()) return marten::cmd_study(config, o);
  return marten::cmd_evolve(config, o);
}
