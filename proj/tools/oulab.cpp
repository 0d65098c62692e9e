// oulab <subcommand> <config>   or   oulab run <subcommand> <config>

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ou/cli.hpp"
#include "ou/model.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Ornstein-Uhlenbeck evolution-operator laboratory"};
  app.set_version_flag("--version", std::string(ou::kVersion));
  app.require_subcommand(1);

  std::string subcommand, config_path, output;
  auto attach = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--output", output, "output directory (overrides OULAB_OUTPUT_DIR and run.output)");
  };

  CLI::App* run = app.add_subcommand("run", "run a subcommand: oulab run <subcommand> <config>");
  run->add_option("subcommand", subcommand, "subcommand")
      ->required()
      ->check(CLI::IsMember(ou::cli::subcommands()));
  attach(run);
  for (const auto& name : ou::cli::subcommands()) attach(app.add_subcommand(name, "run the " + name + " checks"));

  CLI::App* models = app.add_subcommand("models", "list the model catalog with default parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ou::cli::kExitConfigInvalid;
  }

  if (models->parsed()) {
    for (const auto& entry : ou::model_catalog()) {
      std::cout << entry.name << "  " << entry.description << "\n";
      for (const auto& [key, value] : entry.defaults) std::cout << "    " << key << " = " << value << "\n";
    }
    return 0;
  }
  if (!run->parsed()) subcommand = app.get_subcommands().front()->get_name();

  ou::cli::RunOptions options;
  if (!output.empty()) options.output = output;
  return ou::cli::run(subcommand, config_path, std::cout, std::cerr, options);
}
