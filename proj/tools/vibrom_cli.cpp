#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "vibrom/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"vibrom: reduced-order modelling workbench for nonlinear vibrating "
               "structures"};
  app.require_subcommand(1);

  struct Args {
    std::string config;
    std::string out;
    long long seed = -1;
  };

  std::map<std::string, Args> args;
  for (const char* name : {"snapshots", "dpim", "train", "infer", "report"}) {
    CLI::App* sub = app.add_subcommand(name);
    Args& a = args[name];
    sub->add_option("--config", a.config, "configuration file")->required();
    sub->add_option("--out", a.out, "output directory override");
    sub->add_option("--seed", a.seed, "seed override");
  }

  CLI11_PARSE(app, argc, argv);

  std::string name = app.get_subcommands().front()->get_name();
  const Args& a = args[name];
  try {
    vibrom::PipelineConfig cfg =
        vibrom::load_pipeline_config(a.config, a.out, a.seed);
    return vibrom::run_command(name, cfg);
  } catch (const vibrom::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
