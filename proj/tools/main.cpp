#include <iostream>

#include <CLI11.hpp>

#include "rtil/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rtil - robust-tube MPC compression benchmark"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  long long seed = -1;
  int workers = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON config file");
    sub->add_option("-s,--set", overrides, "override as key.path=value (repeatable)");
    sub->add_option("-o,--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("-j,--workers", workers, "worker pool size (0 = all cores)");
  };

  CLI::App* tube = app.add_subcommand("tube", "compute the tube and controller artifacts");
  add_common(tube);

  CLI::App* train = app.add_subcommand("train", "collect demonstrations and train policies");
  add_common(train);

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint or the expert");
  add_common(eval);
  std::string checkpoint;
  bool expert_only = false;
  eval->add_option("--checkpoint", checkpoint, "policy checkpoint to evaluate");
  eval->add_flag("--expert", expert_only, "evaluate the expert controller instead");

  CLI::App* compare = app.add_subcommand("compare", "run the method comparison sweep");
  add_common(compare);

  CLI11_PARSE(app, argc, argv);

  try {
    rtil::RunConfig config = rtil::RunConfig::load(config_path, overrides);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (seed >= 0) config.master_seed = static_cast<uint64_t>(seed);
    if (workers >= 0) config.workers = workers;
    config.validate();

    if (tube->parsed()) return rtil::cmd_tube(config, std::cout);
    if (train->parsed()) return rtil::cmd_train(config, std::cout);
    if (eval->parsed()) return rtil::cmd_eval(config, checkpoint, expert_only, std::cout);
    if (compare->parsed()) return rtil::cmd_compare(config, std::cout);
  } catch (const rtil::InvalidParameterError& ex) {
    std::cerr << "usage error: " << ex.what() << "\n";
    return 2;
  } catch (const rtil::IoError& ex) {
    std::cerr << "usage error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
