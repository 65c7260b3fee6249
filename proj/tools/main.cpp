#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "gpplan/errors.hpp"
#include "gpplan/experiment.hpp"
#include "gpplan/verify.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-process planning toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  gpplan::RunOptions run_opts;
  CLI::App* run = app.add_subcommand("run", "Run every (policy, seed) episode of a config");
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_option("--workers", run_opts.workers,
                  "worker threads (default: GPPLAN_WORKERS, else hardware concurrency)");
  run->add_option("--out", run_opts.out_override, "override the config's output directory");
  run->add_flag("--trace", run_opts.trace, "write the anytime policy's per-iteration trace CSV");

  gpplan::VerifyOptions verify_opts;
  CLI::App* verify = app.add_subcommand("verify", "Run the self-check suite on tiny instances");
  verify->add_option("--out", verify_opts.failure_dir,
                     "directory for offending-instance JSON files (default: cwd)");

  std::string field_out;
  CLI::App* gen = app.add_subcommand("gen-field", "Sample the configured field and write it as CSV");
  gen->add_option("config", config_path, "experiment config file")->required();
  gen->add_option("out", field_out, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return gpplan::cmd_run(config_path, run_opts);
    if (verify->parsed()) return gpplan::cmd_verify(verify_opts);
    if (gen->parsed()) return gpplan::cmd_gen_field(config_path, field_out);
  } catch (const gpplan::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const gpplan::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
