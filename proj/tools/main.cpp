#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "bnmt/common/error.hpp"
#include "common.hpp"

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("bnmt"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Bandit feedback for sequence-to-sequence translation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML or INI file with option values; flags override it");
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

  bnmt::cli::Registry reg;
  bnmt::cli::add_data_commands(app, reg);
  bnmt::cli::add_reliability_commands(app, reg);
  bnmt::cli::add_estimator_commands(app, reg);
  bnmt::cli::add_policy_commands(app, reg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (quiet) spdlog::set_level(spdlog::level::warn);

  try {
    reg.action();
  } catch (const bnmt::UsageError& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const bnmt::NumericalError& e) {
    spdlog::error("{}", e.what());
    return 3;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
