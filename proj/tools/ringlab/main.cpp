#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"ringlab: deterministic ringdown-inference experiments"};
  std::string sub, config, out = "ringlab-out";
  int jobs = 1;
  std::string names;
  for (const auto& n : ringlab::cli::subcommands()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("subcommand", sub, "one of: " + names)->required();
  app.add_option("--config", config, "JSON scenario file")->required();
  app.add_option("--out", out, "output directory");
  app.add_option("--jobs", jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (!ringlab::cli::is_subcommand(sub)) {
    std::cerr << "unknown subcommand '" << sub << "'\n" << app.help();
    return 2;
  }
  try {
    const auto cfg = ringlab::cli::load_config(config);
    const auto o = ringlab::cli::run_subcommand(sub, cfg, jobs);
    ringlab::cli::write_outputs(o, out);
    int violated = 0;
    for (const auto& [row, c] : o.checks) violated += c.violated();
    std::cout << sub << ": " << o.table.rows.size() << " rows, " << o.checks.size() << " checks, " << violated
              << " violated -> " << out << "\n";
    return o.exit_code;
  } catch (const ringlab::Error& e) {
    std::cerr << "ringlab: " << e.what() << "\n";
    return e.kind() == ringlab::ErrorKind::configuration ? 2 : 1;
  }
}
