// Command-line front end for the quantum lattice-gas simulator.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qlga/commands.hpp"

int main(int argc, char** argv) {
  namespace cmd = qlga::commands;

  CLI::App app{"Quantum lattice-gas automaton simulator"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = ".";
  unsigned threads = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Run configuration (INI or JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory")->check(CLI::ExistingDirectory);
    sub->add_option("--threads", threads, "Worker threads (never changes results)")->check(CLI::Range(1u, 1024u));
  };
  for (const char* name : {"evolve", "spectrum", "dispersion", "arbitrate"}) {
    add_common(app.add_subcommand(name, std::string("Run the ") + name + " command from a config file"));
  }

  long long q = 0, dim = 0, n = -1;
  auto* estimate = app.add_subcommand("estimate", "Print classical/quantum resource estimates");
  estimate->add_option("--config", config, "Config with [run] q, D, n")->check(CLI::ExistingFile);
  estimate->add_option("--q", q, "Sites per axis");
  estimate->add_option("--D", dim, "Lattice dimension");
  estimate->add_option("--n", n, "Particle count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cmd::kConfigError;
  }

  auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (name == "estimate" && config.empty()) {
    if (q < 1 || dim < 1 || n < 0) {
      std::cerr << "estimate needs --q, --D and --n (or --config)\n";
      return cmd::kConfigError;
    }
    return cmd::guarded([&] { return cmd::cmd_estimate(q, dim, n, std::cout); }, std::cerr);
  }
  cmd::Options opts;
  opts.out_dir = out_dir;
  opts.threads = threads;
  return cmd::run(name, config, opts, std::cout, std::cerr);
}
