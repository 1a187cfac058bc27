#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "algcalc/cli.hpp"

namespace cli = algcalc::cli;

int main(int argc, char** argv) {
  CLI::App app{"algcalc: numeric verification of Lie algebroid tangent-bundle geometry"};
  app.require_subcommand(1);

  std::string config_path, kind, output, convention;
  std::vector<std::string> probes;
  double tol = 0;
  std::uint64_t seed = 0;
  std::size_t points = 0;
  unsigned threads = 1;
  bool dump = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "Geometry config (JSON)")->required();
    sub->add_option("--tol", tol, "Override every tolerance");
    sub->add_option("--seed", seed, "Sampling seed");
    sub->add_option("--points", points, "Number of sample points")->check(CLI::PositiveNumber);
    sub->add_option("--probe", probes, "Probe point x1,..,xm,y1,..,yr (repeatable)");
    sub->add_flag("--dump-samples", dump, "Include every sample in the report");
    sub->add_option("-o,--output", output, "Write the report here instead of stdout");
    sub->add_option("--threads", threads, "Worker threads (0 = hardware)");
    sub->add_option("--convention", convention, "obata: compatible|swapped; torsions: plus-structure|minus-structure");
  };
  for (const auto& name : cli::kCommands) {
    auto* sub = app.add_subcommand(name);
    if (name == "connection")
      sub->add_option("kind", kind, "Connection kind")->required()->check(CLI::IsMember(cli::kConnectionKinds));
    common(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  auto* sub = app.get_subcommands().front();
  cli::RunOptions opt;
  if (sub->count("--tol")) opt.tol = tol;
  if (sub->count("--seed")) opt.seed = seed;
  if (sub->count("--points")) opt.points = points;
  if (sub->count("--threads")) opt.threads = threads;
  opt.dump_samples = dump;
  opt.convention = convention;

  cli::CommandResult res;
  if (!probes.empty()) {
    // Probe parsing needs the dimensions, so the config is loaded first.
    try {
      auto cfg = cli::load_config(config_path);
      std::vector<algcalc::Point> pts;
      for (const auto& p : probes) pts.push_back(cli::parse_probe(p, cfg.m, cfg.r));
      opt.probes = std::move(pts);
      res = cli::run_command(command, kind, cfg, opt);
    } catch (const algcalc::Error& e) {
      std::cerr << "error: " << algcalc::error_code_name(e.code()) << ": " << e.what() << "\n";
      return 2;
    }
  } else {
    res = cli::run_file(command, kind, config_path, opt);
  }

  if (!res.diagnostic.empty()) std::cerr << res.diagnostic << "\n";
  if (output.empty()) {
    std::cout << res.report;
  } else {
    std::ofstream out(output, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write '" << output << "'\n";
      return 2;
    }
    out << res.report;
  }
  return res.exit_code;
}
