#include <boost/program_options.hpp>

#include <iostream>
#include <string>

#include "commands.hpp"

namespace po = boost::program_options;

int main(int argc, char** argv) {
  po::options_description opts("Options");
  opts.add_options()
      ("help,h", "show this message")
      ("config", po::value<std::string>(), "scenario config file (YAML)")
      ("out", po::value<std::string>(), "output directory for sweep.csv and report.json")
      ("tol", po::value<double>(), "override quadrature.tol")
      ("max-depth", po::value<int>(), "override quadrature.max_depth");
  po::options_description hidden;
  hidden.add_options()("command", po::value<std::string>(), "subcommand");
  po::options_description all;
  all.add(opts).add(hidden);
  po::positional_options_description positional;
  positional.add("command", 1);

  const auto usage = [&](std::ostream& os) {
    os << "usage: mobius-mono decompose|ball-image|sweep|verify|selftest --config PATH [--out DIR] [--tol X] "
          "[--max-depth N]\n"
       << opts;
  };

  po::variables_map vm;
  try {
    po::store(po::command_line_parser(argc, argv).options(all).positional(positional).run(), vm);
    po::notify(vm);
  } catch (const po::error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    usage(std::cerr);
    return mobius_mono::cli::kExitConfig;
  }
  if (vm.count("help")) {
    usage(std::cout);
    return 0;
  }
  if (!vm.count("command")) {
    usage(std::cerr);
    return mobius_mono::cli::kExitConfig;
  }
  mobius_mono::cli::CommandOptions options;
  if (vm.count("config")) options.config = vm["config"].as<std::string>();
  if (vm.count("out")) options.out_dir = vm["out"].as<std::string>();
  if (vm.count("tol")) options.tol = vm["tol"].as<double>();
  if (vm.count("max-depth")) options.max_depth = vm["max-depth"].as<int>();
  return mobius_mono::cli::run_command(vm["command"].as<std::string>(), options, std::cout, std::cerr);
}
