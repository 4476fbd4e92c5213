// btp: command-line front end to the experiment registry.

#include <exception>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "btp/harness.hpp"

namespace {

constexpr int kUsageStatus = 2;
constexpr int kRuntimeStatus = 3;

std::string experiment_list() {
  std::string s;
  for (const auto& e : btp::experiment_names()) s += (s.empty() ? "" : ", ") + e;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Brownian-time process laboratory"};
  std::string experiment;
  app.add_option("experiment", experiment, "one of: " + experiment_list())->required();

  // Flags are kept as text and parsed by the harness, which names the key on error.
  std::map<std::string, std::string> flags;
  const std::map<std::string, std::string> flag_help{
      {"seed", "master seed (unsigned 64-bit)"},
      {"n", "replicates"},
      {"t", "time"},
      {"x", "start point(s): ',' separates coordinates, ';' points (1D: ',' separates points)"},
      {"domain", "interval:a,b or ball:r,d"},
      {"f", "test function: constant, linear, square, cube, gauss, cosine, harmonic2d"},
      {"k", "number of outer copies"},
      {"p", "moment order"},
      {"lags", "comma-separated lags"},
      {"step", "Euler step of the exit walk"},
      {"out", "CSV output path"},
  };
  for (const auto& [name, help] : flag_help) {
    app.add_option_function<std::string>(
        "--" + name, [&flags, name](const std::string& v) { flags[name] = v; }, help);
  }
  std::string config_path;
  app.add_option("--config", config_path, "file of 'key = value' lines; flags override it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? 0 : kUsageStatus;
  }

  try {
    btp::RunConfig config;
    config.experiment = experiment;
    btp::experiment_keys(experiment);  // rejects unknown names
    if (!config_path.empty()) config.params = btp::parse_config_file(config_path);
    for (const auto& [k, v] : flags) config.params[k] = v;

    if (auto it = config.params.find("seed"); it != config.params.end()) {
      std::size_t used = 0;
      unsigned long long s = 0;
      try {
        s = std::stoull(it->second, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != it->second.size() || it->second.front() == '-') {
        throw btp::UsageError("parameter 'seed': expected an unsigned 64-bit integer, got '" +
                              it->second + "'");
      }
      config.seed = btp::Seed{s};
      config.params.erase(it);
    }
    if (auto it = config.params.find("out"); it != config.params.end()) {
      config.output_path = it->second;
      config.params.erase(it);
    }
    return btp::run(config, std::cout);
  } catch (const btp::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n' << "experiments: " << experiment_list() << '\n';
    return kUsageStatus;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeStatus;
  }
}
