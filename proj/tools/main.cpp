#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ldm/errors.hpp"
#include "ldm/experiments.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

nlohmann::json load(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream in(path);
  if (!in) throw ldm::ConfigError("cannot open config " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ldm::ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local denoiser laboratory: exact diffusion, recovery and CMI experiments"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool plot = false;
  for (const auto& name : ldm::experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides the config)");
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    sub->add_flag("--plot", plot, "also write SVG plots");
  }
  app.add_subcommand("schema", "print the JSON schema of all config files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  auto* sub = app.get_subcommands().front();
  if (sub->get_name() == "schema") {
    std::cout << ldm::config_schema().dump(2) << '\n';
    return 0;
  }

  try {
    ldm::Overrides ov;
    if (sub->count("--out")) ov.out = out;
    if (sub->count("--seed")) ov.seed = seed;
    ov.plot = plot;
    const auto cfg = ldm::parse_config(sub->get_name(), load(config), ov);
    for (const auto& f : ldm::run_experiment(cfg)) std::cout << cfg.out << '/' << f << '\n';
    return 0;
  } catch (const ldm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const ldm::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
