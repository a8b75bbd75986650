// tcm <experiment> --config <path> [--key value ...]
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tcm/harness/experiments.hpp"

namespace {

std::string experiment_list() {
  std::string s;
  for (const auto& e : tcm::harness::experiment_names()) s += (s.empty() ? "" : ", ") + e;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace tcm::harness;
  CLI::App app{"Pseudo-spectral lab for the 2D tropical climate model without thermal diffusion"};
  std::string experiment;
  std::string config_path;
  app.add_option("experiment", experiment, "one of: " + experiment_list())->required();
  app.add_option("--config", config_path, "key = value configuration file");
  app.allow_extras();
  app.footer("Any configuration key may be overridden as --key value (or --key=value).");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  Config cfg;
  try {
    if (!config_path.empty()) cfg = Config::load(config_path);
    const std::vector<std::string> extras = app.remaining();
    for (std::size_t i = 0; i < extras.size(); ++i) {
      const std::string& tok = extras[i];
      if (tok.rfind("--", 0) != 0 || tok.size() < 3) throw ConfigError("unexpected argument: " + tok);
      const std::string body = tok.substr(2);
      const auto eq = body.find('=');
      if (eq != std::string::npos) {
        cfg.set(body.substr(0, eq), body.substr(eq + 1));
      } else {
        if (i + 1 >= extras.size()) throw ConfigError("missing value for --" + body);
        cfg.set(body, extras[++i]);
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "tcm: " << e.what() << "\n";
    return kConfigError;
  }

  std::string error;
  const int code = run(experiment, cfg, &error);
  if (code != kOk) std::cerr << "tcm: " << error << "\n";
  return code;
}
