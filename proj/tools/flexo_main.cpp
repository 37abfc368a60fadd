#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flexo/pipeline.hpp"

namespace {

flexo::Config load_or_default(const std::string& config_path) {
  if (config_path.empty()) return flexo::default_config();
  return flexo::load_config(config_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cervical flexo-extension analysis from RGB-D marker recordings"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  app.add_option("--config", config_path, "JSON configuration file")->expected(1);
  app.add_option("--out", out_dir, "Output directory")->expected(1);

  auto* synthesize = app.add_subcommand(
      "synthesize", "Render a synthetic session bundle plus its ground truth");
  std::optional<std::uint64_t> seed;
  synthesize->add_option("--seed", seed, "Override the synthesis seed");

  auto* calibrate =
      app.add_subcommand("calibrate", "Derive offset, reference frame and marker seeds "
                                      "from a static-trial bundle");
  std::string static_bundle;
  calibrate->add_option("bundle", static_bundle, "Static-trial bundle directory")->required();

  auto* analyze = app.add_subcommand("analyze", "Track markers and report kinematics");
  std::string motion_bundle, calibration_file;
  analyze->add_option("bundle", motion_bundle, "Motion-trial bundle directory")->required();
  analyze->add_option("calibration", calibration_file, "calibration.json from `calibrate`")
      ->required();

  auto* reliability =
      app.add_subcommand("reliability", "Compare session reports of one subject");
  std::vector<std::string> report_files;
  reliability->add_option("reports", report_files, "report.json files (>= 2)")->required();

  CLI11_PARSE(app, argc, argv);

  flexo::Config config;
  try {
    config = load_or_default(config_path);
  } catch (const flexo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  if (synthesize->parsed()) return flexo::cmd_synthesize(config, out_dir, seed);
  if (calibrate->parsed()) return flexo::cmd_calibrate(static_bundle, config, out_dir);
  if (analyze->parsed())
    return flexo::cmd_analyze(motion_bundle, calibration_file, config, out_dir);
  if (reliability->parsed()) {
    std::vector<std::filesystem::path> paths(report_files.begin(), report_files.end());
    if (paths.size() < 2) {
      std::cerr << "error: reliability needs at least two session reports\n";
      return 2;
    }
    return flexo::cmd_reliability(paths, config, out_dir);
  }
  return 2;
}
