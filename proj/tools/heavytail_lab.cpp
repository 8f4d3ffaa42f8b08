#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "heavytail/experiments.hpp"

namespace ht = heavytail::harness;

namespace {

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return nlohmann::json::parse(in);
}

int cmd_list() {
  for (const auto& e : ht::registry()) {
    std::cout << e.name << "\n  " << e.description << "\n  defaults: " << e.defaults.dump() << "\n";
  }
  return 0;
}

int cmd_run(const std::string& config_path, std::optional<std::size_t> workers) {
  ht::ExperimentConfig cfg = ht::config_from_json(load_json(config_path));
  if (workers) cfg.workers = *workers;
  const auto rec = ht::run_experiment(cfg);
  const auto dir = ht::output_directory(cfg);
  ht::write_outputs(rec, dir);
  std::cout << rec.result.summary.dump(2) << "\n"
            << "wrote " << (dir / "results.csv").string() << ", aggregate.json, manifest.json ("
            << rec.manifest.at("wall_time_seconds").get<double>() << " s)\n";
  return 0;
}

int cmd_verify(const std::string& manifest_path) {
  const auto rep = ht::verify_manifest(load_json(manifest_path));
  for (const auto& line : rep.lines) std::cout << line << "\n";
  std::cout << (rep.ok ? "verified" : "verification FAILED") << "\n";
  return rep.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo experiments on critical heavy-tailed random graphs"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "list registered experiments and their default parameters");

  auto* run = app.add_subcommand("run", "run the experiment described by a JSON config");
  std::string config_path;
  std::optional<std::size_t> workers;
  run->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  run->add_option("--workers", workers, "worker threads (outputs do not depend on it)");

  auto* verify = app.add_subcommand("verify", "re-run a manifest and compare output digests");
  std::string manifest_path;
  verify->add_option("manifest", manifest_path, "manifest.json")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*list) return cmd_list();
    if (*run) return cmd_run(config_path, workers);
    if (*verify) return cmd_verify(manifest_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
