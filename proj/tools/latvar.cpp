#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "latvar/io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitQuality = 2;

nlohmann::ordered_json read_config(const std::string& path) {
  if (path.empty()) return nullptr;
  std::ifstream in(path);
  if (!in) throw latvar::ValidationError("cannot open config '" + path + "'");
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::ordered_json::parse_error& e) {
    throw latvar::ValidationError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw latvar::ValidationError("cannot write '" + path + "'");
  out << bytes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice-point variance lab for thin annuli"};
  app.set_version_flag("--version", latvar::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  latvar::ConfigOverrides flags;
  std::string format, out;
  int workers = 0;
  std::uint64_t seed = 0, grid = 0, samples = 0;
  double cutoff = 0.0, alpha = 0.0;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"count", "Sample lattice counts of the annulus over torus translations"},
      {"variance", "Variance estimators with tails and pairwise discrepancies"},
      {"decompose", "X / Y / Z / W decomposition of the variance"},
      {"sweep", "Ratio sweep over r with t = r^-alpha"},
      {"oracle", "Exact square-annulus statistics"},
      {"selftest", "Identity and special-function self checks"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output path (stdout if absent)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--cutoff", cutoff, "Frequency cutoff radius")->check(CLI::PositiveNumber);
    sub->add_option("--grid", grid, "Grid nodes per axis");
    sub->add_option("--samples", samples, "Random translations");
    sub->add_option("--alpha", alpha, "Sweep exponent: t = r^-alpha")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  const auto* sub = app.get_subcommands().front();
  auto given = [&](const char* opt) { return sub->count(opt) > 0; };
  if (given("--out")) flags.out = out;
  if (given("--format")) flags.format = format;
  if (given("--workers")) flags.workers = workers;
  if (given("--seed")) flags.seed = seed;
  if (given("--cutoff")) flags.cutoff = cutoff;
  if (given("--grid")) flags.grid = grid;
  if (given("--samples")) flags.samples = samples;
  if (given("--alpha")) flags.alpha = alpha;

  latvar::ExperimentConfig config;
  try {
    config = latvar::load_config(latvar::command_from_string(sub->get_name()), read_config(config_path), flags);
  } catch (const std::exception& e) {
    std::cerr << "latvar: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    const auto report = latvar::run_command(config);
    const std::string bytes = latvar::render(config, report);
    if (config.out) write_file(*config.out, bytes);
    else std::cout << bytes;
    for (const auto& [path, contents] : report.extra_files) write_file(path, contents);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& f : report.flags) std::cerr << "flag: " << f << '\n';
    return report.flags.empty() ? kExitOk : kExitQuality;
  } catch (const latvar::TruncationError& e) {
    std::cerr << "latvar: " << e.what() << '\n';
    return kExitQuality;
  } catch (const std::exception& e) {
    std::cerr << "latvar: " << e.what() << '\n';
    return kExitValidation;
  }
}
