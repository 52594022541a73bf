// Command-line runner for the closed-loop scheduling experiment.
//
//   anytime_cli run   [--config f] [--case name|all] [--seed n] [--out dir]
//   anytime_cli check [--config f]
//   anytime_cli sweep [--config f] --budget-scale 0.1,0.5,1 [--out dir]
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration or usage error, 3 invariant violation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "anytime/errors.hpp"
#include "anytime/harness.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

anytime::ExperimentConfig base_config(const std::string& path) {
  return path.empty() ? anytime::default_config() : anytime::load_config(path);
}

void print_summary(const std::vector<anytime::SummaryRow>& rows) {
  for (const auto& row : rows) {
    fmt::print("{:<14} task {}  ISE {:.6g}  vs ideal {:+.2f}%\n", anytime::case_name(row.kind),
               row.task_id, row.final_ise, row.degradation_pct);
  }
}

std::vector<anytime::CaseKind> parse_cases(const std::string& name) {
  if (name == "all") return {std::begin(anytime::kAllCases), std::end(anytime::kAllCases)};
  const auto kind = anytime::parse_case(name);
  if (!kind) throw anytime::ConfigError(0, "--case", fmt::format("unknown case '{}'", name));
  return {*kind};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anytime primal-dual MPC under EDF scheduling"};
  app.require_subcommand(1);

  std::string config_path;
  std::string case_name;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::vector<double> scales;

  auto* run = app.add_subcommand("run", "Run the experiment and write CSV results");
  run->add_option("--config", config_path, "Key-value config file")->check(CLI::ExistingFile);
  run->add_option("--case", case_name, "ideal-20ms, slow-300ms, anytime-20ms or all");
  run->add_option("--seed", seed, "Jitter seed");
  run->add_option("--out", out_dir, "Output directory");

  auto* check = app.add_subcommand("check", "Run the experiment and verify closed-loop invariants");
  check->add_option("--config", config_path, "Key-value config file")->check(CLI::ExistingFile);
  check->add_option("--seed", seed, "Jitter seed");

  auto* sweep = app.add_subcommand("sweep", "Anytime-case ISE as a function of budget scale");
  sweep->add_option("--config", config_path, "Key-value config file")->check(CLI::ExistingFile);
  sweep->add_option("--budget-scale", scales, "Comma-separated budget multipliers")
      ->required()
      ->delimiter(',')
      ->check(CLI::NonNegativeNumber);
  sweep->add_option("--seed", seed, "Jitter seed");
  sweep->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    anytime::ExperimentConfig config = base_config(config_path);
    if (seed) config.seed = *seed;
    if (!out_dir.empty()) config.output_dir = out_dir;

    if (*run) {
      if (!case_name.empty()) config.cases = parse_cases(case_name);
      const auto result = anytime::run_experiment(config);
      anytime::write_results(config, result);
      print_summary(result.summary);
      fmt::print("results written to {}\n", config.output_dir);
      return 0;
    }

    if (*check) {
      const auto result = anytime::run_experiment(config);
      const auto violations = anytime::check_invariants(config, result);
      for (const auto& v : violations) fmt::print(stderr, "violation: {}\n", v);
      if (!violations.empty()) return kExitInvariant;
      fmt::print("all invariants hold ({} cases, {} tasks)\n", result.cases.size(),
                 config.tasks.size());
      return 0;
    }

    // sweep
    std::filesystem::create_directories(config.output_dir);
    const auto path = std::filesystem::path(config.output_dir) / "sweep.csv";
    std::ofstream csv(path);
    csv << "budget_scale,task_id,final_ise,degradation_pct\n";
    config.cases = {anytime::CaseKind::kIdeal20ms};
    const auto ideal = anytime::run_case(config, anytime::CaseKind::kIdeal20ms);
    for (double scale : scales) {
      config.budget_scale = scale;
      const auto any = anytime::run_case(config, anytime::CaseKind::kAnytime20ms);
      for (std::size_t k = 0; k < any.tasks.size(); ++k) {
        const double ise = any.tasks[k].ise.final_value();
        const double pct = anytime::degradation_pct(ise, ideal.tasks[k].ise.final_value());
        fmt::print(csv, "{},{},{},{}\n", scale, any.tasks[k].task_id, ise, pct);
        fmt::print("scale {:<6} task {}  ISE {:.6g}  vs ideal {:+.2f}%\n", scale,
                   any.tasks[k].task_id, ise, pct);
      }
    }
    fmt::print("sweep written to {}\n", path.string());
    return 0;
  } catch (const anytime::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitFailure;
  }
}
