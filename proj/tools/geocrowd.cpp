#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "geocrowd/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spatial crowdsourcing task assignment: scenario generation, simulation and reports"};
  app.require_subcommand(1);

  geocrowd::GenerateRequest gen;
  auto* generate = app.add_subcommand("generate", "Generate worker and task files from a config");
  generate->add_option("--config", gen.config_path, "Config file (key = value lines)")->required();
  generate->add_option("--out", gen.out_dir, "Output directory")->capture_default_str();

  geocrowd::RunRequest run;
  std::string algorithms, config, sweep, seeds, geometry, scenario;
  auto add_run_options = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "Config file (key = value lines)");
    cmd->add_option("--out", run.out_dir, "Output directory")->capture_default_str();
    cmd->add_option("--algorithms", algorithms,
                    "Comma-separated algorithms: " + geocrowd::algorithm_registry());
    cmd->add_option("--sweep", sweep, "Parameter sweep, name=v1,v2,... (ranges as lo:hi)");
    cmd->add_option("--seeds", seeds, "Comma-separated seeds");
    cmd->add_option("--jobs", run.jobs, "Parallel runs")->capture_default_str();
    cmd->add_option("--geometry", geometry, "Working-area shape: circle or square");
    cmd->add_option("--scenario", scenario, "Directory with pre-generated workers.csv/tasks.csv");
  };
  auto* run_cmd = app.add_subcommand("run", "Run algorithms over generated scenarios");
  auto* compare_cmd = app.add_subcommand("compare", "Alias of run for multi-algorithm comparisons");
  add_run_options(run_cmd);
  add_run_options(compare_cmd);

  geocrowd::ReportRequest rep;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Charts, tables and grades from a metrics file");
  report->add_option("metrics", rep.metrics_path, "metrics.csv written by run")->required();
  report->add_option("--out", report_out, "Output directory (default: <metrics dir>/report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : geocrowd::kExitUsage;
  }

  try {
    if (generate->parsed()) return geocrowd::cmd_generate(gen, std::cout, std::cerr);
    if (run_cmd->parsed() || compare_cmd->parsed()) {
      if (!config.empty()) run.config_path = config;
      if (!algorithms.empty()) run.algorithms = geocrowd::detail::split_list(algorithms);
      if (!sweep.empty()) run.sweep = sweep;
      if (!seeds.empty()) run.seeds = seeds;
      if (!geometry.empty()) run.geometry = geometry;
      if (!scenario.empty()) run.scenario_dir = scenario;
      return geocrowd::cmd_run(run, std::cout, std::cerr);
    }
    if (report->parsed()) {
      if (!report_out.empty()) rep.out_dir = report_out;
      return geocrowd::cmd_report(rep, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return geocrowd::kExitRunFailed;
  }
  return geocrowd::kExitUsage;
}
