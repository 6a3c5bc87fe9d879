// phaseforge: calibrate | compile | simulate | report | demo

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "phaseforge/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = phaseforge::cli;

  CLI::App app{"Pixel-density equalization: phase image compiler and forward simulator"};
  app.require_subcommand(1);

  std::string config, lut, phase, out, out_dir, plan, sim, scenario;

  auto* calibrate = app.add_subcommand("calibrate", "Emulate the ramp calibration sweep and write the LUT CSV");
  calibrate->add_option("--config", config, "Scenario JSON")->required();
  calibrate->add_option("--out", out, "Output LUT CSV")->required();

  auto* compile = app.add_subcommand("compile", "Compile the phase image (PGM + metadata JSON + plan CSV)");
  compile->add_option("--config", config, "Scenario JSON")->required();
  compile->add_option("--lut", lut, "LUT CSV from calibrate")->required();
  compile->add_option("--out", out, "Output PGM")->required();
  compile->add_option("--plan", plan, "Output plan CSV (default: <out>.plan.csv)");

  auto* simulate = app.add_subcommand("simulate", "Forward-simulate a stored phase image");
  simulate->add_option("--config", config, "Scenario JSON")->required();
  simulate->add_option("--phase", phase, "Phase image PGM")->required();
  simulate->add_option("--out", out, "Output simulation CSV")->required();

  auto* report = app.add_subcommand("report", "Plot target vs achieved shift as SVG");
  report->add_option("--sim", sim, "Simulation CSV")->required();
  report->add_option("--out", out, "Output SVG")->required();

  auto* demo = app.add_subcommand("demo", "Run a built-in scenario end to end");
  demo->add_option("name", scenario, "Scenario: bent-surface | flat")->required();
  demo->add_option("--out-dir", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: Usage: " << e.what() << "\n";
    return cli::kUsage;
  }

  if (*calibrate) return cli::cmd_calibrate(config, out, std::cout, std::cerr);
  if (*compile) return cli::cmd_compile(config, lut, out, plan, std::cout, std::cerr);
  if (*simulate) return cli::cmd_simulate(config, phase, out, std::cout, std::cerr);
  if (*report) return cli::cmd_report(sim, out, std::cout, std::cerr);
  if (*demo) return cli::cmd_demo(scenario, out_dir, std::cout, std::cerr);
  return cli::kUsage;
}
