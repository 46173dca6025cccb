// nlqm: run experiment configs, compare series files, list experiments.
//
// Exit codes: 0 pass, 1 fail, 2 config or runtime error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "nlqm/errors.hpp"
#include "nlqm/scenario.hpp"
#include "nlqm/series.hpp"

namespace {

int run(const std::string& config, std::string out) {
  if (out.empty()) {
    const char* env = std::getenv("NLQM_OUT");
    out = env && *env ? env : "nlqm-out";
  }
  const auto scenarios = nlqm::load_scenarios(config);
  const std::filesystem::path dir(out);
  std::filesystem::create_directories(dir);
  const auto reports = nlqm::run_scenarios(scenarios, dir);
  const nlohmann::json combined = nlqm::report_json(reports);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    nlohmann::json one = {{"scenarios", nlohmann::json::array({combined["scenarios"][i]})}};
    std::ofstream(dir / reports[i].scenario / "report.json", std::ios::binary) << one.dump(2) << '\n';
  }
  std::ofstream(dir / "report.json", std::ios::binary) << combined.dump(2) << '\n';
  for (const auto& r : reports) {
    std::printf("%-5s %s (%s)\n", nlqm::status_name(r.status).c_str(), r.scenario.c_str(), r.experiment.c_str());
    for (const auto& f : r.failures) std::printf("      %s\n", f.c_str());
  }
  std::printf("report: %s\n", (dir / "report.json").string().c_str());
  return nlqm::exit_code(reports);
}

int compare(const std::string& a, const std::string& b, const std::string& norm, double tol) {
  const auto n = norm == "l2" ? nlqm::SeriesNorm::l2 : nlqm::SeriesNorm::linf;
  const double d = nlqm::compare_series(a, b, n);
  std::printf("%s %s\n", norm.c_str(), nlqm::format_value(d).c_str());
  return d <= tol ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear quantum mechanics experiments"};
  app.require_subcommand(1);

  std::string config, out;
  auto* run_cmd = app.add_subcommand("run", "Run the scenarios in a JSON config");
  run_cmd->add_option("config", config, "Config file")->required();
  run_cmd->add_option("--out", out, "Output directory (default: $NLQM_OUT, else ./nlqm-out)");

  std::string a, b, norm = "linf";
  double tol = 0.0;
  auto* cmp_cmd = app.add_subcommand("compare", "Norm of the difference of two series CSV files");
  cmp_cmd->add_option("a", a, "First CSV")->required();
  cmp_cmd->add_option("b", b, "Second CSV")->required();
  cmp_cmd->add_option("--norm", norm, "linf or l2")->check(CLI::IsMember({"linf", "l2"}));
  cmp_cmd->add_option("--tol", tol, "Exit 0 when the norm is at most this value (default 0)");

  auto* list_cmd = app.add_subcommand("list-experiments", "Print the experiment names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) return run(config, out);
    if (*cmp_cmd) return compare(a, b, norm, tol);
    if (*list_cmd) {
      for (const auto& n : nlqm::experiment_names()) std::printf("%s\n", n.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
