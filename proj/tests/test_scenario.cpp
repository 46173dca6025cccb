#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "nlqm/errors.hpp"
#include "nlqm/scenario.hpp"
#include "nlqm/series.hpp"

using namespace nlqm;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const std::filesystem::path dir = std::filesystem::path(NLQM_SCRATCH) / "scenario" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string config_error(const std::string& text) {
  try {
    parse_scenarios(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::vector<std::filesystem::path> bundled_configs() {
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(NLQM_CONFIG_DIR))
    if (entry.path().extension() == ".json") out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("experiment names round-trip") {
  CHECK(experiment_names().size() == 11);
  for (const auto& n : experiment_names()) {
    const auto e = parse_experiment(n);
    REQUIRE(e);
    CHECK(experiment_name(*e) == n);
  }
  CHECK_FALSE(parse_experiment("telegraph"));
}

TEST_CASE("syntax errors report line and column") {
  const std::string msg = config_error("{\n  \"name\": \"x\",\n  \"experiment\" \"gisin-telegraph\"\n}\n");
  // The position is the last character read, here the end of the unexpected string.
  CHECK(msg.find("line 3, column 32") != std::string::npos);
  CHECK(config_error("").find("line 1, column 1") != std::string::npos);
}

TEST_CASE("schema violations name the offending field") {
  CHECK(config_error(R"({"experiment": "eigen-census"})") == "name: required field missing");
  CHECK(config_error(R"({"name": "a", "experiment": "eigen-census", "params": {"eps": "big"}})") ==
        "params.eps: expected a number");
  CHECK(config_error(R"({"name": "a", "experiment": "eigen-census", "params": {"epsilon": 1}})")
            .rfind("params.epsilon: unknown field", 0) == 0);
  CHECK(config_error(R"({"name": "a", "experiment": "gisin-telegraph"})") == "integrator: required field missing");
  CHECK(config_error(R"({"name": "a", "experiment": "gisin-telegraph", "integrator": {"dt": 0.1}})") ==
        "integrator.t_end: required field missing");
  CHECK(config_error(R"({"name": "a", "experiment": "gisin-telegraph", "integrator": {"dt": -1, "t_end": 1}})") ==
        "integrator.dt: must be positive");
  CHECK(config_error(R"({"name": "a", "experiment": "diagonal-census"})") == "params.state: required field missing");
  CHECK(config_error(R"({"name": "a", "experiment": "no-signaling", "params": {"description": "bohm"},
                         "integrator": {"dt": 0.1, "t_end": 1}})")
            .rfind("params.description: 'bohm' is not one of", 0) == 0);
  CHECK(config_error(R"({"name": "a", "experiment": "gisin-telegraph", "params": {"alpha": [1, 2, 3]},
                         "integrator": {"dt": 0.1, "t_end": 1}})")
            .rfind("params.alpha: expected a complex number", 0) == 0);
  CHECK(config_error(R"({"name": "a", "experiment": "teleport"})").rfind("experiment: unknown experiment", 0) == 0);
  CHECK(config_error(R"({"name": "../x", "experiment": "eigen-census"})").rfind("name:", 0) == 0);
  CHECK(config_error(R"({"name": "a", "experiment": "eigen-census", "outputs": ["signal"]})")
            .rfind("outputs[0]:", 0) == 0);
  CHECK(config_error(R"({"scenarios": [{"name": "a", "experiment": "eigen-census"},
                                       {"name": "b", "experiment": "eigen-census", "params": {"N": 1.5}}]})") ==
        "scenarios[1].params.N: expected an integer");
  CHECK(config_error(R"({"scenarios": [{"name": "a", "experiment": "eigen-census"},
                                       {"name": "a", "experiment": "eigen-census"}]})")
            .find("duplicate") != std::string::npos);
}

TEST_CASE("defaults are filled in and complex shorthands normalized") {
  const auto s = parse_scenarios(R"({"name": "g", "experiment": "gisin-telegraph", "params": {"beta": 0.5},
                                      "integrator": {"dt": 0.1, "t_end": 1}})");
  REQUIRE(s.size() == 1);
  CHECK(s[0].params.at("beta") == nlohmann::json::array({0.5, 0.0}));
  CHECK(s[0].params.at("eps").get<double>() == 0.1);
  CHECK(s[0].integrator->dt == 0.1);
}

TEST_CASE("every experiment has a bundled config that passes") {
  std::set<std::string> covered;
  const auto out = scratch("bundled");
  for (const auto& path : bundled_configs()) {
    CAPTURE(path.string());
    const auto scenarios = load_scenarios(path);
    const auto reports = run_scenarios(scenarios, out);
    for (const auto& r : reports) {
      CAPTURE(r.scenario);
      CHECK(status_name(r.status) == "pass");
      for (const auto& f : r.failures) MESSAGE(f);
      covered.insert(r.experiment);
      for (const auto& [name, rel] : r.series) CHECK(std::filesystem::exists(out / rel));
    }
    CHECK(exit_code(reports) == 0);
  }
  CHECK(covered.size() == experiment_names().size());
}

TEST_CASE("reports carry the named acceptance metrics") {
  const auto out = scratch("metrics");
  auto run = [&](const std::string& text) {
    const auto reports = run_scenarios(parse_scenarios(text), out);
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].status == Status::pass);
    return reports[0];
  };
  const RunReport census = run(R"({"name": "c", "experiment": "eigen-census", "params": {"E1": 0, "E2": 1, "eps": 1}})");
  CHECK(census.metrics.at("eigenvalue_count") == 3);
  CHECK(census.metrics.at("eigenvalue_0") == doctest::Approx(0.4375));
  CHECK(census.metrics.at("eigenvalue_1") == doctest::Approx(1.0));
  CHECK(census.metrics.at("eigenvalue_2") == doctest::Approx(2.0));

  const RunReport atom = run(R"({"name": "a", "experiment": "atom-inversion", "integrator": {"dt": 0.01, "t_end": 10}})");
  CHECK(atom.metrics.at("linf_vs_cos") < 1e-7);

  const RunReport gisin =
      run(R"({"name": "g", "experiment": "gisin-telegraph", "integrator": {"dt": 0.01, "t_end": 31.41592653589793}})");
  CHECK(gisin.metrics.at("signal_amplitude") == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-4));
  // Recomputing the error from the written files gives the reported metric.
  const double recomputed =
      compare_series(out / gisin.series.at("signal"), out / gisin.series.at("analytic"), SeriesNorm::linf);
  CHECK(recomputed == gisin.metrics.at("linf_vs_analytic"));

  const nlohmann::json j = report_json({census, atom, gisin});
  CHECK(j["scenarios"].size() == 3);
  CHECK(j["scenarios"][2]["status"] == "pass");
  CHECK(j["scenarios"][2]["series"]["signal"] == "g/signal.csv");
}

TEST_CASE("failed checks and runtime errors map to fail and error") {
  const auto out = scratch("status");
  const auto fail = run_scenarios(parse_scenarios(R"({"name": "w", "experiment": "no-signaling",
      "params": {"description": "weinberg", "expect": "no-signal"}, "integrator": {"dt": 0.01, "t_end": 10}})"),
                                  out);
  CHECK(fail[0].status == Status::fail);
  CHECK(fail[0].metrics.count("max_deviation") == 1);
  CHECK(exit_code(fail) == 1);

  const auto error = run_scenarios(parse_scenarios(R"({"name": "leak", "experiment": "atom-inversion",
      "params": {"n_max": 1}, "integrator": {"dt": 0.01, "t_end": 1}})"),
                                   out);
  CHECK(error[0].status == Status::error);
  CHECK(error[0].failures.at(0).find("n_max") != std::string::npos);
  CHECK(exit_code(error) == 2);
}

TEST_CASE("outputs select which series files are written") {
  const auto out = scratch("outputs");
  const auto r = run_scenarios(parse_scenarios(R"({"name": "g", "experiment": "gisin-telegraph",
      "integrator": {"dt": 0.05, "t_end": 31.41592653589793}, "outputs": ["signal"]})"),
                               out);
  CHECK(r[0].series.size() == 1);
  CHECK(std::filesystem::exists(out / "g" / "signal.csv"));
  CHECK_FALSE(std::filesystem::exists(out / "g" / "analytic.csv"));
}

TEST_CASE("re-running a scenario reproduces its files byte for byte") {
  const auto a = scratch("repro-a"), b = scratch("repro-b");
  for (const char* name : {"atom-inversion.json", "no-signaling.json", "eigenfrequency.json"}) {
    const auto scenarios = load_scenarios(std::filesystem::path(NLQM_CONFIG_DIR) / name);
    const auto ra = run_scenarios(scenarios, a);
    const auto rb = run_scenarios(scenarios, b);
    CHECK(report_json(ra).dump() == report_json(rb).dump());
    for (const auto& r : ra)
      for (const auto& [series, rel] : r.series) {
        CAPTURE(rel);
        CHECK(slurp(a / rel) == slurp(b / rel));
      }
  }
}
