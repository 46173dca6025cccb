#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace {

struct Result {
  int code;
  std::string output;
};

// Runs the command-line tool through the shell; stdout and stderr are merged.
Result nlqm(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " '" NLQM_BINARY "' " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::filesystem::path scratch(const std::string& name) {
  const std::filesystem::path dir = std::filesystem::path(NLQM_SCRATCH) / "cli" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::filesystem::path write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

const std::string kConfigs = NLQM_CONFIG_DIR;

}  // namespace

TEST_CASE("list-experiments prints every experiment") {
  const Result r = nlqm("list-experiments");
  CHECK(r.code == 0);
  for (const char* name : {"eigen-census", "diagonal-census", "eigenfrequency", "probability-inconsistency",
                           "gisin-telegraph", "mobility-telegraph", "no-signaling", "reduced-flow-variants",
                           "atom-inversion", "bloch-neoclassical", "intention-paradox"})
    CHECK(r.output.find(std::string(name) + "\n") != std::string::npos);
}

TEST_CASE("run writes reports and series under --out and exits 0 on pass") {
  const auto out = scratch("pass");
  const Result r = nlqm("run " + kConfigs + "/gisin-telegraph.json --out " + out.string());
  CHECK(r.code == 0);
  CHECK(r.output.find("pass  gisin (gisin-telegraph)") != std::string::npos);
  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(report["scenarios"][0]["status"] == "pass");
  CHECK(report["scenarios"][0]["metrics"]["signal_amplitude"].get<double>() ==
        doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-4));
  CHECK(std::filesystem::exists(out / "gisin" / "report.json"));
  const std::string csv = slurp(out / "gisin" / "signal.csv");
  CHECK(csv.rfind("t,sigma2\n0,", 0) == 0);
}

TEST_CASE("NLQM_OUT sets the default output directory") {
  const auto out = scratch("env");
  const Result r = nlqm("run " + kConfigs + "/probability-inconsistency.json", "NLQM_OUT='" + out.string() + "'");
  CHECK(r.code == 0);
  CHECK(std::filesystem::exists(out / "report.json"));
  // --out wins over the environment.
  const auto other = scratch("env-override");
  CHECK(nlqm("run " + kConfigs + "/probability-inconsistency.json --out " + other.string(),
             "NLQM_OUT='" + out.string() + "/unused'")
            .code == 0);
  CHECK(std::filesystem::exists(other / "report.json"));
  CHECK_FALSE(std::filesystem::exists(out / "unused"));
}

TEST_CASE("a failing scenario exits 1") {
  const auto dir = scratch("fail");
  const auto cfg = write(dir / "cfg.json", R"({"name": "w", "experiment": "no-signaling",
    "params": {"description": "weinberg", "expect": "no-signal"}, "integrator": {"dt": 0.01, "t_end": 10}})");
  const Result r = nlqm("run " + cfg.string() + " --out " + (dir / "out").string());
  CHECK(r.code == 1);
  CHECK(r.output.find("fail  w") != std::string::npos);
  CHECK(r.output.find("max_deviation") != std::string::npos);
}

TEST_CASE("config errors exit 2 with line and column or the field name") {
  const auto dir = scratch("errors");
  const auto syntax = write(dir / "syntax.json", "{\n  \"name\": \"x\",\n  \"experiment\": gisin\n}\n");
  Result r = nlqm("run " + syntax.string() + " --out " + (dir / "out").string());
  CHECK(r.code == 2);
  CHECK(r.output.find("line 3, column 17") != std::string::npos);

  const auto schema = write(dir / "schema.json", R"({"name": "x", "experiment": "gisin-telegraph",
    "params": {"eps": [1]}, "integrator": {"dt": 0.01, "t_end": 1}})");
  r = nlqm("run " + schema.string() + " --out " + (dir / "out").string());
  CHECK(r.code == 2);
  CHECK(r.output.find("params.eps") != std::string::npos);

  r = nlqm("run " + (dir / "missing.json").string());
  CHECK(r.code == 2);
  r = nlqm("frobnicate");
  CHECK(r.code == 2);
}

TEST_CASE("runtime errors inside a scenario exit 2") {
  const auto dir = scratch("runtime");
  const auto cfg = write(dir / "cfg.json", R"({"name": "leak", "experiment": "atom-inversion",
    "params": {"n_max": 1}, "integrator": {"dt": 0.01, "t_end": 1}})");
  const Result r = nlqm("run " + cfg.string() + " --out " + (dir / "out").string());
  CHECK(r.code == 2);
  CHECK(r.output.find("n_max") != std::string::npos);
}

TEST_CASE("repeated runs are byte-identical") {
  const auto a = scratch("repro-a"), b = scratch("repro-b");
  for (const char* cfg : {"/mobility-telegraph.json", "/intention-paradox.json"}) {
    CHECK(nlqm("run " + kConfigs + cfg + " --out " + a.string()).code == 0);
    CHECK(nlqm("run " + kConfigs + cfg + " --out " + b.string()).code == 0);
    CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  }
  for (const auto& entry : std::filesystem::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), a);
    CAPTURE(rel.string());
    CHECK(slurp(entry.path()) == slurp(b / rel));
  }
}

TEST_CASE("compare prints the norm and sets the exit code") {
  const auto dir = scratch("compare");
  const auto x = write(dir / "x.csv", "t,v\n0,1\n1,2\n");
  const auto y = write(dir / "y.csv", "t,v\n0,1.5\n1,2.5\n");
  const auto z = write(dir / "z.csv", "t,v\n0,1\n2,2\n");
  Result r = nlqm("compare " + x.string() + " " + x.string() + " --norm linf");
  CHECK(r.code == 0);
  CHECK(r.output == "linf 0\n");
  r = nlqm("compare " + x.string() + " " + y.string() + " --norm linf");
  CHECK(r.code == 1);
  CHECK(r.output == "linf 0.5\n");
  r = nlqm("compare " + x.string() + " " + y.string() + " --norm l2 --tol 1");
  CHECK(r.code == 0);
  CHECK(r.output == "l2 0.70710678118654757\n");
  r = nlqm("compare " + x.string() + " " + z.string() + " --norm linf");
  CHECK(r.code == 2);
  CHECK(r.output.find("time grids differ") != std::string::npos);
  r = nlqm("compare " + x.string() + " " + y.string() + " --norm l1");
  CHECK(r.code == 2);
}

TEST_CASE("compare reproduces the reported gisin error") {
  const auto out = scratch("gisin");
  REQUIRE(nlqm("run " + kConfigs + "/gisin-telegraph.json --out " + out.string()).code == 0);
  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  const double metric = report["scenarios"][0]["metrics"]["linf_vs_analytic"].get<double>();
  const Result r = nlqm("compare " + (out / "gisin/signal.csv").string() + " " + (out / "gisin/analytic.csv").string() +
                        " --norm linf --tol 1");
  CHECK(r.code == 0);
  CHECK(std::stod(r.output.substr(5)) == metric);
}
