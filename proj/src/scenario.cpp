#include "nlqm/scenario.hpp"

#include <cmath>
#include <fstream>
#include <future>
#include <regex>
#include <set>
#include <sstream>

#include "nlqm/atom.hpp"
#include "nlqm/composite.hpp"
#include "nlqm/dynamics.hpp"
#include "nlqm/series.hpp"
#include "nlqm/spectra.hpp"

namespace nlqm {

using nlohmann::json;

namespace {

const std::vector<std::pair<Experiment, std::string>>& experiment_table() {
  static const std::vector<std::pair<Experiment, std::string>> table = {
      {Experiment::eigen_census, "eigen-census"},
      {Experiment::diagonal_census, "diagonal-census"},
      {Experiment::eigenfrequency, "eigenfrequency"},
      {Experiment::probability_inconsistency, "probability-inconsistency"},
      {Experiment::gisin_telegraph, "gisin-telegraph"},
      {Experiment::mobility_telegraph, "mobility-telegraph"},
      {Experiment::no_signaling, "no-signaling"},
      {Experiment::reduced_flow_variants, "reduced-flow-variants"},
      {Experiment::atom_inversion, "atom-inversion"},
      {Experiment::bloch_neoclassical, "bloch-neoclassical"},
      {Experiment::intention_paradox, "intention-paradox"},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [e, n] : experiment_table()) out.push_back(n);
    return out;
  }();
  return names;
}

std::string experiment_name(Experiment e) {
  for (const auto& [x, n] : experiment_table())
    if (x == e) return n;
  return "?";
}

std::optional<Experiment> parse_experiment(const std::string& name) {
  for (const auto& [x, n] : experiment_table())
    if (n == name) return x;
  return std::nullopt;
}

std::string status_name(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    default: return "error";
  }
}

// ---------------------------------------------------------------------------
// Schema

namespace {

enum class Kind { number, integer, boolean, string, complex, number_list, complex_list };

struct Field {
  std::string name;
  Kind kind;
  std::optional<json> fallback;  ///< nullopt: required
  std::vector<std::string> choices = {};
};

struct ExperimentSchema {
  std::vector<Field> params;
  bool needs_integrator;
  std::vector<std::string> series;
};

json cplx(double re, double im = 0.0) { return json::array({re, im}); }

const ExperimentSchema& schema(Experiment e) {
  static const std::map<Experiment, ExperimentSchema> schemas = {
      {Experiment::eigen_census,
       {{{"family", Kind::string, "canonical", {"canonical", "power_2n", "cubic", "singular"}},
         {"E1", Kind::number, 0.0},
         {"E2", Kind::number, 1.0},
         {"eps", Kind::number, 1.0},
         {"N", Kind::integer, 1},
         {"amplitude_steps", Kind::integer, 32},
         {"phase_steps", Kind::integer, 16},
         {"bisect_threshold", Kind::boolean, false},
         {"residual_tolerance", Kind::number, 1e-10},
         {"tolerance", Kind::number, 1e-8}},
        false,
        {}}},
      {Experiment::diagonal_census,
       {{{"family", Kind::string, "canonical", {"canonical", "cubic", "power_2n", "singular", "bilinear"}},
         {"E1", Kind::number, 0.0},
         {"E2", Kind::number, 0.0},
         {"eps", Kind::number, 1.0},
         {"N", Kind::integer, 1},
         {"state", Kind::complex_list, std::nullopt},
         {"tolerance", Kind::number, 1e-7}},
        false,
        {}}},
      {Experiment::eigenfrequency,
       {{{"family", Kind::string, "canonical", {"canonical", "cubic"}},
         {"E1", Kind::number, 0.0},
         {"E2", Kind::number, 1.0},
         {"eps", Kind::number, 0.5},
         {"state", Kind::complex_list, json::array({cplx(0.8), cplx(0.6)})},
         {"tolerance", Kind::number, 1e-6}},
        true,
        {"amplitudes", "invariants"}}},
      {Experiment::probability_inconsistency,
       {{{"E", Kind::number, 1.0},
         {"eps", Kind::number, 0.1},
         {"s2", Kind::number, 0.5},
         {"tolerance", Kind::number, 1e-12}},
        false,
        {}}},
      {Experiment::gisin_telegraph,
       {{{"alpha", Kind::complex, cplx(std::sqrt(3.0) / 2)},
         {"beta", Kind::complex, cplx(0.5)},
         {"eps", Kind::number, 0.1},
         {"E1", Kind::number, 0.0},
         {"E2", Kind::number, 0.0},
         {"tolerance", Kind::number, 1e-6},
         {"amplitude_tolerance", Kind::number, 1e-4}},
        true,
        {"signal", "analytic"}}},
      {Experiment::mobility_telegraph,
       {{{"eps", Kind::number, 0.1},
         {"theta", Kind::number, M_PI / 4},
         {"tolerance", Kind::number, 1e-4},
         {"symmetry_tolerance", Kind::number, 1e-9}},
        true,
        {"signal", "analytic"}}},
      {Experiment::no_signaling,
       {{{"description", Kind::string, "polchinski", {"weinberg", "polchinski"}},
         {"variant", Kind::string, "plain", {"plain", "purity-weighted"}},
         {"alpha", Kind::complex, cplx(std::sqrt(3.0) / 2)},
         {"beta", Kind::complex, cplx(0.5)},
         {"eps", Kind::number, 0.1},
         {"E1", Kind::number, 0.0},
         {"E2", Kind::number, 0.0},
         {"expect", Kind::string, "auto", {"auto", "no-signal", "signal"}},
         {"signal_threshold", Kind::number, 0.1},
         {"tolerance", Kind::number, 1e-9}},
        true,
        {"deviation"}}},
      {Experiment::reduced_flow_variants,
       {{{"populations", Kind::number_list, json::array({0.75, 0.25})},
         {"weights", Kind::number_list, json::array({1.0, -1.0})},
         {"coherence", Kind::complex, cplx(1e-4)},
         {"tolerance", Kind::number, 1e-6},
         {"pure_tolerance", Kind::number, 1e-10}},
        true,
        {"coherence", "pure"}}},
      {Experiment::atom_inversion,
       {{{"description", Kind::string, "polchinski", {"polchinski", "weinberg-fock"}},
         {"omega_levels", Kind::number_list, json::array({0.0, 1.0})},
         {"eps_levels", Kind::number_list, json::array({0.0, 0.0})},
         {"omega", Kind::number, 1.0},
         {"q", Kind::complex, cplx(1.0)},
         {"n_max", Kind::integer, 4},
         {"level", Kind::integer, 0},
         {"photons", Kind::integer, 1},
         {"reference", Kind::string, "auto", {"auto", "cos", "elliptic", "none"}},
         {"tolerance", Kind::number, 0.0},
         {"ode_tolerance", Kind::number, 1e-3}},
        true,
        {"inversion", "reference"}}},
      {Experiment::bloch_neoclassical,
       {{{"delta", Kind::number, 0.0},
         {"rabi", Kind::number, 1.0},
         {"A", Kind::number, 0.0},
         {"eps", Kind::number, 0.0},
         {"r0", Kind::number_list, json::array({0.0, 0.0, -1.0})},
         {"form", Kind::string, "jaynes", {"jaynes", "rotating-frame"}},
         {"neo_check", Kind::boolean, true},
         {"tolerance", Kind::number, 1e-6}},
        true,
        {"bloch", "neo"}}},
      {Experiment::intention_paradox,
       {{{"lambda2", Kind::number, 0.5}, {"f", Kind::number, 1.0}, {"tolerance", Kind::number, 1e-8}},
        true,
        {"rho", "analytic"}}},
  };
  return schemas.at(e);
}

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::number: return "a number";
    case Kind::integer: return "an integer";
    case Kind::boolean: return "a boolean";
    case Kind::string: return "a string";
    case Kind::complex: return "a complex number (number or [re, im])";
    case Kind::number_list: return "an array of numbers";
    default: return "an array of complex numbers";
  }
}

bool is_complex(const json& v) {
  return v.is_number() || (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number());
}

json normalize_complex(const json& v) { return v.is_number() ? cplx(v.get<double>()) : v; }

json check_field(const Field& f, const json& v, const std::string& path) {
  auto bad = [&] { return ConfigError(path + ": expected " + kind_name(f.kind)); };
  switch (f.kind) {
    case Kind::number:
      if (!v.is_number() || !std::isfinite(v.get<double>())) throw bad();
      return v;
    case Kind::integer:
      if (!v.is_number_integer()) throw bad();
      return v;
    case Kind::boolean:
      if (!v.is_boolean()) throw bad();
      return v;
    case Kind::string:
      if (!v.is_string()) throw bad();
      if (!f.choices.empty() &&
          std::find(f.choices.begin(), f.choices.end(), v.get<std::string>()) == f.choices.end()) {
        std::string all;
        for (const auto& c : f.choices) all += (all.empty() ? "" : ", ") + c;
        throw ConfigError(path + ": '" + v.get<std::string>() + "' is not one of " + all);
      }
      return v;
    case Kind::complex:
      if (!is_complex(v)) throw bad();
      return normalize_complex(v);
    case Kind::number_list: {
      if (!v.is_array() || v.empty()) throw bad();
      for (const auto& x : v)
        if (!x.is_number()) throw bad();
      return v;
    }
    case Kind::complex_list: {
      if (!v.is_array() || v.empty()) throw bad();
      json out = json::array();
      for (const auto& x : v) {
        if (!is_complex(x)) throw bad();
        out.push_back(normalize_complex(x));
      }
      return out;
    }
  }
  throw bad();
}

void require_object(const json& v, const std::string& path) {
  if (!v.is_object()) throw ConfigError(path + ": expected an object");
}

std::string join(const std::string& prefix, const std::string& key) { return prefix.empty() ? key : prefix + "." + key; }

Scenario parse_one(const json& obj, const std::string& prefix) {
  require_object(obj, prefix.empty() ? "<root>" : prefix);
  static const std::set<std::string> top = {"name", "experiment", "params", "integrator", "outputs"};
  for (const auto& [key, value] : obj.items())
    if (!top.count(key)) throw ConfigError(join(prefix, key) + ": unknown field");

  Scenario s;
  if (!obj.contains("name")) throw ConfigError(join(prefix, "name") + ": required field missing");
  if (!obj["name"].is_string()) throw ConfigError(join(prefix, "name") + ": expected a string");
  s.name = obj["name"].get<std::string>();
  static const std::regex safe("[A-Za-z0-9_.-]+");
  if (!std::regex_match(s.name, safe) || s.name == "." || s.name == "..")
    throw ConfigError(join(prefix, "name") + ": use letters, digits, '_', '-' and '.' only");

  if (!obj.contains("experiment")) throw ConfigError(join(prefix, "experiment") + ": required field missing");
  if (!obj["experiment"].is_string()) throw ConfigError(join(prefix, "experiment") + ": expected a string");
  const auto e = parse_experiment(obj["experiment"].get<std::string>());
  if (!e) throw ConfigError(join(prefix, "experiment") + ": unknown experiment '" + obj["experiment"].get<std::string>() + "'");
  s.experiment = *e;
  const ExperimentSchema& sch = schema(*e);

  const json params = obj.contains("params") ? obj["params"] : json::object();
  const std::string ppath = join(prefix, "params");
  require_object(params, ppath);
  for (const auto& [key, value] : params.items()) {
    const bool known = std::any_of(sch.params.begin(), sch.params.end(), [&](const Field& f) { return f.name == key; });
    if (!known) throw ConfigError(join(ppath, key) + ": unknown field for experiment " + experiment_name(*e));
  }
  s.params = json::object();
  for (const Field& f : sch.params) {
    const std::string fpath = join(ppath, f.name);
    if (params.contains(f.name)) {
      s.params[f.name] = check_field(f, params[f.name], fpath);
    } else if (f.fallback) {
      s.params[f.name] = *f.fallback;
    } else {
      throw ConfigError(fpath + ": required field missing");
    }
  }

  const std::string ipath = join(prefix, "integrator");
  if (obj.contains("integrator")) {
    const json& in = obj["integrator"];
    require_object(in, ipath);
    for (const auto& [key, value] : in.items())
      if (key != "dt" && key != "t_end") throw ConfigError(join(ipath, key) + ": unknown field");
    Integrator it;
    for (const char* key : {"dt", "t_end"}) {
      if (!in.contains(key)) throw ConfigError(join(ipath, key) + ": required field missing");
      if (!in[key].is_number()) throw ConfigError(join(ipath, key) + ": expected a number");
    }
    it.dt = in["dt"].get<double>();
    it.t_end = in["t_end"].get<double>();
    if (!(it.dt > 0) || !std::isfinite(it.dt)) throw ConfigError(join(ipath, "dt") + ": must be positive");
    if (!(it.t_end > 0) || !std::isfinite(it.t_end)) throw ConfigError(join(ipath, "t_end") + ": must be positive");
    if (it.t_end / it.dt > 5e6) throw ConfigError(join(ipath, "dt") + ": more than 5e6 steps requested");
    s.integrator = it;
  } else if (sch.needs_integrator) {
    throw ConfigError(ipath + ": required field missing");
  }

  if (obj.contains("outputs")) {
    const std::string opath = join(prefix, "outputs");
    if (!obj["outputs"].is_array()) throw ConfigError(opath + ": expected an array of series names");
    for (std::size_t i = 0; i < obj["outputs"].size(); ++i) {
      const json& v = obj["outputs"][i];
      const std::string ipath2 = opath + "[" + std::to_string(i) + "]";
      if (!v.is_string()) throw ConfigError(ipath2 + ": expected a string");
      if (std::find(sch.series.begin(), sch.series.end(), v.get<std::string>()) == sch.series.end())
        throw ConfigError(ipath2 + ": experiment " + experiment_name(*e) + " has no series '" + v.get<std::string>() + "'");
      s.outputs.push_back(v.get<std::string>());
    }
  }
  return s;
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

std::vector<Scenario> parse_scenarios(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& err) {
    const auto [line, col] = line_column(text, err.byte);
    std::string reason = err.what();
    const auto pos = reason.find(": ");
    if (pos != std::string::npos) reason = reason.substr(pos + 2);
    std::ostringstream os;
    os << "config parse error at line " << line << ", column " << col << ": " << reason;
    throw ConfigError(os.str());
  }
  std::vector<Scenario> out;
  if (root.is_object() && root.contains("scenarios")) {
    for (const auto& [key, value] : root.items())
      if (key != "scenarios") throw ConfigError(key + ": unknown field");
    if (!root["scenarios"].is_array() || root["scenarios"].empty())
      throw ConfigError("scenarios: expected a non-empty array");
    for (std::size_t i = 0; i < root["scenarios"].size(); ++i)
      out.push_back(parse_one(root["scenarios"][i], "scenarios[" + std::to_string(i) + "]"));
  } else {
    out.push_back(parse_one(root, ""));
  }
  std::set<std::string> names;
  for (const auto& s : out)
    if (!names.insert(s.name).second) throw ConfigError("name: duplicate scenario name '" + s.name + "'");
  return out;
}

std::vector<Scenario> load_scenarios(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_scenarios(buf.str());
}

// ---------------------------------------------------------------------------
// Runners

namespace {

double num(const json& p, const char* key) { return p.at(key).get<double>(); }
long integer(const json& p, const char* key) { return p.at(key).get<long>(); }
std::string str(const json& p, const char* key) { return p.at(key).get<std::string>(); }
std::complex<double> complex_of(const json& v) { return {v[0].get<double>(), v[1].get<double>()}; }
std::complex<double> cnum(const json& p, const char* key) { return complex_of(p.at(key)); }
std::vector<double> numbers(const json& p, const char* key) { return p.at(key).get<std::vector<double>>(); }
VectorXc state_of(const json& p, const char* key) {
  const json& v = p.at(key);
  VectorXc out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out(i) = complex_of(v[i]);
  return out;
}

struct Context {
  const Scenario& scenario;
  std::filesystem::path out_dir;
  RunReport& report;

  void metric(const std::string& name, double v) { report.metrics[name] = v; }
  /// Records the check; a failed check turns the run into a fail.
  void check(bool ok, const std::string& what) {
    if (!ok) report.failures.push_back(what);
  }
  void series(const std::string& name, const SeriesTable& table) {
    const auto& sel = scenario.outputs;
    if (!sel.empty() && std::find(sel.begin(), sel.end(), name) == sel.end()) return;
    const std::filesystem::path rel = std::filesystem::path(scenario.name) / (name + ".csv");
    write_csv(out_dir / rel, table);
    report.series[name] = rel.generic_string();
  }
  const Integrator& integrator() const { return *scenario.integrator; }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void below(Context& c, const std::string& metric, double value, double bound) {
  c.metric(metric, value);
  c.check(value < bound, metric + " = " + fmt(value) + " is not below " + fmt(bound));
}

HomogeneousObservable family(const json& p) {
  const std::string f = str(p, "family");
  const double e1 = num(p, "E1"), e2 = num(p, "E2"), eps = num(p, "eps");
  if (f == "canonical") return catalog::canonical(e1, e2, eps);
  if (f == "cubic") return catalog::cubic(e1, e2, eps);
  if (f == "power_2n") {
    if (integer(p, "N") < 1) throw ConfigError("params.N: must be at least 1");
    return catalog::power_2n(e1, e2, eps, static_cast<int>(integer(p, "N")));
  }
  if (f == "singular") return catalog::singular();
  MatrixXc m = MatrixXc::Zero(2, 2);
  m(0, 0) = e1;
  m(1, 1) = e2;
  m += eps * pauli(1);
  return catalog::bilinear(m, "bilinear");
}

// --- eigen-census -----------------------------------------------------------

struct ClosedSpectrum {
  std::vector<double> values;  // ascending
};

std::optional<ClosedSpectrum> closed_spectrum(const json& p) {
  const std::string f = str(p, "family");
  if (f == "singular") return ClosedSpectrum{{-1.0, 1.0}};
  if (f != "canonical" && f != "power_2n") return std::nullopt;
  const double e1 = num(p, "E1"), e2 = num(p, "E2"), eps = num(p, "eps");
  const int n = f == "canonical" ? 1 : static_cast<int>(integer(p, "N"));
  ClosedSpectrum out{{e1 + eps, e2 + eps}};
  if (eps != 0.0 && std::abs(e2 - e1) < 4 * n * std::abs(eps)) {
    const double x = std::abs((e2 - e1) / (4 * n * eps));
    out.values.push_back(0.5 * (e1 + e2) + eps * (1 - 2 * n) * std::pow(x, 2.0 * n / (2 * n - 1)));
  }
  std::sort(out.values.begin(), out.values.end());
  return out;
}

void run_eigen_census(Context& c) {
  const json& p = c.scenario.params;
  EigenSearchOptions opt;
  opt.amplitude_steps = static_cast<int>(integer(p, "amplitude_steps"));
  opt.phase_steps = static_cast<int>(integer(p, "phase_steps"));
  if (opt.amplitude_steps < 2 || opt.phase_steps < 1) throw ConfigError("params.amplitude_steps: grid too small");
  const HomogeneousObservable obs = family(p);
  const EigenSearchResult res = find_eigenstates(obs, 2, opt);

  c.metric("eigenvalue_count", static_cast<double>(res.eigenstates.size()));
  c.metric("failed_seeds", res.failed_seeds);
  double max_res = 0, max_h = 0;
  for (std::size_t i = 0; i < res.eigenstates.size(); ++i) {
    const auto& r = res.eigenstates[i];
    c.metric("eigenvalue_" + std::to_string(i), r.lambda);
    max_res = std::max(max_res, r.residual);
    max_h = std::max(max_h, std::abs(r.lambda - obs(r.state)));
  }
  below(c, "max_residual", max_res, num(p, "residual_tolerance"));
  below(c, "max_lambda_vs_h", max_h, 1e-8);

  if (const auto closed = closed_spectrum(p)) {
    c.metric("expected_count", static_cast<double>(closed->values.size()));
    c.check(closed->values.size() == res.eigenstates.size(),
            "found " + std::to_string(res.eigenstates.size()) + " eigenstates, closed form has " +
                std::to_string(closed->values.size()));
    if (closed->values.size() == res.eigenstates.size()) {
      double err = 0;
      for (std::size_t i = 0; i < closed->values.size(); ++i)
        err = std::max(err, std::abs(closed->values[i] - res.eigenstates[i].lambda));
      below(c, "max_error_vs_closed_form", err, num(p, "tolerance"));
    }
  }

  if (p.at("bisect_threshold").get<bool>()) {
    if (str(p, "family") != "power_2n" && str(p, "family") != "canonical")
      throw ConfigError("params.bisect_threshold: only for the canonical and power_2n families");
    const double e1 = num(p, "E1"), e2 = num(p, "E2");
    const int n = str(p, "family") == "canonical" ? 1 : static_cast<int>(integer(p, "N"));
    const double expected = std::abs(e2 - e1) / (4 * n);
    if (expected == 0) throw ConfigError("params.E2: the threshold needs E1 != E2");
    auto count = [&](double eps) {
      const HomogeneousObservable o =
          n == 1 ? catalog::canonical(e1, e2, eps) : catalog::power_2n(e1, e2, eps, n);
      return find_eigenstates(o, 2, opt).eigenstates.size();
    };
    double lo = 0.5 * expected, hi = 2 * expected;
    c.check(count(lo) == 2 && count(hi) == 3, "threshold is not bracketed by [E/2, 2E] of the closed form");
    while (hi - lo > 1e-7 * expected) {
      const double mid = (lo + hi) / 2;
      (count(mid) >= 3 ? hi : lo) = mid;
    }
    c.metric("threshold_eps", (lo + hi) / 2);
    c.metric("threshold_expected", expected);
    below(c, "threshold_error", std::abs((lo + hi) / 2 - expected), 1e-6);
  }
}

// --- diagonal-census --------------------------------------------------------

// Direct symbolic Hessian of diag(E1, E2) + eps <s3>^2 / n.
MatrixXc canonical_hessian(double e1, double e2, double eps, const VectorXc& psi) {
  const double n = psi.squaredNorm();
  const double s = std::norm(psi(0)) - std::norm(psi(1));
  const double k[2] = {1.0, -1.0};
  MatrixXc m(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const std::complex<double> pp = psi(a) * std::conj(psi(b));
      std::complex<double> v = 2 * k[a] * k[b] * pp / n - 2 * s * k[a] * pp / (n * n) - 2 * s * k[b] * pp / (n * n) +
                               2 * s * s * pp / (n * n * n);
      if (a == b) v += 2 * s * k[a] / n - s * s / (n * n);
      m(a, b) = eps * v;
    }
  m(0, 0) += e1;
  m(1, 1) += e2;
  return m;
}

void run_diagonal_census(Context& c) {
  const json& p = c.scenario.params;
  const VectorXc psi = state_of(p, "state");
  if (psi.size() != 2) throw ConfigError("params.state: the catalog families are two-dimensional");
  if (!(psi.squaredNorm() > 0)) throw ConfigError("params.state: zero vector");
  const HomogeneousObservable obs = family(p);
  const StateVector sv(psi);
  const auto values = diagonal_values(obs, sv);
  for (std::size_t i = 0; i < values.size(); ++i) c.metric("diagonal_value_" + std::to_string(i), values[i]);
  const MatrixXc a = nonlinear_operator(obs, psi).matrix();
  const double tol = num(p, "tolerance");
  below(c, "mean_consistency_error", std::abs(psi.dot(a * psi).real() - obs(psi)) / psi.squaredNorm(), tol);
  below(c, "zero_homogeneity_error", (nonlinear_operator(obs, VectorXc(2.0 * psi)).matrix() - a).cwiseAbs().maxCoeff(),
        1e-8);
  if (str(p, "family") == "canonical")
    below(c, "linf_vs_closed_form",
          (canonical_hessian(num(p, "E1"), num(p, "E2"), num(p, "eps"), psi) - a).cwiseAbs().maxCoeff(), tol);
}

// --- eigenfrequency ---------------------------------------------------------

void run_eigenfrequency(Context& c) {
  const json& p = c.scenario.params;
  const VectorXc psi = state_of(p, "state");
  if (psi.size() != 2) throw ConfigError("params.state: two components expected");
  if (!(psi.squaredNorm() > 0)) throw ConfigError("params.state: zero vector");
  const HomogeneousObservable obs = family(p);
  const double e1 = num(p, "E1"), e2 = num(p, "E2"), eps = num(p, "eps");
  const double s = (std::norm(psi(0)) - std::norm(psi(1))) / psi.squaredNorm();
  const bool cubic = str(p, "family") == "cubic";
  const double expected[2] = {cubic ? e1 + eps * (3 * s * s - 2 * s * s * s) : e1 + eps * (2 * s - s * s),
                              cubic ? e2 + eps * (-3 * s * s - 2 * s * s * s) : e2 + eps * (-2 * s - s * s)};

  NlsOptions opt;
  opt.hamiltonian_function = obs;
  const Trajectory traj =
      integrate_nls(flow_generator(obs), StateVector(psi), c.integrator().t_end, c.integrator().dt, opt);
  const auto freqs = eigenfrequencies(traj, num(p, "tolerance"));

  double err = 0, wsum = 0;
  for (const auto& f : freqs) {
    const std::string k = std::to_string(f.component);
    c.metric("omega_" + k, f.omega);
    c.metric("expected_omega_" + k, expected[f.component]);
    c.metric("weight_" + k, f.weight);
    err = std::max(err, std::abs(f.omega - expected[f.component]));
    wsum += f.weight;
  }
  below(c, "linf_vs_analytic", err, num(p, "tolerance"));
  below(c, "weight_sum_error", std::abs(wsum - psi.squaredNorm()), 1e-6);

  SeriesTable amps = make_table(traj.times);
  for (Index k = 0; k < 2; ++k) {
    std::vector<double> re, im;
    for (const auto& st : traj.states) {
      re.push_back(st(k).real());
      im.push_back(st(k).imag());
    }
    amps.add("re_psi" + std::to_string(k), re);
    amps.add("im_psi" + std::to_string(k), im);
  }
  c.series("amplitudes", amps);
  SeriesTable inv = make_table(traj.times);
  inv.add("norm", traj.recorded.at("norm"));
  inv.add("H", traj.recorded.at("H"));
  c.series("invariants", inv);
}

// --- probability-inconsistency ----------------------------------------------

void run_probability(Context& c) {
  const json& p = c.scenario.params;
  const double e = num(p, "E"), eps = num(p, "eps"), s2 = num(p, "s2");
  if (s2 < 0 || s2 > 1) throw ConfigError("params.s2: must lie in [0, 1]");
  const double s = std::sqrt(s2);
  VectorXc psi(2);
  psi << std::sqrt((1 + s) / 2), std::sqrt((1 - s) / 2);
  const HomogeneousObservable obs = catalog::canonical_degenerate(e, eps);
  const auto res = moment_probabilities(obs, StateVector(psi), MomentMethod::first_moment);
  const double p1 = res.requested.probabilities[0], p2 = res.other.probabilities[0];
  const double c1 = first_moment_probability(s), c2 = star_square_probability(e, eps, s);
  const double tol = num(p, "tolerance");
  c.metric("p_first_moment", p1);
  c.metric("p_star_square", p2);
  c.metric("closed_first_moment", c1);
  c.metric("closed_star_square", c2);
  c.metric("discrepancy", res.discrepancy);
  c.metric("expected_discrepancy", c1 - c2);
  below(c, "first_moment_error", std::abs(p1 - c1), tol);
  below(c, "star_square_error", std::abs(p2 - c2), tol);
  below(c, "discrepancy_error", std::abs(res.discrepancy - (c1 - c2)), tol);
}

// --- telegraphs -------------------------------------------------------------

void telegraph_series(Context& c, const TelegraphReport& r) {
  SeriesTable sig = make_table(r.times);
  sig.add("sigma2", r.signal);
  c.series("signal", sig);
  SeriesTable ana = make_table(r.times);
  ana.add("sigma2", r.analytic);
  c.series("analytic", ana);
}

void run_gisin(Context& c) {
  const json& p = c.scenario.params;
  TelegraphParams tp;
  tp.alpha = cnum(p, "alpha");
  tp.beta = cnum(p, "beta");
  if (std::abs(std::norm(tp.alpha) + std::norm(tp.beta) - 1) > 1e-10)
    throw ConfigError("params.alpha: |alpha|^2 + |beta|^2 must equal 1");
  tp.eps = num(p, "eps");
  tp.e1 = num(p, "E1");
  tp.e2 = num(p, "E2");
  const TelegraphReport r = gisin_telegraph(tp, c.integrator().t_end, c.integrator().dt);
  below(c, "linf_vs_analytic", r.linf_error, num(p, "tolerance"));
  c.metric("signal_amplitude", r.signal_amplitude);
  c.metric("expected_amplitude", r.expected_amplitude);
  c.metric("signal_omega", r.signal_omega);
  c.metric("expected_omega", r.expected_omega);
  below(c, "amplitude_error", std::abs(r.signal_amplitude - r.expected_amplitude), num(p, "amplitude_tolerance"));
  below(c, "norm_drift", r.norm_drift, 1e-7);
  below(c, "h_drift", r.h_drift, 1e-7);
  telegraph_series(c, r);
}

void run_mobility(Context& c) {
  const json& p = c.scenario.params;
  const double eps = num(p, "eps");
  const TelegraphReport r = mobility_telegraph(eps, num(p, "theta"), c.integrator().t_end, c.integrator().dt);
  const double sym = num(p, "symmetry_tolerance");
  below(c, "max_abs_sigma1", r.max_abs_sigma1, sym);
  below(c, "max_abs_sigma3", r.max_abs_sigma3, sym);
  c.metric("linf_vs_analytic", r.linf_error);
  c.metric("signal_amplitude", r.signal_amplitude);
  c.metric("expected_omega", r.expected_omega);
  c.metric("max_dev_from_mixed", r.max_dev_from_mixed);
  if (r.expected_omega > 0) {
    c.metric("fitted_omega", r.signal_omega);
    below(c, "omega_error", std::abs(r.signal_omega - r.expected_omega), num(p, "tolerance"));
  } else if (eps == 0) {
    below(c, "max_dev_from_mixed", r.max_dev_from_mixed, sym);
  }
  telegraph_series(c, r);
}

void run_no_signaling(Context& c) {
  const json& p = c.scenario.params;
  CompositeDescription desc;
  desc.kind = str(p, "description") == "weinberg" ? DescriptionKind::weinberg : DescriptionKind::polchinski;
  desc.variant = str(p, "variant") == "plain" ? catalog::DensityVariant::plain : catalog::DensityVariant::purity_weighted;
  const std::complex<double> alpha = cnum(p, "alpha"), beta = cnum(p, "beta");
  if (std::abs(std::norm(alpha) + std::norm(beta) - 1) > 1e-10)
    throw ConfigError("params.alpha: |alpha|^2 + |beta|^2 must equal 1");
  const double eps = num(p, "eps");
  const HomogeneousObservable h = two_qubit_hamiltonian(desc, num(p, "E1"), num(p, "E2"), eps);
  const NoSignalingReport r =
      no_signaling_check(h, sender_matrix(alpha, beta), c.integrator().t_end, c.integrator().dt);
  std::string expect = str(p, "expect");
  if (expect == "auto")
    expect = desc.kind == DescriptionKind::polchinski || eps == 0.0 ? "no-signal" : "signal";
  if (expect == "no-signal") {
    below(c, "max_deviation", r.max_deviation, num(p, "tolerance"));
  } else {
    c.metric("max_deviation", r.max_deviation);
    c.check(r.max_deviation > num(p, "signal_threshold"),
            "max_deviation = " + fmt(r.max_deviation) + " does not exceed " + fmt(num(p, "signal_threshold")));
  }
  SeriesTable t = make_table(r.times);
  t.add("deviation", r.deviation);
  c.series("deviation", t);
}

// --- reduced-flow-variants --------------------------------------------------

void run_reduced_flow(Context& c) {
  const json& p = c.scenario.params;
  const auto pops = numbers(p, "populations");
  const auto weights = numbers(p, "weights");
  if (pops.size() < 2) throw ConfigError("params.populations: need at least two levels");
  if (weights.size() != pops.size()) throw ConfigError("params.weights: one weight per population required");
  for (double x : pops)
    if (x < 0) throw ConfigError("params.populations: entries must be non-negative");
  const Index d = static_cast<Index>(pops.size());
  MatrixXc e = MatrixXc::Zero(d, d);
  MatrixXc diag = MatrixXc::Zero(d, d);
  for (Index k = 0; k < d; ++k) {
    e(k, k) = weights[k];
    diag(k, k) = pops[k];
  }
  const HermitianOperator epshat(e);
  const DensityMatrix rho_diag(diag);
  const auto plain = catalog::DensityVariant::plain, weighted = catalog::DensityVariant::purity_weighted;

  const double rp = coherence_rate(plain, epshat, rho_diag, 0, 1);
  const double rw = coherence_rate(weighted, epshat, rho_diag, 0, 1);
  const double tr = rho_diag.trace();
  const double expected = rho_diag.purity() / (tr * tr);
  c.metric("rate_plain", rp);
  c.metric("rate_weighted", rw);
  c.metric("expected_ratio", expected);
  if (rp != 0) {
    c.metric("rate_ratio", rw / rp);
    below(c, "rate_ratio_error", std::abs(rw / rp - expected), 1e-12);
  }

  // A diagonal matrix has no phase to track; a small coherence makes it visible.
  MatrixXc probe = diag;
  probe(0, 1) = cnum(p, "coherence");
  probe(1, 0) = std::conj(probe(0, 1));
  const DensityMatrix rho_probe(probe);
  const Integrator& in = c.integrator();
  const auto a = polchinski_reduced_flow(plain, epshat, rho_probe, in.t_end, in.dt);
  const auto b = polchinski_reduced_flow(weighted, epshat, rho_probe, in.t_end, in.dt);
  const auto& pa = a.recorded.at("phase01");
  const auto& pb = b.recorded.at("phase01");
  if (std::abs(probe(0, 1)) > 0 && pa.back() != pa.front()) {
    const double measured = (pb.back() - pb.front()) / (pa.back() - pa.front());
    c.metric("measured_ratio", measured);
    below(c, "ratio_error", std::abs(measured - expected), num(p, "tolerance"));
  }
  SeriesTable coh = make_table(a.times);
  coh.add("phase_plain", pa);
  coh.add("phase_weighted", pb);
  c.series("coherence", coh);

  // Pure state with the same populations.
  VectorXc psi(d);
  for (Index k = 0; k < d; ++k) psi(k) = std::sqrt(pops[k]) * std::exp(std::complex<double>(0, 0.3 * k));
  const DensityMatrix pure = DensityMatrix::projector(StateVector(psi));
  const auto pa2 = polchinski_reduced_flow(plain, epshat, pure, in.t_end, in.dt);
  const auto pb2 = polchinski_reduced_flow(weighted, epshat, pure, in.t_end, in.dt);
  double diff = 0;
  for (std::size_t i = 0; i < pa2.rho.size(); ++i)
    diff = std::max(diff, (pa2.rho[i] - pb2.rho[i]).cwiseAbs().maxCoeff());
  below(c, "pure_linf", diff, num(p, "pure_tolerance"));
  SeriesTable pt = make_table(pa2.times);
  pt.add("re_rho01_plain", pa2.recorded.at("re_rho01"));
  pt.add("im_rho01_plain", pa2.recorded.at("im_rho01"));
  pt.add("re_rho01_weighted", pb2.recorded.at("re_rho01"));
  pt.add("im_rho01_weighted", pb2.recorded.at("im_rho01"));
  c.series("pure", pt);
}

// --- atom-inversion ---------------------------------------------------------

void run_atom(Context& c) {
  const json& p = c.scenario.params;
  AtomFieldParams ap;
  ap.omega_levels = numbers(p, "omega_levels");
  ap.eps_levels = numbers(p, "eps_levels");
  ap.omega = num(p, "omega");
  ap.q = cnum(p, "q");
  ap.n_max = static_cast<int>(integer(p, "n_max"));
  try {
    ap.validate();
  } catch (const ConfigError& err) {
    throw ConfigError(std::string("params: ") + err.what());
  }
  const long level = integer(p, "level"), photons = integer(p, "photons");
  if (level < 0 || level >= ap.levels()) throw ConfigError("params.level: out of range");
  if (photons < 0 || photons > ap.n_max) throw ConfigError("params.photons: out of range for n_max");
  const bool weinberg = str(p, "description") == "weinberg-fock";
  const AtomFieldModel model =
      build_atom_field(weinberg ? AtomDescription::weinberg_fock : AtomDescription::polchinski, ap);
  const InversionSeries s = inversion_trajectory(model, fock_state(ap, level, photons), c.integrator().t_end,
                                                 c.integrator().dt);
  const double n_plus_half = s.n_mean + 0.5;
  const double big_omega = ap.rabi(n_plus_half);
  c.metric("Omega", big_omega);
  c.metric("varsigma", ap.varsigma());
  c.metric("n_drift", s.n_drift);
  c.metric("max_top_fock", s.max_top_fock);
  below(c, "norm_drift", s.norm_drift, 1e-7);
  below(c, "h_drift", s.h_drift, 1e-7);
  c.check(s.n_drift < 1e-9, "n_drift = " + fmt(s.n_drift) + " is not below 1e-09");

  const bool two_level = level <= 1;
  const double w0 = level == 0 ? -1.0 : (level == 1 ? 1.0 : 0.0);
  const bool linear = std::all_of(ap.eps_levels.begin(), ap.eps_levels.end(), [](double x) { return x == 0.0; });
  // Weinberg's Fock-sliced form shifts each level by eps_k^2 only.
  const bool cos_exact = linear || (weinberg && ap.levels() == 2);
  const bool resonant = std::abs(ap.detuning_prime()) < 1e-12;

  std::string ref = str(p, "reference");
  if (ref == "auto") {
    if (two_level && resonant && cos_exact)
      ref = "cos";
    else if (two_level && resonant && !weinberg && level == 0 && ap.levels() == 2)
      ref = "elliptic";
    else
      ref = "none";
  }
  std::vector<double> reference;
  if (ref == "cos") {
    if (!two_level || !resonant) throw ConfigError("params.reference: cos needs a resonant two-level initial state");
    for (double t : s.times) reference.push_back(w0 * std::cos(big_omega * t));
  } else if (ref == "elliptic") {
    if (weinberg || level != 0 || !resonant || ap.levels() != 2)
      throw ConfigError("params.reference: elliptic needs the polchinski build, two levels, level 0 and zero primed detuning");
    for (double t : s.times) reference.push_back(elliptic_inversion(big_omega, ap.varsigma(), t));
  }
  if (!reference.empty()) {
    double err = 0;
    for (std::size_t i = 0; i < s.times.size(); ++i) err = std::max(err, std::abs(s.w[i] - reference[i]));
    double tol = num(p, "tolerance");
    if (tol <= 0) tol = ref == "cos" ? 1e-7 : 1e-4;
    below(c, ref == "cos" ? "linf_vs_cos" : "linf_vs_elliptic", err, tol);
    SeriesTable rt = make_table(s.times);
    rt.add("w", reference);
    c.series("reference", rt);
  }
  c.metric("regime_code", s.regime == "linear" ? 0 : s.regime == "Omega>sigma" ? 1 : s.regime == "Omega=sigma" ? 2 : 3);
  if (!weinberg && ap.levels() == 2 && two_level) {
    const OdeResidual r = inversion_ode_check(s, ap, w0 / 2, s.n_mean);
    below(c, "ode_residual", r.linf, num(p, "ode_tolerance"));
  }
  SeriesTable wt = make_table(s.times);
  wt.add("w", s.w);
  for (const auto& [name, values] : s.level_phases) wt.add(name, values);
  for (const auto& [name, values] : s.level_moduli) wt.add(name, values);
  c.series("inversion", wt);
}

// --- bloch-neoclassical -----------------------------------------------------

void run_bloch(Context& c) {
  const json& p = c.scenario.params;
  BlochParams bp;
  bp.delta = num(p, "delta");
  bp.omega = num(p, "rabi");
  bp.a = num(p, "A");
  bp.eps = num(p, "eps");
  bp.form = str(p, "form") == "jaynes" ? BlochForm::jaynes : BlochForm::rotating_frame;
  const auto r0v = numbers(p, "r0");
  if (r0v.size() != 3) throw ConfigError("params.r0: expected [u, v, w]");
  const BlochState r0{r0v[0], r0v[1], r0v[2]};
  const double len0 = r0.u * r0.u + r0.v * r0.v + r0.w * r0.w;
  if (len0 > 1 + 1e-9) throw ConfigError("params.r0: |r| must not exceed 1");
  const Integrator& in = c.integrator();
  const BlochTrajectory tr = integrate_bloch(bp, r0, in.t_end, in.dt);
  const std::size_t n = tr.times.size();

  std::vector<double> len(n);
  double len_drift = 0;
  for (std::size_t i = 0; i < n; ++i) {
    len[i] = tr.u[i] * tr.u[i] + tr.v[i] * tr.v[i] + tr.w[i] * tr.w[i];
    len_drift = std::max(len_drift, std::abs(len[i] - len0));
  }
  const bool conserving = bp.a == 0.0 || bp.form == BlochForm::rotating_frame;
  if (conserving)
    below(c, "length_drift", len_drift, 1e-9);
  else
    c.metric("length_drift", len_drift);

  if (bp.form == BlochForm::jaynes && bp.a != 0.0 && n >= 5) {
    // Five-point derivative of |r|^2 against -2 A w v^2.
    const double h = tr.times[1] - tr.times[0];
    double worst = 0;
    for (std::size_t i = 2; i + 2 < n; ++i) {
      const double d = (-len[i + 2] + 8 * len[i + 1] - 8 * len[i - 1] + len[i - 2]) / (12 * h);
      worst = std::max(worst, std::abs(d + 2 * bp.a * tr.w[i] * tr.v[i] * tr.v[i]));
    }
    below(c, "rate_residual", worst, num(p, "tolerance"));
  }
  if (bp.a == 0 && bp.eps == 0 && bp.delta == 0 && r0.u == 0 && r0.v == 0 && r0.w == -1) {
    double err = 0;
    for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(tr.w[i] + std::cos(bp.omega * tr.times[i])));
    below(c, "linf_vs_cos", err, 1e-7);
  }
  SeriesTable bt = make_table(tr.times);
  bt.add("u", tr.u);
  bt.add("v", tr.v);
  bt.add("w", tr.w);
  c.series("bloch", bt);

  if (p.at("neo_check").get<bool>() && bp.omega == 0 && bp.delta == 0 && std::abs(len0 - 1) < 1e-9) {
    // Spin averages of the neo-Hamiltonian flow against the rotating-frame Bloch system.
    const double theta = std::acos(std::clamp(r0.w, -1.0, 1.0));
    const double phi = std::atan2(r0.v, r0.u);
    VectorXc psi(2);
    psi << std::cos(theta / 2), std::exp(std::complex<double>(0, phi)) * std::sin(theta / 2);
    NlsOptions opt;
    for (int k = 1; k <= 3; ++k) {
      const MatrixXc sk = pauli(k);
      opt.observers[std::string(1, "uvw"[k - 1])] = [sk](const VectorXc& v) {
        return v.dot(sk * v).real() / v.squaredNorm();
      };
    }
    const Trajectory nls = integrate_nls(neo_hamiltonian(bp.a, bp.eps, MatrixXc::Zero(2, 2)), StateVector(psi),
                                         in.t_end, in.dt, opt);
    BlochParams rf = bp;
    rf.form = BlochForm::rotating_frame;
    const BlochTrajectory ref = integrate_bloch(rf, r0, in.t_end, in.dt);
    double err = 0;
    for (std::size_t i = 0; i < n; ++i) {
      err = std::max(err, std::abs(nls.recorded.at("u")[i] - ref.u[i]));
      err = std::max(err, std::abs(nls.recorded.at("v")[i] - ref.v[i]));
      err = std::max(err, std::abs(nls.recorded.at("w")[i] - ref.w[i]));
    }
    below(c, "neo_vs_bloch", err, 1e-6);
    SeriesTable nt = make_table(nls.times);
    nt.add("u", nls.recorded.at("u"));
    nt.add("v", nls.recorded.at("v"));
    nt.add("w", nls.recorded.at("w"));
    c.series("neo", nt);
  }
}

// --- intention-paradox ------------------------------------------------------

void run_paradox(Context& c) {
  const json& p = c.scenario.params;
  ParadoxParams pp;
  pp.lambda2 = num(p, "lambda2");
  if (pp.lambda2 < 0 || pp.lambda2 > 1) throw ConfigError("params.lambda2: must lie in [0, 1]");
  pp.lambda1 = 1 - pp.lambda2;
  pp.f = num(p, "f");
  pp.t = c.integrator().t_end;
  const ParadoxReport r = intention_paradox(pp, c.integrator().dt);
  const double tol = num(p, "tolerance");
  below(c, "linf_vs_analytic", r.max_deviation, tol);
  below(c, "sigma1_drift", r.max_sigma1_drift, 1e-10);
  below(c, "heisenberg_mismatch", r.heisenberg_mismatch, tol);
  c.metric("phase", 2 * pp.f * pp.t);
  c.metric("sigma3_initial", r.sigma3_initial);
  c.metric("sigma3_final", r.sigma3_final);
  c.metric("p_up_initial", r.p_up_initial);
  c.metric("p_up_final", r.p_up_final);
  const double expected = std::cos(2 * pp.lambda2 * pp.f * pp.t);
  c.metric("expected_ratio", expected);
  if (r.sigma3_initial != 0) {
    c.metric("sigma3_ratio", r.sigma3_final / r.sigma3_initial);
    below(c, "sigma3_ratio_error", std::abs(r.sigma3_final / r.sigma3_initial - expected), tol);
  } else {
    below(c, "sigma3_change", std::abs(r.sigma3_final - r.sigma3_initial), tol);
  }
  auto table = [&](const std::vector<MatrixXc>& rho) {
    SeriesTable t = make_table(r.times);
    std::vector<double> a, b, cc, d;
    for (const auto& m : rho) {
      a.push_back(m(0, 0).real());
      b.push_back(m(0, 1).real());
      cc.push_back(m(0, 1).imag());
      d.push_back(m(1, 1).real());
    }
    t.add("re_rho00", a);
    t.add("re_rho01", b);
    t.add("im_rho01", cc);
    t.add("re_rho11", d);
    return t;
  };
  c.series("rho", table(r.rho));
  c.series("analytic", table(r.analytic));
}

}  // namespace

RunReport run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir) {
  RunReport report;
  report.scenario = scenario.name;
  report.experiment = experiment_name(scenario.experiment);
  Context c{scenario, out_dir, report};
  try {
    std::filesystem::create_directories(out_dir / scenario.name);
    switch (scenario.experiment) {
      case Experiment::eigen_census: run_eigen_census(c); break;
      case Experiment::diagonal_census: run_diagonal_census(c); break;
      case Experiment::eigenfrequency: run_eigenfrequency(c); break;
      case Experiment::probability_inconsistency: run_probability(c); break;
      case Experiment::gisin_telegraph: run_gisin(c); break;
      case Experiment::mobility_telegraph: run_mobility(c); break;
      case Experiment::no_signaling: run_no_signaling(c); break;
      case Experiment::reduced_flow_variants: run_reduced_flow(c); break;
      case Experiment::atom_inversion: run_atom(c); break;
      case Experiment::bloch_neoclassical: run_bloch(c); break;
      case Experiment::intention_paradox: run_paradox(c); break;
    }
    report.status = report.failures.empty() ? Status::pass : Status::fail;
  } catch (const std::exception& err) {
    report.status = Status::error;
    report.failures.push_back(err.what());
  }
  return report;
}

std::vector<RunReport> run_scenarios(const std::vector<Scenario>& scenarios, const std::filesystem::path& out_dir) {
  std::vector<std::future<RunReport>> jobs;
  for (const auto& s : scenarios)
    jobs.push_back(std::async(std::launch::async, [&s, &out_dir] { return run_scenario(s, out_dir); }));
  std::vector<RunReport> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

json report_json(const std::vector<RunReport>& reports) {
  json arr = json::array();
  for (const auto& r : reports) {
    json metrics = json::object();
    for (const auto& [k, v] : r.metrics) metrics[k] = std::isfinite(v) ? json(v) : json(nullptr);
    arr.push_back({{"name", r.scenario},
                   {"experiment", r.experiment},
                   {"status", status_name(r.status)},
                   {"metrics", metrics},
                   {"series", r.series},
                   {"failures", r.failures}});
  }
  return {{"scenarios", arr}};
}

int exit_code(const std::vector<RunReport>& reports) {
  int code = 0;
  for (const auto& r : reports) {
    if (r.status == Status::error) return 2;
    if (r.status == Status::fail) code = 1;
  }
  return code;
}

}  // namespace nlqm
