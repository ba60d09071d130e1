// gpahcs: sweeps parameter grids for the generalized photon-added
// hypergeometric coherent states, emits CSV data, and runs the numerical
// verification suites.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gpahcs/fock.hpp"
#include "gpahcs/measure.hpp"
#include "gpahcs/optics.hpp"
#include "gpahcs/states.hpp"
#include "gpahcs/thermal.hpp"

using json = nlohmann::json;
using namespace gpahcs;

namespace {

constexpr int kExitVerifyFailure = 1;
constexpr int kExitUsage = 2;

struct RunConfig {
  std::string family_kind = "hermite";
  std::optional<double> alpha;
  std::optional<double> beta_param;
  double mu = 2.0;
  std::string f_spec = "const:1";
  int m = 0;
  std::vector<int> p_list = {0, 1, 2, 3};
  double zmin = 0.01;
  double zmax = 8.0;
  int steps = 200;
  double beta = 1.0;
  std::string out;
  double tol = 1e-8;
  int nmax = -1;  // pnd window top; default p + 30
};

// Flat key = value file with [family] / [state] / [thermal] / [run] sections.
void load_config_file(const std::string& path, RunConfig& cfg,
                      std::string& task) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError(
          "--config",
          path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    const std::string id = section + "." + key;
    try {
      if (id == "family.kind") cfg.family_kind = val;
      else if (id == "family.alpha") cfg.alpha = std::stod(val);
      else if (id == "family.beta") cfg.beta_param = std::stod(val);
      else if (id == "family.mu") cfg.mu = std::stod(val);
      else if (id == "family.f") cfg.f_spec = val;
      else if (id == "family.c") cfg.f_spec = "const:" + val;
      else if (id == "state.m") cfg.m = std::stoi(val);
      else if (id == "state.p") {
        cfg.p_list.clear();
        std::stringstream ss(val);
        std::string tok;
        while (std::getline(ss, tok, ','))
          cfg.p_list.push_back(std::stoi(trim(tok)));
      } else if (id == "state.zmin") cfg.zmin = std::stod(val);
      else if (id == "state.zmax") cfg.zmax = std::stod(val);
      else if (id == "state.steps") cfg.steps = std::stoi(val);
      else if (id == "state.nmax") cfg.nmax = std::stoi(val);
      else if (id == "thermal.beta") cfg.beta = std::stod(val);
      else if (id == "run.task") task = val;
      else if (id == "run.out") cfg.out = val;
      else if (id == "run.tol") cfg.tol = std::stod(val);
      else
        throw CLI::ValidationError("--config", path + ": unknown key " + id);
    } catch (const std::invalid_argument&) {
      throw CLI::ValidationError("--config",
                                 path + ": bad value for " + id + ": " + val);
    }
  }
}

FamilySpec build_family(const RunConfig& cfg) {
  if (cfg.family_kind == "hermite") return FamilySpec::hermite();
  if (cfg.family_kind == "laguerre")
    return FamilySpec::laguerre(cfg.alpha.value_or(0.0));
  const bool have_ab = cfg.alpha.has_value() && cfg.beta_param.has_value();
  if (cfg.family_kind == "jacobi")
    return have_ab ? FamilySpec::jacobi(*cfg.alpha, *cfg.beta_param)
                   : FamilySpec::jacobi_mu(cfg.mu);
  if (cfg.family_kind == "hypergeom" || cfg.family_kind == "hypergeometric")
    return have_ab ? FamilySpec::hypergeometric(*cfg.alpha, *cfg.beta_param)
                   : FamilySpec::hypergeometric_mu(cfg.mu);
  throw CLI::ValidationError("--family", "unknown family " + cfg.family_kind);
}

FChoice build_f(const RunConfig& cfg) {
  if (cfg.f_spec == "sqrtlinear" || cfg.f_spec == "sqrt_linear")
    return FChoice::sqrt_linear();
  if (cfg.f_spec.rfind("const", 0) == 0) {
    double c = 1.0;
    const auto colon = cfg.f_spec.find(':');
    if (colon != std::string::npos) c = std::stod(cfg.f_spec.substr(colon + 1));
    return FChoice::constant(c);
  }
  throw CLI::ValidationError(
      "--f", "expected const[:c] or sqrtlinear, got " + cfg.f_spec);
}

void validate(const RunConfig& cfg) {
  if (cfg.steps < 1)
    throw CLI::ValidationError("--steps", "need at least one grid point");
  if (cfg.p_list.empty()) throw CLI::ValidationError("--p", "empty p list");
  for (int p : cfg.p_list)
    if (p < 0) throw CLI::ValidationError("--p", "p must be nonnegative");
  if (cfg.m < 0) throw CLI::ValidationError("--m", "m must be nonnegative");
  if (!(cfg.zmin <= cfg.zmax))
    throw CLI::ValidationError("--zmin", "zmin > zmax");
  if (!(cfg.tol > 0.0 && cfg.tol <= 1e-2))
    throw CLI::ValidationError("--tol", "tolerance must lie in (0, 1e-2]");
  if (!(cfg.beta > 0.0))
    throw CLI::ValidationError("--beta", "beta must be positive");
}

std::vector<double> grid(const RunConfig& cfg) {
  std::vector<double> g;
  if (cfg.steps == 1) {
    g.push_back(cfg.zmin);
    return g;
  }
  for (int i = 0; i < cfg.steps; ++i)
    g.push_back(cfg.zmin + (cfg.zmax - cfg.zmin) * i / (cfg.steps - 1.0));
  return g;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw CLI::ValidationError("--out", "cannot open " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

StateSpec state_at(const RunConfig& cfg, const FamilySpec& fam,
                   const FChoice& f, double absz, int p) {
  StateSpec s;
  s.family = fam;
  s.f = f;
  s.m = cfg.m;
  s.p = p;
  s.z = {absz, 0.0};
  return s;
}

int run_stats(const RunConfig& cfg) {
  const FamilySpec fam = build_family(cfg);
  const FChoice f = build_f(cfg);
  Output out(cfg.out);
  out.stream() << "abs_z,p,Q,g2\n";
  for (int p : cfg.p_list) {
    for (double az : grid(cfg)) {
      StateSpec s = state_at(cfg, fam, f, az, p);
      StatsReport r = photon_statistics(s, StatsMethod::series);
      out.stream() << fmt(az) << ',' << p << ',' << fmt(r.mandel_q) << ','
                   << fmt(r.g2) << '\n';
    }
  }
  return 0;
}

int run_pnd(const RunConfig& cfg) {
  const FamilySpec fam = build_family(cfg);
  const FChoice f = build_f(cfg);
  Output out(cfg.out);
  out.stream() << "n,p,P_n\n";
  // single-amplitude task: the grid start doubles as |z|
  const double az = cfg.zmin;
  for (int p : cfg.p_list) {
    const int top = cfg.nmax >= 0 ? cfg.nmax : p + 30;
    StateSpec s = state_at(cfg, fam, f, az, p);
    std::vector<double> probs = pnd(s, top);
    for (int n = p; n <= top; ++n)
      out.stream() << n << ',' << p << ',' << fmt(probs[n]) << '\n';
  }
  return 0;
}

int run_weight(const RunConfig& cfg) {
  const FamilySpec fam = build_family(cfg);
  const FChoice f = build_f(cfg);
  Output out(cfg.out);
  out.stream() << "x,p,omega_p\n";
  for (int p : cfg.p_list) {
    MomentProblem mp = make_moment_problem(fam, f, cfg.m, p);
    for (double x : grid(cfg))
      out.stream() << fmt(x) << ',' << p << ',' << fmt(weight(mp, x)) << '\n';
  }
  return 0;
}

int run_snr(const RunConfig& cfg) {
  const FamilySpec fam = build_family(cfg);
  const FChoice f = build_f(cfg);
  Output out(cfg.out);
  out.stream() << "abs_z,p,snr_ratio\n";
  for (int p : cfg.p_list) {
    for (double az : grid(cfg)) {
      StateSpec s = state_at(cfg, fam, f, az, p);
      out.stream() << fmt(az) << ',' << p << ',' << fmt(snr_ratio(s)) << '\n';
    }
  }
  return 0;
}

int run_thermal(const RunConfig& cfg) {
  const FamilySpec fam = build_family(cfg);
  const FChoice f = build_f(cfg);
  Output out(cfg.out);
  out.stream() << "beta,quantity,value\n";
  for (int p : cfg.p_list) {
    ThermalSpec ts;
    ts.family = fam;
    ts.f = f;
    ts.beta = cfg.beta;
    ts.m = cfg.m;
    ts.p = p;
    ThermalStats st = thermal_stats(ts);
    auto row = [&](const std::string& name, double v) {
      out.stream() << fmt(cfg.beta) << ',' << name << "_p" << p << ','
                   << fmt(v) << '\n';
    };
    row("Z", partition_function(ts));
    row("nbar", ts.nbar());
    row("mean_n", st.mean);
    row("mean_n2", st.mean2);
    row("g2", st.g2);
    row("Q", st.mandel_q);
    row("mean_n_closed", st.mean_closed);
    row("mean_n2_closed", st.mean2_closed);
    row("g2_closed", st.g2_closed);
    row("Q_closed", st.mandel_q_closed);
    row("closed_form_discrepancy", st.max_rel_discrepancy);
  }
  return 0;
}

int run_verify(const RunConfig& cfg) {
  const FamilySpec fam = build_family(cfg);
  const FChoice f = build_f(cfg);
  json suites = json::array();
  std::vector<std::string> failures;
  auto record = [&](const std::string& name, bool passed, json details) {
    details["name"] = name;
    details["passed"] = passed;
    suites.push_back(details);
    if (!passed) failures.push_back(name);
  };

  // ladder algebra on a D = 50 truncation
  try {
    AlgebraReport rep = check_algebra(FockSpace(fam, cfg.m, 50));
    record("algebra", rep.max_deviation() < 1e-10,
           {{"max_deviation", rep.max_deviation()}});
  } catch (const std::exception& e) {
    record("algebra", false, {{"error", e.what()}});
  }

  // Stieltjes moments through the Meijer G quadrature
  for (int p : cfg.p_list) {
    try {
      MomentProblem mp = make_moment_problem(fam, f, cfg.m, p);
      MomentReport rep = verify_moments(mp, 8, cfg.tol);
      record("moments_p" + std::to_string(p), rep.max_rel_error < 1e-6,
             {{"max_rel_error", rep.max_rel_error}});
    } catch (const std::exception& e) {
      record("moments_p" + std::to_string(p), false, {{"error", e.what()}});
    }
  }

  // reproducing kernel: hermiticity, diagonal, idempotence
  try {
    const int p = cfg.p_list.front();
    MomentProblem mp = make_moment_problem(fam, f, cfg.m, p);
    std::unordered_map<double, double> wcache;
    auto weight_fn = [&](double x) {
      auto it = wcache.find(x);
      if (it != wcache.end()) return it->second;
      const double v = weight(mp, x);
      wcache.emplace(x, v);
      return v;
    };
    std::vector<std::pair<std::complex<double>, std::complex<double>>> pairs =
        {{{0.9, 0.3}, {-0.2, 0.8}},
         {{1.3, 0.0}, {0.4, -0.6}},
         {{0.2, -1.1}, {1.0, 0.5}}};
    KernelReport rep =
        check_kernel_properties(fam, f, cfg.m, p, weight_fn, pairs);
    record("kernel",
           rep.max_hermiticity_dev < 1e-12 && rep.max_diag_dev < 1e-12 &&
               rep.max_idempotence_residual < 1e-6,
           {{"max_hermiticity_dev", rep.max_hermiticity_dev},
            {"max_diag_dev", rep.max_diag_dev},
            {"max_idempotence_residual", rep.max_idempotence_residual}});
  } catch (const std::exception& e) {
    record("kernel", false, {{"error", e.what()}});
  }

  // label continuity at quadratic rate
  try {
    StateSpec s = state_at(cfg, fam, f, 1.0, cfg.p_list.front());
    std::vector<double> deltas;
    for (int k = 1; k <= 6; ++k) deltas.push_back(std::pow(10.0, -k));
    ContinuityReport rep = label_continuity_check(s, deltas);
    bool quadratic = rep.monotone_decreasing;
    for (size_t i = 2; i < rep.rows.size(); ++i) {
      const double ratio =
          rep.rows[i - 1].dist_sq_direct / rep.rows[i].dist_sq_direct;
      if (std::abs(ratio - 100.0) > 20.0) quadratic = false;
    }
    record("continuity", quadratic && rep.max_identity_gap < 1e-10,
           {{"monotone", rep.monotone_decreasing},
            {"max_identity_gap", rep.max_identity_gap}});
  } catch (const std::exception& e) {
    record("continuity", false, {{"error", e.what()}});
  }

  // optics dual routes (number_moments raises on > 1e-9 disagreement)
  try {
    for (int p : cfg.p_list)
      for (double az : {0.5, 2.0, 5.0})
        number_moments(state_at(cfg, fam, f, az, p));
    record("optics_dual_route", true, {{"grid", "|z| in {0.5, 2, 5}"}});
  } catch (const std::exception& e) {
    record("optics_dual_route", false, {{"error", e.what()}});
  }

  // thermal layer: traces, P-function normalization, internal consistency
  try {
    ThermalSpec ts;
    ts.family = fam;
    ts.f = f;
    ts.beta = cfg.beta;
    ts.m = cfg.m;
    ts.p = cfg.p_list.front();
    MomentProblem mp = make_moment_problem(fam, f, cfg.m, ts.p);
    const double tr = husimi_trace(ts, mp);
    const double pn = p_function_normalization(ts, mp);
    ThermalStats st = thermal_stats(ts);
    const double qc = std::abs(st.mandel_q - st.mean * (st.g2 - 1.0));
    record("thermal",
           std::abs(tr - 1.0) < 1e-6 && std::abs(pn - 1.0) < 1e-6 &&
               qc < 1e-12 && st.variance >= 0.0,
           {{"husimi_trace", tr},
            {"p_function_normalization", pn},
            {"closed_form_discrepancy", st.max_rel_discrepancy}});
  } catch (const std::exception& e) {
    record("thermal", false, {{"error", e.what()}});
  }

  json report = {{"task", "verify"},
                 {"family", to_string(fam.kind)},
                 {"f", cfg.f_spec},
                 {"m", cfg.m},
                 {"suites", suites},
                 {"failures", failures},
                 {"all_passed", failures.empty()}};
  Output out(cfg.out);
  out.stream() << report.dump(2) << '\n';
  return failures.empty() ? 0 : kExitVerifyFailure;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  std::string task;

  // the config file (if any) loads first so that flags override it
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") {
      try {
        load_config_file(argv[i + 1], cfg, task);
      } catch (const CLI::Error& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
      }
    }

  CLI::App app{"generalized photon-added hypergeometric coherent states"};
  app.add_option("task", task,
                 "one of: stats, pnd, weight, snr, thermal, verify");
  std::string config_path;
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--family", cfg.family_kind,
                 "hermite | laguerre | jacobi | hypergeom");
  app.add_option("--mu", cfg.mu, "family parameter mu (= alpha + beta + 2)");
  app.add_option("--m", cfg.m, "derivative order m");
  app.add_option("--p", cfg.p_list, "added-photon counts")->delimiter(',');
  app.add_option("--f", cfg.f_spec, "const[:c] | sqrtlinear");
  app.add_option("--zmin", cfg.zmin, "grid start");
  app.add_option("--zmax", cfg.zmax, "grid end");
  app.add_option("--steps", cfg.steps, "grid points");
  app.add_option("--beta", cfg.beta, "inverse temperature");
  app.add_option("--out", cfg.out, "output path (default stdout)");
  app.add_option("--tol", cfg.tol, "quadrature/series tolerance knob");
  app.add_option("--nmax", cfg.nmax, "top Fock label for the pnd task");

  try {
    app.parse(argc, argv);
    validate(cfg);
    if (task.empty())
      throw CLI::ValidationError("task", "missing task argument");
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (task == "stats") return run_stats(cfg);
    if (task == "pnd") return run_pnd(cfg);
    if (task == "weight") return run_weight(cfg);
    if (task == "snr") return run_snr(cfg);
    if (task == "thermal") return run_thermal(cfg);
    if (task == "verify") return run_verify(cfg);
    std::cerr << "unknown task: " << task << '\n';
    return kExitUsage;
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  } catch (const domain_error& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitVerifyFailure;
  }
}
