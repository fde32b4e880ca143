// nahmlab: scenario runner for the nahm library.
//
// Exit codes: 0 ok, 2 configuration error, 3 numerical failure.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "nahm/io.hpp"
#include "nahm/nahm.hpp"

namespace {

using nahm::io::json;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
  std::string algebra = "su2";
  int n = 2;
  std::optional<double> kappa;
  double a = 1.0;
  double b = 0.0;
  double t_start = 0.0;
  double t_end = 1.0;
  int steps = 2000;
  unsigned seed = 0;
  double scale = 2.0;
  std::string format = "json";
  std::string output = "-";
  std::string init;

  // subcommand extras
  std::string param;
  double from = 0.0;
  double to = 0.0;
  int points = 0;
  std::string tau;
  double amplitude = 1e-3;
  double horizon = 20.0;
  double shift = 2.0;
  double tol_low = 1e-6;
  double tol_high = 1e-3;
};

json echo(const ScenarioConfig& c, const std::string& cmd) {
  json j{{"command", cmd},
         {"algebra", c.algebra},
         {"n", c.n},
         {"kappa", c.kappa ? json(*c.kappa) : json(nullptr)},
         {"a", c.a},
         {"b", c.b},
         {"t_start", c.t_start},
         {"t_end", c.t_end},
         {"steps", c.steps},
         {"seed", c.seed},
         {"scale", c.scale},
         {"format", c.format},
         {"init", c.init.empty() ? json(nullptr) : json(c.init)}};
  if (cmd == "sweep") {
    j["param"] = c.param;
    j["from"] = c.from;
    j["to"] = c.to;
    j["points"] = c.points;
  }
  if (cmd == "stability") {
    j["tau"] = c.tau;
    j["amplitude"] = c.amplitude;
    j["horizon"] = c.horizon;
  }
  if (cmd == "factorize") j["shift"] = c.shift;
  if (cmd == "degeneracy" || cmd == "sweep") {
    j["tol_low"] = c.tol_low;
    j["tol_high"] = c.tol_high;
  }
  return j;
}

void add_common(CLI::App* sub, ScenarioConfig& c) {
  sub->add_option("--algebra", c.algebra, "su2 (elliptic data) or un (random u(n) data)")
      ->check(CLI::IsMember({"su2", "un"}));
  sub->add_option("--n", c.n, "matrix size for --algebra un")->check(CLI::Range(1, 16));
  sub->add_option("--kappa", c.kappa, "elliptic modulus in [0,1]");
  sub->add_option("--a", c.a, "elliptic scale a");
  sub->add_option("--b", c.b, "elliptic shift b");
  sub->add_option("--t-start", c.t_start);
  sub->add_option("--t-end", c.t_end);
  sub->add_option("--steps", c.steps)->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed);
  sub->add_option("--scale", c.scale, "inner product scale s in <X,Y> = -s Re tr(XY)")->check(CLI::PositiveNumber);
  sub->add_option("--format", c.format)->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--output,-o", c.output, "output path, - for stdout");
  sub->add_option("--init", c.init, "JSON file with T0..T3 initial data")->check(CLI::ExistingFile);
}

/// Initial data: --init file, su(2) elliptic data, or seeded random u(n) data.
nahm::Quadruple initial_data(const ScenarioConfig& c, std::vector<std::string>& warnings) {
  if (!c.init.empty()) {
    std::ifstream in(c.init);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("cannot parse " + c.init + ": " + e.what());
    }
    return nahm::io::quadruple_from_json(j, &warnings);
  }
  if (c.algebra == "su2") {
    if (!c.kappa) throw ConfigError("--kappa is required for --algebra su2 without --init");
    return nahm::su2_closed_form(c.a, c.b, *c.kappa, c.t_start);
  }
  std::mt19937_64 rng(c.seed);
  const auto n = static_cast<Eigen::Index>(c.n);
  return {nahm::LieElement::Zero(n, n), nahm::random_lie(n, rng, 0.5), nahm::random_lie(n, rng, 0.5),
          nahm::random_lie(n, rng, 0.5)};
}

bool is_elliptic(const ScenarioConfig& c) { return c.init.empty() && c.algebra == "su2"; }

/// Solution on [t_start, t_end]: the closed form for elliptic data, RK4 otherwise.
nahm::Trajectory solution(const ScenarioConfig& c, std::vector<std::string>& warnings) {
  if (is_elliptic(c)) {
    if (!c.kappa) throw ConfigError("--kappa is required for --algebra su2 without --init");
    return nahm::su2_closed_form_trajectory(c.a, c.b, *c.kappa, c.t_start, c.t_end, c.steps);
  }
  nahm::SolverConfig sc;
  sc.steps = c.steps;
  return nahm::integrate(initial_data(c, warnings), c.t_start, c.t_end, sc);
}

void emit(const ScenarioConfig& c, const std::string& text) {
  if (c.output == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(c.output);
  if (!out) throw ConfigError("cannot open output " + c.output);
  out << text;
}

json header(const ScenarioConfig& c, const std::string& cmd, const std::vector<std::string>& warnings) {
  json j{{"config", echo(c, cmd)}, {"scale", c.scale}};
  if (!warnings.empty()) j["warnings"] = warnings;
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return j;
}

void validate_times(const ScenarioConfig& c) {
  if (!(c.t_end > c.t_start)) throw ConfigError("--t-end must exceed --t-start");
  if (c.steps < 5) throw ConfigError("--steps must be at least 5");
  if (c.kappa && !(*c.kappa >= 0.0 && *c.kappa <= 1.0)) throw ConfigError("--kappa must lie in [0,1]");
}

// ---------------------------------------------------------------------------

int cmd_integrate(const ScenarioConfig& c) {
  validate_times(c);
  std::vector<std::string> warnings;
  const nahm::InnerProduct ip(c.scale);
  nahm::SolverConfig sc;
  sc.steps = c.steps;
  const nahm::Trajectory tr = nahm::integrate(initial_data(c, warnings), c.t_start, c.t_end, sc);
  json report = header(c, "integrate", warnings);
  report["conservation"] = nahm::io::to_json(nahm::conserved_report(tr, ip));
  report["equation_residual"] = nahm::equation_residual(tr);
  if (c.format == "csv") {
    std::ostringstream os;
    nahm::io::write_csv(os, tr);
    emit(c, os.str());
    if (c.output == "-") {
      std::cerr << report.dump(2) << "\n";
    } else {
      std::ofstream(c.output + ".report.json") << report.dump(2) << "\n";
    }
    return 0;
  }
  report["trajectory"] = nahm::io::to_json(tr);
  emit(c, report.dump(2) + "\n");
  return 0;
}

int cmd_closed_form(const ScenarioConfig& c) {
  validate_times(c);
  if (!c.kappa) throw ConfigError("--kappa is required");
  const nahm::Trajectory tr = nahm::su2_closed_form_trajectory(c.a, c.b, *c.kappa, c.t_start, c.t_end, c.steps);
  if (c.format == "csv") {
    std::ostringstream os;
    nahm::io::write_csv(os, tr);
    emit(c, os.str());
    return 0;
  }
  json report = header(c, "closed-form", {});
  report["trajectory"] = nahm::io::to_json(tr);
  emit(c, report.dump(2) + "\n");
  return 0;
}

int cmd_spectral(const ScenarioConfig& c) {
  validate_times(c);
  std::vector<std::string> warnings;
  const nahm::InnerProduct ip(c.scale);
  const nahm::Trajectory tr = solution(c, warnings);
  const nahm::LaxPolynomial L = nahm::lax_from_quadruple(tr.samples.front());
  json report = header(c, "spectral", warnings);
  report["curve"] = nahm::io::to_json(nahm::char_poly(L));
  report["reality_defect"] = nahm::char_poly(L).reality_defect();
  report["isospectral_drift"] = nahm::isospectral_drift(tr);
  report["lax_residual"] = nahm::lax_residual(tr);
  const double tr_coeff = nahm::conserved_C_from_trace(L);
  report["C_trace_coefficient"] = tr_coeff;
  report["C_from_trace"] = nahm::C_trace_factor(ip) * tr_coeff;
  report["C_from_norms"] = nahm::conserved_values(tr.samples.front(), ip)[5];
  if (is_elliptic(c)) {
    const double k = *c.kappa;
    const double a2 = c.a * c.a;
    report["expected"] = json{{"c_2_2", -0.5 * a2 * (1.0 + k * k)}, {"c_2_0", 0.25 * a2 * (k * k - 1.0)},
                              {"c_2_4", 0.25 * a2 * (k * k - 1.0)}};
  }
  emit(c, report.dump(2) + "\n");
  return 0;
}

int cmd_degeneracy(const ScenarioConfig& c) {
  validate_times(c);
  std::vector<std::string> warnings;
  const nahm::InnerProduct ip(c.scale);
  const nahm::Trajectory tr = solution(c, warnings);
  json report = header(c, "degeneracy", warnings);
  report["report"] = nahm::io::to_json(nahm::degeneracy_report(tr, c.tol_low, c.tol_high, ip));
  report["pi_bound"] = nahm::io::to_json(nahm::pi_bound_precheck(tr, ip));
  emit(c, report.dump(2) + "\n");
  return 0;
}

int cmd_factorize(const ScenarioConfig& c) {
  validate_times(c);
  std::vector<std::string> warnings;
  nahm::Quadruple q = initial_data(c, warnings);
  const Eigen::Index n = q.n();
  // Central shift T1 -> T1 - i mu; it commutes with everything, so it
  // preserves solutions while moving traceless data into the positive part.
  q[1] -= nahm::I_unit * c.shift * nahm::Matrix::Identity(n, n);
  json report = header(c, "factorize", warnings);
  const auto pos = nahm::positivity_report(q[1], q[2], q[3]);
  report["positivity"] = nahm::io::to_json(pos);
  if (!pos.sampled_positive()) {
    std::cerr << "error: data is not in the positive part (min eig " << pos.min_eig << "); increase --shift\n";
    emit(c, report.dump(2) + "\n");
    return kExitConfig;
  }
  const auto fp = nahm::rosenblatt_factorize(q[1], q[2], q[3]);
  report["factor"] = nahm::io::to_json(fp);
  report["norm_bound"] = nahm::io::to_json(nahm::norm_bound_check(q[1], q[2], q[3]));

  nahm::SolverConfig sc;
  sc.steps = c.steps;
  const auto path = nahm::integrate_ab(fp.A, fp.B, c.t_start, c.t_end, sc);
  const nahm::Trajectory rec = nahm::reconstruct(path);
  q[0].setZero();
  const nahm::Trajectory direct = nahm::integrate(q, c.t_start, c.t_end, sc);
  double dist = 0.0, trace_drift = 0.0;
  const double tr0 = nahm::ab_trace_invariant(fp.A, fp.B);
  for (std::size_t k = 0; k < rec.samples.size(); ++k) {
    for (std::size_t i = 1; i < 4; ++i) dist = std::max(dist, (rec.samples[k][i] - direct.samples[k][i]).norm());
    trace_drift = std::max(trace_drift, std::abs(nahm::ab_trace_invariant(path.A[k], path.B[k]) - tr0));
  }
  report["ab_flow"] = json{{"reconstruction_distance", dist}, {"trace_invariant", tr0}, {"trace_drift", trace_drift}};
  emit(c, report.dump(2) + "\n");
  return 0;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      v.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--tau: cannot parse '" + item + "'");
    }
  }
  return v;
}

int cmd_stability(const ScenarioConfig& c) {
  std::vector<std::string> warnings;
  std::optional<nahm::CommutingTriple> tau;
  if (!c.tau.empty()) {
    const auto v = parse_list(c.tau);
    if (v.size() != 3) throw ConfigError("--tau expects three comma-separated numbers c1,c2,c3");
    const auto e = nahm::su2_basis();
    tau.emplace(v[0] * e[0], v[1] * e[0], v[2] * e[0]);
  } else if (!c.init.empty()) {
    const auto q = initial_data(c, warnings);
    tau.emplace(q[1], q[2], q[3]);
  } else {
    throw ConfigError("stability needs --tau c1,c2,c3 or --init");
  }
  const nahm::InnerProduct ip(c.scale);
  json report = header(c, "stability", warnings);
  const auto rep = nahm::stability_spectrum(*tau, ip);
  report["report"] = nahm::io::to_json(rep);
  const auto dirs = nahm::stable_directions(*tau, ip);
  if (!dirs.directions.empty()) {
    const auto hl = nahm::halfline_convergence(*tau, dirs.directions.front(), c.amplitude, c.horizon);
    json h = nahm::io::to_json(hl);
    h["predicted_rate"] = -dirs.eigenvalues.front();
    report["halfline"] = h;
  } else {
    report["halfline"] = nullptr;
  }
  emit(c, report.dump(2) + "\n");
  return 0;
}

unsigned worker_count(std::size_t jobs) {
  unsigned w = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("NS_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) w = static_cast<unsigned>(v);
    } catch (const std::exception&) {
      throw ConfigError(std::string("NS_THREADS must be a positive integer, got '") + env + "'");
    }
  }
  return static_cast<unsigned>(std::min<std::size_t>(w, std::max<std::size_t>(1, jobs)));
}

int cmd_sweep(const ScenarioConfig& c) {
  validate_times(c);
  if (!c.kappa && c.param != "kappa") throw ConfigError("--kappa is required unless sweeping kappa");
  if (c.points < 1) throw ConfigError("--points must be >= 1");
  const nahm::InnerProduct ip(c.scale);
  const auto P = static_cast<std::size_t>(c.points);
  std::vector<double> values(P);
  for (std::size_t i = 0; i < P; ++i) {
    values[i] = P == 1 ? c.from : c.from + (c.to - c.from) * static_cast<double>(i) / static_cast<double>(P - 1);
  }
  if (c.param == "kappa") {
    for (double v : values) {
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("kappa sweep must stay in [0,1]");
    }
  }
  struct Row {
    nahm::DegeneracyReport rep;
    nahm::PiBound pi;
    std::string error;
  };
  std::vector<Row> rows(P);
  auto work = [&](std::size_t i) {
    double a = c.a, b = c.b, k = c.kappa.value_or(0.0);
    (c.param == "a" ? a : (c.param == "b" ? b : k)) = values[i];
    try {
      const auto tr = nahm::su2_closed_form_trajectory(a, b, k, c.t_start, c.t_end, c.steps);
      rows[i].rep = nahm::degeneracy_report(tr, c.tol_low, c.tol_high, ip);
      rows[i].pi = nahm::pi_bound_precheck(tr, ip);
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  };
  const unsigned W = worker_count(P);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < W; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < P; i += W) work(i);
    });
  }
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < P; ++i) {
    if (!rows[i].error.empty()) throw nahm::NumericalError("sweep point " + std::to_string(i) + ": " + rows[i].error);
  }

  if (c.format == "csv") {
    std::ostringstream os;
    os.precision(17);
    os << c.param << ",sigma_min,sigma_max,relative_sigma_min,determinant,verdict,pi_bound,pi_certified\n";
    for (std::size_t i = 0; i < P; ++i) {
      const auto& r = rows[i].rep;
      os << values[i] << "," << r.sigma_min << "," << r.sigma_max << "," << r.sigma_min / r.sigma_max << ","
         << r.determinant << "," << nahm::to_string(r.verdict) << "," << rows[i].pi.bound_value << ","
         << (rows[i].pi.certified_nondegenerate ? 1 : 0) << "\n";
    }
    emit(c, os.str());
    return 0;
  }
  json report = header(c, "sweep", {});
  json pts = json::array();
  for (std::size_t i = 0; i < P; ++i) {
    const auto& r = rows[i].rep;
    pts.push_back(json{{c.param, values[i]},
                       {"sigma_min", r.sigma_min},
                       {"sigma_max", r.sigma_max},
                       {"determinant", r.determinant},
                       {"verdict", nahm::to_string(r.verdict)},
                       {"pi_bound", rows[i].pi.bound_value},
                       {"pi_certified", rows[i].pi.certified_nondegenerate}});
  }
  report["points"] = pts;
  emit(c, report.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nahmlab: numerical experiments with the Nahm-Schmid equations"};
  app.require_subcommand(1);
  ScenarioConfig cfg;

  auto* integrate = app.add_subcommand("integrate", "integrate the flow and audit conserved quantities");
  auto* closed = app.add_subcommand("closed-form", "sample the explicit su(2) elliptic solution");
  auto* spectral = app.add_subcommand("spectral", "spectral curve, Lax residual, isospectral drift");
  auto* degeneracy = app.add_subcommand("degeneracy", "Dirichlet shooting test for the degeneracy locus");
  auto* factorize = app.add_subcommand("factorize", "positivity, factorization and the A-B flow");
  auto* stability = app.add_subcommand("stability", "stability of a commuting triple");
  auto* sweep = app.add_subcommand("sweep", "degeneracy sweep over one elliptic parameter");
  for (auto* s : {integrate, closed, spectral, degeneracy, factorize, stability, sweep}) add_common(s, cfg);

  for (auto* s : {degeneracy, sweep}) {
    s->add_option("--tol-low", cfg.tol_low);
    s->add_option("--tol-high", cfg.tol_high);
  }
  factorize->add_option("--shift", cfg.shift, "central shift mu in T1 -> T1 - i mu");
  stability->add_option("--tau", cfg.tau, "c1,c2,c3 for the su(2) triple (c1 e1, c2 e1, c3 e1)");
  stability->add_option("--amplitude", cfg.amplitude)->check(CLI::NonNegativeNumber);
  stability->add_option("--horizon", cfg.horizon)->check(CLI::PositiveNumber);
  sweep->add_option("--param", cfg.param)->required()->check(CLI::IsMember({"a", "b", "kappa"}));
  sweep->add_option("--from", cfg.from)->required();
  sweep->add_option("--to", cfg.to)->required();
  sweep->add_option("--points", cfg.points)->required()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*integrate) return cmd_integrate(cfg);
    if (*closed) return cmd_closed_form(cfg);
    if (*spectral) return cmd_spectral(cfg);
    if (*degeneracy) return cmd_degeneracy(cfg);
    if (*factorize) return cmd_factorize(cfg);
    if (*stability) return cmd_stability(cfg);
    if (*sweep) return cmd_sweep(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nahm::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const nahm::DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nahm::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
