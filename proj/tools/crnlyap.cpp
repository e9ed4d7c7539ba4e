// crnlyap: stationary distributions, non-equilibrium potentials and Lyapunov
// functions of mass-action reaction networks.
//
//   crnlyap check      --input net.crn [--x0 1,0]
//   crnlyap stationary --input net.crn --V 10
//   crnlyap simulate   --input net.crn --V 10 --x0 1,0 --seed 42 [--empirical]
//   crnlyap converge   --input net.crn --V 10,100,1000 --grid 0.5:4:200
//
// Exit codes: 0 success, 2 bad input, 3 numerical failure, 4 no stationary
// distribution.

#include "crnlyap/birth_death.hpp"
#include "crnlyap/deterministic.hpp"
#include "crnlyap/dsl.hpp"
#include "crnlyap/potential.hpp"
#include "crnlyap/quadrature.hpp"
#include "crnlyap/stochastic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fs = std::filesystem;
using namespace crnlyap;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitNoStationary = 4;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string input;
  std::string out_dir = ".";
  std::vector<double> V;
  std::vector<GridAxis> grid;
  std::uint64_t seed = 1;
  std::optional<std::vector<double>> x0;
  double tol = 1e-10;
  std::int64_t truncate = std::int64_t{1} << 20;
  double t_end = 100.0;
  double burn_in = 0.0;
  bool empirical = false;
  std::string reference;
  std::vector<double> params;
};

std::vector<GridAxis> parse_grid(const std::string& text) {
  std::vector<GridAxis> axes;
  std::stringstream all(text);
  std::string item;
  while (std::getline(all, item, ',')) {
    std::stringstream parts(item);
    std::string lo, hi, n;
    if (!std::getline(parts, lo, ':') || !std::getline(parts, hi, ':') || !std::getline(parts, n, ':')) {
      throw InputError("--grid: expected min:max:count, got '" + item + "'");
    }
    try {
      std::size_t used = 0;
      GridAxis axis;
      axis.min = std::stod(lo);
      axis.max = std::stod(hi);
      axis.count = std::stoi(n, &used);
      if (used != n.size()) throw std::invalid_argument(n);
      axes.push_back(axis);
    } catch (const std::logic_error&) {
      throw InputError("--grid: malformed number in '" + item + "'");
    }
  }
  return axes;
}

void validate(const RunConfig& cfg) {
  for (std::size_t i = 0; i < cfg.V.size(); ++i) {
    if (!(cfg.V[i] > 0.0) || (i > 0 && !(cfg.V[i] > cfg.V[i - 1]))) {
      throw InputError("--V must be positive and strictly increasing");
    }
  }
  for (const auto& axis : cfg.grid) {
    if (axis.count < 2 || !(axis.max > axis.min) || axis.min < 0.0) {
      throw InputError("--grid axes need 0 <= min < max and count >= 2");
    }
  }
  if (!(cfg.tol > 0.0)) throw InputError("--tol must be positive");
  if (cfg.truncate < 1) throw InputError("--truncate must be positive");
  if (!(cfg.t_end > 0.0) || cfg.burn_in < 0.0 || (cfg.empirical && !(cfg.burn_in < cfg.t_end))) {
    throw InputError("need t_end > 0 and 0 <= burn_in < t_end");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write to a temporary sibling, then rename over the target.
void write_atomically(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) throw std::runtime_error("cannot write '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string join_state(const State& x) {
  std::string s;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i > 0) s += ',';
    s += std::to_string(x[i]);
  }
  return s;
}

std::string vector_text(const Eigen::VectorXd& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) s += ", ";
    s += format_real(v[i]);
  }
  return s + ")";
}

std::string complex_text(const ReactionNetwork& net, const Complex& y) {
  std::string s;
  for (int i = 0; i < net.dim(); ++i) {
    if (y[i] == 0) continue;
    if (!s.empty()) s += " + ";
    if (y[i] > 1) s += std::to_string(y[i]);
    s += net.species()[i];
  }
  return s.empty() ? "0" : s;
}

Concentration initial_concentration(const ReactionNetwork& net, const RunConfig& cfg, bool required) {
  if (cfg.x0) {
    if (static_cast<int>(cfg.x0->size()) != net.dim()) {
      throw InputError("--x0 needs " + std::to_string(net.dim()) + " entries");
    }
    Concentration x = Eigen::Map<const Eigen::VectorXd>(cfg.x0->data(), net.dim());
    if ((x.array() < 0.0).any()) throw InputError("--x0 entries must be non-negative");
    return x;
  }
  if (required || conserved_quantities(net).cols() > 0) {
    throw InputError("--x0 is required" +
                     std::string(required ? "" : " (the network has conservation laws)"));
  }
  return Concentration::Ones(net.dim());
}

double single_V(const RunConfig& cfg) {
  if (cfg.V.size() != 1) throw InputError("--V takes exactly one value for this command");
  return cfg.V.front();
}

std::string stationary_csv(const StateDistribution& dist, int d, const std::string& comment = {}) {
  std::string out = comment;
  for (int i = 0; i < d; ++i) out += "state_" + std::to_string(i + 1) + ",";
  out += "prob,log_prob,method\n";
  for (std::size_t k = 0; k < dist.size(); ++k) {
    out += join_state(dist.state(k)) + "," + format_real(dist.prob(k)) + "," + format_real(dist.log_prob(k)) + "," +
           dist.method() + "\n";
  }
  return out;
}

int cmd_check(const NetworkDocument& doc, const RunConfig& cfg) {
  const ReactionNetwork& net = doc.network;
  std::ostringstream rep;
  rep << "network: " << doc.name.value_or("(unnamed)") << '\n';
  rep << "species:";
  for (const auto& s : net.species()) rep << ' ' << s;
  rep << '\n' << "reactions:\n";
  for (const auto& r : net.reactions()) {
    rep << "  " << complex_text(net, r.source) << " -> " << complex_text(net, r.product)
        << "  kappa = " << format_real(r.kappa) << '\n';
  }
  const auto violations = crnlyap::validate(net);
  rep << "violations:";
  if (violations.empty()) rep << " none";
  rep << '\n';
  for (const auto& v : violations) rep << "  reaction " << v.reaction << ": " << v.rule << '\n';

  const Eigen::MatrixXd S = stoichiometric_subspace(net);
  const Eigen::MatrixXd W = conserved_quantities(net);
  rep << "stoichiometric subspace dimension: " << S.cols() << '\n';
  rep << "conserved quantities:";
  if (W.cols() == 0) rep << " none";
  rep << '\n';
  for (Eigen::Index j = 0; j < W.cols(); ++j) {
    rep << "  ";
    bool first = true;
    for (int i = 0; i < net.dim(); ++i) {
      if (std::abs(W(i, j)) < 1e-12) continue;
      if (!first) rep << " + ";
      rep << format_real(W(i, j)) << ' ' << net.species()[i];
      first = false;
    }
    rep << '\n';
  }

  if (violations.empty()) {
    const Concentration x0 = initial_concentration(net, cfg, false);
    rep << "initial point: " << vector_text(x0) << '\n';
    const EquilibriumReport eq = find_equilibrium(net, x0);
    rep << "equilibrium: " << vector_text(eq.point) << (eq.converged ? "" : " (not converged)") << '\n';
    rep << "residual |f(c)|: " << format_real(eq.rhs_norm) << '\n';
    if (eq.on_boundary || !(eq.point.array() > 0.0).all()) {
      rep << "complex balanced: no (equilibrium on the boundary)\n";
    } else {
      const EquilibriumReport cb = is_complex_balanced(net, eq.point, 1e-8);
      rep << "complex balanced: " << (cb.is_complex_balanced ? "yes" : "no") << '\n';
      rep << "complex residuals (tolerance " << format_real(cb.tolerance) << "):\n";
      for (const auto& r : cb.complex_residuals) {
        rep << "  " << complex_text(net, r.complex) << ": inflow " << format_real(r.inflow) << ", outflow "
            << format_real(r.outflow) << ", residual " << format_real(r.residual) << '\n';
      }
    }
  }
  write_atomically(fs::path(cfg.out_dir) / "check.txt", rep.str());
  return violations.empty() ? kExitOk : kExitInput;
}

ConvergenceOptions solver_options(const RunConfig& cfg) {
  ConvergenceOptions opts;
  opts.truncation.cap = cfg.truncate;
  opts.truncation.tv_tol = cfg.tol;
  return opts;
}

int cmd_stationary(const NetworkDocument& doc, const RunConfig& cfg) {
  const ReactionNetwork& net = doc.network;
  const double V = single_V(cfg);
  const Concentration x0 = initial_concentration(net, cfg, false);
  const StateDistribution dist = solve_stationary(net, V, x0, State::Zero(net.dim()), solver_options(cfg));
  write_atomically(fs::path(cfg.out_dir) / "stationary.csv", stationary_csv(dist, net.dim()));
  return kExitOk;
}

int cmd_simulate(const NetworkDocument& doc, const RunConfig& cfg) {
  const ReactionNetwork& net = doc.network;
  const double V = single_V(cfg);
  const Concentration x0 = initial_concentration(net, cfg, true);
  const ScaledNetwork snet = scale_network(net, V);
  State X0(net.dim());
  for (int i = 0; i < net.dim(); ++i) X0[i] = std::llround(V * x0[i]);
  const std::string comment = "# seed=" + std::to_string(cfg.seed) + "\n";

  if (cfg.empirical) {
    const EmpiricalStationary emp = empirical_stationary(snet, X0, cfg.burn_in, cfg.t_end, cfg.seed);
    if (emp.absorbed) std::cerr << "warning: absorbing state reached\n";
    write_atomically(fs::path(cfg.out_dir) / "empirical.csv", stationary_csv(emp.distribution, net.dim(), comment));
    return kExitOk;
  }
  const Trajectory traj = ssa_simulate(snet, X0, cfg.t_end, cfg.seed);
  if (traj.absorbed) {
    std::cerr << "warning: absorbing state reached at t = " << format_real(traj.times.back()) << '\n';
  }
  std::string out = comment + "time";
  for (int i = 0; i < net.dim(); ++i) out += ",state_" + std::to_string(i + 1);
  out += '\n';
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    out += format_real(traj.times[k]) + "," + join_state(traj.states[k]) + "\n";
  }
  write_atomically(fs::path(cfg.out_dir) / "trajectory.csv", out);
  return kExitOk;
}

int cmd_converge(const NetworkDocument& doc, const RunConfig& cfg) {
  const ReactionNetwork& net = doc.network;
  if (cfg.V.empty()) throw InputError("--V is required");
  if (cfg.grid.empty()) throw InputError("--grid is required");
  const Eigen::Index free_dims = stoichiometric_subspace(net).cols();
  if (static_cast<Eigen::Index>(cfg.grid.size()) != free_dims) {
    throw InputError("--grid needs one axis per free dimension (" + std::to_string(free_dims) + ")");
  }
  ConvergenceOptions opts = solver_options(cfg);
  std::optional<Concentration> x0;
  if (cfg.x0 || conserved_quantities(net).cols() > 0) x0 = initial_concentration(net, cfg, false);
  opts.x0 = x0;

  std::vector<Concentration> grid;
  for (const auto& head : make_grid(cfg.grid)) {
    grid.push_back(x0 ? complete_on_class(net, *x0, head) : Concentration(head));
  }

  LimitFunction limit;
  std::optional<GLimit> g;
  if (!cfg.reference.empty()) {
    if (net.dim() != 1) throw InputError("--reference applies to single-species networks");
    const std::string id = cfg.reference;
    const std::vector<double> params = cfg.params;
    reference_g(id, params, 1.0);  // reject unknown ids before any solving
    limit = [id, params](const Concentration& x) { return reference_g(id, params, x[0]); };
  } else {
    const Concentration start = x0 ? *x0 : grid.front();
    const EquilibriumReport eq = find_equilibrium(net, start);
    const bool balanced = !eq.on_boundary && (eq.point.array() > 0.0).all() &&
                          is_complex_balanced(net, eq.point, 1e-8).is_complex_balanced;
    const BirthDeathVerdict verdict = classify_birth_death(net);
    if (balanced) {
      const Concentration c = eq.point;
      limit = [c](const Concentration& x) { return lyapunov_V(x, c); };
    } else if (verdict.is_birth_death()) {
      g = g_limit(apply_modification(*verdict.model));
      limit = [&g](const Concentration& x) { return (*g)(x[0]); };
    } else {
      throw std::domain_error("no limit function is known for this network; pass --reference");
    }
  }

  const ConvergenceReport report = nep_convergence_study(net, cfg.V, grid, limit, opts);
  std::ostringstream curves;
  write_curves_csv(curves, report);
  std::string summary = "V,sup_error,z_log,method\n";
  for (double V : cfg.V) {
    const double z = report.z_log.at(V);
    summary += format_real(V) + "," + format_real(report.sup_errors.at(V)) + "," +
               (std::isnan(z) ? std::string() : format_real(z)) + "," + report.methods.at(V) + "\n";
  }
  write_atomically(fs::path(cfg.out_dir) / "curves.csv", curves.str());
  write_atomically(fs::path(cfg.out_dir) / "summary.csv", summary);
  return kExitOk;
}

void apply_config_file(const std::string& path, RunConfig& cfg, const CLI::App& app) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("--config: " + std::string(e.what()));
  }
  if (!j.is_object()) throw InputError("--config: expected a JSON object");
  auto unset = [&](const char* flag) { return app.get_option(flag)->count() == 0; };
  try {
    if (j.contains("input") && unset("--input")) cfg.input = j["input"].get<std::string>();
    if (j.contains("out") && unset("--out")) cfg.out_dir = j["out"].get<std::string>();
    if (j.contains("V") && unset("--V")) cfg.V = j["V"].get<std::vector<double>>();
    if (j.contains("grid") && unset("--grid")) cfg.grid = parse_grid(j["grid"].get<std::string>());
    if (j.contains("seed") && unset("--seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("x0") && unset("--x0")) cfg.x0 = j["x0"].get<std::vector<double>>();
    if (j.contains("tol") && unset("--tol")) cfg.tol = j["tol"].get<double>();
    if (j.contains("truncate") && unset("--truncate")) cfg.truncate = j["truncate"].get<std::int64_t>();
    if (j.contains("t_end") && unset("--t-end")) cfg.t_end = j["t_end"].get<double>();
    if (j.contains("burn_in") && unset("--burn-in")) cfg.burn_in = j["burn_in"].get<double>();
    if (j.contains("empirical") && unset("--empirical")) cfg.empirical = j["empirical"].get<bool>();
    if (j.contains("reference") && unset("--reference")) cfg.reference = j["reference"].get<std::string>();
    if (j.contains("params") && unset("--params")) cfg.params = j["params"].get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError("--config: " + std::string(e.what()));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stationary distributions and Lyapunov functions of reaction networks"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  RunConfig cfg;
  std::string grid_text;
  std::vector<double> x0_values;
  std::string config_path;
  app.add_option("--input", cfg.input, "network file (.crn)");
  app.add_option("--out", cfg.out_dir, "output directory");
  app.add_option("--V", cfg.V, "system sizes, comma separated")->delimiter(',');
  app.add_option("--grid", grid_text, "min:max:count per free dimension, comma separated");
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--x0", x0_values, "initial concentrations, comma separated")->delimiter(',');
  app.add_option("--tol", cfg.tol, "total-variation tolerance for truncation doubling");
  app.add_option("--truncate", cfg.truncate, "per-species cap on the state box");
  app.add_option("--t-end", cfg.t_end, "simulation end time");
  app.add_option("--burn-in", cfg.burn_in, "time discarded before occupation counting");
  app.add_flag("--empirical", cfg.empirical, "write occupation-time frequencies instead of the path");
  app.add_option("--reference", cfg.reference,
                 "closed-form limit: cubic-bistable, cubic-poisson, linear-absorbing, dimerization, pair-birth");
  app.add_option("--params", cfg.params, "parameters of the reference limit, comma separated")->delimiter(',');
  app.add_option("--config", config_path, "JSON file with defaults for the flags above");
  const std::pair<const char*, const char*> commands[] = {
      {"check", "structure, equilibrium and complex-balance report"},
      {"stationary", "stationary distribution at one V"},
      {"simulate", "stochastic sample path or occupation frequencies"},
      {"converge", "scaled potential against its limit over several V"}};
  for (const auto& [name, help] : commands) {
    app.add_subcommand(name, help)->callback([&cfg, name] { cfg.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (!x0_values.empty()) cfg.x0 = x0_values;
    if (!grid_text.empty()) cfg.grid = parse_grid(grid_text);
    if (!config_path.empty()) apply_config_file(config_path, cfg, app);
    if (cfg.input.empty()) throw InputError("--input is required");
    validate(cfg);
    const NetworkDocument doc = parse_network(read_file(cfg.input));
    if (cfg.command == "check") return cmd_check(doc, cfg);
    if (cfg.command == "stationary") return cmd_stationary(doc, cfg);
    if (cfg.command == "simulate") return cmd_simulate(doc, cfg);
    return cmd_converge(doc, cfg);
  } catch (const ParseError& e) {
    std::cerr << cfg.input << ": " << e.what() << '\n';
    return kExitInput;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const NoStationaryDistribution& e) {
    std::cerr << e.what() << '\n';
    return kExitNoStationary;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}
