#include "crnlyap/potential.hpp"

#include "crnlyap/birth_death.hpp"
#include "crnlyap/deterministic.hpp"
#include "crnlyap/dsl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace crnlyap {

namespace {

constexpr double kComplexBalanceTol = 1e-8;

// Union bound on P(some X_i > box_i) for independent X_i ~ Po(lambda_i), using
// P(X >= n) <= e^{-lambda} (e lambda / n)^n for n > lambda.
double poisson_tail_outside(const State& box, const Eigen::VectorXd& lambda) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < box.size(); ++i) {
    const double n = static_cast<double>(box[i] + 1);
    if (n <= lambda[i]) return 1.0;
    total += std::exp(-lambda[i] + n * (1.0 + std::log(lambda[i]) - std::log(n)));
  }
  return std::min(total, 1.0);
}

bool lex_less(const Concentration& a, const Concentration& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

// Integer state V x0, which must lie on the scaled compatibility class when
// the network has conservation laws.
State lattice_point(const ReactionNetwork& net, double V, const Concentration& x0) {
  if (x0.size() != net.dim() || (x0.array() < 0.0).any()) {
    throw std::invalid_argument("initial concentration must be non-negative with one entry per species");
  }
  const Eigen::VectorXd scaled = V * x0;
  State X(scaled.size());
  for (Eigen::Index i = 0; i < scaled.size(); ++i) X[i] = std::llround(scaled[i]);
  const Eigen::MatrixXd W = conserved_quantities(net);
  if (W.cols() > 0) {
    const Eigen::VectorXd drift = W.transpose() * (X.cast<double>() - scaled);
    if (drift.cwiseAbs().maxCoeff() > 1e-6 * (1.0 + scaled.cwiseAbs().maxCoeff())) {
      throw std::invalid_argument("V * x0 is not a lattice point of its compatibility class");
    }
  }
  return X;
}

std::optional<Concentration> positive_equilibrium(const ReactionNetwork& net, const Concentration& x0) {
  try {
    const EquilibriumReport eq = find_equilibrium(net, x0);
    if (eq.converged && !eq.on_boundary && (eq.point.array() > 0.0).all()) return eq.point;
  } catch (const std::exception&) {
    // No usable equilibrium; the caller falls back to other methods.
  }
  return std::nullopt;
}

StateDistribution solve_with_equilibrium(const ReactionNetwork& net, double V, const Concentration& x0,
                                         const State& min_cover, const ConvergenceOptions& options,
                                         const std::optional<Concentration>& equilibrium) {
  const ScaledNetwork snet = scale_network(net, V);
  const State X0 = lattice_point(net, V, x0);
  if (equilibrium && is_complex_balanced(net, *equilibrium, kComplexBalanceTol).is_complex_balanced) {
    const Component comp = product_form_component(*equilibrium, snet, X0, min_cover, options.tail_tol,
                                                  options.truncation.cap);
    return product_form_pi(*equilibrium, snet, comp);
  }
  const BirthDeathVerdict verdict = classify_birth_death(net);
  if (verdict.is_birth_death()) {
    BirthDeathPolicy policy;
    policy.min_state = min_cover.size() > 0 ? min_cover[0] : 0;
    policy.tail_tol = options.tail_tol;
    return bd_stationary(*verdict.model, V, policy);
  }
  TruncationPolicy policy = options.truncation;
  policy.minimum_box =
      policy.minimum_box.size() == min_cover.size() ? State(policy.minimum_box.cwiseMax(min_cover)) : min_cover;
  return solve_stationary_auto(snet, X0, policy);
}

}  // namespace

StateDistribution product_form_pi(const Concentration& c, const ScaledNetwork& snet, const std::vector<State>& states) {
  if (c.size() != snet.dim()) throw std::invalid_argument("product_form_pi: dimension mismatch");
  const EquilibriumReport balance = is_complex_balanced(snet.base, c, kComplexBalanceTol);
  if (!balance.is_complex_balanced) {
    throw std::domain_error("product_form_pi: c is not a complex-balanced equilibrium");
  }
  const Eigen::VectorXd lambda = snet.V * c;
  const Eigen::VectorXd log_lambda = lambda.array().log();
  std::vector<double> log_mass;
  log_mass.reserve(states.size());
  for (const State& x : states) {
    double lm = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double xi = static_cast<double>(x[i]);
      lm += xi * log_lambda[i] - std::lgamma(xi + 1.0) - lambda[i];
    }
    log_mass.push_back(lm);
  }
  // The normalizer of full Poisson masses is the mass of the set itself.
  StateDistribution dist(states, std::move(log_mass), "product-form");
  dist.max_balance_residual = balance_residual(snet, dist);
  return dist;
}

StateDistribution product_form_pi(const Concentration& c, const ScaledNetwork& snet, const Component& component) {
  StateDistribution dist = product_form_pi(c, snet, component.states);
  if (component.leaks_box) {
    dist.truncated = true;
    dist.tail_mass_bound = poisson_tail_outside(component.box, snet.V * c);
  }
  return dist;
}

Component product_form_component(const Concentration& c, const ScaledNetwork& snet, const State& x0,
                                 const State& minimum_box, double tail_tol, std::int64_t cap) {
  State box = default_initial_box(snet.V, c).cwiseMax(x0);
  if (minimum_box.size() == box.size()) box = box.cwiseMax(minimum_box);
  while (true) {
    Component comp = enumerate_component(snet, x0, box);
    if (!comp.leaks_box || poisson_tail_outside(box, snet.V * c) < tail_tol) return comp;
    box *= 2;
    if (box.maxCoeff() > cap) throw StationarySolveError("product_form_component: box exceeded the cap");
  }
}

double nonequilibrium_potential(const StateDistribution& dist, const State& x) {
  const auto i = dist.index_of(x);
  if (!i) throw std::out_of_range("nonequilibrium_potential: state outside the support");
  return -dist.log_prob(*i);
}

State snap_to_support(const StateDistribution& dist, double V, const Concentration& x_tilde) {
  if (!(V > 0.0)) throw std::invalid_argument("snap_to_support: V must be positive");
  const Eigen::Index d = x_tilde.size();
  if (d > 20) throw std::invalid_argument("snap_to_support: too many species");
  const Eigen::VectorXd target = V * x_tilde;
  std::optional<State> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << d); ++mask) {
    State candidate(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      candidate[i] = static_cast<std::int64_t>((mask >> i) & 1U ? std::ceil(target[i]) : std::floor(target[i]));
    }
    if (!dist.index_of(candidate)) continue;
    const Eigen::VectorXd diff = candidate.cast<double>() - target;
    if (diff.cwiseAbs().maxCoeff() > 0.5 + 1e-9) continue;
    const double dd = diff.squaredNorm();
    if (dd < best_dist || (dd == best_dist && state_less(candidate, *best))) {
      best_dist = dd;
      best = std::move(candidate);
    }
  }
  if (!best) throw std::out_of_range("snap_to_support: no support state within 1/2 of V x_tilde");
  return *best;
}

double scaled_nep(const StateDistribution& dist, double V, const Concentration& x_tilde) {
  return nonequilibrium_potential(dist, snap_to_support(dist, V, x_tilde)) / V;
}

Concentration complete_on_class(const ReactionNetwork& net, const Concentration& x0, const Eigen::VectorXd& head) {
  const Eigen::Index d = net.dim();
  const Eigen::MatrixXd W = conserved_quantities(net);
  const Eigen::Index r = d - W.cols();
  if (head.size() != r) throw std::invalid_argument("complete_on_class: expected one coordinate per free dimension");
  if (x0.size() != d) throw std::invalid_argument("complete_on_class: dimension mismatch");
  Concentration x(d);
  x.head(r) = head;
  if (r == d) return x;
  const Eigen::MatrixXd A = W.bottomRows(d - r).transpose();
  const Eigen::VectorXd rhs = W.transpose() * x0 - W.topRows(r).transpose() * head;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (lu.rank() < A.rows()) {
    throw std::invalid_argument("complete_on_class: leading coordinates do not determine the class point");
  }
  x.tail(d - r) = lu.solve(rhs);
  return x;
}

std::vector<Eigen::VectorXd> make_grid(const std::vector<GridAxis>& axes) {
  std::vector<Eigen::VectorXd> out;
  if (axes.empty()) return out;
  for (const auto& axis : axes) {
    if (axis.count < 2 || !(axis.max > axis.min)) throw std::invalid_argument("make_grid: need count >= 2 and min < max");
  }
  std::vector<int> idx(axes.size(), 0);
  while (true) {
    Eigen::VectorXd p(axes.size());
    for (std::size_t j = 0; j < axes.size(); ++j) {
      const auto& a = axes[j];
      p[j] = idx[j] == a.count - 1 ? a.max : a.min + (a.max - a.min) * idx[j] / (a.count - 1);
    }
    out.push_back(std::move(p));
    std::size_t j = axes.size();
    while (j > 0) {
      --j;
      if (++idx[j] < axes[j].count) break;
      idx[j] = 0;
      if (j == 0) return out;
    }
  }
}

StateDistribution solve_stationary(const ReactionNetwork& net, double V, const Concentration& x0,
                                   const State& min_cover, const ConvergenceOptions& options) {
  return solve_with_equilibrium(net, V, x0, min_cover, options, positive_equilibrium(net, x0));
}

ConvergenceReport nep_convergence_study(const ReactionNetwork& net, const std::vector<double>& V_list,
                                        const std::vector<Concentration>& grid, const LimitFunction& limit_fn,
                                        const ConvergenceOptions& options) {
  if (V_list.empty()) throw std::invalid_argument("nep_convergence_study: empty V list");
  for (std::size_t i = 0; i < V_list.size(); ++i) {
    if (!(V_list[i] > 0.0) || (i > 0 && !(V_list[i] > V_list[i - 1]))) {
      throw std::invalid_argument("nep_convergence_study: V list must be positive and strictly increasing");
    }
  }
  if (grid.empty()) throw std::invalid_argument("nep_convergence_study: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i].size() != net.dim() || (grid[i].array() < 0.0).any()) {
      throw std::invalid_argument("nep_convergence_study: grid points must be non-negative concentrations");
    }
    if (i > 0 && !lex_less(grid[i - 1], grid[i])) {
      throw std::invalid_argument("nep_convergence_study: grid must be strictly increasing");
    }
  }
  if (!options.x0 && conserved_quantities(net).cols() > 0) {
    throw std::invalid_argument("nep_convergence_study: x0 is required for a network with conservation laws");
  }
  const Concentration x0 = options.x0 ? *options.x0 : grid.front();

  ConvergenceReport report;
  report.equilibrium = positive_equilibrium(net, x0);
  report.limit.grid = grid;
  report.limit.label = "limit";
  for (const auto& g : grid) report.limit.values.push_back(limit_fn(g));

  Eigen::VectorXd grid_max = grid.front();
  for (const auto& g : grid) grid_max = grid_max.cwiseMax(g);

  for (double V : V_list) {
    State min_cover(net.dim());
    for (Eigen::Index i = 0; i < min_cover.size(); ++i) {
      min_cover[i] = static_cast<std::int64_t>(std::ceil(V * grid_max[i])) + 1;
    }
    const StateDistribution dist = solve_with_equilibrium(net, V, x0, min_cover, options, report.equilibrium);
    PotentialCurve curve;
    curve.grid = grid;
    curve.label = "V=" + format_real(V);
    curve.V = V;
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      curve.values.push_back(scaled_nep(dist, V, grid[i]));
      worst = std::max(worst, std::abs(curve.values.back() - report.limit.values[i]));
    }
    report.sup_errors[V] = worst;
    report.z_log[V] =
        dist.method() == "product-form" ? dist.log_Z() / V : std::numeric_limits<double>::quiet_NaN();
    report.methods[V] = dist.method();
    report.curves.push_back(std::move(curve));
  }
  return report;
}

void write_curves_csv(std::ostream& out, const ConvergenceReport& report) {
  const auto& grid = report.limit.grid;
  const Eigen::Index d = grid.empty() ? 0 : grid.front().size();
  for (Eigen::Index j = 0; j < d; ++j) out << "x_tilde_" << (j + 1) << ',';
  out << "value,label,V\n";
  auto coords = [&](std::size_t i) {
    for (Eigen::Index j = 0; j < d; ++j) out << format_real(grid[i][j]) << ',';
  };
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (const auto& curve : report.curves) {
      coords(i);
      out << format_real(curve.values[i]) << ',' << curve.label << ',' << format_real(*curve.V) << '\n';
    }
    coords(i);
    out << format_real(report.limit.values[i]) << ',' << report.limit.label << ",\n";
  }
}

}  // namespace crnlyap
