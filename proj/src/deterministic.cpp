#include "crnlyap/deterministic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace crnlyap {

Eigen::MatrixXd mass_action_jacobian(const ReactionNetwork& net, const Concentration& x) {
  const int d = net.dim();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(d, d);
  for (const auto& r : net.reactions()) {
    const Eigen::VectorXd zeta = r.zeta().cast<double>();
    for (int j = 0; j < d; ++j) {
      const int p = r.source[j];
      if (p == 0) continue;
      // d/dx_j of x^nu = p x_j^{p-1} prod_{i != j} x_i^{nu_i}
      double partial = r.kappa * p;
      for (int i = 0; i < d; ++i) {
        const int power = (i == j) ? p - 1 : r.source[i];
        for (int e = 0; e < power; ++e) partial *= x[i];
      }
      jac.col(j) += partial * zeta;
    }
  }
  return jac;
}

Eigen::VectorXd lyapunov_V_gradient(const Concentration& x, const Concentration& c) {
  return (x.array().log() - c.array().log()).matrix();
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr std::array<double, 7> kB5{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr std::array<double, 7> kB4{5179.0 / 57600,    0.0,           7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

}  // namespace

OdeTrajectory integrate(const ReactionNetwork& net, const Concentration& x0, double t_end,
                        const IntegrationOptions& opts) {
  if (x0.size() != net.dim()) throw std::invalid_argument("integrate: dimension mismatch");
  if (!(t_end > 0.0)) throw std::invalid_argument("integrate: t_end must be positive");
  if ((x0.array() < 0.0).any()) throw std::invalid_argument("integrate: negative initial condition");

  OdeTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(x0);

  double t = 0.0;
  double h = std::min(opts.initial_step, t_end);
  Concentration x = x0;
  std::array<Eigen::VectorXd, 7> k;
  std::size_t steps = 0;

  while (t < t_end) {
    if (++steps > opts.max_steps) throw IntegrationError("integrate: step limit exceeded", t);
    if (h < opts.min_step * std::max(1.0, std::abs(t))) throw IntegrationError("integrate: step size underflow", t);
    h = std::min(h, t_end - t);

    k[0] = mass_action_rhs(net, x);
    for (int s = 1; s < 7; ++s) {
      Eigen::VectorXd stage = x;
      for (int j = 0; j < s; ++j) stage += h * kA[s][j] * k[static_cast<std::size_t>(j)];
      k[static_cast<std::size_t>(s)] = mass_action_rhs(net, stage);
    }
    Eigen::VectorXd x5 = x;
    Eigen::VectorXd x4 = x;
    for (std::size_t s = 0; s < 7; ++s) {
      x5 += h * kB5[s] * k[s];
      x4 += h * kB4[s] * k[s];
    }

    double err = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double scale = opts.abs_tol + opts.rel_tol * std::max(std::abs(x[i]), std::abs(x5[i]));
      err = std::max(err, std::abs(x5[i] - x4[i]) / scale);
    }
    if (!std::isfinite(err)) {
      h *= 0.25;
      continue;
    }
    if (err > 1.0 || x5.minCoeff() < -opts.rel_tol) {
      h *= std::max(0.1, 0.9 * std::pow(std::max(err, 1.0), -0.2));
      if (err <= 1.0) h *= 0.5;
      continue;
    }
    x = x5.cwiseMax(0.0);
    t = (t_end - t <= h) ? t_end : t + h;
    traj.times.push_back(t);
    traj.states.push_back(x);
    const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h *= factor;
  }
  return traj;
}

namespace {

std::vector<ComplexResidual> complex_residuals(const ReactionNetwork& net, const Concentration& c) {
  std::vector<ComplexResidual> out;
  for (const auto& z : net.complexes()) {
    ComplexResidual res{z};
    for (const auto& r : net.reactions()) {
      const double flux = r.kappa * monomial(c, r.source);
      if (same_complex(r.product, z)) res.inflow += flux;
      if (same_complex(r.source, z)) res.outflow += flux;
    }
    const double scale = std::max(res.inflow, res.outflow);
    res.residual = scale > 0.0 ? std::abs(res.inflow - res.outflow) / scale : 0.0;
    out.push_back(std::move(res));
  }
  return out;
}

EquilibriumReport build_report(const ReactionNetwork& net, const Concentration& c, double tol) {
  EquilibriumReport report;
  report.point = c;
  report.tolerance = tol;
  report.complex_residuals = complex_residuals(net, c);
  for (const auto& r : report.complex_residuals) report.max_residual = std::max(report.max_residual, r.residual);
  report.is_complex_balanced = report.max_residual <= tol;
  report.rhs_norm = mass_action_rhs(net, c).norm();
  report.on_boundary = (c.array() < 1e-12).any();
  return report;
}

}  // namespace

EquilibriumReport is_complex_balanced(const ReactionNetwork& net, const Concentration& c, double tol) {
  if (c.size() != net.dim()) throw std::invalid_argument("is_complex_balanced: dimension mismatch");
  if (!(c.array() > 0.0).all()) throw std::domain_error("is_complex_balanced: c must be strictly positive");
  return build_report(net, c, tol);
}

EquilibriumReport find_equilibrium(const ReactionNetwork& net, const Concentration& x0,
                                   const EquilibriumOptions& opts) {
  if (x0.size() != net.dim()) throw std::invalid_argument("find_equilibrium: dimension mismatch");
  if ((x0.array() < 0.0).any()) throw std::invalid_argument("find_equilibrium: negative starting point");

  Concentration x = x0;
  auto converged = [](const Eigen::VectorXd& f, const Concentration& p) { return f.norm() <= 1e-12 * (1.0 + p.norm()); };

  // Burn-in: follow the flow towards the attractor until the field is small.
  double elapsed = 0.0;
  double chunk = 1.0;
  while (mass_action_rhs(net, x).norm() >= opts.burn_in_threshold && elapsed < opts.burn_in_max_time) {
    auto traj = integrate(net, x, chunk, 1e-10);
    x = traj.states.back();
    elapsed += chunk;
    chunk *= 2.0;
  }

  // The integrator drifts off the compatibility class by its tolerance; undo
  // that before Newton, which moves only within the class.
  const Eigen::MatrixXd conserved = conserved_quantities(net);
  if (conserved.cols() > 0) {
    const Concentration projected = x + conserved * (conserved.transpose() * (x0 - x));
    if ((projected.array() >= 0.0).all()) x = projected;
  }

  const Eigen::MatrixXd basis = stoichiometric_subspace(net);
  EquilibriumReport report;
  int iterations = 0;
  int polish = 3;  // extra steps after convergence while |f| still drops
  bool ok = basis.cols() == 0 || converged(mass_action_rhs(net, x), x);
  while ((!ok || polish > 0) && iterations < opts.max_newton_iterations && basis.cols() > 0) {
    if (ok) --polish;
    ++iterations;
    const Eigen::VectorXd f = mass_action_rhs(net, x);
    const Eigen::MatrixXd reduced = basis.transpose() * mass_action_jacobian(net, x) * basis;
    const Eigen::VectorXd y = reduced.colPivHouseholderQr().solve(-basis.transpose() * f);
    const Eigen::VectorXd step = basis * y;
    if (!step.allFinite()) break;

    double alpha = 1.0;
    const double fnorm = f.norm();
    Concentration trial = x + step;
    for (int halvings = 0; halvings < 60; ++halvings) {
      trial = x + alpha * step;
      if ((trial.array() > 0.0).all() && mass_action_rhs(net, trial).norm() < fnorm) break;
      alpha *= 0.5;
    }
    if (!(trial.array() > 0.0).all()) trial = trial.cwiseMax(0.0);
    if (ok && !(mass_action_rhs(net, trial).norm() < fnorm)) break;
    x = trial;
    ok = ok || converged(mass_action_rhs(net, x), x);
  }

  report = build_report(net, x, opts.complex_balance_tol);
  report.converged = ok;
  report.newton_iterations = iterations;
  return report;
}

LyapunovReport lyapunov_decrease_check(const ReactionNetwork& net, const Concentration& c,
                                       const std::vector<Concentration>& grid, const ScalarField& V_fn,
                                       const GradientField& gradient, const DecreaseCheckOptions& opts) {
  if (c.size() != net.dim()) throw std::invalid_argument("lyapunov_decrease_check: dimension mismatch");
  if (mass_action_rhs(net, c).norm() > 1e-6 * (1.0 + c.norm())) {
    throw std::invalid_argument("lyapunov_decrease_check: c is not an equilibrium");
  }
  LyapunovReport report;
  report.grid = grid;
  report.max_derivative = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Concentration& x = grid[n];
    if (x.size() != net.dim()) throw std::invalid_argument("lyapunov_decrease_check: dimension mismatch");
    if (!(x.array() > 0.0).all()) throw std::domain_error("lyapunov_decrease_check: grid point on the boundary");
    Eigen::VectorXd grad;
    if (gradient) {
      grad = gradient(x);
    } else {
      grad.resize(x.size());
      const double h = 1e-6 * (1.0 + x.norm());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        Concentration up = x;
        Concentration down = x;
        up[i] += h;
        down[i] -= h;
        grad[i] = (V_fn(up) - V_fn(down)) / (2.0 * h);
      }
    }
    const double deriv = grad.dot(mass_action_rhs(net, x));
    report.values.push_back(V_fn(x));
    report.derivative_along_flow.push_back(deriv);
    report.max_derivative = std::max(report.max_derivative, deriv);
    if (std::abs(deriv) <= opts.zero_tol) report.zero_points.push_back(n);
  }
  if (grid.empty()) report.max_derivative = 0.0;
  report.min_derivative_margin = -report.max_derivative;
  report.passed = report.max_derivative <= opts.tol;
  return report;
}

}  // namespace crnlyap
