#pragma once

#include "crnlyap/network.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace crnlyap {

/// Deterministic mass-action vector field sum_k kappa_k x^{nu_k} zeta_k.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> mass_action_rhs(const ReactionNetwork& net,
                                                                           const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  if (x.size() != net.dim()) throw std::invalid_argument("mass_action_rhs: dimension mismatch");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> f = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(net.dim());
  for (const auto& r : net.reactions()) {
    const Scalar rate = Scalar(r.kappa) * monomial(x, r.source);
    f += rate * r.zeta().template cast<Scalar>();
  }
  return f;
}

/// Jacobian of mass_action_rhs at x.
Eigen::MatrixXd mass_action_jacobian(const ReactionNetwork& net, const Concentration& x);

/// Lyapunov function sum_i x_i (ln x_i - ln c_i - 1) + c_i, with x ln x
/// extended by 0 at x = 0.
template <typename DerivedX, typename DerivedC>
typename DerivedX::Scalar lyapunov_V(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedC>& c) {
  using Scalar = typename DerivedX::Scalar;
  using std::log;
  Scalar v(0);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] > Scalar(0)) v += x[i] * (log(x[i]) - log(Scalar(c[i])) - Scalar(1));
    v += Scalar(c[i]);
  }
  return v;
}

/// Gradient of lyapunov_V: ln x_i - ln c_i.
Eigen::VectorXd lyapunov_V_gradient(const Concentration& x, const Concentration& c);

struct OdeTrajectory {
  std::vector<double> times;
  std::vector<Concentration> states;
};

struct IntegrationOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  double initial_step = 1e-3;
  double min_step = 1e-14;
  std::size_t max_steps = 10'000'000;
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time_reached)
      : std::runtime_error(what), time_reached_(time_reached) {}
  double time_reached() const { return time_reached_; }

 private:
  double time_reached_;
};

/// Dormand-Prince 5(4) with error control; every accepted step is recorded.
/// Components that dip below zero by at most rel_tol are projected to 0;
/// deeper undershoots reject the step.
OdeTrajectory integrate(const ReactionNetwork& net, const Concentration& x0, double t_end,
                        const IntegrationOptions& opts = {});

inline OdeTrajectory integrate(const ReactionNetwork& net, const Concentration& x0, double t_end, double rel_tol) {
  IntegrationOptions opts;
  opts.rel_tol = rel_tol;
  opts.abs_tol = rel_tol * 1e-4;
  return integrate(net, x0, t_end, opts);
}

struct ComplexResidual {
  Complex complex;
  double inflow = 0.0;
  double outflow = 0.0;
  double residual = 0.0;  // |inflow - outflow| / max(inflow, outflow), or 0 when both vanish
};

struct EquilibriumReport {
  Concentration point;
  std::vector<ComplexResidual> complex_residuals;
  bool is_complex_balanced = false;
  double max_residual = 0.0;
  double tolerance = 0.0;
  double rhs_norm = 0.0;
  bool converged = true;
  bool on_boundary = false;
  int newton_iterations = 0;
};

/// Per-complex balance defects at c > 0.
EquilibriumReport is_complex_balanced(const ReactionNetwork& net, const Concentration& c, double tol);

struct EquilibriumOptions {
  double burn_in_threshold = 1e-3;  // |f| at which Newton takes over
  double burn_in_max_time = 1e6;
  int max_newton_iterations = 200;
  double complex_balance_tol = 1e-8;
};

/// Equilibrium in the compatibility class of x0: ODE burn-in followed by
/// Newton steps confined to the stoichiometric subspace.
EquilibriumReport find_equilibrium(const ReactionNetwork& net, const Concentration& x0,
                                   const EquilibriumOptions& opts = {});

using ScalarField = std::function<double(const Concentration&)>;
using GradientField = std::function<Eigen::VectorXd(const Concentration&)>;

struct LyapunovReport {
  std::vector<Concentration> grid;
  std::vector<double> values;
  std::vector<double> derivative_along_flow;
  double max_derivative = 0.0;
  /// -max_derivative; non-negative when the function is non-increasing on the grid.
  double min_derivative_margin = 0.0;
  /// Grid indices where |derivative| <= zero_tol.
  std::vector<std::size_t> zero_points;
  bool passed = false;
};

struct DecreaseCheckOptions {
  double tol = 1e-8;        // derivative must stay <= tol
  double zero_tol = 1e-10;  // |derivative| below this counts as zero
};

/// Evaluates grad(V_fn).f over the grid, using the supplied gradient when given
/// and central differences (h = 1e-6 (1 + |x|)) otherwise.
LyapunovReport lyapunov_decrease_check(const ReactionNetwork& net, const Concentration& c,
                                       const std::vector<Concentration>& grid, const ScalarField& V_fn,
                                       const GradientField& gradient = {}, const DecreaseCheckOptions& opts = {});

}  // namespace crnlyap
