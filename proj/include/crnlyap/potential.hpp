#pragma once

#include "crnlyap/distribution.hpp"
#include "crnlyap/network.hpp"
#include "crnlyap/stochastic.hpp"

#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace crnlyap {

struct PotentialCurve {
  std::vector<Concentration> grid;  // lexicographically increasing
  std::vector<double> values;
  std::string label;
  std::optional<double> V;
};

struct ConvergenceReport {
  std::vector<PotentialCurve> curves;  // V ascending
  PotentialCurve limit;
  std::map<double, double> sup_errors;
  /// (1/V) ln Z_Gamma for product-form solutions, NaN for the other methods.
  std::map<double, double> z_log;
  std::map<double, std::string> methods;
  /// Positive equilibrium of the grid's compatibility class, when one was found.
  std::optional<Concentration> equilibrium;
};

/// Poisson(V c) product restricted to the given states and renormalized.
/// log_Z() reports ln Z_Gamma, the Poisson mass of the set. Throws
/// std::domain_error unless c is complex balanced (tolerance 1e-8).
StateDistribution product_form_pi(const Concentration& c, const ScaledNetwork& snet, const std::vector<State>& states);

/// Same on an enumerated component. If the component was cut by its box, the
/// Poisson mass beyond the box bounds the error and goes to tail_mass_bound.
StateDistribution product_form_pi(const Concentration& c, const ScaledNetwork& snet, const Component& component);

/// Component of x0 for a product-form solution: the box grows until the
/// component fits or the Poisson(V c) mass outside it is below tail_tol.
Component product_form_component(const Concentration& c, const ScaledNetwork& snet, const State& x0,
                                 const State& minimum_box, double tail_tol = 1e-14,
                                 std::int64_t cap = std::int64_t{1} << 20);

/// -ln pi(x); throws std::out_of_range outside the support.
double nonequilibrium_potential(const StateDistribution& dist, const State& x);

/// Support state nearest to V x_tilde among the floor/ceil combinations of its
/// coordinates (Euclidean distance, ties toward the lexicographically smaller
/// state). Throws std::out_of_range if none is in the support within 1/2 in
/// max norm.
State snap_to_support(const StateDistribution& dist, double V, const Concentration& x_tilde);

/// -(1/V) ln pi(V x_tilde) at the snapped state.
double scaled_nep(const StateDistribution& dist, double V, const Concentration& x_tilde);

/// Point of the compatibility class of x0 whose leading rank(S) coordinates are
/// `head`. Throws std::invalid_argument if those coordinates do not determine
/// the rest.
Concentration complete_on_class(const ReactionNetwork& net, const Concentration& x0, const Eigen::VectorXd& head);

struct GridAxis {
  double min = 0.0;
  double max = 1.0;
  int count = 2;
};

/// Cartesian product of evenly spaced axes, first axis slowest.
std::vector<Eigen::VectorXd> make_grid(const std::vector<GridAxis>& axes);

using LimitFunction = std::function<double(const Concentration&)>;

struct ConvergenceOptions {
  /// Concentration selecting the compatibility class; defaults to the first
  /// grid point.
  std::optional<Concentration> x0;
  TruncationPolicy truncation;
  double tail_tol = 1e-14;
};

/// Stationary distribution at one V, chosen in the order product form,
/// birth-death, brute force. `min_cover` is the smallest box the support must
/// reach (per species).
StateDistribution solve_stationary(const ReactionNetwork& net, double V, const Concentration& x0,
                                   const State& min_cover, const ConvergenceOptions& options = {});

ConvergenceReport nep_convergence_study(const ReactionNetwork& net, const std::vector<double>& V_list,
                                        const std::vector<Concentration>& grid, const LimitFunction& limit_fn,
                                        const ConvergenceOptions& options = {});

/// Header x_tilde_1,...,x_tilde_d,value,label,V; grid order, V ascending,
/// limit last with an empty V.
void write_curves_csv(std::ostream& out, const ConvergenceReport& report);

}  // namespace crnlyap
