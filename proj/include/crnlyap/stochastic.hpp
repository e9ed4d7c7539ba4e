#pragma once

#include "crnlyap/distribution.hpp"
#include "crnlyap/network.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace crnlyap {

/// Network with rate constants under the classical scaling,
/// kappa^V_k = kappa_k / V^{|nu_k| - 1}.
struct ScaledNetwork {
  ReactionNetwork base;
  double V = 1.0;
  std::vector<double> kappa;

  int dim() const { return base.dim(); }
  std::size_t num_reactions() const { return base.num_reactions(); }
};

ScaledNetwork scale_network(const ReactionNetwork& net, double V);

/// prod_i x_i (x_i - 1) ... (x_i - nu_i + 1); zero when some x_i < nu_i.
double falling_factorial_product(const State& x, const Complex& nu);

/// Stochastic mass-action intensity of reaction k at x.
double intensity(const ReactionNetwork& net, const State& x, std::size_t k);
double intensity(const ScaledNetwork& snet, const State& x, std::size_t k);

struct Trajectory {
  std::vector<double> times;  // jump times, starting with 0 for the initial state
  std::vector<State> states;
  std::uint64_t seed = 0;
  double t_end = 0.0;
  bool absorbed = false;  // every intensity vanished before t_end
};

struct SsaOptions {
  std::uint64_t max_jumps = 100'000'000;
  std::uint64_t stream = 0;
};

class JumpLimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Direct-method (Gillespie) sample path on [0, t_end].
Trajectory ssa_simulate(const ScaledNetwork& snet, const State& x0, double t_end, std::uint64_t seed,
                        const SsaOptions& opts = {});

struct EmpiricalStationary {
  StateDistribution distribution;
  bool absorbed = false;
  std::uint64_t jumps = 0;
};

/// Occupation-time fractions over (burn_in, t_total].
EmpiricalStationary empirical_stationary(const ScaledNetwork& snet, const State& x0, double burn_in, double t_total,
                                         std::uint64_t seed, const SsaOptions& opts = {});

struct Component {
  std::vector<State> states;  // lexicographic order
  State box;
  /// Some in-component state has a positive-rate transition out of the box.
  bool leaks_box = false;
  /// Some in-component state has a positive-rate transition to an in-box
  /// state outside the component.
  bool leaks_component = false;
};

/// Strongly connected class of x0 in the transition graph restricted to the
/// box [0, box_i].
Component enumerate_component(const ScaledNetwork& snet, const State& x0, const State& box);

class StationarySolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stationary distribution of the chain restricted to `component`: transitions
/// with a target outside the component are dropped from both sides of the
/// balance equations. Solved by GTH state reduction with log-space back
/// substitution, so masses far below the double range are represented.
StateDistribution solve_stationary_truncated(const ScaledNetwork& snet, const Component& component);

/// Largest relative defect |inflow - outflow| / max(inflow, outflow) of the
/// stationary balance equations over interior states of the support (states
/// whose every positive-rate predecessor and successor lies in the support).
double balance_residual(const ScaledNetwork& snet, const StateDistribution& dist);

struct TruncationPolicy {
  State initial_box;   // empty: componentwise max(4 V x_guess, 32)
  State minimum_box;   // optional lower bound (e.g. to cover a grid)
  std::int64_t cap = 1 << 20;  // per-species limit for the doubling
  double tv_tol = 1e-10;
};

/// Doubles the box until consecutive truncated solutions differ by less than
/// tv_tol in total variation.
StateDistribution solve_stationary_auto(const ScaledNetwork& snet, const State& x0, const TruncationPolicy& policy);

/// Componentwise max(ceil(4 V guess_i), 32).
State default_initial_box(double V, const Concentration& guess);

}  // namespace crnlyap
