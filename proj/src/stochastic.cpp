#include "crnlyap/stochastic.hpp"

#include "crnlyap/rng.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

namespace crnlyap {

ScaledNetwork scale_network(const ReactionNetwork& net, double V) {
  if (!(V > 0.0) || !std::isfinite(V)) throw std::invalid_argument("scale_network: V must be positive");
  ScaledNetwork snet{net, V, {}};
  snet.kappa.reserve(net.num_reactions());
  for (const auto& r : net.reactions()) snet.kappa.push_back(r.kappa * std::pow(V, 1.0 - r.order()));
  return snet;
}

double falling_factorial_product(const State& x, const Complex& nu) {
  double value = 1.0;
  for (Eigen::Index i = 0; i < nu.size(); ++i) {
    if (x[i] < nu[i]) return 0.0;
    for (int j = 0; j < nu[i]; ++j) value *= static_cast<double>(x[i] - j);
  }
  return value;
}

double intensity(const ReactionNetwork& net, const State& x, std::size_t k) {
  const auto& r = net.reaction(k);
  return r.kappa * falling_factorial_product(x, r.source);
}

double intensity(const ScaledNetwork& snet, const State& x, std::size_t k) {
  return snet.kappa.at(k) * falling_factorial_product(x, snet.base.reaction(k).source);
}

namespace {

std::vector<State> reaction_vectors(const ReactionNetwork& net) {
  std::vector<State> out;
  for (const auto& r : net.reactions()) out.push_back(r.zeta().cast<std::int64_t>());
  return out;
}

// Runs the direct method, reporting every holding interval [from, to) of a
// state and every jump. Returns true when the chain got absorbed.
template <typename OnHold, typename OnJump>
bool run_direct_method(const ScaledNetwork& snet, const State& x0, double t_end, Xoshiro256& rng,
                       const SsaOptions& opts, std::uint64_t& jumps, OnHold&& on_hold, OnJump&& on_jump) {
  const auto zetas = reaction_vectors(snet.base);
  const std::size_t m = snet.num_reactions();
  std::vector<double> rates(m);
  State x = x0;
  double t = 0.0;
  jumps = 0;
  while (true) {
    double total = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      rates[k] = intensity(snet, x, k);
      total += rates[k];
    }
    if (total <= 0.0) {
      on_hold(x, t, t_end);
      return true;
    }
    const double tau = -std::log1p(-rng.uniform()) / total;
    if (t + tau > t_end) {
      on_hold(x, t, t_end);
      return false;
    }
    on_hold(x, t, t + tau);
    t += tau;
    const double target = rng.uniform() * total;
    double acc = 0.0;
    std::size_t chosen = m;
    for (std::size_t k = 0; k < m; ++k) {
      if (rates[k] <= 0.0) continue;
      chosen = k;
      acc += rates[k];
      if (target < acc) break;
    }
    x += zetas[chosen];
    if (++jumps > opts.max_jumps) throw JumpLimitExceeded("ssa: jump limit exceeded");
    on_jump(t, x);
  }
}

}  // namespace

Trajectory ssa_simulate(const ScaledNetwork& snet, const State& x0, double t_end, std::uint64_t seed,
                        const SsaOptions& opts) {
  if (x0.size() != snet.dim() || (x0.array() < 0).any()) throw std::invalid_argument("ssa_simulate: invalid x0");
  if (!(t_end > 0.0)) throw std::invalid_argument("ssa_simulate: t_end must be positive");
  Trajectory traj;
  traj.seed = seed;
  traj.t_end = t_end;
  traj.times.push_back(0.0);
  traj.states.push_back(x0);
  Xoshiro256 rng(seed, opts.stream);
  std::uint64_t jumps = 0;
  traj.absorbed = run_direct_method(
      snet, x0, t_end, rng, opts, jumps, [](const State&, double, double) {},
      [&](double t, const State& x) {
        traj.times.push_back(t);
        traj.states.push_back(x);
      });
  return traj;
}

EmpiricalStationary empirical_stationary(const ScaledNetwork& snet, const State& x0, double burn_in, double t_total,
                                         std::uint64_t seed, const SsaOptions& opts) {
  if (!(t_total > burn_in) || burn_in < 0.0) {
    throw std::invalid_argument("empirical_stationary: need 0 <= burn_in < t_total");
  }
  if (x0.size() != snet.dim() || (x0.array() < 0).any()) throw std::invalid_argument("empirical_stationary: invalid x0");
  std::unordered_map<State, double, StateHash, StateEqual> occupation;
  Xoshiro256 rng(seed, opts.stream);
  EmpiricalStationary out;
  out.absorbed = run_direct_method(
      snet, x0, t_total, rng, opts, out.jumps,
      [&](const State& x, double from, double to) {
        const double lo = std::max(from, burn_in);
        if (to > lo) occupation[x] += to - lo;
      },
      [](double, const State&) {});
  std::vector<State> states;
  std::vector<double> log_mass;
  for (const auto& [state, time] : occupation) {
    states.push_back(state);
    log_mass.push_back(std::log(time));
  }
  out.distribution = StateDistribution(std::move(states), std::move(log_mass), "empirical");
  return out;
}

Component enumerate_component(const ScaledNetwork& snet, const State& x0, const State& box) {
  const int d = snet.dim();
  if (x0.size() != d || box.size() != d) throw std::invalid_argument("enumerate_component: dimension mismatch");
  if ((x0.array() < 0).any() || (x0.array() > box.array()).any()) {
    throw std::invalid_argument("enumerate_component: x0 outside the box");
  }
  const auto zetas = reaction_vectors(snet.base);
  auto in_box = [&](const State& y) { return (y.array() >= 0).all() && (y.array() <= box.array()).all(); };

  std::vector<State> reached{x0};
  std::unordered_map<State, std::size_t, StateHash, StateEqual> index{{x0, 0}};
  std::vector<std::vector<std::size_t>> predecessors(1);
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    for (std::size_t k = 0; k < zetas.size(); ++k) {
      if (intensity(snet, reached[i], k) <= 0.0) continue;
      State y = reached[i] + zetas[k];
      if (!in_box(y)) continue;
      auto [it, inserted] = index.emplace(y, reached.size());
      if (inserted) {
        reached.push_back(std::move(y));
        predecessors.emplace_back();
        queue.push_back(it->second);
      }
      predecessors[it->second].push_back(i);
    }
  }

  // States of the forward set that can reach x0 back.
  std::vector<char> in_class(reached.size(), 0);
  in_class[0] = 1;
  queue.push_back(0);
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    for (std::size_t p : predecessors[i]) {
      if (!in_class[p]) {
        in_class[p] = 1;
        queue.push_back(p);
      }
    }
  }

  Component comp;
  comp.box = box;
  for (std::size_t i = 0; i < reached.size(); ++i) {
    if (!in_class[i]) continue;
    comp.states.push_back(reached[i]);
    for (std::size_t k = 0; k < zetas.size(); ++k) {
      if (intensity(snet, reached[i], k) <= 0.0) continue;
      const State y = reached[i] + zetas[k];
      if (!in_box(y)) {
        comp.leaks_box = true;
      } else if (!in_class[index.at(y)]) {
        comp.leaks_component = true;
      }
    }
  }
  std::sort(comp.states.begin(), comp.states.end(), state_less);
  return comp;
}

State default_initial_box(double V, const Concentration& guess) {
  State box(guess.size());
  for (Eigen::Index i = 0; i < guess.size(); ++i) {
    box[i] = std::max<std::int64_t>(static_cast<std::int64_t>(std::ceil(4.0 * V * guess[i])), 32);
  }
  return box;
}

}  // namespace crnlyap
