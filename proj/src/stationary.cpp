#include "crnlyap/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>

namespace crnlyap {

StateDistribution solve_stationary_truncated(const ScaledNetwork& snet, const Component& component) {
  const auto& states = component.states;
  const std::size_t n_states = states.size();
  if (n_states == 0) throw StationarySolveError("solve_stationary_truncated: empty component");

  std::unordered_map<State, std::size_t, StateHash, StateEqual> index;
  index.reserve(n_states);
  for (std::size_t i = 0; i < n_states; ++i) index.emplace(states[i], i);

  // rates[i][j]: total intensity of i -> j inside the component.
  std::vector<std::map<std::size_t, double>> rates(n_states);
  std::vector<std::set<std::size_t>> incoming(n_states);
  for (std::size_t i = 0; i < n_states; ++i) {
    for (std::size_t k = 0; k < snet.num_reactions(); ++k) {
      const double a = intensity(snet, states[i], k);
      if (a <= 0.0) continue;
      const State y = states[i] + snet.base.reaction(k).zeta().cast<std::int64_t>();
      auto it = index.find(y);
      if (it == index.end()) continue;
      rates[i][it->second] += a;
      incoming[it->second].insert(i);
    }
  }

  // GTH state reduction, eliminating from the last state down.
  std::vector<double> exit_rate(n_states, 0.0);
  for (std::size_t n = n_states - 1; n >= 1; --n) {
    double s = 0.0;
    const auto& row = rates[n];
    const auto row_end = row.lower_bound(n);
    for (auto it = row.begin(); it != row_end; ++it) s += it->second;
    if (!(s > 0.0)) throw StationarySolveError("solve_stationary_truncated: component is not irreducible");
    exit_rate[n] = s;
    for (std::size_t i : incoming[n]) {
      if (i >= n) continue;
      const double a = rates[i].at(n);
      for (auto it = row.begin(); it != row_end; ++it) {
        if (it->first == i) continue;
        rates[i][it->first] += a * it->second / s;
        incoming[it->first].insert(i);
      }
    }
  }

  std::vector<double> log_mass(n_states, 0.0);
  std::vector<double> terms;
  for (std::size_t j = 1; j < n_states; ++j) {
    terms.clear();
    for (std::size_t i : incoming[j]) {
      if (i < j) terms.push_back(log_mass[i] + std::log(rates[i].at(j)));
    }
    log_mass[j] = log_sum_exp(terms) - std::log(exit_rate[j]);
    if (!std::isfinite(log_mass[j])) {
      throw StationarySolveError("solve_stationary_truncated: component is not irreducible");
    }
  }

  StateDistribution dist(states, std::move(log_mass), "brute-force");
  dist.truncated = component.leaks_box;
  dist.max_balance_residual = balance_residual(snet, dist);
  return dist;
}

double balance_residual(const ScaledNetwork& snet, const StateDistribution& dist) {
  std::vector<State> zetas;
  for (const auto& r : snet.base.reactions()) zetas.push_back(r.zeta().cast<std::int64_t>());
  double worst = 0.0;
  for (std::size_t idx = 0; idx < dist.size(); ++idx) {
    const State& x = dist.state(idx);
    double outflow = 0.0;
    double inflow = 0.0;  // relative to pi(x)
    bool interior = true;
    for (std::size_t k = 0; k < zetas.size() && interior; ++k) {
      const double a = intensity(snet, x, k);
      if (a > 0.0) {
        outflow += a;
        interior = dist.index_of(x + zetas[k]).has_value();
      }
      const State pred = x - zetas[k];
      if ((pred.array() < 0).any()) continue;
      const double b = intensity(snet, pred, k);
      if (b <= 0.0) continue;
      auto j = dist.index_of(pred);
      if (!j) {
        interior = false;
        break;
      }
      inflow += b * std::exp(dist.log_prob(*j) - dist.log_prob(idx));
    }
    if (!interior) continue;
    const double scale = std::max(inflow, outflow);
    if (scale > 0.0) worst = std::max(worst, std::abs(inflow - outflow) / scale);
  }
  return worst;
}

StateDistribution solve_stationary_auto(const ScaledNetwork& snet, const State& x0, const TruncationPolicy& policy) {
  State box = policy.initial_box.size() == snet.dim()
                  ? policy.initial_box
                  : default_initial_box(snet.V, x0.cast<double>() / snet.V);
  box = box.cwiseMax(x0);
  if (policy.minimum_box.size() == snet.dim()) box = box.cwiseMax(policy.minimum_box);

  std::optional<StateDistribution> previous;
  while (true) {
    const Component comp = enumerate_component(snet, x0, box);
    StateDistribution dist = solve_stationary_truncated(snet, comp);
    if (!comp.leaks_box) {
      dist.truncated = false;
      dist.tail_mass_bound = 0.0;
      return dist;
    }
    if (previous) {
      const double tv = total_variation(*previous, dist);
      if (tv < policy.tv_tol) {
        dist.truncated = true;
        dist.tail_mass_bound = tv;
        return dist;
      }
    }
    previous = std::move(dist);
    box *= 2;
    if (box.maxCoeff() > policy.cap) {
      throw StationarySolveError("solve_stationary_auto: truncation did not converge below the cap");
    }
  }
}

}  // namespace crnlyap
