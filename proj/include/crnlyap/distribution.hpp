#pragma once

#include "crnlyap/network.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace crnlyap {

/// log(sum exp(v)); -inf for an empty range.
double log_sum_exp(std::span<const double> values);

/// Probability mass function on a finite set of states, stored in log space.
///
/// Support is kept in lexicographic order; log_Z is the log of the constant the
/// unnormalized masses were divided by.
class StateDistribution {
 public:
  StateDistribution() = default;
  /// Normalizes `log_mass` with log-sum-exp. States must be pairwise distinct.
  StateDistribution(std::vector<State> support, std::vector<double> log_mass, std::string method);

  std::size_t size() const { return support_.size(); }
  bool empty() const { return support_.empty(); }
  const std::vector<State>& support() const { return support_; }
  const State& state(std::size_t i) const { return support_[i]; }
  double log_prob(std::size_t i) const { return log_prob_[i]; }
  double prob(std::size_t i) const { return std::exp(log_prob_[i]); }
  const std::vector<double>& log_probs() const { return log_prob_; }

  std::optional<std::size_t> index_of(const State& x) const;
  /// -inf outside the support.
  double log_prob_at(const State& x) const;

  double log_Z() const { return log_Z_; }
  double Z() const { return std::exp(log_Z_); }
  /// Overrides the recorded normalizer (e.g. a closed-form partition function).
  void set_log_Z(double log_z) { log_Z_ = log_z; }

  const std::string& method() const { return method_; }
  void set_method(std::string m) { method_ = std::move(m); }

  bool truncated = false;
  double tail_mass_bound = 0.0;
  /// Largest relative defect of the stationary balance equations on interior
  /// states, when it was computed.
  double max_balance_residual = std::numeric_limits<double>::quiet_NaN();

 private:
  std::vector<State> support_;
  std::vector<double> log_prob_;
  std::unordered_map<State, std::size_t, StateHash, StateEqual> index_;
  double log_Z_ = 0.0;
  std::string method_;
};

/// Total variation distance, treating missing states as zero mass.
double total_variation(const StateDistribution& a, const StateDistribution& b);

}  // namespace crnlyap
