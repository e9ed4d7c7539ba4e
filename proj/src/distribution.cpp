#include "crnlyap/distribution.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace crnlyap {

double log_sum_exp(std::span<const double> values) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : values) peak = std::max(peak, v);
  if (!std::isfinite(peak)) return peak;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - peak);
  return peak + std::log(sum);
}

StateDistribution::StateDistribution(std::vector<State> support, std::vector<double> log_mass, std::string method)
    : method_(std::move(method)) {
  if (support.size() != log_mass.size()) throw std::invalid_argument("StateDistribution: size mismatch");
  std::vector<std::size_t> order(support.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return state_less(support[a], support[b]); });
  log_Z_ = log_sum_exp(log_mass);
  if (!support.empty() && !std::isfinite(log_Z_)) throw std::domain_error("StateDistribution: masses not normalizable");
  support_.reserve(support.size());
  log_prob_.reserve(support.size());
  for (std::size_t i : order) {
    support_.push_back(std::move(support[i]));
    log_prob_.push_back(log_mass[i] - log_Z_);
  }
  index_.reserve(support_.size());
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (!index_.emplace(support_[i], i).second) throw std::invalid_argument("StateDistribution: duplicate state");
  }
}

std::optional<std::size_t> StateDistribution::index_of(const State& x) const {
  auto it = index_.find(x);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double StateDistribution::log_prob_at(const State& x) const {
  auto i = index_of(x);
  return i ? log_prob_[*i] : -std::numeric_limits<double>::infinity();
}

double total_variation(const StateDistribution& a, const StateDistribution& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double pb = std::exp(b.log_prob_at(a.state(i)));
    sum += std::abs(a.prob(i) - pb);
  }
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (!a.index_of(b.state(j))) sum += b.prob(j);
  }
  return 0.5 * sum;
}

}  // namespace crnlyap
