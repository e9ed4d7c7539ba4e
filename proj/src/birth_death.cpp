#include "crnlyap/birth_death.hpp"

#include "crnlyap/quadrature.hpp"
#include "crnlyap/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

namespace crnlyap {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kQuadAbsTol = 1e-12;
constexpr double kQuadRelTol = 1e-14;

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double falling_factorial(std::int64_t i, int n) {
  if (i < n) return 0.0;
  double value = 1.0;
  for (int j = 0; j < n; ++j) value *= static_cast<double>(i - j);
  return value;
}

// ln sum_n kappa_n u^(n - shift), with ln u passed in; u = 0 is log_u = -inf.
double log_poly(const std::map<int, double>& rates, double log_u, int shift) {
  double acc = kNegInf;
  for (const auto& [n, kappa] : rates) {
    const int power = n - shift;
    const double term = power == 0 ? std::log(kappa) : std::log(kappa) + power * log_u;
    acc = log_add(acc, term);
  }
  return acc;
}

double sum_rates(const std::map<int, double>& rates, double V, std::int64_t i) {
  double total = 0.0;
  for (const auto& [n, kappa] : rates) total += kappa * std::pow(V, 1.0 - n) * falling_factorial(i, n);
  return total;
}

int min_index(const std::map<int, double>& rates) { return rates.begin()->first; }

// x ln x - x, continuous at 0.
double xlogx_minus_x(double x) { return x > 0.0 ? x * std::log(x) - x : 0.0; }

}  // namespace

BirthDeathVerdict classify_birth_death(const ReactionNetwork& net) {
  BirthDeathVerdict verdict;
  if (net.dim() != 1) {
    verdict.reason = "network has " + std::to_string(net.dim()) + " species";
    return verdict;
  }
  BirthDeathModel model;
  for (const auto& r : net.reactions()) {
    const int step = r.zeta()[0];
    const int n = r.source[0];
    if (step == 1) {
      model.up[n] += r.kappa;
    } else if (step == -1) {
      model.down[n] += r.kappa;
    } else {
      verdict.reason = "reaction with net change " + std::to_string(step);
      return verdict;
    }
  }
  if (model.up.empty() || model.down.empty()) {
    verdict.reason = model.up.empty() ? "no up reaction" : "no down reaction";
    return verdict;
  }
  model.n_u = model.up.rbegin()->first;
  model.n_d = model.down.rbegin()->first;
  verdict.model = std::move(model);
  return verdict;
}

BirthDeathModel apply_modification(BirthDeathModel model) {
  if (model.modified) return model;
  const int max_source = std::max(model.n_u, model.n_d);
  const std::int64_t cap = 10 * static_cast<std::int64_t>(max_source) + 10;
  const int first_up = min_index(model.up);
  const int first_down = min_index(model.down);
  for (std::int64_t i = 0; i <= cap; ++i) {
    if (i >= first_up && i + 1 >= first_down) {
      model.i0 = i;
      model.modified = true;
      return model;
    }
  }
  throw std::domain_error("apply_modification: no admissible lowest state below the search cap");
}

ExistenceReport bd_existence(const BirthDeathModel& model) {
  ExistenceReport report;
  std::ostringstream msg;
  if (model.n_d > model.n_u) {
    report.exists = true;
    report.condition = 1;
    msg << "stationary distribution exists: n_d = " << model.n_d << " > n_u = " << model.n_u
        << " (condition (1))";
  } else if (model.n_d == model.n_u && model.down.at(model.n_d) > model.up.at(model.n_u)) {
    report.exists = true;
    report.condition = 2;
    msg << "stationary distribution exists: n_d = n_u = " << model.n_u << " and kappa_-" << model.n_d << " = "
        << model.down.at(model.n_d) << " > kappa_" << model.n_u << " = " << model.up.at(model.n_u)
        << " (condition (2))";
  } else {
    msg << "no stationary distribution: n_d ≤ n_u and condition (2) fails (n_u = " << model.n_u
        << ", n_d = " << model.n_d << ")";
  }
  report.message = msg.str();
  return report;
}

double bd_birth_rate(const BirthDeathModel& model, double V, std::int64_t i) { return sum_rates(model.up, V, i); }

double bd_death_rate(const BirthDeathModel& model, double V, std::int64_t i) {
  if (model.modified && i <= model.i0) return 0.0;
  return sum_rates(model.down, V, i);
}

StateDistribution bd_stationary(const BirthDeathModel& input, double V, const BirthDeathPolicy& policy) {
  if (!(V > 0.0)) throw std::invalid_argument("bd_stationary: V must be positive");
  const BirthDeathModel model = apply_modification(input);
  const ExistenceReport existence = bd_existence(model);
  if (!existence.exists) throw NoStationaryDistribution(existence);

  const double top_down = model.down.at(model.n_d) * std::pow(V, 1.0 - model.n_d);
  // For i >= n_d, p_{i-1}/q_i <= sum_up kappa^V_n i^n / (kappa^V_{-n_d} (i - n_d + 1)^{n_d}),
  // and the right side is non-increasing in i since every n <= n_d.
  auto ratio_bound = [&](std::int64_t i) {
    double up = 0.0;
    for (const auto& [n, kappa] : model.up) up += kappa * std::pow(V, 1.0 - n) * std::pow(static_cast<double>(i), n);
    return up / (top_down * std::pow(static_cast<double>(i - model.n_d + 1), model.n_d));
  };

  std::vector<State> states;
  std::vector<double> log_mass;
  states.push_back(State::Constant(1, model.i0));
  log_mass.push_back(0.0);
  double log_total = 0.0;
  double tail = std::numeric_limits<double>::infinity();
  for (std::int64_t x = model.i0 + 1;; ++x) {
    const double step = std::log(bd_birth_rate(model, V, x - 1)) - std::log(bd_death_rate(model, V, x));
    log_mass.push_back(log_mass.back() + step);
    states.push_back(State::Constant(1, x));
    log_total = log_add(log_total, log_mass.back());
    if (x >= policy.min_state && x + 1 >= model.n_d) {
      const double beta = ratio_bound(x + 1);
      if (beta < 1.0) {
        tail = std::exp(log_mass.back() - log_total) * beta / (1.0 - beta);
        if (tail < policy.tail_tol) break;
      }
    }
    if (x - model.i0 > policy.cap) throw StationarySolveError("bd_stationary: tail bound not reached below the cap");
  }
  StateDistribution dist(std::move(states), std::move(log_mass), "birth-death");
  dist.truncated = true;
  dist.tail_mass_bound = tail;
  return dist;
}

double g_integrand(const BirthDeathModel& model, double u) {
  if (!(u > 0.0)) throw std::invalid_argument("g_integrand: u must be positive");
  const double log_u = std::log(u);
  return log_poly(model.up, log_u, 0) - log_poly(model.down, log_u, 0);
}

double default_search_cap(const BirthDeathModel& model) {
  std::map<int, double> coeff;
  for (const auto& [n, k] : model.up) coeff[n] += k;
  for (const auto& [n, k] : model.down) coeff[n] -= k;
  while (!coeff.empty() && coeff.rbegin()->second == 0.0) coeff.erase(std::prev(coeff.end()));
  if (coeff.size() < 2) return 2.0;
  const double lead = std::abs(coeff.rbegin()->second);
  double worst = 0.0;
  for (auto it = coeff.begin(); it != std::prev(coeff.end()); ++it) worst = std::max(worst, std::abs(it->second) / lead);
  return 2.0 * (1.0 + worst);
}

std::vector<double> integrand_roots(const BirthDeathModel& model, double search_cap) {
  if (!(search_cap > 0.0)) throw std::invalid_argument("integrand_roots: cap must be positive");
  constexpr int kGrid = 20000;
  const double lo = search_cap * 1e-12;
  const double ratio = std::pow(search_cap / lo, 1.0 / (kGrid - 1));
  std::vector<double> roots;
  double prev_u = lo;
  double prev_f = g_integrand(model, lo);
  if (prev_f == 0.0) roots.push_back(lo);
  for (int k = 1; k < kGrid; ++k) {
    const double u = k == kGrid - 1 ? search_cap : lo * std::pow(ratio, k);
    const double f = g_integrand(model, u);
    if (f == 0.0) {
      roots.push_back(u);
    } else if (prev_f != 0.0 && (f > 0.0) != (prev_f > 0.0)) {
      double a = prev_u;
      double b = u;
      const bool rising = f > 0.0;
      for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = g_integrand(model, mid);
        if (fm == 0.0) {
          a = b = mid;
          break;
        }
        if ((fm > 0.0) == rising) {
          b = mid;
        } else {
          a = mid;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_u = u;
    prev_f = f;
  }
  return roots;
}

double find_x_max(const BirthDeathModel& model, double search_cap) {
  if (g_integrand(model, search_cap) > 0.0) {
    throw std::domain_error("find_x_max: search cap too small, integrand still positive at the cap");
  }
  const GLimit probe(model, 0.0);
  double best_x = 0.0;
  double best = 0.0;
  for (double root : integrand_roots(model, search_cap)) {
    const double value = probe.cumulative(root);
    if (value > best + 1e-12 * (1.0 + std::abs(best))) {
      best = value;
      best_x = root;
    }
  }
  return best_x;
}

double find_x_max(const BirthDeathModel& model) { return find_x_max(model, default_search_cap(model)); }

GLimit::GLimit(BirthDeathModel model, double x_max)
    : model_(std::move(model)),
      x_max_(x_max),
      log_power_(min_index(model_.up) - min_index(model_.down)) {
  if (!(x_max >= 0.0)) throw std::invalid_argument("GLimit: x_max must be non-negative");
}

// The integrand is (p - q) ln u + r(u) with p, q the smallest up and down
// indices; r is smooth on [0, inf), so only the log term needs care at 0.
double GLimit::cumulative(double x) const {
  if (!(x >= 0.0)) throw std::invalid_argument("GLimit: x must be non-negative");
  if (x == 0.0) return 0.0;
  const int p = min_index(model_.up);
  const int q = min_index(model_.down);
  auto smooth = [&](double u) {
    const double log_u = u > 0.0 ? std::log(u) : kNegInf;
    return log_poly(model_.up, log_u, p) - log_poly(model_.down, log_u, q);
  };
  return log_power_ * xlogx_minus_x(x) + integrate_or_throw(smooth, 0.0, x, kQuadAbsTol, kQuadRelTol);
}

double GLimit::operator()(double x) const {
  if (!(x >= 0.0)) throw std::invalid_argument("GLimit: x must be non-negative");
  const int p = min_index(model_.up);
  const int q = min_index(model_.down);
  auto smooth = [&](double u) {
    const double log_u = u > 0.0 ? std::log(u) : kNegInf;
    return log_poly(model_.up, log_u, p) - log_poly(model_.down, log_u, q);
  };
  const double log_part = log_power_ * (xlogx_minus_x(x) - xlogx_minus_x(x_max_));
  return -(log_part + integrate_or_throw(smooth, x_max_, x, kQuadAbsTol, kQuadRelTol));
}

GLimit g_limit(const BirthDeathModel& model) {
  const ExistenceReport existence = bd_existence(model);
  if (!existence.exists) throw NoStationaryDistribution(existence);
  return GLimit(model, find_x_max(model));
}

double g_limit(const BirthDeathModel& model, double x) { return g_limit(model)(x); }

namespace {

void expect_params(std::string_view id, std::span<const double> params, std::size_t n) {
  if (params.size() != n) {
    throw std::invalid_argument("reference_g: '" + std::string(id) + "' takes " + std::to_string(n) + " parameter(s)");
  }
  for (double v : params) {
    if (!(v > 0.0)) throw std::invalid_argument("reference_g: parameters must be positive");
  }
}

[[noreturn]] void unknown_reference(std::string_view id) {
  throw std::invalid_argument("reference_g: unknown example '" + std::string(id) + "'");
}

}  // namespace

double reference_g(std::string_view id, std::span<const double> params, double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("reference_g: x must be non-negative");
  if (id == "cubic-bistable") {
    expect_params(id, params, 0);
    const double s11 = std::sqrt(11.0);
    const double head = x > 0.0 ? x * (std::log(x * (x * x + 11.0) / (x * x + 1.0)) - std::log(6.0) - 1.0) : 0.0;
    return head + 2.0 * s11 * std::atan(x / s11) - 2.0 * std::atan(x) - 2.0 * s11 * std::atan(1.0 / s11) + 1.0 +
           0.5 * std::numbers::pi;
  }
  if (id == "cubic-poisson") {
    expect_params(id, params, 1);
    const double B = params[0];
    return xlogx_minus_x(x) - x * std::log(B) + B;
  }
  if (id == "linear-absorbing") {
    expect_params(id, params, 1);
    return -x * std::log(params[0]);
  }
  if (id == "dimerization") {
    expect_params(id, params, 1);
    const double a = params[0];
    const double root = std::sqrt(x * x + 4.0 * a * a);
    const double xlx = x > 0.0 ? x * std::log(x) : 0.0;
    const double tail = x > 0.0 ? x * std::log(x + root) : 0.0;
    return 2.0 * std::numbers::sqrt2 * a - 2.0 * x * std::log(a) + xlx - x * (1.0 + std::numbers::ln2) - root + tail;
  }
  if (id == "pair-birth") {
    expect_params(id, params, 1);
    const double a = params[0];
    // ln(sqrt(1 + 2u/a) - 1) = ln u + ln(2 / (a (sqrt(1 + 2u/a) + 1)))
    auto smooth = [a](double u) { return std::log(2.0 / (a * (std::sqrt(1.0 + 2.0 * u / a) + 1.0))); };
    // The bare integral vanishes at 0, where the scaled potential equals 3a.
    return 3.0 * a + xlogx_minus_x(x) + integrate_or_throw(smooth, 0.0, x, kQuadAbsTol, kQuadRelTol) -
           std::numbers::ln2 * x;
  }
  unknown_reference(id);
}

double reference_g_derivative(std::string_view id, std::span<const double> params, double x) {
  if (!(x > 0.0)) throw std::invalid_argument("reference_g_derivative: x must be positive");
  if (id == "cubic-bistable") {
    expect_params(id, params, 0);
    return -std::log((6.0 + 6.0 * x * x) / (11.0 * x + x * x * x));
  }
  if (id == "cubic-poisson") {
    expect_params(id, params, 1);
    return std::log(x) - std::log(params[0]);
  }
  if (id == "linear-absorbing") {
    expect_params(id, params, 1);
    return -std::log(params[0]);
  }
  if (id == "dimerization") {
    expect_params(id, params, 1);
    const double a = params[0];
    return std::log(x) + std::log(x + std::sqrt(x * x + 4.0 * a * a)) - 2.0 * std::log(a) - std::numbers::ln2;
  }
  if (id == "pair-birth") {
    expect_params(id, params, 1);
    return std::log(std::sqrt(1.0 + 2.0 * x / params[0]) - 1.0) - std::numbers::ln2;
  }
  unknown_reference(id);
}

double reference_g_second_derivative(std::string_view id, std::span<const double> params, double x) {
  if (!(x > 0.0)) throw std::invalid_argument("reference_g_second_derivative: x must be positive");
  if (id == "cubic-bistable") {
    expect_params(id, params, 0);
    return -12.0 * x / (6.0 + 6.0 * x * x) + (11.0 + 3.0 * x * x) / (11.0 * x + x * x * x);
  }
  if (id == "cubic-poisson") {
    expect_params(id, params, 1);
    return 1.0 / x;
  }
  if (id == "linear-absorbing") {
    expect_params(id, params, 1);
    return 0.0;
  }
  if (id == "dimerization") {
    expect_params(id, params, 1);
    const double a = params[0];
    return 1.0 / x + 1.0 / std::sqrt(x * x + 4.0 * a * a);
  }
  if (id == "pair-birth") {
    expect_params(id, params, 1);
    const double a = params[0];
    const double s = std::sqrt(1.0 + 2.0 * x / a);
    return 1.0 / (a * s * (s - 1.0));
  }
  unknown_reference(id);
}

StateDistribution pair_birth_pi(double a, double V, std::int64_t min_state, double tail_tol) {
  if (!(a > 0.0) || !(V > 0.0)) throw std::invalid_argument("pair_birth_pi: a and V must be positive");
  const double lambda1 = 2.0 * a * V;
  const double lambda2 = a * V;
  const double log_l1 = std::log(lambda1);
  const double log_l2 = std::log(lambda2);
  // P(N >= x) <= E[e^N] e^{-x}.
  auto chernoff_log = [&](double x) { return lambda1 * (std::numbers::e - 1.0) + lambda2 * (std::exp(2.0) - 1.0) - x; };

  std::vector<State> states;
  std::vector<double> log_mass;
  std::vector<double> terms;
  for (std::int64_t x = 0;; ++x) {
    terms.clear();
    for (std::int64_t m = 0; 2 * m <= x; ++m) {
      const std::int64_t k = x - 2 * m;
      terms.push_back(k * log_l1 - std::lgamma(k + 1.0) + m * log_l2 - std::lgamma(m + 1.0));
    }
    states.push_back(State::Constant(1, x));
    log_mass.push_back(-3.0 * V * a + log_sum_exp(terms));
    if (x >= min_state && chernoff_log(static_cast<double>(x + 1)) < std::log(tail_tol)) break;
  }
  const double tail = std::exp(chernoff_log(static_cast<double>(states.size())));
  const double log_norm = log_sum_exp(log_mass);
  StateDistribution dist(std::move(states), std::move(log_mass), "closed-form");
  dist.set_log_Z(log_norm);
  dist.truncated = true;
  dist.tail_mass_bound = tail;
  return dist;
}

}  // namespace crnlyap
