#pragma once

#include "crnlyap/distribution.hpp"
#include "crnlyap/network.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace crnlyap {

/// Single-species network whose reactions all step by +1 or -1.
///
/// up[n] is the rate constant of nS -> (n+1)S, down[n] that of nS -> (n-1)S.
struct BirthDeathModel {
  std::map<int, double> up;
  std::map<int, double> down;
  int n_u = 0;  // largest up source count
  int n_d = 0;  // largest down source count
  std::int64_t i0 = 0;
  bool modified = false;
};

struct BirthDeathVerdict {
  std::optional<BirthDeathModel> model;
  std::string reason;  // why the network is not a birth-death model

  bool is_birth_death() const { return model.has_value(); }
};

BirthDeathVerdict classify_birth_death(const ReactionNetwork& net);

/// Finds i0, the smallest state with a positive birth rate at i0 and a positive
/// death rate at i0 + 1, and cuts the death rate at i0 so that states below it
/// are never entered. Idempotent.
BirthDeathModel apply_modification(BirthDeathModel model);

struct ExistenceReport {
  bool exists = false;
  int condition = 0;  // 1: n_d > n_u, 2: n_d == n_u with the down constant larger, 0: neither
  std::string message;
};

ExistenceReport bd_existence(const BirthDeathModel& model);

class NoStationaryDistribution : public std::runtime_error {
 public:
  explicit NoStationaryDistribution(ExistenceReport report)
      : std::runtime_error(report.message), report_(std::move(report)) {}
  const ExistenceReport& report() const { return report_; }

 private:
  ExistenceReport report_;
};

/// Birth rate p_i of the scaled chain: sum over up reactions of
/// kappa_n V^{1-n} i (i-1) ... (i-n+1).
double bd_birth_rate(const BirthDeathModel& model, double V, std::int64_t i);
/// Death rate q_i; zero at i0 (and below) once the model is modified.
double bd_death_rate(const BirthDeathModel& model, double V, std::int64_t i);

struct BirthDeathPolicy {
  std::int64_t min_state = 0;  // support reaches at least this state
  std::int64_t cap = std::int64_t{1} << 26;
  double tail_tol = 1e-14;
};

/// Closed-form stationary distribution pi(x) ∝ prod_{i=i0+1}^{x} p_{i-1}/q_i.
/// Summation stops once a monotone bound beta < 1 on the ratio certifies that
/// the remaining mass is below tail_tol; that bound is stored in
/// tail_mass_bound.
StateDistribution bd_stationary(const BirthDeathModel& model, double V, const BirthDeathPolicy& policy = {});

/// ln(sum_up kappa_n u^n / sum_down kappa_n u^n), u > 0.
double g_integrand(const BirthDeathModel& model, double u);

/// Default right end of the x_max search: twice the Cauchy bound on the
/// positive roots of sum_up kappa_n u^n - sum_down kappa_n u^n.
double default_search_cap(const BirthDeathModel& model);

/// Maximizer over [0, cap] of the cumulative integral of g_integrand; the
/// smallest one on ties.
double find_x_max(const BirthDeathModel& model, double search_cap);
double find_x_max(const BirthDeathModel& model);

/// Positive roots of the integrand in (0, cap], increasing.
std::vector<double> integrand_roots(const BirthDeathModel& model, double search_cap);

/// g(x) = -int_{x_max}^{x} g_integrand(u) du.
class GLimit {
 public:
  GLimit(BirthDeathModel model, double x_max);

  const BirthDeathModel& model() const { return model_; }
  double x_max() const { return x_max_; }

  double operator()(double x) const;
  double derivative(double x) const { return -integrand(x); }
  double integrand(double x) const { return g_integrand(model_, x); }

  /// int_0^x g_integrand(u) du.
  double cumulative(double x) const;

 private:
  BirthDeathModel model_;
  double x_max_;
  int log_power_;  // min up index - min down index
};

GLimit g_limit(const BirthDeathModel& model);
double g_limit(const BirthDeathModel& model, double x);

/// Closed-form limit functions of the worked examples:
///   "cubic-bistable"  0 <-> X, 2X <-> 3X with rates 6, 11, 6, 1 (no parameters)
///   "cubic-poisson"   same network with kappa_0 kappa_{-3} = kappa_{-1} kappa_2; params {B}
///   "linear-absorbing" X -> 0, X -> 2X; params {kappa_1 / kappa_{-1}}
///   "dimerization"    0 -> X, 2X -> 0; params {a = sqrt(kappa_1 / kappa_2)}
///   "pair-birth"      X -> 0, 0 -> 2X; params {a = kappa_2 / (2 kappa_1)};
///                     3a + int_0^x ln(sqrt(1 + 2u/a) - 1) du - x ln 2, the
///                     constant making it the limit of the scaled potential
double reference_g(std::string_view id, std::span<const double> params, double x);

/// Second derivatives of the dimerization and pair-birth references.
double reference_g_second_derivative(std::string_view id, std::span<const double> params, double x);
/// First derivative of a reference, where it has a closed form.
double reference_g_derivative(std::string_view id, std::span<const double> params, double x);

/// Law of N1 + 2 N2 with N1 ~ Po(2aV), N2 ~ Po(aV), summed in log space and
/// truncated once a Chernoff bound on the tail drops below tail_tol.
StateDistribution pair_birth_pi(double a, double V, std::int64_t min_state = 0, double tail_tol = 1e-14);

}  // namespace crnlyap
