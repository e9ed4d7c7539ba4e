#pragma once

// Shared fixtures and independent reference computations for the tests. The
// references deliberately avoid the library's own code paths: products in
// linear space, recursions instead of lgamma, hand-written sums.

#include "crnlyap/distribution.hpp"
#include "crnlyap/dsl.hpp"
#include "crnlyap/network.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

inline std::string data_path(const std::string& name) { return std::string(CRNLYAP_DATA_DIR) + "/" + name; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline crnlyap::ReactionNetwork load(const std::string& name) {
  return crnlyap::parse_network(read_text(data_path(name))).network;
}

inline crnlyap::ReactionNetwork from_text(const std::string& text) { return crnlyap::parse_network(text).network; }

inline crnlyap::ReactionNetwork catalytic(double k1, double k2) {
  std::ostringstream s;
  s.precision(17);
  s << "species: A B\n2A -> A + B ; " << k1 << "\nA + B -> 2A ; " << k2 << "\n";
  return from_text(s.str());
}

inline crnlyap::ReactionNetwork schlogl(double k0, double km1, double k2, double km3) {
  std::ostringstream s;
  s.precision(17);
  s << "species: X\n0 -> X ; " << k0 << "\nX -> 0 ; " << km1 << "\n2X -> 3X ; " << k2 << "\n3X -> 2X ; " << km3
    << "\n";
  return from_text(s.str());
}

inline crnlyap::State state(std::initializer_list<std::int64_t> v) {
  crnlyap::State x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (auto e : v) x[i++] = e;
  return x;
}

inline crnlyap::Concentration conc(std::initializer_list<double> v) {
  crnlyap::Concentration x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (auto e : v) x[i++] = e;
  return x;
}

// ln C(n, k) as a sum of logs.
inline double log_choose(int n, int k) {
  double s = 0.0;
  for (int j = 1; j <= k; ++j) s += std::log(static_cast<double>(n - k + j)) - std::log(static_cast<double>(j));
  return s;
}

// Stationary law of the catalytic network on {x_A >= 1, x_A + x_B = N}: a
// binomial with success probability k2/(k1+k2) conditioned away from x_A = 0.
inline std::vector<double> catalytic_pi(int N, double k1, double k2) {
  const double p = k2 / (k1 + k2);
  const double Z = 1.0 - std::pow(k1 / (k1 + k2), N);
  std::vector<double> pi(N + 1, 0.0);
  for (int a = 1; a <= N; ++a) pi[a] = std::exp(log_choose(N, a) + a * std::log(p) + (N - a) * std::log(1.0 - p)) / Z;
  return pi;
}

// Poisson(lambda) pmf on 0..n by the ratio recursion.
inline std::vector<double> poisson_pmf(double lambda, int n) {
  std::vector<double> p(n + 1);
  p[0] = std::exp(-lambda);
  for (int k = 1; k <= n; ++k) p[k] = p[k - 1] * lambda / k;
  return p;
}

// Law of N1 + 2 N2, N1 ~ Po(l1), N2 ~ Po(l2), by direct convolution.
inline std::vector<double> pair_convolution(double l1, double l2, int n) {
  const auto p1 = poisson_pmf(l1, n);
  const auto p2 = poisson_pmf(l2, n);
  std::vector<double> out(n + 1, 0.0);
  for (int k = 0; k <= n; ++k) {
    for (int m = 0; k + 2 * m <= n; ++m) out[k + 2 * m] += p1[k] * p2[m];
  }
  return out;
}

// Total variation between a distribution on single-species states and a
// reference pmf indexed by count (mass beyond the vector counts as zero).
inline double tv_to_pmf(const crnlyap::StateDistribution& d, const std::vector<double>& ref) {
  double sum = 0.0;
  std::vector<char> seen(ref.size(), 0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto x = d.state(i)[0];
    const double r = x < static_cast<std::int64_t>(ref.size()) ? ref[x] : 0.0;
    if (x < static_cast<std::int64_t>(ref.size())) seen[x] = 1;
    sum += std::abs(d.prob(i) - r);
  }
  for (std::size_t x = 0; x < ref.size(); ++x) {
    if (!seen[x]) sum += ref[x];
  }
  return 0.5 * sum;
}

}  // namespace testing
