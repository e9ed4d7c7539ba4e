#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace crnlyap {

/// Stoichiometric coefficients of a complex, one entry per species.
using Complex = Eigen::VectorXi;
/// Molecule counts, one entry per species.
using State = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
/// Concentrations (counts divided by the volume), one entry per species.
using Concentration = Eigen::VectorXd;

struct StateHash {
  std::size_t operator()(const State& x) const noexcept {
    std::size_t h = 0xcbf29ce484222325ull;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      h ^= static_cast<std::size_t>(x[i]) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

struct StateEqual {
  bool operator()(const State& a, const State& b) const noexcept {
    return a.size() == b.size() && (a.array() == b.array()).all();
  }
};

/// Lexicographic order on states of equal dimension.
bool state_less(const State& a, const State& b);

struct Reaction {
  Complex source;
  Complex product;
  double kappa = 0.0;

  Eigen::VectorXi zeta() const { return product - source; }
  int order() const { return source.sum(); }
};

/// Species, complexes, and reactions with rate constants.
///
/// Construction merges duplicate reactions (same source and product) by summing
/// their rate constants; nothing else is checked here, so that malformed input
/// can still be inspected with validate().
class ReactionNetwork {
 public:
  ReactionNetwork() = default;
  ReactionNetwork(std::vector<std::string> species, std::vector<Reaction> reactions);

  const std::vector<std::string>& species() const { return species_; }
  const std::vector<Reaction>& reactions() const { return reactions_; }
  const Reaction& reaction(std::size_t k) const { return reactions_.at(k); }

  int dim() const { return static_cast<int>(species_.size()); }
  std::size_t num_reactions() const { return reactions_.size(); }

  /// Distinct complexes in order of first appearance (sources before products
  /// within each reaction).
  const std::vector<Complex>& complexes() const { return complexes_; }

  /// d x m matrix whose k-th column is the reaction vector of reaction k.
  Eigen::MatrixXd stoichiometric_matrix() const;

  /// Index of species `name`, or -1.
  int species_index(const std::string& name) const;

 private:
  std::vector<std::string> species_;
  std::vector<Reaction> reactions_;
  std::vector<Complex> complexes_;
};

/// The monomial x^nu with 0^0 = 1.
template <typename Derived>
typename Derived::Scalar monomial(const Eigen::MatrixBase<Derived>& x, const Complex& nu) {
  using Scalar = typename Derived::Scalar;
  Scalar value(1);
  for (Eigen::Index i = 0; i < nu.size(); ++i) {
    for (int p = 0; p < nu[i]; ++p) value *= x[i];
  }
  return value;
}

bool same_complex(const Complex& a, const Complex& b);

/// Orthonormal basis (as columns) of span{zeta_k}. Empty (d x 0) when there
/// are no reactions.
Eigen::MatrixXd stoichiometric_subspace(const ReactionNetwork& net);

/// Orthonormal basis (as columns) of the orthogonal complement of the
/// stoichiometric subspace; each column w gives a conserved quantity w.x.
Eigen::MatrixXd conserved_quantities(const ReactionNetwork& net);

struct Violation {
  std::ptrdiff_t reaction = -1;  // -1 for network-level problems
  std::string rule;
};

std::vector<Violation> validate(const ReactionNetwork& net);

/// Relative singular-value threshold used for every rank decision.
inline constexpr double kRankTolerance = 1e-10;

}  // namespace crnlyap
