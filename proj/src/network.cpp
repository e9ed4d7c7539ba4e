#include "crnlyap/network.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace crnlyap {

bool state_less(const State& a, const State& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

bool same_complex(const Complex& a, const Complex& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

ReactionNetwork::ReactionNetwork(std::vector<std::string> species, std::vector<Reaction> reactions)
    : species_(std::move(species)) {
  for (auto& r : reactions) {
    bool merged = false;
    for (auto& existing : reactions_) {
      if (same_complex(existing.source, r.source) && same_complex(existing.product, r.product)) {
        existing.kappa += r.kappa;
        merged = true;
        break;
      }
    }
    if (!merged) reactions_.push_back(std::move(r));
  }
  auto remember = [this](const Complex& z) {
    for (const auto& c : complexes_) {
      if (same_complex(c, z)) return;
    }
    complexes_.push_back(z);
  };
  for (const auto& r : reactions_) {
    remember(r.source);
    remember(r.product);
  }
}

Eigen::MatrixXd ReactionNetwork::stoichiometric_matrix() const {
  Eigen::MatrixXd n(dim(), static_cast<Eigen::Index>(reactions_.size()));
  for (std::size_t k = 0; k < reactions_.size(); ++k) {
    n.col(static_cast<Eigen::Index>(k)) = reactions_[k].zeta().cast<double>();
  }
  return n;
}

int ReactionNetwork::species_index(const std::string& name) const {
  for (std::size_t i = 0; i < species_.size(); ++i) {
    if (species_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

namespace {

// Flip each column so that its first non-negligible entry is positive.
void canonical_signs(Eigen::MatrixXd& basis) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    for (Eigen::Index i = 0; i < basis.rows(); ++i) {
      if (std::abs(basis(i, j)) > 1e-12) {
        if (basis(i, j) < 0) basis.col(j) *= -1.0;
        break;
      }
    }
  }
}

struct SubspaceSplit {
  Eigen::MatrixXd range;
  Eigen::MatrixXd complement;
};

SubspaceSplit split_subspace(const ReactionNetwork& net) {
  const Eigen::Index d = net.dim();
  const Eigen::MatrixXd n = net.stoichiometric_matrix();
  if (n.cols() == 0 || d == 0) {
    return {Eigen::MatrixXd(d, 0), Eigen::MatrixXd::Identity(d, d)};
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(n, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  if (sv.size() > 0 && sv[0] > 0.0) {
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv[i] > kRankTolerance * sv[0]) ++rank;
    }
  }
  SubspaceSplit out{svd.matrixU().leftCols(rank), svd.matrixU().rightCols(d - rank)};
  canonical_signs(out.range);
  canonical_signs(out.complement);
  return out;
}

}  // namespace

Eigen::MatrixXd stoichiometric_subspace(const ReactionNetwork& net) { return split_subspace(net).range; }

Eigen::MatrixXd conserved_quantities(const ReactionNetwork& net) { return split_subspace(net).complement; }

std::vector<Violation> validate(const ReactionNetwork& net) {
  std::vector<Violation> out;
  const int d = net.dim();
  for (std::size_t i = 0; i < net.species().size(); ++i) {
    for (std::size_t j = i + 1; j < net.species().size(); ++j) {
      if (net.species()[i] == net.species()[j]) {
        out.push_back({-1, "duplicate species name '" + net.species()[i] + "'"});
      }
    }
  }
  for (std::size_t k = 0; k < net.num_reactions(); ++k) {
    const auto& r = net.reaction(k);
    const auto idx = static_cast<std::ptrdiff_t>(k);
    if (r.source.size() != d || r.product.size() != d) {
      out.push_back({idx, "complex dimension does not match species count"});
      continue;
    }
    if ((r.source.array() < 0).any() || (r.product.array() < 0).any()) {
      out.push_back({idx, "negative stoichiometric coefficient"});
    }
    if (!(r.kappa > 0.0) || !std::isfinite(r.kappa)) {
      out.push_back({idx, "nonpositive rate constant"});
    }
    if (same_complex(r.source, r.product)) {
      out.push_back({idx, "zero reaction vector"});
    }
  }
  return out;
}

}  // namespace crnlyap
