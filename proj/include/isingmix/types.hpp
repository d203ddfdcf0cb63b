#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace isingmix {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Number of interaction pairs for d variables.
inline int num_pairs(int d) { return d * (d - 1) / 2; }

/// Number of cells of the d-way binary table.
inline long num_cells(int d) { return 1L << d; }

/// Flat index of the pair (a,b), 0-based variables with a < b, in row-major
/// order (0,1),(0,2),...,(0,d-1),(1,2),...,(d-2,d-1).
inline int pair_index(int d, int a, int b) {
  if (a < 0 || b <= a || b >= d) throw std::invalid_argument("pair_index: need 0 <= a < b < d");
  return a * (2 * d - a - 1) / 2 + (b - a - 1);
}

/// Inverse of pair_index.
inline std::pair<int, int> pair_from_index(int d, int idx) {
  for (int a = 0; a < d - 1; ++a) {
    int row = d - 1 - a;
    if (idx < row) return {a, a + 1 + idx};
    idx -= row;
  }
  throw std::invalid_argument("pair_from_index: index out of range");
}

/// Level of variable v (0-based) in the given cell. Canonical cell order is
/// lexicographic with the last variable varying fastest, so variable 0 owns
/// the most significant bit.
inline int cell_bit(long cell, int v, int d) { return static_cast<int>((cell >> (d - 1 - v)) & 1); }

/// Observed counts of a d-way binary contingency table. Canonical cell order
/// is lexicographic with variable d varying fastest. Counts are real-valued
/// so that fixed tables of the form N*p(theta) are representable.
struct BinaryTable {
  int d = 0;
  Vector counts;

  BinaryTable() = default;
  BinaryTable(int d_, Vector counts_) : d(d_), counts(std::move(counts_)) { validate(); }

  double total() const { return counts.sum(); }

  void validate() const {
    if (d < 1 || d > 20) throw std::invalid_argument("BinaryTable: d must be in [1,20]");
    if (counts.size() != num_cells(d)) throw std::invalid_argument("BinaryTable: counts must have 2^d entries");
    if ((counts.array() < 0).any()) throw std::invalid_argument("BinaryTable: negative count");
    if (!(counts.sum() > 0)) throw std::invalid_argument("BinaryTable: total count must be positive");
  }
};

/// Parameters of one Ising component: d main effects and d(d-1)/2 interaction
/// effects in pair_index order.
struct IsingParams {
  int d = 0;
  Vector main;
  Vector inter;

  IsingParams() = default;
  explicit IsingParams(int d_) : d(d_), main(Vector::Zero(d_)), inter(Vector::Zero(num_pairs(d_))) {}
  IsingParams(int d_, Vector main_, Vector inter_) : d(d_), main(std::move(main_)), inter(std::move(inter_)) {
    validate();
  }

  int dim() const { return d + num_pairs(d); }

  /// Stacked (main, inter) vector, the paper-order theta.
  Vector full() const {
    Vector out(dim());
    out.head(d) = main;
    out.tail(num_pairs(d)) = inter;
    return out;
  }

  static IsingParams from_full(int d, const Vector& theta) {
    if (theta.size() != d + num_pairs(d)) throw std::invalid_argument("IsingParams::from_full: bad length");
    return IsingParams(d, theta.head(d), theta.tail(num_pairs(d)));
  }

  void validate() const {
    if (d < 1) throw std::invalid_argument("IsingParams: d must be positive");
    if (main.size() != d || inter.size() != num_pairs(d))
      throw std::invalid_argument("IsingParams: main/inter length mismatch");
    if (!main.allFinite() || !inter.allFinite()) throw std::domain_error("IsingParams: non-finite entry");
  }
};

/// A K-component Ising mixture. If shared_main is set, all components carry
/// identical main-effect vectors (Assumption 1) and optimization treats the
/// main block as one shared coordinate group.
struct MixtureParams {
  int K = 0;
  Vector weights;
  std::vector<IsingParams> components;
  bool shared_main = false;

  MixtureParams() = default;
  MixtureParams(Vector weights_, std::vector<IsingParams> components_, bool shared_main_ = false)
      : K(static_cast<int>(components_.size())),
        weights(std::move(weights_)),
        components(std::move(components_)),
        shared_main(shared_main_) {
    validate();
  }

  static MixtureParams single(IsingParams theta) {
    MixtureParams p;
    p.K = 1;
    p.weights = Vector::Ones(1);
    p.components.push_back(std::move(theta));
    p.shared_main = true;
    return p;
  }

  int d() const { return components.empty() ? 0 : components.front().d; }

  void validate() const {
    if (K < 1 || static_cast<int>(components.size()) != K)
      throw std::invalid_argument("MixtureParams: need K >= 1 components");
    if (weights.size() != K) throw std::invalid_argument("MixtureParams: weights length != K");
    if ((weights.array() <= 0).any() || (weights.array() >= 1).any()) {
      if (!(K == 1 && weights(0) == 1.0)) throw std::domain_error("MixtureParams: weights must lie in (0,1)");
    }
    if (std::abs(weights.sum() - 1.0) > 1e-12) throw std::domain_error("MixtureParams: weights must sum to 1");
    const int d0 = components.front().d;
    for (const auto& c : components) {
      c.validate();
      if (c.d != d0) throw std::invalid_argument("MixtureParams: components disagree on d");
    }
    if (shared_main) {
      for (const auto& c : components)
        if ((c.main - components.front().main).lpNorm<Eigen::Infinity>() > 0)
          throw std::invalid_argument("MixtureParams: shared_main set but main effects differ");
    }
  }
};

/// Hyperparameters of the spike-and-slab / Dirichlet prior.
struct PriorConfig {
  double sigma0 = 0.1;   // spike sd
  double sigma1 = 1.0;   // slab sd, also the main-effect prior sd
  double beta = 0.5;     // Bernoulli prior on the association indicators
  Vector alpha;          // Dirichlet parameters, length K (empty means all-ones)

  Vector alpha_or_flat(int K) const {
    if (alpha.size() == 0) return Vector::Ones(K);
    if (alpha.size() != K) throw std::invalid_argument("PriorConfig: alpha length != K");
    return alpha;
  }

  void validate() const {
    if (!(sigma0 > 0) || !(sigma1 > 0)) throw std::domain_error("PriorConfig: sigmas must be positive");
    // sigma0 == sigma1 is the degenerate prior with r(theta) constant at beta;
    // it is allowed so the quadrature oracle can be checked against it.
    if (sigma0 > sigma1) throw std::domain_error("PriorConfig: need sigma0 <= sigma1");
    if (!(beta > 0 && beta < 1)) throw std::domain_error("PriorConfig: beta must be in (0,1)");
    if ((alpha.size() > 0) && (alpha.array() <= 0).any())
      throw std::domain_error("PriorConfig: alpha entries must be positive");
  }
};

}  // namespace isingmix
