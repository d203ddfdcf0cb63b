#pragma once

#include "isingmix/optimize.hpp"
#include "isingmix/prior.hpp"
#include "isingmix/rng.hpp"

namespace isingmix {

/// Posterior-mean estimates from self-normalized importance sampling.
/// gamma_mean(k, j) estimates E(gamma^(k)_{pair j} | n); components are in
/// canonical (weight-sorted) order. is_se holds replicate standard deviations
/// (zero when R == 1).
struct PosteriorSummary {
  int K = 1;
  int d = 0;
  bool shared_main = false;
  PriorConfig prior;
  Matrix gamma_mean;   // K x d(d-1)/2
  Vector weight_mean;  // K
  Matrix gamma_se;     // K x d(d-1)/2
  Vector weight_se;    // K
  long M = 0;
  int R = 1;
  std::uint64_t seed = 0;
  Vector ess;              // effective sample size per replicate
  bool degenerate = false; // some replicate had ESS below the warning threshold
};

constexpr double kEssWarnThreshold = 10.0;

/// Posterior means of the association indicators for the single Ising model:
/// M draws from the Laplace proposal N(theta~, Sigma~/N), self-normalized
/// weights exp(log h3), estimate = weighted mean of r(theta) elementwise.
/// R independent replicates (streams seed+0..seed+R-1) are averaged; their
/// elementwise standard deviation is reported as the IS standard error.
PosteriorSummary posterior_gamma_ising(const BinaryTable& table, const PriorConfig& prior, long M,
                                       std::uint64_t rng_seed, int R = 1);

/// The normal-mixture + Dirichlet proposal h5 built from converged local
/// optima: mode j has weight softmax(l~_j), draws w ~ Dirichlet(N w~_j + 1)
/// and Theta ~ N(Theta~_j, Sigma~_j / N).
class MixtureProposal {
 public:
  MixtureProposal(const std::vector<LocalOptimum>& optima, const BinaryTable& table);

  int modes() const { return static_cast<int>(mode_.size()); }
  int K() const { return K_; }
  int dim() const { return dim_; }
  const MixtureParams& prototype() const { return proto_; }

  /// Draw n samples; returns (weights K x n, free-Theta dim x n).
  std::pair<Matrix, Matrix> draw(long n, RngEngine& rng) const;

  /// Exact log density of h5 at one (w, x) point.
  double log_density(const Vector& w, const Vector& x) const;

  /// Batched log density over columns.
  Vector log_density(const Matrix& W, const Matrix& X) const;

 private:
  struct Mode {
    double log_weight;      // log softmax(l~_j)
    Vector dir_alpha;       // N w~_j + 1
    Vector theta_mean;      // Theta~_j, free coordinates
    Matrix chol_cov;        // chol(Sigma~_j / N)
    Matrix precision;       // (Sigma~_j / N)^{-1} = N * negated Hessian
    double log_norm_const;  // normal log-density constant: -dim/2 log(2pi) - 1/2 log|cov|
  };
  std::vector<Mode> mode_;
  MixtureParams proto_;
  int K_ = 0;
  int dim_ = 0;
};

MixtureProposal build_mixture_proposal(const std::vector<LocalOptimum>& optima, const BinaryTable& table);

/// Full mixture pipeline: multi_start_mixture(J), proposal h5, then R
/// replicates of M-draw self-normalized IS for E(Gamma | n) and E(w | n).
PosteriorSummary posterior_mixture(const BinaryTable& table, const PriorConfig& prior, int K,
                                   bool shared_main, int J, long M, int R, std::uint64_t rng_seed);

/// Deterministic tensor-grid reference for E(gamma | n), d <= 2 and K = 1
/// only: integrates r(theta12) h1(theta) over the parameter box
/// theta~ +- 8 sd on a points_per_axis grid. Returns one value per pair
/// (a single value for d = 2, empty for d = 1).
Vector quadrature_oracle(const BinaryTable& table, const PriorConfig& prior, int points_per_axis = 81);

/// Elementwise sample standard deviation across replicate estimate vectors.
Vector replicate_se(const std::vector<Vector>& estimates);

}  // namespace isingmix
