#pragma once

#include "isingmix/model.hpp"

#include <cstdint>
#include <vector>

namespace isingmix {

/// A fitted (local) optimum of a regularized or plain log-likelihood.
/// hessian_theta is the NEGATED Hessian of the objective over free-Theta
/// coordinates (weights fixed), positive definite at a strict local maximum;
/// its inverse is the Laplace covariance Sigma~.
struct LocalOptimum {
  MixtureParams params;
  double value = 0.0;           // objective at the optimum (per observation)
  Matrix hessian_theta;         // negated Theta-Hessian, free coordinates
  bool converged = false;       // gradient tolerance met and hessian_theta PD
  int iterations = 0;
  bool trust_bound_hit = false; // |theta|_inf exceeded the MLE trust bound
};

/// Unique maximizer of the strictly concave l~(theta); Newton with
/// backtracking line search from theta = 0. Deterministic.
LocalOptimum fit_map_ising(const BinaryTable& table, const PriorConfig& prior);

/// One quasi-Newton (BFGS, Wolfe line search) ascent of l~(w, Theta) from the
/// given start. Weights ride through a logit reparameterization onto the open
/// simplex; Theta is unconstrained. hessian_theta is evaluated at the solution
/// in free-Theta coordinates with w fixed.
LocalOptimum fit_local_mixture(const BinaryTable& table, const PriorConfig& prior, int K,
                               bool shared_main, const MixtureParams& start);

/// J independent runs from random starts (weights ~ flat Dirichlet, Theta
/// entries ~ N(0, sigma1^2)); run j draws from stream seed+j. Each optimum is
/// canonicalized by descending weight. Throws if every run failed.
std::vector<LocalOptimum> multi_start_mixture(const BinaryTable& table, const PriorConfig& prior,
                                              int K, bool shared_main, int J, std::uint64_t rng_seed);

struct ModelSpec {
  int K = 1;
  bool shared_main = true;
};

/// Maximum likelihood fit of the plain l (no prior terms). K = 1 uses the
/// Newton solver; mixtures take the best of a 20-start portfolio. Parameters
/// diverging past |theta|_inf = 30 are clamped and flagged (the MLE need not
/// exist for sparse tables). Used by the goodness-of-fit and LRT operations.
LocalOptimum fit_mle(const BinaryTable& table, const ModelSpec& model);

/// Number of free parameters of the fitted model (mains + interactions +
/// K - 1 weights), the df bookkeeping used by the GOF tests.
int parameter_count(int d, int K, bool shared_main);

/// Sort components by descending weight (ties: lexicographic on the
/// interaction vector). Applied only when alpha is exchangeable, where the
/// objective is label-invariant.
void canonicalize(MixtureParams& params);

}  // namespace isingmix
