#pragma once

#include "isingmix/types.hpp"

namespace isingmix {

/// The {0,1} design matrix A of Eq-style Ising parameterization:
/// d(d+1)/2 rows (d main-effect rows, then pair rows in pair_index order) by
/// 2^d columns in canonical cell order. log p = A^T theta - C(theta).
Matrix build_design_matrix(int d);

/// log-sum-exp with max shift; returns log(sum(exp(x))).
double log_sum_exp(const Vector& x);

/// Log cell probabilities A^T theta - logZ for a full theta vector and a
/// prebuilt design matrix. Returns logZ through the out-parameter when given.
Vector log_cell_probabilities(const Matrix& A, const Vector& theta_full, double* log_normalizer = nullptr);

/// Cell probabilities p(theta) of a single Ising component; entries positive,
/// summing to one. All arithmetic in log domain until the final exp.
Vector cell_probabilities(const IsingParams& theta);

/// Mixture cell probabilities sum_k w_k p(theta_k).
Vector mixture_cell_probabilities(const MixtureParams& params);

/// Per-observation normalized Ising log-likelihood
///   l(theta | n) = -log(1' exp(A' theta)) + n' A' theta / N.
double log_likelihood_ising(const IsingParams& theta, const BinaryTable& table);

/// Per-observation normalized mixture log-likelihood, evaluated with a
/// per-cell log-sum-exp over components.
double log_likelihood_mixture(const MixtureParams& params, const BinaryTable& table);

/// l~(theta) = l(theta) - theta' theta / (2 N sigma1^2); strictly concave.
double regularized_log_likelihood_ising(const IsingParams& theta, const BinaryTable& table,
                                        const PriorConfig& prior);

/// l~(w, Theta) = l(w, Theta) + sum_k (alpha_k - 1) log(w_k) / N - |Theta|^2 / (2 N sigma1^2).
/// Theta stacks every component's full parameter vector, so shared main
/// effects are penalized once per component.
double regularized_log_likelihood_mixture(const MixtureParams& params, const BinaryTable& table,
                                          const PriorConfig& prior);

struct GradHess {
  Vector gradient;
  Matrix hessian;
};

/// Gradient and Hessian of theta -> l~(theta | n):
///   grad = A (n/N - p) - theta / (N sigma1^2)
///   hess = -[A (diag(p) - p p') A' + I / (N sigma1^2)]   (negative definite)
GradHess gradient_and_hessian_ising(const IsingParams& theta, const BinaryTable& table,
                                    const PriorConfig& prior);

// ---------------------------------------------------------------------------
// Free-Theta coordinates: the mixture's Theta block as one flat vector with
// the weights held fixed. Layout:
//   shared_main:  [ main(d) | inter^(1)(p) | ... | inter^(K)(p) ]
//   otherwise  :  [ main^(1) | inter^(1) | ... | main^(K) | inter^(K) ]
// Optimization, the Laplace proposal and the Theta Hessian all use these
// coordinates.
// ---------------------------------------------------------------------------

int theta_dim(const MixtureParams& params);
Vector pack_theta(const MixtureParams& params);

/// Copy of `base` with Theta replaced by the free-coordinate vector x
/// (weights and flags preserved).
MixtureParams with_theta(const MixtureParams& base, const Vector& x);

/// Row indices of x holding component k's interaction block.
std::pair<int, int> inter_block(const MixtureParams& params, int k);  // (offset, length)

/// Hessian of Theta -> l~(w, Theta | n) at params, weights fixed, in
/// free-Theta coordinates. Symmetric; negative definite at a strict local
/// maximum.
Matrix hessian_mixture_theta(const MixtureParams& params, const BinaryTable& table,
                             const PriorConfig& prior);

/// Gradient of Theta -> l~(w, Theta | n) in free-Theta coordinates plus the
/// gradient with respect to the weights (all K coordinates, simplex not
/// eliminated). Used by the mixture optimizer.
struct MixtureGradient {
  Vector theta;
  Vector weights;
};
MixtureGradient mixture_gradient(const MixtureParams& params, const BinaryTable& table,
                                 const PriorConfig& prior, const Matrix& A);

}  // namespace isingmix
