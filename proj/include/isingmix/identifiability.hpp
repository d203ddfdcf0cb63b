#pragma once

#include "isingmix/types.hpp"

#include <set>

namespace isingmix {

/// Which coordinates of (w, Theta) enter the Fisher information. Weights are
/// parameterized by their first K-1 entries (w_K eliminated); free_main refers
/// to the shared main-effect block and requires shared mains (or K = 1).
struct ParameterMask {
  bool free_weights = false;
  std::vector<bool> free_main;                // length d
  std::vector<std::vector<bool>> free_inter;  // K x d(d-1)/2

  static ParameterMask all_free(int d, int K, bool weights_free);
  static ParameterMask none(int d, int K);
  int count(int K) const;
};

/// Activation structure G(theta): edges are pairs with |theta_{v'v}| above a
/// construction-level tolerance; activation vertices are edge endpoints.
/// Vertices are reported 1-based to match the convention used everywhere the
/// graphs surface.
struct ActivationGraph {
  int d = 0;
  std::set<std::pair<int, int>> edges;  // (v', v) with v' < v, 1-based
  std::set<int> activation_vertices;

  /// Induced subgraph on a vertex subset (the projection G(theta | V)).
  ActivationGraph projected(const std::set<int>& vertices) const;
};

ActivationGraph activation_sets(const IsingParams& theta, double tol = 1e-12);

/// Exact per-observation Fisher information over the masked coordinates,
/// assembled from analytic scores: I = sum_i p_mix,i s_i s_i'. Coordinate
/// order: free weights (first K-1), free shared mains, free interactions of
/// component 1, 2, ...
Matrix fisher_information(const MixtureParams& params, const ParameterMask& mask);

struct IdentifiabilityResult {
  bool identifiable_at_point = false;
  Vector eigenvalues;  // descending
};

/// Rank test of the Fisher information: full rank (relative to the leading
/// eigenvalue) certifies local identifiability at the point.
IdentifiabilityResult local_identifiability_test(const MixtureParams& params, const ParameterMask& mask,
                                                 double tol = 1e-8);

/// Assumption report:
///   A1 shared main effects; A2 interactions free in at most one component;
///   A3 weights fixed; A4 activation vertices disjoint across components.
/// Proposition 1 (A1 & A2 & A3) or Proposition 2 (A1 & A3 & A4) certify local
/// identifiability.
struct AssumptionReport {
  bool a1_shared_main = false;
  bool a2_one_unknown_component = false;
  bool a3_fixed_weights = false;
  bool a4_disjoint_activation = false;
  bool prop1_applies = false;
  bool prop2_applies = false;
  bool certified() const { return prop1_applies || prop2_applies; }
};

AssumptionReport check_assumptions(const MixtureParams& params, const ParameterMask& mask);

/// Constructive non-identifiable family for the d = 2, K = 2 example
/// (second component independent, zero mains): given the true (theta12, w)
/// and an alternative weight, returns theta12_alt such that both mixtures
/// share every cell probability. Throws if the transformed eta is
/// nonpositive (the alternative leaves the family).
struct FamilyAlternative {
  double theta12_alt = 0.0;
  double theta34_alt = 0.0;  // used by the d = 4 family only
  double w_alt = 0.0;
};

FamilyAlternative family_example2(double theta12_true, double w_true, double w_alt);

/// The d = 4, K = 2 analogue: component 1 carries theta12, component 2
/// carries theta34, zero mains, free weight. Both interactions transform.
FamilyAlternative family_example4(double theta12_true, double theta34_true, double w_true, double w_alt);

/// Builders for the mixtures those families live in.
MixtureParams example2_mixture(double theta12, double w);
MixtureParams example4_mixture(double theta12, double theta34, double w);

/// Infinity norm of the difference between two mixtures' cell probabilities.
double verify_equal_distribution(const MixtureParams& a, const MixtureParams& b);

}  // namespace isingmix
