#include "isingmix/identifiability.hpp"

#include "isingmix/model.hpp"

#include <cmath>

namespace isingmix {

ParameterMask ParameterMask::all_free(int d, int K, bool weights_free) {
  ParameterMask m;
  m.free_weights = weights_free;
  m.free_main.assign(d, true);
  m.free_inter.assign(K, std::vector<bool>(num_pairs(d), true));
  return m;
}

ParameterMask ParameterMask::none(int d, int K) {
  ParameterMask m;
  m.free_weights = false;
  m.free_main.assign(d, false);
  m.free_inter.assign(K, std::vector<bool>(num_pairs(d), false));
  return m;
}

int ParameterMask::count(int K) const {
  int c = free_weights ? K - 1 : 0;
  for (bool b : free_main) c += b;
  for (const auto& row : free_inter)
    for (bool b : row) c += b;
  return c;
}

ActivationGraph ActivationGraph::projected(const std::set<int>& vertices) const {
  ActivationGraph out;
  out.d = d;
  for (const auto& e : edges)
    if (vertices.count(e.first) && vertices.count(e.second)) {
      out.edges.insert(e);
      out.activation_vertices.insert(e.first);
      out.activation_vertices.insert(e.second);
    }
  return out;
}

ActivationGraph activation_sets(const IsingParams& theta, double tol) {
  ActivationGraph g;
  g.d = theta.d;
  for (int a = 0; a < theta.d; ++a)
    for (int b = a + 1; b < theta.d; ++b)
      if (std::abs(theta.inter(pair_index(theta.d, a, b))) > tol) {
        g.edges.insert({a + 1, b + 1});
        g.activation_vertices.insert(a + 1);
        g.activation_vertices.insert(b + 1);
      }
  return g;
}

static void validate_mask(const MixtureParams& params, const ParameterMask& mask) {
  const int d = params.d(), K = params.K, p = num_pairs(d);
  if (static_cast<int>(mask.free_main.size()) != d) throw std::invalid_argument("ParameterMask: free_main length != d");
  if (static_cast<int>(mask.free_inter.size()) != K) throw std::invalid_argument("ParameterMask: free_inter needs K rows");
  for (const auto& row : mask.free_inter)
    if (static_cast<int>(row.size()) != p) throw std::invalid_argument("ParameterMask: free_inter row length != d(d-1)/2");
  const bool any_main = std::any_of(mask.free_main.begin(), mask.free_main.end(), [](bool b) { return b; });
  if (any_main && K > 1 && !params.shared_main)
    throw std::invalid_argument("ParameterMask: free mains require shared_main (Assumption 1)");
  if (mask.count(K) == 0) throw std::invalid_argument("ParameterMask: no free coordinate");
}

Matrix fisher_information(const MixtureParams& params, const ParameterMask& mask) {
  params.validate();
  validate_mask(params, mask);
  const int d = params.d(), K = params.K, p = num_pairs(d);
  const long n = num_cells(d);
  const Matrix A = build_design_matrix(d);

  Matrix P(n, K);   // component cell probabilities
  Matrix Mu(d + p, K);
  for (int k = 0; k < K; ++k) {
    P.col(k) = log_cell_probabilities(A, params.components[k].full()).array().exp();
    Mu.col(k) = A * P.col(k);
  }
  const Vector pmix = P * params.weights;

  const int q = mask.count(K);
  Matrix S(n, q);  // per-cell scores over the masked coordinates
  for (long i = 0; i < n; ++i) {
    int c = 0;
    if (mask.free_weights)
      for (int k = 0; k + 1 < K; ++k) S(i, c++) = (P(i, k) - P(i, K - 1)) / pmix(i);
    for (int v = 0; v < d; ++v)
      if (mask.free_main[v]) {
        double s = 0.0;
        for (int k = 0; k < K; ++k) s += params.weights(k) * P(i, k) / pmix(i) * (A(v, i) - Mu(v, k));
        S(i, c++) = s;
      }
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < p; ++j)
        if (mask.free_inter[k][j])
          S(i, c++) = params.weights(k) * P(i, k) / pmix(i) * (A(d + j, i) - Mu(d + j, k));
  }
  Matrix I = S.transpose() * pmix.asDiagonal() * S;
  return 0.5 * (I + I.transpose());
}

IdentifiabilityResult local_identifiability_test(const MixtureParams& params, const ParameterMask& mask,
                                                 double tol) {
  if (!(tol > 0)) throw std::invalid_argument("local_identifiability_test: tol must be positive");
  const Matrix I = fisher_information(params, mask);
  Eigen::SelfAdjointEigenSolver<Matrix> es(I, Eigen::EigenvaluesOnly);
  Vector ev = es.eigenvalues().reverse();
  IdentifiabilityResult out;
  out.eigenvalues = ev;
  const double lead = std::max(ev(0), 0.0);
  out.identifiable_at_point = lead > 0 && ev(ev.size() - 1) > tol * lead;
  return out;
}

AssumptionReport check_assumptions(const MixtureParams& params, const ParameterMask& mask) {
  const int K = params.K, p = num_pairs(params.d());
  AssumptionReport rep;

  rep.a1_shared_main = params.shared_main;
  if (!rep.a1_shared_main && K >= 1) {
    rep.a1_shared_main = true;
    for (int k = 1; k < K; ++k)
      if ((params.components[k].main - params.components[0].main).lpNorm<Eigen::Infinity>() > 1e-12)
        rep.a1_shared_main = false;
  }

  int components_with_free_inter = 0;
  for (int k = 0; k < K; ++k) {
    bool any = false;
    for (int j = 0; j < p; ++j) any = any || mask.free_inter[k][j];
    components_with_free_inter += any;
  }
  rep.a2_one_unknown_component = components_with_free_inter <= 1;
  rep.a3_fixed_weights = !mask.free_weights;

  rep.a4_disjoint_activation = true;
  std::vector<std::set<int>> act(K);
  for (int k = 0; k < K; ++k) act[k] = activation_sets(params.components[k]).activation_vertices;
  for (int k = 0; k < K && rep.a4_disjoint_activation; ++k)
    for (int l = k + 1; l < K && rep.a4_disjoint_activation; ++l)
      for (int v : act[k])
        if (act[l].count(v)) {
          rep.a4_disjoint_activation = false;
          break;
        }

  rep.prop1_applies = rep.a1_shared_main && rep.a2_one_unknown_component && rep.a3_fixed_weights;
  rep.prop2_applies = rep.a1_shared_main && rep.a3_fixed_weights && rep.a4_disjoint_activation;
  return rep;
}

MixtureParams example2_mixture(double theta12, double w) {
  IsingParams c1(2), c2(2);
  c1.inter(0) = theta12;
  Vector weights(2);
  weights << w, 1.0 - w;
  return MixtureParams(weights, {c1, c2}, true);
}

MixtureParams example4_mixture(double theta12, double theta34, double w) {
  IsingParams c1(4), c2(4);
  c1.inter(pair_index(4, 0, 1)) = theta12;
  c2.inter(pair_index(4, 2, 3)) = theta34;
  Vector weights(2);
  weights << w, 1.0 - w;
  return MixtureParams(weights, {c1, c2}, true);
}

// eta' = eta + (w_alt - w_true)(1 - eta)(eta + 3) / [w_alt (eta + 3) + w_true (1 - eta)],
// the transformation that keeps w p(theta) + (1-w) p(0) constant cellwise.
static double transform_eta(double eta, double w_true, double w_alt) {
  const double den = w_alt * (eta + 3.0) + w_true * (1.0 - eta);
  return eta + (w_alt - w_true) * (1.0 - eta) * (eta + 3.0) / den;
}

FamilyAlternative family_example2(double theta12_true, double w_true, double w_alt) {
  if (!(w_alt > 0 && w_alt < 1)) throw std::domain_error("family_example2: w_alt must be in (0,1)");
  const double eta_alt = transform_eta(std::exp(theta12_true), w_true, w_alt);
  if (!(eta_alt > 0)) throw std::domain_error("family_example2: transformed eta is not positive");
  FamilyAlternative out;
  out.theta12_alt = std::log(eta_alt);
  out.w_alt = w_alt;
  return out;
}

FamilyAlternative family_example4(double theta12_true, double theta34_true, double w_true, double w_alt) {
  if (!(w_alt > 0 && w_alt < 1)) throw std::domain_error("family_example4: w_alt must be in (0,1)");
  const double e12 = transform_eta(std::exp(theta12_true), w_true, w_alt);
  // component 2's weight moves the other way
  const double e34 = transform_eta(std::exp(theta34_true), 1.0 - w_true, 1.0 - w_alt);
  if (!(e12 > 0) || !(e34 > 0)) throw std::domain_error("family_example4: transformed eta is not positive");
  FamilyAlternative out;
  out.theta12_alt = std::log(e12);
  out.theta34_alt = std::log(e34);
  out.w_alt = w_alt;
  return out;
}

double verify_equal_distribution(const MixtureParams& a, const MixtureParams& b) {
  if (a.d() != b.d()) throw std::invalid_argument("verify_equal_distribution: dimension mismatch");
  return (mixture_cell_probabilities(a) - mixture_cell_probabilities(b)).lpNorm<Eigen::Infinity>();
}

}  // namespace isingmix
