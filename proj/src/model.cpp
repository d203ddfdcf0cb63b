#include "isingmix/model.hpp"

namespace isingmix {

Matrix build_design_matrix(int d) {
  if (d < 1 || d > 20) throw std::invalid_argument("build_design_matrix: d must be in [1,20]");
  const long n = num_cells(d);
  Matrix A(d + num_pairs(d), n);
  for (long c = 0; c < n; ++c) {
    for (int v = 0; v < d; ++v) A(v, c) = cell_bit(c, v, d);
    int r = d;
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b) A(r++, c) = cell_bit(c, a, d) * cell_bit(c, b, d);
  }
  return A;
}

double log_sum_exp(const Vector& x) {
  const double m = x.maxCoeff();
  return m + std::log((x.array() - m).exp().sum());
}

Vector log_cell_probabilities(const Matrix& A, const Vector& theta_full, double* log_normalizer) {
  Vector s = A.transpose() * theta_full;
  const double logZ = log_sum_exp(s);
  if (log_normalizer) *log_normalizer = logZ;
  return s.array() - logZ;
}

Vector cell_probabilities(const IsingParams& theta) {
  theta.validate();
  const Matrix A = build_design_matrix(theta.d);
  return log_cell_probabilities(A, theta.full()).array().exp();
}

Vector mixture_cell_probabilities(const MixtureParams& params) {
  params.validate();
  const Matrix A = build_design_matrix(params.d());
  Vector p = Vector::Zero(num_cells(params.d()));
  for (int k = 0; k < params.K; ++k)
    p += params.weights(k) * log_cell_probabilities(A, params.components[k].full()).array().exp().matrix();
  return p;
}

double log_likelihood_ising(const IsingParams& theta, const BinaryTable& table) {
  if (theta.d != table.d) throw std::invalid_argument("log_likelihood_ising: dimension mismatch");
  const Matrix A = build_design_matrix(theta.d);
  const Vector s = A.transpose() * theta.full();
  return -log_sum_exp(s) + table.counts.dot(s) / table.total();
}

// Per-cell log p_mix for a prebuilt design matrix; shared by several callers.
static Vector log_mixture_cells(const Matrix& A, const MixtureParams& params) {
  const long n = A.cols();
  Matrix L(n, params.K);
  for (int k = 0; k < params.K; ++k)
    L.col(k) = log_cell_probabilities(A, params.components[k].full()).array() + std::log(params.weights(k));
  Vector out(n);
  for (long i = 0; i < n; ++i) {
    const double m = L.row(i).maxCoeff();
    out(i) = m + std::log((L.row(i).array() - m).exp().sum());
  }
  return out;
}

double log_likelihood_mixture(const MixtureParams& params, const BinaryTable& table) {
  if (params.d() != table.d) throw std::invalid_argument("log_likelihood_mixture: dimension mismatch");
  const Matrix A = build_design_matrix(params.d());
  return table.counts.dot(log_mixture_cells(A, params)) / table.total();
}

double regularized_log_likelihood_ising(const IsingParams& theta, const BinaryTable& table,
                                        const PriorConfig& prior) {
  if (!(prior.sigma1 > 0)) throw std::domain_error("regularized_log_likelihood_ising: sigma1 must be positive");
  const Vector t = theta.full();
  return log_likelihood_ising(theta, table) - t.squaredNorm() / (2.0 * table.total() * prior.sigma1 * prior.sigma1);
}

double regularized_log_likelihood_mixture(const MixtureParams& params, const BinaryTable& table,
                                          const PriorConfig& prior) {
  const Vector alpha = prior.alpha_or_flat(params.K);
  const double N = table.total();
  double out = log_likelihood_mixture(params, table);
  for (int k = 0; k < params.K; ++k) {
    if (alpha(k) != 1.0) {
      const double w = params.weights(k);
      if (w <= 0.0 || w >= 1.0) throw std::domain_error("regularized_log_likelihood_mixture: weight at boundary");
      out += (alpha(k) - 1.0) * std::log(w) / N;
    }
  }
  double sq = 0.0;
  for (const auto& c : params.components) sq += c.full().squaredNorm();
  return out - sq / (2.0 * N * prior.sigma1 * prior.sigma1);
}

GradHess gradient_and_hessian_ising(const IsingParams& theta, const BinaryTable& table,
                                    const PriorConfig& prior) {
  if (theta.d != table.d) throw std::invalid_argument("gradient_and_hessian_ising: dimension mismatch");
  if (!(prior.sigma1 > 0)) throw std::domain_error("gradient_and_hessian_ising: sigma1 must be positive");
  const Matrix A = build_design_matrix(theta.d);
  const double N = table.total();
  const double lam = 1.0 / (N * prior.sigma1 * prior.sigma1);
  const Vector t = theta.full();
  const Vector p = log_cell_probabilities(A, t).array().exp();
  GradHess out;
  out.gradient = A * (table.counts / N - p) - lam * t;
  const Matrix Ap = A * p.asDiagonal() * A.transpose();
  const Vector mu = A * p;
  out.hessian = -(Ap - mu * mu.transpose());
  out.hessian.diagonal().array() -= lam;
  return out;
}

int theta_dim(const MixtureParams& params) {
  const int d = params.d(), p = num_pairs(d);
  return params.shared_main ? d + params.K * p : params.K * (d + p);
}

Vector pack_theta(const MixtureParams& params) {
  const int d = params.d(), p = num_pairs(d);
  Vector x(theta_dim(params));
  if (params.shared_main) {
    x.head(d) = params.components.front().main;
    for (int k = 0; k < params.K; ++k) x.segment(d + k * p, p) = params.components[k].inter;
  } else {
    for (int k = 0; k < params.K; ++k) {
      x.segment(k * (d + p), d) = params.components[k].main;
      x.segment(k * (d + p) + d, p) = params.components[k].inter;
    }
  }
  return x;
}

MixtureParams with_theta(const MixtureParams& base, const Vector& x) {
  if (x.size() != theta_dim(base)) throw std::invalid_argument("with_theta: bad coordinate length");
  const int d = base.d(), p = num_pairs(d);
  MixtureParams out = base;
  if (base.shared_main) {
    for (int k = 0; k < base.K; ++k) {
      out.components[k].main = x.head(d);
      out.components[k].inter = x.segment(d + k * p, p);
    }
  } else {
    for (int k = 0; k < base.K; ++k) {
      out.components[k].main = x.segment(k * (d + p), d);
      out.components[k].inter = x.segment(k * (d + p) + d, p);
    }
  }
  return out;
}

std::pair<int, int> inter_block(const MixtureParams& params, int k) {
  const int d = params.d(), p = num_pairs(d);
  if (k < 0 || k >= params.K) throw std::invalid_argument("inter_block: component out of range");
  return params.shared_main ? std::pair<int, int>{d + k * p, p} : std::pair<int, int>{k * (d + p) + d, p};
}

// Map from free-Theta coordinates to the stacked full coordinates
// [theta^(1); ...; theta^(K)]; a 0/1 selection matrix.
static Matrix free_to_full(const MixtureParams& params) {
  const int d = params.d(), p = num_pairs(d), K = params.K, q = d + p;
  Matrix T = Matrix::Zero(K * q, theta_dim(params));
  for (int k = 0; k < K; ++k) {
    for (int v = 0; v < d; ++v) T(k * q + v, params.shared_main ? v : k * q + v) = 1.0;
    const auto [off, len] = inter_block(params, k);
    for (int j = 0; j < len; ++j) T(k * q + d + j, off + j) = 1.0;
  }
  return T;
}

// Shared workspace for mixture derivatives.
namespace {
struct MixtureEval {
  Matrix P;     // cells x K component probabilities
  Matrix R;     // cells x K responsibilities w_k p_ik / p_mix,i
  Matrix Mu;    // (d+p) x K component means A p_k
  Vector pmix;  // cells
};

MixtureEval eval_mixture(const Matrix& A, const MixtureParams& params) {
  const long n = A.cols();
  MixtureEval e;
  e.P.resize(n, params.K);
  e.Mu.resize(A.rows(), params.K);
  for (int k = 0; k < params.K; ++k) {
    e.P.col(k) = log_cell_probabilities(A, params.components[k].full()).array().exp();
    e.Mu.col(k) = A * e.P.col(k);
  }
  e.pmix = e.P * params.weights;
  e.R = e.P.array().colwise() / e.pmix.array();
  for (int k = 0; k < params.K; ++k) e.R.col(k) *= params.weights(k);
  return e;
}
}  // namespace

MixtureGradient mixture_gradient(const MixtureParams& params, const BinaryTable& table,
                                 const PriorConfig& prior, const Matrix& A) {
  const double N = table.total();
  const Vector m = table.counts / N;
  const Vector alpha = prior.alpha_or_flat(params.K);
  const MixtureEval e = eval_mixture(A, params);
  const int d = params.d(), p = num_pairs(d), q = d + p;
  const double lam = 1.0 / (N * prior.sigma1 * prior.sigma1);

  Matrix Gfull(q, params.K);  // d l / d theta^(k), full coordinates
  for (int k = 0; k < params.K; ++k) {
    const Vector u = m.cwiseProduct(e.R.col(k));
    Gfull.col(k) = A * u - u.sum() * e.Mu.col(k) - lam * params.components[k].full();
  }

  MixtureGradient out;
  out.theta = Vector::Zero(theta_dim(params));
  if (params.shared_main) {
    for (int k = 0; k < params.K; ++k) {
      out.theta.head(d) += Gfull.col(k).head(d);
      out.theta.segment(d + k * p, p) = Gfull.col(k).tail(p);
    }
  } else {
    for (int k = 0; k < params.K; ++k) out.theta.segment(k * q, q) = Gfull.col(k);
  }

  // d l~ / d w_k = sum_i m_i p_ik / p_mix,i + (alpha_k - 1)/(N w_k)
  out.weights = Vector(params.K);
  for (int k = 0; k < params.K; ++k) {
    out.weights(k) = m.dot(e.P.col(k).cwiseQuotient(e.pmix)) +
                     (alpha(k) - 1.0) / (N * params.weights(k));
  }
  return out;
}

Matrix hessian_mixture_theta(const MixtureParams& params, const BinaryTable& table,
                             const PriorConfig& prior) {
  if (params.d() != table.d) throw std::invalid_argument("hessian_mixture_theta: dimension mismatch");
  const Matrix A = build_design_matrix(params.d());
  const double N = table.total();
  const Vector m = table.counts / N;
  const MixtureEval e = eval_mixture(A, params);
  const int q = A.rows(), K = params.K;
  const double lam = 1.0 / (N * prior.sigma1 * prior.sigma1);

  // Full-coordinate Hessian of l, block (k,l):
  //   delta_kl [ D_k' diag(m.R_k) D_k - c_k S_k ] - D_k' diag(m.R_k.R_l) D_l
  // with D_k = A' - 1 mu_k', S_k = A diag(p_k) A' - mu_k mu_k'.
  Matrix H = Matrix::Zero(K * q, K * q);
  std::vector<Matrix> D(K);
  for (int k = 0; k < K; ++k) D[k] = A.transpose().rowwise() - e.Mu.col(k).transpose();
  for (int k = 0; k < K; ++k) {
    const Vector u = m.cwiseProduct(e.R.col(k));
    const Matrix Sk = A * e.P.col(k).asDiagonal() * A.transpose() - e.Mu.col(k) * e.Mu.col(k).transpose();
    H.block(k * q, k * q, q, q) = D[k].transpose() * u.asDiagonal() * D[k] - u.sum() * Sk;
    for (int l = 0; l < K; ++l) {
      const Vector v = m.cwiseProduct(e.R.col(k)).cwiseProduct(e.R.col(l));
      H.block(k * q, l * q, q, q) -= D[k].transpose() * v.asDiagonal() * D[l];
    }
  }
  H.diagonal().array() -= lam;

  const Matrix T = free_to_full(params);
  Matrix Hf = T.transpose() * H * T;
  return 0.5 * (Hf + Hf.transpose());  // symmetrize
}

}  // namespace isingmix
