#include "isingmix/rng.hpp"

#include <cmath>

namespace isingmix {

Matrix cholesky_lower(const Matrix& S) {
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success) throw std::domain_error("cholesky_lower: matrix not positive definite");
  return llt.matrixL();
}

Matrix sample_mvn(const Vector& mean, const Matrix& chol_lower, long n, RngEngine& rng) {
  std::normal_distribution<double> normal;
  Matrix Z(mean.size(), n);
  for (long j = 0; j < n; ++j)
    for (long i = 0; i < mean.size(); ++i) Z(i, j) = normal(rng);
  Matrix out = chol_lower * Z;
  out.colwise() += mean;
  return out;
}

Vector sample_dirichlet(const Vector& alpha, RngEngine& rng) {
  Vector g(alpha.size());
  for (long i = 0; i < alpha.size(); ++i) {
    std::gamma_distribution<double> gamma(alpha(i), 1.0);
    g(i) = gamma(rng);
  }
  const double s = g.sum();
  if (!(s > 0)) {
    // all gammas underflowed (tiny alphas); fall back to the argmax corner
    Vector out = Vector::Constant(alpha.size(), 1e-300);
    Eigen::Index imax;
    alpha.maxCoeff(&imax);
    out(imax) = 1.0;
    return out / out.sum();
  }
  return g / s;
}

double dirichlet_log_pdf(const Vector& w, const Vector& alpha) {
  if (w.size() != alpha.size()) throw std::invalid_argument("dirichlet_log_pdf: length mismatch");
  double out = std::lgamma(alpha.sum());
  for (long i = 0; i < alpha.size(); ++i) {
    if (w(i) <= 0.0 || w(i) >= 1.0) return -std::numeric_limits<double>::infinity();
    out += (alpha(i) - 1.0) * std::log(w(i)) - std::lgamma(alpha(i));
  }
  return out;
}

Vector sample_multinomial(long n_draws, const Vector& probs, RngEngine& rng) {
  // sequential binomial splitting
  Vector out = Vector::Zero(probs.size());
  double remaining_p = 1.0;
  long remaining_n = n_draws;
  for (long i = 0; i < probs.size() && remaining_n > 0; ++i) {
    if (i + 1 == probs.size()) {
      out(i) = static_cast<double>(remaining_n);
      break;
    }
    const double q = std::min(1.0, std::max(0.0, probs(i) / remaining_p));
    std::binomial_distribution<long> bin(remaining_n, q);
    const long c = bin(rng);
    out(i) = static_cast<double>(c);
    remaining_n -= c;
    remaining_p -= probs(i);
    if (remaining_p <= 0) break;
  }
  return out;
}

}  // namespace isingmix
