#include "isingmix/prior.hpp"

#include "isingmix/model.hpp"

#include <cmath>

namespace isingmix {

// log of (1-beta) sigma1 / (beta sigma0)
static double log_odds_scale(const PriorConfig& prior) {
  return std::log1p(-prior.beta) - std::log(prior.beta) + std::log(prior.sigma1) - std::log(prior.sigma0);
}

double r_score(double theta_pair, const PriorConfig& prior) {
  prior.validate();
  // r = 1 / (1 + exp(z)), z = log scale + theta^2 (1/sigma1^2 - 1/sigma0^2) / 2
  const double z = log_odds_scale(prior) +
                   theta_pair * theta_pair *
                       (1.0 / (prior.sigma1 * prior.sigma1) - 1.0 / (prior.sigma0 * prior.sigma0)) / 2.0;
  if (z > 0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

double bracket_log_term(double theta_pair, const PriorConfig& prior) {
  // log(exp(z) + 1) with z as in r_score; z can reach +-5000 theta^2.
  const double z = log_odds_scale(prior) +
                   theta_pair * theta_pair *
                       (1.0 / (2.0 * prior.sigma1 * prior.sigma1) - 1.0 / (2.0 * prior.sigma0 * prior.sigma0));
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double log_h1(const IsingParams& theta, const BinaryTable& table, const PriorConfig& prior) {
  if (theta.d != table.d) throw std::invalid_argument("log_h1: dimension mismatch");
  prior.validate();
  const double N = table.total();
  double out = N * log_likelihood_ising(theta, table) -
               theta.full().squaredNorm() / (2.0 * prior.sigma1 * prior.sigma1);
  for (int j = 0; j < theta.inter.size(); ++j) out += bracket_log_term(theta.inter(j), prior);
  return out;
}

double log_h3(const IsingParams& theta, const BinaryTable& table, const PriorConfig& prior,
              const IsingParams& center, const Matrix& precision) {
  if (theta.d != table.d || center.d != theta.d) throw std::invalid_argument("log_h3: dimension mismatch");
  Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success) throw std::domain_error("log_h3: precision matrix is not positive definite");
  const double N = table.total();
  const Vector diff = theta.full() - center.full();
  double out = N * (regularized_log_likelihood_ising(theta, table, prior) -
                    regularized_log_likelihood_ising(center, table, prior)) +
               0.5 * N * diff.dot(precision * diff);
  for (int j = 0; j < theta.inter.size(); ++j) out += bracket_log_term(theta.inter(j), prior);
  return out;
}

double log_h4(const MixtureParams& params, const BinaryTable& table, const PriorConfig& prior) {
  if (params.d() != table.d) throw std::invalid_argument("log_h4: dimension mismatch");
  prior.validate();
  const double N = table.total();
  double out = N * regularized_log_likelihood_mixture(params, table, prior);
  for (const auto& c : params.components)
    for (int j = 0; j < c.inter.size(); ++j) out += bracket_log_term(c.inter(j), prior);
  return out;
}

}  // namespace isingmix
