#pragma once

#include "isingmix/types.hpp"

namespace isingmix {

/// Smoothed association indicator
///   r(theta) = 1 / (1 + (1-beta) sigma1 / (beta sigma0) * exp(theta^2 (1/sigma1^2 - 1/sigma0^2) / 2)).
/// Even in theta, increasing in |theta|, with infimum r(0) and supremum 1.
/// Evaluated through the log of the odds term so large |theta| saturates to 1
/// without overflow.
double r_score(double theta_pair, const PriorConfig& prior);

/// Bernoulli parameter of gamma | theta; identical to r_score by definition,
/// kept as a named alias so the posterior-of-gamma contract reads literally.
inline double gamma_conditional(double theta_pair, const PriorConfig& prior) { return r_score(theta_pair, prior); }

/// log[ (1-beta) sigma1 / (beta sigma0) * exp(theta^2/(2 sigma1^2) - theta^2/(2 sigma0^2)) + 1 ],
/// one factor of the h1/h3/h4 products, via log1p on whichever side is small.
double bracket_log_term(double theta_pair, const PriorConfig& prior);

/// log h1(theta) = N l~(theta) + sum_{v'<v} bracket_log_term(theta_{v'v}).
/// The unnormalized log posterior of theta under the Ising model.
double log_h1(const IsingParams& theta, const BinaryTable& table, const PriorConfig& prior);

/// log h3(theta) = N[l~(theta) - l~(center)] + N/2 (theta-center)' precision (theta-center)
///                 + sum brackets;  the log IS weight against the Laplace
/// proposal h2 = N(center, precision^{-1}/N). precision must be SPD.
double log_h3(const IsingParams& theta, const BinaryTable& table, const PriorConfig& prior,
              const IsingParams& center, const Matrix& precision);

/// log h4(w, Theta) = N l~(w, Theta) + sum over all K d(d-1)/2 brackets.
double log_h4(const MixtureParams& params, const BinaryTable& table, const PriorConfig& prior);

}  // namespace isingmix
