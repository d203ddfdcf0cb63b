#pragma once

#include "isingmix/types.hpp"

#include <cstdint>
#include <random>

namespace isingmix {

using RngEngine = std::mt19937_64;

/// One RNG stream per unit of work: multi-start run j uses stream(seed, j),
/// replicate r of a sampling pass uses stream(seed, offset + r). Sequential
/// stream ids keep results identical however the work is scheduled.
inline RngEngine make_stream(std::uint64_t seed, std::uint64_t stream) { return RngEngine(seed + stream); }

/// Cholesky factor of a symmetric positive definite matrix; throws on failure.
Matrix cholesky_lower(const Matrix& S);

/// Draw n columns from N(mean, L L') given the lower Cholesky factor L.
Matrix sample_mvn(const Vector& mean, const Matrix& chol_lower, long n, RngEngine& rng);

/// One draw from Dirichlet(alpha) via normalized gammas.
Vector sample_dirichlet(const Vector& alpha, RngEngine& rng);

/// log density of Dirichlet(alpha) at w (w in the open simplex).
double dirichlet_log_pdf(const Vector& w, const Vector& alpha);

/// Multinomial(N, p) draw as a count vector.
Vector sample_multinomial(long n_draws, const Vector& probs, RngEngine& rng);

}  // namespace isingmix
