#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "isingmix/model.hpp"
#include "isingmix/prior.hpp"

#include <random>

using namespace isingmix;

namespace {

PriorConfig setting1() {
  PriorConfig p;
  p.sigma0 = 0.1;
  p.sigma1 = 1.0;
  p.beta = 0.5;
  return p;
}

BinaryTable random_table(int d, std::mt19937& rng, double N = 400) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Vector counts(num_cells(d));
  for (long i = 0; i < counts.size(); ++i) counts(i) = N * u(rng) / counts.size();
  return BinaryTable(d, counts);
}

}  // namespace

TEST_CASE("r_score: floor value, sigma0 sensitivity, beta limit") {
  CHECK(r_score(0.0, setting1()) == doctest::Approx(1.0 / 11.0).epsilon(1e-14));

  // fixed theta, shrinking spike: r increases toward the indicator value
  // (saturating to 1 in double precision at the smallest spike)
  double prev = 0.0;
  for (double s0 : {0.1, 0.01, 0.001}) {
    PriorConfig p = setting1();
    p.sigma0 = s0;
    const double r = r_score(0.5, p);
    CHECK(r >= prev);
    prev = r;
  }
  CHECK(r_score(0.05, setting1()) < 0.5);  // small effect, wide spike: undecided
  CHECK(prev > 1.0 - 1e-9);

  PriorConfig nearly_slab = setting1();
  nearly_slab.beta = 1.0 - 1e-12;
  CHECK(r_score(0.0, nearly_slab) > 1.0 - 1e-9);

  CHECK(gamma_conditional(0.7, setting1()) == r_score(0.7, setting1()));
}

TEST_CASE("r_score: even, monotone in |theta|, bounded, no overflow") {
  const PriorConfig p = setting1();
  const double r0 = r_score(0.0, p);
  double prev = r0;
  for (double t = 0.05; t <= 60.0; t += 0.05) {
    const double r = r_score(t, p);
    CHECK(r == r_score(-t, p));
    CHECK(r >= prev);
    CHECK(r <= 1.0);
    prev = r;
  }
  CHECK(std::abs(r_score(50.0, p) - 1.0) < 1e-15);

  PriorConfig tiny = setting1();
  tiny.sigma0 = 1e-4;
  CHECK(std::isfinite(r_score(50.0, tiny)));
  CHECK(std::isfinite(bracket_log_term(50.0, tiny)));

  // r(0) = 1/(1 + (1-beta) sigma1 / (beta sigma0)), increasing in sigma0
  double prev_floor = 0.0;
  for (double s0 : {0.01, 0.05, 0.1, 0.5}) {
    PriorConfig q = setting1();
    q.sigma0 = s0;
    const double floor = 1.0 / (1.0 + (1 - q.beta) * q.sigma1 / (q.beta * q.sigma0));
    CHECK(r_score(0.0, q) == doctest::Approx(floor).epsilon(1e-13));
    CHECK(floor > prev_floor);
    prev_floor = floor;
  }
}

TEST_CASE("log_h1: closed form at zero, naive comparison, main-effect shift") {
  const PriorConfig prior = setting1();
  std::mt19937 rng(5);
  const BinaryTable table = random_table(2, rng);
  const double N = table.total();

  const double at_zero = log_h1(IsingParams(2), table, prior);
  const double expected = N * log_likelihood_ising(IsingParams(2), table) +
                          std::log((1 - prior.beta) * prior.sigma1 / (prior.beta * prior.sigma0) + 1.0);
  CHECK(at_zero == doctest::Approx(expected).epsilon(1e-13));

  // naive non-log evaluation at moderate theta agrees
  std::normal_distribution<double> n01(0.0, 0.7);
  for (int trial = 0; trial < 20; ++trial) {
    IsingParams t(2);
    t.main << n01(rng), n01(rng);
    t.inter << n01(rng);
    const double lh = log_h1(t, table, prior);
    const double scale = (1 - prior.beta) * prior.sigma1 / (prior.beta * prior.sigma0);
    const double naive = std::exp(N * log_likelihood_ising(t, table) -
                                  t.full().squaredNorm() / (2 * prior.sigma1 * prior.sigma1)) *
                         (scale * std::exp(t.inter(0) * t.inter(0) *
                                           (1 / (2 * prior.sigma1 * prior.sigma1) -
                                            1 / (2 * prior.sigma0 * prior.sigma0))) +
                          1.0);
    CHECK(lh == doctest::Approx(std::log(naive)).epsilon(1e-10));
  }

  // adding c to a main effect moves log h1 by N dl - penalty change exactly
  IsingParams t(2);
  t.main << 0.3, -0.2;
  t.inter << 0.5;
  IsingParams t2 = t;
  t2.main(0) += 0.25;
  const double lhs = log_h1(t2, table, prior) - log_h1(t, table, prior);
  const double rhs = N * (log_likelihood_ising(t2, table) - log_likelihood_ising(t, table)) -
                     (t2.full().squaredNorm() - t.full().squaredNorm()) / (2 * prior.sigma1 * prior.sigma1);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("log_h3: cancellation at the center and the h1/h2 identity") {
  const PriorConfig prior = setting1();
  std::mt19937 rng(9);
  const BinaryTable table = random_table(2, rng);
  const double N = table.total();

  IsingParams center(2);
  center.main << 0.2, -0.1;
  center.inter << 0.4;
  Matrix precision = Matrix::Identity(3, 3) * 2.0;
  precision(0, 1) = precision(1, 0) = 0.3;

  const double at_center = log_h3(center, table, prior, center, precision);
  CHECK(at_center == doctest::Approx(bracket_log_term(center.inter(0), prior)).epsilon(1e-12));

  // log h3(a) - log h3(b) == log h1(a) - log h1(b) - [log h2(a) - log h2(b)]
  std::normal_distribution<double> n01(0.0, 0.3);
  for (int trial = 0; trial < 25; ++trial) {
    IsingParams a = center, b = center;
    a.main(0) += n01(rng);
    a.inter(0) += n01(rng);
    b.main(1) += n01(rng);
    b.inter(0) += n01(rng);
    auto log_h2 = [&](const IsingParams& t) {
      const Vector diff = t.full() - center.full();
      return -0.5 * N * diff.dot(precision * diff);  // up to the normal constant
    };
    const double lhs = log_h3(a, table, prior, center, precision) - log_h3(b, table, prior, center, precision);
    const double rhs = (log_h1(a, table, prior) - log_h1(b, table, prior)) - (log_h2(a) - log_h2(b));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }

  Matrix bad = -Matrix::Identity(3, 3);
  CHECK_THROWS_AS(log_h3(center, table, prior, center, bad), std::domain_error);
}

TEST_CASE("log_h3 residual near the maximizer is third order") {
  // with precision = negated Hessian of l~ at the maximizer, the quadratic
  // cancels N l~ to second order and log h3 - bracket = O(|u|^3)
  const PriorConfig prior = setting1();
  std::mt19937 rng(13);
  const BinaryTable table = random_table(2, rng);
  const Matrix A = build_design_matrix(2);
  const double lam = 1.0 / (table.total() * prior.sigma1 * prior.sigma1);

  Vector th = Vector::Zero(3);
  for (int it = 0; it < 60; ++it) {
    const Vector p = log_cell_probabilities(A, th).array().exp();
    const Vector g = A * (table.counts / table.total() - p) - lam * th;
    Matrix H = A * p.asDiagonal() * A.transpose();
    const Vector mu = A * p;
    H -= mu * mu.transpose();
    H.diagonal().array() += lam;
    th += H.llt().solve(g);
  }
  const IsingParams center = IsingParams::from_full(2, th);
  const Vector p = log_cell_probabilities(A, th).array().exp();
  Matrix precision = A * p.asDiagonal() * A.transpose();
  const Vector mu = A * p;
  precision -= mu * mu.transpose();
  precision.diagonal().array() += lam;

  double resid_at[3];
  const double epss[3] = {4e-2, 2e-2, 1e-2};
  for (int i = 0; i < 3; ++i) {
    IsingParams t = center;
    t.main(0) += epss[i];
    t.inter(0) += epss[i];
    resid_at[i] = std::abs(log_h3(t, table, prior, center, precision) -
                           bracket_log_term(t.inter(0), prior));
  }
  // halving eps should cut the residual by about 8; accept anything >= 4
  CHECK(resid_at[0] / resid_at[1] > 4.0);
  CHECK(resid_at[1] / resid_at[2] > 4.0);
}

TEST_CASE("log_h4: K=1 reduction, exchangeable permutation invariance, zero point") {
  const PriorConfig prior = setting1();
  std::mt19937 rng(17);
  const BinaryTable table = random_table(3, rng);
  const double N = table.total();

  std::normal_distribution<double> n01(0.0, 0.8);
  IsingParams t(3);
  for (int v = 0; v < 3; ++v) t.main(v) = n01(rng);
  for (int j = 0; j < 3; ++j) t.inter(j) = n01(rng);
  CHECK(log_h4(MixtureParams::single(t), table, prior) ==
        doctest::Approx(log_h1(t, table, prior)).epsilon(1e-12));

  IsingParams t2(3);
  for (int v = 0; v < 3; ++v) t2.main(v) = n01(rng);
  for (int j = 0; j < 3; ++j) t2.inter(j) = n01(rng);
  Vector w(2), wp(2);
  w << 0.3, 0.7;
  wp << 0.7, 0.3;
  CHECK(log_h4(MixtureParams(w, {t, t2}, false), table, prior) ==
        doctest::Approx(log_h4(MixtureParams(wp, {t2, t}, false), table, prior)).epsilon(1e-12));

  // Theta = 0 closed form (alpha = 1)
  Vector w3(2);
  w3 << 0.4, 0.6;
  const MixtureParams zero(w3, {IsingParams(3), IsingParams(3)}, true);
  const double brackets = 2 * 3 * std::log((1 - prior.beta) * prior.sigma1 / (prior.beta * prior.sigma0) + 1.0);
  CHECK(log_h4(zero, table, prior) ==
        doctest::Approx(N * log_likelihood_mixture(zero, table) + brackets).epsilon(1e-12));
}

TEST_CASE("log_h1 and log_h4 stay finite at large theta with small sigma0") {
  PriorConfig prior;
  prior.sigma0 = 1e-4;
  prior.sigma1 = 1.0;
  prior.beta = 0.5;
  std::mt19937 rng(21);
  const BinaryTable table = random_table(2, rng);
  for (double v : {-50.0, -10.0, 10.0, 50.0}) {
    IsingParams t(2);
    t.main << v, -v;
    t.inter << v;
    CHECK(std::isfinite(log_h1(t, table, prior)));
    Vector w(2);
    w << 0.5, 0.5;
    CHECK(std::isfinite(log_h4(MixtureParams(w, {t, t}, true), table, prior)));
  }
}

TEST_CASE("log_h4 equals log_h1 for K=1 on random instances") {
  const PriorConfig prior = setting1();
  std::mt19937 rng(25);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + trial % 3;
    IsingParams t(d);
    for (int v = 0; v < d; ++v) t.main(v) = n01(rng);
    for (int j = 0; j < num_pairs(d); ++j) t.inter(j) = n01(rng);
    const BinaryTable table = random_table(d, rng);
    const double h1v = log_h1(t, table, prior);
    CHECK(std::abs(log_h4(MixtureParams::single(t), table, prior) - h1v) <
          1e-12 * std::max(1.0, std::abs(h1v)));
  }
}
