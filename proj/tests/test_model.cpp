#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "isingmix/model.hpp"

#include <random>

using namespace isingmix;

namespace {

// finite-difference oracle for gradients/Hessians of scalar functions
template <typename F>
Vector fd_gradient(F&& f, const Vector& x, double h = 1e-5) {
  Vector g(x.size());
  for (long i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2 * h);
  }
  return g;
}

template <typename F>
Matrix fd_hessian(F&& f, const Vector& x, double h = 1e-5) {
  Matrix H(x.size(), x.size());
  for (long i = 0; i < x.size(); ++i)
    for (long j = 0; j < x.size(); ++j) {
      Vector xpp = x, xpm = x, xmp = x, xmm = x;
      xpp(i) += h; xpp(j) += h;
      xpm(i) += h; xpm(j) -= h;
      xmp(i) -= h; xmp(j) += h;
      xmm(i) -= h; xmm(j) -= h;
      H(i, j) = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4 * h * h);
    }
  return H;
}

BinaryTable random_table(int d, std::mt19937& rng, double N = 500) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector counts(num_cells(d));
  for (long i = 0; i < counts.size(); ++i) counts(i) = std::floor(N * u(rng) / counts.size()) + u(rng);
  return BinaryTable(d, counts);
}

IsingParams random_theta(int d, std::mt19937& rng, double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  IsingParams t(d);
  for (int v = 0; v < d; ++v) t.main(v) = n(rng);
  for (int j = 0; j < num_pairs(d); ++j) t.inter(j) = n(rng);
  return t;
}

}  // namespace

TEST_CASE("design matrix matches the d=2 reference layout") {
  const Matrix A = build_design_matrix(2);
  // canonical column order (0,0),(0,1),(1,0),(1,1)
  Matrix expected(3, 4);
  expected << 0, 0, 1, 1,  // main effect of variable 1
      0, 1, 0, 1,          // main effect of variable 2
      0, 0, 0, 1;          // interaction
  CHECK((A - expected).lpNorm<Eigen::Infinity>() == 0.0);

  // the reference example lists cells with variable 1 fastest; permuting
  // columns (0,0),(1,0),(0,1),(1,1) gives its A^T rows
  Matrix At_example(4, 3);
  At_example << 0, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1, 1;
  const int perm[4] = {0, 2, 1, 3};
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 3; ++r) CHECK(A(r, perm[c]) == At_example(c, r));
}

TEST_CASE("design matrix d=1 and structural invariants") {
  const Matrix A1 = build_design_matrix(1);
  CHECK(A1.rows() == 1);
  CHECK(A1.cols() == 2);
  CHECK(A1(0, 0) == 0.0);
  CHECK(A1(0, 1) == 1.0);

  const Matrix A = build_design_matrix(5);
  CHECK(A.col(0).lpNorm<Eigen::Infinity>() == 0.0);  // all-zeros cell
  for (int v = 0; v < 5; ++v) {
    const long cell = 1L << (4 - v);  // only variable v active
    CHECK(A.col(cell).sum() == 1.0);
    CHECK(A(v, cell) == 1.0);
  }
  CHECK_THROWS_AS(build_design_matrix(0), std::invalid_argument);
  CHECK_THROWS_AS(build_design_matrix(21), std::invalid_argument);
}

TEST_CASE("cell probabilities: identity and hand-computed cases") {
  IsingParams t(2);
  Vector p = cell_probabilities(t);
  CHECK(p.isApprox(Vector::Constant(4, 0.25), 1e-14));

  t.inter(0) = std::log(2.0);
  p = cell_probabilities(t);  // unnormalized (1,1,1,2), Z=5
  CHECK(p(0) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(p(1) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(p(2) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(p(3) == doctest::Approx(0.4).epsilon(1e-12));

  IsingParams t1(1);
  p = cell_probabilities(t1);
  CHECK(p(0) == doctest::Approx(0.5));
  CHECK(p(1) == doctest::Approx(0.5));
}

TEST_CASE("cell probabilities: positivity, normalization, log ratios") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + trial % 5;
    const IsingParams t = random_theta(d, rng, 1.5);
    const Vector p = cell_probabilities(t);
    CHECK((p.array() > 0).all());
    CHECK(std::abs(p.sum() - 1.0) < 1e-12);
    // log p_i - log p_0 = (A' theta)_i exactly up to fp rounding
    const Matrix A = build_design_matrix(d);
    const Vector s = A.transpose() * t.full();
    for (long i = 0; i < p.size(); ++i)
      CHECK(std::log(p(i)) - std::log(p(0)) == doctest::Approx(s(i) - s(0)).epsilon(1e-10));
  }
}

TEST_CASE("mixture probabilities: degenerate and hand cases") {
  std::mt19937 rng(3);
  const IsingParams t = random_theta(3, rng);
  const MixtureParams single = MixtureParams::single(t);
  CHECK(mixture_cell_probabilities(single).isApprox(cell_probabilities(t), 1e-14));

  Vector w(2);
  w << 0.3, 0.7;
  const MixtureParams twin(w, {t, t}, true);
  CHECK(mixture_cell_probabilities(twin).isApprox(cell_probabilities(t), 1e-13));

  // d=2, mains 0, w=(0.4,0.6), theta12 = (log 2, 0): cells (.23,.23,.23,.31)
  IsingParams a(2), b(2);
  a.inter(0) = std::log(2.0);
  Vector w2(2);
  w2 << 0.4, 0.6;
  const Vector p = mixture_cell_probabilities(MixtureParams(w2, {a, b}, true));
  CHECK(p(0) == doctest::Approx(0.23).epsilon(1e-12));
  CHECK(p(3) == doctest::Approx(0.31).epsilon(1e-12));
}

TEST_CASE("mixture probabilities invariant under component permutation") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + trial % 3;
    Vector w(3);
    w << 0.2, 0.3, 0.5;
    std::vector<IsingParams> comps{random_theta(d, rng), random_theta(d, rng), random_theta(d, rng)};
    const MixtureParams m1(w, comps, false);
    Vector wp(3);
    wp << 0.5, 0.2, 0.3;
    const MixtureParams m2(wp, {comps[2], comps[0], comps[1]}, false);
    CHECK((mixture_cell_probabilities(m1) - mixture_cell_probabilities(m2)).lpNorm<Eigen::Infinity>() < 1e-15);
  }
}

TEST_CASE("single-active-cell ratio identity under shared mains") {
  std::mt19937 rng(19);
  const int d = 4;
  Vector w(2);
  w << 0.35, 0.65;
  IsingParams c1 = random_theta(d, rng), c2 = random_theta(d, rng);
  c2.main = c1.main;
  const MixtureParams mix(w, {c1, c2}, true);
  const Vector p = mixture_cell_probabilities(mix);
  for (int v = 0; v < d; ++v) {
    const long cell = 1L << (d - 1 - v);
    CHECK(p(cell) / p(0) == doctest::Approx(std::exp(c1.main(v))).epsilon(1e-12));
  }
}

TEST_CASE("log likelihoods: uniform and matched-moments identities") {
  Vector counts = Vector::Constant(4, 25.0);
  const BinaryTable uniform(2, counts);
  CHECK(log_likelihood_ising(IsingParams(2), uniform) == doctest::Approx(-std::log(4.0)).epsilon(1e-14));

  const BinaryTable uniform8(8, Vector::Constant(256, 3.0));
  CHECK(log_likelihood_ising(IsingParams(8), uniform8) == doctest::Approx(-8 * std::log(2.0)).epsilon(1e-14));

  // n = N p(theta)  =>  l = sum p log p
  std::mt19937 rng(23);
  const IsingParams t = random_theta(4, rng);
  const Vector p = cell_probabilities(t);
  const BinaryTable matched(4, 1000.0 * p);
  CHECK(log_likelihood_ising(t, matched) ==
        doctest::Approx((p.array() * p.array().log()).sum()).epsilon(1e-12));

  IsingParams t3(3);
  const BinaryTable bad(4, Vector::Constant(16, 1.0));
  CHECK_THROWS_AS(log_likelihood_ising(t3, bad), std::invalid_argument);
}

TEST_CASE("mixture log likelihood: K=1 reduction, permutation, matched moments") {
  std::mt19937 rng(29);
  const IsingParams t = random_theta(3, rng);
  const BinaryTable table = random_table(3, rng);
  CHECK(log_likelihood_mixture(MixtureParams::single(t), table) ==
        doctest::Approx(log_likelihood_ising(t, table)).epsilon(1e-14));

  Vector w(2);
  w << 0.4, 0.6;
  const MixtureParams mix(w, {random_theta(3, rng), random_theta(3, rng)}, false);
  Vector wp(2);
  wp << 0.6, 0.4;
  const MixtureParams mixp(wp, {mix.components[1], mix.components[0]}, false);
  CHECK(log_likelihood_mixture(mix, table) == doctest::Approx(log_likelihood_mixture(mixp, table)).epsilon(1e-14));

  const Vector pmix = mixture_cell_probabilities(mix);
  const BinaryTable matched(3, 10000.0 * pmix);
  CHECK(log_likelihood_mixture(mix, matched) ==
        doctest::Approx((pmix.array() * pmix.array().log()).sum()).epsilon(1e-12));
}

TEST_CASE("regularized log likelihoods") {
  PriorConfig prior;
  prior.sigma1 = 1.0;
  std::mt19937 rng(31);
  const BinaryTable table = random_table(2, rng, 100);

  CHECK(regularized_log_likelihood_ising(IsingParams(2), table, prior) ==
        doctest::Approx(log_likelihood_ising(IsingParams(2), table)).epsilon(1e-14));

  // d=2, theta=(1,1,1), N=100, sigma1=1: penalty is exactly 3/200
  IsingParams t(2);
  t.main << 1, 1;
  t.inter << 1;
  BinaryTable n100(2, table.counts * (100.0 / table.total()));
  CHECK(regularized_log_likelihood_ising(t, n100, prior) ==
        doctest::Approx(log_likelihood_ising(t, n100) - 3.0 / 200.0).epsilon(1e-13));

  PriorConfig wide = prior;
  wide.sigma1 = 1e9;
  CHECK(regularized_log_likelihood_ising(t, n100, wide) ==
        doctest::Approx(log_likelihood_ising(t, n100)).epsilon(1e-12));

  // mixture with alpha = 1: only the Theta penalty remains; K=1 reduces
  const MixtureParams single = MixtureParams::single(t);
  CHECK(regularized_log_likelihood_mixture(single, n100, prior) ==
        doctest::Approx(regularized_log_likelihood_ising(t, n100, prior)).epsilon(1e-13));

  Vector w(2);
  w << 0.4, 0.6;
  const MixtureParams mix(w, {t, t}, true);
  double sq = 2 * t.full().squaredNorm();
  CHECK(regularized_log_likelihood_mixture(mix, n100, prior) ==
        doctest::Approx(log_likelihood_mixture(mix, n100) - sq / 200.0).epsilon(1e-13));

  PriorConfig with_alpha = prior;
  with_alpha.alpha = Vector(2);
  with_alpha.alpha << 2.0, 3.0;
  const double expect = log_likelihood_mixture(mix, n100) - sq / 200.0 +
                        (1.0 * std::log(0.4) + 2.0 * std::log(0.6)) / 100.0;
  CHECK(regularized_log_likelihood_mixture(mix, n100, with_alpha) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("ising gradient and hessian against finite differences") {
  PriorConfig prior;
  std::mt19937 rng(37);

  // uniform table at theta = 0 has zero gradient
  const BinaryTable uniform(3, Vector::Constant(8, 10.0));
  const GradHess gh0 = gradient_and_hessian_ising(IsingParams(3), uniform, prior);
  CHECK(gh0.gradient.lpNorm<Eigen::Infinity>() < 1e-14);

  // d=1, theta=0, N=100, sigma1=1: negated hessian = 0.26
  Vector c2(2);
  c2 << 50, 50;
  const GradHess gh1 = gradient_and_hessian_ising(IsingParams(1), BinaryTable(1, c2), prior);
  CHECK(-gh1.hessian(0, 0) == doctest::Approx(0.26).epsilon(1e-12));

  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 5;
    const IsingParams t = random_theta(d, rng);
    const BinaryTable table = random_table(d, rng);
    const GradHess gh = gradient_and_hessian_ising(t, table, prior);
    auto f = [&](const Vector& x) {
      return regularized_log_likelihood_ising(IsingParams::from_full(d, x), table, prior);
    };
    const Vector gfd = fd_gradient(f, t.full());
    CHECK((gh.gradient - gfd).norm() / std::max(1.0, gfd.norm()) < 1e-6);
    if (trial % 10 == 0) {
      const Matrix hfd = fd_hessian(f, t.full());
      CHECK((gh.hessian - hfd).norm() / std::max(1.0, hfd.norm()) < 1e-5);
    }
    // hessian symmetric negative definite
    CHECK((gh.hessian - gh.hessian.transpose()).lpNorm<Eigen::Infinity>() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Matrix> es(-gh.hessian, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > 0);
  }
}

TEST_CASE("mixture theta hessian matches finite differences") {
  PriorConfig prior;
  std::mt19937 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 3;
    const bool shared = trial % 2 == 0;
    Vector w(2);
    w << 0.3, 0.7;
    IsingParams c1 = random_theta(d, rng), c2 = random_theta(d, rng);
    if (shared) c2.main = c1.main;
    const MixtureParams mix(w, {c1, c2}, shared);
    const BinaryTable table = random_table(d, rng);

    const Matrix H = hessian_mixture_theta(mix, table, prior);
    auto f = [&](const Vector& x) {
      return regularized_log_likelihood_mixture(with_theta(mix, x), table, prior);
    };
    const Matrix Hfd = fd_hessian(f, pack_theta(mix), 1e-4);
    CHECK((H - Hfd).norm() / std::max(1.0, Hfd.norm()) < 1e-5);
    CHECK((H - H.transpose()).lpNorm<Eigen::Infinity>() < 1e-10);

    const MixtureGradient g = mixture_gradient(mix, table, prior, build_design_matrix(d));
    const Vector gfd = fd_gradient(f, pack_theta(mix));
    CHECK((g.theta - gfd).norm() / std::max(1.0, gfd.norm()) < 1e-6);
  }
}

TEST_CASE("mixture hessian: K=1 equals the single-component hessian") {
  PriorConfig prior;
  std::mt19937 rng(43);
  const IsingParams t = random_theta(3, rng);
  const BinaryTable table = random_table(3, rng);
  const Matrix H1 = hessian_mixture_theta(MixtureParams::single(t), table, prior);
  const GradHess gh = gradient_and_hessian_ising(t, table, prior);
  CHECK((H1 - gh.hessian).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("mixture hessian permutes with component relabeling") {
  PriorConfig prior;
  std::mt19937 rng(47);
  const int d = 3, p = num_pairs(d);
  Vector w(2);
  w << 0.45, 0.55;
  IsingParams c1 = random_theta(d, rng), c2 = random_theta(d, rng);
  c2.main = c1.main;
  const MixtureParams mix(w, {c1, c2}, true);
  Vector wp(2);
  wp << 0.55, 0.45;
  const MixtureParams mixp(wp, {c2, c1}, true);
  const BinaryTable table = random_table(d, rng);

  const Matrix H = hessian_mixture_theta(mix, table, prior);
  const Matrix Hp = hessian_mixture_theta(mixp, table, prior);
  // permutation swaps the two interaction blocks and fixes the shared mains
  Eigen::VectorXi perm(d + 2 * p);
  for (int i = 0; i < d; ++i) perm(i) = i;
  for (int j = 0; j < p; ++j) {
    perm(d + j) = d + p + j;
    perm(d + p + j) = d + j;
  }
  Matrix P = Matrix::Zero(d + 2 * p, d + 2 * p);
  for (int i = 0; i < d + 2 * p; ++i) P(perm(i), i) = 1.0;
  CHECK((Hp - P.transpose() * H * P).lpNorm<Eigen::Infinity>() < 1e-12);
}
