#include "isingmix/sampler.hpp"

#include <cmath>

namespace isingmix {

namespace {

constexpr long kChunk = 4096;  // samples per batched evaluation block

// log(exp(z) + 1) elementwise, stable on both sides.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

struct BracketCoeffs {
  double log_scale;  // log((1-beta) sigma1 / (beta sigma0))
  double curvature;  // 1/(2 sigma1^2) - 1/(2 sigma0^2)
};

BracketCoeffs bracket_coeffs(const PriorConfig& prior) {
  return {std::log1p(-prior.beta) - std::log(prior.beta) + std::log(prior.sigma1) - std::log(prior.sigma0),
          1.0 / (2.0 * prior.sigma1 * prior.sigma1) - 1.0 / (2.0 * prior.sigma0 * prior.sigma0)};
}

double r_of(double theta, const BracketCoeffs& bc) {
  const double z = bc.log_scale + bc.curvature * theta * theta;
  if (z > 0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

// Online accumulator for self-normalized IS sums processed in chunks:
// keeps sums of e^{lw - shift}, r e^{lw - shift} and e^{2(lw - shift)}.
struct IsAccumulator {
  double shift = -std::numeric_limits<double>::infinity();
  double sum_w = 0.0;
  double sum_w2 = 0.0;
  Vector sum_rw;  // numerator accumulators

  explicit IsAccumulator(long n_stats) : sum_rw(Vector::Zero(n_stats)) {}

  void add_chunk(const Vector& logw, const Matrix& stats) {  // stats: n_stats x chunk
    const double m = logw.maxCoeff();
    if (m > shift) {
      const double c = std::exp(shift - m);
      sum_w *= c;
      sum_w2 *= c * c;
      sum_rw *= c;
      shift = m;
    }
    const Vector w = (logw.array() - shift).exp();
    sum_w += w.sum();
    sum_w2 += w.squaredNorm();
    sum_rw += stats * w;
  }

  Vector mean() const { return sum_rw / sum_w; }
  double ess() const { return sum_w * sum_w / sum_w2; }
};

}  // namespace

Vector replicate_se(const std::vector<Vector>& estimates) {
  const int R = static_cast<int>(estimates.size());
  if (R < 2) throw std::invalid_argument("replicate_se: need at least two replicates");
  Vector mean = Vector::Zero(estimates.front().size());
  for (const auto& e : estimates) mean += e;
  mean /= R;
  Vector ss = Vector::Zero(mean.size());
  for (const auto& e : estimates) ss += (e - mean).cwiseAbs2();
  return (ss / (R - 1)).cwiseSqrt();
}

PosteriorSummary posterior_gamma_ising(const BinaryTable& table, const PriorConfig& prior, long M,
                                       std::uint64_t rng_seed, int R) {
  if (M < 100) throw std::invalid_argument("posterior_gamma_ising: M must be >= 100");
  if (R < 1) throw std::invalid_argument("posterior_gamma_ising: R must be >= 1");
  prior.validate();

  const LocalOptimum fit = fit_map_ising(table, prior);
  const int d = table.d, p = num_pairs(d);
  const Matrix A = build_design_matrix(d);
  const double N = table.total();
  const Vector m = table.counts / N;
  const Vector center = fit.params.components.front().full();
  const Matrix& precision = fit.hessian_theta;  // Sigma~^{-1}, per-observation scale
  const Matrix chol_prop = cholesky_lower(precision.llt().solve(Matrix::Identity(center.size(), center.size()))) /
                           std::sqrt(N);  // chol(Sigma~ / N)
  const double lam = 1.0 / (N * prior.sigma1 * prior.sigma1);
  const double lt_center = log_likelihood_ising(fit.params.components.front(), table) -
                           lam * center.squaredNorm() / 2.0;
  const BracketCoeffs bc = bracket_coeffs(prior);

  std::vector<Vector> reps;
  reps.reserve(R);
  Vector ess(R);
  bool degenerate = false;

  for (int rep = 0; rep < R; ++rep) {
    RngEngine rng = make_stream(rng_seed, static_cast<std::uint64_t>(rep));
    IsAccumulator acc(p);
    for (long done = 0; done < M; done += kChunk) {
      const long n = std::min(kChunk, M - done);
      const Matrix Theta = sample_mvn(center, chol_prop, n, rng);
      const Matrix S = A.transpose() * Theta;  // cells x n
      Vector logw(n);
      Matrix rstats(p, n);
      for (long j = 0; j < n; ++j) {
        const double lse = log_sum_exp(S.col(j));
        const double lt = -lse + m.dot(S.col(j)) - lam * Theta.col(j).squaredNorm() / 2.0;
        const Vector diff = Theta.col(j) - center;
        double lw = N * (lt - lt_center) + 0.5 * N * diff.dot(precision * diff);
        for (int i = 0; i < p; ++i) {
          const double th = Theta(d + i, j);
          lw += softplus(bc.log_scale + bc.curvature * th * th);
          rstats(i, j) = r_of(th, bc);
        }
        logw(j) = lw;
      }
      acc.add_chunk(logw, rstats);
    }
    reps.push_back(acc.mean());
    ess(rep) = acc.ess();
    if (ess(rep) < kEssWarnThreshold) degenerate = true;
  }

  PosteriorSummary out;
  out.K = 1;
  out.d = d;
  out.shared_main = true;
  out.prior = prior;
  out.M = M;
  out.R = R;
  out.seed = rng_seed;
  out.ess = ess;
  out.degenerate = degenerate;
  Vector mean = Vector::Zero(p);
  for (const auto& e : reps) mean += e;
  mean /= R;
  out.gamma_mean = mean.transpose();
  if (R >= 2)
    out.gamma_se = replicate_se(reps).transpose();
  else
    out.gamma_se = Matrix::Zero(1, p);
  out.weight_mean = Vector::Ones(1);
  out.weight_se = Vector::Zero(1);
  return out;
}

// ---------------------------------------------------------------------------

MixtureProposal::MixtureProposal(const std::vector<LocalOptimum>& optima, const BinaryTable& table) {
  std::vector<const LocalOptimum*> good;
  for (const auto& o : optima)
    if (o.converged) good.push_back(&o);
  if (good.empty()) throw std::runtime_error("build_mixture_proposal: no converged local optima");

  const double N = table.total();
  proto_ = good.front()->params;
  K_ = proto_.K;
  dim_ = theta_dim(proto_);

  Vector lvals(good.size());
  for (size_t j = 0; j < good.size(); ++j) lvals(j) = good[j]->value;
  const double lse = log_sum_exp(lvals);

  for (size_t j = 0; j < good.size(); ++j) {
    const LocalOptimum& o = *good[j];
    Mode md;
    md.log_weight = lvals(j) - lse;
    md.dir_alpha = N * o.params.weights + Vector::Ones(K_);
    md.theta_mean = pack_theta(o.params);
    Eigen::LLT<Matrix> llt(o.hessian_theta);
    if (llt.info() != Eigen::Success)
      throw std::domain_error("build_mixture_proposal: optimum Hessian not positive definite");
    const Matrix H_chol = llt.matrixL();
    const Matrix cov = llt.solve(Matrix::Identity(dim_, dim_)) / N;  // Sigma~/N
    md.chol_cov = cholesky_lower(cov);
    md.precision = N * o.hessian_theta;
    double logdet_H = 0.0;
    for (int i = 0; i < dim_; ++i) logdet_H += std::log(H_chol(i, i));
    logdet_H *= 2.0;
    md.log_norm_const = -0.5 * dim_ * std::log(2.0 * M_PI) + 0.5 * logdet_H + 0.5 * dim_ * std::log(N);
    mode_.push_back(std::move(md));
  }
}

MixtureProposal build_mixture_proposal(const std::vector<LocalOptimum>& optima, const BinaryTable& table) {
  return MixtureProposal(optima, table);
}

std::pair<Matrix, Matrix> MixtureProposal::draw(long n, RngEngine& rng) const {
  Matrix W(K_, n), X(dim_, n);
  Vector probs(mode_.size());
  for (size_t j = 0; j < mode_.size(); ++j) probs(j) = std::exp(mode_[j].log_weight);
  std::discrete_distribution<int> pick(probs.data(), probs.data() + probs.size());
  std::normal_distribution<double> normal;
  Vector z(dim_);
  for (long s = 0; s < n; ++s) {
    const Mode& md = mode_[pick(rng)];
    W.col(s) = sample_dirichlet(md.dir_alpha, rng);
    for (int i = 0; i < dim_; ++i) z(i) = normal(rng);
    X.col(s) = md.theta_mean + md.chol_cov * z;
  }
  return {std::move(W), std::move(X)};
}

Vector MixtureProposal::log_density(const Matrix& W, const Matrix& X) const {
  const long n = X.cols();
  Matrix per_mode(mode_.size(), n);
  for (size_t j = 0; j < mode_.size(); ++j) {
    const Mode& md = mode_[j];
    const Matrix D = X.colwise() - md.theta_mean;
    const Eigen::RowVectorXd quad = (D.array() * (md.precision * D).array()).colwise().sum();
    for (long s = 0; s < n; ++s)
      per_mode(j, s) = md.log_weight + md.log_norm_const - 0.5 * quad(s) + dirichlet_log_pdf(W.col(s), md.dir_alpha);
  }
  Vector out(n);
  for (long s = 0; s < n; ++s) out(s) = log_sum_exp(per_mode.col(s));
  return out;
}

double MixtureProposal::log_density(const Vector& w, const Vector& x) const {
  return log_density(Matrix(w), Matrix(x))(0);
}

// ---------------------------------------------------------------------------

PosteriorSummary posterior_mixture(const BinaryTable& table, const PriorConfig& prior, int K,
                                   bool shared_main, int J, long M, int R, std::uint64_t rng_seed) {
  if (M < 1000) throw std::invalid_argument("posterior_mixture: M must be >= 1000");
  if (R < 1) throw std::invalid_argument("posterior_mixture: R must be >= 1");
  prior.validate();

  const std::vector<LocalOptimum> optima = multi_start_mixture(table, prior, K, shared_main, J, rng_seed);
  const MixtureProposal h5(optima, table);

  const int d = table.d, p = num_pairs(d);
  const Matrix A = build_design_matrix(d);
  const double N = table.total();
  const Vector m = table.counts / N;
  const Vector alpha = prior.alpha_or_flat(K);
  const double lam = 1.0 / (N * prior.sigma1 * prior.sigma1);
  const BracketCoeffs bc = bracket_coeffs(prior);
  const MixtureParams& proto = h5.prototype();

  // row ranges of the free-Theta vector per component
  std::vector<std::pair<int, int>> blocks(K);
  for (int k = 0; k < K; ++k) blocks[k] = inter_block(proto, k);

  std::vector<Vector> rep_gamma, rep_w;
  Vector ess(R);
  bool degenerate = false;

  for (int rep = 0; rep < R; ++rep) {
    RngEngine rng = make_stream(rng_seed, static_cast<std::uint64_t>(J + rep));
    IsAccumulator acc(K * p + K);  // gamma stats then weight stats
    for (long done = 0; done < M; done += kChunk) {
      const long n = std::min(kChunk, M - done);
      auto [W, X] = h5.draw(n, rng);

      // log h4 = N l~ + brackets, batched over the chunk
      Matrix logp_mix;  // cells x n, filled via per-component scores
      {
        std::vector<Matrix> S(K);
        for (int k = 0; k < K; ++k) {
          Matrix theta_full(d + p, n);
          theta_full.topRows(d) = proto.shared_main ? X.topRows(d) : X.middleRows(k * (d + p), d);
          theta_full.bottomRows(p) = X.middleRows(blocks[k].first, p);
          S[k] = A.transpose() * theta_full;
          Vector lse(n);
          for (long s = 0; s < n; ++s) lse(s) = log_sum_exp(S[k].col(s));
          S[k].rowwise() -= lse.transpose();  // log p^(k) per cell
        }
        logp_mix = S[0];
        logp_mix.rowwise() += W.row(0).array().log().matrix();
        for (int k = 1; k < K; ++k) {
          const Matrix term = S[k].rowwise() + W.row(k).array().log().matrix();
          // elementwise log-sum-exp of two matrices
          const Matrix hi = logp_mix.cwiseMax(term), lo = logp_mix.cwiseMin(term);
          logp_mix = hi.array() + (lo - hi).array().exp().log1p();
        }
      }

      Vector logw(n);
      Matrix stats(K * p + K, n);
      for (long s = 0; s < n; ++s) {
        double lt = m.dot(logp_mix.col(s));
        for (int k = 0; k < K; ++k)
          if (alpha(k) != 1.0) lt += (alpha(k) - 1.0) * std::log(W(k, s)) / N;
        double sq = X.col(s).squaredNorm();
        if (proto.shared_main) sq += (K - 1) * X.col(s).head(d).squaredNorm();  // mains count K times
        lt -= lam * sq / 2.0;
        double lh4 = N * lt;
        for (int k = 0; k < K; ++k) {
          for (int i = 0; i < p; ++i) {
            const double th = X(blocks[k].first + i, s);
            lh4 += softplus(bc.log_scale + bc.curvature * th * th);
            stats(k * p + i, s) = r_of(th, bc);
          }
          stats(K * p + k, s) = W(k, s);
        }
        logw(s) = lh4;
      }
      logw -= h5.log_density(W, X);
      acc.add_chunk(logw, stats);
    }
    const Vector est = acc.mean();
    rep_gamma.push_back(est.head(K * p));
    rep_w.push_back(est.tail(K));
    ess(rep) = acc.ess();
    if (ess(rep) < kEssWarnThreshold) degenerate = true;
  }
  if (degenerate) {
    bool all_bad = (ess.array() < kEssWarnThreshold).all();
    if (all_bad && R > 1) throw std::runtime_error("posterior_mixture: every replicate degenerate (ESS < 10)");
  }

  PosteriorSummary out;
  out.K = K;
  out.d = d;
  out.shared_main = shared_main;
  out.prior = prior;
  out.M = M;
  out.R = R;
  out.seed = rng_seed;
  out.ess = ess;
  out.degenerate = degenerate;
  Vector gmean = Vector::Zero(K * p), wmean = Vector::Zero(K);
  for (int rep = 0; rep < R; ++rep) {
    gmean += rep_gamma[rep];
    wmean += rep_w[rep];
  }
  gmean /= R;
  wmean /= R;
  out.gamma_mean = Eigen::Map<Matrix>(gmean.data(), p, K).transpose();
  out.weight_mean = wmean;
  if (R >= 2) {
    const Vector gse = replicate_se(rep_gamma);
    out.gamma_se = Eigen::Map<const Matrix>(gse.data(), p, K).transpose();
    out.weight_se = replicate_se(rep_w);
  } else {
    out.gamma_se = Matrix::Zero(K, p);
    out.weight_se = Vector::Zero(K);
  }
  return out;
}

// ---------------------------------------------------------------------------

Vector quadrature_oracle(const BinaryTable& table, const PriorConfig& prior, int points_per_axis) {
  if (table.d > 2) throw std::invalid_argument("quadrature_oracle: supports d <= 2 only");
  prior.validate();
  const int d = table.d;
  if (d == 1) return Vector();  // no interaction coordinates

  const LocalOptimum fit = fit_map_ising(table, prior);
  const Vector center = fit.params.components.front().full();
  const double N = table.total();
  const Matrix cov = fit.hessian_theta.llt().solve(Matrix::Identity(3, 3)) / N;
  const Vector half_width = 8.0 * cov.diagonal().cwiseSqrt();

  const Matrix A = build_design_matrix(2);
  const Vector m = table.counts / N;
  const double lam_slab = 1.0 / (2.0 * prior.sigma1 * prior.sigma1);
  const BracketCoeffs bc = bracket_coeffs(prior);

  auto axis = [&](int i) {
    Vector g(points_per_axis);
    for (int j = 0; j < points_per_axis; ++j)
      g(j) = center(i) - half_width(i) + 2.0 * half_width(i) * j / (points_per_axis - 1);
    return g;
  };
  const Vector g0 = axis(0), g1 = axis(1), g2 = axis(2);

  double max_lh = -std::numeric_limits<double>::infinity();
  Matrix lh(points_per_axis * points_per_axis, points_per_axis);  // (i,j) x k
  for (int i = 0; i < points_per_axis; ++i)
    for (int j = 0; j < points_per_axis; ++j)
      for (int k = 0; k < points_per_axis; ++k) {
        Vector t(3);
        t << g0(i), g1(j), g2(k);
        const Vector s = A.transpose() * t;
        const double lh1 = N * (-log_sum_exp(s) + m.dot(s)) - lam_slab * t.squaredNorm() +
                           softplus(bc.log_scale + bc.curvature * t(2) * t(2));
        lh(i * points_per_axis + j, k) = lh1;
        max_lh = std::max(max_lh, lh1);
      }

  double num = 0.0, den = 0.0;
  for (int i = 0; i < points_per_axis; ++i)
    for (int j = 0; j < points_per_axis; ++j)
      for (int k = 0; k < points_per_axis; ++k) {
        const double w = std::exp(lh(i * points_per_axis + j, k) - max_lh);
        num += r_of(g2(k), bc) * w;
        den += w;
      }
  Vector out(1);
  out(0) = num / den;
  return out;
}

}  // namespace isingmix
