#include "isingmix/optimize.hpp"

#include "isingmix/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace isingmix {

namespace {

constexpr double kIsingGradTol = 1e-8;
constexpr double kMixtureGradTol = 1e-6;
constexpr double kMleTrustBound = 30.0;
constexpr int kIsingMaxIter = 200;
constexpr int kMixtureMaxIter = 2000;

bool hessian_is_pd(const Matrix& neg_hess, double min_eig = 1e-10) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(neg_hess, Eigen::EigenvaluesOnly);
  return es.info() == Eigen::Success && es.eigenvalues().minCoeff() > min_eig;
}

// Newton ascent of l~ for one Ising component. lam = 1/(N sigma1^2); lam = 0
// gives the plain MLE with the trust bound active.
struct NewtonResult {
  Vector theta;
  double value = 0.0;
  Matrix neg_hessian;
  bool converged = false;
  int iterations = 0;
  bool bound_hit = false;
};

NewtonResult newton_ising(const Matrix& A, const BinaryTable& table, double lam, bool bounded) {
  const double N = table.total();
  const Vector m = table.counts / N;
  const long q = A.rows();
  Vector theta = Vector::Zero(q);

  auto objective = [&](const Vector& t) {
    const Vector s = A.transpose() * t;
    return -log_sum_exp(s) + m.dot(s) - lam * t.squaredNorm() / 2.0;
  };

  NewtonResult res;
  double f = objective(theta);
  for (int it = 0; it < kIsingMaxIter; ++it) {
    res.iterations = it + 1;
    const Vector p = log_cell_probabilities(A, theta).array().exp();
    const Vector grad = A * (m - p) - lam * theta;
    if (grad.lpNorm<Eigen::Infinity>() < kIsingGradTol) {
      res.converged = true;
      res.iterations = it;
      break;
    }
    Matrix H = A * p.asDiagonal() * A.transpose();
    const Vector mu = A * p;
    H -= mu * mu.transpose();
    H.diagonal().array() += lam + 1e-12;
    Vector step = H.llt().solve(grad);
    // backtracking Armijo
    double t = 1.0;
    const double slope = grad.dot(step);
    for (int ls = 0; ls < 60; ++ls) {
      const double f_new = objective(theta + t * step);
      if (f_new >= f + 1e-4 * t * slope) {
        theta += t * step;
        f = f_new;
        break;
      }
      t *= 0.5;
    }
    if (bounded && theta.lpNorm<Eigen::Infinity>() > kMleTrustBound) {
      theta = theta.cwiseMax(-kMleTrustBound).cwiseMin(kMleTrustBound);
      f = objective(theta);
      res.bound_hit = true;
    }
  }
  res.theta = theta;
  res.value = f;
  const Vector p = log_cell_probabilities(A, theta).array().exp();
  Matrix H = A * p.asDiagonal() * A.transpose();
  const Vector mu = A * p;
  H -= mu * mu.transpose();
  H.diagonal().array() += lam;
  res.neg_hessian = H;
  return res;
}

// ---- BFGS on the reparameterized mixture objective --------------------------

// Joint coordinates v = [z; x]: z in R^{K-1} are logits with z_K = 0 so
// w = softmax([z;0]); x are the free-Theta coordinates.
struct MixtureObjective {
  const Matrix& A;
  const BinaryTable& table;
  const PriorConfig& prior;
  MixtureParams proto;  // carries K, d, shared_main

  int K() const { return proto.K; }
  int dim() const { return K() - 1 + theta_dim(proto); }

  Vector weights_from_logits(const Vector& z) const {
    Vector e(K());
    const double mx = std::max(0.0, z.size() ? z.maxCoeff() : 0.0);
    for (int k = 0; k < K() - 1; ++k) e(k) = std::exp(z(k) - mx);
    e(K() - 1) = std::exp(-mx);
    return e / e.sum();
  }

  MixtureParams params_at(const Vector& v) const {
    MixtureParams p = with_theta(proto, v.tail(theta_dim(proto)));
    p.weights = weights_from_logits(v.head(K() - 1));
    return p;
  }

  double value(const Vector& v) const {
    return regularized_log_likelihood_mixture(params_at(v), table, prior);
  }

  Vector gradient(const Vector& v) const {
    const MixtureParams p = params_at(v);
    const MixtureGradient g = mixture_gradient(p, table, prior, A);
    Vector out(dim());
    // chain rule through softmax: d/dz_j = w_j (g_j - sum_k w_k g_k)
    const double gbar = p.weights.dot(g.weights);
    for (int j = 0; j < K() - 1; ++j) out(j) = p.weights(j) * (g.weights(j) - gbar);
    out.tail(theta_dim(proto)) = g.theta;
    return out;
  }
};

Vector logits_from_weights(const Vector& w) {
  Vector z(w.size() - 1);
  for (long k = 0; k + 1 < w.size(); ++k) z(k) = std::log(w(k)) - std::log(w(w.size() - 1));
  return z;
}

// Standard BFGS (inverse-Hessian form) with a bisecting weak-Wolfe line
// search. Maximizes obj; returns iterations used and the final gradient.
struct BfgsResult {
  Vector v;
  double f = 0.0;
  Vector grad;
  int iterations = 0;
  bool converged = false;
};

BfgsResult bfgs_maximize(const MixtureObjective& obj, const Vector& v0, int max_iter, double grad_tol) {
  BfgsResult res;
  const int n = static_cast<int>(v0.size());
  Vector v = v0;
  double f = obj.value(v);
  Vector g = obj.gradient(v);
  Matrix Hinv = Matrix::Identity(n, n);

  int it = 0;
  for (; it < max_iter; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < grad_tol) {
      res.converged = true;
      break;
    }
    Vector dir = Hinv * g;  // ascent direction
    double slope = g.dot(dir);
    if (!(slope > 0) || !dir.allFinite()) {  // reset on loss of curvature
      Hinv.setIdentity();
      dir = g;
      slope = g.dot(dir);
      if (!(slope > 0)) break;
    }

    // weak Wolfe by bisection: f(v+t d) >= f + c1 t slope, g(v+t d).d <= ? for
    // ascent use curvature |g_new.d| <= c2 slope on the low side
    const double c1 = 1e-4, c2 = 0.9;
    double lo = 0.0, hi = std::numeric_limits<double>::infinity(), t = 1.0;
    Vector v_new, g_new;
    double f_new = f;
    for (int ls = 0; ls < 60; ++ls) {
      v_new = v + t * dir;
      f_new = obj.value(v_new);
      if (!(f_new >= f + c1 * t * slope)) {
        hi = t;
        t = 0.5 * (lo + hi);
        continue;
      }
      g_new = obj.gradient(v_new);
      if (g_new.dot(dir) > c2 * slope) {
        lo = t;
        t = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * t;
        continue;
      }
      break;
    }
    if (g_new.size() == 0) g_new = obj.gradient(v_new);
    if (!(f_new > f - 1e-15) || !v_new.allFinite()) break;  // line search failed

    const Vector s = v_new - v;
    const Vector y = g - g_new;  // gradient of -f increases along ascent
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const Vector Hy = Hinv * y;
      const double yHy = y.dot(Hy);
      Hinv += ((sy + yHy) / (sy * sy)) * (s * s.transpose());
      const Matrix cross = (Hy * s.transpose()) / sy;
      Hinv -= cross + cross.transpose();
    }
    v = v_new;
    f = f_new;
    g = g_new;
  }
  res.v = v;
  res.f = f;
  res.grad = g;
  res.iterations = it;
  return res;
}

bool alpha_exchangeable(const PriorConfig& prior, int K) {
  const Vector a = prior.alpha_or_flat(K);
  return (a.array() == a(0)).all();
}

// Newton polish from a BFGS-converged point: a few damped Newton steps with a
// finite-difference Hessian of the analytic gradient drive the gradient from
// ~1e-6 to near machine precision.
Vector newton_polish(const MixtureObjective& obj, Vector v, int max_iter = 8) {
  const int n = static_cast<int>(v.size());
  double f = obj.value(v);
  for (int it = 0; it < max_iter; ++it) {
    const Vector g = obj.gradient(v);
    if (g.lpNorm<Eigen::Infinity>() < 1e-11) break;
    Matrix H(n, n);
    const double h = 1e-6;
    for (int i = 0; i < n; ++i) {
      Vector vp = v, vm = v;
      vp(i) += h;
      vm(i) -= h;
      H.col(i) = (obj.gradient(vp) - obj.gradient(vm)) / (2 * h);
    }
    H = 0.5 * (H + H.transpose());
    Eigen::LLT<Matrix> llt(-H);
    if (llt.info() != Eigen::Success) break;  // not in a strict-max basin
    const Vector step = llt.solve(g);
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 30; ++ls) {
      const Vector v_new = v + t * step;
      const double f_new = obj.value(v_new);
      if (f_new >= f) {
        v = v_new;
        f = f_new;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  return v;
}

}  // namespace

void canonicalize(MixtureParams& params) {
  std::vector<int> order(params.K);
  std::iota(order.begin(), order.end(), 0);
  auto inter_less = [&](int a, int b) {
    const Vector &ia = params.components[a].inter, &ib = params.components[b].inter;
    for (long j = 0; j < ia.size(); ++j)
      if (ia(j) != ib(j)) return ia(j) < ib(j);
    return false;
  };
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (params.weights(a) != params.weights(b)) return params.weights(a) > params.weights(b);
    return inter_less(a, b);
  });
  Vector w(params.K);
  std::vector<IsingParams> comps;
  comps.reserve(params.K);
  for (int k = 0; k < params.K; ++k) {
    w(k) = params.weights(order[k]);
    comps.push_back(params.components[order[k]]);
  }
  params.weights = std::move(w);
  params.components = std::move(comps);
}

LocalOptimum fit_map_ising(const BinaryTable& table, const PriorConfig& prior) {
  table.validate();
  prior.validate();
  const Matrix A = build_design_matrix(table.d);
  const double lam = 1.0 / (table.total() * prior.sigma1 * prior.sigma1);
  NewtonResult nr = newton_ising(A, table, lam, false);
  if (!nr.converged) throw std::runtime_error("fit_map_ising: Newton failed to converge (numerical pathology)");
  LocalOptimum out;
  out.params = MixtureParams::single(IsingParams::from_full(table.d, nr.theta));
  out.value = nr.value;
  out.hessian_theta = nr.neg_hessian;
  out.iterations = nr.iterations;
  out.converged = hessian_is_pd(out.hessian_theta);
  return out;
}

LocalOptimum fit_local_mixture(const BinaryTable& table, const PriorConfig& prior, int K,
                               bool shared_main, const MixtureParams& start) {
  table.validate();
  prior.validate();
  if (start.K != K || start.d() != table.d)
    throw std::invalid_argument("fit_local_mixture: start does not match K/d");
  if ((start.weights.array() <= 0).any() || (K > 1 && (start.weights.array() >= 1).any()))
    throw std::domain_error("fit_local_mixture: start weights must be in the open simplex");

  const Matrix A = build_design_matrix(table.d);
  MixtureParams proto = start;
  proto.shared_main = shared_main;
  if (shared_main) {
    // project the start onto the shared-main manifold
    Vector mean_main = Vector::Zero(table.d);
    for (const auto& c : proto.components) mean_main += c.main;
    mean_main /= K;
    for (auto& c : proto.components) c.main = mean_main;
  }
  MixtureObjective obj{A, table, prior, proto};

  Vector v0(obj.dim());
  v0.head(K - 1) = logits_from_weights(proto.weights);
  v0.tail(theta_dim(proto)) = pack_theta(proto);
  BfgsResult br = bfgs_maximize(obj, v0, kMixtureMaxIter, kMixtureGradTol);
  const Vector v = newton_polish(obj, br.v);

  LocalOptimum out;
  out.params = obj.params_at(v);
  if (alpha_exchangeable(prior, K)) canonicalize(out.params);
  out.value = regularized_log_likelihood_mixture(out.params, table, prior);
  out.iterations = br.iterations;
  out.hessian_theta = -hessian_mixture_theta(out.params, table, prior);
  const bool grad_ok = obj.gradient(v).lpNorm<Eigen::Infinity>() <= kMixtureGradTol;
  out.converged = (br.converged || grad_ok) && hessian_is_pd(out.hessian_theta);
  return out;
}

std::vector<LocalOptimum> multi_start_mixture(const BinaryTable& table, const PriorConfig& prior,
                                              int K, bool shared_main, int J, std::uint64_t rng_seed) {
  if (J < 1) throw std::invalid_argument("multi_start_mixture: J must be >= 1");
  const int d = table.d, p = num_pairs(d);
  std::vector<LocalOptimum> out;
  out.reserve(J);
  for (int j = 0; j < J; ++j) {
    RngEngine rng = make_stream(rng_seed, static_cast<std::uint64_t>(j));
    MixtureParams start;
    start.K = K;
    start.shared_main = shared_main;
    start.weights = sample_dirichlet(Vector::Ones(K), rng);
    std::normal_distribution<double> normal(0.0, prior.sigma1);
    Vector main(d);
    for (int v = 0; v < d; ++v) main(v) = normal(rng);
    for (int k = 0; k < K; ++k) {
      IsingParams c(d);
      c.main = shared_main ? main : [&] {
        Vector mv(d);
        for (int v = 0; v < d; ++v) mv(v) = normal(rng);
        return mv;
      }();
      for (int i = 0; i < p; ++i) c.inter(i) = normal(rng);
      start.components.push_back(std::move(c));
    }
    out.push_back(fit_local_mixture(table, prior, K, shared_main, start));
  }
  if (std::none_of(out.begin(), out.end(), [](const LocalOptimum& o) { return o.converged; }))
    throw std::runtime_error("multi_start_mixture: every start failed to converge");
  return out;
}

int parameter_count(int d, int K, bool shared_main) {
  const int p = num_pairs(d);
  return (shared_main ? d + K * p : K * (d + p)) + (K - 1);
}

LocalOptimum fit_mle(const BinaryTable& table, const ModelSpec& model) {
  table.validate();
  const Matrix A = build_design_matrix(table.d);

  if (model.K == 1) {
    NewtonResult nr = newton_ising(A, table, 0.0, true);
    LocalOptimum out;
    out.params = MixtureParams::single(IsingParams::from_full(table.d, nr.theta));
    out.value = nr.value;
    out.hessian_theta = nr.neg_hessian;
    out.iterations = nr.iterations;
    out.trust_bound_hit = nr.bound_hit;
    out.converged = nr.converged && !nr.bound_hit && hessian_is_pd(out.hessian_theta);
    return out;
  }

  // Mixture MLE: portfolio of starts, each refined in two stages (a unit-slab
  // ridge to reach a basin, then an essentially flat prior). Plain l is the
  // reported value.
  const int d = table.d, p = num_pairs(d), K = model.K;
  PriorConfig ridge;  // sigma0 only matters for validation here
  ridge.sigma0 = 0.5;
  ridge.sigma1 = 1.0;
  PriorConfig flat;
  flat.sigma0 = 0.5;
  flat.sigma1 = 1e6;

  const LocalOptimum ising = fit_mle(table, ModelSpec{1, true});
  const IsingParams& base = ising.params.components.front();

  std::vector<MixtureParams> starts;
  {  // split of the single-Ising fit: interactions nudged apart
    MixtureParams s;
    s.K = K;
    s.shared_main = model.shared_main;
    s.weights = Vector::Constant(K, 1.0 / K);
    for (int k = 0; k < K; ++k) {
      IsingParams c = base;
      c.inter.array() += 0.2 * (k - (K - 1) / 2.0);
      s.components.push_back(std::move(c));
    }
    starts.push_back(std::move(s));
  }
  if (K == 2) {  // activity split: low- vs high-count-of-ones cells
    const long n_cells = num_cells(d);
    Vector lo = Vector::Zero(n_cells), hi = Vector::Zero(n_cells);
    for (long c = 0; c < n_cells; ++c) {
      int act = 0;
      for (int v = 0; v < d; ++v) act += cell_bit(c, v, d);
      (act <= d / 2 ? lo : hi)(c) = table.counts(c);
    }
    if (lo.sum() > 0 && hi.sum() > 0) {
      MixtureParams s;
      s.K = 2;
      s.shared_main = model.shared_main;
      const double wl = lo.sum() / table.total();
      s.weights = Vector(2);
      s.weights << wl, 1.0 - wl;
      lo.array() += 1e-3;  // keep margins interior
      hi.array() += 1e-3;
      NewtonResult f_lo = newton_ising(A, BinaryTable(d, lo), 1.0 / table.total(), true);
      NewtonResult f_hi = newton_ising(A, BinaryTable(d, hi), 1.0 / table.total(), true);
      s.components.push_back(IsingParams::from_full(d, f_lo.theta));
      s.components.push_back(IsingParams::from_full(d, f_hi.theta));
      starts.push_back(std::move(s));
    }
  }
  const int kPortfolio = 20;
  RngEngine rng = make_stream(0x4d4c45u /* "MLE" */, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  while (static_cast<int>(starts.size()) < kPortfolio) {
    MixtureParams s;
    s.K = K;
    s.shared_main = model.shared_main;
    s.weights = sample_dirichlet(Vector::Ones(K), rng);
    Vector main(d);
    for (int v = 0; v < d; ++v) main(v) = normal(rng);
    for (int k = 0; k < K; ++k) {
      IsingParams c(d);
      c.main = main;
      if (!model.shared_main)
        for (int v = 0; v < d; ++v) c.main(v) = normal(rng);
      for (int i = 0; i < p; ++i) c.inter(i) = normal(rng);
      s.components.push_back(std::move(c));
    }
    starts.push_back(std::move(s));
  }

  LocalOptimum best;
  bool have = false;
  for (const auto& s : starts) {
    LocalOptimum stage1 = fit_local_mixture(table, ridge, K, model.shared_main, s);
    LocalOptimum stage2 = fit_local_mixture(table, flat, K, model.shared_main, stage1.params);
    const double ll = log_likelihood_mixture(stage2.params, table);
    if (!have || ll > best.value) {
      best = stage2;
      best.value = ll;
      have = true;
    }
  }
  if (!have) throw std::runtime_error("fit_mle: no mixture start produced a usable optimum");

  double max_abs = 0.0;
  for (const auto& c : best.params.components)
    max_abs = std::max(max_abs, c.full().lpNorm<Eigen::Infinity>());
  if (max_abs > kMleTrustBound) {
    best.trust_bound_hit = true;
    for (auto& c : best.params.components) {
      c.main = c.main.cwiseMax(-kMleTrustBound).cwiseMin(kMleTrustBound);
      c.inter = c.inter.cwiseMax(-kMleTrustBound).cwiseMin(kMleTrustBound);
    }
    best.value = log_likelihood_mixture(best.params, table);
  }
  return best;
}

}  // namespace isingmix
