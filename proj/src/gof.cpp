#include "isingmix/gof.hpp"

#include <unsupported/Eigen/SpecialFunctions>

#include <cmath>

namespace isingmix {

double chi_square_upper_tail(double x, double df) {
  if (!(df > 0)) throw std::invalid_argument("chi_square_upper_tail: df must be positive");
  if (x <= 0) return 1.0;
  if (!std::isfinite(x)) return 0.0;
  return Eigen::numext::igammac(df / 2.0, x / 2.0);
}

GofResult gof_test(const BinaryTable& table, const LocalOptimum& fitted) {
  if (fitted.params.d() != table.d) throw std::invalid_argument("gof_test: dimension mismatch");
  const double N = table.total();
  const Vector e = N * mixture_cell_probabilities(fitted.params);

  GofResult out;
  for (long i = 0; i < e.size(); ++i) {
    const double n = table.counts(i);
    if (n > 0) {
      if (e(i) <= 0) {
        out.infinite = true;
        continue;
      }
      out.deviance += 2.0 * n * std::log(n / e(i));
    }
    if (e(i) > 0) out.pearson += (n - e(i)) * (n - e(i)) / e(i);
  }
  const MixtureParams& p = fitted.params;
  out.df_saturated = static_cast<int>(num_cells(table.d)) - 1;
  out.df_model = out.df_saturated - parameter_count(table.d, p.K, p.shared_main);
  if (out.infinite) {
    out.deviance = std::numeric_limits<double>::infinity();
    out.pearson = std::numeric_limits<double>::infinity();
  }
  out.p_deviance_model = chi_square_upper_tail(out.deviance, out.df_model);
  out.p_pearson_model = chi_square_upper_tail(out.pearson, out.df_model);
  out.p_value = chi_square_upper_tail(out.pearson, out.df_saturated);
  return out;
}

LrtResult lrt_test(const BinaryTable& table, const LocalOptimum& null_fit, const LocalOptimum& alt_fit) {
  const MixtureParams& p0 = null_fit.params;
  const MixtureParams& p1 = alt_fit.params;
  if (p0.d() != table.d || p1.d() != table.d) throw std::invalid_argument("lrt_test: dimension mismatch");
  const int k0 = parameter_count(table.d, p0.K, p0.shared_main);
  const int k1 = parameter_count(table.d, p1.K, p1.shared_main);
  if (k1 <= k0) throw std::invalid_argument("lrt_test: alternative must have more parameters than the null");

  LrtResult out;
  out.statistic = 2.0 * table.total() * (alt_fit.value - null_fit.value);
  out.df = k1 - k0;
  out.negative = out.statistic < 0;
  out.p_value = chi_square_upper_tail(std::max(0.0, out.statistic), out.df);
  return out;
}

}  // namespace isingmix
