#pragma once

#include "isingmix/optimize.hpp"

namespace isingmix {

/// Upper-tail chi-square probability P(X > x) with df degrees of freedom.
double chi_square_upper_tail(double x, double df);

/// Goodness of fit against the saturated multinomial. Both classical
/// statistics are computed from the fitted expected counts e = N p_hat:
///   deviance G2 = 2 sum n_i log(n_i / e_i)   (0 log 0 = 0)
///   pearson  X2 = sum (n_i - e_i)^2 / e_i
/// Two df conventions are carried: df_model = 2^d - 1 - #free parameters and
/// df_saturated = 2^d - 1. The headline p_value is the Pearson statistic
/// against df_saturated, which reproduces the published reference values;
/// the deviance/df_model combination is reported alongside.
struct GofResult {
  double deviance = 0.0;
  double pearson = 0.0;
  int df_model = 0;
  int df_saturated = 0;
  double p_deviance_model = 1.0;
  double p_pearson_model = 1.0;
  double p_value = 1.0;  // Pearson at df_saturated
  bool infinite = false; // an observed cell carries zero fitted mass
};

GofResult gof_test(const BinaryTable& table, const LocalOptimum& fitted);

/// Likelihood ratio test of nested MLE fits: 2N (l_alt - l_null) against
/// chi-square with df = parameter-count difference. A negative statistic is
/// flagged (optimization failure), not clamped.
struct LrtResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  bool negative = false;
};

LrtResult lrt_test(const BinaryTable& table, const LocalOptimum& null_fit, const LocalOptimum& alt_fit);

}  // namespace isingmix
