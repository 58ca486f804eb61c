#ifndef MLLTR_STATS_HPP_
#define MLLTR_STATS_HPP_

#include <cstddef>
#include <vector>

namespace mlltr {

/*! \brief Regularized incomplete beta function I_x(a, b). */
double incomplete_beta(double a, double b, double x);

/*! \brief CDF of Student's t distribution with `dof` degrees of freedom. */
double student_t_cdf(double t, double dof);

struct TTestResult {
  double t_statistic = 0.0;
  double p_value = 1.0;
};

/*!
 * \brief Two-sided paired t-test on index-paired samples (n >= 2).
 *
 * Zero variance of the differences degenerates: p = 1 when all differences
 * are 0, otherwise p = 0 with a warning.
 */
TTestResult paired_t_test(const std::vector<double>& sample_a,
                          const std::vector<double>& sample_b);

}  // namespace mlltr

#endif  // MLLTR_STATS_HPP_
