#ifndef SEMPLACE_STATS_HPP
#define SEMPLACE_STATS_HPP

#include <cstddef>
#include <functional>
#include <vector>

namespace semplace {

double mean(const std::vector<double>& xs);
double sample_stddev(const std::vector<double>& xs);

/// Pearson correlation coefficient. Throws std::invalid_argument on size
/// mismatch, fewer than 3 pairs, or zero variance in either series.
double pearson_r(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sided p-value of r under the null of no correlation, via the exact
/// Student-t CDF with n-2 degrees of freedom.
double pearson_p_two_sided(double r, std::size_t n);

/// Regularized incomplete beta function I_x(a, b), continued-fraction form.
double incomplete_beta(double a, double b, double x);

/// CDF of the t distribution with nu degrees of freedom.
double student_t_cdf(double t, double nu);

double normal_cdf(double x, double mu = 0.0, double sigma = 1.0);

/// Kolmogorov-Smirnov statistic of a sample against a CDF. Sorts a copy.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Asymptotic critical KS value at the given significance.
double ks_critical(std::size_t n, double alpha);

}  // namespace semplace

#endif  // SEMPLACE_STATS_HPP
