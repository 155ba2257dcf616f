#ifndef SAGTWIN_STATS_HPP
#define SAGTWIN_STATS_HPP

#include <span>
#include <vector>

#include "sagtwin/types.hpp"

namespace sagtwin::stats {

double mean(std::span<const double> x);
double variance(std::span<const double> x);  // unbiased, n-1 denominator
double lag1_autocorrelation(std::span<const double> x);

/// Least-squares linear trend over x = 0..n-1, in units per step.
double slope(std::span<const double> values);

/// Summary of a two-sided test. p_value in [0,1]; reject = (p_value < alpha)
/// decided by the caller.
struct TestResult {
    double statistic;
    double p_value;
};

/// Welch two-sample t-test on means (summary-statistics form).
TestResult welch_t_test(double mean1, double var1, std::size_t n1,
                        double mean2, double var2, std::size_t n2);

/// F-test on variance ratio, two-sided.
TestResult f_test(double var1, std::size_t n1, double var2, std::size_t n2);

/// Two-sample Kolmogorov-Smirnov test, asymptotic p-value.
TestResult ks_test(std::span<const double> sample1, std::span<const double> sample2);

/// Fisher-z test on the difference of two lag-1 autocorrelations.
TestResult fisher_z_test(double r1, std::size_t n1, double r2, std::size_t n2);

/// One-sample KS test against N(mu, sigma^2).
TestResult ks_normality_test(std::span<const double> sample, double mu, double sigma);

double normal_cdf(double z);

/// Survival function of the Kolmogorov distribution, Q(lambda) = P(K > lambda).
double kolmogorov_q(double lambda);

}  // namespace sagtwin::stats

#endif  // SAGTWIN_STATS_HPP
