#pragma once

#include <cstddef>
#include <vector>

namespace qbme {

/// Upper regularized incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
double regularized_gamma_q(double a, double x);

/// One-sample Kolmogorov-Smirnov statistic against Exp(rate).
double ks_statistic_exponential(std::vector<double> samples, double rate);

/// Asymptotic two-sided KS p-value for statistic d over n samples.
double ks_p_value(double d, size_t n);

/// Pearson chi-square statistic; zero-expectation cells must have zero counts.
double chi2_statistic(const std::vector<double>& observed,
                      const std::vector<double>& expected);

double chi2_p_value(double chi2, size_t dof);

/// Total variation distance between two (sub-)distributions of equal length.
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace qbme
