#pragma once

#include <cstddef>
#include <vector>

namespace pucl {

// Upper regularized incomplete gamma Q(a, x), for chi-square tail areas.
double gamma_q(double a, double x);

// Survival function of a chi-square with k degrees of freedom.
double chi2_sf(double x, int dof);

// Pearson goodness-of-fit p-value for observed counts against expected
// probabilities. Bins with expected count below min_expected are pooled into
// their right neighbor.
double chi2_gof_pvalue(const std::vector<std::size_t>& observed,
                       const std::vector<double>& expected_probs,
                       double min_expected = 5.0);

// One-sided exact sign-test p-value: P(X >= wins) for X ~ Binomial(trials, 1/2).
double sign_test_pvalue(int wins, int trials);

double mean(const std::vector<double>& xs);
double sample_stddev(const std::vector<double>& xs);

}  // namespace pucl
