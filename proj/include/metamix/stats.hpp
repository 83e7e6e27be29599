#pragma once

#include <functional>
#include <vector>

namespace metamix {

/// Regularized incomplete beta function I_x(a, b) — the Beta(a, b) CDF.
double beta_cdf(double x, double a, double b);

double beta_mean(double a, double b);
double beta_variance(double a, double b);

/// Regularized lower incomplete gamma P(s, x).
double gamma_p(double s, double x);

/// Survival function of the chi-square distribution with df degrees of freedom.
double chi2_sf(double x, int df);

/// Pearson chi-square p-value for observed counts against uniform expectation.
double chi2_uniform_pvalue(const std::vector<long>& counts);

/// Two-sided Kolmogorov–Smirnov distance between the empirical CDF of the
/// samples and an analytic CDF. Sorts a copy of the samples.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
    long n = 0;
};

MeanStderr mean_stderr(const std::vector<double>& xs);

double median(std::vector<double> xs);  // lower median for even counts

}  // namespace metamix
