#pragma once

#include <cstddef>
#include <vector>

#include "levylab/rng.hpp"

namespace levylab {

// Kahan compensated summation; reduction order must not leak into reported
// estimates beyond 1e-12.
class KahanSum {
public:
    void add(double x) {
        const double y = x - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct MeanStderr {
    double mean = 0.0;
    double stderror = 0.0;
    std::size_t n = 0;
};

MeanStderr mean_stderr(const std::vector<double>& xs);

// Regularised lower incomplete gamma P(a,x).
double gamma_p(double a, double x);

// Chi-square CDF and quantile (bisection on gamma_p).
double chi2_cdf(double x, double dof);
double chi2_quantile(double prob, double dof);

// E|Z|^p for Z standard normal: 2^{p/2} Gamma((p+1)/2) / sqrt(pi).
double gaussian_abs_moment(double p);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double ci_lo = 0.0;   // bootstrap 95% CI for the slope
    double ci_hi = 0.0;
};

// OLS slope of y against x with pairs-bootstrap 95% CI.
SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y,
                   RngStream rng, std::size_t n_boot = 1000);

// Chi-square goodness-of-fit for observed counts vs expected counts.
// Bins with expected mass below min_expected are merged into the last bin
// by the caller. Returns the p-value.
double chi2_gof_pvalue(const std::vector<double>& observed,
                       const std::vector<double>& expected);

struct EnergyTestResult {
    double statistic = 0.0;
    double p_value = 0.0;
    bool pass = false; // not rejected at the given level
};

// Two-sample energy-distance test. Uses an incomplete U-statistic over
// n_pairs sampled index pairs so the permutation calibration stays cheap at
// sample sizes of 1e4; both the observed statistic and the permutation
// replicates use the same pair design.
EnergyTestResult energy_distance_test(const std::vector<std::vector<double>>& xs,
                                      const std::vector<std::vector<double>>& ys,
                                      double level, RngStream rng,
                                      std::size_t n_pairs = 1'000'000,
                                      std::size_t n_perm = 999);

} // namespace levylab
