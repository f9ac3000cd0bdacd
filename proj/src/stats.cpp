#include "levylab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace levylab {

MeanStderr mean_stderr(const std::vector<double>& xs) {
    MeanStderr out;
    out.n = xs.size();
    if (xs.empty()) return out;
    KahanSum s;
    for (double x : xs) s.add(x);
    out.mean = s.value() / static_cast<double>(xs.size());
    if (xs.size() < 2) return out;
    KahanSum sq;
    for (double x : xs) {
        const double d = x - out.mean;
        sq.add(d * d);
    }
    const double var = sq.value() / static_cast<double>(xs.size() - 1);
    out.stderror = std::sqrt(var / static_cast<double>(xs.size()));
    return out;
}

namespace {

double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

} // namespace

double gamma_p(double a, double x) {
    if (a <= 0.0) throw std::domain_error("gamma_p: a <= 0");
    if (x < 0.0) throw std::domain_error("gamma_p: x < 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_contfrac(a, x);
}

double chi2_cdf(double x, double dof) {
    if (x <= 0.0) return 0.0;
    return gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_quantile(double prob, double dof) {
    if (prob <= 0.0 || prob >= 1.0)
        throw std::domain_error("chi2_quantile: prob outside (0,1)");
    double lo = 0.0, hi = dof + 100.0 * std::sqrt(2.0 * dof) + 100.0;
    while (chi2_cdf(hi, dof) < prob) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (chi2_cdf(mid, dof) < prob)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double gaussian_abs_moment(double p) {
    if (p <= -1.0) throw std::domain_error("gaussian_abs_moment: p <= -1");
    return std::pow(2.0, 0.5 * p) * std::tgamma(0.5 * (p + 1.0)) /
           std::sqrt(M_PI);
}

namespace {

double ols_slope(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<std::size_t>& idx, double* intercept) {
    const double n = static_cast<double>(idx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i : idx) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) {
        if (intercept) *intercept = sy / n;
        return 0.0;
    }
    const double slope = (n * sxy - sx * sy) / denom;
    if (intercept) *intercept = (sy - slope * sx) / n;
    return slope;
}

} // namespace

SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y,
                   RngStream rng, std::size_t n_boot) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::domain_error("fit_slope: need >= 2 equal-length points");
    SlopeFit fit;
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    fit.slope = ols_slope(x, y, idx, &fit.intercept);

    std::vector<double> boots;
    boots.reserve(n_boot);
    std::vector<std::size_t> resample(x.size());
    for (std::size_t b = 0; b < n_boot; ++b) {
        for (auto& r : resample)
            r = static_cast<std::size_t>(rng.next_u64() % x.size());
        // degenerate resamples (all one point) contribute slope 0
        boots.push_back(ols_slope(x, y, resample, nullptr));
    }
    std::sort(boots.begin(), boots.end());
    const auto q = [&](double p) {
        const double pos = p * static_cast<double>(boots.size() - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, boots.size() - 1);
        const double f = pos - static_cast<double>(lo);
        return (1.0 - f) * boots[lo] + f * boots[hi];
    };
    fit.ci_lo = q(0.025);
    fit.ci_hi = q(0.975);
    return fit;
}

double chi2_gof_pvalue(const std::vector<double>& observed,
                       const std::vector<double>& expected) {
    if (observed.size() != expected.size() || observed.size() < 2)
        throw std::domain_error("chi2_gof_pvalue: bad bin vectors");
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] <= 0.0)
            throw std::domain_error("chi2_gof_pvalue: nonpositive expected bin");
        const double d = observed[i] - expected[i];
        stat += d * d / expected[i];
    }
    const double dof = static_cast<double>(observed.size() - 1);
    return 1.0 - chi2_cdf(stat, dof);
}

EnergyTestResult energy_distance_test(const std::vector<std::vector<double>>& xs,
                                      const std::vector<std::vector<double>>& ys,
                                      double level, RngStream rng,
                                      std::size_t n_pairs, std::size_t n_perm) {
    const std::size_t n = xs.size(), m = ys.size(), total = n + m;
    if (n < 2 || m < 2) throw std::domain_error("energy_distance_test: too few samples");

    const auto point = [&](std::size_t i) -> const std::vector<double>& {
        return i < n ? xs[i] : ys[i - n];
    };

    // fixed pair design shared by the observed statistic and all permutations
    std::vector<std::uint32_t> pi(n_pairs), pj(n_pairs);
    std::vector<double> dist(n_pairs);
    for (std::size_t k = 0; k < n_pairs; ++k) {
        std::uint32_t a = static_cast<std::uint32_t>(rng.next_u64() % total);
        std::uint32_t b = static_cast<std::uint32_t>(rng.next_u64() % total);
        while (b == a) b = static_cast<std::uint32_t>(rng.next_u64() % total);
        pi[k] = a;
        pj[k] = b;
        const auto& u = point(a);
        const auto& v = point(b);
        double s = 0.0;
        for (std::size_t c = 0; c < u.size(); ++c) {
            const double d = u[c] - v[c];
            s += d * d;
        }
        dist[k] = std::sqrt(s);
    }

    std::vector<std::uint8_t> label(total);
    const auto statistic = [&]() {
        double sum_xy = 0, sum_xx = 0, sum_yy = 0;
        std::size_t c_xy = 0, c_xx = 0, c_yy = 0;
        for (std::size_t k = 0; k < n_pairs; ++k) {
            const int la = label[pi[k]], lb = label[pj[k]];
            if (la != lb) {
                sum_xy += dist[k];
                ++c_xy;
            } else if (la == 0) {
                sum_xx += dist[k];
                ++c_xx;
            } else {
                sum_yy += dist[k];
                ++c_yy;
            }
        }
        if (c_xy == 0 || c_xx == 0 || c_yy == 0) return 0.0;
        return 2.0 * sum_xy / c_xy - sum_xx / c_xx - sum_yy / c_yy;
    };

    for (std::size_t i = 0; i < total; ++i) label[i] = i >= n;
    EnergyTestResult result;
    result.statistic = statistic();

    std::size_t ge = 0;
    std::vector<std::uint32_t> order(total);
    std::iota(order.begin(), order.end(), std::uint32_t{0});
    for (std::size_t b = 0; b < n_perm; ++b) {
        for (std::size_t i = total - 1; i > 0; --i) {
            const std::size_t j = rng.next_u64() % (i + 1);
            std::swap(order[i], order[j]);
        }
        for (std::size_t i = 0; i < total; ++i) label[order[i]] = i >= n;
        if (statistic() >= result.statistic) ++ge;
    }
    result.p_value = static_cast<double>(1 + ge) / static_cast<double>(1 + n_perm);
    result.pass = result.p_value > (1.0 - level);
    return result;
}

} // namespace levylab
