#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "levylab/rng.hpp"
#include "levylab/stats.hpp"

using namespace levylab;

TEST_CASE("rng streams are reproducible and key-derived") {
    RngStream a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    // derivation depends on the key, not on consumed state
    RngStream c(7), d(7);
    for (int i = 0; i < 13; ++i) c.next_u64();
    RngStream dc = c.derive(3);
    RngStream dd = d.derive(3);
    for (int i = 0; i < 10; ++i) CHECK(dc.next_u64() == dd.next_u64());

    CHECK(RngStream(7).derive(1).next_u64() != RngStream(7).derive(2).next_u64());
    CHECK(RngStream(7).derive("x").next_u64() != RngStream(7).derive("y").next_u64());
}

TEST_CASE("uniform lies in (0,1) and has matching moments") {
    RngStream rng(1);
    double sum = 0.0, sq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        sum += u;
        sq += u * u;
    }
    CHECK(std::fabs(sum / n - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::fabs(sq / n - 1.0 / 3.0) < 0.005);
}

TEST_CASE("gaussian moments") {
    RngStream rng(2);
    const int n = 200000;
    double m1 = 0, m2 = 0, m4 = 0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        m1 += g;
        m2 += g * g;
        m4 += g * g * g * g;
    }
    m1 /= n;
    m2 /= n;
    m4 /= n;
    CHECK(std::fabs(m1) < 3.0 / std::sqrt(double(n)));
    CHECK(std::fabs(m2 - 1.0) < 3.0 * std::sqrt(2.0 / n));
    CHECK(std::fabs(m4 - 3.0) < 3.0 * std::sqrt(96.0 / n));
}

TEST_CASE("poisson mean and variance across both sampling regimes") {
    for (double mean : {0.3, 4.0, 29.9, 30.1, 250.0, 1e6}) {
        RngStream rng(static_cast<std::uint64_t>(mean * 1000) + 5);
        const int n = 20000;
        double m = 0, v = 0;
        std::vector<double> xs(n);
        for (int i = 0; i < n; ++i) {
            xs[i] = static_cast<double>(rng.poisson(mean));
            m += xs[i];
        }
        m /= n;
        for (double x : xs) v += (x - m) * (x - m);
        v /= (n - 1);
        CHECK(std::fabs(m - mean) < 4.0 * std::sqrt(mean / n));
        CHECK(std::fabs(v - mean) < 0.1 * mean + 4.0 * mean * std::sqrt(3.0 / n));
    }
}

TEST_CASE("poisson pmf chi-square goodness of fit") {
    const double mean = 4.0;
    RngStream rng(99);
    const int n = 50000;
    std::vector<double> observed(13, 0.0);
    for (int i = 0; i < n; ++i) {
        const std::uint64_t k = rng.poisson(mean);
        observed[std::min<std::uint64_t>(k, 12)] += 1.0;
    }
    std::vector<double> expected(13, 0.0);
    double pmf = std::exp(-mean), cum = 0.0;
    for (int k = 0; k < 12; ++k) {
        expected[k] = n * pmf;
        cum += pmf;
        pmf *= mean / (k + 1);
    }
    expected[12] = n * (1.0 - cum);
    CHECK(chi2_gof_pvalue(observed, expected) > 1e-4);
}

TEST_CASE("discrete sampler frequencies match weights") {
    const std::vector<double> w{1.0, 3.0, 0.5, 5.5};
    DiscreteSampler sampler(w);
    CHECK(sampler.total() == doctest::Approx(10.0));
    RngStream rng(11);
    const int n = 100000;
    std::vector<double> counts(w.size(), 0.0);
    for (int i = 0; i < n; ++i) counts[sampler.sample(rng)] += 1.0;
    std::vector<double> expected;
    for (double wi : w) expected.push_back(n * wi / 10.0);
    CHECK(chi2_gof_pvalue(counts, expected) > 1e-4);
}

TEST_CASE("kahan summation is order independent at 1e-12") {
    RngStream rng(3);
    std::vector<double> xs(10000);
    for (auto& x : xs) x = (rng.uniform() - 0.5) * std::pow(10.0, 8.0 * rng.uniform());
    KahanSum fwd;
    for (double x : xs) fwd.add(x);
    std::sort(xs.begin(), xs.end());
    KahanSum sorted;
    for (double x : xs) sorted.add(x);
    const double scale = std::max(1.0, std::fabs(fwd.value()));
    CHECK(std::fabs(fwd.value() - sorted.value()) / scale < 1e-12);
}

TEST_CASE("incomplete gamma and chi-square") {
    // P(0.5, x) = erf(sqrt(x))
    for (double x : {0.1, 0.5, 1.0, 2.5, 7.0})
        CHECK(gamma_p(0.5, x) == doctest::Approx(std::erf(std::sqrt(x))).epsilon(1e-12));
    // chi2 with 2 dof is Exp(1/2)
    for (double x : {0.2, 1.0, 3.0})
        CHECK(chi2_cdf(x, 2.0) == doctest::Approx(1.0 - std::exp(-0.5 * x)).epsilon(1e-12));
    for (double prob : {0.01, 0.5, 0.95, 0.999})
        CHECK(chi2_cdf(chi2_quantile(prob, 5.0), 5.0) == doctest::Approx(prob).epsilon(1e-8));
}

TEST_CASE("gaussian absolute moments") {
    CHECK(gaussian_abs_moment(2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(gaussian_abs_moment(1.0) ==
          doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-14));
    CHECK(gaussian_abs_moment(4.0) == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("slope fit recovers a line, bootstrap CI covers the truth") {
    std::vector<double> x, y;
    RngStream noise(4);
    for (int i = 0; i < 30; ++i) {
        x.push_back(0.3 * i);
        y.push_back(2.0 - 1.5 * x.back() + 0.05 * noise.gaussian());
    }
    const SlopeFit fit = fit_slope(x, y, RngStream(5));
    CHECK(fit.slope == doctest::Approx(-1.5).epsilon(0.05));
    CHECK(fit.ci_lo <= -1.5);
    CHECK(fit.ci_hi >= -1.6);
    CHECK(fit.ci_hi < 0.0);

    // exact line: CI collapses onto the slope
    std::vector<double> ye;
    for (double xi : x) ye.push_back(1.0 + 0.7 * xi);
    const SlopeFit exact = fit_slope(x, ye, RngStream(6));
    CHECK(exact.slope == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(exact.ci_lo == doctest::Approx(0.7).epsilon(1e-6));
}

TEST_CASE("energy distance test separates equal from shifted samples") {
    RngStream rng(8);
    std::vector<std::vector<double>> xs, ys, zs;
    for (int i = 0; i < 800; ++i) {
        xs.push_back({rng.gaussian(), rng.gaussian()});
        ys.push_back({rng.gaussian(), rng.gaussian()});
        zs.push_back({rng.gaussian() + 1.0, rng.gaussian()});
    }
    const auto same =
        energy_distance_test(xs, ys, 0.999, RngStream(9), 60000, 399);
    CHECK(same.pass);
    // 999 permutations are needed so the attainable p-value floor (1/1000)
    // reaches the 0.001 rejection threshold of the 0.999 level
    const auto diff =
        energy_distance_test(xs, zs, 0.999, RngStream(10), 60000, 999);
    CHECK_FALSE(diff.pass);
    CHECK(diff.p_value <= 0.0011);
}
