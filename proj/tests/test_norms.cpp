#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "levylab/measure.hpp"
#include "levylab/norms.hpp"
#include "levylab/rng.hpp"
#include "levylab/simple_function.hpp"

using namespace levylab;

namespace {

DiscreteMeasure random_measure(RngStream& rng, std::size_t dim, std::size_t n_atoms,
                               double p) {
    std::vector<Atom> atoms;
    for (std::size_t a = 0; a < n_atoms; ++a) {
        Vec u(dim);
        for (double& x : u) x = rng.gaussian() * 0.3;
        if (ModelSpace::sequence(dim, p).norm(u) == 0.0) u[0] = 0.1;
        atoms.push_back({u, 0.1 + rng.uniform()});
    }
    return DiscreteMeasure(ModelSpace::sequence(dim, p), std::move(atoms));
}

SimpleFunction random_function(const DiscreteMeasure& m, RngStream& rng) {
    const std::size_t dim = m.space().dim;
    std::vector<double> bps{0.0, 0.4, 1.0};
    std::vector<std::vector<std::size_t>> cells;
    for (std::size_t a = 0; a < m.size(); ++a) cells.push_back({a});
    std::vector<std::vector<Vec>> values(2, std::vector<Vec>(cells.size()));
    for (auto& row : values)
        for (auto& v : row) {
            v.resize(dim);
            for (double& x : v) x = rng.gaussian();
        }
    return SimpleFunction(1.0, bps, cells, values);
}

// brute-force recomputation of the S and D norms straight from the formulas
double brute_s(const DiscreteMeasure& m, const SimpleFunction& F, double p) {
    double outer = 0.0;
    for (std::size_t s = 0; s < m.space().dim; ++s) {
        double q = 0.0;
        for (std::size_t i = 0; i < F.time_intervals(); ++i)
            for (std::size_t j = 0; j < F.cell_count(); ++j) {
                double mass = 0.0;
                for (std::size_t a : F.cells[j]) mass += m.atoms()[a].mass;
                q += (F.breakpoints[i + 1] - F.breakpoints[i]) * mass *
                     F.values[i][j][s] * F.values[i][j][s];
            }
        outer += std::pow(q, p / 2.0) * m.space().weight(s);
    }
    return std::pow(outer, 1.0 / p);
}

double brute_d(const DiscreteMeasure& m, const SimpleFunction& F, double p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < F.time_intervals(); ++i)
        for (std::size_t j = 0; j < F.cell_count(); ++j) {
            double mass = 0.0;
            for (std::size_t a : F.cells[j]) mass += m.atoms()[a].mass;
            double inner = 0.0;
            for (std::size_t s = 0; s < m.space().dim; ++s)
                inner += std::pow(std::fabs(F.values[i][j][s]), p) *
                         m.space().weight(s);
            acc += (F.breakpoints[i + 1] - F.breakpoints[i]) * mass * inner;
        }
    return std::pow(acc, 1.0 / p);
}

// golden-section search over the collinear split for single-pair instances
double golden_oracle(double p, double w, const ModelSpace& sp, const Vec& c) {
    const double nc = sp.norm(c);
    const auto value = [&](double t) {
        // S(t c) + D((1 - t) c) with a single (time, cell) pair of weight w
        return std::sqrt(w) * t * nc + std::pow(w, 1.0 / p) * (1.0 - t) * nc;
    };
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = 1.0;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = value(x1), f2 = value(x2);
    for (int it = 0; it < 200; ++it) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - phi * (b - a); f1 = value(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + phi * (b - a); f2 = value(x2);
        }
    }
    return std::min(value(0.5 * (a + b)), std::min(value(0.0), value(1.0)));
}

} // namespace

TEST_CASE("s and d norms match brute force sums") {
    RngStream rng(101);
    for (int trial = 0; trial < 10; ++trial) {
        for (double p : {1.5, 2.0, 3.0}) {
            const DiscreteMeasure m = random_measure(rng, 4, 6, p);
            const SimpleFunction F = random_function(m, rng);
            CHECK(s_norm(m, F, p) == doctest::Approx(brute_s(m, F, p)).epsilon(1e-12));
            CHECK(d_norm(m, F, p) == doctest::Approx(brute_d(m, F, p)).epsilon(1e-12));
        }
    }
}

TEST_CASE("s equals d at p = 2") {
    RngStream rng(102);
    for (int trial = 0; trial < 5; ++trial) {
        const DiscreteMeasure m = random_measure(rng, 5, 4, 2.0);
        const SimpleFunction F = random_function(m, rng);
        CHECK(s_norm(m, F, 2.0) == doctest::Approx(d_norm(m, F, 2.0)).epsilon(1e-12));
    }
}

TEST_CASE("ip max norm requires p >= 2 and takes the max") {
    RngStream rng(103);
    const DiscreteMeasure m = random_measure(rng, 3, 4, 3.0);
    const SimpleFunction F = random_function(m, rng);
    CHECK(ip_norm_max(m, F, 3.0) ==
          doctest::Approx(std::max(s_norm(m, F, 3.0), d_norm(m, F, 3.0))));
    CHECK_THROWS(ip_norm_max(m, F, 1.5));
}

TEST_CASE("inf convolution single-pair instances match the golden-section oracle") {
    RngStream rng(104);
    int cases = 0;
    for (double p : {1.2, 1.5, 1.9}) {
        for (double w : {0.05, 0.5, 1.0, 2.0, 8.0}) {
            const std::size_t dim = 3;
            ModelSpace sp = ModelSpace::sequence(dim, p);
            Vec c(dim);
            for (double& x : c) x = rng.gaussian();
            DiscreteMeasure m(sp, {{c, w}});
            std::vector<std::vector<Vec>> vals{{c}};
            SimpleFunction F(1.0, {0.0, 1.0}, {{0}}, vals);
            const IpSumResult sol = ip_norm_sum(m, F, p);
            CHECK(sol.converged);
            const double oracle = golden_oracle(p, w, sp, c);
            CHECK(sol.value == doctest::Approx(oracle).epsilon(1e-6));
            ++cases;
        }
    }
    CHECK(cases >= 15);
}

TEST_CASE("inf convolution multi-atom instances reach the residual target") {
    RngStream rng(105);
    for (int trial = 0; trial < 8; ++trial) {
        const double p = 1.2 + 0.7 * rng.uniform();
        const DiscreteMeasure m = random_measure(rng, 4, 5, p);
        const SimpleFunction F = random_function(m, rng);
        const IpSumResult sol = ip_norm_sum(m, F, p);
        CHECK(sol.converged);
        CHECK(sol.residual <= 1e-8);
        // endpoints are feasible, so the optimum cannot exceed either
        CHECK(sol.value <= s_norm(m, F, p) + 1e-10);
        CHECK(sol.value <= d_norm(m, F, p) + 1e-10);
        // the reported decomposition reproduces the value and sums to F
        double s_part = 0.0, d_part = 0.0;
        SimpleFunction F1 = F, F2 = F;
        F1.values = sol.decomposition.f1;
        F2.values = sol.decomposition.f2;
        s_part = s_norm(m, F1, p);
        d_part = d_norm(m, F2, p);
        CHECK(s_part + d_part == doctest::Approx(sol.value).epsilon(1e-9));
        for (std::size_t i = 0; i < F.time_intervals(); ++i)
            for (std::size_t j = 0; j < F.cell_count(); ++j)
                for (std::size_t s = 0; s < m.space().dim; ++s)
                    CHECK(sol.decomposition.f1[i][j][s] +
                              sol.decomposition.f2[i][j][s] ==
                          doctest::Approx(F.values[i][j][s]).epsilon(1e-12));
    }
}

TEST_CASE("inf convolution norm axioms") {
    RngStream rng(106);
    const double p = 1.5;
    const DiscreteMeasure m = random_measure(rng, 3, 4, p);
    for (int trial = 0; trial < 5; ++trial) {
        const SimpleFunction F = random_function(m, rng);
        const SimpleFunction G = random_function(m, rng);
        const double nf = ip_norm_sum(m, F, p).value;
        const double ng = ip_norm_sum(m, G, p).value;
        // homogeneity
        CHECK(ip_norm_sum(m, F.scaled(2.5), p).value ==
              doctest::Approx(2.5 * nf).epsilon(1e-6));
        // triangle inequality
        SimpleFunction H = F;
        for (std::size_t i = 0; i < H.time_intervals(); ++i)
            for (std::size_t j = 0; j < H.cell_count(); ++j)
                for (std::size_t s = 0; s < m.space().dim; ++s)
                    H.values[i][j][s] += G.values[i][j][s];
        CHECK(ip_norm_sum(m, H, p).value <= nf + ng + 1e-6 + 2e-8);
    }
}

TEST_CASE("inf convolution collapses at p = 2") {
    RngStream rng(107);
    const DiscreteMeasure m = random_measure(rng, 4, 4, 2.0);
    const SimpleFunction F = random_function(m, rng);
    const IpSumResult sol = ip_norm_sum(m, F, 2.0);
    CHECK(sol.converged);
    CHECK(sol.value == doctest::Approx(s_norm(m, F, 2.0)).epsilon(1e-10));
}

TEST_CASE("zero integrand has zero norm") {
    RngStream rng(108);
    const DiscreteMeasure m = random_measure(rng, 2, 3, 1.5);
    SimpleFunction F = random_function(m, rng).scaled(0.0);
    const IpSumResult sol = ip_norm_sum(m, F, 1.5);
    CHECK(sol.converged);
    CHECK(sol.value == 0.0);
}
