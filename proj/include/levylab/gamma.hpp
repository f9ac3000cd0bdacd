#pragma once

#include <cstddef>
#include <vector>

#include "levylab/measure.hpp"
#include "levylab/prm.hpp"
#include "levylab/rng.hpp"
#include "levylab/simple_function.hpp"

namespace levylab {

// Finite rank operator T g = sum_n <g, h_n>_w v_n from a weighted
// K-dimensional inner-product space into the model space.
struct FiniteRankOperator {
    std::vector<Vec> h;          // each of length weights.size()
    std::vector<double> weights; // inner-product weights, all positive
    std::vector<Vec> v;          // target vectors, one per h
    ModelSpace target;
    bool orthonormalised = false;

    std::size_t rank_bound() const { return h.size(); }
    std::size_t domain_dim() const { return weights.size(); }

    // T applied to g
    Vec apply(const Vec& g) const;
};

// Weighted modified Gram-Schmidt on the h vectors; the v vectors are
// recombined so the operator action is unchanged. Directions that are
// linearly dependent on earlier ones are dropped.
FiniteRankOperator orthonormalise(const FiniteRankOperator& op);

// Hilbert-Schmidt norm; requires a p = 2 target.
double gamma_norm_exact_hilbert(const FiniteRankOperator& op);

struct McEstimate {
    double estimate = 0.0;
    double stderror = 0.0;
};

// sqrt( E || sum_n gamma_n v_n ||^2 ) by Monte Carlo over i.i.d. standard
// normals; stderr by the delta method.
McEstimate gamma_norm_mc(const FiniteRankOperator& op, std::size_t n_gauss,
                         RngStream& rng);

// E || sum_n gamma_n v_n ||_p^p in closed form:
// kappa_p * sum_s sigma_s^p mu_s with sigma_s^2 = sum_n v_n(s)^2 and
// kappa_p = 2^{p/2} Gamma((p+1)/2) / sqrt(pi).
double gamma_pth_moment_exact(const FiniteRankOperator& op, double p);

McEstimate gamma_pth_moment_mc(const FiniteRankOperator& op, double p,
                               std::size_t n_gauss, RngStream& rng);

// ( sum_s (sum_n v_n(s)^2)^{p/2} mu_s )^{1/p} after orthonormalisation.
double square_function_norm(const FiniteRankOperator& op, double p);

struct IdealPropertyReport {
    double lhs = 0.0;        // gamma norm of Tpost o S o R
    double lhs_stderr = 0.0; // zero when the p = 2 exact pathway applies
    double bound = 0.0;      // ||Tpost|| * gamma(S) * ||R||
};

// R precomposes on the weighted domain (operator norm by power iteration);
// Tpost postcomposes on the target (operator norm bounded by interpolation
// between the 1 -> 1 and infinity -> infinity matrix norms).
IdealPropertyReport ideal_property_check(const FiniteRankOperator& S,
                                         const std::vector<Vec>& R,
                                         const std::vector<Vec>& Tpost,
                                         std::size_t n_gauss, RngStream& rng);

// Pettis-integral operator of a realised configuration: one unit-weight
// counting direction per point inside B, v_k = F(s_k, u_{a_k}).
FiniteRankOperator build_tg(const PointConfiguration& cfg,
                            const DiscreteMeasure& measure,
                            const SimpleFunction& F, const CellSelector& B);

// Jump operator of the compensated path: one direction per distinct jump
// time, v = summed jump vector at that time (simultaneous times merged).
FiniteRankOperator build_jump_operator(const PointConfiguration& cfg,
                                       const DiscreteMeasure& measure,
                                       const SimpleFunction& F,
                                       const CellSelector& B);

// Outer Monte Carlo over point configurations of ||T_{F_B}||_gamma^p; the
// inner gamma norm is exact for p = 2 targets and Gaussian MC otherwise.
McEstimate estimate_expected_gamma_norm(const DiscreteMeasure& measure,
                                        const SimpleFunction& F,
                                        const CellSelector& B, double p,
                                        double t, std::size_t reps_outer,
                                        std::size_t n_gauss,
                                        const RngStream& rng);

struct UmdConfig {
    std::size_t reps = 1000;
    std::size_t n_gauss = 200;
    bool use_sup = false; // running sup on the left side, else terminal value
};

struct UmdReport {
    double lhs = 0.0;  // E sup (or terminal) || int F dN~ ||^p
    double lhs_stderr = 0.0;
    double rhs = 0.0;  // E || T_{F_B} ||_gamma^p
    double rhs_stderr = 0.0;
    double ratio = 0.0;
    double ratio_stderr = 0.0;
    bool degenerate = false; // both sides vanish (zero integrand)
};

UmdReport umd_equivalence_check(const DiscreteMeasure& measure,
                                const SimpleFunction& F, const CellSelector& B,
                                double p, double t, const UmdConfig& cfg,
                                const RngStream& rng);

} // namespace levylab
