#pragma once

#include <cstddef>
#include <vector>

#include "levylab/measure.hpp"
#include "levylab/rng.hpp"
#include "levylab/simple_function.hpp"

namespace levylab {

struct PrmPoint {
    double time = 0.0;     // in (0, horizon]
    std::size_t atom = 0;  // index into the source measure
};

// One realisation of a Poisson random measure with intensity Leb x lambda on
// (0, horizon] x atoms; times sorted ascending.
struct PointConfiguration {
    double horizon = 0.0;
    std::vector<PrmPoint> points;
};

PointConfiguration sample_prm(const DiscreteMeasure& measure, double t,
                              RngStream& rng);

// Atom-index subset standing for a measurable region B. Atoms are the finest
// partition here, so any subset is a legal refinement cell.
struct CellSelector {
    std::vector<char> member; // member[a] != 0 iff atom a lies in B

    bool contains(std::size_t a) const {
        return a < member.size() && member[a] != 0;
    }

    static CellSelector all(const DiscreteMeasure& measure);
    static CellSelector ball(const DiscreteMeasure& measure, double radius);
    static CellSelector from_atoms(const DiscreteMeasure& measure,
                                   const std::vector<std::size_t>& atoms);
};

// Exact pathwise evaluation of the compensated integral
// sum_{ij} [ N((t_i, t_{i+1}] cap (0,s], B_j cap B)
//            - Leb((t_i, t_{i+1}] cap (0,s]) * lambda(B_j cap B) ] v_ij.
Vec compensated_integral(const PointConfiguration& cfg,
                         const DiscreteMeasure& measure,
                         const SimpleFunction& F, const CellSelector& B,
                         double up_to);

// Exact sup over s in (0, horizon] of the model-space norm of the path above.
// The path is affine between jumps and breakpoints, so the norm sup on each
// segment is attained at an endpoint; both pre-jump and post-jump values are
// evaluated at every jump time.
double running_sup(const PointConfiguration& cfg, const DiscreteMeasure& measure,
                   const SimpleFunction& F, const CellSelector& B);

struct PathStatistic {
    std::vector<double> per_sample; // sup-norm (or terminal-norm) values
    double estimate = 0.0;          // mean of p-th powers
    double stderror = 0.0;
    double p = 2.0;
};

// Monte Carlo estimate of E sup_{0<s<=t} || int F dN~ ||^p. With
// use_sup = false the terminal value at t replaces the running sup.
// Replication r draws from rng.derive(r), so estimates are independent of
// evaluation order and common random numbers work across calls.
PathStatistic estimate_lhs(const DiscreteMeasure& measure, const SimpleFunction& F,
                           const CellSelector& B, double p, double t,
                           std::size_t reps, const RngStream& rng,
                           bool use_sup = true);

// Per-level terminal samples X_k of the identity integrand over
// (0,t] x {delta_k < ||u|| <= rmax}.
struct TruncationSamples {
    std::vector<double> deltas;
    ModelSpace space;
    // samples[k][r] = X_k in replication r
    std::vector<std::vector<Vec>> samples;
};

// Coupled sampling: one point configuration on the finest truncation is
// thinned upward so the X_k live on one probability space (cells are aligned
// to the schedule boundaries, so level k keeps exactly the atoms with radius
// above delta_k). With coupled = false each level resamples independently.
TruncationSamples truncation_sequence(const RadialFamily& family,
                                      const TruncationSchedule& schedule,
                                      std::size_t n_cells, double t,
                                      const RngStream& rng, std::size_t reps,
                                      bool coupled = true);

// Shared machinery for nested-level coupling over an explicit finite measure:
// level k integrates the identity integrand over the atoms listed in
// level_atoms[k]. Used by truncation_sequence and by the growing-dimension
// series campaign.
std::vector<std::vector<Vec>> nested_levels(
    const DiscreteMeasure& finest,
    const std::vector<std::vector<std::size_t>>& level_atoms, double t,
    const RngStream& rng, std::size_t reps);

struct CauchyEntry {
    std::size_t k = 0;
    std::size_t j = 0;
    double estimate = 0.0; // MC estimate of E ||X_k - X_j||^p
    double stderror = 0.0;
};

// Estimates for all adjacent level pairs plus (first, last).
std::vector<CauchyEntry> cauchy_statistic(const TruncationSamples& samples,
                                          double p);

struct L1BoundResult {
    double lhs_estimate = 0.0; // E || int F dN~ || at the horizon
    double lhs_stderr = 0.0;
    double rhs_exact = 0.0;    // 2 * int ||F|| d(Leb x lambda)
};

L1BoundResult l1_bound(const DiscreteMeasure& measure, const SimpleFunction& F,
                       const CellSelector& B, double t, std::size_t reps,
                       const RngStream& rng);

} // namespace levylab
