#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "levylab/measure.hpp"
#include "levylab/simple_function.hpp"

namespace levylab {

// ||f|| in the model space
double vector_norm(const ModelSpace& space, const Vec& f);

// ||F||_{S^p}: square layer over (time x cells), outer p-layer over grid
// points: ( sum_s mu_s ( sum_i dt_i sum_j lambda(B_j) v_ij(s)^2 )^{p/2} )^{1/p}
double s_norm(const DiscreteMeasure& measure, const SimpleFunction& F, double p);

// ||F||_{D^p} = ( sum_i dt_i sum_j lambda(B_j) ||v_ij||^p )^{1/p}
double d_norm(const DiscreteMeasure& measure, const SimpleFunction& F, double p);

// max(s_norm, d_norm); requires p >= 2
double ip_norm_max(const DiscreteMeasure& measure, const SimpleFunction& F, double p);

struct SolverConfig {
    double tol = 1e-8;          // stationarity residual target
    std::size_t max_iter = 10000; // coordinate sweeps
    std::string step_rule = "coordinate"; // or "subgradient" fallback
};

// F = F1 + F2 split achieving the inf-convolution value
struct IntegrandDecomposition {
    std::vector<std::vector<Vec>> f1;
    std::vector<std::vector<Vec>> f2;
};

struct IpSumResult {
    double value = 0.0;
    IntegrandDecomposition decomposition;
    double residual = 0.0; // stationarity residual actually achieved
    bool converged = false;
    std::size_t sweeps = 0;
};

// inf{ ||F1||_S + ||F2||_D : F1 + F2 = F } for p in (1,2]; the p = 2
// endpoint is accepted and collapses to the common S = D value.
//
// The objective is convex and C^1 away from the two pure assignments, so the
// solve proceeds in two stages: exact dual-norm optimality tests for the
// endpoints F1 = 0 and F1 = F, then cyclic coordinate descent with exact 1-D
// line minimisation on the interior. Non-convergence is reported, never
// silently truncated.
IpSumResult ip_norm_sum(const DiscreteMeasure& measure, const SimpleFunction& F,
                        double p, const SolverConfig& cfg = {});

} // namespace levylab
