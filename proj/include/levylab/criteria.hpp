#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "levylab/measure.hpp"
#include "levylab/norms.hpp"
#include "levylab/rng.hpp"
#include "levylab/simple_function.hpp"

namespace levylab {

enum class Verdict { Levy, NotLevy, SufficientOnly, Inconclusive };

std::string verdict_name(Verdict v);

struct TailMassEntry {
    double radius = 0.0;
    double mass = 0.0;
    bool finite = true;
};

// Auditable result of a criterion evaluation: every quantity the verdict
// rests on appears in `quantities`.
struct CheckReport {
    Verdict verdict = Verdict::Inconclusive;
    std::map<std::string, double> quantities;
    std::vector<TailMassEntry> tail_mass_by_radius;
    std::vector<std::string> notes;

    std::string to_json() const;
};

// Options for sigma-finite (RadialFamily) evaluation: truncation schedule and
// the discretisation knob for materialised levels.
struct CriteriaConfig {
    TruncationSchedule schedule{std::vector<double>{0.5, 0.25, 0.125, 0.0625,
                                                    0.03125, 0.015625, 0.0078125,
                                                    0.00390625}};
    std::size_t radial_cells = 24;
    SolverConfig solver;
    std::uint64_t bootstrap_seed = 0x5eedb001ULL;
};

std::vector<TailMassEntry> check_tail_finiteness(const AnyMeasure& measure,
                                                 const std::vector<double>& radii);

// Hilbert-space criterion: int (||u||^2 and 1) d lambda finite; requires p = 2.
CheckReport check_hilbert(const AnyMeasure& measure);

// Sharp L^p criterion, p >= 2: max of the square-function integral and the
// p-integral on the inside-ball restriction, plus tail finiteness. Sigma-finite
// families are judged by growth extrapolation along the truncation schedule.
CheckReport check_lp_ge2(const AnyMeasure& measure, double p,
                         const CriteriaConfig& cfg = {});

// Sharp L^p criterion, 1 < p < 2: inf-convolution norm of the identity
// integrand on the inside-ball restriction.
CheckReport check_lp_lt2(const AnyMeasure& measure, double p,
                         const CriteriaConfig& cfg = {});

// Scalar projection <lambda, u*>: int (<u,u*>^2 and 1) d lambda.
CheckReport check_scalar_projection(const AnyMeasure& measure, const Vec& dual);

// Martingale-type sufficient condition: int (||u||^p and 1) d lambda < infty.
CheckReport check_type_sufficient(const AnyMeasure& measure, double p);

struct ScalarIntegrability {
    bool n_integrable = false;
    bool compensated_integrable = false;
    double n_integral = 0.0;           // int (|F| and 1)
    double compensated_integral = 0.0; // int (|F| and |F|^2)
};

// Exact evaluation for a scalar simple function over a discrete measure.
ScalarIntegrability scalar_integrability(const DiscreteMeasure& measure,
                                         const ScalarSimpleFunction& F);

// Analytic evaluation for F(u) = ||u||^q over a radial family on (0, t].
ScalarIntegrability scalar_integrability_radial(const RadialFamily& family,
                                                double exponent, double t);

// Growth classification along a truncation schedule; used for sigma-finite
// verdicts. Values must be the criterion quantity evaluated on lambda
// restricted outside delta_k.
struct TrendVerdict {
    Verdict verdict = Verdict::Inconclusive;
    double slope = 0.0;
    double slope_ci_lo = 0.0;
    double slope_ci_hi = 0.0;
    double increment_ratio = 0.0;
};

TrendVerdict classify_truncation_trend(const std::vector<double>& deltas,
                                       const std::vector<double>& values,
                                       std::uint64_t bootstrap_seed);

// K-dimensional test family on ell^p: atoms c_k e_k with c_k = k^{-2} and
// masses chosen so that w_k c_k^2 = k^{-2/p}. Its square-function series
// grows like log K while the p-integral stays bounded, so the sharp p >= 2
// test discriminates it as the dimension grows.
DiscreteMeasure divergent_s_series_measure(std::size_t K, double p);

} // namespace levylab
