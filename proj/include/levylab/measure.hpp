#pragma once

#include <complex>
#include <string>
#include <variant>
#include <vector>

#include "levylab/model_space.hpp"
#include "levylab/rng.hpp"

namespace levylab {

enum class RestrictSide { Inside, Outside };

struct Atom {
    Vec position;
    double mass = 0.0;
};

// Finitely many weighted atoms standing for a (truncated) sigma-finite
// measure. The origin carries no mass and all masses are positive; the empty
// list is the zero measure.
class DiscreteMeasure {
public:
    DiscreteMeasure() = default;
    DiscreteMeasure(ModelSpace space, std::vector<Atom> atoms);

    const ModelSpace& space() const { return space_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }

    double total_mass() const;

    // mass on {norm <= r} / {norm > r}; ties at norm == r count as inside
    double ball_mass(double r, RestrictSide side) const;

    DiscreteMeasure restrict(double r, RestrictSide side) const;

    // atoms {u_a + u_b} with masses w_a * w_b; coincident sums merged within
    // 1e-12 in the model-space norm
    DiscreteMeasure convolve(const DiscreteMeasure& other) const;

    // s(lambda) = -sum over atoms in the closed unit ball of w_a u_a
    Vec shift_vector() const;

    // exp( sum_a w_a (e^{i<u_a,dual>} - 1 - i<u_a,dual> 1{norm(u_a)<=1}) )
    std::complex<double> char_fn(const Vec& dual) const;

    // i.i.d. samples of pi(lambda); K ~ Poisson(total mass), sum of K atoms
    std::vector<Vec> sample_compound_poisson(RngStream& rng, std::size_t n) const;

    // pi(lambda) shifted by s(lambda)
    std::vector<Vec> sample_eta(RngStream& rng, std::size_t n) const;

    std::string to_json() const;
    static DiscreteMeasure from_json(const std::string& text);

private:
    ModelSpace space_;
    std::vector<Atom> atoms_;
};

// Parametric sigma-finite measure with radial density r^{-1-alpha} dr along
// finitely many unit directions, supported on radii (rmin, rmax]. rmin = 0 is
// the usual infinite-mass-near-zero case; restrictions away from zero keep
// the family symbolic via rmin.
class RadialFamily {
public:
    RadialFamily(ModelSpace space, double alpha, std::vector<Atom> directions,
                 double rmax, double rmin = 0.0);

    const ModelSpace& space() const { return space_; }
    double alpha() const { return alpha_; }
    double rmax() const { return rmax_; }
    double rmin() const { return rmin_; }
    const std::vector<Atom>& directions() const { return directions_; }

    double direction_weight_total() const;

    // sum_dir w_dir * int of r^{q-1-alpha} dr over (max(rmin,lo), min(rmax,hi)];
    // returns +inf when the integral diverges at the lower end
    double radial_moment(double q, double lo, double hi) const;

    // mass of {norm > r}
    double tail_mass(double r) const;

    double total_mass() const; // +inf when rmin == 0 (infinite activity)

    RadialFamily restrict(double r, RestrictSide side) const;

    // n atoms per direction over radii (delta, rmax]; atom radius is the
    // mass centroid of its cell under r^{-1-alpha} dr, mass the exact cell
    // mass; cells geometrically spaced
    DiscreteMeasure materialise(double delta, std::size_t n_cells) const;

    std::string to_json() const;
    static RadialFamily from_json(const std::string& text);

private:
    ModelSpace space_;
    double alpha_;
    std::vector<Atom> directions_;
    double rmax_;
    double rmin_;
};

using AnyMeasure = std::variant<DiscreteMeasure, RadialFamily>;

const ModelSpace& measure_space(const AnyMeasure& m);
std::string measure_to_json(const AnyMeasure& m);
AnyMeasure measure_from_json(const std::string& text);
AnyMeasure load_measure_file(const std::string& path);

// strictly decreasing positive reals delta_1 > ... > delta_K > 0
struct TruncationSchedule {
    std::vector<double> deltas;

    explicit TruncationSchedule(std::vector<double> ds);
    std::size_t levels() const { return deltas.size(); }
};

// int_a^b r^{q-1-alpha} dr for 0 <= a < b; +inf when divergent at a = 0
double radial_power_integral(double q, double alpha, double a, double b);

} // namespace levylab
