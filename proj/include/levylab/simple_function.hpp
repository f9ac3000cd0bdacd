#pragma once

#include <vector>

#include "levylab/measure.hpp"

namespace levylab {

// Integrand constant on time-interval x atom-cell rectangles:
// F = sum_{i,j} 1_{(t_i, t_{i+1}] x B_j} (x) v_{ij}. Cells are pairwise
// disjoint atom-index subsets of the carrying DiscreteMeasure.
struct SimpleFunction {
    double horizon = 1.0;
    std::vector<double> breakpoints;            // 0 = t_1 < ... < t_{m+1} = horizon
    std::vector<std::vector<std::size_t>> cells; // B_1 .. B_n
    std::vector<std::vector<Vec>> values;        // values[i][j], each of length d

    SimpleFunction() = default;
    SimpleFunction(double t, std::vector<double> bps,
                   std::vector<std::vector<std::size_t>> cs,
                   std::vector<std::vector<Vec>> vs);

    std::size_t time_intervals() const { return breakpoints.size() - 1; }
    std::size_t cell_count() const { return cells.size(); }
    double dt(std::size_t i) const { return breakpoints[i + 1] - breakpoints[i]; }

    void validate(const DiscreteMeasure& measure) const;

    // lambda(B_j)
    double cell_mass(const DiscreteMeasure& measure, std::size_t j) const;

    // cell index containing the atom, or npos
    std::size_t cell_of_atom(std::size_t atom) const;

    // value at (s, atom); zero vector if the atom lies in no cell or s is
    // outside (0, horizon]
    Vec value_at(double s, std::size_t atom, std::size_t dim) const;

    // F = c * F
    SimpleFunction scaled(double c) const;

    // the identity integrand G(t,u) = u 1_{ball}(u) on (0, horizon]: one cell
    // per inside-ball atom, value = the atom itself
    static SimpleFunction identity_inside_ball(const DiscreteMeasure& measure,
                                               double horizon = 1.0,
                                               double radius = 1.0);

    // constant-in-time integrand with one cell per listed atom group
    static SimpleFunction constant(double horizon,
                                   std::vector<std::vector<std::size_t>> cells,
                                   std::vector<Vec> values);
};

// Scalar integrand over the atoms, used by the scalar integrability test.
struct ScalarSimpleFunction {
    double horizon = 1.0;
    std::vector<double> breakpoints;
    std::vector<std::vector<std::size_t>> cells;
    std::vector<std::vector<double>> values; // values[i][j]
};

} // namespace levylab
