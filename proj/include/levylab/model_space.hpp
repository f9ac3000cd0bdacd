#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace levylab {

using Vec = std::vector<double>;

enum class SpaceKind { Sequence, GridLp };

// Finite-dimensional model space: either a truncated sequence space ell^p
// (unit weights) or a grid-discretised L^p_mu with strictly positive grid
// weights. Exponent p must lie in (1, infinity).
struct ModelSpace {
    SpaceKind kind = SpaceKind::Sequence;
    std::size_t dim = 0;
    double p = 2.0;
    Vec grid_weights; // GridLp only, size == dim

    static ModelSpace sequence(std::size_t d, double p);
    static ModelSpace grid(double p, Vec weights);

    double weight(std::size_t i) const {
        return kind == SpaceKind::GridLp ? grid_weights[i] : 1.0;
    }

    // (sum_i |f_i|^p w_i)^{1/p}
    double norm(std::span<const double> f) const;

    // duality pairing; weighted dot product on GridLp so the dual lives on
    // the same grid, plain dot product on sequence spaces
    double pairing(std::span<const double> f, std::span<const double> g) const;

    bool same_as(const ModelSpace& other) const;
};

} // namespace levylab
