#include "levylab/model_space.hpp"

#include <cmath>
#include <stdexcept>

namespace levylab {

ModelSpace ModelSpace::sequence(std::size_t d, double p) {
    if (!(p > 1.0) || !std::isfinite(p))
        throw std::domain_error("ModelSpace: p must be finite and > 1");
    if (d == 0) throw std::domain_error("ModelSpace: dimension must be positive");
    ModelSpace s;
    s.kind = SpaceKind::Sequence;
    s.dim = d;
    s.p = p;
    return s;
}

ModelSpace ModelSpace::grid(double p, Vec weights) {
    if (!(p > 1.0) || !std::isfinite(p))
        throw std::domain_error("ModelSpace: p must be finite and > 1");
    if (weights.empty()) throw std::domain_error("ModelSpace: empty grid");
    for (double w : weights)
        if (!(w > 0.0)) throw std::domain_error("ModelSpace: grid weights must be positive");
    ModelSpace s;
    s.kind = SpaceKind::GridLp;
    s.dim = weights.size();
    s.p = p;
    s.grid_weights = std::move(weights);
    return s;
}

double ModelSpace::norm(std::span<const double> f) const {
    if (f.size() != dim) throw std::domain_error("ModelSpace::norm: wrong length");
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i)
        acc += std::pow(std::fabs(f[i]), p) * weight(i);
    return std::pow(acc, 1.0 / p);
}

double ModelSpace::pairing(std::span<const double> f, std::span<const double> g) const {
    if (f.size() != dim || g.size() != dim)
        throw std::domain_error("ModelSpace::pairing: wrong length");
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) acc += f[i] * g[i] * weight(i);
    return acc;
}

bool ModelSpace::same_as(const ModelSpace& other) const {
    return kind == other.kind && dim == other.dim && p == other.p &&
           grid_weights == other.grid_weights;
}

} // namespace levylab
