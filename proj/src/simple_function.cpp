#include "levylab/simple_function.hpp"

#include <set>
#include <stdexcept>

namespace levylab {

SimpleFunction::SimpleFunction(double t, std::vector<double> bps,
                               std::vector<std::vector<std::size_t>> cs,
                               std::vector<std::vector<Vec>> vs)
    : horizon(t), breakpoints(std::move(bps)), cells(std::move(cs)),
      values(std::move(vs)) {
    if (!(horizon > 0.0)) throw std::domain_error("SimpleFunction: horizon must be positive");
    if (breakpoints.size() < 2 || breakpoints.front() != 0.0 ||
        breakpoints.back() != horizon)
        throw std::domain_error("SimpleFunction: breakpoints must run 0..horizon");
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
        if (!(breakpoints[i] < breakpoints[i + 1]))
            throw std::domain_error("SimpleFunction: breakpoints must be strictly increasing");
    std::set<std::size_t> seen;
    for (const auto& cell : cells)
        for (std::size_t a : cell)
            if (!seen.insert(a).second)
                throw std::domain_error("SimpleFunction: cells must be pairwise disjoint");
    if (values.size() != time_intervals())
        throw std::domain_error("SimpleFunction: values shape mismatch (time)");
    for (const auto& row : values)
        if (row.size() != cells.size())
            throw std::domain_error("SimpleFunction: values shape mismatch (cells)");
}

void SimpleFunction::validate(const DiscreteMeasure& measure) const {
    for (const auto& cell : cells)
        for (std::size_t a : cell)
            if (a >= measure.size())
                throw std::domain_error("SimpleFunction: cell references unknown atom");
    for (const auto& row : values)
        for (const auto& v : row)
            if (v.size() != measure.space().dim)
                throw std::domain_error("SimpleFunction: value dimension mismatch");
}

double SimpleFunction::cell_mass(const DiscreteMeasure& measure, std::size_t j) const {
    double m = 0.0;
    for (std::size_t a : cells[j]) m += measure.atoms()[a].mass;
    return m;
}

std::size_t SimpleFunction::cell_of_atom(std::size_t atom) const {
    for (std::size_t j = 0; j < cells.size(); ++j)
        for (std::size_t a : cells[j])
            if (a == atom) return j;
    return static_cast<std::size_t>(-1);
}

Vec SimpleFunction::value_at(double s, std::size_t atom, std::size_t dim) const {
    const std::size_t j = cell_of_atom(atom);
    if (j == static_cast<std::size_t>(-1) || s <= 0.0 || s > horizon)
        return Vec(dim, 0.0);
    for (std::size_t i = 0; i < time_intervals(); ++i)
        if (s > breakpoints[i] && s <= breakpoints[i + 1]) return values[i][j];
    return Vec(dim, 0.0);
}

SimpleFunction SimpleFunction::scaled(double c) const {
    SimpleFunction out = *this;
    for (auto& row : out.values)
        for (auto& v : row)
            for (auto& x : v) x *= c;
    return out;
}

SimpleFunction SimpleFunction::identity_inside_ball(const DiscreteMeasure& measure,
                                                    double horizon, double radius) {
    std::vector<std::vector<std::size_t>> cells;
    std::vector<Vec> row;
    for (std::size_t a = 0; a < measure.size(); ++a) {
        if (measure.space().norm(measure.atoms()[a].position) <= radius) {
            cells.push_back({a});
            row.push_back(measure.atoms()[a].position);
        }
    }
    return SimpleFunction(horizon, {0.0, horizon}, std::move(cells), {std::move(row)});
}

SimpleFunction SimpleFunction::constant(double horizon,
                                        std::vector<std::vector<std::size_t>> cells,
                                        std::vector<Vec> values) {
    return SimpleFunction(horizon, {0.0, horizon}, std::move(cells),
                          {std::move(values)});
}

} // namespace levylab
