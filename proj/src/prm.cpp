#include "levylab/prm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "levylab/stats.hpp"

namespace levylab {

namespace {

// lambda(B_j cap B) for every cell of F
std::vector<double> intersected_cell_masses(const DiscreteMeasure& measure,
                                            const SimpleFunction& F,
                                            const CellSelector& B) {
    std::vector<double> out(F.cell_count(), 0.0);
    for (std::size_t j = 0; j < F.cell_count(); ++j)
        for (std::size_t a : F.cells[j])
            if (B.contains(a)) out[j] += measure.atoms()[a].mass;
    return out;
}

std::vector<std::size_t> atom_to_cell(const DiscreteMeasure& measure,
                                      const SimpleFunction& F) {
    std::vector<std::size_t> out(measure.size(), static_cast<std::size_t>(-1));
    for (std::size_t j = 0; j < F.cell_count(); ++j)
        for (std::size_t a : F.cells[j]) {
            if (a >= out.size())
                throw std::domain_error("prm: cell references unknown atom");
            out[a] = j;
        }
    return out;
}

} // namespace

PointConfiguration sample_prm(const DiscreteMeasure& measure, double t,
                              RngStream& rng) {
    if (!(t > 0.0)) throw std::domain_error("sample_prm: horizon must be positive");
    PointConfiguration cfg;
    cfg.horizon = t;
    const double total = measure.total_mass();
    if (total <= 0.0) return cfg;
    const std::uint64_t count = rng.poisson(t * total);
    std::vector<double> masses;
    masses.reserve(measure.size());
    for (const auto& a : measure.atoms()) masses.push_back(a.mass);
    DiscreteSampler sampler(masses);
    cfg.points.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) {
        const double s = t * (1.0 - rng.uniform()); // lands in (0, t]
        cfg.points.push_back({s, sampler.sample(rng)});
    }
    std::sort(cfg.points.begin(), cfg.points.end(),
              [](const PrmPoint& a, const PrmPoint& b) { return a.time < b.time; });
    return cfg;
}

CellSelector CellSelector::all(const DiscreteMeasure& measure) {
    return CellSelector{std::vector<char>(measure.size(), 1)};
}

CellSelector CellSelector::ball(const DiscreteMeasure& measure, double radius) {
    CellSelector out{std::vector<char>(measure.size(), 0)};
    for (std::size_t a = 0; a < measure.size(); ++a)
        if (measure.space().norm(measure.atoms()[a].position) <= radius)
            out.member[a] = 1;
    return out;
}

CellSelector CellSelector::from_atoms(const DiscreteMeasure& measure,
                                      const std::vector<std::size_t>& atoms) {
    CellSelector out{std::vector<char>(measure.size(), 0)};
    for (std::size_t a : atoms) {
        if (a >= measure.size())
            throw std::domain_error("CellSelector: atom index out of range");
        out.member[a] = 1;
    }
    return out;
}

Vec compensated_integral(const PointConfiguration& cfg,
                         const DiscreteMeasure& measure,
                         const SimpleFunction& F, const CellSelector& B,
                         double up_to) {
    if (up_to > F.horizon + 1e-15)
        throw std::domain_error("compensated_integral: up_to exceeds horizon");
    F.validate(measure);
    const std::size_t dim = measure.space().dim;
    const auto cell_of = atom_to_cell(measure, F);
    const auto masses = intersected_cell_masses(measure, F, B);

    std::vector<std::vector<double>> coeff(F.time_intervals(),
                                           std::vector<double>(F.cell_count(), 0.0));
    for (std::size_t i = 0; i < F.time_intervals(); ++i) {
        const double lo = std::min(up_to, F.breakpoints[i]);
        const double hi = std::min(up_to, F.breakpoints[i + 1]);
        const double leb = std::max(0.0, hi - lo);
        for (std::size_t j = 0; j < F.cell_count(); ++j)
            coeff[i][j] = -leb * masses[j];
    }
    for (const auto& pt : cfg.points) {
        if (pt.time > up_to) break;
        if (pt.atom >= measure.size())
            throw std::domain_error("compensated_integral: point atom out of range");
        const std::size_t j = cell_of[pt.atom];
        if (j == static_cast<std::size_t>(-1) || !B.contains(pt.atom)) continue;
        for (std::size_t i = 0; i < F.time_intervals(); ++i)
            if (pt.time > F.breakpoints[i] && pt.time <= F.breakpoints[i + 1]) {
                coeff[i][j] += 1.0;
                break;
            }
    }
    std::vector<KahanSum> acc(dim);
    for (std::size_t i = 0; i < F.time_intervals(); ++i)
        for (std::size_t j = 0; j < F.cell_count(); ++j) {
            if (coeff[i][j] == 0.0) continue;
            for (std::size_t s = 0; s < dim; ++s)
                acc[s].add(coeff[i][j] * F.values[i][j][s]);
        }
    Vec out(dim);
    for (std::size_t s = 0; s < dim; ++s) out[s] = acc[s].value();
    return out;
}

double running_sup(const PointConfiguration& cfg, const DiscreteMeasure& measure,
                   const SimpleFunction& F, const CellSelector& B) {
    F.validate(measure);
    const std::size_t dim = measure.space().dim;
    const auto cell_of = atom_to_cell(measure, F);
    const auto masses = intersected_cell_masses(measure, F, B);

    // compensator slope on each time interval
    std::vector<Vec> drift(F.time_intervals(), Vec(dim, 0.0));
    for (std::size_t i = 0; i < F.time_intervals(); ++i)
        for (std::size_t j = 0; j < F.cell_count(); ++j)
            for (std::size_t s = 0; s < dim; ++s)
                drift[i][s] += masses[j] * F.values[i][j][s];

    std::vector<double> events(F.breakpoints.begin() + 1, F.breakpoints.end());
    for (const auto& pt : cfg.points)
        if (pt.time > 0.0 && pt.time <= F.horizon) events.push_back(pt.time);
    std::sort(events.begin(), events.end());
    events.erase(std::unique(events.begin(), events.end()), events.end());

    Vec x(dim, 0.0);
    double sup = 0.0;
    double prev = 0.0;
    std::size_t interval = 0;
    std::size_t next_point = 0;
    for (double tc : events) {
        const double len = tc - prev;
        for (std::size_t s = 0; s < dim; ++s) x[s] -= len * drift[interval][s];
        sup = std::max(sup, measure.space().norm(x)); // left limit at tc
        while (next_point < cfg.points.size() && cfg.points[next_point].time <= tc) {
            const auto& pt = cfg.points[next_point++];
            if (pt.time != tc) continue; // before (0, horizon] window start
            const std::size_t j = cell_of[pt.atom];
            if (j != static_cast<std::size_t>(-1) && B.contains(pt.atom))
                for (std::size_t s = 0; s < dim; ++s)
                    x[s] += F.values[interval][j][s];
        }
        sup = std::max(sup, measure.space().norm(x)); // path value at tc
        if (interval + 1 < F.time_intervals() && tc == F.breakpoints[interval + 1])
            ++interval;
        prev = tc;
    }
    return sup;
}

PathStatistic estimate_lhs(const DiscreteMeasure& measure, const SimpleFunction& F,
                           const CellSelector& B, double p, double t,
                           std::size_t reps, const RngStream& rng, bool use_sup) {
    if (reps < 2) throw std::domain_error("estimate_lhs: reps must be at least 2");
    if (!(p >= 1.0)) throw std::domain_error("estimate_lhs: p must be >= 1");
    PathStatistic out;
    out.p = p;
    out.per_sample.reserve(reps);
    std::vector<double> powered;
    powered.reserve(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        RngStream sub = rng.derive(r);
        const PointConfiguration cfg = sample_prm(measure, t, sub);
        double val;
        if (use_sup) {
            val = running_sup(cfg, measure, F, B);
        } else {
            val = measure.space().norm(
                compensated_integral(cfg, measure, F, B, t));
        }
        out.per_sample.push_back(val);
        powered.push_back(std::pow(val, p));
    }
    const MeanStderr ms = mean_stderr(powered);
    out.estimate = ms.mean;
    out.stderror = ms.stderror;
    return out;
}

namespace {

// Finest discretisation with cell edges aligned to the schedule so the
// level-k atom set represents lambda restricted to (delta_k, rmax] exactly.
struct AlignedGrid {
    DiscreteMeasure measure;
    std::vector<std::vector<std::size_t>> level_atoms;
};

AlignedGrid build_aligned_grid(const RadialFamily& family,
                               const TruncationSchedule& schedule,
                               std::size_t n_cells) {
    if (n_cells == 0)
        throw std::domain_error("truncation_sequence: n_cells must be positive");
    const double alpha = family.alpha();
    const std::size_t K = schedule.levels();

    // annulus boundaries, outermost first: (delta_1, rmax], (delta_2, delta_1], ...
    std::vector<std::pair<double, double>> annuli;
    std::vector<std::size_t> annulus_level; // first level containing the annulus
    double hi = family.rmax();
    for (std::size_t k = 0; k < K; ++k) {
        const double lo = std::max(schedule.deltas[k], family.rmin());
        if (lo < hi) {
            annuli.push_back({lo, hi});
            annulus_level.push_back(k);
        }
        hi = std::min(hi, schedule.deltas[k]);
    }

    std::vector<Atom> atoms;
    std::vector<std::size_t> atom_level;
    for (const auto& dir : family.directions()) {
        for (std::size_t q = 0; q < annuli.size(); ++q) {
            const auto [lo, cap] = annuli[q];
            for (std::size_t c = 0; c < n_cells; ++c) {
                const double a = lo * std::pow(cap / lo, double(c) / double(n_cells));
                const double b = lo * std::pow(cap / lo, double(c + 1) / double(n_cells));
                const double mass0 = radial_power_integral(0.0, alpha, a, b);
                if (!(mass0 > 0.0)) continue;
                const double centroid =
                    radial_power_integral(1.0, alpha, a, b) / mass0;
                Vec pos(dir.position);
                for (double& x : pos) x *= centroid;
                atoms.push_back({std::move(pos), dir.mass * mass0});
                atom_level.push_back(annulus_level[q]);
            }
        }
    }
    AlignedGrid grid{DiscreteMeasure(family.space(), std::move(atoms)), {}};
    grid.level_atoms.resize(K);
    for (std::size_t a = 0; a < atom_level.size(); ++a)
        for (std::size_t k = atom_level[a]; k < K; ++k)
            grid.level_atoms[k].push_back(a);
    return grid;
}

} // namespace

std::vector<std::vector<Vec>> nested_levels(
    const DiscreteMeasure& finest,
    const std::vector<std::vector<std::size_t>>& level_atoms, double t,
    const RngStream& rng, std::size_t reps) {
    const std::size_t K = level_atoms.size();
    const std::size_t dim = finest.space().dim;
    std::vector<std::vector<char>> keep(K, std::vector<char>(finest.size(), 0));
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t a : level_atoms[k]) keep[k][a] = 1;

    // Only terminal values are needed, so per-atom Poisson counts are drawn
    // directly and shared across levels; this is the same probability space
    // as thinning a single point configuration, and it stays cheap when atom
    // masses are large.
    // sparse atom positions keep growing-dimension families affordable
    std::vector<std::vector<std::pair<std::size_t, double>>> sparse(finest.size());
    for (std::size_t a = 0; a < finest.size(); ++a) {
        const Vec& u = finest.atoms()[a].position;
        for (std::size_t s = 0; s < dim; ++s)
            if (u[s] != 0.0) sparse[a].push_back({s, u[s]});
    }

    std::vector<std::vector<Vec>> out(K);
    for (auto& lvl : out) lvl.reserve(reps);
    std::vector<double> centred(finest.size());
    std::vector<KahanSum> acc(dim);
    for (std::size_t r = 0; r < reps; ++r) {
        RngStream sub = rng.derive(r);
        for (std::size_t a = 0; a < finest.size(); ++a) {
            const double mean = t * finest.atoms()[a].mass;
            centred[a] = static_cast<double>(sub.poisson(mean)) - mean;
        }
        for (std::size_t k = 0; k < K; ++k) {
            std::fill(acc.begin(), acc.end(), KahanSum{});
            for (std::size_t a = 0; a < finest.size(); ++a) {
                if (!keep[k][a]) continue;
                for (const auto& [s, v] : sparse[a]) acc[s].add(centred[a] * v);
            }
            Vec x(dim);
            for (std::size_t s = 0; s < dim; ++s) x[s] = acc[s].value();
            out[k].push_back(std::move(x));
        }
    }
    return out;
}

TruncationSamples truncation_sequence(const RadialFamily& family,
                                      const TruncationSchedule& schedule,
                                      std::size_t n_cells, double t,
                                      const RngStream& rng, std::size_t reps,
                                      bool coupled) {
    AlignedGrid grid = build_aligned_grid(family, schedule, n_cells);
    TruncationSamples out{schedule.deltas, family.space(), {}};
    if (coupled) {
        out.samples = nested_levels(grid.measure, grid.level_atoms, t, rng, reps);
        return out;
    }
    const std::size_t K = schedule.levels();
    out.samples.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        std::vector<std::vector<std::size_t>> one_level{grid.level_atoms[k]};
        out.samples[k] =
            nested_levels(grid.measure, one_level, t, rng.derive(k + 1), reps)[0];
    }
    return out;
}

std::vector<CauchyEntry> cauchy_statistic(const TruncationSamples& samples,
                                          double p) {
    const std::size_t K = samples.samples.size();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t k = 0; k + 1 < K; ++k) pairs.push_back({k, k + 1});
    if (K > 2) pairs.push_back({0, K - 1});
    std::vector<CauchyEntry> out;
    for (auto [k, j] : pairs) {
        const auto& xs = samples.samples[k];
        const auto& ys = samples.samples[j];
        std::vector<double> powered;
        powered.reserve(xs.size());
        for (std::size_t r = 0; r < xs.size(); ++r) {
            Vec diff(xs[r].size());
            for (std::size_t s = 0; s < diff.size(); ++s)
                diff[s] = xs[r][s] - ys[r][s];
            powered.push_back(std::pow(samples.space.norm(diff), p));
        }
        const MeanStderr ms = mean_stderr(powered);
        out.push_back({k, j, ms.mean, ms.stderror});
    }
    return out;
}

L1BoundResult l1_bound(const DiscreteMeasure& measure, const SimpleFunction& F,
                       const CellSelector& B, double t, std::size_t reps,
                       const RngStream& rng) {
    L1BoundResult out;
    KahanSum rhs;
    const auto masses = intersected_cell_masses(measure, F, B);
    for (std::size_t i = 0; i < F.time_intervals(); ++i) {
        const double len = std::max(
            0.0, std::min(t, F.breakpoints[i + 1]) - std::min(t, F.breakpoints[i]));
        for (std::size_t j = 0; j < F.cell_count(); ++j)
            rhs.add(len * masses[j] * measure.space().norm(F.values[i][j]));
    }
    out.rhs_exact = 2.0 * rhs.value();

    const PathStatistic stat = estimate_lhs(measure, F, B, 1.0, t, reps, rng,
                                            /*use_sup=*/false);
    out.lhs_estimate = stat.estimate;
    out.lhs_stderr = stat.stderror;
    return out;
}

} // namespace levylab
