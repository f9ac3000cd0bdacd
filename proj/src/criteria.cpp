#include "levylab/criteria.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

#include "levylab/stats.hpp"

namespace levylab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_radial(const AnyMeasure& m) {
    return std::holds_alternative<RadialFamily>(m);
}

} // namespace

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Levy: return "Levy";
        case Verdict::NotLevy: return "NotLevy";
        case Verdict::SufficientOnly: return "SufficientOnly";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

std::string CheckReport::to_json() const {
    nlohmann::json j;
    j["verdict"] = verdict_name(verdict);
    nlohmann::json q = nlohmann::json::object();
    for (const auto& [name, value] : quantities) q[name] = value;
    j["quantities"] = q;
    nlohmann::json tails = nlohmann::json::array();
    for (const auto& t : tail_mass_by_radius)
        tails.push_back({{"r", t.radius}, {"mass", t.mass}, {"finite", t.finite}});
    j["tailMassByRadius"] = tails;
    j["notes"] = notes;
    return j.dump(2);
}

std::vector<TailMassEntry> check_tail_finiteness(const AnyMeasure& measure,
                                                 const std::vector<double>& radii) {
    std::vector<TailMassEntry> out;
    for (double r : radii) {
        if (!(r > 0.0)) throw std::domain_error("check_tail_finiteness: radius must be positive");
        TailMassEntry e;
        e.radius = r;
        if (is_radial(measure)) {
            const auto& fam = std::get<RadialFamily>(measure);
            e.mass = r >= fam.rmax() ? 0.0 : fam.tail_mass(r);
        } else {
            e.mass = std::get<DiscreteMeasure>(measure).ball_mass(r, RestrictSide::Outside);
        }
        e.finite = std::isfinite(e.mass);
        out.push_back(e);
    }
    return out;
}

CheckReport check_hilbert(const AnyMeasure& measure) {
    if (measure_space(measure).p != 2.0)
        throw std::domain_error("check_hilbert: requires a p = 2 model space");
    CheckReport report;
    report.tail_mass_by_radius = check_tail_finiteness(measure, {1.0, 0.5, 0.1});

    double inside_sq = 0.0;
    double tail1 = 0.0;
    if (is_radial(measure)) {
        const auto& fam = std::get<RadialFamily>(measure);
        inside_sq = fam.radial_moment(2.0, 0.0, 1.0);
        tail1 = 1.0 >= fam.rmax() ? 0.0 : fam.tail_mass(1.0);
        report.notes.push_back("radial family: closed-form moments");
    } else {
        const auto& dm = std::get<DiscreteMeasure>(measure);
        for (const auto& a : dm.atoms()) {
            const double n = dm.space().norm(a.position);
            if (n <= 1.0)
                inside_sq += a.mass * n * n;
            else
                tail1 += a.mass;
        }
        report.notes.push_back("finite discrete measure: exact sums");
    }
    report.quantities["square_integral_inside"] = inside_sq;
    report.quantities["tail_mass_1"] = tail1;
    report.quantities["criterion_integral"] = inside_sq + tail1;
    report.verdict = std::isfinite(inside_sq) && std::isfinite(tail1)
                         ? Verdict::Levy
                         : Verdict::NotLevy;
    return report;
}

TrendVerdict classify_truncation_trend(const std::vector<double>& deltas,
                                       const std::vector<double>& values,
                                       std::uint64_t bootstrap_seed) {
    if (deltas.size() != values.size() || deltas.size() < 3)
        throw std::domain_error("classify_truncation_trend: need >= 3 levels");
    TrendVerdict out;

    // ratio test on the (nonnegative) level increments
    double max_ratio = 0.0;
    bool any_increment = false;
    for (std::size_t k = 2; k < values.size(); ++k) {
        const double prev = values[k - 1] - values[k - 2];
        const double cur = values[k] - values[k - 1];
        if (prev > 0.0) {
            max_ratio = std::max(max_ratio, cur / prev);
            any_increment = true;
        } else if (cur > 0.0) {
            max_ratio = kInf;
            any_increment = true;
        }
    }
    out.increment_ratio = any_increment ? max_ratio : 0.0;
    if (!any_increment || max_ratio < 0.95) {
        out.verdict = Verdict::Levy; // summable-consistent increments
        return out;
    }

    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        if (values[k] <= 0.0) continue;
        lx.push_back(std::log(1.0 / deltas[k]));
        ly.push_back(std::log(values[k]));
    }
    if (lx.size() < 3) {
        out.verdict = Verdict::Inconclusive;
        return out;
    }
    const SlopeFit fit = fit_slope(lx, ly, RngStream(bootstrap_seed));
    out.slope = fit.slope;
    out.slope_ci_lo = fit.ci_lo;
    out.slope_ci_hi = fit.ci_hi;
    if (fit.ci_lo > 0.0)
        out.verdict = Verdict::NotLevy; // confidently diverging
    else
        out.verdict = Verdict::Inconclusive; // CI overlaps zero
    return out;
}

namespace {

// the two criterion integrals of the sharp p >= 2 test on the inside-ball
// restriction of a radial family truncated at delta
void radial_sharp_quantities(const RadialFamily& fam, double p, double delta,
                             double* s_integral, double* d_integral) {
    const auto& space = fam.space();
    const double i2 = radial_power_integral(2.0, fam.alpha(),
                                            std::max(delta, fam.rmin()),
                                            std::min(1.0, fam.rmax()));
    const double ip = radial_power_integral(p, fam.alpha(),
                                            std::max(delta, fam.rmin()),
                                            std::min(1.0, fam.rmax()));
    double s_acc = 0.0;
    for (std::size_t s = 0; s < space.dim; ++s) {
        double q = 0.0;
        for (const auto& dir : fam.directions())
            q += dir.mass * dir.position[s] * dir.position[s] * i2;
        s_acc += std::pow(q, 0.5 * p) * space.weight(s);
    }
    *s_integral = s_acc;
    *d_integral = fam.direction_weight_total() * ip; // ||r dir||^p = r^p
}

void attach_trend(CheckReport& report, const TrendVerdict& trend) {
    report.quantities["trend_slope"] = trend.slope;
    report.quantities["trend_slope_ci_lo"] = trend.slope_ci_lo;
    report.quantities["trend_slope_ci_hi"] = trend.slope_ci_hi;
    report.quantities["trend_increment_ratio"] = trend.increment_ratio;
    if (trend.verdict == Verdict::Inconclusive)
        report.notes.push_back("truncation trend slope CI overlaps 0: flagged inconclusive");
}

} // namespace

CheckReport check_lp_ge2(const AnyMeasure& measure, double p,
                         const CriteriaConfig& cfg) {
    if (p < 2.0) throw std::domain_error("check_lp_ge2: requires p >= 2");
    CheckReport report;
    report.tail_mass_by_radius = check_tail_finiteness(measure, {1.0, 0.5, 0.1});

    if (!is_radial(measure)) {
        const auto& dm = std::get<DiscreteMeasure>(measure);
        const auto inside = dm.restrict(1.0, RestrictSide::Inside);
        const auto G = SimpleFunction::identity_inside_ball(inside);
        const double s_int = std::pow(s_norm(inside, G, p), p);
        const double d_int = std::pow(d_norm(inside, G, p), p);
        report.quantities["s_integral"] = s_int;
        report.quantities["d_integral"] = d_int;
        report.quantities["criterion_max"] = std::max(s_int, d_int);
        report.verdict = Verdict::Levy; // finite measure, both sums finite
        report.notes.push_back("finite discrete measure: exact sums");
        return report;
    }

    const auto& fam = std::get<RadialFamily>(measure);
    std::vector<double> level_values;
    for (double delta : cfg.schedule.deltas) {
        double s_int = 0.0, d_int = 0.0;
        radial_sharp_quantities(fam, p, delta, &s_int, &d_int);
        level_values.push_back(std::max(s_int, d_int));
    }
    double s_full = 0.0, d_full = 0.0;
    radial_sharp_quantities(fam, p, 0.0, &s_full, &d_full);
    report.quantities["s_integral"] = s_full;
    report.quantities["d_integral"] = d_full;
    report.quantities["criterion_max"] = std::max(s_full, d_full);

    if (std::isfinite(s_full) && std::isfinite(d_full)) {
        report.verdict = Verdict::Levy;
        report.notes.push_back("closed-form criterion integrals finite");
        return report;
    }
    const auto trend = classify_truncation_trend(cfg.schedule.deltas, level_values,
                                                 cfg.bootstrap_seed);
    attach_trend(report, trend);
    report.verdict = trend.verdict;
    return report;
}

CheckReport check_lp_lt2(const AnyMeasure& measure, double p,
                         const CriteriaConfig& cfg) {
    if (!(p > 1.0) || p >= 2.0)
        throw std::domain_error("check_lp_lt2: requires p in (1,2)");
    CheckReport report;
    report.tail_mass_by_radius = check_tail_finiteness(measure, {1.0, 0.5, 0.1});

    if (!is_radial(measure)) {
        const auto& dm = std::get<DiscreteMeasure>(measure);
        const auto inside = dm.restrict(1.0, RestrictSide::Inside);
        const auto G = SimpleFunction::identity_inside_ball(inside);
        const auto sum = ip_norm_sum(inside, G, p, cfg.solver);
        report.quantities["inf_convolution_norm"] = sum.value;
        report.quantities["solver_residual"] = sum.residual;
        if (!sum.converged)
            report.notes.push_back("inf-convolution solver unconverged; best value reported");
        report.verdict = Verdict::Levy; // finite measure
        return report;
    }

    const auto& fam = std::get<RadialFamily>(measure);
    const auto inside = fam.rmax() > 1.0 ? fam.restrict(1.0, RestrictSide::Inside) : fam;
    std::vector<double> level_values;
    bool all_converged = true;
    for (double delta : cfg.schedule.deltas) {
        if (delta >= inside.rmax()) {
            level_values.push_back(0.0);
            continue;
        }
        const auto level = inside.materialise(delta, cfg.radial_cells);
        const auto G = SimpleFunction::identity_inside_ball(level);
        const auto sum = ip_norm_sum(level, G, p, cfg.solver);
        all_converged = all_converged && sum.converged;
        level_values.push_back(std::pow(sum.value, p));
    }
    report.quantities["inf_convolution_norm_p_finest"] = level_values.back();
    if (!all_converged)
        report.notes.push_back("inf-convolution solver unconverged at some level");
    const auto trend = classify_truncation_trend(cfg.schedule.deltas, level_values,
                                                 cfg.bootstrap_seed);
    attach_trend(report, trend);
    report.verdict = all_converged ? trend.verdict : Verdict::Inconclusive;
    return report;
}

CheckReport check_scalar_projection(const AnyMeasure& measure, const Vec& dual) {
    CheckReport report;
    const auto& space = measure_space(measure);
    if (dual.size() != space.dim)
        throw std::domain_error("check_scalar_projection: dual dimension mismatch");
    double integral = 0.0;
    if (is_radial(measure)) {
        const auto& fam = std::get<RadialFamily>(measure);
        for (const auto& dir : fam.directions()) {
            const double c = space.pairing(dir.position, dual);
            if (c == 0.0) continue;
            const double r0 = 1.0 / std::fabs(c);
            const double split = std::min(r0, fam.rmax());
            double part = c * c *
                          radial_power_integral(2.0, fam.alpha(), fam.rmin(), split);
            if (split < fam.rmax())
                part += radial_power_integral(0.0, fam.alpha(), split, fam.rmax());
            integral += dir.mass * part;
        }
    } else {
        const auto& dm = std::get<DiscreteMeasure>(measure);
        for (const auto& a : dm.atoms()) {
            const double c = space.pairing(a.position, dual);
            integral += a.mass * std::min(c * c, 1.0);
        }
    }
    report.quantities["projected_criterion_integral"] = integral;
    report.verdict = std::isfinite(integral) ? Verdict::Levy : Verdict::NotLevy;
    return report;
}

CheckReport check_type_sufficient(const AnyMeasure& measure, double p) {
    if (!(p > 1.0) || p > 2.0)
        throw std::domain_error("check_type_sufficient: requires p in (1,2]");
    CheckReport report;
    report.tail_mass_by_radius = check_tail_finiteness(measure, {1.0});
    double integral = 0.0;
    if (is_radial(measure)) {
        const auto& fam = std::get<RadialFamily>(measure);
        integral = fam.radial_moment(p, 0.0, 1.0);
        if (fam.rmax() > 1.0) integral += fam.tail_mass(1.0);
    } else {
        const auto& dm = std::get<DiscreteMeasure>(measure);
        for (const auto& a : dm.atoms())
            integral += a.mass * std::min(std::pow(dm.space().norm(a.position), p), 1.0);
    }
    report.quantities["type_p_integral"] = integral;
    if (std::isfinite(integral)) {
        report.verdict = Verdict::SufficientOnly;
        report.notes.push_back("sufficient condition holds; sharp test not run here");
    } else {
        report.verdict = Verdict::Inconclusive;
        report.notes.push_back("sufficient condition fails; no conclusion (condition is not necessary)");
    }
    return report;
}

ScalarIntegrability scalar_integrability(const DiscreteMeasure& measure,
                                         const ScalarSimpleFunction& F) {
    ScalarIntegrability out;
    KahanSum n_int, comp_int;
    for (std::size_t i = 0; i + 1 < F.breakpoints.size(); ++i) {
        const double dt = F.breakpoints[i + 1] - F.breakpoints[i];
        for (std::size_t j = 0; j < F.cells.size(); ++j) {
            double mass = 0.0;
            for (std::size_t a : F.cells[j]) mass += measure.atoms()[a].mass;
            const double v = std::fabs(F.values[i][j]);
            n_int.add(dt * mass * std::min(v, 1.0));
            comp_int.add(dt * mass * std::min(v, v * v));
        }
    }
    out.n_integral = n_int.value();
    out.compensated_integral = comp_int.value();
    out.n_integrable = std::isfinite(out.n_integral);
    out.compensated_integrable = std::isfinite(out.compensated_integral);
    return out;
}

ScalarIntegrability scalar_integrability_radial(const RadialFamily& family,
                                                double exponent, double t) {
    if (!(exponent > 0.0))
        throw std::domain_error("scalar_integrability_radial: exponent must be positive");
    if (!(t > 0.0)) throw std::domain_error("scalar_integrability_radial: t must be positive");
    const double q = exponent;
    const double alpha = family.alpha();
    const double rmin = family.rmin(), rmax = family.rmax();
    const double w = family.direction_weight_total();
    const double split = std::min(1.0, rmax);

    // |F| and 1: r^q below 1, the constant 1 above
    double n_int = radial_power_integral(q, alpha, rmin, split);
    if (rmax > 1.0)
        n_int += radial_power_integral(0.0, alpha, std::max(1.0, rmin), rmax);

    // |F| and |F|^2: r^{2q} below 1, r^q above
    double comp_int = radial_power_integral(2.0 * q, alpha, rmin, split);
    if (rmax > 1.0)
        comp_int += radial_power_integral(q, alpha, std::max(1.0, rmin), rmax);

    ScalarIntegrability out;
    out.n_integral = t * w * n_int;
    out.compensated_integral = t * w * comp_int;
    out.n_integrable = std::isfinite(out.n_integral);
    out.compensated_integrable = std::isfinite(out.compensated_integral);
    return out;
}

DiscreteMeasure divergent_s_series_measure(std::size_t K, double p) {
    if (K == 0) throw std::domain_error("divergent_s_series_measure: K must be positive");
    std::vector<Atom> atoms;
    atoms.reserve(K);
    for (std::size_t k = 1; k <= K; ++k) {
        const double c = std::pow(static_cast<double>(k), -2.0);
        const double w = std::pow(static_cast<double>(k), -2.0 / p) / (c * c);
        Vec u(K, 0.0);
        u[k - 1] = c;
        atoms.push_back({std::move(u), w});
    }
    return DiscreteMeasure(ModelSpace::sequence(K, p), std::move(atoms));
}

} // namespace levylab
