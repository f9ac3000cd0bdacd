#include "levylab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "levylab/gamma.hpp"
#include "levylab/prm.hpp"
#include "levylab/stats.hpp"

namespace levylab {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t x) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::runtime_error("config: " + msg);
}

// random simple function used by the Novikov and L1 campaigns: 1-3 time
// intervals, atoms grouped into random cells, Gaussian values
SimpleFunction random_simple_function(const DiscreteMeasure& measure,
                                      RngStream& rng,
                                      std::size_t max_intervals = 3) {
    const std::size_t dim = measure.space().dim;
    const std::size_t m =
        1 + static_cast<std::size_t>(rng.uniform() * double(max_intervals));
    std::vector<double> bps{0.0};
    for (std::size_t i = 1; i < m; ++i) bps.push_back(rng.uniform());
    bps.push_back(1.0);
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());

    const std::size_t n_groups =
        1 + static_cast<std::size_t>(rng.uniform() * 4.0);
    std::vector<std::vector<std::size_t>> cells(n_groups);
    for (std::size_t a = 0; a < measure.size(); ++a)
        cells[static_cast<std::size_t>(rng.uniform() * double(n_groups)) %
              n_groups]
            .push_back(a);
    cells.erase(std::remove_if(cells.begin(), cells.end(),
                               [](const auto& c) { return c.empty(); }),
                cells.end());

    std::vector<std::vector<Vec>> values(bps.size() - 1,
                                         std::vector<Vec>(cells.size()));
    for (auto& row : values)
        for (auto& v : row) {
            v.resize(dim);
            for (double& x : v) x = rng.gaussian();
        }
    return SimpleFunction(1.0, std::move(bps), std::move(cells),
                          std::move(values));
}

bool is_zero_function(const SimpleFunction& F) {
    for (const auto& row : F.values)
        for (const auto& v : row)
            for (double x : v)
                if (x != 0.0) return false;
    return true;
}

void add_report(ResultRecord& record, const std::string& prefix,
                const CheckReport& report) {
    record.verdicts[prefix] = verdict_name(report.verdict);
    for (const auto& [name, value] : report.quantities)
        record.metrics.push_back({prefix + "." + name, 0.0, value, 0.0});
    for (const auto& entry : report.tail_mass_by_radius)
        record.metrics.push_back(
            {prefix + ".tail_mass", entry.radius, entry.mass, 0.0});
    for (const auto& note : report.notes) record.notes.push_back(prefix + ": " + note);
}

} // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path,
                                        std::optional<std::uint64_t> seed_override,
                                        const std::string& out_override) {
    TomlDoc doc = load_toml_file(path);
    ExperimentConfig cfg;
    cfg.experiment = doc.get_string("", "experiment", "experiment");
    cfg.measure_path = doc.get_string("", "measure", "");
    cfg.measure_json = doc.get_string("", "measure_json", "");
    cfg.family = doc.get_string("", "family", "radial");
    cfg.p = doc.get_double("", "p", 2.0);
    cfg.horizon = doc.get_double("", "t", doc.get_double("", "horizon", 1.0));
    if (doc.has("", "schedule")) cfg.schedule = doc.at("", "schedule").as_double_array();
    if (doc.has("", "series_dims"))
        for (const auto& item :
             std::get<std::vector<TomlValue>>(doc.at("", "series_dims").data))
            cfg.series_dims.push_back(item.as_int());
    cfg.reps = static_cast<std::size_t>(doc.get_int("", "reps", 1000));
    cfg.n_gauss = static_cast<std::size_t>(doc.get_int("", "n_gauss", 200));
    cfg.instances = static_cast<std::size_t>(doc.get_int("", "instances", 20));
    cfg.radial_cells = static_cast<std::size_t>(doc.get_int("", "radial_cells", 24));
    cfg.n_duals = static_cast<std::size_t>(doc.get_int("", "n_duals", 5));
    cfg.use_sup = doc.get_bool("", "use_sup", false);
    cfg.solver.tol = doc.get_double("solver", "tol", cfg.solver.tol);
    cfg.solver.max_iter = static_cast<std::size_t>(
        doc.get_int("solver", "max_iter", static_cast<std::int64_t>(cfg.solver.max_iter)));
    cfg.solver.step_rule = doc.get_string("solver", "step_rule", cfg.solver.step_rule);

    if (seed_override) {
        cfg.seed = *seed_override;
    } else {
        require(doc.has("", "seed"), "seed is mandatory");
        cfg.seed = static_cast<std::uint64_t>(doc.at("", "seed").as_int());
    }
    cfg.out_dir = !out_override.empty() ? out_override
                                        : doc.get_string("", "out", ".");

    require(cfg.p > 1.0, "p must be greater than 1");
    require(cfg.horizon > 0.0, "t must be positive");
    for (std::size_t i = 0; i + 1 < cfg.schedule.size(); ++i)
        require(cfg.schedule[i] > cfg.schedule[i + 1],
                "schedule must be strictly decreasing");
    for (double d : cfg.schedule) require(d > 0.0, "schedule must be positive");
    if (!cfg.measure_path.empty()) {
        // resolve relative to the config file
        std::filesystem::path mp(cfg.measure_path);
        if (mp.is_relative())
            mp = std::filesystem::path(path).parent_path() / mp;
        require(std::filesystem::exists(mp),
                "measure file not found: " + mp.string());
        cfg.measure_path = mp.string();
    }

    // canonicalised hash: effective seed folded in, plumbing keys excluded
    TomlDoc canon = doc;
    canon.sections[""]["seed"] =
        TomlValue{static_cast<std::int64_t>(cfg.seed)};
    canon.sections[""].erase("out");
    cfg.config_hash = hex64(fnv1a(canon.canonical()));
    return cfg;
}

AnyMeasure ExperimentConfig::load_measure() const {
    if (!measure_path.empty()) return load_measure_file(measure_path);
    if (!measure_json.empty()) return measure_from_json(measure_json);
    throw std::runtime_error("config: no measure given");
}

DiscreteMeasure ExperimentConfig::finite_measure() const {
    AnyMeasure m = load_measure();
    if (std::holds_alternative<DiscreteMeasure>(m))
        return std::get<DiscreteMeasure>(m);
    const RadialFamily& fam = std::get<RadialFamily>(m);
    const double delta = !schedule.empty() ? schedule.back() : 0.00390625;
    return fam.materialise(delta, radial_cells);
}

CriteriaConfig ExperimentConfig::criteria() const {
    CriteriaConfig out;
    if (!schedule.empty()) out.schedule = TruncationSchedule(schedule);
    out.radial_cells = radial_cells;
    out.solver = solver;
    out.bootstrap_seed = mix64(seed ^ 0x5eedb001ULL);
    return out;
}

bool ResultRecord::inconclusive() const {
    for (const auto& [key, value] : verdicts)
        if (value == "Inconclusive" || value == "Flat") return true;
    return false;
}

void write_csv(const std::string& path, const ResultRecord& record) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "experiment,config_hash,metric,level,estimate,stderr\n";
    for (const auto& row : record.metrics)
        out << record.experiment << ',' << record.config_hash << ','
            << row.metric << ',' << fmt_double(row.level) << ','
            << fmt_double(row.estimate) << ',' << fmt_double(row.stderror)
            << '\n';
}

void write_json_summary(const std::string& path, const ResultRecord& record) {
    nlohmann::json j;
    j["experiment"] = record.experiment;
    j["config_hash"] = record.config_hash;
    j["verdicts"] = record.verdicts;
    j["notes"] = record.notes;
    j["wall_ms"] = record.wall_ms;
    nlohmann::json metrics = nlohmann::json::array();
    for (const auto& row : record.metrics)
        metrics.push_back({{"metric", row.metric},
                           {"level", row.level},
                           {"estimate", row.estimate},
                           {"stderr", row.stderror}});
    j["metrics"] = metrics;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

ResultRecord run_check(const ExperimentConfig& cfg) {
    ResultRecord record{cfg.experiment, cfg.config_hash, {}, {}, {}, 0.0};
    const AnyMeasure m = cfg.load_measure();
    const double p = measure_space(m).p;
    add_report(record, "tail",
               CheckReport{Verdict::Levy, {}, check_tail_finiteness(m, {0.5, 1.0, 2.0}), {}});
    if (p == 2.0) add_report(record, "hilbert", check_hilbert(m));
    if (p >= 2.0)
        add_report(record, "sharp_ge2", check_lp_ge2(m, p, cfg.criteria()));
    else
        add_report(record, "sharp_lt2", check_lp_lt2(m, p, cfg.criteria()));
    if (p <= 2.0)
        add_report(record, "type_sufficient", check_type_sufficient(m, p));
    record.verdicts["overall"] =
        record.verdicts.count(p >= 2.0 ? "sharp_ge2" : "sharp_lt2")
            ? record.verdicts[p >= 2.0 ? "sharp_ge2" : "sharp_lt2"]
            : "Inconclusive";
    return record;
}

ResultRecord run_simulate(const ExperimentConfig& cfg) {
    ResultRecord record{cfg.experiment, cfg.config_hash, {}, {}, {}, 0.0};
    const DiscreteMeasure m = cfg.finite_measure();
    const SimpleFunction F = SimpleFunction::identity_inside_ball(m, cfg.horizon);
    const CellSelector B = CellSelector::all(m);
    const RngStream root(cfg.seed);

    const PathStatistic sup_stat = estimate_lhs(
        m, F, B, cfg.p, cfg.horizon, cfg.reps, root.derive("simulate"), true);
    for (std::size_t r = 0; r < sup_stat.per_sample.size(); ++r)
        record.metrics.push_back(
            {"running_sup", double(r), sup_stat.per_sample[r], 0.0});
    record.metrics.push_back(
        {"lhs_pth_moment", 0.0, sup_stat.estimate, sup_stat.stderror});

    const L1BoundResult l1 =
        l1_bound(m, F, B, cfg.horizon, cfg.reps, root.derive("l1"));
    record.metrics.push_back({"l1_lhs", 0.0, l1.lhs_estimate, l1.lhs_stderr});
    record.metrics.push_back({"l1_rhs", 0.0, l1.rhs_exact, 0.0});
    record.verdicts["l1_bound"] =
        l1.lhs_estimate <= l1.rhs_exact + 3.0 * l1.lhs_stderr ? "Holds"
                                                              : "Violated";
    return record;
}

ResultRecord run_novikov(const ExperimentConfig& cfg) {
    ResultRecord record{cfg.experiment, cfg.config_hash, {}, {}, {}, 0.0};
    const DiscreteMeasure m = cfg.finite_measure();
    const CellSelector B = CellSelector::all(m);
    const RngStream root(cfg.seed);
    std::vector<double> ratios;
    for (std::size_t i = 0; i < cfg.instances; ++i) {
        RngStream inst = root.derive("novikov").derive(i);
        RngStream gen = inst.derive("gen");
        const SimpleFunction F = random_simple_function(m, gen);
        if (is_zero_function(F)) {
            record.notes.push_back("instance " + std::to_string(i) +
                                   " degenerate, excluded");
            continue;
        }
        const PathStatistic lhs = estimate_lhs(m, F, B, cfg.p, cfg.horizon,
                                               cfg.reps, inst.derive("mc"), true);
        const double lhs_root = std::pow(lhs.estimate, 1.0 / cfg.p);
        double rhs;
        if (cfg.p >= 2.0) {
            rhs = ip_norm_max(m, F, cfg.p);
        } else {
            const IpSumResult sol = ip_norm_sum(m, F, cfg.p, cfg.solver);
            if (!sol.converged) {
                record.notes.push_back("instance " + std::to_string(i) +
                                       " solver not converged, excluded");
                continue;
            }
            rhs = sol.value;
        }
        if (rhs == 0.0) {
            record.notes.push_back("instance " + std::to_string(i) +
                                   " zero norm, excluded");
            continue;
        }
        const double ratio = lhs_root / rhs;
        ratios.push_back(ratio);
        record.metrics.push_back({"ratio", double(i), ratio, 0.0});
    }
    if (!ratios.empty()) {
        std::vector<double> sorted = ratios;
        std::sort(sorted.begin(), sorted.end());
        record.metrics.push_back({"ratio_min", 0.0, sorted.front(), 0.0});
        record.metrics.push_back(
            {"ratio_median", 0.0, sorted[sorted.size() / 2], 0.0});
        record.metrics.push_back({"ratio_max", 0.0, sorted.back(), 0.0});
        const double band =
            std::max(sorted.back(), 1.0 / sorted.front());
        record.metrics.push_back({"band_constant", 0.0, band, 0.0});
        record.verdicts["band"] = band <= 10.0 ? "WithinBand" : "OutsideBand";
    } else {
        record.verdicts["band"] = "Inconclusive";
    }
    return record;
}

ResultRecord run_umd(const ExperimentConfig& cfg) {
    ResultRecord record{cfg.experiment, cfg.config_hash, {}, {}, {}, 0.0};
    const DiscreteMeasure m = cfg.finite_measure();
    const SimpleFunction F = SimpleFunction::identity_inside_ball(m, cfg.horizon);
    const CellSelector B = CellSelector::all(m);
    const UmdConfig ucfg{cfg.reps, cfg.n_gauss, cfg.use_sup};
    const UmdReport report = umd_equivalence_check(m, F, B, cfg.p, cfg.horizon,
                                                   ucfg, RngStream(cfg.seed));
    record.metrics.push_back({"lhs", 0.0, report.lhs, report.lhs_stderr});
    record.metrics.push_back({"rhs", 0.0, report.rhs, report.rhs_stderr});
    record.metrics.push_back({"ratio", 0.0, report.ratio, report.ratio_stderr});
    record.verdicts["umd"] = report.degenerate ? "Degenerate" : "Completed";
    return record;
}

ResultRecord run_gamma_norm(const ExperimentConfig& cfg) {
    ResultRecord record{cfg.experiment, cfg.config_hash, {}, {}, {}, 0.0};
    const DiscreteMeasure m = cfg.finite_measure();
    const SimpleFunction F = SimpleFunction::identity_inside_ball(m, cfg.horizon);
    const CellSelector B = CellSelector::all(m);
    const McEstimate est = estimate_expected_gamma_norm(
        m, F, B, cfg.p, cfg.horizon, cfg.reps, cfg.n_gauss, RngStream(cfg.seed));
    record.metrics.push_back(
        {"expected_gamma_norm_p", 0.0, est.estimate, est.stderror});
    if (m.space().p == 2.0 && cfg.p == 2.0) {
        KahanSum campbell;
        for (const auto& atom : m.atoms()) {
            if (m.space().norm(atom.position) > 1.0) continue;
            const double nrm = m.space().norm(atom.position);
            campbell.add(atom.mass * nrm * nrm);
        }
        record.metrics.push_back(
            {"campbell_exact", 0.0, cfg.horizon * campbell.value(), 0.0});
    }
    record.verdicts["gamma_norm"] = "Completed";
    return record;
}

namespace {

void classify_cauchy(ResultRecord& record, const std::vector<double>& xs,
                     const std::vector<double>& ys_raw, std::uint64_t seed) {
    bool all_zero = true;
    for (double y : ys_raw)
        if (y > 1e-14) all_zero = false;
    if (all_zero) {
        record.verdicts["trend"] = "FlatConverged";
        return;
    }
    std::vector<double> ys;
    for (double y : ys_raw) ys.push_back(std::log(std::max(y, 1e-300)));
    const SlopeFit fit = fit_slope(xs, ys, RngStream(seed));
    record.metrics.push_back({"slope", 0.0, fit.slope, 0.0});
    record.metrics.push_back({"slope_ci_lo", 0.0, fit.ci_lo, 0.0});
    record.metrics.push_back({"slope_ci_hi", 0.0, fit.ci_hi, 0.0});
    if (fit.ci_hi < 0.0)
        record.verdicts["trend"] = "Converging";
    else if (fit.ci_lo > 0.0)
        record.verdicts["trend"] = "Diverging";
    else
        record.verdicts["trend"] = "Flat";
}

} // namespace

ResultRecord run_converge(const ExperimentConfig& cfg) {
    ResultRecord record{cfg.experiment, cfg.config_hash, {}, {}, {}, 0.0};
    const RngStream root(cfg.seed);

    if (cfg.family == "series") {
        std::vector<std::int64_t> dims = cfg.series_dims;
        if (dims.empty())
            dims = {16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
        const std::size_t kmax = static_cast<std::size_t>(
            *std::max_element(dims.begin(), dims.end()));
        const DiscreteMeasure finest = divergent_s_series_measure(kmax, cfg.p);
        std::vector<std::vector<std::size_t>> level_atoms;
        for (std::int64_t d : dims) {
            std::vector<std::size_t> atoms(static_cast<std::size_t>(d));
            for (std::size_t a = 0; a < atoms.size(); ++a) atoms[a] = a;
            level_atoms.push_back(std::move(atoms));
        }
        TruncationSamples samples{{}, finest.space(), {}};
        for (std::int64_t d : dims) samples.deltas.push_back(1.0 / double(d));
        samples.samples = nested_levels(finest, level_atoms, cfg.horizon,
                                        root.derive("series"), cfg.reps);
        const auto entries = cauchy_statistic(samples, cfg.p);
        std::vector<double> xs, ys;
        for (const auto& e : entries) {
            record.metrics.push_back(
                {"cauchy." + std::to_string(e.k) + "-" + std::to_string(e.j),
                 double(dims[e.j]), e.estimate, e.stderror});
            if (e.j == e.k + 1) {
                xs.push_back(std::log(double(dims[e.j])));
                ys.push_back(e.estimate);
            }
        }
        classify_cauchy(record, xs, ys, mix64(cfg.seed ^ 0xca0c4ULL));
        return record;
    }

    const AnyMeasure m = cfg.load_measure();
    if (!std::holds_alternative<RadialFamily>(m))
        throw std::runtime_error("converge: a radial family measure is required");
    const TruncationSchedule schedule =
        !cfg.schedule.empty() ? TruncationSchedule(cfg.schedule)
                              : CriteriaConfig{}.schedule;
    const TruncationSamples samples =
        truncation_sequence(std::get<RadialFamily>(m), schedule, cfg.radial_cells,
                            cfg.horizon, root.derive("converge"), cfg.reps, true);
    const auto entries = cauchy_statistic(samples, cfg.p);
    std::vector<double> xs, ys;
    for (const auto& e : entries) {
        record.metrics.push_back(
            {"cauchy." + std::to_string(e.k) + "-" + std::to_string(e.j),
             schedule.deltas[e.j], e.estimate, e.stderror});
        if (e.j == e.k + 1) {
            xs.push_back(std::log(1.0 / schedule.deltas[e.j]));
            ys.push_back(e.estimate);
        }
    }
    classify_cauchy(record, xs, ys, mix64(cfg.seed ^ 0xca0c4ULL));
    return record;
}

ResultRecord run_criteria_matrix(const ExperimentConfig& cfg) {
    ResultRecord record{cfg.experiment, cfg.config_hash, {}, {}, {}, 0.0};
    const AnyMeasure m = cfg.load_measure();
    const double p = measure_space(m).p;

    add_report(record, "tail",
               CheckReport{Verdict::Levy, {}, check_tail_finiteness(m, {0.5, 1.0, 2.0}), {}});
    const std::string sharp_key = p >= 2.0 ? "sharp_ge2" : "sharp_lt2";
    if (p >= 2.0)
        add_report(record, sharp_key, check_lp_ge2(m, p, cfg.criteria()));
    else
        add_report(record, sharp_key, check_lp_lt2(m, p, cfg.criteria()));
    if (p == 2.0) add_report(record, "hilbert", check_hilbert(m));
    if (p <= 2.0)
        add_report(record, "type_sufficient", check_type_sufficient(m, p));

    RngStream duals = RngStream(cfg.seed).derive("duals");
    const std::size_t dim = measure_space(m).dim;
    bool projection_ok = true;
    bool projection_inconclusive = false;
    for (std::size_t k = 0; k < cfg.n_duals; ++k) {
        Vec dual(dim);
        double nrm = 0.0;
        for (double& x : dual) {
            x = duals.gaussian();
            nrm += x * x;
        }
        nrm = std::sqrt(nrm);
        for (double& x : dual) x /= std::max(nrm, 1e-300);
        const CheckReport rep = check_scalar_projection(m, dual);
        record.metrics.push_back(
            {"projection.criterion", double(k),
             rep.quantities.count("projected_criterion_integral")
                 ? rep.quantities.at("projected_criterion_integral")
                 : 0.0,
             0.0});
        if (rep.verdict == Verdict::NotLevy) projection_ok = false;
        if (rep.verdict == Verdict::Inconclusive) projection_inconclusive = true;
    }
    record.verdicts["projections"] = projection_inconclusive ? "Inconclusive"
                                     : projection_ok         ? "Levy"
                                                             : "NotLevy";

    // cross-tabulated verdict: any failure dominates, any Inconclusive
    // propagates
    std::string overall = "Levy";
    for (const auto& key : {std::string("hilbert"), sharp_key,
                            std::string("projections")}) {
        auto it = record.verdicts.find(key);
        if (it == record.verdicts.end()) continue;
        if (it->second == "NotLevy") overall = "NotLevy";
    }
    if (overall != "NotLevy")
        for (const auto& [key, value] : record.verdicts)
            if (value == "Inconclusive") overall = "Inconclusive";
    record.verdicts["overall"] = overall;
    return record;
}

int run_command(const std::string& command, const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    ResultRecord record;
    if (command == "check")
        record = run_check(cfg);
    else if (command == "simulate")
        record = run_simulate(cfg);
    else if (command == "verify-novikov")
        record = run_novikov(cfg);
    else if (command == "verify-umd")
        record = run_umd(cfg);
    else if (command == "gamma-norm")
        record = run_gamma_norm(cfg);
    else if (command == "converge")
        record = run_converge(cfg);
    else if (command == "criteria-matrix")
        record = run_criteria_matrix(cfg);
    else
        throw std::runtime_error("unknown command: " + command);
    record.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();

    std::filesystem::create_directories(cfg.out_dir);
    const std::string base =
        (std::filesystem::path(cfg.out_dir) / cfg.experiment).string();
    write_csv(base + ".csv", record);
    write_json_summary(base + ".json", record);
    return record.inconclusive() ? 2 : 0;
}

} // namespace levylab
