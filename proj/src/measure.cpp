#include "levylab/measure.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace levylab {

namespace {

using nlohmann::json;

json space_to_json(const ModelSpace& s) {
    json j;
    j["kind"] = s.kind == SpaceKind::Sequence ? "sequence" : "grid";
    j["dim"] = s.dim;
    j["p"] = s.p;
    if (s.kind == SpaceKind::GridLp) j["weights"] = s.grid_weights;
    return j;
}

ModelSpace space_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const double p = j.at("p").get<double>();
    if (kind == "sequence")
        return ModelSpace::sequence(j.at("dim").get<std::size_t>(), p);
    if (kind == "grid")
        return ModelSpace::grid(p, j.at("weights").get<Vec>());
    throw std::domain_error("unknown space kind: " + kind);
}

json atoms_to_json(const std::vector<Atom>& atoms) {
    json arr = json::array();
    for (const auto& a : atoms) arr.push_back({{"u", a.position}, {"w", a.mass}});
    return arr;
}

std::vector<Atom> atoms_from_json(const json& arr) {
    std::vector<Atom> atoms;
    for (const auto& item : arr)
        atoms.push_back({item.at("u").get<Vec>(), item.at("w").get<double>()});
    return atoms;
}

} // namespace

double radial_power_integral(double q, double alpha, double a, double b) {
    if (a < 0.0 || b < a) throw std::domain_error("radial_power_integral: bad bounds");
    if (a == b) return 0.0;
    const double e = q - alpha;
    if (e == 0.0) {
        if (a == 0.0) return std::numeric_limits<double>::infinity();
        return std::log(b / a);
    }
    if (e < 0.0 && a == 0.0) return std::numeric_limits<double>::infinity();
    const double lo = a == 0.0 ? 0.0 : std::pow(a, e);
    return (std::pow(b, e) - lo) / e;
}

DiscreteMeasure::DiscreteMeasure(ModelSpace space, std::vector<Atom> atoms)
    : space_(std::move(space)), atoms_(std::move(atoms)) {
    for (const auto& a : atoms_) {
        if (a.position.size() != space_.dim)
            throw std::domain_error("DiscreteMeasure: atom dimension mismatch");
        if (!(a.mass > 0.0))
            throw std::domain_error("DiscreteMeasure: atom mass must be positive");
        if (space_.norm(a.position) == 0.0)
            throw std::domain_error("DiscreteMeasure: atom at the origin");
    }
}

double DiscreteMeasure::total_mass() const {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.mass;
    return m;
}

double DiscreteMeasure::ball_mass(double r, RestrictSide side) const {
    if (!(r > 0.0)) throw std::domain_error("ball_mass: radius must be positive");
    double m = 0.0;
    for (const auto& a : atoms_) {
        const bool inside = space_.norm(a.position) <= r;
        if (inside == (side == RestrictSide::Inside)) m += a.mass;
    }
    return m;
}

DiscreteMeasure DiscreteMeasure::restrict(double r, RestrictSide side) const {
    if (!(r > 0.0)) throw std::domain_error("restrict: radius must be positive");
    std::vector<Atom> kept;
    for (const auto& a : atoms_) {
        const bool inside = space_.norm(a.position) <= r;
        if (inside == (side == RestrictSide::Inside)) kept.push_back(a);
    }
    return DiscreteMeasure(space_, std::move(kept));
}

DiscreteMeasure DiscreteMeasure::convolve(const DiscreteMeasure& other) const {
    if (!space_.same_as(other.space_))
        throw std::domain_error("convolve: model space mismatch");
    constexpr double merge_tol = 1e-12;
    std::vector<Atom> out;
    Vec sum(space_.dim);
    Vec diff(space_.dim);
    for (const auto& a : atoms_) {
        for (const auto& b : other.atoms_) {
            for (std::size_t i = 0; i < space_.dim; ++i)
                sum[i] = a.position[i] + b.position[i];
            const double w = a.mass * b.mass;
            bool merged = false;
            for (auto& existing : out) {
                for (std::size_t i = 0; i < space_.dim; ++i)
                    diff[i] = existing.position[i] - sum[i];
                if (space_.norm(diff) <= merge_tol) {
                    existing.mass += w;
                    merged = true;
                    break;
                }
            }
            if (!merged && space_.norm(sum) > merge_tol) out.push_back({sum, w});
            // mass landing at the origin (within merge tolerance) is dropped:
            // lambda({0}) = 0 by convention
        }
    }
    return DiscreteMeasure(space_, std::move(out));
}

Vec DiscreteMeasure::shift_vector() const {
    Vec s(space_.dim, 0.0);
    for (const auto& a : atoms_) {
        if (space_.norm(a.position) <= 1.0)
            for (std::size_t i = 0; i < space_.dim; ++i)
                s[i] -= a.mass * a.position[i];
    }
    return s;
}

std::complex<double> DiscreteMeasure::char_fn(const Vec& dual) const {
    std::complex<double> exponent{0.0, 0.0};
    for (const auto& a : atoms_) {
        const double theta = space_.pairing(a.position, dual);
        std::complex<double> term = std::exp(std::complex<double>{0.0, theta}) - 1.0;
        if (space_.norm(a.position) <= 1.0) term -= std::complex<double>{0.0, theta};
        exponent += a.mass * term;
    }
    return std::exp(exponent);
}

std::vector<Vec> DiscreteMeasure::sample_compound_poisson(RngStream& rng,
                                                          std::size_t n) const {
    std::vector<Vec> out(n, Vec(space_.dim, 0.0));
    const double mass = total_mass();
    if (atoms_.empty() || mass <= 0.0) return out;
    std::vector<double> weights;
    weights.reserve(atoms_.size());
    for (const auto& a : atoms_) weights.push_back(a.mass);
    const DiscreteSampler sampler(weights);
    for (auto& x : out) {
        const std::uint64_t k = rng.poisson(mass);
        for (std::uint64_t j = 0; j < k; ++j) {
            const auto& u = atoms_[sampler.sample(rng)].position;
            for (std::size_t i = 0; i < space_.dim; ++i) x[i] += u[i];
        }
    }
    return out;
}

std::vector<Vec> DiscreteMeasure::sample_eta(RngStream& rng, std::size_t n) const {
    auto samples = sample_compound_poisson(rng, n);
    const Vec shift = shift_vector();
    for (auto& x : samples)
        for (std::size_t i = 0; i < space_.dim; ++i) x[i] += shift[i];
    return samples;
}

std::string DiscreteMeasure::to_json() const {
    json j;
    j["space"] = space_to_json(space_);
    j["atoms"] = atoms_to_json(atoms_);
    return j.dump(2);
}

DiscreteMeasure DiscreteMeasure::from_json(const std::string& text) {
    const json j = json::parse(text);
    return DiscreteMeasure(space_from_json(j.at("space")),
                           atoms_from_json(j.at("atoms")));
}

RadialFamily::RadialFamily(ModelSpace space, double alpha,
                           std::vector<Atom> directions, double rmax, double rmin)
    : space_(std::move(space)), alpha_(alpha),
      directions_(std::move(directions)), rmax_(rmax), rmin_(rmin) {
    if (!(alpha_ > 0.0) || alpha_ > 2.0)
        throw std::domain_error("RadialFamily: alpha must lie in (0,2]");
    if (!(rmax_ > 0.0) || rmin_ < 0.0 || rmin_ >= rmax_)
        throw std::domain_error("RadialFamily: need 0 <= rmin < rmax");
    for (const auto& d : directions_) {
        if (d.position.size() != space_.dim)
            throw std::domain_error("RadialFamily: direction dimension mismatch");
        if (!(d.mass > 0.0))
            throw std::domain_error("RadialFamily: direction weight must be positive");
        if (std::fabs(space_.norm(d.position) - 1.0) > 1e-12)
            throw std::domain_error("RadialFamily: directions must have unit norm");
    }
}

double RadialFamily::direction_weight_total() const {
    double w = 0.0;
    for (const auto& d : directions_) w += d.mass;
    return w;
}

double RadialFamily::radial_moment(double q, double lo, double hi) const {
    const double a = std::max(lo, rmin_);
    const double b = std::min(hi, rmax_);
    if (b <= a) return 0.0;
    return direction_weight_total() * radial_power_integral(q, alpha_, a, b);
}

double RadialFamily::tail_mass(double r) const {
    if (!(r > 0.0)) throw std::domain_error("tail_mass: radius must be positive");
    return radial_moment(0.0, r, rmax_);
}

double RadialFamily::total_mass() const {
    return radial_moment(0.0, rmin_, rmax_);
}

RadialFamily RadialFamily::restrict(double r, RestrictSide side) const {
    if (!(r > 0.0)) throw std::domain_error("restrict: radius must be positive");
    if (side == RestrictSide::Inside)
        return RadialFamily(space_, alpha_, directions_, std::min(r, rmax_), rmin_);
    if (r >= rmax_)
        throw std::domain_error("restrict: outside restriction beyond rmax is empty");
    return RadialFamily(space_, alpha_, directions_, rmax_, std::max(r, rmin_));
}

DiscreteMeasure RadialFamily::materialise(double delta, std::size_t n_cells) const {
    if (!(delta > 0.0) || delta >= rmax_)
        throw std::domain_error("materialise: need 0 < delta < rmax");
    if (n_cells == 0) throw std::domain_error("materialise: need at least one cell");
    const double lo = std::max(delta, rmin_);
    std::vector<Atom> atoms;
    atoms.reserve(directions_.size() * n_cells);
    const double ratio = rmax_ / lo;
    for (const auto& dir : directions_) {
        for (std::size_t c = 0; c < n_cells; ++c) {
            const double a = lo * std::pow(ratio, static_cast<double>(c) /
                                                      static_cast<double>(n_cells));
            const double b = lo * std::pow(ratio, static_cast<double>(c + 1) /
                                                      static_cast<double>(n_cells));
            const double cell_mass = radial_power_integral(0.0, alpha_, a, b);
            if (cell_mass <= 0.0) continue;
            const double centroid = radial_power_integral(1.0, alpha_, a, b) / cell_mass;
            Vec pos(space_.dim);
            for (std::size_t i = 0; i < space_.dim; ++i)
                pos[i] = centroid * dir.position[i];
            atoms.push_back({std::move(pos), dir.mass * cell_mass});
        }
    }
    return DiscreteMeasure(space_, std::move(atoms));
}

std::string RadialFamily::to_json() const {
    json j;
    j["space"] = space_to_json(space_);
    j["radial"] = {{"alpha", alpha_},
                   {"rmax", rmax_},
                   {"rmin", rmin_},
                   {"directions", atoms_to_json(directions_)}};
    return j.dump(2);
}

RadialFamily RadialFamily::from_json(const std::string& text) {
    const json j = json::parse(text);
    const json& r = j.at("radial");
    return RadialFamily(space_from_json(j.at("space")), r.at("alpha").get<double>(),
                        atoms_from_json(r.at("directions")),
                        r.at("rmax").get<double>(), r.value("rmin", 0.0));
}

const ModelSpace& measure_space(const AnyMeasure& m) {
    return std::visit([](const auto& v) -> const ModelSpace& { return v.space(); }, m);
}

std::string measure_to_json(const AnyMeasure& m) {
    return std::visit([](const auto& v) { return v.to_json(); }, m);
}

AnyMeasure measure_from_json(const std::string& text) {
    const json j = json::parse(text);
    if (j.contains("radial")) return RadialFamily::from_json(text);
    return DiscreteMeasure::from_json(text);
}

AnyMeasure load_measure_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open measure file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return measure_from_json(buf.str());
}

TruncationSchedule::TruncationSchedule(std::vector<double> ds) : deltas(std::move(ds)) {
    if (deltas.empty()) throw std::domain_error("TruncationSchedule: empty schedule");
    double prev = std::numeric_limits<double>::infinity();
    for (double d : deltas) {
        if (!(d > 0.0) || d >= prev)
            throw std::domain_error("TruncationSchedule: deltas must be strictly decreasing and positive");
        prev = d;
    }
}

} // namespace levylab
