#include "levylab/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "levylab/stats.hpp"

namespace levylab {

namespace {

double weighted_dot(const std::vector<double>& w, const Vec& a, const Vec& b) {
    KahanSum s;
    for (std::size_t i = 0; i < w.size(); ++i) s.add(w[i] * a[i] * b[i]);
    return s.value();
}

// sigma_s^2 = sum_n v_n(s)^2 after orthonormalisation
Vec coordinate_sigmas(const FiniteRankOperator& on) {
    Vec sig(on.target.dim, 0.0);
    for (const auto& v : on.v)
        for (std::size_t s = 0; s < sig.size(); ++s) sig[s] += v[s] * v[s];
    for (double& x : sig) x = std::sqrt(x);
    return sig;
}

void check_shape(const FiniteRankOperator& op) {
    if (op.h.size() != op.v.size())
        throw std::domain_error("FiniteRankOperator: h/v count mismatch");
    for (const auto& h : op.h)
        if (h.size() != op.weights.size())
            throw std::domain_error("FiniteRankOperator: h dimension mismatch");
    for (const auto& v : op.v)
        if (v.size() != op.target.dim)
            throw std::domain_error("FiniteRankOperator: v dimension mismatch");
    for (double w : op.weights)
        if (!(w > 0.0))
            throw std::domain_error("FiniteRankOperator: weights must be positive");
}

} // namespace

Vec FiniteRankOperator::apply(const Vec& g) const {
    Vec out(target.dim, 0.0);
    for (std::size_t n = 0; n < h.size(); ++n) {
        const double c = weighted_dot(weights, g, h[n]);
        for (std::size_t s = 0; s < out.size(); ++s) out[s] += c * v[n][s];
    }
    return out;
}

FiniteRankOperator orthonormalise(const FiniteRankOperator& op) {
    check_shape(op);
    if (op.orthonormalised) return op;

    // modified Gram-Schmidt under the weighted inner product
    std::vector<Vec> e;
    double scale = 0.0;
    for (const auto& h : op.h)
        scale = std::max(scale, std::sqrt(weighted_dot(op.weights, h, h)));
    for (const auto& h : op.h) {
        Vec r = h;
        for (const auto& basis : e) {
            const double c = weighted_dot(op.weights, r, basis);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] -= c * basis[i];
        }
        const double nrm = std::sqrt(weighted_dot(op.weights, r, r));
        if (nrm <= 1e-12 * scale) continue; // dependent direction, dropped
        for (double& x : r) x /= nrm;
        e.push_back(std::move(r));
    }

    // v'_m = sum_n <h_n, e_m>_w v_n keeps T g = sum_m <g, e_m>_w v'_m
    FiniteRankOperator out;
    out.weights = op.weights;
    out.target = op.target;
    out.orthonormalised = true;
    out.h = e;
    out.v.assign(e.size(), Vec(op.target.dim, 0.0));
    for (std::size_t m = 0; m < e.size(); ++m)
        for (std::size_t n = 0; n < op.h.size(); ++n) {
            const double c = weighted_dot(op.weights, op.h[n], e[m]);
            for (std::size_t s = 0; s < op.target.dim; ++s)
                out.v[m][s] += c * op.v[n][s];
        }
    return out;
}

double gamma_norm_exact_hilbert(const FiniteRankOperator& op) {
    if (op.target.p != 2.0)
        throw std::domain_error("gamma_norm_exact_hilbert: target must have p = 2");
    const FiniteRankOperator on = orthonormalise(op);
    KahanSum s;
    for (const auto& v : on.v) {
        const double nv = on.target.norm(v);
        s.add(nv * nv);
    }
    return std::sqrt(s.value());
}

McEstimate gamma_norm_mc(const FiniteRankOperator& op, std::size_t n_gauss,
                         RngStream& rng) {
    if (n_gauss < 2) throw std::domain_error("gamma_norm_mc: n_gauss must be >= 2");
    const FiniteRankOperator on = orthonormalise(op);
    std::vector<double> sq;
    sq.reserve(n_gauss);
    Vec y(on.target.dim);
    for (std::size_t k = 0; k < n_gauss; ++k) {
        std::fill(y.begin(), y.end(), 0.0);
        for (const auto& v : on.v) {
            const double g = rng.gaussian();
            for (std::size_t s = 0; s < y.size(); ++s) y[s] += g * v[s];
        }
        const double nv = on.target.norm(y);
        sq.push_back(nv * nv);
    }
    const MeanStderr ms = mean_stderr(sq);
    McEstimate out;
    if (ms.mean <= 0.0) return out;
    out.estimate = std::sqrt(ms.mean);
    out.stderror = ms.stderror / (2.0 * out.estimate); // delta method
    return out;
}

double gamma_pth_moment_exact(const FiniteRankOperator& op, double p) {
    const FiniteRankOperator on = orthonormalise(op);
    const Vec sig = coordinate_sigmas(on);
    KahanSum s;
    for (std::size_t i = 0; i < sig.size(); ++i)
        s.add(std::pow(sig[i], p) * on.target.weight(i));
    return gaussian_abs_moment(p) * s.value();
}

McEstimate gamma_pth_moment_mc(const FiniteRankOperator& op, double p,
                               std::size_t n_gauss, RngStream& rng) {
    if (n_gauss < 2)
        throw std::domain_error("gamma_pth_moment_mc: n_gauss must be >= 2");
    const FiniteRankOperator on = orthonormalise(op);
    std::vector<double> vals;
    vals.reserve(n_gauss);
    Vec y(on.target.dim);
    for (std::size_t k = 0; k < n_gauss; ++k) {
        std::fill(y.begin(), y.end(), 0.0);
        for (const auto& v : on.v) {
            const double g = rng.gaussian();
            for (std::size_t s = 0; s < y.size(); ++s) y[s] += g * v[s];
        }
        vals.push_back(std::pow(on.target.norm(y), p));
    }
    const MeanStderr ms = mean_stderr(vals);
    return {ms.mean, ms.stderror};
}

double square_function_norm(const FiniteRankOperator& op, double p) {
    const FiniteRankOperator on = orthonormalise(op);
    const Vec sig = coordinate_sigmas(on);
    KahanSum s;
    for (std::size_t i = 0; i < sig.size(); ++i)
        s.add(std::pow(sig[i], p) * on.target.weight(i));
    return std::pow(s.value(), 1.0 / p);
}

namespace {

// operator norm of R on the weighted ell^2 domain by power iteration on R*R
double weighted_l2_operator_norm(const std::vector<Vec>& R,
                                 const std::vector<double>& w) {
    const std::size_t n = w.size();
    if (R.size() != n) throw std::domain_error("ideal_property_check: R shape");
    for (const auto& row : R)
        if (row.size() != n) throw std::domain_error("ideal_property_check: R shape");
    // symmetrise via x -> sqrt(w) x so the iteration runs in plain ell^2:
    // A_{ij} = sqrt(w_i) R_{ij} / sqrt(w_j)
    std::vector<Vec> A(n, Vec(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            A[i][j] = std::sqrt(w[i]) * R[i][j] / std::sqrt(w[j]);
    Vec x(n, 1.0 / std::sqrt(double(n)));
    double lam = 0.0;
    for (int iter = 0; iter < 400; ++iter) {
        Vec ax(n, 0.0), atax(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) ax[i] += A[i][j] * x[j];
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i) atax[j] += A[i][j] * ax[i];
        double nrm = 0.0;
        for (double v : atax) nrm += v * v;
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) return 0.0;
        lam = nrm;
        for (std::size_t j = 0; j < n; ++j) x[j] = atax[j] / nrm;
    }
    return std::sqrt(lam);
}

// upper bound for the L^p -> L^p norm by interpolation between the
// 1 -> 1 and infinity -> infinity matrix norms
double lp_operator_norm_bound(const std::vector<Vec>& A, const ModelSpace& sp) {
    const std::size_t n = sp.dim;
    double norm_inf = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += std::abs(A[i][j]);
        norm_inf = std::max(norm_inf, row);
    }
    double norm_1 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < n; ++i) col += sp.weight(i) * std::abs(A[i][j]);
        norm_1 = std::max(norm_1, col / sp.weight(j));
    }
    const double p = sp.p;
    return std::pow(norm_1, 1.0 / p) * std::pow(norm_inf, 1.0 - 1.0 / p);
}

double gamma_norm_any(const FiniteRankOperator& op, std::size_t n_gauss,
                      RngStream& rng, double* stderr_out) {
    if (op.target.p == 2.0) {
        if (stderr_out) *stderr_out = 0.0;
        return gamma_norm_exact_hilbert(op);
    }
    const McEstimate mc = gamma_norm_mc(op, n_gauss, rng);
    if (stderr_out) *stderr_out = mc.stderror;
    return mc.estimate;
}

} // namespace

IdealPropertyReport ideal_property_check(const FiniteRankOperator& S,
                                         const std::vector<Vec>& R,
                                         const std::vector<Vec>& Tpost,
                                         std::size_t n_gauss, RngStream& rng) {
    check_shape(S);
    const std::size_t n = S.domain_dim();
    const std::size_t d = S.target.dim;
    if (Tpost.size() != d)
        throw std::domain_error("ideal_property_check: Tpost shape");
    for (const auto& row : Tpost)
        if (row.size() != d)
            throw std::domain_error("ideal_property_check: Tpost shape");

    // (Tpost S R) g = sum_n <g, R^* h_n>_w (Tpost v_n)
    FiniteRankOperator composed;
    composed.weights = S.weights;
    composed.target = S.target;
    composed.h.reserve(S.h.size());
    composed.v.reserve(S.v.size());
    for (std::size_t m = 0; m < S.h.size(); ++m) {
        Vec hn(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                acc += S.weights[i] * R[i][k] * S.h[m][i];
            hn[k] = acc / S.weights[k];
        }
        Vec vn(d, 0.0);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) vn[i] += Tpost[i][j] * S.v[m][j];
        composed.h.push_back(std::move(hn));
        composed.v.push_back(std::move(vn));
    }

    IdealPropertyReport out;
    RngStream sub_lhs = rng.derive("ideal-lhs");
    RngStream sub_mid = rng.derive("ideal-mid");
    out.lhs = gamma_norm_any(composed, n_gauss, sub_lhs, &out.lhs_stderr);
    double mid_stderr = 0.0;
    const double mid = gamma_norm_any(S, n_gauss, sub_mid, &mid_stderr);
    out.bound = lp_operator_norm_bound(Tpost, S.target) * (mid + 3.0 * mid_stderr) *
                weighted_l2_operator_norm(R, S.weights);
    return out;
}

FiniteRankOperator build_tg(const PointConfiguration& cfg,
                            const DiscreteMeasure& measure,
                            const SimpleFunction& F, const CellSelector& B) {
    F.validate(measure);
    std::vector<Vec> vs;
    for (const auto& pt : cfg.points) {
        if (!B.contains(pt.atom)) continue;
        if (F.cell_of_atom(pt.atom) == static_cast<std::size_t>(-1)) continue;
        vs.push_back(F.value_at(pt.time, pt.atom, measure.space().dim));
    }
    FiniteRankOperator op;
    op.target = measure.space();
    const std::size_t K = vs.size();
    op.weights.assign(std::max<std::size_t>(K, 1), 1.0);
    for (std::size_t k = 0; k < K; ++k) {
        Vec h(std::max<std::size_t>(K, 1), 0.0);
        h[k] = 1.0;
        op.h.push_back(std::move(h));
    }
    op.v = std::move(vs);
    if (K == 0) op.h.clear();
    op.orthonormalised = true; // unit coordinates, unit weights
    return op;
}

FiniteRankOperator build_jump_operator(const PointConfiguration& cfg,
                                       const DiscreteMeasure& measure,
                                       const SimpleFunction& F,
                                       const CellSelector& B) {
    F.validate(measure);
    const std::size_t dim = measure.space().dim;
    std::map<double, Vec> jumps; // simultaneous times merge by summing
    for (const auto& pt : cfg.points) {
        if (!B.contains(pt.atom)) continue;
        if (F.cell_of_atom(pt.atom) == static_cast<std::size_t>(-1)) continue;
        const Vec v = F.value_at(pt.time, pt.atom, dim);
        auto [it, inserted] = jumps.try_emplace(pt.time, v);
        if (!inserted)
            for (std::size_t s = 0; s < dim; ++s) it->second[s] += v[s];
    }
    FiniteRankOperator op;
    op.target = measure.space();
    const std::size_t K = jumps.size();
    op.weights.assign(std::max<std::size_t>(K, 1), 1.0);
    std::size_t k = 0;
    for (auto& [time, v] : jumps) {
        Vec h(std::max<std::size_t>(K, 1), 0.0);
        h[k++] = 1.0;
        op.h.push_back(std::move(h));
        op.v.push_back(std::move(v));
    }
    if (K == 0) op.h.clear();
    op.orthonormalised = true;
    return op;
}

McEstimate estimate_expected_gamma_norm(const DiscreteMeasure& measure,
                                        const SimpleFunction& F,
                                        const CellSelector& B, double p,
                                        double t, std::size_t reps_outer,
                                        std::size_t n_gauss,
                                        const RngStream& rng) {
    if (reps_outer < 2)
        throw std::domain_error("estimate_expected_gamma_norm: reps_outer >= 2");
    std::vector<double> vals;
    vals.reserve(reps_outer);
    for (std::size_t r = 0; r < reps_outer; ++r) {
        RngStream sub = rng.derive(r);
        RngStream point_rng = sub.derive("points");
        RngStream gauss_rng = sub.derive("gauss");
        const PointConfiguration cfg = sample_prm(measure, t, point_rng);
        const FiniteRankOperator op = build_tg(cfg, measure, F, B);
        const double nrm = gamma_norm_any(op, n_gauss, gauss_rng, nullptr);
        vals.push_back(std::pow(nrm, p));
    }
    const MeanStderr ms = mean_stderr(vals);
    return {ms.mean, ms.stderror};
}

UmdReport umd_equivalence_check(const DiscreteMeasure& measure,
                                const SimpleFunction& F, const CellSelector& B,
                                double p, double t, const UmdConfig& cfg,
                                const RngStream& rng) {
    UmdReport out;
    const PathStatistic lhs =
        estimate_lhs(measure, F, B, p, t, cfg.reps, rng.derive("umd-lhs"),
                     cfg.use_sup);
    const McEstimate rhs = estimate_expected_gamma_norm(
        measure, F, B, p, t, cfg.reps, cfg.n_gauss, rng.derive("umd-rhs"));
    out.lhs = lhs.estimate;
    out.lhs_stderr = lhs.stderror;
    out.rhs = rhs.estimate;
    out.rhs_stderr = rhs.stderror;
    if (out.lhs == 0.0 && out.rhs == 0.0) {
        out.degenerate = true;
        return out;
    }
    if (out.rhs == 0.0) {
        out.degenerate = true;
        return out;
    }
    out.ratio = out.lhs / out.rhs;
    const double rel_l = out.lhs != 0.0 ? out.lhs_stderr / out.lhs : 0.0;
    const double rel_r = out.rhs_stderr / out.rhs;
    out.ratio_stderr = std::abs(out.ratio) *
                       std::sqrt(rel_l * rel_l + rel_r * rel_r);
    return out;
}

} // namespace levylab
