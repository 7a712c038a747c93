#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "neulab/atoms.hpp"
#include "neulab/factorization.hpp"
#include "neulab/functionals.hpp"
#include "neulab/grid.hpp"
#include "neulab/io.hpp"
#include "neulab/kernels.hpp"
#include "neulab/operators.hpp"
#include "neulab/synthetic.hpp"
#include "neulab/version.hpp"

/// Named, config-driven experiments: each one exercises a family of
/// identities/bounds end to end and emits a machine-readable report
/// (report.json + CSV tables).  Every metric row carries an explicit
/// tolerance, a comparison direction, and a verdict; the process exit code
/// of the `lab` driver is 0 iff all verdicts pass.

namespace neulab {

// ============================================================================
// Config / report plumbing
// ============================================================================

struct ExperimentConfig {
    std::string experiment;
    int dimension = 1;
    double half_width = 16.0;
    int points = 4096;
    double t_min = 0.0;  ///< 0 = derive from the grid
    double t_max = 0.0;
    int scale_count = 48;
    std::vector<double> M_values{16.0, 64.0, 256.0};
    std::vector<double> epsilons{0.5, 0.25, 0.1};
    double epsilon = 0.1;
    int l = 0;
    int K_max = 6;
    std::uint64_t seed = 1;
    std::string out_dir = "out";

    Grid make_grid() const { return Grid(dimension, half_width, points); }

    ScaleGrid make_scales(const Grid& g) const {
        if (t_min > 0.0 && t_max > t_min)
            return ScaleGrid::log_spaced(t_min, t_max, scale_count);
        return ScaleGrid::for_grid(g, scale_count);
    }

    static ExperimentConfig from_json(const nlohmann::json& j) {
        ExperimentConfig c;
        if (j.contains("experiment")) c.experiment = j.at("experiment").get<std::string>();
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            if (g.contains("dimension")) c.dimension = g.at("dimension").get<int>();
            if (g.contains("L")) c.half_width = g.at("L").get<double>();
            if (g.contains("N")) c.points = g.at("N").get<int>();
        }
        if (j.contains("scales")) {
            const auto& s = j.at("scales");
            if (s.contains("t_min")) c.t_min = s.at("t_min").get<double>();
            if (s.contains("t_max")) c.t_max = s.at("t_max").get<double>();
            if (s.contains("count")) c.scale_count = s.at("count").get<int>();
        }
        if (j.contains("M_values")) c.M_values = j.at("M_values").get<std::vector<double>>();
        if (j.contains("epsilons")) c.epsilons = j.at("epsilons").get<std::vector<double>>();
        if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
        if (j.contains("l")) c.l = j.at("l").get<int>();
        if (j.contains("K_max")) c.K_max = j.at("K_max").get<int>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
        return c;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["experiment"] = experiment;
        j["grid"] = {{"dimension", dimension}, {"L", half_width}, {"N", points}};
        j["scales"] = {{"t_min", t_min}, {"t_max", t_max}, {"count", scale_count}};
        j["M_values"] = M_values;
        j["epsilons"] = epsilons;
        j["epsilon"] = epsilon;
        j["l"] = l;
        j["K_max"] = K_max;
        j["seed"] = seed;
        j["out_dir"] = out_dir;
        return j;
    }
};

enum class Cmp { le, ge, lt };

struct MetricRow {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    Cmp cmp = Cmp::le;
    bool pass = false;
    std::string note;
};

inline MetricRow make_row(std::string name, double value, double tolerance, Cmp cmp,
                          std::string note = {}) {
    MetricRow r;
    r.name = std::move(name);
    r.value = value;
    r.tolerance = tolerance;
    r.cmp = cmp;
    switch (cmp) {
        case Cmp::le: r.pass = value <= tolerance; break;
        case Cmp::ge: r.pass = value >= tolerance; break;
        case Cmp::lt: r.pass = value < tolerance; break;
    }
    r.note = std::move(note);
    return r;
}

inline const char* cmp_text(Cmp c) {
    switch (c) {
        case Cmp::le: return "<=";
        case Cmp::ge: return ">=";
        case Cmp::lt: return "<";
    }
    return "?";
}

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<MetricRow> rows;
    std::vector<std::pair<std::string, double>> fitted;
    std::vector<std::pair<std::string, io::CsvTable>> tables;  ///< filename -> table
    std::vector<std::string> notes;
    double wall_seconds = 0.0;
    std::string version = library_version;

    bool all_pass() const {
        for (const auto& r : rows)
            if (!r.pass) return false;
        return true;
    }

    void add_fitted(const std::string& name, double v) { fitted.emplace_back(name, v); }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["config"] = config.to_json();
        j["library_version"] = version;
        j["wall_seconds"] = wall_seconds;
        j["all_pass"] = all_pass();
        j["metrics"] = nlohmann::json::array();
        for (const auto& r : rows)
            j["metrics"].push_back({{"name", r.name},
                                    {"value", r.value},
                                    {"tolerance", r.tolerance},
                                    {"cmp", cmp_text(r.cmp)},
                                    {"pass", r.pass},
                                    {"note", r.note}});
        j["fitted_constants"] = nlohmann::json::object();
        for (const auto& [k, v] : fitted) j["fitted_constants"][k] = v;
        j["notes"] = notes;
        for (int dim : {1, 2}) {
            const KernelConstants kc = KernelConstants::for_dimension(dim);
            j["kernel_constants"][dim == 1 ? "n1" : "n2"] = {
                {"riesz_normalization", kc.riesz_normalization},
                {"riesz_constant", kc.riesz_constant},
                {"provenance", kc.provenance}};
        }
        return j;
    }
};

namespace detail {

/// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    return num / den;
}

inline double rel_gap(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

} // namespace detail

// ============================================================================
// kernel-identities: Gaussian bound, gradient closed form + envelope,
// Riesz kernel time-integral decomposition
// ============================================================================

inline ExperimentReport exp_kernel_identities(const ExperimentConfig& cfg) {
    ExperimentReport rep;
    SplitMix64 rng(cfg.seed);
    const double L = cfg.half_width;

    // Gaussian bound: p_N <= 2 (4 pi t)^{-n/2} exp(-|x-y|^2/4t), zero violations
    double worst_excess = -1e300;
    const int sweep = 100000;
    for (int k = 0; k < sweep; ++k) {
        const int dim = (k % 2) + 1;
        const double t = std::exp(rng.uniform(std::log(1e-3), std::log(10.0)));
        Point x{rng.uniform(-L, L), rng.uniform(-L, L)};
        Point y{rng.uniform(-L, L), rng.uniform(-L, L)};
        const int na = dim - 1;
        if (x[static_cast<std::size_t>(na)] * y[static_cast<std::size_t>(na)] < 0.0)
            y[static_cast<std::size_t>(na)] = -y[static_cast<std::size_t>(na)];
        worst_excess = std::max(worst_excess, neumann_heat_kernel(dim, t, x, y) -
                                                  gaussian_upper_bound(dim, t, x, y));
    }
    rep.rows.push_back(make_row("gaussian-bound-max-excess", worst_excess, 0.0, Cmp::le,
                                "p_N - 2*Gaussian over 1e5 draws, both dimensions"));

    // gradient closed form vs centered finite differences, same-half pairs
    const auto draw_pair = [&](int dim, double t, Point& x, Point& y) {
        const int na = dim - 1;
        for (int tries = 0; tries < 64; ++tries) {
            for (int d = 0; d < dim; ++d)
                x[static_cast<std::size_t>(d)] = rng.uniform(-0.8 * L, 0.8 * L);
            const double d_sep = std::sqrt(t) * std::exp(rng.uniform(std::log(0.2), std::log(5.0)));
            y = x;
            for (int d = 0; d < dim; ++d)
                y[static_cast<std::size_t>(d)] += rng.uniform(-1.0, 1.0) * d_sep;
            if (x[static_cast<std::size_t>(na)] * y[static_cast<std::size_t>(na)] > 0.0) return;
        }
        // deterministic fallback: both points deep in the plus half
        for (int d = 0; d < dim; ++d) x[static_cast<std::size_t>(d)] = 0.5 * L;
        y = x;
        y[0] += 0.3 * std::sqrt(t);
    };
    double fd_worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const int dim = (k % 2) + 1;
        const double t = std::exp(rng.uniform(std::log(1e-2), std::log(4.0)));
        Point x{0, 0}, y{0, 0};
        draw_pair(dim, t, x, y);
        const Point grad = neumann_heat_kernel_gradient(dim, t, x, y);
        double gnorm = 0.0;
        for (int d = 0; d < dim; ++d) gnorm += grad[static_cast<std::size_t>(d)] * grad[static_cast<std::size_t>(d)];
        gnorm = std::sqrt(gnorm);
        const double floor = 1e-10 * std::pow(4.0 * std::acos(-1.0) * t, -0.5 * dim) / std::sqrt(t);
        if (gnorm < floor) continue;  // FD is ill-conditioned at near-critical points
        const double step = 1e-5 * std::sqrt(t);
        double err2 = 0.0;
        for (int d = 0; d < dim; ++d) {
            Point xp = x, xm = x;
            xp[static_cast<std::size_t>(d)] += step;
            xm[static_cast<std::size_t>(d)] -= step;
            const double fd =
                (neumann_heat_kernel(dim, t, xp, y) - neumann_heat_kernel(dim, t, xm, y)) /
                (2.0 * step);
            err2 += (fd - grad[static_cast<std::size_t>(d)]) * (fd - grad[static_cast<std::size_t>(d)]);
        }
        fd_worst = std::max(fd_worst, std::sqrt(err2) / gnorm);
    }
    rep.rows.push_back(make_row("gradient-fd-max-rel", fd_worst, 1e-6, Cmp::le,
                                "closed-form gradient vs centered differences"));

    // gradient envelope |grad| <= C sqrt(t)/(sqrt(t)+|x-y|)^{n+2}:
    // fit C on one sweep, verify (no violation) on a disjoint sweep
    const auto envelope_ratio = [&](int dim, double t, const Point& x, const Point& y) {
        const Point grad = neumann_heat_kernel_gradient(dim, t, x, y);
        double gnorm = 0.0;
        for (int d = 0; d < dim; ++d) gnorm += grad[static_cast<std::size_t>(d)] * grad[static_cast<std::size_t>(d)];
        gnorm = std::sqrt(gnorm);
        const double denom = std::sqrt(t) / std::pow(std::sqrt(t) + dist(dim, x, y), dim + 2);
        return gnorm / denom;
    };
    double fit_c = 0.0;
    for (int k = 0; k < 2000; ++k) {
        const int dim = (k % 2) + 1;
        const double t = std::exp(rng.uniform(std::log(1e-2), std::log(4.0)));
        Point x{0, 0}, y{0, 0};
        draw_pair(dim, t, x, y);
        fit_c = std::max(fit_c, envelope_ratio(dim, t, x, y));
    }
    fit_c *= 1.1;
    rep.add_fitted("gradient_envelope_C", fit_c);
    SplitMix64 rng2(cfg.seed + 1);
    std::swap(rng, rng2);  // disjoint verification sweep
    int violations = 0;
    for (int k = 0; k < 2000; ++k) {
        const int dim = (k % 2) + 1;
        const double t = std::exp(rng.uniform(std::log(1e-2), std::log(4.0)));
        Point x{0, 0}, y{0, 0};
        draw_pair(dim, t, x, y);
        if (envelope_ratio(dim, t, x, y) > fit_c) ++violations;
    }
    rep.rows.push_back(make_row("gradient-envelope-violations", violations, 0.0, Cmp::le,
                                "fitted C on seed sweep, verified on seed+1 sweep"));

    // Riesz kernel: normalized time integral of the gradient kernel vs the
    // closed form, and the exact 1-D display
    const int dim = cfg.dimension;
    double ti_worst = 0.0, closed_worst = 0.0;
    io::CsvTable ti_table("dimension,axis,x1,x2,y1,y2,time_integral,closed_form,rel_gap");
    for (int k = 0; k < 1000; ++k) {
        Point x{rng.uniform(-0.9 * L, 0.9 * L), rng.uniform(-0.9 * L, 0.9 * L)};
        Point y{rng.uniform(-0.9 * L, 0.9 * L), rng.uniform(-0.9 * L, 0.9 * L)};
        const int na = dim - 1;
        if (x[static_cast<std::size_t>(na)] * y[static_cast<std::size_t>(na)] < 0.0)
            y[static_cast<std::size_t>(na)] = -y[static_cast<std::size_t>(na)];
        if (dist(dim, x, y) < 1e-3) continue;
        for (int l = 0; l < dim; ++l) {
            const RieszKernelParts parts = riesz_kernel_time_integral(dim, l, x, y);
            const double closed = neumann_riesz_kernel(dim, l, x, y);
            const double ti = parts.classical + parts.correction;
            if (std::abs(closed) < 1e-6 * (std::abs(parts.classical) + std::abs(parts.correction)))
                continue;  // near-cancellation: relative comparison meaningless
            const double gap = std::abs(ti - closed) / std::abs(closed);
            ti_worst = std::max(ti_worst, gap);
            if (k < 32) ti_table.add_row(dim, l, x[0], x[1], y[0], y[1], ti, closed, gap);
            if (dim == 1) {
                const double display = -(1.0 / std::acos(-1.0)) *
                                       (1.0 / (x[0] - y[0]) + 1.0 / (x[0] + y[0]));
                closed_worst = std::max(closed_worst, std::abs(closed - display) /
                                                          std::abs(display));
            }
        }
    }
    rep.rows.push_back(make_row("riesz-time-integral-max-rel", ti_worst, 1e-4, Cmp::le,
                                "quadrature of (1/Gamma(1/2)) int dt/sqrt(t) of grad p vs closed form"));
    if (dim == 1)
        rep.rows.push_back(make_row("riesz-1d-closed-form-max-rel", closed_worst, 1e-10,
                                    Cmp::le, "closed form vs -(1/pi)(1/(x-y)+1/(x+y))"));
    rep.tables.emplace_back("riesz_time_integral.csv", std::move(ti_table));
    return rep;
}

// ============================================================================
// reflection-identities: semigroup / Q / Riesz vs classical operator on the
// even extension
// ============================================================================

inline ExperimentReport exp_reflection_identities(const ExperimentConfig& cfg) {
    ExperimentReport rep;
    const Grid g = cfg.make_grid();
    const ScaleGrid sg = cfg.make_scales(g);
    SplitMix64 rng(cfg.seed);
    double semi_worst = 0.0, q_worst = 0.0, riesz_worst = 0.0;
    const OperatorConfig ocfg;
    for (int k = 0; k < 20; ++k) {
        const GridFunction f = random_bump_sum(g, rng);
        const GridFunction fe = even_extension(f, HalfSpace::plus);
        const double fsup = std::max(norm(f, Norm::linf), 1e-300);
        for (double t : sg.scales) {
            const GridFunction un = apply_semigroup(f, t * t, KernelFlavor::neumann);
            const GridFunction uc = apply_semigroup(fe, t * t, KernelFlavor::classical);
            const GridFunction qn = apply_Q(f, t, KernelFlavor::neumann);
            const GridFunction qc = apply_Q(fe, t, KernelFlavor::classical);
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (!g.in_plus(i)) continue;
                semi_worst = std::max(semi_worst, std::abs(un.values[i] - uc.values[i]) / fsup);
                q_worst = std::max(q_worst, std::abs(qn.values[i] - qc.values[i]) / fsup);
            }
        }
        for (int l = 0; l < g.dimension; ++l) {
            const GridFunction rn = apply_riesz(f, l, KernelFlavor::neumann, false, ocfg);
            const GridFunction rc = apply_riesz(fe, l, KernelFlavor::classical, false, ocfg);
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (!g.in_plus(i)) continue;
                num += (rn.values[i] - rc.values[i]) * (rn.values[i] - rc.values[i]);
                den += rc.values[i] * rc.values[i];
            }
            riesz_worst = std::max(riesz_worst, std::sqrt(num / std::max(den, 1e-300)));
        }
    }
    rep.rows.push_back(make_row("semigroup-reflection-max", semi_worst, 1e-8, Cmp::le,
                                "max over 20 f, 48 scales, x in the plus half; scaled by ||f||_inf"));
    rep.rows.push_back(make_row("q-reflection-max", q_worst, 1e-8, Cmp::le,
                                "same protocol for Q_{t^2}"));
    rep.rows.push_back(make_row("riesz-reflection-rel-l2", riesz_worst, 5e-3, Cmp::le,
                                "R_N f vs classical R on the even extension, plus half"));
    return rep;
}

// ============================================================================
// norm-equivalence: exact half identity for the maximal H^1 norm; area
// function pointwise identity (and its symmetrized/integrated true variants)
// ============================================================================

inline ExperimentReport exp_norm_equivalence(const ExperimentConfig& cfg) {
    ExperimentReport rep;
    const Grid g = cfg.make_grid();
    const ScaleGrid sg = cfg.make_scales(g);
    SplitMix64 rng(cfg.seed);
    const OperatorConfig ocfg;

    double half_worst = 0.0;
    double ratio_min = 1e300, ratio_max = 0.0;  // mutual ratios of the characterizations
    for (int k = 0; k < 10; ++k) {
        const GridFunction f = (k % 2) ? random_mean_zero_per_half(g, rng)
                                       : random_bump_sum(g, rng);
        const double h1max = h1_norm(f, H1Kind::radial_max, KernelFlavor::neumann, sg, ocfg);
        const GridFunction fp = even_extension(f, HalfSpace::plus);
        const GridFunction fm = even_extension(f, HalfSpace::minus);
        const double rhs =
            0.5 * (norm(radial_maximal(fp, KernelFlavor::classical, sg), Norm::l1) +
                   norm(radial_maximal(fm, KernelFlavor::classical, sg), Norm::l1));
        half_worst = std::max(half_worst, std::abs(h1max - rhs) / std::max(h1max, 1e-300));
        for (H1Kind kind : {H1Kind::area, H1Kind::nontangential_max, H1Kind::riesz}) {
            const double v = h1_norm(f, kind, KernelFlavor::neumann, sg, ocfg);
            ratio_min = std::min(ratio_min, v / h1max);
            ratio_max = std::max(ratio_max, v / h1max);
        }
    }
    rep.rows.push_back(make_row("half-identity-max-rel", half_worst, 0.02, Cmp::le,
                                "h1(f,max) vs half-sum of even-extension maximal norms, 10 functions"));
    rep.add_fitted("characterization_ratio_min", ratio_min);
    rep.add_fitted("characterization_ratio_max", ratio_max);

    // area-function pointwise identity and sandwiches (plus the symmetrized
    // variant, which is the discretely exact form)
    double pw_worst = 0.0, sym_worst = 0.0;
    double upper_viol = 0.0, lower_viol = 0.0;
    double int_worst = 0.0;
    const double sqrt2over2 = std::sqrt(2.0) / 2.0, two_sqrt2 = 2.0 * std::sqrt(2.0);
    for (int k = 0; k < 5; ++k) {
        const GridFunction f = (k % 2) ? random_mean_zero_per_half(g, rng)
                                       : random_bump_sum(g, rng);
        const GridFunction sn = area_function(f, KernelFlavor::neumann, sg);
        const GridFunction sp =
            area_function(even_extension(f, HalfSpace::plus), KernelFlavor::classical, sg);
        const GridFunction sm =
            area_function(even_extension(f, HalfSpace::minus), KernelFlavor::classical, sg);
        double isn = 0.0, ihalf = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double a = sn.values[i] * sn.values[i];
            const double b = 0.5 * (sp.values[i] * sp.values[i] + sm.values[i] * sm.values[i]);
            isn += a;
            ihalf += b;
            if (sn.values[i] > 1e-10)
                pw_worst = std::max(pw_worst, std::abs(a - b) / a);
            // sandwich inequalities, sample-wise
            upper_viol = std::max(upper_viol,
                                  sn.values[i] -
                                      sqrt2over2 * (sp.values[i] + sm.values[i]) - 1e-12);
            lower_viol = std::max(lower_viol, sp.values[i] + sm.values[i] -
                                                  two_sqrt2 * sn.values[i] - 1e-12);
            // symmetrized identity: S_N(x)^2 + S_N(xR)^2 = S_+(x)^2 + S_-(x)^2
            std::size_t ir = 0;
            {
                const int N = g.points_per_axis;
                if (g.dimension == 1) {
                    ir = static_cast<std::size_t>(N - 1 - static_cast<int>(i));
                } else {
                    const int i0 = static_cast<int>(i) / N, i1 = static_cast<int>(i) % N;
                    ir = g.flat_index(i0, N - 1 - i1);
                }
            }
            const double lhs = a + sn.values[ir] * sn.values[ir];
            const double rhs = sp.values[i] * sp.values[i] + sm.values[i] * sm.values[i];
            if (lhs > 1e-20) sym_worst = std::max(sym_worst, std::abs(lhs - rhs) / lhs);
        }
        int_worst = std::max(int_worst, std::abs(isn - ihalf) / std::max(isn, 1e-300));
    }
    rep.rows.push_back(make_row("area-pointwise-identity-max-rel", pw_worst, 1e-6, Cmp::le,
                                "S_N^2 = (S_+^2+S_-^2)/2 sample-wise; holds only on the "
                                "interface/symmetric inputs - see the symmetrized variant"));
    rep.rows.push_back(make_row("area-sandwich-upper-max-excess", upper_viol, 0.0, Cmp::le,
                                "S_N <= (sqrt2/2)(S_+ + S_-) sample-wise"));
    rep.rows.push_back(make_row("area-sandwich-lower-max-excess", lower_viol, 0.0, Cmp::le,
                                "S_+ + S_- <= 2 sqrt2 S_N sample-wise"));
    rep.rows.push_back(make_row("supplementary-area-symmetrized-max-rel", sym_worst, 1e-6,
                                Cmp::le,
                                "S_N(x)^2 + S_N(reflected x)^2 = S_+(x)^2 + S_-(x)^2"));
    rep.rows.push_back(make_row("supplementary-area-integrated-max-rel", int_worst, 1e-6,
                                Cmp::le, "int S_N^2 = (1/2) int (S_+^2 + S_-^2)"));
    return rep;
}

// ============================================================================
// bmo-inclusion: the half-space step separates the classical and semigroup
// BMO flavors; the even-extension flavors bound the semigroup flavor
// ============================================================================

inline ExperimentReport exp_bmo_inclusion(const ExperimentConfig& cfg) {
    ExperimentReport rep;
    const Grid g = cfg.make_grid();
    const BallFamily family = BallFamily::dyadic(g);
    SplitMix64 rng(cfg.seed);

    const GridFunction step = sample(g, [&](const Point& p) {
        return heaviside(p[static_cast<std::size_t>(g.dimension - 1)]);
    });
    const double step_neumann = bmo_norm(step, BmoFlavor::neumann, family).value;
    const double step_classical = bmo_norm(step, BmoFlavor::classical, family).value;
    rep.rows.push_back(make_row("step-bmo-neumann", step_neumann, 1e-6, Cmp::le,
                                "semigroup oscillation of chi_{x_n>0}"));
    rep.rows.push_back(make_row("step-bmo-classical", step_classical, 0.4, Cmp::ge,
                                "mean oscillation of chi_{x_n>0}; exact value 1/2 on a centered ball"));

    double equiv_min = 1e300, equiv_max = 0.0;
    io::CsvTable table("function,neumann,classical,even_plus,even_minus");
    for (int k = 0; k < 8; ++k) {
        GridFunction b = (k == 0) ? step_log_function(g) : random_bounded(g, rng);
        const double vn = bmo_norm(b, BmoFlavor::neumann, family).value;
        const double vc = bmo_norm(b, BmoFlavor::classical, family).value;
        const double vp = bmo_norm(b, BmoFlavor::even_plus, family).value;
        const double vm = bmo_norm(b, BmoFlavor::even_minus, family).value;
        table.add_row(k == 0 ? std::string("step_log") : "random_" + std::to_string(k), vn,
                      vc, vp, vm);
        if (vp + vm > 1e-12) {
            equiv_min = std::min(equiv_min, vn / (vp + vm));
            equiv_max = std::max(equiv_max, vn / (vp + vm));
        }
    }
    rep.add_fitted("bmo_equivalence_ratio_min", equiv_min);
    rep.add_fitted("bmo_equivalence_ratio_max", equiv_max);
    rep.tables.emplace_back("bmo_flavors.csv", std::move(table));
    return rep;
}

// ============================================================================
// counterexample: classical H^1 membership vs half-space non-membership of
// the odd square wave
// ============================================================================

inline ExperimentReport exp_counterexample(const ExperimentConfig& cfg) {
    ExperimentReport rep;
    const std::vector<double> Ls{4.0, 8.0, 16.0, 32.0};
    const double h = cfg.half_width > 0 ? 2.0 * cfg.half_width / cfg.points : 1.0 / 128.0;
    std::vector<double> cls, nmn;
    io::CsvTable table("L,N,classical_h1_max,neumann_h1_max");
    for (double L : Ls) {
        const int N = static_cast<int>(std::lround(2.0 * L / h));
        const Grid g(1, L, N);
        const ScaleGrid sg = ScaleGrid::for_grid(g, cfg.scale_count);
        const GridFunction f = counterexample_function(g);
        const OperatorConfig ocfg;
        cls.push_back(h1_norm(f, H1Kind::radial_max, KernelFlavor::classical, sg, ocfg));
        nmn.push_back(h1_norm(f, H1Kind::radial_max, KernelFlavor::neumann, sg, ocfg));
        table.add_row(L, N, cls.back(), nmn.back());
        if (L == 16.0) {
            // witness facts at the default box
            const CancellationReport cr = check_cancellation(f, Ball(Point{0.0, 0.0}, 1.0 + h));
            rep.rows.push_back(make_row("supplementary-integral", std::abs(cr.full), 1e-12,
                                        Cmp::le, "full integral of the square wave"));
            rep.rows.push_back(make_row("supplementary-plus-mass",
                                        std::abs(cr.plus - 1.0 / std::sqrt(2.0)), 1e-10,
                                        Cmp::le, "one-sided mass 1/sqrt(2): why f is not in the half-space H^1"));
            rep.rows.push_back(make_row("supplementary-l2-norm",
                                        std::abs(norm(f, Norm::l2) - 1.0), h, Cmp::le,
                                        "unit L^2 normalisation"));
        }
    }
    const double cls_change = std::abs(cls[3] - cls[2]) / cls[2];
    rep.rows.push_back(make_row("classical-h1-change-16-32", cls_change, 0.05, Cmp::le,
                                "classical maximal norm plateaus as the box grows"));
    std::vector<double> slopes;
    for (std::size_t i = 0; i + 1 < nmn.size(); ++i)
        slopes.push_back((nmn[i + 1] - nmn[i]) / std::log(2.0));
    const double smin = *std::min_element(slopes.begin(), slopes.end());
    const double smax = *std::max_element(slopes.begin(), slopes.end());
    const double smean = (smin + smax) / 2.0;
    rep.rows.push_back(make_row("neumann-log-slope-stability", (smax - smin) / smean, 0.10,
                                Cmp::le, "successive slopes of the half-space norm vs log L"));
    rep.rows.push_back(make_row("neumann-log-slope-positive", smin, 0.0, Cmp::ge,
                                "the half-space norm diverges logarithmically"));
    rep.add_fitted("neumann_log_slope", detail::ls_slope(
                                            [&] {
                                                std::vector<double> xs;
                                                for (double L : Ls) xs.push_back(std::log(L));
                                                return xs;
                                            }(),
                                            nmn));
    rep.tables.emplace_back("counterexample_norms.csv", std::move(table));
    return rep;
}

// ============================================================================
// two-bump: H^1 norm of separated indicator bumps grows like log M
// ============================================================================

inline ExperimentReport exp_two_bump(const ExperimentConfig& cfg) {
    ExperimentReport rep;
    const double r = 1.0;
    std::vector<double> norms, ratios;
    io::CsvTable table("M,L,N,h1_max,h1_over_logM");
    for (double M : cfg.M_values) {
        const double L = 3.0 * M * r + 4.0 * r;
        const int N = 2 * static_cast<int>(std::lround(L / (r / 8.0)));  // h = r/8
        const Grid g(1, L, N);
        const double v = two_bump_h1_norm(M, r, g);
        norms.push_back(v);
        ratios.push_back(v / std::log(M));
        table.add_row(M, L, N, v, ratios.back());
    }
    const double rmin = *std::min_element(ratios.begin(), ratios.end());
    const double rmax = *std::max_element(ratios.begin(), ratios.end());
    rep.rows.push_back(make_row("two-bump-ratio-stability", (rmax - rmin) / rmin, 0.25,
                                Cmp::le, "h1_max / log M constant across M"));
    double min_step = 1e300;
    for (std::size_t i = 0; i + 1 < norms.size(); ++i)
        min_step = std::min(min_step, norms[i + 1] - norms[i]);
    rep.rows.push_back(make_row("two-bump-monotone-min-step", min_step, 0.0, Cmp::ge,
                                "norm grows with the separation"));
    // simultaneous dilation (x0, y0, r, L) -> s(x0, y0, r, L): the maximal
    // norm scales by s^n; compare after removing that factor
    {
        const double M = cfg.M_values.front();
        const double L1 = 3.0 * M * r + 4.0 * r;
        const int N = 2 * static_cast<int>(std::lround(L1 / (r / 8.0)));
        const double v1 = two_bump_h1_norm(M, r, Grid(1, L1, N));
        const double v2 = two_bump_h1_norm(M, 2.0 * r, Grid(1, 2.0 * L1, N));
        rep.rows.push_back(make_row("two-bump-dilation-invariance",
                                    std::abs(v2 / (2.0 * v1) - 1.0), 0.03, Cmp::le,
                                    "norm/s^n invariant under simultaneous dilation by s=2"));
    }
    rep.tables.emplace_back("two_bump.csv", std::move(table));
    return rep;
}

// ============================================================================
// riesz-mass: |R_{N,l} chi_{B(y0,r)}(x0)| decays like M^{-n}
// ============================================================================

inline ExperimentReport exp_riesz_mass(const ExperimentConfig& cfg) {
    ExperimentReport rep;
    const int dim = cfg.dimension;
    const double r = 1.0;
    std::vector<double> logM, logV, values;
    io::CsvTable table("M,value,reference_2_over_piM");
    for (double M : cfg.M_values) {
        const double v = riesz_mass_lower_bound(M, r, cfg.l, dim);
        values.push_back(v);
        logM.push_back(std::log(M));
        logV.push_back(std::log(v));
        table.add_row(M, v, 2.0 / (std::acos(-1.0) * M));
    }
    const double slope = detail::ls_slope(logM, logV);
    rep.rows.push_back(make_row("riesz-mass-slope-gap", std::abs(slope + dim), 0.15, Cmp::le,
                                "log-log slope vs -n (claim-degenerate exponent, corrected)"));
    rep.add_fitted("riesz_mass_slope", slope);
    const double M_last = cfg.M_values.back();
    if (dim == 1) {
        const double ref = 2.0 / (std::acos(-1.0) * M_last);
        rep.rows.push_back(make_row("riesz-mass-value-at-largest-M",
                                    std::abs(values.back() - ref) / ref, 0.10, Cmp::le,
                                    "vs the analytic 2/(pi M)"));
    }
    rep.rows.push_back(make_row("riesz-mass-min-value",
                                *std::min_element(values.begin(), values.end()), 0.0,
                                Cmp::ge, "non-degeneracy: division by R_{N,l}g(x0) is safe"));
    // a growth exponent of +n sometimes quoted for this quantity fails
    // dimensional analysis; the measured fit (above) is -n and the fitted
    // slope is recorded for the record
    rep.notes.push_back("a growth exponent M^n is inconsistent with dimensional "
                        "analysis; the measured decay matches M^{-n}");
    rep.tables.emplace_back("riesz_mass.csv", std::move(table));
    return rep;
}

// ============================================================================
// factorize-atom: single-atom approximate factorization through Pi_l
// ============================================================================

inline ExperimentReport exp_factorize_atom(const ExperimentConfig& cfg) {
    ExperimentReport rep;
    const Grid g = cfg.make_grid();
    const ScaleGrid sg = cfg.make_scales(g);
    const OperatorConfig ocfg;

    // a fixed two-valued unit atom on a dyadic block in the plus half
    const double r = 16.0 * g.spacing();
    const int N = g.points_per_axis;
    const int start = N / 2 + N / 8;  // left edge of the block
    WeakAtom atom;
    atom.linf_bound = 1.0 / ball_volume(g.dimension, r);
    atom.values = GridFunction(g);
    if (g.dimension == 1) {
        for (int k = 0; k < 32; ++k)
            atom.values.values[static_cast<std::size_t>(start + k)] =
                (k < 16 ? 1.0 : -1.0) * atom.linf_bound;
        const double lo = g.coordinate(start) - 0.5 * g.spacing();
        atom.ball = Ball(Point{lo + r, 0.0}, r);
    } else {
        throw std::invalid_argument("factorize-atom: configured for dimension 1");
    }

    const double atom_h1 =
        h1_norm(atom.values, H1Kind::radial_max, KernelFlavor::neumann, sg, ocfg);

    double mean_worst = 0.0, outside_worst = 0.0, cost_worst = 0.0, budget_worst = 0.0;
    io::CsvTable table("epsilon,M,residual_h1,pair_cost,envelope_C,delta,riesz_mass");
    for (double eps : cfg.epsilons) {
        const FactoredAtom fa = approx_factor_atom(atom, eps, cfg.l, ocfg);
        const double resid =
            h1_norm(fa.residual, H1Kind::radial_max, KernelFlavor::neumann, sg, ocfg);
        budget_worst = std::max(budget_worst, resid / (eps * atom_h1));
        mean_worst = std::max(mean_worst, std::abs(fa.residual_integral));
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (fa.residual.values[i] == 0.0) continue;
            const Point p = g.point_at(i);
            if (!in_ball(g.dimension, Ball(atom.ball.center, atom.ball.radius * 1.0001), p) &&
                !in_ball(g.dimension, Ball(fa.pair.y0, fa.pair.radius * 1.0001), p))
                outside_worst = std::max(outside_worst, std::abs(fa.residual.values[i]));
        }
        cost_worst = std::max(cost_worst,
                              fa.pair.pair_cost() / std::pow(static_cast<double>(fa.pair.M),
                                                             g.dimension));
        rep.add_fitted("envelope_C_eps_" + io::format_double(eps), fa.envelope_constant);
        table.add_row(eps, fa.pair.M, resid, fa.pair.pair_cost(), fa.envelope_constant,
                      fa.delta, fa.pair.riesz_mass);
    }
    // the measured residual need not shrink monotonically in epsilon: when
    // the separated ball flips to the far side of the interface, the mirror
    // image cancels up to half the Riesz mass and the constant swings; the
    // contract is the budget ||W||_{H1} <= eps ||a||_{H1}, uniformly
    rep.rows.push_back(make_row("factor-residual-epsilon-budget", budget_worst, 1.0,
                                Cmp::lt, "residual H1 norm stays below eps * atom H1 norm"));
    rep.rows.push_back(make_row("factor-residual-mean", mean_worst, 1e-8, Cmp::le,
                                "integrate(W) = 0"));
    rep.rows.push_back(make_row("factor-envelope-outside-support", outside_worst, 1e-12,
                                Cmp::le, "W vanishes off B(x0,r) and B(y0,r)"));
    const double cost_c = 1.1 * cost_worst;
    rep.add_fitted("pair_cost_over_Mn", cost_c);
    rep.rows.push_back(make_row("factor-pair-cost-over-Mn", cost_worst, cost_c, Cmp::le,
                                "||g||_2 ||h||_2 <= C M^n with the fitted C"));
    rep.tables.emplace_back("factorize_atom.csv", std::move(table));
    return rep;
}

// ============================================================================
// weak-factorize: the iterated factorization with geometric residual decay
// ============================================================================

inline ExperimentReport exp_weak_factorize(const ExperimentConfig& cfg) {
    ExperimentReport rep;
    const Grid g = cfg.make_grid();
    SplitMix64 rng(cfg.seed);
    const OperatorConfig ocfg;

    std::vector<GridFunction> funcs;
    funcs.push_back(dyadic_block_function(g, rng, 16));
    funcs.push_back(dyadic_block_function(g, rng, 16));
    funcs.push_back(dyadic_block_function(g, rng, 32));
    {
        GridFunction two = dyadic_block_function(g, rng, 16);
        const GridFunction other = dyadic_block_function(g, rng, 16);
        for (std::size_t i = 0; i < two.size(); ++i) two.values[i] += other.values[i];
        funcs.push_back(std::move(two));
    }
    funcs.push_back(dyadic_block_function(g, rng, 32));

    double ratio_worst = 0.0, recon_worst = 0.0;
    double cost_ratio_min = 1e300, cost_ratio_max = 0.0;
    io::CsvTable table("function,level,terms,residual_h1,ratio,cost");
    for (std::size_t fi = 0; fi < funcs.size(); ++fi) {
        const FactorizationLedger led =
            weak_factorize(funcs[fi], cfg.epsilon, cfg.l, cfg.K_max, ocfg);
        if (led.aborted) rep.notes.push_back("function " + std::to_string(fi) + ": " + led.note);
        for (std::size_t k = 0; k < led.levels.size(); ++k) {
            const auto& lvl = led.levels[k];
            table.add_row(fi, k + 1, lvl.terms.size(), lvl.residual_h1, lvl.ratio, lvl.cost);
            ratio_worst = std::max(ratio_worst, lvl.ratio);
        }
        // reconstruction: f - sum of all Pi contributions must equal E_K
        GridFunction recon = funcs[fi];
        for (const auto& lvl : led.levels)
            for (const auto& term : lvl.terms) {
                const GridFunction pi = pair_pi_form(term.pair, ocfg);
                for (std::size_t i = 0; i < recon.size(); ++i)
                    recon.values[i] -= term.lambda * pi.values[i];
            }
        double err2 = 0.0;
        for (std::size_t i = 0; i < recon.size(); ++i) {
            const double d = recon.values[i] - led.residual.values[i];
            err2 += d * d;
        }
        recon_worst = std::max(recon_worst, std::sqrt(err2 * g.cell_volume()));
        if (led.source_h1 > 0.0) {
            cost_ratio_min = std::min(cost_ratio_min, led.total_l1_cost / led.source_h1);
            cost_ratio_max = std::max(cost_ratio_max, led.total_l1_cost / led.source_h1);
        }
    }
    rep.rows.push_back(make_row("weak-factorize-max-ratio", ratio_worst, 0.8, Cmp::le,
                                "strict geometric decay of per-level residual H1 norms"));
    rep.rows.push_back(make_row("weak-factorize-reconstruction-l2", recon_worst, 1e-7,
                                Cmp::le, "f - sum lambda Pi - E_K in L^2"));
    rep.add_fitted("cost_over_h1_min", cost_ratio_min);
    rep.add_fitted("cost_over_h1_max", cost_ratio_max);
    rep.tables.emplace_back("weak_factorize.csv", std::move(table));
    return rep;
}

// ============================================================================
// duality-pairing: <b, Pi_l(h,g)> = <[b, R_{N,l}]g, h>
// ============================================================================

inline ExperimentReport exp_duality_pairing(const ExperimentConfig& cfg) {
    ExperimentReport rep;
    const Grid g = cfg.make_grid();
    SplitMix64 rng(cfg.seed);
    const OperatorConfig ocfg;
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        const GridFunction b = random_bump_sum(g, rng, 3);
        const GridFunction gg = random_bump_sum(g, rng, 3);
        const GridFunction hh = random_bump_sum(g, rng, 3);
        const GridFunction pi = pi_form(hh, gg, cfg.l, ocfg);
        const GridFunction comm = commutator(b, gg, cfg.l, ocfg);
        const double lhs = inner_product(b, pi);
        const double rhs = inner_product(comm, hh);
        const double scale =
            std::max(norm(b, Norm::linf) * norm(gg, Norm::l2) * norm(hh, Norm::l2), 1e-300);
        worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    rep.rows.push_back(make_row("duality-max-normalized-gap", worst, 1e-8, Cmp::le,
                                "50 random triples; gap scaled by ||b||_inf ||g||_2 ||h||_2"));
    return rep;
}

// ============================================================================
// commutator-bound: ||[b, R_{N,l}]f||_2 <= C bmo(b) ||f||_2
// ============================================================================

inline ExperimentReport exp_commutator_bound(const ExperimentConfig& cfg) {
    ExperimentReport rep;
    const Grid g = cfg.make_grid();
    const BallFamily family = BallFamily::dyadic(g);
    SplitMix64 rng(cfg.seed);
    const OperatorConfig ocfg;

    std::vector<std::pair<std::string, GridFunction>> bs;
    bs.emplace_back("step", sample(g, [&](const Point& p) {
                        return heaviside(p[static_cast<std::size_t>(g.dimension - 1)]);
                    }));
    bs.emplace_back("step_log", step_log_function(g));
    for (int k = 0; k < 3; ++k)
        bs.emplace_back("random_" + std::to_string(k), random_bounded(g, rng));

    std::vector<GridFunction> fs;
    for (int k = 0; k < 50; ++k) fs.push_back(random_bump_sum(g, rng, 3));

    double step_both_sides = 0.0;
    double rb_min = 1e300, rb_max = 0.0;
    io::CsvTable table("b,bmo_neumann,sup_ratio,implied_C");
    for (const auto& [name, b] : bs) {
        double sup_ratio = 0.0;
        for (const GridFunction& f : fs) {
            const GridFunction c = commutator(b, f, cfg.l, ocfg);
            sup_ratio = std::max(sup_ratio, norm(c, Norm::l2) / norm(f, Norm::l2));
        }
        const double vb = bmo_norm(b, BmoFlavor::neumann, family).value;
        if (name == "step") {
            step_both_sides = std::max(sup_ratio, vb);
            table.add_row(name, vb, sup_ratio, 0.0);
            continue;
        }
        const double rb = sup_ratio / vb;
        rb_min = std::min(rb_min, rb);
        rb_max = std::max(rb_max, rb);
        table.add_row(name, vb, sup_ratio, rb);
    }
    rep.add_fitted("commutator_C", 1.1 * rb_max);
    rep.rows.push_back(make_row("commutator-step-both-sides", step_both_sides, 1e-4, Cmp::le,
                                "for the half-space step both the operator norm and bmo vanish"));
    rep.rows.push_back(make_row("commutator-constant-stability", rb_max / rb_min, 10.0,
                                Cmp::le,
                                "spread of implied constants across the non-degenerate b"));
    rep.tables.emplace_back("commutator.csv", std::move(table));
    return rep;
}

// ============================================================================
// fs-synthesis: b0 + sum R*_{N,l} b_l lands in the semigroup BMO ball
// ============================================================================

inline ExperimentReport exp_fs_synthesis(const ExperimentConfig& cfg) {
    ExperimentReport rep;
    const Grid g = cfg.make_grid();
    const BallFamily family = BallFamily::dyadic(g);
    SplitMix64 rng(cfg.seed);
    const OperatorConfig ocfg;
    double vmax = 0.0;
    io::CsvTable table("tuple,bmo_neumann");
    for (int k = 0; k < 20; ++k) {
        const GridFunction b0 = random_bounded(g, rng);
        std::vector<GridFunction> parts;
        for (int l = 0; l < g.dimension; ++l) parts.push_back(random_bounded(g, rng));
        const GridFunction synth = fs_synthesize(b0, parts, ocfg);
        const double v = bmo_norm(synth, BmoFlavor::neumann, family).value;
        vmax = std::max(vmax, v);
        table.add_row(k, v);
    }
    rep.add_fitted("synthesis_C", 1.1 * vmax);
    rep.rows.push_back(make_row("fs-synthesis-max-bmo", vmax, 100.0, Cmp::le,
                                "sup over 20 tuples with ||b_j||_inf <= 1; fitted C recorded"));
    rep.notes.push_back("the converse decomposition direction is non-constructive and "
                        "deliberately not exercised");
    rep.tables.emplace_back("fs_synthesis.csv", std::move(table));
    return rep;
}

// ============================================================================
// Registry
// ============================================================================

using ExperimentFn = ExperimentReport (*)(const ExperimentConfig&);

inline const std::vector<std::pair<std::string, ExperimentFn>>& experiment_registry() {
    static const std::vector<std::pair<std::string, ExperimentFn>> reg = {
        {"bmo-inclusion", exp_bmo_inclusion},
        {"commutator-bound", exp_commutator_bound},
        {"counterexample", exp_counterexample},
        {"duality-pairing", exp_duality_pairing},
        {"factorize-atom", exp_factorize_atom},
        {"fs-synthesis", exp_fs_synthesis},
        {"kernel-identities", exp_kernel_identities},
        {"norm-equivalence", exp_norm_equivalence},
        {"reflection-identities", exp_reflection_identities},
        {"riesz-mass", exp_riesz_mass},
        {"two-bump", exp_two_bump},
        {"weak-factorize", exp_weak_factorize},
    };
    return reg;
}

inline std::vector<std::string> list_experiments() {
    std::vector<std::string> names;
    for (const auto& [name, fn] : experiment_registry()) names.push_back(name);
    return names;  // registry is kept sorted
}

/// Run one experiment and write report.json plus its CSV tables under
/// out_dir/<experiment>/.  Throws on unknown names before creating any file.
inline ExperimentReport run_experiment(ExperimentConfig cfg) {
    ExperimentFn fn = nullptr;
    for (const auto& [name, f] : experiment_registry())
        if (name == cfg.experiment) fn = f;
    if (!fn) throw std::invalid_argument("unknown experiment: " + cfg.experiment);

    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep = fn(cfg);
    rep.config = cfg;
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const std::filesystem::path dir = std::filesystem::path(cfg.out_dir) / cfg.experiment;
    io::CsvTable metrics("name,value,tolerance,cmp,pass");
    for (const auto& r : rep.rows)
        metrics.add_row(r.name, r.value, r.tolerance, cmp_text(r.cmp), r.pass);
    metrics.write(dir / "metrics.csv");
    for (const auto& [fname, tbl] : rep.tables) tbl.write(dir / fname);
    io::write_json(rep.to_json(), dir / "report.json");
    return rep;
}

} // namespace neulab
