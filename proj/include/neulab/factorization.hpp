#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "neulab/atoms.hpp"
#include "neulab/functionals.hpp"
#include "neulab/grid.hpp"
#include "neulab/kernels.hpp"
#include "neulab/operators.hpp"

/// Constructive weak factorization of the half-space Hardy space.
///
/// A single atom a supported in B(x0, r) is approximately realised as a
/// bilinear form Pi_l(h, g) = h R_{N,l} g - g R*_{N,l} h with
///     g = indicator of B(y0, r),   |x0 - y0| = M r,
///     h = (a - delta phi) / R_{N,l} g(x0),
/// where phi is a normalised bump beside x0 and delta is chosen so that
/// <h, R_{N,l} g> = 0.  That correction makes both pieces of the residual
///     W = a - Pi_l(h, g) = (a - h R_{N,l} g)  +  g R*_{N,l} h
/// individually mean-free, so each piece is again an admissible atom of size
/// O(1/M) and the construction can be iterated with geometric decay.

namespace neulab {

/// Smallest power of two M > 10 with log2(M)/M below the target accuracy.
inline int separation_multiple(double epsilon) {
    if (!(epsilon > 0.0))
        throw std::invalid_argument("separation_multiple: epsilon must be positive");
    for (int M = 16; M <= (1 << 24); M *= 2)
        if (std::log2(static_cast<double>(M)) / M < epsilon) return M;
    throw std::invalid_argument("separation_multiple: epsilon out of range");
}

/// One factored atom: the pair (g, h) feeding Pi_l, with its geometry and
/// recorded norms.  g is the indicator of B(y0, r); h lives in B(x0, r).
struct FactorPair {
    GridFunction g;
    GridFunction h;
    int l = 0;
    int M = 0;
    Point x0{0.0, 0.0};  ///< evaluation point (center shifted off the interface)
    Point y0{0.0, 0.0};
    double radius = 0.0;
    double g_l2 = 0.0;
    double h_l2 = 0.0;
    double riesz_mass = 0.0;  ///< R_{N,l} g(x0), the divisor in h

    double pair_cost() const { return g_l2 * h_l2; }
};

/// approx_factor_atom output: the pair, the residual W = a - Pi_l(h,g), and
/// W's two ball-supported pieces renormalised as unit atoms for iteration.
struct FactoredAtom {
    FactorPair pair;
    GridFunction residual;
    WeakAtom child_x, child_y;           ///< unit atoms on B(x0,r), B(y0,r)
    double lambda_x = 0.0, lambda_y = 0.0;  ///< W = lambda_x child_x + lambda_y child_y
    double residual_integral = 0.0;
    double envelope_constant = 0.0;  ///< measured sup |W| * M r^n
    double delta = 0.0;              ///< mass routed through the corrector bump
};

namespace detail {

/// y0 = x0 +- (M r / sqrt(n)) per axis: start from the all-minus offsets and
/// flip signs per axis until B(y0, r) sits inside the box and inside x0's
/// closed half-space.
inline Point place_separated_center(const Grid& g, const Point& x0, double off, double r) {
    const int n = g.dimension;
    const int na = g.normal_axis();
    const double side = x0[static_cast<std::size_t>(na)] >= 0.0 ? 1.0 : -1.0;
    for (int pattern = 0; pattern < (1 << n); ++pattern) {
        Point cand{0.0, 0.0};
        bool ok = true;
        for (int d = 0; d < n && ok; ++d) {
            const double s = ((pattern >> d) & 1) ? 1.0 : -1.0;
            cand[static_cast<std::size_t>(d)] = x0[static_cast<std::size_t>(d)] + s * off;
            if (std::abs(cand[static_cast<std::size_t>(d)]) > g.half_width - r) ok = false;
        }
        if (ok && cand[static_cast<std::size_t>(na)] * side >= r) return cand;
    }
    throw std::invalid_argument(
        "place_separated_center: B(y0,r) does not fit inside the box on x0's "
        "side; increase half_width");
}

} // namespace detail

/// Factor one atom through Pi_l.  The separation M comes from epsilon via
/// separation_multiple; the residual satisfies integrate(W) = integrate(a)
/// (mass-conserving, and admissible atoms carry zero mass; the defect beyond
/// that is enforced to stay at rounding level) and
/// |W| <= (C / (M r^n)) (chi_{B(x0,r)} + chi_{B(y0,r)}) with C recorded.
inline FactoredAtom approx_factor_atom(const WeakAtom& a, double epsilon, int l,
                                       const OperatorConfig& cfg = {}) {
    const Grid& grid = a.values.grid;
    const int n = grid.dimension;
    const int na = grid.normal_axis();
    if (l < 0 || l >= n) throw std::invalid_argument("approx_factor_atom: bad axis");
    const double r = a.ball.radius;
    const int M = separation_multiple(epsilon);

    // evaluation point: the ball center, shifted off the interface if it
    // sits exactly on it ("take another fixed point")
    Point x0 = a.ball.center;
    if (x0[static_cast<std::size_t>(na)] == 0.0) x0[static_cast<std::size_t>(na)] = r / 100.0;
    const double off = M * r / std::sqrt(static_cast<double>(n));
    const Point y0 = detail::place_separated_center(grid, x0, off, r);

    FactoredAtom out;
    FactorPair& pair = out.pair;
    pair.l = l;
    pair.M = M;
    pair.x0 = x0;
    pair.y0 = y0;
    pair.radius = r;
    pair.g = ball_indicator(grid, Ball(y0, r));
    pair.riesz_mass = riesz_point_value(pair.g, l, x0, KernelFlavor::neumann, false, cfg);
    if (pair.riesz_mass == 0.0)
        throw std::logic_error("approx_factor_atom: vanishing Riesz mass at x0");

    // support cells of h = (a - delta phi) / R_{N,l}g(x0): the atom's own
    // support plus the corrector bump phi (normalised indicator of the ball
    // of radius r/2 beside the evaluation point)
    std::vector<std::size_t> cells;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        if (a.values.values[i] != 0.0) cells.push_back(i);
    GridFunction bump_raw = ball_indicator(grid, Ball(x0, 0.5 * r));
    double bump_mass = integrate(bump_raw);
    if (bump_mass <= 0.0) {
        // radius r/2 can miss every cell center when the ball is only a few
        // cells wide; fall back to the full atom ball
        bump_raw = ball_indicator(grid, Ball(x0, r));
        bump_mass = integrate(bump_raw);
    }
    if (bump_mass <= 0.0)
        throw std::invalid_argument("approx_factor_atom: ball too small for the grid");
    GridFunction phi = bump_raw;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        phi.values[i] /= bump_mass;
        if (phi.values[i] != 0.0 && a.values.values[i] == 0.0) cells.push_back(i);
    }

    // R_{N,l} g on the cells where h lives
    const double voln = grid.cell_volume();
    std::vector<double> rg(cells.size());
    double pair_a = 0.0, pair_phi = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        rg[c] = riesz_point_value(pair.g, l, grid.point_at(cells[c]), KernelFlavor::neumann,
                                  false, cfg);
        pair_a += a.values.values[cells[c]] * rg[c];
        pair_phi += phi.values[cells[c]] * rg[c];
    }
    pair_a *= voln;
    pair_phi *= voln;
    if (pair_phi == 0.0)
        throw std::logic_error("approx_factor_atom: corrector bump sees no Riesz mass");
    out.delta = pair_a / pair_phi;

    pair.h = GridFunction(grid);
    for (std::size_t c = 0; c < cells.size(); ++c)
        pair.h.values[cells[c]] =
            (a.values.values[cells[c]] - out.delta * phi.values[cells[c]]) / pair.riesz_mass;
    pair.g_l2 = norm(pair.g, Norm::l2);
    pair.h_l2 = norm(pair.h, Norm::l2);

    // residual piece on B(x0, r):  a - h R_{N,l} g
    out.residual = GridFunction(grid);
    GridFunction wx(grid);
    double sup_x = 0.0, int_x = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const double v = a.values.values[cells[c]] - pair.h.values[cells[c]] * rg[c];
        wx.values[cells[c]] = v;
        out.residual.values[cells[c]] = v;
        sup_x = std::max(sup_x, std::abs(v));
        int_x += v;
    }
    // residual piece on B(y0, r):  g R*_{N,l} h
    GridFunction wy(grid);
    double sup_y = 0.0, int_y = 0.0;
    for (std::size_t i = 0; i < pair.g.size(); ++i) {
        if (pair.g.values[i] == 0.0) continue;
        const double v =
            riesz_point_value(pair.h, l, grid.point_at(i), KernelFlavor::neumann, true, cfg);
        wy.values[i] = v;
        out.residual.values[i] += v;
        sup_y = std::max(sup_y, std::abs(v));
        int_y += v;
    }
    out.residual_integral = (int_x + int_y) * voln;
    // the construction conserves the input's mass: int W = int a up to the
    // transpose pairing <h, Rg> = <R*h, g>, so only the defect beyond the
    // input's own integral signals lost cancellation (iterated factorization
    // feeds back children whose integral is small but not exactly zero)
    double a_sum = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c) a_sum += a.values.values[cells[c]];
    const double scale = norm(a.values, Norm::linf) * ball_volume(n, r) + 1.0;
    if (std::abs(out.residual_integral - a_sum * voln) > 1e-8 * scale)
        throw std::logic_error("approx_factor_atom: residual lost cancellation");
    out.envelope_constant = std::max(sup_x, sup_y) * M * std::pow(r, n);

    const double budget_x = 1.0 / ball_volume(n, a.ball.radius);
    out.lambda_x = sup_x / budget_x;
    out.child_x.ball = a.ball;
    out.child_x.linf_bound = budget_x;
    if (out.lambda_x > 0.0) {
        out.child_x.values = wx;
        for (double& v : out.child_x.values.values) v /= out.lambda_x;
    } else {
        out.child_x.values = GridFunction(grid);
    }
    const double budget_y = 1.0 / ball_volume(n, r);
    out.lambda_y = sup_y / budget_y;
    out.child_y.ball = Ball(y0, r);
    out.child_y.linf_bound = budget_y;
    if (out.lambda_y > 0.0) {
        out.child_y.values = wy;
        for (double& v : out.child_y.values.values) v /= out.lambda_y;
    } else {
        out.child_y.values = GridFunction(grid);
    }
    return out;
}

/// Pi_l(h, g) = h R_{N,l} g - g R*_{N,l} h for a stored pair, evaluated
/// sparsely on supp h and supp g through the same point-value path the
/// factorization itself uses, so reconstruction checks reproduce the ledger
/// to rounding.
inline GridFunction pair_pi_form(const FactorPair& pair, const OperatorConfig& cfg = {}) {
    const Grid& grid = pair.g.grid;
    GridFunction out(grid);
    for (std::size_t i = 0; i < pair.h.size(); ++i) {
        if (pair.h.values[i] == 0.0) continue;
        out.values[i] += pair.h.values[i] * riesz_point_value(pair.g, pair.l, grid.point_at(i),
                                                              KernelFlavor::neumann, false, cfg);
    }
    for (std::size_t i = 0; i < pair.g.size(); ++i) {
        if (pair.g.values[i] == 0.0) continue;
        out.values[i] -= pair.g.values[i] * riesz_point_value(pair.h, pair.l, grid.point_at(i),
                                                              KernelFlavor::neumann, true, cfg);
    }
    return out;
}

/// |R_{N,l} chi_{B(y0,r)}(x0)| for the factorization geometry, computed by
/// grid-free quadrature with both points placed deep inside the half-space
/// (depth 50 M r), so the reflected correction contributes ~1%.  Decays like
/// M^{-n}; see the riesz-mass experiment for the fitted exponent.
inline double riesz_mass_lower_bound(double M, double r, int l, int dimension = 1) {
    if (!(M > 10.0)) throw std::invalid_argument("riesz_mass_lower_bound: need M > 10");
    if (!(r > 0.0)) throw std::invalid_argument("riesz_mass_lower_bound: need r > 0");
    if (l < 0 || l >= dimension)
        throw std::invalid_argument("riesz_mass_lower_bound: bad axis");
    const double depth = 50.0 * M * r;
    Point x0{depth, depth};
    Point y0 = x0;
    const double off = M * r / std::sqrt(static_cast<double>(dimension));
    for (int d = 0; d < dimension; ++d) y0[static_cast<std::size_t>(d)] -= off;

    if (dimension == 1) {
        // composite Simpson over [y0 - r, y0 + r]
        const int segs = 2000;
        const double step = 2.0 * r / segs;
        double acc = 0.0;
        for (int k = 0; k <= segs; ++k) {
            const double w = (k == 0 || k == segs) ? 1.0 : (k % 2 ? 4.0 : 2.0);
            const Point y{y0[0] - r + k * step, 0.0};
            acc += w * neumann_riesz_kernel(1, l, x0, y);
        }
        return std::abs(acc * step / 3.0);
    }
    // polar rule on the disc: trapezoid in angle, Simpson in radius
    const int nr = 64, nt = 128;
    const double dr = r / nr, dt = 2.0 * std::acos(-1.0) / nt;
    double acc = 0.0;
    for (int i = 0; i <= nr; ++i) {
        const double rho = i * dr;
        const double wr = (i == 0 || i == nr) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        double ring = 0.0;
        for (int j = 0; j < nt; ++j) {
            const Point y{y0[0] + rho * std::cos(j * dt), y0[1] + rho * std::sin(j * dt)};
            ring += neumann_riesz_kernel(2, l, x0, y);
        }
        acc += wr * rho * ring * dt;
    }
    return std::abs(acc * dr / 3.0);
}

/// H^1 maximal norm of the separated-bump pair chi_{B(x0,r)} - chi_{B(y0,r)}
/// with |x0 - y0| = M r, both bumps stacked along the normal axis inside the
/// positive half-space.  Grows like log M.
inline double two_bump_h1_norm(double M, double r, const Grid& grid,
                               const OperatorConfig& cfg = {}) {
    if (!(M > 10.0)) throw std::invalid_argument("two_bump_h1_norm: need M > 10");
    const int n = grid.dimension;
    const int na = grid.normal_axis();
    const double L = grid.half_width;
    const double base = 0.5 * (L - M * r);  // symmetric clearances
    if (base - r < M * r)
        throw std::invalid_argument(
            "two_bump_h1_norm: box too small (need margin >= M r around both bumps)");
    Point y0{0.0, 0.0}, x0{0.0, 0.0};
    y0[static_cast<std::size_t>(na)] = base;
    x0[static_cast<std::size_t>(na)] = base + M * r;
    const GridFunction f = linear_combination(1.0, ball_indicator(grid, Ball(x0, r)), -1.0,
                                              ball_indicator(grid, Ball(y0, r)));
    return h1_norm(f, H1Kind::radial_max, KernelFlavor::neumann, ScaleGrid::for_grid(grid),
                   cfg);
}

// ============================================================================
// Iterated factorization
// ============================================================================

struct FactorizationLedger {
    struct Term {
        double lambda = 0.0;
        FactorPair pair;
    };
    struct Level {
        std::vector<Term> terms;
        double residual_h1 = 0.0;
        double ratio = 0.0;  ///< residual_h1 / previous level's residual_h1
        double cost = 0.0;   ///< sum |lambda| ||g||_2 ||h||_2 of this level
    };
    std::vector<Level> levels;
    double epsilon = 0.0;
    int l = 0;
    double source_h1 = 0.0;     ///< H^1 max norm of the input
    double total_l1_cost = 0.0;
    GridFunction residual;      ///< E_K, the exact unfactored remainder field
    bool aborted = false;
    std::string note;

    double final_residual_h1() const {
        return levels.empty() ? source_h1 : levels.back().residual_h1;
    }
};

/// Iteratively factor f through Pi_l: level 1 atoms come from the martingale
/// decomposition of f; each factored atom leaves a residual that is already
/// split into two admissible atoms, and those become the next level's input.
/// The field E_k = f - sum of all Pi contributions is maintained exactly and
/// its H^1 maximal norm is recorded per level.  Stops at K_max levels, when
/// the residual norm drops below 1e-6, or (abort) when the residual fails to
/// contract twice in a row.
inline FactorizationLedger weak_factorize(const GridFunction& f, double epsilon, int l,
                                          int K_max, const OperatorConfig& cfg = {}) {
    FactorizationLedger led;
    led.epsilon = epsilon;
    led.l = l;
    const ScaleGrid sg = ScaleGrid::for_grid(f.grid);
    led.source_h1 = h1_norm(f, H1Kind::radial_max, KernelFlavor::neumann, sg, cfg);
    led.residual = f;

    AtomicDecomposition dec = haar_atomic_decomposition(f);
    std::vector<AtomicDecomposition::Term> atoms(std::move(dec.terms));
    double prev_h1 = led.source_h1;
    int stalls = 0;
    for (int k = 1; k <= K_max && !atoms.empty(); ++k) {
        FactorizationLedger::Level level;
        std::vector<AtomicDecomposition::Term> next;
        next.reserve(2 * atoms.size());
        for (const auto& term : atoms) {
            FactoredAtom fa = approx_factor_atom(term.atom, epsilon, l, cfg);
            // E -= lambda Pi = lambda (a - W); a and W are sparse
            for (std::size_t i = 0; i < f.size(); ++i) {
                const double da = term.atom.values.values[i];
                const double dw = fa.residual.values[i];
                if (da != 0.0 || dw != 0.0)
                    led.residual.values[i] -= term.lambda * (da - dw);
            }
            level.cost += std::abs(term.lambda) * fa.pair.pair_cost();
            level.terms.push_back({term.lambda, std::move(fa.pair)});
            if (fa.lambda_x > 0.0)
                next.push_back({term.lambda * fa.lambda_x, std::move(fa.child_x)});
            if (fa.lambda_y > 0.0)
                next.push_back({term.lambda * fa.lambda_y, std::move(fa.child_y)});
        }
        level.residual_h1 =
            h1_norm(led.residual, H1Kind::radial_max, KernelFlavor::neumann, sg, cfg);
        level.ratio = prev_h1 > 0.0 ? level.residual_h1 / prev_h1 : 0.0;
        led.total_l1_cost += level.cost;
        const double h1_now = level.residual_h1;
        const bool contracting = h1_now < prev_h1;
        led.levels.push_back(std::move(level));
        prev_h1 = h1_now;
        atoms = std::move(next);
        if (h1_now < 1e-6) break;
        stalls = contracting ? 0 : stalls + 1;
        if (stalls >= 2) {
            led.aborted = true;
            led.note = "residual failed to contract on two consecutive levels";
            break;
        }
    }
    return led;
}

} // namespace neulab
