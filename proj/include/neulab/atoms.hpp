#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "neulab/grid.hpp"

/// Atoms for the half-space Hardy space and a constructive atomic
/// decomposition.
///
/// A weak atom is supported in a ball, bounded by an L^inf budget, and has
/// vanishing integral; when its ball straddles the interface {x_n = 0} the
/// integral over each half-space must vanish separately.  (Mass on a single
/// half-space is exactly what the half-space theory excludes: the gated
/// semigroup preserves the mass of each half separately, so one-sided mass
/// makes the maximal function non-integrable.  See counterexample_function.)

namespace neulab {

// ============================================================================
// Weak atoms
// ============================================================================

/// Ball-supported, L^inf-bounded, cancellative building block.
struct WeakAtom {
    Ball ball;
    GridFunction values;
    double linf_bound = 0.0;
};

/// Integrals of a candidate atom: over the whole grid and over each closed
/// half-space, plus the support diagnostics.  `full` is computed as
/// `plus + minus`, so additivity is exact by construction.
struct CancellationReport {
    double full = 0.0;
    double plus = 0.0;
    double minus = 0.0;
    bool support_ok = true;    ///< no nonzero sample outside the closed ball
    double support_leak = 0.0; ///< largest |a| outside the ball
    bool straddles = false;    ///< ball meets both open half-spaces
};

/// Integrate `a` over each half-space and check supp a is inside `ball`.
/// The half-space integrals are binding for atoms whose ball straddles the
/// interface; the full integral must always vanish.
inline CancellationReport check_cancellation(const GridFunction& a, const Ball& ball) {
    CancellationReport rep;
    const Grid& g = a.grid;
    const double r2 = ball.radius * ball.radius * (1.0 + 1e-12);
    double plus = 0.0, minus = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double v = a.values[i];
        if (g.in_plus(i)) plus += v;
        else minus += v;
        if (v != 0.0 && sq_dist(g.dimension, ball.center, g.point_at(i)) > r2) {
            rep.support_ok = false;
            rep.support_leak = std::max(rep.support_leak, std::abs(v));
        }
    }
    rep.plus = plus * g.cell_volume();
    rep.minus = minus * g.cell_volume();
    rep.full = rep.plus + rep.minus;
    const double rn = ball.center[static_cast<std::size_t>(g.normal_axis())];
    rep.straddles = std::abs(rn) < ball.radius;
    return rep;
}

/// Per-invariant validation of a WeakAtom (support, size, cancellation).
struct WeakAtomCheck {
    CancellationReport cancellation;
    double sup_norm = 0.0;
    bool size_ok = false;
    bool mean_ok = false;
    bool half_means_ok = false;

    bool ok() const {
        return cancellation.support_ok && size_ok && mean_ok && half_means_ok;
    }
};

inline WeakAtomCheck validate_weak_atom(const WeakAtom& atom, double tol = 1e-10) {
    WeakAtomCheck c;
    c.cancellation = check_cancellation(atom.values, atom.ball);
    c.sup_norm = norm(atom.values, Norm::linf);
    c.size_ok = c.sup_norm <= atom.linf_bound * (1.0 + 1e-12);
    c.mean_ok = std::abs(c.cancellation.full) <= tol;
    c.half_means_ok = !c.cancellation.straddles ||
                      (std::abs(c.cancellation.plus) <= tol &&
                       std::abs(c.cancellation.minus) <= tol);
    return c;
}

// ============================================================================
// Order-M atoms (witness form)
// ============================================================================

/// Second-difference discretisation of the (positive) half-space Laplacian:
/// reflecting ghost cells at the interface along the normal axis and at the
/// outer walls.  This is the discrete Delta_N used to check witness chains
/// and to cross-check the semigroup against the heat equation.
inline GridFunction discrete_neumann_laplacian(const GridFunction& f) {
    const Grid& g = f.grid;
    const int N = g.points_per_axis;
    const double h2 = g.spacing() * g.spacing();
    GridFunction out(g);
    const auto neighbor = [&](int k, int step, bool normal) {
        const int j = k + step;
        if (j < 0 || j >= N) return k;                       // outer wall: mirror
        if (normal && (k < N / 2) != (j < N / 2)) return k;  // interface: mirror
        return j;
    };
    if (g.dimension == 1) {
        for (int k = 0; k < N; ++k) {
            const double c = f.values[static_cast<std::size_t>(k)];
            const double lft = f.values[static_cast<std::size_t>(neighbor(k, -1, true))];
            const double rgt = f.values[static_cast<std::size_t>(neighbor(k, +1, true))];
            out.values[static_cast<std::size_t>(k)] = (2.0 * c - lft - rgt) / h2;
        }
        return out;
    }
    for (int k0 = 0; k0 < N; ++k0)
        for (int k1 = 0; k1 < N; ++k1) {
            const double c = f.values[g.flat_index(k0, k1)];
            const double a0 = f.values[g.flat_index(neighbor(k0, -1, false), k1)];
            const double b0 = f.values[g.flat_index(neighbor(k0, +1, false), k1)];
            const double a1 = f.values[g.flat_index(k0, neighbor(k1, -1, true))];
            const double b1 = f.values[g.flat_index(k0, neighbor(k1, +1, true))];
            out.values[g.flat_index(k0, k1)] = (4.0 * c - a0 - b0 - a1 - b1) / h2;
        }
    return out;
}

/// An order-M atom presented with its witness: a = Delta_N^M b, where every
/// power Delta_N^k b (k = 0..M) stays supported in `ball` and obeys the size
/// bound ||(r^2 Delta_N)^k b||_inf <= r^{2M} |B|^{-1}.
struct NeumannAtomWitness {
    int order = 1;       ///< M
    GridFunction b;      ///< the witness
    Ball ball;
    GridFunction a;      ///< claimed Delta_N^M b
};

struct WitnessCondition {
    std::string name;
    bool pass = false;
    double measured = 0.0;  ///< the quantity the condition bounds
    double budget = 0.0;    ///< what it must stay below
};

struct WitnessReport {
    std::vector<WitnessCondition> conditions;

    bool ok() const {
        for (const auto& c : conditions)
            if (!c.pass) return false;
        return true;
    }
};

/// Check the three defining conditions of an order-M atom on the grid:
/// (i) a = Delta_N^M b for the discrete Laplacian, (ii) supp Delta_N^k b
/// inside the ball for k = 0..M, (iii) the size bounds for k = 0..M.
inline WitnessReport validate_neumann_atom(const NeumannAtomWitness& w, double tol = 1e-9) {
    WitnessReport rep;
    const Grid& g = w.b.grid;
    require_same_grid(w.b, w.a, "validate_neumann_atom");
    if (w.order < 1) throw std::invalid_argument("validate_neumann_atom: order must be >= 1");
    const double r = w.ball.radius;
    const double budget_inf = std::pow(r, 2.0 * w.order) / ball_volume(g.dimension, r);
    const double r2 = r * r * (1.0 + 1e-12);

    GridFunction power = w.b;
    double rpow = 1.0;  // r^{2k}
    for (int k = 0; k <= w.order; ++k) {
        if (k > 0) {
            power = discrete_neumann_laplacian(power);
            rpow *= r * r;
        }
        char name[64];
        double leak = 0.0;
        for (std::size_t i = 0; i < power.size(); ++i)
            if (power.values[i] != 0.0 &&
                sq_dist(g.dimension, w.ball.center, g.point_at(i)) > r2)
                leak = std::max(leak, std::abs(power.values[i]));
        const double sup = norm(power, Norm::linf);
        std::snprintf(name, sizeof name, "support k=%d", k);
        rep.conditions.push_back({name, leak <= tol * (sup + 1.0), leak, tol * (sup + 1.0)});
        std::snprintf(name, sizeof name, "size k=%d", k);
        rep.conditions.push_back(
            {name, rpow * sup <= budget_inf * (1.0 + 1e-9), rpow * sup, budget_inf});
    }
    double diff = 0.0;
    for (std::size_t i = 0; i < power.size(); ++i)
        diff = std::max(diff, std::abs(power.values[i] - w.a.values[i]));
    const double scale = norm(w.a, Norm::linf) + 1.0;
    rep.conditions.push_back({"a = Delta_N^M b", diff <= tol * scale, diff, tol * scale});
    return rep;
}

// ============================================================================
// Atomic decomposition
// ============================================================================

struct AtomicDecomposition {
    struct Term {
        double lambda = 0.0;
        WeakAtom atom;
    };
    std::vector<Term> terms;
    double l1_cost = 0.0;  ///< sum of |lambda_j|
};

/// sum_j lambda_j a_j; equals the decomposed function up to rounding.
inline GridFunction reconstruct(const AtomicDecomposition& dec, const Grid& g) {
    GridFunction out(g);
    for (const auto& term : dec.terms)
        for (std::size_t i = 0; i < out.size(); ++i)
            out.values[i] += term.lambda * term.atom.values[i];
    return out;
}

namespace detail {

/// Recursive bisection martingale decomposition over one half-box.  Every
/// node emits (at most) one two-valued mean-difference atom; a node cut off
/// by the depth cap emits its whole remaining fluctuation as a single block
/// atom, so the decomposition reconstructs exactly at any depth.
struct HaarBuilder {
    const GridFunction& f;
    const Grid& g;
    AtomicDecomposition& out;
    int max_depth;
    double noise_floor;          // mean differences at or below this are rounding
    std::vector<double> prefix;  // inclusion-exclusion table, (N+1)^dim

    HaarBuilder(const GridFunction& f_, AtomicDecomposition& out_, int max_depth_,
                double noise_floor_)
        : f(f_), g(f_.grid), out(out_), max_depth(max_depth_), noise_floor(noise_floor_) {
        const int N = g.points_per_axis;
        if (g.dimension == 1) {
            prefix.assign(static_cast<std::size_t>(N) + 1, 0.0);
            for (int k = 0; k < N; ++k)
                prefix[static_cast<std::size_t>(k) + 1] =
                    prefix[static_cast<std::size_t>(k)] + f.values[static_cast<std::size_t>(k)];
        } else {
            prefix.assign((static_cast<std::size_t>(N) + 1) * (N + 1), 0.0);
            for (int k0 = 0; k0 < N; ++k0)
                for (int k1 = 0; k1 < N; ++k1)
                    at(k0 + 1, k1 + 1) = f.values[g.flat_index(k0, k1)] + at(k0, k1 + 1) +
                                         at(k0 + 1, k1) - at(k0, k1);
        }
    }

    double& at(int i0, int i1) {
        return prefix[static_cast<std::size_t>(i0) * (g.points_per_axis + 1) + i1];
    }

    double box_sum(const std::array<int, 2>& lo, const std::array<int, 2>& hi) {
        if (g.dimension == 1)
            return prefix[static_cast<std::size_t>(hi[0]) + 1] - prefix[static_cast<std::size_t>(lo[0])];
        return at(hi[0] + 1, hi[1] + 1) - at(lo[0], hi[1] + 1) - at(hi[0] + 1, lo[1]) +
               at(lo[0], lo[1]);
    }

    static std::size_t cells(const std::array<int, 2>& lo, const std::array<int, 2>& hi) {
        return static_cast<std::size_t>(hi[0] - lo[0] + 1) *
               static_cast<std::size_t>(hi[1] - lo[1] + 1);
    }

    Ball circumscribed(const std::array<int, 2>& lo, const std::array<int, 2>& hi) const {
        const double h = g.spacing();
        Point c{0.0, 0.0};
        double r2 = 0.0;
        for (int d = 0; d < g.dimension; ++d) {
            const double a = g.coordinate(lo[static_cast<std::size_t>(d)]) - 0.5 * h;
            const double b = g.coordinate(hi[static_cast<std::size_t>(d)]) + 0.5 * h;
            c[static_cast<std::size_t>(d)] = 0.5 * (a + b);
            r2 += 0.25 * (b - a) * (b - a);
        }
        return Ball(c, std::sqrt(r2));
    }

    /// Emit `field` (restricted to the box, mean zero there) as one atom.
    /// Fluctuations at rounding level are dropped: the per-half cancellation
    /// of the input is only exact to machine precision, and without the floor
    /// that noise would surface as box-scale atoms of weight ~1e-18.
    /// The box sum is re-balanced to an exact zero before normalising: the raw
    /// mean differences each carry one rounding, and dividing by a small
    /// lambda would amplify that defect past any cancellation tolerance.
    template <typename Value>
    void emit(const std::array<int, 2>& lo, const std::array<int, 2>& hi, double sup,
              Value&& value) {
        if (sup <= noise_floor) return;
        double ssum = 0.0;
        for (int k0 = lo[0]; k0 <= hi[0]; ++k0)
            for (int k1 = lo[1]; k1 <= hi[1]; ++k1) ssum += value(k0, k1);
        const double shift = ssum / static_cast<double>(cells(lo, hi));
        double sup2 = 0.0;
        for (int k0 = lo[0]; k0 <= hi[0]; ++k0)
            for (int k1 = lo[1]; k1 <= hi[1]; ++k1)
                sup2 = std::max(sup2, std::abs(value(k0, k1) - shift));
        if (sup2 <= noise_floor) return;
        const Ball ball = circumscribed(lo, hi);
        const double budget = 1.0 / ball_volume(g.dimension, ball.radius);
        const double lambda = sup2 / budget;  // sup * |ball|
        AtomicDecomposition::Term term;
        term.lambda = lambda;
        term.atom.ball = ball;
        term.atom.linf_bound = budget;
        term.atom.values = GridFunction(g);
        for (int k0 = lo[0]; k0 <= hi[0]; ++k0)
            for (int k1 = lo[1]; k1 <= hi[1]; ++k1)
                term.atom.values.values[g.flat_index(k0, k1)] =
                    (value(k0, k1) - shift) / lambda;
        out.l1_cost += lambda;
        out.terms.push_back(std::move(term));
    }

    /// Decompose (f - mean) restricted to the box; `mean` is the mean of f
    /// over the box.
    void recurse(std::array<int, 2> lo, std::array<int, 2> hi, double mean, int depth) {
        if (cells(lo, hi) == 1) return;  // single cell: f - mean vanishes
        if (depth >= max_depth) {
            // depth cap: emit the remaining fluctuation as one block atom
            double sup = 0.0;
            for (int k0 = lo[0]; k0 <= hi[0]; ++k0)
                for (int k1 = lo[1]; k1 <= hi[1]; ++k1)
                    sup = std::max(sup, std::abs(f.values[g.flat_index(k0, k1)] - mean));
            emit(lo, hi, sup,
                 [&](int k0, int k1) { return f.values[g.flat_index(k0, k1)] - mean; });
            return;
        }
        const int len0 = hi[0] - lo[0] + 1;
        const int len1 = g.dimension == 2 ? hi[1] - lo[1] + 1 : 0;
        const int axis = (len1 > len0) ? 1 : 0;
        std::array<int, 2> hiA = hi, loB = lo;
        const int len = (axis == 0) ? len0 : len1;
        const int split = (axis == 0 ? lo[0] : lo[1]) + len / 2;
        if (axis == 0) {
            hiA[0] = split - 1;
            loB[0] = split;
        } else {
            hiA[1] = split - 1;
            loB[1] = split;
        }
        const double mA = box_sum(lo, hiA) / static_cast<double>(cells(lo, hiA));
        const double mB = box_sum(loB, hi) / static_cast<double>(cells(loB, hi));
        const double dA = mA - mean, dB = mB - mean;
        emit(lo, hi, std::max(std::abs(dA), std::abs(dB)), [&](int k0, int k1) {
            const int s = (axis == 0) ? k0 : k1;
            return (s < split) ? dA : dB;
        });
        recurse(lo, hiA, mA, depth + 1);
        recurse(loB, hi, mB, depth + 1);
    }
};

} // namespace detail

/// Martingale-difference atomic decomposition of f over the two half-boxes.
/// Every term is an admissible WeakAtom (ball-supported, mean zero, entirely
/// inside one half-space, ||a||_inf = 1/|ball|), and
///     f == sum_j lambda_j a_j
/// up to the rounding floor (1e-13 ||f||_inf per tree level) at any depth.
/// Functions carrying mass on either half-space admit no such decomposition
/// and are rejected.
inline AtomicDecomposition haar_atomic_decomposition(const GridFunction& f, int depth = 64) {
    const Grid& g = f.grid;
    const int N = g.points_per_axis;
    AtomicDecomposition out;
    detail::HaarBuilder builder(f, out, depth, 1e-13 * norm(f, Norm::linf));

    const int na = g.normal_axis();
    std::array<int, 2> lo_minus{0, 0}, hi_minus{N - 1, g.dimension == 2 ? N - 1 : 0};
    hi_minus[static_cast<std::size_t>(na)] = N / 2 - 1;
    std::array<int, 2> lo_plus{0, 0}, hi_plus{N - 1, g.dimension == 2 ? N - 1 : 0};
    lo_plus[static_cast<std::size_t>(na)] = N / 2;

    const double vol_half = static_cast<double>(detail::HaarBuilder::cells(lo_plus, hi_plus)) *
                            g.cell_volume();
    const double mass_minus = builder.box_sum(lo_minus, hi_minus) * g.cell_volume();
    const double mass_plus = builder.box_sum(lo_plus, hi_plus) * g.cell_volume();
    if (std::abs(mass_plus) > 1e-8 || std::abs(mass_minus) > 1e-8) {
        char msg[160];
        std::snprintf(msg, sizeof msg,
                      "haar_atomic_decomposition: nonzero half-space mass "
                      "(plus=%.6e, minus=%.6e, tolerance 1e-8)",
                      mass_plus, mass_minus);
        throw std::invalid_argument(msg);
    }
    builder.recurse(lo_minus, hi_minus, mass_minus / vol_half, 0);
    builder.recurse(lo_plus, hi_plus, mass_plus / vol_half, 0);
    return out;
}

/// The odd square wave (chi_{(0,1]} - chi_{[-1,0)}) / sqrt(2).  Its full
/// integral vanishes, so it lies in the classical Hardy space, but each
/// half-line carries mass +-1/sqrt(2): the half-space maximal function
/// decays like 1/|x| and its L^1 norm grows logarithmically with the box.
inline GridFunction counterexample_function(const Grid& g) {
    if (g.dimension != 1)
        throw std::invalid_argument("counterexample_function: one-dimensional only");
    if (g.half_width < 2.0)
        throw std::invalid_argument("counterexample_function: needs half_width >= 2");
    return sample(g, [&](const Point& p) {
        const double x = p[0];
        if (x > 0.0 && x <= 1.0) return 1.0 / std::sqrt(2.0);
        if (x < 0.0 && x >= -1.0) return -1.0 / std::sqrt(2.0);
        return 0.0;
    });
}

} // namespace neulab
