#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <stdexcept>
#include <vector>

#include "neulab/grid.hpp"
#include "neulab/operators.hpp"

/// Scale-indexed functionals: vertical and cone maximal functions of the
/// heat extension u(t, x) = e^{-t^2 Delta} f(x), the square (area) function
/// built from Q_{t^2} f, the Hardy-space norms assembled from them, and the
/// semigroup-flavored BMO functional
///     sup_B |B|^{-1} Int_B |b - e^{-r_B^2 Delta} b|.
/// Scales are lengths t; the semigroup time is always t^2.

namespace neulab {

/// Logarithmically spaced length scales.  The grid default spans
/// [h/2, 2L]: half a cell at the fine end (smaller scales cannot be resolved
/// by midpoint quadrature), twice the box at the coarse end (larger scales
/// only see the truncation).
struct ScaleGrid {
    std::vector<double> scales;

    static ScaleGrid log_spaced(double tmin, double tmax, int count) {
        if (!(tmin > 0.0) || !(tmax > tmin) || count < 2)
            throw std::invalid_argument("ScaleGrid: need 0 < tmin < tmax and count >= 2");
        ScaleGrid sg;
        sg.scales.resize(static_cast<std::size_t>(count));
        const double ratio = tmax / tmin;
        for (int k = 0; k < count; ++k)
            sg.scales[static_cast<std::size_t>(k)] = tmin * std::pow(ratio, k / (count - 1.0));
        return sg;
    }

    static ScaleGrid for_grid(const Grid& g, int count = 48) {
        return log_spaced(0.5 * g.spacing(), 2.0 * g.half_width, count);
    }

    /// Trapezoidal weights for integrating dt over the (non-uniform) nodes.
    std::vector<double> trapezoid_weights() const {
        const std::size_t n = scales.size();
        std::vector<double> w(n, 0.0);
        if (n < 2) return w;
        w[0] = 0.5 * (scales[1] - scales[0]);
        w[n - 1] = 0.5 * (scales[n - 1] - scales[n - 2]);
        for (std::size_t k = 1; k + 1 < n; ++k) w[k] = 0.5 * (scales[k + 1] - scales[k - 1]);
        return w;
    }
};

namespace detail {

/// Largest integer offset K with K * h < t, i.e. |j - i| <= K iff the cell
/// centers satisfy |c_j - c_i| < t.
inline int cone_offset(double t, double h) {
    const int K = static_cast<int>(std::ceil(t / h)) - 1;
    return K < 0 ? 0 : K;
}

/// out[i] = max_{|j-i| <= K, j in range} row[j], via a monotonic deque.
inline void sliding_max(const double* row, int N, int K, double* out) {
    std::deque<int> q;
    int added = -1;
    for (int i = 0; i < N; ++i) {
        const int hi = std::min(N - 1, i + K);
        while (added < hi) {
            ++added;
            while (!q.empty() && row[q.back()] <= row[added]) q.pop_back();
            q.push_back(added);
        }
        while (q.front() < i - K) q.pop_front();
        out[i] = row[q.front()];
    }
}

} // namespace detail

/// Vertical (radial) maximal function: sup over the scale grid of
/// |e^{-t^2 Delta} f(x)|.
inline GridFunction radial_maximal(const GridFunction& f, KernelFlavor flavor,
                                   const ScaleGrid& sg) {
    GridFunction out(f.grid);
    for (double t : sg.scales) {
        const GridFunction u = apply_semigroup(f, t * t, flavor);
        for (std::size_t i = 0; i < out.size(); ++i)
            out.values[i] = std::max(out.values[i], std::abs(u.values[i]));
    }
    return out;
}

/// Cone (nontangential) maximal function:
/// sup over scales and |y - x| < t of |e^{-t^2 Delta} f(y)|.
inline GridFunction nontangential_maximal(const GridFunction& f, KernelFlavor flavor,
                                          const ScaleGrid& sg) {
    const Grid& g = f.grid;
    const int N = g.points_per_axis;
    const double h = g.spacing();
    GridFunction out(g);
    std::vector<double> absu(g.size());
    std::vector<double> rowmax(static_cast<std::size_t>(N));
    for (double t : sg.scales) {
        const GridFunction u = apply_semigroup(f, t * t, flavor);
        for (std::size_t i = 0; i < absu.size(); ++i) absu[i] = std::abs(u.values[i]);
        const int K = detail::cone_offset(t, h);
        if (g.dimension == 1) {
            detail::sliding_max(absu.data(), N, K, rowmax.data());
            for (int i = 0; i < N; ++i)
                out.values[static_cast<std::size_t>(i)] =
                    std::max(out.values[static_cast<std::size_t>(i)], rowmax[static_cast<std::size_t>(i)]);
            continue;
        }
        const double th2 = (t / h) * (t / h);
        for (int i0 = 0; i0 < N; ++i0) {
            double* out_row = out.values.data() + static_cast<std::size_t>(i0) * N;
            for (int d0 = -K; d0 <= K; ++d0) {
                const int r = i0 + d0;
                if (r < 0 || r >= N) continue;
                const double m2 = th2 - static_cast<double>(d0) * d0;
                const int K1 = static_cast<int>(std::ceil(std::sqrt(m2))) - 1;
                if (K1 < 0) continue;
                detail::sliding_max(absu.data() + static_cast<std::size_t>(r) * N, N, K1,
                                    rowmax.data());
                for (int i1 = 0; i1 < N; ++i1)
                    out_row[i1] = std::max(out_row[i1], rowmax[static_cast<std::size_t>(i1)]);
            }
        }
    }
    return out;
}

/// Square (area) function
///   S(f)(x)^2 = Int_0^inf Int_{|y-x|<t} |Q_{t^2} f(y)|^2 dy dt / t^{n+1},
/// discretised over the scale grid with trapezoidal dt weights and box
/// truncation of the cone.
inline GridFunction area_function(const GridFunction& f, KernelFlavor flavor,
                                  const ScaleGrid& sg) {
    const Grid& g = f.grid;
    const int N = g.points_per_axis;
    const double h = g.spacing();
    const double vol = g.cell_volume();
    const auto wt = sg.trapezoid_weights();
    GridFunction s2(g);
    std::vector<double> q2(g.size());
    if (g.dimension == 1) {
        std::vector<double> prefix(static_cast<std::size_t>(N) + 1, 0.0);
        for (std::size_t k = 0; k < sg.scales.size(); ++k) {
            const double t = sg.scales[k];
            const GridFunction q = apply_Q(f, t, flavor);
            for (int j = 0; j < N; ++j)
                prefix[static_cast<std::size_t>(j) + 1] =
                    prefix[static_cast<std::size_t>(j)] +
                    q.values[static_cast<std::size_t>(j)] * q.values[static_cast<std::size_t>(j)];
            const int K = detail::cone_offset(t, h);
            const double coef = wt[k] / std::pow(t, g.dimension + 1) * vol;
            for (int i = 0; i < N; ++i) {
                const int lo = std::max(0, i - K);
                const int hi = std::min(N - 1, i + K);
                s2.values[static_cast<std::size_t>(i)] +=
                    coef * (prefix[static_cast<std::size_t>(hi) + 1] - prefix[static_cast<std::size_t>(lo)]);
            }
        }
    } else {
        std::vector<double> prefix(static_cast<std::size_t>(N) * (N + 1), 0.0);
        for (std::size_t k = 0; k < sg.scales.size(); ++k) {
            const double t = sg.scales[k];
            const GridFunction q = apply_Q(f, t, flavor);
            for (std::size_t i = 0; i < q2.size(); ++i) q2[i] = q.values[i] * q.values[i];
            for (int r = 0; r < N; ++r) {
                double* p = prefix.data() + static_cast<std::size_t>(r) * (N + 1);
                const double* row = q2.data() + static_cast<std::size_t>(r) * N;
                p[0] = 0.0;
                for (int j = 0; j < N; ++j) p[j + 1] = p[j] + row[j];
            }
            const int K = detail::cone_offset(t, h);
            const double th2 = (t / h) * (t / h);
            const double coef = wt[k] / std::pow(t, g.dimension + 1) * vol;
            for (int i0 = 0; i0 < N; ++i0) {
                double* s_row = s2.values.data() + static_cast<std::size_t>(i0) * N;
                for (int d0 = -K; d0 <= K; ++d0) {
                    const int r = i0 + d0;
                    if (r < 0 || r >= N) continue;
                    const double m2 = th2 - static_cast<double>(d0) * d0;
                    const int K1 = static_cast<int>(std::ceil(std::sqrt(m2))) - 1;
                    if (K1 < 0) continue;
                    const double* p = prefix.data() + static_cast<std::size_t>(r) * (N + 1);
                    for (int i1 = 0; i1 < N; ++i1) {
                        const int lo = std::max(0, i1 - K1);
                        const int hi = std::min(N - 1, i1 + K1);
                        s_row[i1] += coef * (p[hi + 1] - p[lo]);
                    }
                }
            }
        }
    }
    GridFunction out(g);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = std::sqrt(s2.values[i]);
    return out;
}

enum class H1Kind { area, radial_max, nontangential_max, riesz };

/// Hardy-space norm of f in the selected characterisation:
///   area:               ||S(f)||_1
///   radial_max:         ||sup_t |e^{-t^2 Delta} f|||_1
///   nontangential_max:  ||sup_{|y-x|<t} |e^{-t^2 Delta} f(y)|||_1
///   riesz:              ||f||_1 + sum_l ||R_l f||_1
inline double h1_norm(const GridFunction& f, H1Kind kind, KernelFlavor flavor,
                      const ScaleGrid& sg, const OperatorConfig& cfg = {}) {
    switch (kind) {
        case H1Kind::area: return norm(area_function(f, flavor, sg), Norm::l1);
        case H1Kind::radial_max: return norm(radial_maximal(f, flavor, sg), Norm::l1);
        case H1Kind::nontangential_max: return norm(nontangential_maximal(f, flavor, sg), Norm::l1);
        case H1Kind::riesz: {
            double s = norm(f, Norm::l1);
            for (int l = 0; l < f.grid.dimension; ++l)
                s += norm(apply_riesz(f, l, flavor, false, cfg), Norm::l1);
            return s;
        }
    }
    return 0.0;
}

/// Dyadic family of balls for the BMO supremum.  Radii run through
/// L/8, L/16, ... down to `min_radius_cells` cells; centers sit on a lattice
/// of step r snapped to cell centers, kept `margin_factor * r` away from the
/// box boundary so the truncated semigroup is accurate on the ball.  Balls
/// are ordered by radius so the semigroup field can be shared.
struct BallFamily {
    std::vector<Ball> balls;

    static BallFamily dyadic(const Grid& g, double min_radius_cells = 3.0,
                             double margin_factor = 8.5) {
        const double L = g.half_width;
        const double h = g.spacing();
        BallFamily fam;
        for (double r = L / 8.0; r >= min_radius_cells * h; r /= 2.0) {
            const double cap = L - margin_factor * r;
            if (cap <= 0.0) continue;
            std::vector<double> axis;
            const int kmax = static_cast<int>(std::floor(cap / r));
            for (int k = -kmax; k <= kmax; ++k) {
                // snap k*r to the nearest cell center
                int idx = static_cast<int>(std::lround((k * r + L) / h - 0.5));
                idx = std::clamp(idx, 0, g.points_per_axis - 1);
                axis.push_back(g.coordinate(idx));
            }
            if (g.dimension == 1) {
                for (double c : axis) fam.balls.emplace_back(Point{c, 0.0}, r);
            } else {
                for (double c0 : axis)
                    for (double c1 : axis) fam.balls.emplace_back(Point{c0, c1}, r);
            }
        }
        if (fam.balls.empty()) throw std::invalid_argument("BallFamily: no admissible balls (grid too coarse)");
        return fam;
    }
};

/// What gets subtracted on each ball before averaging |b - (...)|:
///   neumann     - the semigroup regularisation e^{-r_B^2 Delta_N} b,
///   classical   - the plain ball average of b,
///   even_plus   - classical norm of the even extension of the plus part,
///   even_minus  - classical norm of the even extension of the minus part.
enum class BmoFlavor { neumann, classical, even_plus, even_minus };

struct BmoResult {
    double value = 0.0;
    Ball argmax{};
    std::size_t balls_examined = 0;
};

namespace detail {

/// Visit the cells of `ball`, restricted to a bounding-box index window.
template <typename Visit>
void for_ball_cells(const Grid& g, const Ball& ball, Visit&& visit) {
    const int N = g.points_per_axis;
    const double h = g.spacing();
    const double L = g.half_width;
    const auto axis_range = [&](double c, double r) {
        const int lo = std::clamp(static_cast<int>(std::floor((c - r + L) / h - 0.5)), 0, N - 1);
        const int hi = std::clamp(static_cast<int>(std::ceil((c + r + L) / h - 0.5)), 0, N - 1);
        return std::pair<int, int>(lo, hi);
    };
    const auto [lo0, hi0] = axis_range(ball.center[0], ball.radius);
    const auto [lo1, hi1] = g.dimension == 2 ? axis_range(ball.center[1], ball.radius)
                                             : std::pair<int, int>(0, 0);
    for (int k0 = lo0; k0 <= hi0; ++k0)
        for (int k1 = lo1; k1 <= hi1; ++k1) {
            const std::size_t j = g.flat_index(k0, k1);
            if (in_ball(g.dimension, ball, g.point_at(j))) visit(j);
        }
}

} // namespace detail

/// BMO functional sup_B |B|^{-1} Int_B |b - c_B| where c_B is either the
/// semigroup regularisation at time r_B^2 (neumann flavor) or the ball mean
/// (classical flavor); the discrete measure of the ball is the normaliser.
/// One semigroup application is shared by all balls of equal radius.
inline BmoResult bmo_norm(const GridFunction& b, BmoFlavor flavor, const BallFamily& family) {
    if (flavor == BmoFlavor::even_plus)
        return bmo_norm(even_extension(b, HalfSpace::plus), BmoFlavor::classical, family);
    if (flavor == BmoFlavor::even_minus)
        return bmo_norm(even_extension(b, HalfSpace::minus), BmoFlavor::classical, family);

    BmoResult res;
    const Grid& g = b.grid;
    std::size_t i = 0;
    while (i < family.balls.size()) {
        const double r = family.balls[i].radius;
        std::size_t run_end = i;
        while (run_end < family.balls.size() && family.balls[run_end].radius == r) ++run_end;
        GridFunction u;
        if (flavor == BmoFlavor::neumann) u = apply_semigroup(b, r * r, KernelFlavor::neumann);
        for (std::size_t bi = i; bi < run_end; ++bi) {
            const Ball& ball = family.balls[bi];
            double acc = 0.0;
            std::size_t cells = 0;
            if (flavor == BmoFlavor::neumann) {
                detail::for_ball_cells(g, ball, [&](std::size_t j) {
                    acc += std::abs(b.values[j] - u.values[j]);
                    ++cells;
                });
            } else {
                double sum = 0.0;
                detail::for_ball_cells(g, ball, [&](std::size_t j) {
                    sum += b.values[j];
                    ++cells;
                });
                if (cells == 0) continue;
                const double mean = sum / static_cast<double>(cells);
                detail::for_ball_cells(g, ball, [&](std::size_t j) {
                    acc += std::abs(b.values[j] - mean);
                });
            }
            if (cells == 0) continue;
            const double avg = acc / static_cast<double>(cells);
            ++res.balls_examined;
            if (avg > res.value) {
                res.value = avg;
                res.argmax = ball;
            }
        }
        i = run_end;
    }
    return res;
}

} // namespace neulab
