#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "neulab/grid.hpp"
#include "neulab/kernels.hpp"

/// Discrete operators: the heat semigroup e^{-t Delta}, the scaled derivative
/// Q_{t^2} = t^2 Delta e^{-t^2 Delta}, the Riesz transforms R_l and their
/// adjoints, and the bilinear forms built from them (commutators and the
/// two-sided form Pi_l).
///
/// All operators are midpoint-rule quadratures of the kernels in kernels.hpp.
/// Heat-type kernels factor across axes, so they are applied as one 1-D pass
/// per axis using displacement tables D[i-j] and, on the distinguished axis,
/// reflected-sum tables S[i+j] (the image term depends on x_n + y_n only).
/// This is algebraically identical to the full n-D quadrature, just cheaper.
///
/// Riesz kernels do not factor; they are applied with precomputed 2-D lookup
/// tables.  The principal value is realised by symmetric exclusion, applied
/// per kernel term: the classical part is dropped when |x - y| falls inside
/// the exclusion radius and the image part when |x - reflect(y)| does.  Both
/// exclusion sets are symmetric under swapping x and y, so the discrete
/// adjoint is the exact transpose and the odd-kernel cancellations survive
/// discretisation.

namespace neulab {

struct OperatorConfig {
    /// Principal-value exclusion radius in units of the grid spacing; a
    /// kernel term is dropped when its singularity distance is < this * h.
    /// The default excludes exactly the singular diagonal of each term.
    double pv_exclusion_cells = 0.5;
};

namespace detail {

/// D[m + N - 1] = eval(m h),  m = i - j.
template <typename F>
std::vector<double> displacement_table(int N, double h, F&& eval) {
    std::vector<double> D(static_cast<std::size_t>(2 * N - 1));
    for (int m = -(N - 1); m <= N - 1; ++m)
        D[static_cast<std::size_t>(m + N - 1)] = eval(m * h);
    return D;
}

/// S[s] = eval(c_i + c_j) with c_i + c_j = (s + 1) h - 2L,  s = i + j.
template <typename F>
std::vector<double> reflected_table(int N, double h, double L, F&& eval) {
    std::vector<double> S(static_cast<std::size_t>(2 * N - 1));
    for (int s = 0; s <= 2 * N - 2; ++s)
        S[static_cast<std::size_t>(s)] = eval((s + 1) * h - 2.0 * L);
    return S;
}

/// out[i] = h * sum_j (D[i-j] + S[i+j]) in[j], with j restricted to the same
/// half-line as i when `gated` (the H(x_n y_n) factor).
inline void contiguous_axis_pass(const double* in, double* out, int N, double h,
                                 const std::vector<double>& D, const std::vector<double>* S,
                                 bool gated) {
    for (int i = 0; i < N; ++i) {
        int jlo = 0, jhi = N;
        if (gated) {
            if (i >= N / 2) jlo = N / 2;
            else jhi = N / 2;
        }
        const double* dbase = D.data() + (i + N - 1);
        double acc = 0.0;
        if (S) {
            const double* sbase = S->data() + i;
            for (int j = jlo; j < jhi; ++j) acc += (dbase[-j] + sbase[j]) * in[j];
        } else {
            for (int j = jlo; j < jhi; ++j) acc += dbase[-j] * in[j];
        }
        out[i] = acc * h;
    }
}

/// One 1-D quadrature pass along `axis`.  Reflected-sum tables and gating are
/// only meaningful on the distinguished (last) axis.
inline GridFunction axis_pass(const GridFunction& f, int axis, const std::vector<double>& D,
                              const std::vector<double>* S, bool gated) {
    const Grid& g = f.grid;
    const int N = g.points_per_axis;
    const double h = g.spacing();
    GridFunction out(g);
    if (g.dimension == 1) {
        contiguous_axis_pass(f.values.data(), out.values.data(), N, h, D, S, gated);
        return out;
    }
    if (axis == g.normal_axis()) {
        for (int r = 0; r < N; ++r)
            contiguous_axis_pass(f.values.data() + static_cast<std::size_t>(r) * N,
                                 out.values.data() + static_cast<std::size_t>(r) * N, N, h, D, S,
                                 gated);
        return out;
    }
    if (S || gated) throw std::logic_error("axis_pass: reflection only acts on the last axis");
    // stride-N axis: accumulate row AXPYs so the inner loop stays contiguous
    for (int i0 = 0; i0 < N; ++i0) {
        double* out_row = out.values.data() + static_cast<std::size_t>(i0) * N;
        const double* dbase = D.data() + (i0 + N - 1);
        for (int j0 = 0; j0 < N; ++j0) {
            const double w = dbase[-j0] * h;
            const double* in_row = f.values.data() + static_cast<std::size_t>(j0) * N;
            for (int i1 = 0; i1 < N; ++i1) out_row[i1] += w * in_row[i1];
        }
    }
    return out;
}

} // namespace detail

/// e^{-t Delta} f by midpoint quadrature of the heat kernel (one factored
/// pass per axis; the distinguished axis carries the image term and gate
/// for the half-space flavor).
inline GridFunction apply_semigroup(const GridFunction& f, double t, KernelFlavor flavor) {
    detail::require_time(t, "apply_semigroup");
    const Grid& g = f.grid;
    const int N = g.points_per_axis;
    const double h = g.spacing();
    const auto g1 = [&](double d) { return detail::gaussian(1, t, d * d); };
    const auto D = detail::displacement_table(N, h, g1);
    const bool neu = (flavor == KernelFlavor::neumann);
    std::vector<double> S;
    if (neu) S = detail::reflected_table(N, h, g.half_width, g1);
    if (g.dimension == 1) return detail::axis_pass(f, 0, D, neu ? &S : nullptr, neu);
    const GridFunction mid = detail::axis_pass(f, 0, D, nullptr, false);
    return detail::axis_pass(mid, 1, D, neu ? &S : nullptr, neu);
}

/// Q_{t^2} f = t^2 Delta e^{-t^2 Delta} f = -s d/ds (e^{-s Delta} f) at
/// s = t^2, realised by differentiating each Gaussian image term in time.
/// In 2-D the kernel is a tensor product A (x) B, so the derivative is
/// applied by the product rule: A' (x) B + A (x) B'.
inline GridFunction apply_Q(const GridFunction& f, double t, KernelFlavor flavor) {
    detail::require_time(t, "apply_Q");
    const double s = t * t;
    const Grid& g = f.grid;
    const int N = g.points_per_axis;
    const double h = g.spacing();
    const double L = g.half_width;
    const bool neu = (flavor == KernelFlavor::neumann);
    const auto g1 = [&](double d) { return detail::gaussian(1, s, d * d); };
    const auto g1dt = [&](double d) { return detail::gaussian_dt(1, s, d * d); };

    if (g.dimension == 1) {
        const auto q = [&](double d) { return -s * g1dt(d); };
        const auto D = detail::displacement_table(N, h, q);
        std::vector<double> S;
        if (neu) S = detail::reflected_table(N, h, L, q);
        return detail::axis_pass(f, 0, D, neu ? &S : nullptr, neu);
    }

    const auto A = detail::displacement_table(N, h, g1);
    const auto Ap = detail::displacement_table(N, h, g1dt);
    std::vector<double> S, Sp;
    if (neu) {
        S = detail::reflected_table(N, h, L, g1);
        Sp = detail::reflected_table(N, h, L, g1dt);
    }
    const GridFunction u1 = detail::axis_pass(f, 0, Ap, nullptr, false);
    const GridFunction v1 = detail::axis_pass(u1, 1, A, neu ? &S : nullptr, neu);
    const GridFunction u2 = detail::axis_pass(f, 0, A, nullptr, false);
    const GridFunction v2 = detail::axis_pass(u2, 1, Ap, neu ? &Sp : nullptr, neu);
    GridFunction out(g);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.values[i] = -s * (v1.values[i] + v2.values[i]);
    return out;
}

namespace detail {

/// Kernel entry (with quadrature weight NOT included): the gated sum of the
/// classical and image Riesz terms at (x, y), each dropped inside its own
/// exclusion radius.  `cls_sign`/`cor_sign` implement the adjoint, which for
/// these kernels is an exact per-term sign flip (the classical part and the
/// tangential image part are odd under swapping x and y; the normal image
/// part is even).
inline double riesz_entry(int dim, int l, const Point& x, const Point& y, bool gated,
                          double cls_sign, double cor_sign, double riesz_constant,
                          double excl2) {
    const double xn = x[static_cast<std::size_t>(dim - 1)];
    const double yn = y[static_cast<std::size_t>(dim - 1)];
    if (gated && heaviside(xn * yn) == 0.0) return 0.0;
    const double half_exp = 0.5 * (dim + 1);
    double k = 0.0;
    const double d2 = sq_dist(dim, x, y);
    if (d2 >= excl2 && d2 > 0.0) {
        const double num = x[static_cast<std::size_t>(l)] - y[static_cast<std::size_t>(l)];
        k += cls_sign * riesz_constant * num / std::pow(d2, half_exp);
    }
    if (cor_sign != 0.0) {
        const double dr2 = tangential_sq(dim, x, y) + (xn + yn) * (xn + yn);
        if (dr2 >= excl2 && dr2 > 0.0) {
            const double num = (l == dim - 1)
                                   ? (xn + yn)
                                   : x[static_cast<std::size_t>(l)] - y[static_cast<std::size_t>(l)];
            k += cor_sign * riesz_constant * num / std::pow(dr2, half_exp);
        }
    }
    return k;
}

inline void riesz_signs(int dim, int l, KernelFlavor flavor, bool adjoint, double& cls_sign,
                        double& cor_sign) {
    cls_sign = adjoint ? -1.0 : 1.0;
    if (flavor == KernelFlavor::classical) {
        cor_sign = 0.0;
    } else {
        cor_sign = (adjoint && l != dim - 1) ? -1.0 : 1.0;
    }
}

} // namespace detail

/// Riesz transform R_l f (classical flavor) or (R_l + K_l) f gated to the
/// half-spaces (half-space flavor); `adjoint` applies the transposed kernel.
inline GridFunction apply_riesz(const GridFunction& f, int l, KernelFlavor flavor,
                                bool adjoint = false, const OperatorConfig& cfg = {}) {
    const Grid& g = f.grid;
    if (l < 0 || l >= g.dimension) throw std::invalid_argument("apply_riesz: axis out of range");
    const int N = g.points_per_axis;
    const double h = g.spacing();
    const double L = g.half_width;
    const double c = KernelConstants::for_dimension(g.dimension).riesz_constant;
    const double excl = cfg.pv_exclusion_cells * h;
    const double excl2 = excl * excl;
    const bool neu = (flavor == KernelFlavor::neumann);
    double cls_sign = 0.0, cor_sign = 0.0;
    detail::riesz_signs(g.dimension, l, flavor, adjoint, cls_sign, cor_sign);
    GridFunction out(g);

    if (g.dimension == 1) {
        std::vector<double> C(static_cast<std::size_t>(2 * N - 1), 0.0);
        for (int m = -(N - 1); m <= N - 1; ++m) {
            const double d = m * h;
            if (d * d >= excl2 && m != 0) C[static_cast<std::size_t>(m + N - 1)] = cls_sign * c / d;
        }
        std::vector<double> R(static_cast<std::size_t>(2 * N - 1), 0.0);
        if (neu) {
            for (int s = 0; s <= 2 * N - 2; ++s) {
                const double w = (s + 1) * h - 2.0 * L;
                if (w * w >= excl2 && w != 0.0) R[static_cast<std::size_t>(s)] = cor_sign * c / w;
            }
        }
        for (int i = 0; i < N; ++i) {
            int jlo = 0, jhi = N;
            if (neu) {
                if (i >= N / 2) jlo = N / 2;
                else jhi = N / 2;
            }
            const double* cbase = C.data() + (i + N - 1);
            const double* rbase = R.data() + i;
            double acc = 0.0;
            if (neu) {
                for (int j = jlo; j < jhi; ++j) acc += (cbase[-j] + rbase[j]) * f.values[static_cast<std::size_t>(j)];
            } else {
                for (int j = jlo; j < jhi; ++j) acc += cbase[-j] * f.values[static_cast<std::size_t>(j)];
            }
            out.values[static_cast<std::size_t>(i)] = acc * h;
        }
        return out;
    }

    // dim == 2: lookup tables over displacements (classical part) and over
    // (tangential displacement, normal sum) for the image part.
    const int W = 2 * N - 1;
    const double half_exp = 1.5;
    std::vector<double> Tc(static_cast<std::size_t>(W) * W, 0.0);
    for (int m0 = -(N - 1); m0 <= N - 1; ++m0)
        for (int m1 = -(N - 1); m1 <= N - 1; ++m1) {
            const double u0 = m0 * h, u1 = m1 * h;
            const double d2 = u0 * u0 + u1 * u1;
            if (d2 >= excl2 && d2 > 0.0) {
                const double num = (l == 0) ? u0 : u1;
                Tc[static_cast<std::size_t>(m0 + N - 1) * W + (m1 + N - 1)] =
                    cls_sign * c * num / std::pow(d2, half_exp);
            }
        }
    std::vector<double> Tr;
    if (neu) {
        Tr.assign(static_cast<std::size_t>(W) * W, 0.0);
        for (int m0 = -(N - 1); m0 <= N - 1; ++m0)
            for (int s1 = 0; s1 <= 2 * N - 2; ++s1) {
                const double u0 = m0 * h;
                const double w = (s1 + 1) * h - 2.0 * L;
                const double dr2 = u0 * u0 + w * w;
                if (dr2 >= excl2 && dr2 > 0.0) {
                    const double num = (l == 0) ? u0 : w;
                    Tr[static_cast<std::size_t>(m0 + N - 1) * W + s1] =
                        cor_sign * c * num / std::pow(dr2, half_exp);
                }
            }
    }
    const double h2 = h * h;
    for (int i0 = 0; i0 < N; ++i0)
        for (int i1 = 0; i1 < N; ++i1) {
            int jlo1 = 0, jhi1 = N;
            if (neu) {
                if (i1 >= N / 2) jlo1 = N / 2;
                else jhi1 = N / 2;
            }
            double acc = 0.0;
            for (int j0 = 0; j0 < N; ++j0) {
                const double* frow = f.values.data() + static_cast<std::size_t>(j0) * N;
                const std::size_t row = static_cast<std::size_t>(i0 - j0 + N - 1) * W;
                const double* tcb = Tc.data() + row + (i1 + N - 1);
                double a = 0.0;
                if (neu) {
                    const double* trb = Tr.data() + row + i1;
                    for (int j1 = jlo1; j1 < jhi1; ++j1) a += (tcb[-j1] + trb[j1]) * frow[j1];
                } else {
                    for (int j1 = jlo1; j1 < jhi1; ++j1) a += tcb[-j1] * frow[j1];
                }
                acc += a;
            }
            out.values[g.flat_index(i0, i1)] = acc * h2;
        }
    return out;
}

/// Riesz transform of f evaluated at an arbitrary point by direct kernel
/// summation.  At grid points this reproduces apply_riesz exactly; it is the
/// slow reference route and the evaluator used off the lattice.
inline double riesz_point_value(const GridFunction& f, int l, const Point& x, KernelFlavor flavor,
                                bool adjoint = false, const OperatorConfig& cfg = {}) {
    const Grid& g = f.grid;
    if (l < 0 || l >= g.dimension) throw std::invalid_argument("riesz_point_value: axis out of range");
    const double c = KernelConstants::for_dimension(g.dimension).riesz_constant;
    const double excl = cfg.pv_exclusion_cells * g.spacing();
    double cls_sign = 0.0, cor_sign = 0.0;
    detail::riesz_signs(g.dimension, l, flavor, adjoint, cls_sign, cor_sign);
    const bool gated = (flavor == KernelFlavor::neumann);
    double acc = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double v = f.values[j];
        if (v == 0.0) continue;
        acc += detail::riesz_entry(g.dimension, l, x, g.point_at(j), gated, cls_sign, cor_sign, c,
                                   excl * excl) *
               v;
    }
    return acc * g.cell_volume();
}

/// Dense quadrature matrix of the selected Riesz transform, row-major over
/// flat indices: M[i*size + j] = h^n K(x_i, x_j).  Reference/diagnostic
/// route only; refuses grids with more than 4096 points.
inline std::vector<double> riesz_matrix(const Grid& g, int l, KernelFlavor flavor,
                                        bool adjoint = false, const OperatorConfig& cfg = {}) {
    if (l < 0 || l >= g.dimension) throw std::invalid_argument("riesz_matrix: axis out of range");
    const std::size_t n = g.size();
    if (n > 4096) throw std::invalid_argument("riesz_matrix: grid too large for dense assembly");
    const double c = KernelConstants::for_dimension(g.dimension).riesz_constant;
    const double excl = cfg.pv_exclusion_cells * g.spacing();
    double cls_sign = 0.0, cor_sign = 0.0;
    detail::riesz_signs(g.dimension, l, flavor, adjoint, cls_sign, cor_sign);
    const bool gated = (flavor == KernelFlavor::neumann);
    std::vector<double> M(n * n, 0.0);
    const double w = g.cell_volume();
    for (std::size_t i = 0; i < n; ++i) {
        const Point x = g.point_at(i);
        for (std::size_t j = 0; j < n; ++j)
            M[i * n + j] = w * detail::riesz_entry(g.dimension, l, x, g.point_at(j), gated,
                                                   cls_sign, cor_sign, c, excl * excl);
    }
    return M;
}

/// <f, g> = h^n sum_i f_i g_i.
inline double inner_product(const GridFunction& f, const GridFunction& g) {
    require_same_grid(f, g, "inner_product");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f.values[i] * g.values[i];
    return s * f.grid.cell_volume();
}

inline GridFunction pointwise_multiply(const GridFunction& f, const GridFunction& g) {
    require_same_grid(f, g, "pointwise_multiply");
    GridFunction out(f.grid);
    for (std::size_t i = 0; i < f.size(); ++i) out.values[i] = f.values[i] * g.values[i];
    return out;
}

inline GridFunction linear_combination(double a, const GridFunction& f, double b,
                                       const GridFunction& g) {
    require_same_grid(f, g, "linear_combination");
    GridFunction out(f.grid);
    for (std::size_t i = 0; i < f.size(); ++i) out.values[i] = a * f.values[i] + b * g.values[i];
    return out;
}

/// Commutator [b, R_l] f = b R_l f - R_l (b f) with the half-space transform.
inline GridFunction commutator(const GridFunction& b, const GridFunction& f, int l,
                               const OperatorConfig& cfg = {}) {
    require_same_grid(b, f, "commutator");
    const GridFunction Rf = apply_riesz(f, l, KernelFlavor::neumann, false, cfg);
    const GridFunction Rbf =
        apply_riesz(pointwise_multiply(b, f), l, KernelFlavor::neumann, false, cfg);
    GridFunction out(f.grid);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.values[i] = b.values[i] * Rf.values[i] - Rbf.values[i];
    return out;
}

/// Pi_l(h, g) = h R_l g - g R_l^* h (half-space transform), the bilinear form
/// dual to the commutator: <b, Pi_l(h,g)> = <[b, R_l] g, h> holds exactly for
/// the discrete operators because the adjoint is the exact transpose.
inline GridFunction pi_form(const GridFunction& h, const GridFunction& g, int l,
                            const OperatorConfig& cfg = {}) {
    require_same_grid(h, g, "pi_form");
    const GridFunction Rg = apply_riesz(g, l, KernelFlavor::neumann, false, cfg);
    const GridFunction Rsh = apply_riesz(h, l, KernelFlavor::neumann, true, cfg);
    GridFunction out(h.grid);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.values[i] = h.values[i] * Rg.values[i] - g.values[i] * Rsh.values[i];
    return out;
}

/// b_0 + sum_l R_l^* b_l: the synthesis whose terms span the dual space of
/// the half-space Hardy space.
inline GridFunction fs_synthesize(const GridFunction& b0, const std::vector<GridFunction>& parts,
                                  const OperatorConfig& cfg = {}) {
    if (static_cast<int>(parts.size()) != b0.grid.dimension)
        throw std::invalid_argument("fs_synthesize: need one component per axis");
    GridFunction out = b0;
    for (int l = 0; l < b0.grid.dimension; ++l) {
        require_same_grid(b0, parts[static_cast<std::size_t>(l)], "fs_synthesize");
        const GridFunction t =
            apply_riesz(parts[static_cast<std::size_t>(l)], l, KernelFlavor::neumann, true, cfg);
        for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += t.values[i];
    }
    return out;
}

} // namespace neulab
