#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

/// Uniform cell-centered grids on the box [-L,L]^n (n = 1 or 2) and the
/// half-space bookkeeping used throughout the library.
///
/// Conventions:
///  * the distinguished coordinate x_n (the one whose sign selects the
///    half-space) is always the LAST axis; for n = 1 it is the only axis;
///  * samples sit at cell centers (k + 1/2)h - L, so no sample ever lies on
///    the interface {x_n = 0} and the lattice is symmetric under reflection;
///  * all integrals are midpoint sums h^n * sum(values) accumulated in flat
///    index order, which keeps results bit-reproducible.

namespace neulab {

/// A point of R^n, n <= 2.  Only the first `dim` entries are meaningful.
using Point = std::array<double, 2>;

enum class HalfSpace { plus, minus };

/// Euclidean ball B(center, radius).
struct Ball {
    Point center{0.0, 0.0};
    double radius = 0.0;

    Ball() = default;
    Ball(Point c, double r) : center(c), radius(r) {
        if (!(r > 0.0)) throw std::invalid_argument("Ball: radius must be positive");
    }
};

/// Reflection across the interface: (x', x_n) -> (x', -x_n).
inline Point reflect_point(int dim, Point x) {
    x[static_cast<std::size_t>(dim - 1)] = -x[static_cast<std::size_t>(dim - 1)];
    return x;
}

inline double sq_dist(int dim, const Point& a, const Point& b) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
        const double u = a[static_cast<std::size_t>(d)] - b[static_cast<std::size_t>(d)];
        s += u * u;
    }
    return s;
}

inline double dist(int dim, const Point& a, const Point& b) { return std::sqrt(sq_dist(dim, a, b)); }

/// Cell-centered uniform grid on [-L,L]^n.
struct Grid {
    int dimension = 1;        ///< n, 1 or 2
    double half_width = 1.0;  ///< L
    int points_per_axis = 2;  ///< N, even so the lattice is reflection symmetric

    Grid() = default;
    Grid(int dim, double L, int N) : dimension(dim), half_width(L), points_per_axis(N) {
        if (dim != 1 && dim != 2) throw std::invalid_argument("Grid: dimension must be 1 or 2");
        if (!(L > 0.0)) throw std::invalid_argument("Grid: half_width must be positive");
        if (N < 2 || (N % 2) != 0) throw std::invalid_argument("Grid: points_per_axis must be even and >= 2");
    }

    double spacing() const { return 2.0 * half_width / points_per_axis; }
    double cell_volume() const {
        const double h = spacing();
        return dimension == 1 ? h : h * h;
    }
    std::size_t size() const {
        const auto N = static_cast<std::size_t>(points_per_axis);
        return dimension == 1 ? N : N * N;
    }
    int normal_axis() const { return dimension - 1; }

    /// Coordinate of sample k along any axis.
    double coordinate(int k) const { return (k + 0.5) * spacing() - half_width; }

    /// Index of the reflected sample along the normal axis.
    int reflect_index(int k) const { return points_per_axis - 1 - k; }

    std::size_t flat_index(int i0, int i1 = 0) const {
        return dimension == 1 ? static_cast<std::size_t>(i0)
                              : static_cast<std::size_t>(i0) * points_per_axis + i1;
    }

    Point point_at(std::size_t flat) const {
        Point p{0.0, 0.0};
        if (dimension == 1) {
            p[0] = coordinate(static_cast<int>(flat));
        } else {
            p[0] = coordinate(static_cast<int>(flat / static_cast<std::size_t>(points_per_axis)));
            p[1] = coordinate(static_cast<int>(flat % static_cast<std::size_t>(points_per_axis)));
        }
        return p;
    }

    /// Sign of the distinguished coordinate of sample `flat`.
    bool in_plus(std::size_t flat) const {
        const int k = dimension == 1 ? static_cast<int>(flat)
                                     : static_cast<int>(flat % static_cast<std::size_t>(points_per_axis));
        return k >= points_per_axis / 2;
    }

    bool operator==(const Grid& o) const {
        return dimension == o.dimension && half_width == o.half_width &&
               points_per_axis == o.points_per_axis;
    }
};

/// Sampled scalar field on a Grid.
struct GridFunction {
    Grid grid;
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }
};

inline void require_same_grid(const GridFunction& a, const GridFunction& b, const char* who) {
    if (!(a.grid == b.grid)) throw std::invalid_argument(std::string(who) + ": grid mismatch");
}

/// Sample an arbitrary callable f(Point) on the grid.
template <typename F>
GridFunction sample(const Grid& g, F&& f) {
    GridFunction out(g);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = f(g.point_at(i));
    return out;
}

/// Zero out the samples lying outside the requested half-space.
inline GridFunction restrict_half(const GridFunction& f, HalfSpace half) {
    GridFunction out = f;
    const bool keep_plus = (half == HalfSpace::plus);
    for (std::size_t i = 0; i < out.size(); ++i)
        if (out.grid.in_plus(i) != keep_plus) out.values[i] = 0.0;
    return out;
}

/// Even extension across the interface of the restriction of f to one half:
/// f_{+,e}(x) = f(x) for x_n > 0 and f(x', -x_n) otherwise (resp. for minus).
/// The reflected sample of (i0, k) is (i0, N-1-k), so this is exact on the
/// lattice.
inline GridFunction even_extension(const GridFunction& f, HalfSpace source) {
    GridFunction out(f.grid);
    const int N = f.grid.points_per_axis;
    const bool source_plus = (source == HalfSpace::plus);
    if (f.grid.dimension == 1) {
        for (int k = 0; k < N; ++k) {
            const bool in_source = (k >= N / 2) == source_plus;
            out.values[static_cast<std::size_t>(k)] =
                f.values[static_cast<std::size_t>(in_source ? k : f.grid.reflect_index(k))];
        }
    } else {
        for (int i0 = 0; i0 < N; ++i0)
            for (int k = 0; k < N; ++k) {
                const bool in_source = (k >= N / 2) == source_plus;
                out.values[f.grid.flat_index(i0, k)] =
                    f.values[f.grid.flat_index(i0, in_source ? k : f.grid.reflect_index(k))];
            }
    }
    return out;
}

/// Midpoint-rule integral h^n * sum(values), accumulated in index order.
inline double integrate(const GridFunction& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s * f.grid.cell_volume();
}

enum class Norm { l1, l2, linf };

inline double norm(const GridFunction& f, Norm which) {
    switch (which) {
        case Norm::l1: {
            double s = 0.0;
            for (double v : f.values) s += std::abs(v);
            return s * f.grid.cell_volume();
        }
        case Norm::l2: {
            double s = 0.0;
            for (double v : f.values) s += v * v;
            return std::sqrt(s * f.grid.cell_volume());
        }
        case Norm::linf: {
            double m = 0.0;
            for (double v : f.values) m = std::max(m, std::abs(v));
            return m;
        }
    }
    return 0.0;
}

inline bool ball_inside_box(const Grid& g, const Ball& b, double slack = 0.0) {
    for (int d = 0; d < g.dimension; ++d) {
        const double c = b.center[static_cast<std::size_t>(d)];
        if (c - b.radius < -g.half_width - slack) return false;
        if (c + b.radius > g.half_width + slack) return false;
    }
    return true;
}

/// Open-ball membership test used for indicators and cones.
inline bool in_ball(int dim, const Ball& b, const Point& x) {
    return sq_dist(dim, b.center, x) < b.radius * b.radius;
}

/// Indicator of B(center, radius) sampled on the grid.  If the ball is not
/// fully contained in the box the (quadrature-truncated) indicator is still
/// produced and a warning is emitted on `warn` when provided.
inline GridFunction ball_indicator(const Grid& g, const Ball& b, std::ostream* warn = nullptr) {
    if (!ball_inside_box(g, b) && warn)
        *warn << "ball_indicator: ball of radius " << b.radius << " at ("
              << b.center[0] << (g.dimension == 2 ? std::string(",") + std::to_string(b.center[1]) : std::string())
              << ") is not contained in the box; indicator is truncated\n";
    GridFunction out(g);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.values[i] = in_ball(g.dimension, b, g.point_at(i)) ? 1.0 : 0.0;
    return out;
}

/// Continuous volume of a ball of radius r in dimension n.
inline double ball_volume(int dim, double r) {
    return dim == 1 ? 2.0 * r : M_PI * r * r;
}

} // namespace neulab
