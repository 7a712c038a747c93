#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "neulab/grid.hpp"

/// Seeded test-function generators.  Everything is driven by splitmix64 so
/// reported experiments are reproducible bit-for-bit from the seed.

namespace neulab {

struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// uniform in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// uniform integer in [lo, hi]
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    double sign() { return (next() & 1) ? 1.0 : -1.0; }
};

/// Sum of `count` Gaussian bumps with random centers, widths and signed
/// amplitudes.  Centers keep six widths clear of the box walls, so the
/// samples decay below rounding before the truncation boundary.
inline GridFunction random_bump_sum(const Grid& g, SplitMix64& rng, int count = 4) {
    struct Bump {
        Point c;
        double w, amp;
    };
    std::vector<Bump> bumps;
    const double L = g.half_width;
    for (int k = 0; k < count; ++k) {
        Bump b;
        b.w = rng.uniform(0.15, 0.8) * std::min(1.0, L / 8.0);
        const double cap = L - 6.0 * b.w;
        for (int d = 0; d < g.dimension; ++d)
            b.c[static_cast<std::size_t>(d)] = rng.uniform(-cap, cap);
        b.amp = rng.sign() * rng.uniform(0.5, 1.5);
        bumps.push_back(b);
    }
    return sample(g, [&](const Point& p) {
        double v = 0.0;
        for (const Bump& b : bumps)
            v += b.amp * std::exp(-sq_dist(g.dimension, p, b.c) / (b.w * b.w));
        return v;
    });
}

/// Like random_bump_sum, but every bump comes with an identical negative
/// copy translated by a whole number of cells within the same half-space,
/// and centers sit on cell centers: the discrete mass of each half-space
/// cancels exactly (same sample multiset, opposite signs).
inline GridFunction random_mean_zero_per_half(const Grid& g, SplitMix64& rng, int pairs = 3) {
    GridFunction out(g);
    const double L = g.half_width;
    const double h = g.spacing();
    const int N = g.points_per_axis;
    const int na = g.normal_axis();
    const auto snap = [&](double x) {
        int idx = static_cast<int>(std::lround((x + L) / h - 0.5));
        idx = std::clamp(idx, 0, N - 1);
        return g.coordinate(idx);
    };
    for (int k = 0; k < pairs; ++k) {
        const double side = (k % 2 == 0) ? 1.0 : -1.0;  // alternate half-spaces
        const double w = rng.uniform(0.1, 0.45) * std::min(1.0, L / 8.0);
        const double margin = 6.0 * w + 2.0 * h;
        Point c1{0.0, 0.0}, c2{0.0, 0.0};
        for (int d = 0; d < g.dimension; ++d) {
            const bool normal = d == na;
            // the normal coordinate stays on `side`; tangential ones roam the box
            const double lo = normal ? margin : -L + margin;
            c1[static_cast<std::size_t>(d)] =
                snap((normal ? side : 1.0) * rng.uniform(lo, L - margin));
            c2[static_cast<std::size_t>(d)] =
                snap((normal ? side : 1.0) * rng.uniform(lo, L - margin));
        }
        const double amp = rng.sign() * rng.uniform(0.5, 1.5);
        for (std::size_t i = 0; i < out.size(); ++i) {
            const Point p = g.point_at(i);
            out.values[i] += amp * (std::exp(-sq_dist(g.dimension, p, c1) / (w * w)) -
                                    std::exp(-sq_dist(g.dimension, p, c2) / (w * w)));
        }
    }
    return out;
}

/// Random mean-zero values on one dyadic-aligned block of cells inside one
/// half-space.  Because the block is a node of the bisection tree, the
/// martingale decomposition confines every atom to the block, keeping atom
/// radii small enough for the factorization geometry.
inline GridFunction dyadic_block_function(const Grid& g, SplitMix64& rng,
                                          int block_cells = 16) {
    const int N = g.points_per_axis;
    const int na = g.normal_axis();
    if (block_cells < 2 || (N / 2) % block_cells != 0)
        throw std::invalid_argument("dyadic_block_function: block must divide the half-axis");
    GridFunction out(g);
    const bool plus = rng.next() & 1;
    std::array<int, 2> start{0, 0};
    for (int d = 0; d < g.dimension; ++d) {
        const int blocks_on_axis =
            (d == na) ? (N / 2) / block_cells : N / block_cells;
        int b = rng.uniform_int(0, blocks_on_axis - 1);
        start[static_cast<std::size_t>(d)] =
            b * block_cells + ((d == na && plus) ? N / 2 : 0);
    }
    std::vector<double> vals;
    double mean = 0.0;
    const int count = (g.dimension == 2) ? block_cells * block_cells : block_cells;
    for (int k = 0; k < count; ++k) {
        vals.push_back(rng.uniform(-1.0, 1.0));
        mean += vals.back();
    }
    mean /= count;
    int k = 0;
    if (g.dimension == 1) {
        for (int i = 0; i < block_cells; ++i)
            out.values[static_cast<std::size_t>(start[0] + i)] = vals[static_cast<std::size_t>(k++)] - mean;
    } else {
        for (int i0 = 0; i0 < block_cells; ++i0)
            for (int i1 = 0; i1 < block_cells; ++i1)
                out.values[g.flat_index(start[0] + i0, start[1] + i1)] =
                    vals[static_cast<std::size_t>(k++)] - mean;
    }
    return out;
}

/// Smooth random function clipped to ||b||_inf <= 1 (for synthesis and
/// commutator inputs).
inline GridFunction random_bounded(const Grid& g, SplitMix64& rng, int count = 4) {
    GridFunction b = random_bump_sum(g, rng, count);
    const double sup = norm(b, Norm::linf);
    if (sup > 1.0)
        for (double& v : b.values) v /= sup;
    return b;
}

/// Half-space step plus a logarithmic spike: the standard unbounded-but-BMO
/// style test function for commutator bounds.
inline GridFunction step_log_function(const Grid& g) {
    return sample(g, [&](const Point& p) {
        const double xn = p[static_cast<std::size_t>(g.dimension - 1)];
        const double rad = std::sqrt(sq_dist(g.dimension, p, Point{0.0, 0.0}));
        return (xn >= 0.0 ? 1.0 : 0.0) + std::log(rad);
    });
}

} // namespace neulab
