#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "neulab/synthetic.hpp"

using namespace neulab;

TEST_CASE("SplitMix64 streams are deterministic per seed") {
    SplitMix64 a(1234), b(1234), c(4321);
    CHECK(a.next() == b.next());
    CHECK(a.uniform() == b.uniform());
    CHECK(a.uniform(-2.0, 3.0) == b.uniform(-2.0, 3.0));
    CHECK(a.uniform_int(0, 99) == b.uniform_int(0, 99));
    CHECK(a.sign() == b.sign());

    bool differs = false;
    for (int k = 0; k < 8 && !differs; ++k) differs = a.next() != c.next();
    CHECK(differs);

    for (int k = 0; k < 1000; ++k) {
        const double u = c.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const int i = c.uniform_int(-3, 5);
        CHECK(i >= -3);
        CHECK(i <= 5);
        const double s = c.sign();
        CHECK(std::abs(s) == 1.0);
    }
}

TEST_CASE("generators reproduce the same field for the same seed") {
    const Grid g(1, 8.0, 256);
    SplitMix64 r1(99), r2(99);
    const GridFunction f1 = random_bump_sum(g, r1);
    const GridFunction f2 = random_bump_sum(g, r2);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(f1.values[i] == f2.values[i]);
}

TEST_CASE("random_mean_zero_per_half balances each half-space") {
    for (int dim : {1, 2}) {
        const Grid g(dim, 4.0, dim == 1 ? 256 : 32);
        SplitMix64 rng(5 + dim);
        for (int rep = 0; rep < 3; ++rep) {
            const GridFunction f = random_mean_zero_per_half(g, rng);
            const double scale = 1.0 + norm(f, Norm::linf);
            CHECK(std::abs(integrate(restrict_half(f, HalfSpace::plus))) <= 1e-12 * scale);
            CHECK(std::abs(integrate(restrict_half(f, HalfSpace::minus))) <= 1e-12 * scale);
            CHECK(norm(f, Norm::linf) > 0.0);
        }
    }
}

TEST_CASE("random_bounded clips to the unit sup ball") {
    const Grid g(2, 4.0, 32);
    SplitMix64 rng(8);
    for (int rep = 0; rep < 4; ++rep) {
        const GridFunction b = random_bounded(g, rng);
        CHECK(norm(b, Norm::linf) <= 1.0 + 1e-15);
        CHECK(norm(b, Norm::linf) > 0.0);
    }
}

TEST_CASE("dyadic_block_function emits one mean-zero block inside one half") {
    const Grid g(1, 8.0, 256);
    SplitMix64 rng(31);
    for (int rep = 0; rep < 4; ++rep) {
        const GridFunction f = dyadic_block_function(g, rng, 8);
        CHECK(std::abs(integrate(f)) <= 1e-13);

        std::size_t first = g.size(), last = 0, count = 0;
        bool plus_seen = false, minus_seen = false;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (f.values[i] == 0.0) continue;
            first = std::min(first, i);
            last = std::max(last, i);
            ++count;
            (g.in_plus(i) ? plus_seen : minus_seen) = true;
            CHECK(std::abs(f.values[i]) <= 2.0);
        }
        CHECK(count > 0);
        CHECK(count <= 8);
        CHECK(last - first < 8);               // one block window
        CHECK(plus_seen != minus_seen);        // confined to a single half
    }
}

TEST_CASE("dyadic_block_function works on two-dimensional grids") {
    const Grid g(2, 4.0, 32);
    SplitMix64 rng(32);
    const GridFunction f = dyadic_block_function(g, rng, 4);
    std::size_t count = 0;
    bool plus_seen = false, minus_seen = false;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (f.values[i] != 0.0) {
            ++count;
            (g.in_plus(i) ? plus_seen : minus_seen) = true;
        }
    CHECK(count > 0);
    CHECK(count <= 16);
    CHECK(plus_seen != minus_seen);
    CHECK(std::abs(integrate(f)) <= 1e-13);
}

TEST_CASE("dyadic_block_function validates the block size") {
    const Grid g(1, 8.0, 256);
    SplitMix64 rng(1);
    CHECK_THROWS_AS(dyadic_block_function(g, rng, 1), std::invalid_argument);
    CHECK_THROWS_AS(dyadic_block_function(Grid(1, 8.0, 64), rng, 3), std::invalid_argument);
}

TEST_CASE("step_log_function is finite on cell centers") {
    for (int dim : {1, 2}) {
        const Grid g(dim, 2.0, dim == 1 ? 8 : 16);
        const GridFunction f = step_log_function(g);
        for (double v : f.values) CHECK(std::isfinite(v));
    }
    // the interface jump is exactly the heaviside step: the log parts cancel
    const Grid g(1, 2.0, 8);
    const GridFunction f = step_log_function(g);
    CHECK(f.values[4] - f.values[3] == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(f.values[0] == Catch::Approx(std::log(1.75)).epsilon(1e-14));
}
