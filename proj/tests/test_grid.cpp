#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "neulab/grid.hpp"

using namespace neulab;
using Catch::Approx;

TEST_CASE("grid constructor validates its arguments") {
    CHECK_THROWS_AS(Grid(3, 1.0, 8), std::invalid_argument);
    CHECK_THROWS_AS(Grid(0, 1.0, 8), std::invalid_argument);
    CHECK_THROWS_AS(Grid(1, 0.0, 8), std::invalid_argument);
    CHECK_THROWS_AS(Grid(1, -2.0, 8), std::invalid_argument);
    CHECK_THROWS_AS(Grid(1, 1.0, 7), std::invalid_argument);
    CHECK_THROWS_AS(Grid(1, 1.0, 0), std::invalid_argument);
    CHECK_NOTHROW(Grid(2, 4.0, 16));
}

TEST_CASE("grid geometry: spacing, volume, coordinates") {
    Grid g(1, 2.0, 8);
    CHECK(g.spacing() == 0.5);
    CHECK(g.cell_volume() == 0.5);
    CHECK(g.size() == 8);
    CHECK(g.normal_axis() == 0);
    CHECK(g.coordinate(0) == -1.75);
    CHECK(g.coordinate(7) == 1.75);

    Grid g2(2, 2.0, 8);
    CHECK(g2.cell_volume() == 0.25);
    CHECK(g2.size() == 64);
    CHECK(g2.normal_axis() == 1);
}

TEST_CASE("lattice is symmetric under reflection and avoids the interface") {
    for (const Grid& g : {Grid(1, 2.0, 8), Grid(1, 3.0, 6)}) {
        for (int k = 0; k < g.points_per_axis; ++k) {
            CHECK(g.coordinate(k) == -g.coordinate(g.reflect_index(k)));
            CHECK(g.coordinate(k) != 0.0);
        }
    }
}

TEST_CASE("flat index round trip and half-space tagging in 2-D") {
    Grid g(2, 2.0, 8);
    for (int i0 = 0; i0 < 8; ++i0)
        for (int i1 = 0; i1 < 8; ++i1) {
            const std::size_t f = g.flat_index(i0, i1);
            const Point p = g.point_at(f);
            CHECK(p[0] == g.coordinate(i0));
            CHECK(p[1] == g.coordinate(i1));
            CHECK(g.in_plus(f) == (p[1] > 0.0));
        }
}

TEST_CASE("point reflection is an involution that flips the last axis") {
    const Point x{0.7, -1.3};
    CHECK(reflect_point(1, x)[0] == -0.7);
    CHECK(reflect_point(2, x)[0] == 0.7);
    CHECK(reflect_point(2, x)[1] == 1.3);
    CHECK(reflect_point(2, reflect_point(2, x)) == x);
    CHECK(dist(2, x, Point{0.7, 1.0}) == Approx(2.3));
}

TEST_CASE("ball constructor rejects nonpositive radii") {
    CHECK_THROWS_AS(Ball(Point{0.0, 0.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(Ball(Point{0.0, 0.0}, -1.0), std::invalid_argument);
    CHECK_NOTHROW(Ball());  // default (radius 0) is the empty placeholder
}

TEST_CASE("restrict_half partitions a function exactly") {
    Grid g(1, 2.0, 16);
    GridFunction f = sample(g, [](const Point& p) { return std::sin(3.0 * p[0]) + 0.25; });
    const GridFunction fp = restrict_half(f, HalfSpace::plus);
    const GridFunction fm = restrict_half(f, HalfSpace::minus);
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(fp.values[i] + fm.values[i] == f.values[i]);
        CHECK((fp.values[i] == 0.0 || fm.values[i] == 0.0));
    }
}

TEST_CASE("even extension is symmetric and matches its source half") {
    Grid g(2, 2.0, 16);
    GridFunction f = sample(g, [](const Point& p) { return p[0] + 3.0 * p[1] * p[1] * p[1]; });
    const GridFunction fe = even_extension(f, HalfSpace::plus);
    const int N = g.points_per_axis;
    for (int i0 = 0; i0 < N; ++i0)
        for (int k = 0; k < N; ++k) {
            CHECK(fe.values[g.flat_index(i0, k)] ==
                  fe.values[g.flat_index(i0, g.reflect_index(k))]);
            if (k >= N / 2)
                CHECK(fe.values[g.flat_index(i0, k)] == f.values[g.flat_index(i0, k)]);
        }
}

TEST_CASE("even extension 1-D example: f(x)=x on (0,1) extends to |x|") {
    Grid g(1, 2.0, 8);  // samples at +-0.25, +-0.75, ...
    GridFunction f = sample(g, [](const Point& p) {
        return (p[0] > 0.0 && p[0] < 1.0) ? p[0] : 0.0;
    });
    const GridFunction fe = even_extension(f, HalfSpace::plus);
    CHECK(fe.values[2] == 0.75);  // x = -0.75
    CHECK(fe.values[3] == 0.25);  // x = -0.25
}

TEST_CASE("integrate: midpoint rule on indicators") {
    Grid g1(1, 1.0, 8);
    CHECK(integrate(GridFunction(g1, 1.0)) == Approx(2.0).margin(1e-14));
    Grid g2(2, 1.0, 4);
    CHECK(integrate(GridFunction(g2, 1.0)) == Approx(4.0).margin(1e-14));
}

TEST_CASE("norms with measure weighting") {
    Grid g(1, 1.0, 2);  // h = 1
    GridFunction f(g);
    f.values = {3.0, -4.0};
    CHECK(norm(f, Norm::l1) == 7.0);
    CHECK(norm(f, Norm::l2) == 5.0);
    CHECK(norm(f, Norm::linf) == 4.0);
    CHECK(norm(GridFunction(g), Norm::l1) == 0.0);
}

TEST_CASE("ball indicator: membership is open and warnings fire on truncation") {
    Grid g(1, 2.0, 8);
    const GridFunction ind = ball_indicator(g, Ball(Point{0.25, 0.0}, 0.6));
    double count = 0.0;
    for (double v : ind.values) count += v;
    CHECK(count == 3.0);  // centers -0.25, 0.25, 0.75

    // sample exactly on the sphere is excluded (open ball)
    CHECK(in_ball(1, Ball(Point{0.0, 0.0}, 0.25), Point{0.25, 0.0}) == false);

    std::ostringstream warn;
    ball_indicator(g, Ball(Point{1.9, 0.0}, 0.5), &warn);
    CHECK(warn.str().find("truncated") != std::string::npos);
    std::ostringstream quiet;
    ball_indicator(g, Ball(Point{0.0, 0.0}, 0.5), &quiet);
    CHECK(quiet.str().empty());

    // disjoint balls have pointwise-disjoint indicators
    const GridFunction a = ball_indicator(g, Ball(Point{-1.0, 0.0}, 0.4));
    const GridFunction b = ball_indicator(g, Ball(Point{1.0, 0.0}, 0.4));
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.values[i] * b.values[i] == 0.0);
}

TEST_CASE("ball volume and containment") {
    CHECK(ball_volume(1, 0.3) == Approx(0.6));
    CHECK(ball_volume(2, 1.0) == Approx(M_PI));
    Grid g(2, 2.0, 8);
    CHECK(ball_inside_box(g, Ball(Point{1.0, 1.0}, 0.9)));
    CHECK_FALSE(ball_inside_box(g, Ball(Point{1.5, 0.0}, 0.9)));
    CHECK(ball_inside_box(g, Ball(Point{1.5, 0.0}, 0.9), 0.5));
}

TEST_CASE("grid function plumbing") {
    Grid g(1, 1.0, 4);
    GridFunction f(g, 2.5);
    for (double v : f.values) CHECK(v == 2.5);
    f[1] = -1.0;
    CHECK(f[1] == -1.0);

    GridFunction other(Grid(1, 1.0, 8));
    CHECK_THROWS_AS(require_same_grid(f, other, "test"), std::invalid_argument);
}
