#include <bdecomp/density.hpp>

#include "doctest.h"
#include "test_util.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace bdecomp;

namespace {

GridPtr two_point_line() { return make_grid({Axis("x", {0.0, 1.0}, {1.0, 1.0})}); }

GridPtr unit_square_2x2() {
    return make_grid({Axis("x1", {0.0, 1.0}, {1.0, 1.0}), Axis("x2", {0.0, 1.0}, {1.0, 1.0})});
}

}  // namespace

TEST_CASE("densities must be strictly positive and finite") {
    auto m = two_point_line();
    CHECK_THROWS_AS(Density(m, {1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(Density(m, {1.0, -2.0}), std::invalid_argument);
    CHECK_THROWS_AS(Density(m, {1.0}), std::invalid_argument);
    CHECK_NOTHROW(Density(m, {0.5, 2.0}));
}

TEST_CASE("clr of a two-point density centers the log") {
    auto m = two_point_line();
    const Density f(m, {std::exp(2.0), std::exp(4.0)});
    const ClrField z = clr(f);
    CHECK(z.values()[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(z.values()[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("scalar product of matched two-point densities is two") {
    auto m = two_point_line();
    const Density f(m, {std::exp(-1.0), std::exp(1.0)});
    const Density g(m, {std::exp(-1.0), std::exp(1.0)});
    CHECK(inner_product(f, g) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(inner_product_direct(f, g) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(norm_sq(clr(f)) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(norm(f) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("clr fields must be finite and weighted-zero-sum") {
    auto m = two_point_line();
    CHECK_NOTHROW(ClrField(m, {-1.0, 1.0}));
    CHECK_THROWS_AS(ClrField(m, {1.0, 1.0}), std::invalid_argument);
    auto mw = make_grid({Axis("x", {0.0, 1.0}, {1.0, 3.0})});
    CHECK_NOTHROW(ClrField(mw, {-3.0, 1.0}));
    CHECK_THROWS_AS(ClrField(mw, {-1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("perturbation and powering are the vector operations in log space") {
    auto m = testutil::mixed_grid({3, 4}, 5);
    const Density f = testutil::random_density(m, 6);
    const Density g = testutil::random_density(m, 7);

    const Density h = perturb(f, g);
    for (std::size_t k = 0; k < h.size(); ++k)
        CHECK(h.values()[k] == doctest::Approx(f.values()[k] * g.values()[k]).epsilon(1e-14));

    const Density p = power(2.5, f);
    for (std::size_t k = 0; k < p.size(); ++k)
        CHECK(p.values()[k] == doctest::Approx(std::pow(f.values()[k], 2.5)).epsilon(1e-13));

    // clr is linear over (perturb, power)
    const ClrField zh = clr(h);
    const ClrField zf = clr(f);
    const ClrField zg = clr(g);
    double dev = 0.0;
    for (std::size_t k = 0; k < zh.size(); ++k)
        dev = std::max(dev, std::fabs(zh.values()[k] - zf.values()[k] - zg.values()[k]));
    CHECK(dev <= 1e-12);

    const ClrField zp = clr(p);
    dev = 0.0;
    for (std::size_t k = 0; k < zp.size(); ++k)
        dev = std::max(dev, std::fabs(zp.values()[k] - 2.5 * zf.values()[k]));
    CHECK(dev <= 1e-12);
}

TEST_CASE("clr and its inverse are mutually inverse up to scale") {
    auto m = testutil::mixed_grid({4, 3}, 8);
    const Density f = testutil::random_density(m, 9);
    const Density canon = canonical_representative(f);
    const Density back = clr_inverse(clr(canon));
    CHECK(testutil::max_abs_diff(canon.values(), back.values()) <= 1e-13);
    CHECK(proportional(f, canon));
    // clr kills constants: 3 * f has the same clr
    std::vector<double> scaled(f.values().begin(), f.values().end());
    for (auto& v : scaled) v *= 3.0;
    const Density f3(f.measure_ptr(), std::move(scaled));
    CHECK(testutil::max_abs_diff(clr(f).values(), clr(f3).values()) <= 1e-12);
    CHECK(proportional(f, f3));
    CHECK(distance(f, f3) <= 1e-7);
}

TEST_CASE("scalar product is symmetric, bilinear, and measure-weighted") {
    auto m = testutil::mixed_grid({3, 5}, 10);
    const Density f = testutil::random_density(m, 11);
    const Density g = testutil::random_density(m, 12);
    const Density h = testutil::random_density(m, 13);

    CHECK(inner_product(f, g) == doctest::Approx(inner_product(g, f)).epsilon(1e-13));
    const double lhs = inner_product(perturb(f, h), g);
    const double rhs = inner_product(f, g) + inner_product(h, g);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    const double pl = inner_product(power(1.7, f), g);
    CHECK(pl == doctest::Approx(1.7 * inner_product(f, g)).epsilon(1e-12));
}

TEST_CASE("both scalar product routes agree on non-uniform grids") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto m = testutil::mixed_grid({4, 3, 2}, 100 + seed);
        const Density f = testutil::random_density(m, 200 + seed);
        const Density g = testutil::random_density(m, 300 + seed);
        const double a = inner_product(f, g);
        const double b = inner_product_direct(f, g);
        CHECK(std::fabs(a - b) <= 1e-12 * (1.0 + std::fabs(a)));
    }
}

TEST_CASE("densities on different measures do not combine") {
    auto m1 = testutil::cube({3, 3});
    auto m2 = testutil::cube({3, 4});
    const Density f = testutil::random_density(m1, 1);
    const Density g = testutil::random_density(m2, 2);
    CHECK_THROWS_AS(perturb(f, g), std::invalid_argument);
    CHECK_THROWS_AS(inner_product(f, g), std::invalid_argument);
}

TEST_CASE("margin of a 2x2 density has the expected clr") {
    // f constant in x2, f(x1=0,.) = 1, f(x1=1,.) = e: the x1 margin has
    // log values (0, 1), so its clr is (-1/2, 1/2) broadcast over the square.
    auto m = unit_square_2x2();
    const Density f(m, {1.0, 1.0, std::exp(1.0), std::exp(1.0)});
    const ClrField z = clr(f);
    CHECK(z.values()[0] == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(z.values()[1] == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(z.values()[2] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(z.values()[3] == doctest::Approx(0.5).epsilon(1e-14));
}
