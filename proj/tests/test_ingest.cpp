#include <bdecomp/ingest.hpp>

#include "doctest.h"
#include "test_util.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

using namespace bdecomp;

TEST_CASE("sample matrices validate their shape and entries") {
    CHECK_THROWS_AS(SampleMatrix(1, 2, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(SampleMatrix(2, 0, {}), std::invalid_argument);
    CHECK_THROWS_AS(SampleMatrix(2, 2, {1.0, 2.0, 3.0}), std::invalid_argument);
    CHECK_THROWS_AS(SampleMatrix(2, 1, {1.0, std::numeric_limits<double>::quiet_NaN()}),
                    std::invalid_argument);

    const SampleMatrix s(3, 2, {1.0, 10.0, 2.0, 20.0, 3.0, 30.0});
    CHECK(s.rows() == 3);
    CHECK(s.cols() == 2);
    CHECK(s.at(1, 1) == 20.0);
    const std::vector<double> c1 = s.column(1);
    REQUIRE(c1.size() == 3);
    CHECK(c1[0] == 10.0);
    CHECK(c1[2] == 30.0);
}

TEST_CASE("pseudo-observations are ranks over n plus one") {
    const SampleMatrix s(3, 1, {3.0, 1.0, 2.0});
    const SampleMatrix u = pseudo_observations(s);
    CHECK(u.at(0, 0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(u.at(1, 0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(u.at(2, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("tied samples share their average rank") {
    const SampleMatrix s(3, 1, {2.0, 2.0, 3.0});
    const SampleMatrix u = pseudo_observations(s);
    // Ranks 1 and 2 average to 1.5; divided by 4.
    CHECK(u.at(0, 0) == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(u.at(1, 0) == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(u.at(2, 0) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("pseudo-observations stay strictly inside the unit cube") {
    std::mt19937_64 eng(7);
    std::vector<double> vals(200);
    for (double& v : vals) v = std::floor(testutil::uniform01(eng) * 10.0);
    const SampleMatrix s(100, 2, std::move(vals));
    const SampleMatrix u = pseudo_observations(s);
    for (std::size_t r = 0; r < 100; ++r) {
        for (std::size_t c = 0; c < 2; ++c) {
            CHECK(u.at(r, c) > 0.0);
            CHECK(u.at(r, c) < 1.0);
        }
    }
}

TEST_CASE("histogram cells are bounded by midpoints") {
    // Axis nodes 0.25 and 0.75 with unit weights: the cell boundary sits at
    // 0.5, the outer edges at 0 and 1.
    auto m = make_grid({Axis("x", {0.25, 0.75}, {1.0, 1.0})});
    const SampleMatrix s(4, 1, {0.1, 0.4, 0.6, 0.9});
    const Density h = histogram_density(s, m, 0.5);
    // Two samples per cell, pseudocount 0.5, cell mass 1.
    CHECK(h.values()[0] == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(h.values()[1] == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("histogram mass accounts for every sample and pseudocount") {
    auto m = testutil::cube({8, 8});
    std::mt19937_64 eng(11);
    std::vector<double> vals(2 * 500);
    for (double& v : vals) v = testutil::uniform01(eng);
    const SampleMatrix s(500, 2, std::move(vals));
    const double pc = 0.5;
    const Density h = histogram_density(s, m, pc);

    double mass = 0.0;
    const auto w = m->point_weights();
    for (std::size_t k = 0; k < h.size(); ++k) mass += h.values()[k] * w[k];
    CHECK(mass == doctest::Approx(500.0 + pc * 64.0).epsilon(1e-12));
}

TEST_CASE("histogram boundary samples land in the top cell") {
    auto m = make_grid({Axis("x", {0.25, 0.75}, {1.0, 1.0})});
    // 1.0 is the mirrored outer edge; a sample exactly there stays in range.
    const SampleMatrix s(2, 1, {0.5, 1.0});
    const Density h = histogram_density(s, m, 0.5);
    CHECK(h.values()[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(h.values()[1] == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("histogram rejects out-of-range samples and empty cells at zero pseudocount") {
    auto m = make_grid({Axis("x", {0.25, 0.75}, {1.0, 1.0})});
    const SampleMatrix outside(2, 1, {0.5, 1.5});
    CHECK_THROWS_WITH_AS(histogram_density(outside, m, 0.5),
                         doctest::Contains("outside the grid range"), std::invalid_argument);

    const SampleMatrix onesided(2, 1, {0.1, 0.2});
    CHECK_THROWS_AS(histogram_density(onesided, m, 0.0), std::invalid_argument);
    // The same data is fine with a positive pseudocount.
    const Density h = histogram_density(onesided, m, 0.25);
    CHECK(h.values()[0] == doctest::Approx(2.25).epsilon(1e-15));
    CHECK(h.values()[1] == doctest::Approx(0.25).epsilon(1e-15));

    const SampleMatrix wrongdim(2, 2, {0.5, 0.5, 0.6, 0.6});
    CHECK_THROWS_AS(histogram_density(wrongdim, m, 0.5), std::invalid_argument);
}

TEST_CASE("empirical marginals pass through midpoint jump levels") {
    const std::vector<double> two = {1.0, 2.0};
    const MarginalTransform t2 = empirical_marginal(two);
    CHECK(t2.forward(1.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(t2.forward(2.0) == doctest::Approx(0.75).epsilon(1e-15));

    const std::vector<double> four = {1.0, 1.0, 2.0, 3.0};
    const MarginalTransform t4 = empirical_marginal(four);
    // The duplicate counts twice: 1.0 covers ranks {1,2}, 2.0 rank {3},
    // 3.0 rank {4}; midpoint levels 2/8, 5/8, 7/8.
    CHECK(t4.forward(1.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(t4.forward(2.0) == doctest::Approx(0.625).epsilon(1e-15));
    CHECK(t4.forward(3.0) == doctest::Approx(0.875).epsilon(1e-15));

    const std::vector<double> constant = {2.0, 2.0, 2.0};
    CHECK_THROWS_AS(empirical_marginal(constant), std::invalid_argument);
}

TEST_CASE("empirical marginals compose with pseudo-observations") {
    // Transforming each sample by its own empirical marginal reproduces the
    // pseudo-observation levels for all-distinct data.
    std::mt19937_64 eng(13);
    std::vector<double> vals(50);
    for (double& v : vals) v = testutil::uniform01(eng) * 100.0;
    const SampleMatrix s(50, 1, std::vector<double>(vals));
    const SampleMatrix u = pseudo_observations(s);
    const MarginalTransform t = empirical_marginal(s.column(0));
    for (std::size_t r = 0; r < 50; ++r) {
        // Rank / (n+1) and (rank - 1/2) / n are distinct conventions; both
        // order the sample identically and stay within a cell of each other.
        const double via_ranks = u.at(r, 0);
        const double via_cdf = t.forward(s.at(r, 0));
        CHECK(std::fabs(via_ranks - via_cdf) <= 1.0 / 50.0);
    }
}
