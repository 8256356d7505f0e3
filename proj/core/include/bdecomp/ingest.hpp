#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bdecomp/copula.hpp"
#include "bdecomp/density.hpp"
#include "bdecomp/grid.hpp"

namespace bdecomp {

// Observations, one row per sample, one column per variable. Requires at
// least two rows and finite entries.
class SampleMatrix {
public:
    SampleMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
    std::vector<double> column(std::size_t c) const;
    std::span<const double> values() const { return values_; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> values_;
};

// Histogram density over m: cells are bounded by midpoints between adjacent
// nodes (outer edges mirrored), each node's value is
// (count + pseudocount) / cell mass. Samples outside the outer edges are an
// input error, as is pseudocount = 0 with any empty cell.
Density histogram_density(const SampleMatrix& s, GridPtr m, double pseudocount = 0.5);

// Column-wise ranks divided by (n + 1); tied values receive their average
// rank. The result lives strictly inside the unit cube.
SampleMatrix pseudo_observations(const SampleMatrix& s);

// Piecewise-linear distribution estimate through the sorted distinct values
// of a column, with midpoint-of-jump CDF levels clamped to
// [1/(2n), 1 - 1/(2n)]. Needs at least two distinct values.
MarginalTransform empirical_marginal(std::span<const double> column);

}  // namespace bdecomp
