#pragma once

#include <span>
#include <vector>

#include "bdecomp/grid.hpp"

namespace bdecomp {

// Strictly positive field over a grid, identified with its equivalence class
// under multiplication by positive scalars. Immutable after construction.
class Density {
public:
    Density(GridPtr measure, std::vector<double> values);

    const GridMeasure& measure() const { return *measure_; }
    const GridPtr& measure_ptr() const { return measure_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }

private:
    GridPtr measure_;
    std::vector<double> values_;
};

// Real field over a grid whose weighted sum vanishes: the image of a density
// under the centered log transform. Construction enforces the zero-sum
// constraint up to 1e-10 * total_mass * max|value|.
class ClrField {
public:
    ClrField(GridPtr measure, std::vector<double> values);

    const GridMeasure& measure() const { return *measure_; }
    const GridPtr& measure_ptr() const { return measure_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }

private:
    friend ClrField make_clr_unchecked(GridPtr, std::vector<double>);
    struct unchecked_t {};
    ClrField(unchecked_t, GridPtr measure, std::vector<double> values);

    GridPtr measure_;
    std::vector<double> values_;
};

// For fields produced by linear operations on already-valid clr fields, whose
// zero sum holds by construction. A scale-relative zero-sum check would
// spuriously reject components that are exactly zero up to float residue.
ClrField make_clr_unchecked(GridPtr measure, std::vector<double> values);

// Vector-space operations: pointwise product and pointwise power.
Density perturb(const Density& f, const Density& g);
Density power(double alpha, const Density& f);

// Centered log transform and its inverse. clr is a linear isometry onto the
// zero-sum subspace; clr_inverse(clr(f)) recovers the canonical scale of f.
ClrField clr(const Density& f);
Density clr_inverse(const ClrField& z);

// Scalar product of the quotient space. The production route goes through the
// clr isometry; inner_product_direct evaluates the defining double sum
// (1 / (2 * mass)) * sum_a sum_b w_a w_b (ln f_a - ln f_b)(ln g_a - ln g_b)
// literally in O(N^2) and exists as an independent cross-check.
double inner_product(const Density& f, const Density& g);
double inner_product(const ClrField& u, const ClrField& v);
double inner_product_direct(const Density& f, const Density& g);

double norm(const Density& f);
double norm(const ClrField& u);
double norm_sq(const ClrField& u);
double distance(const Density& f, const Density& g);

// exp(clr(f)): the representative of f's class whose log has zero mean.
Density canonical_representative(const Density& f);

// Equality up to a positive scalar, via canonical representatives:
// max |clr f - clr g| <= tol * (1 + max(|clr f|, |clr g|)).
bool proportional(const Density& f, const Density& g, double tol = 1e-9);

namespace detail {
// Throws std::invalid_argument when the two grids differ in content.
void require_same_measure(const GridMeasure& a, const GridMeasure& b, const char* op);
}  // namespace detail

}  // namespace bdecomp
