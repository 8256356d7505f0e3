#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace bdecomp {

// Set of axis positions (0-based, < 32). Grids are capped at 20 axes, so a
// 32-bit mask is always wide enough. Values and ordering compare by mask.
class IndexSet {
public:
    constexpr IndexSet() = default;
    static constexpr IndexSet from_bits(std::uint32_t bits) { return IndexSet(bits); }
    static constexpr IndexSet full(int d) {
        return IndexSet(d >= 32 ? ~std::uint32_t{0} : ((std::uint32_t{1} << d) - 1u));
    }
    static constexpr IndexSet single(int axis) { return IndexSet(std::uint32_t{1} << axis); }
    static IndexSet of(std::initializer_list<int> axes) {
        std::uint32_t b = 0;
        for (int a : axes) b |= std::uint32_t{1} << a;
        return IndexSet(b);
    }

    constexpr std::uint32_t bits() const { return bits_; }
    constexpr bool empty() const { return bits_ == 0; }
    int count() const;
    constexpr bool contains(int axis) const { return (bits_ >> axis) & 1u; }
    constexpr bool subset_of(IndexSet o) const { return (bits_ & ~o.bits_) == 0; }

    constexpr IndexSet with(int axis) const { return IndexSet(bits_ | (std::uint32_t{1} << axis)); }
    constexpr IndexSet without(int axis) const { return IndexSet(bits_ & ~(std::uint32_t{1} << axis)); }
    constexpr IndexSet complement(int d) const { return IndexSet(full(d).bits_ & ~bits_); }

    friend constexpr IndexSet operator|(IndexSet a, IndexSet b) { return IndexSet(a.bits_ | b.bits_); }
    friend constexpr IndexSet operator&(IndexSet a, IndexSet b) { return IndexSet(a.bits_ & b.bits_); }
    friend constexpr IndexSet operator-(IndexSet a, IndexSet b) { return IndexSet(a.bits_ & ~b.bits_); }
    friend constexpr bool operator==(IndexSet a, IndexSet b) { return a.bits_ == b.bits_; }
    friend constexpr bool operator!=(IndexSet a, IndexSet b) { return a.bits_ != b.bits_; }

    // Member axis positions in ascending order.
    std::vector<int> axes() const;

    // Human-readable 1-based label, e.g. {0,2} -> "1-3". Empty set -> "empty".
    std::string label() const;

private:
    constexpr explicit IndexSet(std::uint32_t bits) : bits_(bits) {}
    std::uint32_t bits_ = 0;
};

// Canonical subset order: by cardinality, ties by ascending mask.
bool subset_order_less(IndexSet a, IndexSet b);

// All 2^d subsets of {0,...,d-1} in canonical order (the first entry is empty).
std::vector<IndexSet> all_subsets(int d);

// Non-empty subsets of `within` in canonical order, optionally bounded below
// by cardinality and restricted to proper subsets.
std::vector<IndexSet> subsets_of(IndexSet within, int min_card = 1, bool proper = false);

// Visits every non-empty subset of `within`. Order is descending by mask;
// callers that need the canonical order should use subsets_of.
template <typename F>
void for_each_nonempty_subset(IndexSet within, F&& f) {
    const std::uint32_t w = within.bits();
    for (std::uint32_t s = w; s != 0; s = (s - 1) & w) {
        f(IndexSet::from_bits(s));
    }
}

// One coordinate direction of a tensor-product grid: strictly increasing node
// positions and a strictly positive weight per node. The weights are the
// reference measure itself (a finite discrete measure), not an approximation
// of one; every identity in the library is exact with respect to them.
class Axis {
public:
    Axis(std::string name, std::vector<double> points, std::vector<double> weights);

    const std::string& name() const { return name_; }
    std::span<const double> points() const { return points_; }
    std::span<const double> weights() const { return weights_; }
    std::size_t size() const { return points_.size(); }
    double mass() const { return mass_; }

private:
    std::string name_;
    std::vector<double> points_;
    std::vector<double> weights_;
    double mass_;
};

// n cell midpoints of [lo, hi] with weight (hi-lo)/n each (cell masses).
Axis uniform_axis(std::size_t n, double lo, double hi, std::string name = "x");

// Arbitrary nodes with weights normalized to total mass 1.
Axis probability_axis(std::vector<double> points, std::vector<double> weights,
                      std::string name = "x");

// Tensor product of up to 20 axes. Fields over the grid are stored flat in
// row-major order with axis 0 slowest-varying. Immutable after construction.
class GridMeasure {
public:
    explicit GridMeasure(std::vector<Axis> axes);

    int dim() const { return static_cast<int>(axes_.size()); }
    const Axis& axis(int i) const { return axes_[static_cast<std::size_t>(i)]; }
    std::size_t size() const { return size_; }
    std::size_t stride(int i) const { return strides_[static_cast<std::size_t>(i)]; }
    double total_mass() const { return total_mass_; }

    // Product of per-axis weights at each flat index; size() entries.
    std::span<const double> point_weights() const { return point_weights_; }

    // Product of the masses of the axes in I; 1 for the empty set.
    double subset_mass(IndexSet I) const;

    // Numeric-content equality (axis sizes, points, weights); names ignored.
    bool same_as(const GridMeasure& o) const;

private:
    std::vector<Axis> axes_;
    std::vector<std::size_t> strides_;
    std::vector<double> point_weights_;
    std::size_t size_;
    double total_mass_;
};

using GridPtr = std::shared_ptr<const GridMeasure>;

GridPtr make_grid(std::vector<Axis> axes);

// Compensated weighted sum over the full grid: sum_k w_k * values_k.
double weighted_sum(const GridMeasure& m, std::span<const double> values);

// Integrates the axes in J out of a full-grid field: the result is indexed by
// the remaining axes in their original order (row-major). J may be empty (the
// field is returned unchanged) or all axes (a single total remains).
std::vector<double> integrate_out(const GridMeasure& m, std::span<const double> values,
                                  IndexSet J);

// Inverse layout operation: expands a field over the axes in `kept` to the
// full grid, constant along the dropped axes.
std::vector<double> broadcast_from(const GridMeasure& m, IndexSet kept,
                                   std::span<const double> sub_values);

// Grid consisting of the axes in `kept` only (must be non-empty).
GridMeasure sub_measure(const GridMeasure& m, IndexSet kept);

// Positions of the axes of `sub` within `outer`: relabels a set expressed in
// outer axis positions to positions within the kept-axes grid.
IndexSet relabel(IndexSet subset, IndexSet kept);

}  // namespace bdecomp
