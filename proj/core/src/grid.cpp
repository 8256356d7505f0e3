#include "bdecomp/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bdecomp {

namespace {

constexpr int kMaxDim = 20;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Kahan-compensated dot product of w and v.
double compensated_dot(std::span<const double> w, std::span<const double> v) {
    double sum = 0.0, comp = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double term = w[k] * v[k] - comp;
        const double next = sum + term;
        comp = (next - sum) - term;
        sum = next;
    }
    return sum;
}

double compensated_sum(std::span<const double> v) {
    double sum = 0.0, comp = 0.0;
    for (double x : v) {
        const double term = x - comp;
        const double next = sum + term;
        comp = (next - sum) - term;
        sum = next;
    }
    return sum;
}

}  // namespace

int IndexSet::count() const { return std::popcount(bits_); }

std::vector<int> IndexSet::axes() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(count()));
    for (int i = 0; i < 32; ++i)
        if (contains(i)) out.push_back(i);
    return out;
}

std::string IndexSet::label() const {
    if (empty()) return "empty";
    std::string out;
    for (int i : axes()) {
        if (!out.empty()) out += '-';
        out += std::to_string(i + 1);
    }
    return out;
}

bool subset_order_less(IndexSet a, IndexSet b) {
    const int ca = a.count(), cb = b.count();
    if (ca != cb) return ca < cb;
    return a.bits() < b.bits();
}

std::vector<IndexSet> all_subsets(int d) {
    if (d < 0 || d > kMaxDim) fail("all_subsets: dimension out of range");
    std::vector<IndexSet> out;
    out.reserve(std::size_t{1} << d);
    for (std::uint32_t b = 0; b < (std::uint32_t{1} << d); ++b)
        out.push_back(IndexSet::from_bits(b));
    std::sort(out.begin(), out.end(), subset_order_less);
    return out;
}

std::vector<IndexSet> subsets_of(IndexSet within, int min_card, bool proper) {
    std::vector<IndexSet> out;
    for_each_nonempty_subset(within, [&](IndexSet s) {
        if (s.count() < min_card) return;
        if (proper && s == within) return;
        out.push_back(s);
    });
    std::sort(out.begin(), out.end(), subset_order_less);
    return out;
}

Axis::Axis(std::string name, std::vector<double> points, std::vector<double> weights)
    : name_(std::move(name)), points_(std::move(points)), weights_(std::move(weights)) {
    if (name_.empty()) fail("Axis: name must be non-empty");
    if (points_.size() < 2) fail("Axis: need at least 2 points");
    if (points_.size() != weights_.size())
        fail("Axis: points and weights must have equal length");
    if (!all_finite(points_)) fail("Axis: points must be finite");
    if (!all_finite(weights_)) fail("Axis: weights must be finite");
    for (std::size_t k = 1; k < points_.size(); ++k)
        if (!(points_[k - 1] < points_[k])) fail("Axis: points must be strictly increasing");
    for (double w : weights_)
        if (!(w > 0.0)) fail("Axis: weights must be strictly positive");
    mass_ = compensated_sum(weights_);
}

Axis uniform_axis(std::size_t n, double lo, double hi, std::string name) {
    if (n < 2) fail("uniform_axis: need at least 2 points");
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
        fail("uniform_axis: require finite lo < hi");
    const double h = (hi - lo) / static_cast<double>(n);
    std::vector<double> points(n), weights(n, h);
    for (std::size_t k = 0; k < n; ++k)
        points[k] = lo + (static_cast<double>(k) + 0.5) * h;
    return Axis(std::move(name), std::move(points), std::move(weights));
}

Axis probability_axis(std::vector<double> points, std::vector<double> weights,
                      std::string name) {
    if (points.size() < 2) fail("probability_axis: need at least 2 points");
    if (points.size() != weights.size())
        fail("probability_axis: points and weights must have equal length");
    for (double w : weights)
        if (!(std::isfinite(w) && w > 0.0))
            fail("probability_axis: weights must be finite and strictly positive");
    const double total = compensated_sum(weights);
    for (double& w : weights) w /= total;
    return Axis(std::move(name), std::move(points), std::move(weights));
}

GridMeasure::GridMeasure(std::vector<Axis> axes) : axes_(std::move(axes)) {
    const std::size_t d = axes_.size();
    if (d < 1) fail("GridMeasure: need at least one axis");
    if (d > kMaxDim) fail("GridMeasure: at most 20 axes are supported");

    strides_.assign(d, 1);
    size_ = 1;
    for (std::size_t i = d; i-- > 0;) {
        strides_[i] = size_;
        const std::size_t n = axes_[i].size();
        if (size_ > std::numeric_limits<std::size_t>::max() / n)
            fail("GridMeasure: grid size overflows");
        size_ *= n;
    }

    total_mass_ = 1.0;
    for (const Axis& a : axes_) total_mass_ *= a.mass();

    // Per-point weight products via an odometer over the multi-index.
    point_weights_.assign(size_, 0.0);
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> partial(d + 1, 1.0);  // partial[i] = prod of weights of axes < i
    for (std::size_t i = 0; i < d; ++i) partial[i + 1] = partial[i] * axes_[i].weights()[0];
    for (std::size_t flat = 0;;) {
        point_weights_[flat] = partial[d];
        if (++flat == size_) break;
        std::size_t a = d;
        while (a-- > 0) {
            if (++idx[a] < axes_[a].size()) break;
            idx[a] = 0;
        }
        for (std::size_t i = a; i < d; ++i)
            partial[i + 1] = partial[i] * axes_[i].weights()[idx[i]];
    }
}

double GridMeasure::subset_mass(IndexSet I) const {
    if (!I.subset_of(IndexSet::full(dim()))) fail("subset_mass: axis out of range");
    double m = 1.0;
    for (int i : I.axes()) m *= axes_[static_cast<std::size_t>(i)].mass();
    return m;
}

bool GridMeasure::same_as(const GridMeasure& o) const {
    if (this == &o) return true;
    if (dim() != o.dim()) return false;
    for (int i = 0; i < dim(); ++i) {
        const Axis& a = axis(i);
        const Axis& b = o.axis(i);
        if (a.size() != b.size()) return false;
        if (!std::equal(a.points().begin(), a.points().end(), b.points().begin()))
            return false;
        if (!std::equal(a.weights().begin(), a.weights().end(), b.weights().begin()))
            return false;
    }
    return true;
}

GridPtr make_grid(std::vector<Axis> axes) {
    return std::make_shared<const GridMeasure>(std::move(axes));
}

double weighted_sum(const GridMeasure& m, std::span<const double> values) {
    if (values.size() != m.size()) fail("weighted_sum: field size does not match grid");
    return compensated_dot(m.point_weights(), values);
}

namespace {

// Sums axis `a` (current dims given) out of `in` with the axis weights.
std::vector<double> reduce_axis(const std::vector<double>& in,
                                const std::vector<std::size_t>& dims, std::size_t a,
                                std::span<const double> w) {
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < a; ++i) outer *= dims[i];
    for (std::size_t i = a + 1; i < dims.size(); ++i) inner *= dims[i];
    const std::size_t mid = dims[a];

    std::vector<double> out(outer * inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
        const std::size_t in_base = o * mid * inner;
        const std::size_t out_base = o * inner;
        for (std::size_t k = 0; k < mid; ++k) {
            const double wk = w[k];
            const double* src = in.data() + in_base + k * inner;
            double* dst = out.data() + out_base;
            for (std::size_t j = 0; j < inner; ++j) dst[j] += wk * src[j];
        }
    }
    return out;
}

}  // namespace

std::vector<double> integrate_out(const GridMeasure& m, std::span<const double> values,
                                  IndexSet J) {
    if (values.size() != m.size()) fail("integrate_out: field size does not match grid");
    if (!J.subset_of(IndexSet::full(m.dim()))) fail("integrate_out: axis out of range");

    std::vector<double> work(values.begin(), values.end());
    if (J.empty()) return work;

    std::vector<std::size_t> dims(static_cast<std::size_t>(m.dim()));
    for (int i = 0; i < m.dim(); ++i) dims[static_cast<std::size_t>(i)] = m.axis(i).size();

    // Fold highest axis first so lower positions stay valid.
    std::vector<int> order = J.axes();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const auto a = static_cast<std::size_t>(*it);
        work = reduce_axis(work, dims, a, m.axis(*it).weights());
        dims.erase(dims.begin() + static_cast<std::ptrdiff_t>(a));
    }
    return work;
}

std::vector<double> broadcast_from(const GridMeasure& m, IndexSet kept,
                                   std::span<const double> sub_values) {
    if (!kept.subset_of(IndexSet::full(m.dim()))) fail("broadcast_from: axis out of range");

    const std::size_t d = static_cast<std::size_t>(m.dim());
    std::vector<std::size_t> dims(d), substride(d, 0);
    std::size_t sub_size = 1;
    for (std::size_t i = d; i-- > 0;) {
        dims[i] = m.axis(static_cast<int>(i)).size();
        if (kept.contains(static_cast<int>(i))) {
            substride[i] = sub_size;
            sub_size *= dims[i];
        }
    }
    if (sub_values.size() != sub_size)
        fail("broadcast_from: field size does not match kept axes");

    std::vector<double> out(m.size());
    std::vector<std::size_t> idx(d, 0);
    std::size_t s = 0;
    for (std::size_t flat = 0;;) {
        out[flat] = sub_values[s];
        if (++flat == m.size()) break;
        std::size_t a = d;
        while (a-- > 0) {
            ++idx[a];
            s += substride[a];
            if (idx[a] < dims[a]) break;
            s -= substride[a] * dims[a];
            idx[a] = 0;
        }
    }
    return out;
}

GridMeasure sub_measure(const GridMeasure& m, IndexSet kept) {
    if (kept.empty()) fail("sub_measure: kept axes must be non-empty");
    if (!kept.subset_of(IndexSet::full(m.dim()))) fail("sub_measure: axis out of range");
    std::vector<Axis> axes;
    for (int i : kept.axes()) axes.push_back(m.axis(i));
    return GridMeasure(std::move(axes));
}

IndexSet relabel(IndexSet subset, IndexSet kept) {
    if (!subset.subset_of(kept)) fail("relabel: subset must lie within kept axes");
    IndexSet out;
    int pos = 0;
    for (int i : kept.axes()) {
        if (subset.contains(i)) out = out.with(pos);
        ++pos;
    }
    return out;
}

}  // namespace bdecomp
