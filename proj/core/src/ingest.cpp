#include "bdecomp/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace bdecomp {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

SampleMatrix::SampleMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (rows_ < 2) fail("SampleMatrix: need at least 2 rows");
    if (cols_ < 1) fail("SampleMatrix: need at least 1 column");
    if (values_.size() != rows_ * cols_)
        fail("SampleMatrix: value count does not match rows x cols");
    for (double v : values_)
        if (!std::isfinite(v)) fail("SampleMatrix: entries must be finite");
}

std::vector<double> SampleMatrix::column(std::size_t c) const {
    if (c >= cols_) fail("SampleMatrix: column index out of range");
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = values_[r * cols_ + c];
    return out;
}

Density histogram_density(const SampleMatrix& s, GridPtr m, double pseudocount) {
    if (!m) fail("histogram_density: null measure");
    if (s.cols() != static_cast<std::size_t>(m->dim()))
        fail("histogram_density: sample columns do not match grid dimension");
    if (!(std::isfinite(pseudocount) && pseudocount >= 0.0))
        fail("histogram_density: pseudocount must be finite and non-negative");

    // Cell edges per axis: midpoints between nodes, outer edges mirrored
    // around the end nodes.
    std::vector<std::vector<double>> edges(static_cast<std::size_t>(m->dim()));
    for (int i = 0; i < m->dim(); ++i) {
        const auto pts = m->axis(i).points();
        auto& e = edges[static_cast<std::size_t>(i)];
        e.resize(pts.size() + 1);
        for (std::size_t k = 1; k < pts.size(); ++k) e[k] = 0.5 * (pts[k - 1] + pts[k]);
        e[0] = 2.0 * pts.front() - e[1];
        e[pts.size()] = 2.0 * pts.back() - e[pts.size() - 1];
    }

    std::vector<double> count(m->size(), 0.0);
    for (std::size_t r = 0; r < s.rows(); ++r) {
        std::size_t flat = 0;
        for (int i = 0; i < m->dim(); ++i) {
            const auto& e = edges[static_cast<std::size_t>(i)];
            const double x = s.at(r, static_cast<std::size_t>(i));
            if (x < e.front() || x > e.back())
                fail("histogram_density: sample lies outside the grid range");
            std::size_t k = static_cast<std::size_t>(
                std::upper_bound(e.begin(), e.end(), x) - e.begin());
            if (k == e.size()) --k;  // exactly on the top edge
            flat += (k - 1) * m->stride(i);
        }
        count[flat] += 1.0;
    }

    std::vector<double> values(m->size());
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double c = count[k] + pseudocount;
        if (!(c > 0.0))
            fail("histogram_density: empty cell with zero pseudocount");
        values[k] = c / m->point_weights()[k];
    }
    return Density(std::move(m), std::move(values));
}

SampleMatrix pseudo_observations(const SampleMatrix& s) {
    const std::size_t n = s.rows();
    std::vector<double> out(n * s.cols());
    std::vector<std::size_t> order(n);
    for (std::size_t c = 0; c < s.cols(); ++c) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return s.at(a, c) < s.at(b, c);
        });
        std::size_t k = 0;
        while (k < n) {
            std::size_t j = k + 1;
            while (j < n && s.at(order[j], c) == s.at(order[k], c)) ++j;
            // Positions k..j-1 are tied; average their 1-based ranks.
            const double rank = 0.5 * static_cast<double>(k + j + 1);
            for (std::size_t t = k; t < j; ++t)
                out[order[t] * s.cols() + c] = rank / static_cast<double>(n + 1);
            k = j;
        }
    }
    return SampleMatrix(n, s.cols(), std::move(out));
}

MarginalTransform empirical_marginal(std::span<const double> column) {
    const std::size_t n = column.size();
    if (n < 2) fail("empirical_marginal: need at least 2 observations");
    std::vector<double> sorted(column.begin(), column.end());
    for (double v : sorted)
        if (!std::isfinite(v)) fail("empirical_marginal: entries must be finite");
    std::sort(sorted.begin(), sorted.end());

    std::vector<double> x;
    std::vector<double> F;
    const double lo = 1.0 / (2.0 * static_cast<double>(n));
    std::size_t below = 0;
    std::size_t k = 0;
    while (k < n) {
        std::size_t j = k + 1;
        while (j < n && sorted[j] == sorted[k]) ++j;
        // CDF level at a distinct value: midpoint of its jump.
        const double level = static_cast<double>(below + j) / (2.0 * static_cast<double>(n));
        x.push_back(sorted[k]);
        F.push_back(std::clamp(level, lo, 1.0 - lo));
        below = j;
        k = j;
    }
    if (x.size() < 2) fail("empirical_marginal: need at least 2 distinct values");
    return MarginalTransform(std::move(x), std::move(F));
}

}  // namespace bdecomp
