#pragma once

#include <bdecomp/density.hpp>
#include <bdecomp/grid.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace testutil {

inline double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline bdecomp::GridPtr cube(const std::vector<std::size_t>& sizes) {
    std::vector<bdecomp::Axis> axes;
    for (std::size_t i = 0; i < sizes.size(); ++i)
        axes.push_back(bdecomp::uniform_axis(sizes[i], 0.0, 1.0, "x" + std::to_string(i + 1)));
    return bdecomp::make_grid(std::move(axes));
}

// Grid with random strictly increasing points and random positive weights,
// exercising genuinely non-uniform reference measures.
inline bdecomp::GridPtr mixed_grid(const std::vector<std::size_t>& sizes, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::vector<bdecomp::Axis> axes;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        std::vector<double> pts(sizes[i]);
        std::vector<double> w(sizes[i]);
        double x = uniform01(eng) - 0.5;
        for (std::size_t k = 0; k < sizes[i]; ++k) {
            x += 0.05 + uniform01(eng);
            pts[k] = x;
            w[k] = 0.2 + uniform01(eng);
        }
        axes.emplace_back("x" + std::to_string(i + 1), std::move(pts), std::move(w));
    }
    return bdecomp::make_grid(std::move(axes));
}

inline bdecomp::Density random_density(bdecomp::GridPtr m, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::vector<double> values(m->size());
    for (auto& v : values) v = std::exp(2.0 * uniform01(eng) - 1.0);
    return bdecomp::Density(std::move(m), std::move(values));
}

inline bdecomp::Density random_separable(bdecomp::GridPtr m, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::vector<std::vector<double>> axis_log(static_cast<std::size_t>(m->dim()));
    for (int i = 0; i < m->dim(); ++i) {
        axis_log[static_cast<std::size_t>(i)].resize(m->axis(i).size());
        for (auto& v : axis_log[static_cast<std::size_t>(i)]) v = 2.0 * uniform01(eng) - 1.0;
    }
    std::vector<double> values(m->size());
    std::vector<std::size_t> idx(static_cast<std::size_t>(m->dim()), 0);
    for (std::size_t flat = 0;;) {
        double lv = 0.0;
        for (int i = 0; i < m->dim(); ++i)
            lv += axis_log[static_cast<std::size_t>(i)][idx[static_cast<std::size_t>(i)]];
        values[flat] = std::exp(lv);
        if (++flat == m->size()) break;
        std::size_t a = static_cast<std::size_t>(m->dim());
        while (a-- > 0) {
            if (++idx[a] < m->axis(static_cast<int>(a)).size()) break;
            idx[a] = 0;
        }
    }
    return bdecomp::Density(std::move(m), std::move(values));
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        worst = std::max(worst, std::fabs(a[k] - b[k]));
    return worst;
}

inline double max_abs(std::span<const double> a) {
    double worst = 0.0;
    for (double v : a) worst = std::max(worst, std::fabs(v));
    return worst;
}

}  // namespace testutil
