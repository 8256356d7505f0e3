#include "bdecomp/copula.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bdecomp {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

void require_unit_interval_points(const GridMeasure& m, const char* op) {
    for (int i = 0; i < m.dim(); ++i)
        for (double p : m.axis(i).points())
            if (!(p > 0.0 && p < 1.0))
                fail(std::string(op) + ": grid points must lie strictly inside (0,1)");
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) fail("normal_quantile: p must lie strictly inside (0,1)");

    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // One Halley refinement against the erfc-based CDF, which is independent
    // of the rational initializer above. The residual Phi(x) - p is formed
    // from whichever tail avoids cancellation: for p >= 1/2 it equals
    // (1 - p) - Q(x) with Q the upper-tail probability, and 1 - p is exact.
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
    if (pdf > 1e-300) {
        const double e = p >= 0.5 ? (1.0 - p) - 0.5 * std::erfc(x * kInvSqrt2)
                                  : 0.5 * std::erfc(-x * kInvSqrt2) - p;
        const double u = e / pdf;
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

CorrelationMatrix::CorrelationMatrix(int d, std::vector<double> entries)
    : d_(d), entries_(std::move(entries)) {
    if (d_ < 1 || d_ > 20) fail("CorrelationMatrix: dimension must lie in [1, 20]");
    if (entries_.size() != static_cast<std::size_t>(d_) * static_cast<std::size_t>(d_))
        fail("CorrelationMatrix: entry count does not match dimension");
    for (double v : entries_)
        if (!std::isfinite(v)) fail("CorrelationMatrix: entries must be finite");
    for (int i = 0; i < d_; ++i) {
        if (entry(i, i) != 1.0) fail("CorrelationMatrix: diagonal must be exactly 1");
        for (int j = i + 1; j < d_; ++j)
            if (entry(i, j) != entry(j, i)) fail("CorrelationMatrix: matrix must be symmetric");
    }

    Eigen::Map<const Eigen::MatrixXd> S(entries_.data(), d_, d_);
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success)
        fail("CorrelationMatrix: matrix is not positive definite");

    const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(d_, d_));
    a_.resize(entries_.size());
    for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j)
            a_[static_cast<std::size_t>(i) * d_ + j] = inv(i, j) - (i == j ? 1.0 : 0.0);

    const Eigen::MatrixXd L = llt.matrixL();
    double log_det = 0.0;
    for (int i = 0; i < d_; ++i) log_det += 2.0 * std::log(L(i, i));
    log_det_2pi_ = log_det + d_ * std::log(2.0 * M_PI);
}

CorrelationMatrix CorrelationMatrix::exchangeable(int d, double rho) {
    if (d < 1 || d > 20) fail("CorrelationMatrix: dimension must lie in [1, 20]");
    std::vector<double> entries(static_cast<std::size_t>(d) * static_cast<std::size_t>(d), rho);
    for (int i = 0; i < d; ++i) entries[static_cast<std::size_t>(i) * d + i] = 1.0;
    return CorrelationMatrix(d, std::move(entries));
}

Density gaussian_copula_density(const CorrelationMatrix& sigma, GridPtr m) {
    if (!m) fail("gaussian_copula_density: null measure");
    if (m->dim() != sigma.dim())
        fail("gaussian_copula_density: grid dimension does not match matrix");
    require_unit_interval_points(*m, "gaussian_copula_density");

    const int d = m->dim();
    std::vector<std::vector<double>> q(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        const auto pts = m->axis(i).points();
        q[static_cast<std::size_t>(i)].resize(pts.size());
        for (std::size_t k = 0; k < pts.size(); ++k)
            q[static_cast<std::size_t>(i)][k] = normal_quantile(pts[k]);
    }

    std::vector<double> out(m->size());
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    std::vector<double> x(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = q[static_cast<std::size_t>(i)][0];
    for (std::size_t flat = 0;;) {
        double quad = 0.0;
        for (int i = 0; i < d; ++i) {
            double row = 0.0;
            for (int j = 0; j < d; ++j) row += sigma.a(i, j) * x[static_cast<std::size_t>(j)];
            quad += x[static_cast<std::size_t>(i)] * row;
        }
        out[flat] = std::exp(-0.5 * quad - 0.5 * sigma.log_det_2pi_sigma());
        if (++flat == m->size()) break;
        std::size_t ax = static_cast<std::size_t>(d);
        while (ax-- > 0) {
            if (++idx[ax] < m->axis(static_cast<int>(ax)).size()) break;
            idx[ax] = 0;
        }
        for (std::size_t i = ax; i < static_cast<std::size_t>(d); ++i) x[i] = q[i][idx[i]];
    }
    return Density(std::move(m), std::move(out));
}

double gaussian_copula_clr(const CorrelationMatrix& sigma, IndexSet I,
                           std::span<const double> u) {
    if (!I.subset_of(IndexSet::full(sigma.dim())))
        fail("gaussian_copula_clr: axis out of range");
    const std::vector<int> axes = I.axes();
    if (u.size() != axes.size())
        fail("gaussian_copula_clr: coordinate count does not match subset");
    for (double v : u)
        if (!(v > 0.0 && v < 1.0)) fail("gaussian_copula_clr: coordinates must lie in (0,1)");

    if (axes.size() == 1) {
        const double x = normal_quantile(u[0]);
        const double aii = sigma.a(axes[0], axes[0]);
        return -0.5 * aii * (x * x - 1.0);
    }
    if (axes.size() == 2) {
        const double xi = normal_quantile(u[0]);
        const double xj = normal_quantile(u[1]);
        return -sigma.a(axes[0], axes[1]) * xi * xj;
    }
    return 0.0;
}

std::vector<double> gaussian_copula_clr(const CorrelationMatrix& sigma, IndexSet I,
                                        const std::vector<std::vector<double>>& points) {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& u : points) out.push_back(gaussian_copula_clr(sigma, I, u));
    return out;
}

Density beta2_density(double alpha0, double alpha1, double alpha2, GridPtr m) {
    if (!m) fail("beta2_density: null measure");
    if (m->dim() != 2) fail("beta2_density: grid must be two-dimensional");
    for (double a : {alpha0, alpha1, alpha2})
        if (!(std::isfinite(a) && a > 0.0))
            fail("beta2_density: parameters must be finite and strictly positive");
    require_unit_interval_points(*m, "beta2_density");

    const double s = alpha0 + alpha1 + alpha2;
    const auto p1 = m->axis(0).points();
    const auto p2 = m->axis(1).points();
    std::vector<double> out(m->size());
    for (std::size_t k1 = 0; k1 < p1.size(); ++k1) {
        const double x1 = p1[k1];
        const double lead = (alpha1 - 1.0) * std::log(x1) + (alpha0 + alpha2 - 1.0) * std::log1p(-x1);
        for (std::size_t k2 = 0; k2 < p2.size(); ++k2) {
            const double x2 = p2[k2];
            const double lv = lead + (alpha2 - 1.0) * std::log(x2) +
                              (alpha0 + alpha1 - 1.0) * std::log1p(-x2) -
                              s * std::log1p(-x1 * x2);
            out[k1 * p2.size() + k2] = std::exp(lv);
        }
    }
    return Density(std::move(m), std::move(out));
}

MarginalTransform::MarginalTransform(std::vector<double> x, std::vector<double> F)
    : x_(std::move(x)), F_(std::move(F)) {
    if (x_.size() < 2) fail("MarginalTransform: need at least 2 breakpoints");
    if (x_.size() != F_.size())
        fail("MarginalTransform: breakpoints and values must have equal length");
    for (std::size_t k = 0; k < x_.size(); ++k) {
        if (!std::isfinite(x_[k]) || !std::isfinite(F_[k]))
            fail("MarginalTransform: entries must be finite");
        if (!(F_[k] > 0.0 && F_[k] < 1.0))
            fail("MarginalTransform: values must lie strictly inside (0,1)");
        if (k > 0 && !(x_[k - 1] < x_[k] && F_[k - 1] < F_[k]))
            fail("MarginalTransform: breakpoints and values must be strictly increasing");
    }
}

namespace {

// Piecewise-linear evaluation through (xs, ys) with end segments extended.
double interp_table(std::span<const double> xs, std::span<const double> ys, double v) {
    const std::size_t n = xs.size();
    std::size_t k = static_cast<std::size_t>(
        std::upper_bound(xs.begin(), xs.end(), v) - xs.begin());
    if (k == 0)
        k = 1;
    else if (k > n - 1)
        k = n - 1;
    const double t = (v - xs[k - 1]) / (xs[k] - xs[k - 1]);
    return ys[k - 1] + t * (ys[k] - ys[k - 1]);
}

}  // namespace

double MarginalTransform::forward(double x) const {
    if (!std::isfinite(x)) fail("MarginalTransform::forward: argument must be finite");
    const double u = interp_table(x_, F_, x);
    if (!(u > 0.0 && u < 1.0))
        fail("MarginalTransform::forward: image falls outside (0,1)");
    return u;
}

double MarginalTransform::inverse(double u) const {
    if (!(u > 0.0 && u < 1.0))
        fail("MarginalTransform::inverse: argument must lie strictly inside (0,1)");
    return interp_table(F_, x_, u);
}

GridPtr pullback_measure(const GridMeasure& cube, std::span<const MarginalTransform> marginals) {
    if (static_cast<int>(marginals.size()) != cube.dim())
        fail("pullback_measure: need one marginal per axis");
    std::vector<Axis> axes;
    axes.reserve(marginals.size());
    for (int i = 0; i < cube.dim(); ++i) {
        const Axis& ua = cube.axis(i);
        std::vector<double> pts(ua.size());
        for (std::size_t k = 0; k < ua.size(); ++k)
            pts[k] = marginals[static_cast<std::size_t>(i)].inverse(ua.points()[k]);
        std::vector<double> w(ua.weights().begin(), ua.weights().end());
        axes.emplace_back(ua.name(), std::move(pts), std::move(w));
    }
    return make_grid(std::move(axes));
}

namespace {

// Per-axis interpolation plan: cube segment index and fraction for every
// target grid node, after mapping it through the marginal.
struct InterpPlan {
    std::vector<std::vector<std::size_t>> seg;
    std::vector<std::vector<double>> frac;
};

InterpPlan make_plan(const GridMeasure& cube, std::span<const MarginalTransform> marginals,
                     const GridMeasure& mx) {
    if (mx.dim() != cube.dim()) fail("sklar_compose: grid dimensions differ");
    if (static_cast<int>(marginals.size()) != cube.dim())
        fail("sklar_compose: need one marginal per axis");

    InterpPlan plan;
    plan.seg.resize(static_cast<std::size_t>(cube.dim()));
    plan.frac.resize(static_cast<std::size_t>(cube.dim()));
    for (int i = 0; i < cube.dim(); ++i) {
        const auto cpts = cube.axis(i).points();
        const auto xpts = mx.axis(i).points();
        auto& seg = plan.seg[static_cast<std::size_t>(i)];
        auto& frac = plan.frac[static_cast<std::size_t>(i)];
        seg.resize(xpts.size());
        frac.resize(xpts.size());
        // Round-trips through a marginal and back land within a few ulps of
        // the hull; only genuine excursions are an error.
        const double hull_tol = 1e-12 * (cpts.back() - cpts.front());
        for (std::size_t k = 0; k < xpts.size(); ++k) {
            double u = marginals[static_cast<std::size_t>(i)].forward(xpts[k]);
            if (u < cpts.front() - hull_tol || u > cpts.back() + hull_tol)
                fail("sklar_compose: image point falls outside the interpolable range of the "
                     "copula grid");
            u = std::clamp(u, cpts.front(), cpts.back());
            std::size_t s = static_cast<std::size_t>(
                std::upper_bound(cpts.begin(), cpts.end(), u) - cpts.begin());
            if (s == 0) s = 1;
            if (s > cpts.size() - 1) s = cpts.size() - 1;
            seg[k] = s - 1;
            frac[k] = (u - cpts[s - 1]) / (cpts[s] - cpts[s - 1]);
        }
    }
    return plan;
}

// Multilinear interpolation of a cube field at every target node.
std::vector<double> apply_plan(const InterpPlan& plan, const GridMeasure& cube,
                               const GridMeasure& mx, std::span<const double> field) {
    const std::size_t d = static_cast<std::size_t>(cube.dim());
    std::vector<double> out(mx.size());
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t flat = 0;;) {
        double acc = 0.0;
        for (std::uint32_t corner = 0; corner < (std::uint32_t{1} << d); ++corner) {
            double w = 1.0;
            std::size_t cflat = 0;
            for (std::size_t i = 0; i < d; ++i) {
                const double t = plan.frac[i][idx[i]];
                const bool hi = (corner >> i) & 1u;
                w *= hi ? t : 1.0 - t;
                cflat += (plan.seg[i][idx[i]] + (hi ? 1 : 0)) * cube.stride(static_cast<int>(i));
            }
            if (w != 0.0) acc += w * field[cflat];
        }
        out[flat] = acc;
        if (++flat == mx.size()) break;
        std::size_t a = d;
        while (a-- > 0) {
            if (++idx[a] < mx.axis(static_cast<int>(a)).size()) break;
            idx[a] = 0;
        }
    }
    return out;
}

}  // namespace

Density sklar_compose(const Density& c, std::span<const MarginalTransform> marginals,
                      GridPtr m_x) {
    if (!m_x) fail("sklar_compose: null target measure");
    const InterpPlan plan = make_plan(c.measure(), marginals, *m_x);
    std::vector<double> logc(c.size());
    for (std::size_t k = 0; k < logc.size(); ++k) logc[k] = std::log(c.values()[k]);
    std::vector<double> lv = apply_plan(plan, c.measure(), *m_x, logc);
    for (double& v : lv) v = std::exp(v);
    return Density(std::move(m_x), std::move(lv));
}

CopulaPipelineResult copula_pipeline(const Density& c,
                                     std::span<const MarginalTransform> marginals) {
    Decomposition cube = decompose(c);
    GridPtr m_x = pullback_measure(c.measure(), marginals);
    const InterpPlan plan = make_plan(c.measure(), marginals, *m_x);

    std::vector<double> logc(c.size());
    for (std::size_t k = 0; k < logc.size(); ++k) logc[k] = std::log(c.values()[k]);
    std::vector<double> lv = apply_plan(plan, c.measure(), *m_x, logc);
    for (double& v : lv) v = std::exp(v);
    Density composed(m_x, std::move(lv));

    std::vector<std::pair<IndexSet, Density>> parts;
    parts.reserve(cube.components().size());
    for (const auto& [subset, field] : cube.components()) {
        std::vector<double> cv = apply_plan(plan, c.measure(), *m_x, field.values());
        for (double& v : cv) v = std::exp(v);
        parts.emplace_back(subset, Density(m_x, std::move(cv)));
    }

    // Pointwise reconstruction of the composed density by its parts, compared
    // through canonical (zero-mean log) representatives.
    const ClrField zc = clr(composed);
    std::vector<double> acc(zc.size(), 0.0);
    for (const auto& [subset, part] : parts) {
        const ClrField zp = clr(part);
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += zp.values()[k];
    }
    double dev = 0.0;
    for (std::size_t k = 0; k < acc.size(); ++k)
        dev = std::max(dev, std::fabs(acc[k] - zc.values()[k]));
    const double residual = dev / (1.0 + max_abs(zc.values()));

    return CopulaPipelineResult{std::move(cube), std::move(composed), std::move(parts), residual};
}

}  // namespace bdecomp
