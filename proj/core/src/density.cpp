#include "bdecomp/density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bdecomp {

namespace {

[[noreturn]] void fail(const char* msg) { throw std::invalid_argument(msg); }

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

}  // namespace

namespace detail {
void require_same_measure(const GridMeasure& a, const GridMeasure& b, const char* op) {
    if (!a.same_as(b))
        throw std::invalid_argument(std::string(op) + ": grid measures differ");
}
}  // namespace detail

Density::Density(GridPtr measure, std::vector<double> values)
    : measure_(std::move(measure)), values_(std::move(values)) {
    if (!measure_) fail("Density: null measure");
    if (values_.size() != measure_->size())
        fail("Density: values length does not match grid size");
    for (double v : values_)
        if (!(std::isfinite(v) && v > 0.0))
            fail("Density: values must be finite and strictly positive");
}

ClrField::ClrField(GridPtr measure, std::vector<double> values)
    : ClrField(unchecked_t{}, std::move(measure), std::move(values)) {
    for (double v : values_)
        if (!std::isfinite(v)) fail("ClrField: values must be finite");
    const double sum = weighted_sum(*measure_, values_);
    // The floor keeps all-but-zero fields admissible; any real mean shift
    // still trips the bound.
    const double bound = 1e-10 * measure_->total_mass() * (1.0 + max_abs(values_));
    if (std::fabs(sum) > bound)
        fail("ClrField: weighted sum of values is not zero within tolerance");
}

ClrField::ClrField(unchecked_t, GridPtr measure, std::vector<double> values)
    : measure_(std::move(measure)), values_(std::move(values)) {
    if (!measure_) fail("ClrField: null measure");
    if (values_.size() != measure_->size())
        fail("ClrField: values length does not match grid size");
}

ClrField make_clr_unchecked(GridPtr measure, std::vector<double> values) {
    return ClrField(ClrField::unchecked_t{}, std::move(measure), std::move(values));
}

Density perturb(const Density& f, const Density& g) {
    detail::require_same_measure(f.measure(), g.measure(), "perturb");
    std::vector<double> out(f.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = f.values()[k] * g.values()[k];
    return Density(f.measure_ptr(), std::move(out));
}

Density power(double alpha, const Density& f) {
    if (!std::isfinite(alpha)) fail("power: exponent must be finite");
    std::vector<double> out(f.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::pow(f.values()[k], alpha);
    return Density(f.measure_ptr(), std::move(out));
}

ClrField clr(const Density& f) {
    std::vector<double> logs(f.size());
    for (std::size_t k = 0; k < logs.size(); ++k) logs[k] = std::log(f.values()[k]);
    const double mean = weighted_sum(f.measure(), logs) / f.measure().total_mass();
    for (double& v : logs) v -= mean;
    return make_clr_unchecked(f.measure_ptr(), std::move(logs));
}

Density clr_inverse(const ClrField& z) {
    std::vector<double> out(z.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::exp(z.values()[k]);
    return Density(z.measure_ptr(), std::move(out));
}

double inner_product(const ClrField& u, const ClrField& v) {
    detail::require_same_measure(u.measure(), v.measure(), "inner_product");
    const std::span<const double> w = u.measure().point_weights();
    double sum = 0.0, comp = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double term = w[k] * u.values()[k] * v.values()[k] - comp;
        const double next = sum + term;
        comp = (next - sum) - term;
        sum = next;
    }
    return sum;
}

double inner_product(const Density& f, const Density& g) {
    detail::require_same_measure(f.measure(), g.measure(), "inner_product");
    return inner_product(clr(f), clr(g));
}

double inner_product_direct(const Density& f, const Density& g) {
    detail::require_same_measure(f.measure(), g.measure(), "inner_product_direct");
    const std::size_t n = f.size();
    std::vector<double> lf(n), lg(n);
    for (std::size_t k = 0; k < n; ++k) {
        lf[k] = std::log(f.values()[k]);
        lg[k] = std::log(g.values()[k]);
    }
    const std::span<const double> w = f.measure().point_weights();
    double sum = 0.0, comp = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            const double term = w[a] * w[b] * (lf[a] - lf[b]) * (lg[a] - lg[b]) - comp;
            const double next = sum + term;
            comp = (next - sum) - term;
            sum = next;
        }
    }
    return sum / (2.0 * f.measure().total_mass());
}

double norm_sq(const ClrField& u) { return inner_product(u, u); }

double norm(const ClrField& u) { return std::sqrt(norm_sq(u)); }

double norm(const Density& f) { return norm(clr(f)); }

double distance(const Density& f, const Density& g) {
    detail::require_same_measure(f.measure(), g.measure(), "distance");
    const ClrField zf = clr(f);
    const ClrField zg = clr(g);
    std::vector<double> diff(zf.size());
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = zf.values()[k] - zg.values()[k];
    return norm(make_clr_unchecked(f.measure_ptr(), std::move(diff)));
}

Density canonical_representative(const Density& f) { return clr_inverse(clr(f)); }

bool proportional(const Density& f, const Density& g, double tol) {
    detail::require_same_measure(f.measure(), g.measure(), "proportional");
    const ClrField zf = clr(f);
    const ClrField zg = clr(g);
    const double scale = std::max(max_abs(zf.values()), max_abs(zg.values()));
    double dev = 0.0;
    for (std::size_t k = 0; k < zf.size(); ++k)
        dev = std::max(dev, std::fabs(zf.values()[k] - zg.values()[k]));
    return dev <= tol * (1.0 + scale);
}

}  // namespace bdecomp
