#include "bdecomp/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace bdecomp {

namespace {

[[noreturn]] void fail(const char* msg) { throw std::invalid_argument(msg); }

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

// acc += coeff * (sub broadcast over the full grid along the kept axes).
void add_broadcast(const GridMeasure& m, IndexSet kept, std::span<const double> sub,
                   double coeff, std::vector<double>& acc) {
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
    std::vector<std::size_t> idx(d, 0);
    std::size_t s = 0;
    for (std::size_t flat = 0;;) {
        acc[flat] += coeff * sub[s];
        if (++flat == acc.size()) break;
        std::size_t a = d;
        while (a-- > 0) {
            ++idx[a];
            s += substride[a];
            if (idx[a] < dims[a]) break;
            s -= substride[a] * dims[a];
            idx[a] = 0;
        }
    }
}

// Average of `values` over the axes outside I, as a field over the I axes.
std::vector<double> margin_over(const GridMeasure& m, std::span<const double> values,
                                IndexSet I) {
    const IndexSet rest = I.complement(m.dim());
    std::vector<double> sub = integrate_out(m, values, rest);
    const double mass = m.subset_mass(rest);
    for (double& v : sub) v /= mass;
    return sub;
}

std::vector<double> log_values(const Density& f) {
    std::vector<double> logs(f.size());
    for (std::size_t k = 0; k < logs.size(); ++k) logs[k] = std::log(f.values()[k]);
    return logs;
}

std::vector<double> exp_values(std::span<const double> v) {
    std::vector<double> out(v.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::exp(v[k]);
    return out;
}

void require_axes_in_range(const GridMeasure& m, IndexSet I, const char* op) {
    if (!I.subset_of(IndexSet::full(m.dim())))
        throw std::invalid_argument(std::string(op) + ": axis out of range");
}

}  // namespace

Density geometric_margin(const Density& f, IndexSet I) {
    require_axes_in_range(f.measure(), I, "geometric_margin");
    if (I == IndexSet::full(f.measure().dim())) return f;
    const std::vector<double> logs = log_values(f);
    const std::vector<double> sub = margin_over(f.measure(), logs, I);
    std::vector<double> full = broadcast_from(f.measure(), I, sub);
    return Density(f.measure_ptr(), exp_values(full));
}

Density project_out(const Density& f, IndexSet J) {
    require_axes_in_range(f.measure(), J, "project_out");
    return geometric_margin(f, J.complement(f.measure().dim()));
}

Density hoeffding_term(const Density& f, IndexSet I) {
    require_axes_in_range(f.measure(), I, "hoeffding_term");
    Density g = geometric_margin(f, I);
    for (int i : I.axes()) {
        const Density p = project_out(g, IndexSet::single(i));
        std::vector<double> out(g.size());
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = g.values()[k] / p.values()[k];
        g = Density(f.measure_ptr(), std::move(out));
    }
    return g;
}

Density interaction_mobius(const Density& f, IndexSet I) {
    require_axes_in_range(f.measure(), I, "interaction_mobius");
    if (I.count() < 2) fail("interaction_mobius: need at least two axes");
    const ClrField z = clr(f);
    std::vector<double> acc(f.size(), 0.0);
    for_each_nonempty_subset(I, [&](IndexSet J) {
        const double coeff = ((I.count() - J.count()) % 2 == 0) ? 1.0 : -1.0;
        const std::vector<double> sub = margin_over(f.measure(), z.values(), J);
        add_broadcast(f.measure(), J, sub, coeff, acc);
    });
    return Density(f.measure_ptr(), exp_values(acc));
}

Density interaction_recursive(const Density& f, IndexSet I) {
    require_axes_in_range(f.measure(), I, "interaction_recursive");
    if (I.count() < 2) fail("interaction_recursive: need at least two axes");

    std::unordered_map<std::uint32_t, Density> singletons;
    for (int i : I.axes())
        singletons.emplace(IndexSet::single(i).bits(), geometric_margin(f, IndexSet::single(i)));

    std::unordered_map<std::uint32_t, Density> interactions;
    for (IndexSet S : subsets_of(I, 2)) {
        const Density margin_s = geometric_margin(f, S);
        std::vector<double> out(margin_s.values().begin(), margin_s.values().end());
        for (int i : S.axes()) {
            const Density& fi = singletons.at(IndexSet::single(i).bits());
            for (std::size_t k = 0; k < out.size(); ++k) out[k] /= fi.values()[k];
        }
        for (IndexSet J : subsets_of(S, 2, /*proper=*/true)) {
            const Density& ij = interactions.at(J.bits());
            for (std::size_t k = 0; k < out.size(); ++k) out[k] /= ij.values()[k];
        }
        interactions.emplace(S.bits(), Density(f.measure_ptr(), std::move(out)));
    }
    return interactions.at(I.bits());
}

Density independence_part(const Density& f) {
    std::vector<double> out(f.size(), 1.0);
    for (int i = 0; i < f.measure().dim(); ++i) {
        const Density fi = geometric_margin(f, IndexSet::single(i));
        for (std::size_t k = 0; k < out.size(); ++k) out[k] *= fi.values()[k];
    }
    return Density(f.measure_ptr(), std::move(out));
}

Decomposition::Decomposition(Density source, ClrField source_clr,
                             std::vector<std::pair<IndexSet, ClrField>> components)
    : source_(std::move(source)),
      source_clr_(std::move(source_clr)),
      components_(std::move(components)) {
    norms_sq_.reserve(components_.size());
    for (const auto& [subset, field] : components_) norms_sq_.push_back(norm_sq(field));
    source_norm_sq_ = norm_sq(source_clr_);
}

const ClrField& Decomposition::component(IndexSet I) const {
    for (const auto& [subset, field] : components_)
        if (subset == I) return field;
    fail("Decomposition::component: no component for this subset");
}

double Decomposition::component_norm_sq(IndexSet I) const {
    for (std::size_t k = 0; k < components_.size(); ++k)
        if (components_[k].first == I) return norms_sq_[k];
    fail("Decomposition::component_norm_sq: no component for this subset");
}

double Decomposition::Check::max() const {
    return std::max(reconstruction, std::max(orthogonality, pythagoras));
}

bool Decomposition::Check::within(double tol) const { return max() <= tol; }

Decomposition::Check Decomposition::verify() const {
    Check out{0.0, 0.0, 0.0};

    std::vector<double> acc(source_clr_.size(), 0.0);
    for (const auto& [subset, field] : components_)
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += field.values()[k];
    double dev = 0.0;
    for (std::size_t k = 0; k < acc.size(); ++k)
        dev = std::max(dev, std::fabs(acc[k] - source_clr_.values()[k]));
    out.reconstruction = dev / (1.0 + max_abs(source_clr_.values()));

    for (std::size_t i = 0; i < components_.size(); ++i) {
        for (std::size_t j = i + 1; j < components_.size(); ++j) {
            const double ip = inner_product(components_[i].second, components_[j].second);
            const double guard = 1.0 + std::sqrt(norms_sq_[i] * norms_sq_[j]);
            out.orthogonality = std::max(out.orthogonality, std::fabs(ip) / guard);
        }
    }

    double sum = 0.0, comp = 0.0;
    for (double nsq : norms_sq_) {
        const double term = nsq - comp;
        const double next = sum + term;
        comp = (next - sum) - term;
        sum = next;
    }
    out.pythagoras = std::fabs(sum - source_norm_sq_) / (1.0 + source_norm_sq_);
    return out;
}

Decomposition decompose(const Density& f) {
    const GridMeasure& m = f.measure();
    const int d = m.dim();
    ClrField z = clr(f);

    // Margins onto every non-empty subset, memoized on their sub-grids.
    std::vector<std::vector<double>> margin_sub(std::size_t{1} << d);
    const std::vector<IndexSet> subsets = subsets_of(IndexSet::full(d));
    for (IndexSet I : subsets) margin_sub[I.bits()] = margin_over(m, z.values(), I);

    std::vector<std::pair<IndexSet, ClrField>> components;
    components.reserve(subsets.size());
    for (IndexSet I : subsets) {
        std::vector<double> acc(m.size(), 0.0);
        for_each_nonempty_subset(I, [&](IndexSet J) {
            const double coeff = ((I.count() - J.count()) % 2 == 0) ? 1.0 : -1.0;
            add_broadcast(m, J, margin_sub[J.bits()], coeff, acc);
        });
        components.emplace_back(I, make_clr_unchecked(f.measure_ptr(), std::move(acc)));
    }
    return Decomposition(f, std::move(z), std::move(components));
}

DecompositionReport pythagoras_report(const Decomposition& dec) {
    DecompositionReport out;
    out.total_norm_sq = dec.source_norm_sq();

    double sum = 0.0, comp = 0.0;
    for (const auto& [subset, field] : dec.components()) {
        const double nsq = dec.component_norm_sq(subset);
        const double share = out.total_norm_sq > 0.0 ? nsq / out.total_norm_sq : 0.0;
        out.components.push_back({subset, nsq, share});
        const double term = nsq - comp;
        const double next = sum + term;
        comp = (next - sum) - term;
        sum = next;
    }
    out.component_sum_sq = sum;
    out.pythagoras_abs = std::fabs(sum - out.total_norm_sq);
    out.pythagoras_rel = out.pythagoras_abs / (1.0 + out.total_norm_sq);

    const Decomposition::Check check = dec.verify();
    out.reconstruction_residual = check.reconstruction;
    out.orthogonality_max = check.orthogonality;
    return out;
}

YuleCheck yule_perturb_check(const Density& f, const Density& g, double separability_tol) {
    detail::require_same_measure(f.measure(), g.measure(), "yule_perturb_check");

    const Decomposition dec_g = decompose(g);
    double g_int = 0.0;
    for (const auto& [subset, field] : dec_g.components())
        if (subset.count() >= 2)
            g_int = std::max(g_int, std::sqrt(dec_g.component_norm_sq(subset)));
    if (g_int > separability_tol * (1.0 + std::sqrt(dec_g.source_norm_sq())))
        fail("yule_perturb_check: g has non-vanishing interactions");

    const Density h = perturb(f, g);
    const Decomposition dec_f = decompose(f);
    const Decomposition dec_h = decompose(h);
    const double scale =
        1.0 + std::max(max_abs(dec_f.source_clr().values()), max_abs(dec_h.source_clr().values()));

    YuleCheck out{g_int, 0.0, 0.0};
    for (const auto& [subset, field] : dec_h.components()) {
        if (subset.count() >= 2) {
            const ClrField& ff = dec_f.component(subset);
            for (std::size_t k = 0; k < field.size(); ++k)
                out.interaction_residual = std::max(
                    out.interaction_residual, std::fabs(field.values()[k] - ff.values()[k]));
        } else {
            const ClrField& ff = dec_f.component(subset);
            const ClrField& gg = dec_g.component(subset);
            for (std::size_t k = 0; k < field.size(); ++k)
                out.margin_residual =
                    std::max(out.margin_residual,
                             std::fabs(field.values()[k] - ff.values()[k] - gg.values()[k]));
        }
    }
    out.interaction_residual /= scale;
    out.margin_residual /= scale;
    return out;
}

}  // namespace bdecomp
