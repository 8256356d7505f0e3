#pragma once

#include <vector>

#include "bdecomp/density.hpp"
#include "bdecomp/grid.hpp"

namespace bdecomp {

// Geometric margin of f onto the axes in I: the exponential of the weighted
// mean of ln f over the complementary axes, broadcast back over the full
// grid. I = empty yields the constant exp(mean ln f); I = all axes yields f.
Density geometric_margin(const Density& f, IndexSet I);

// Projection that integrates the axes in J out of f (the geometric margin
// onto the complement). J = empty is the identity. Projections for disjoint
// axes commute and each is idempotent.
Density project_out(const Density& f, IndexSet J);

// Interaction terms built by successive applications of (id - P_i) for i in I
// to the margin onto I, carried out literally in density space. For the empty
// set this returns the constant part; for singletons a rescaled margin; for
// |I| >= 2 it is proportional to the interaction component.
Density hoeffding_term(const Density& f, IndexSet I);

// Interaction component over I (|I| >= 2) by inclusion-exclusion over the
// margins of subsets of I. Production route of decompose().
Density interaction_mobius(const Density& f, IndexSet I);

// Same component by peeling lower-order interactions and margins off the
// margin onto I. Independent of interaction_mobius; used as a cross-check.
Density interaction_recursive(const Density& f, IndexSet I);

// Product of the singleton margins.
Density independence_part(const Density& f);

// Result of splitting clr(f) into 2^d - 1 mutually orthogonal pieces: one per
// singleton (the margins) and one per axis subset of size >= 2 (the
// interactions). Components are stored as full-grid clr fields, constant
// along the axes they do not involve, in canonical subset order.
class Decomposition {
public:
    Decomposition(Density source, ClrField source_clr,
                  std::vector<std::pair<IndexSet, ClrField>> components);

    const Density& source() const { return source_; }
    const ClrField& source_clr() const { return source_clr_; }

    const std::vector<std::pair<IndexSet, ClrField>>& components() const { return components_; }
    const ClrField& component(IndexSet I) const;
    double component_norm_sq(IndexSet I) const;
    double source_norm_sq() const { return source_norm_sq_; }

    // Residuals of the structural identities, each guarded relative:
    //   reconstruction: max |sum of components - clr(source)| / (1 + max |clr|)
    //   orthogonality:  max |<u, v>| / (1 + |u| |v|) over component pairs
    //   pythagoras:     |sum of norm^2 - |clr|^2| / (1 + |clr|^2)
    struct Check {
        double reconstruction;
        double orthogonality;
        double pythagoras;
        double max() const;
        bool within(double tol) const;
    };
    Check verify() const;

private:
    Density source_;
    ClrField source_clr_;
    std::vector<std::pair<IndexSet, ClrField>> components_;
    std::vector<double> norms_sq_;
    double source_norm_sq_;
};

// Full orthogonal split of f. Cost grows with 3^d and the grid size; the
// dimension cap on GridMeasure keeps this a desk-scale computation.
Decomposition decompose(const Density& f);

struct ComponentShare {
    IndexSet subset;
    double norm_sq;
    double share;  // norm_sq / total, 0 when the total vanishes
};

struct DecompositionReport {
    std::vector<ComponentShare> components;  // canonical subset order
    double total_norm_sq;
    double component_sum_sq;
    double pythagoras_abs;  // |component_sum_sq - total_norm_sq|
    double pythagoras_rel;  // guarded: abs / (1 + total)
    double reconstruction_residual;
    double orthogonality_max;
};

DecompositionReport pythagoras_report(const Decomposition& dec);

// Behaviour of the decomposition under perturbation by a density with no
// interactions: h = f (+) g keeps f's interaction components and shifts each
// margin by g's. Residuals are guarded-relative maxima over pointwise clr
// deviations. Throws if g has an interaction beyond separability_tol.
struct YuleCheck {
    double g_max_interaction_norm;
    double interaction_residual;
    double margin_residual;
    double max() const { return interaction_residual > margin_residual ? interaction_residual : margin_residual; }
};

YuleCheck yule_perturb_check(const Density& f, const Density& g,
                             double separability_tol = 1e-8);

}  // namespace bdecomp
