#pragma once

#include <span>
#include <utility>
#include <vector>

#include "bdecomp/decomposition.hpp"
#include "bdecomp/density.hpp"
#include "bdecomp/grid.hpp"

namespace bdecomp {

// Standard normal quantile. Rational initializer refined by one Halley step
// against the erfc-based CDF; absolute error <= 1e-9 on [1e-12, 1 - 1e-12].
double normal_quantile(double p);
double normal_cdf(double x);

// Symmetric positive-definite matrix with unit diagonal. Admission requires
// exact symmetry, exactly-unit diagonal, and a successful Cholesky
// factorization. Precomputes A = Sigma^{-1} - I and log det(2 pi Sigma).
class CorrelationMatrix {
public:
    CorrelationMatrix(int d, std::vector<double> entries);  // row-major d x d
    static CorrelationMatrix exchangeable(int d, double rho);

    int dim() const { return d_; }
    double entry(int i, int j) const { return entries_[static_cast<std::size_t>(i) * d_ + j]; }
    double a(int i, int j) const { return a_[static_cast<std::size_t>(i) * d_ + j]; }
    double log_det_2pi_sigma() const { return log_det_2pi_; }
    std::span<const double> entries() const { return entries_; }

private:
    int d_;
    std::vector<double> entries_;
    std::vector<double> a_;
    double log_det_2pi_;
};

// Gaussian copula density on a grid over the open unit cube:
// det(2 pi Sigma)^{-1/2} exp(-x' A x / 2) with x_i the normal quantiles of
// the coordinates. The constant is irrelevant up to scale.
Density gaussian_copula_density(const CorrelationMatrix& sigma, GridPtr m);

// Closed-form clr components of the Gaussian copula at a point u (one
// coordinate per axis in I, ascending): singletons give
// -a_ii ((Phi^{-1} u)^2 - 1) / 2, pairs give -a_ij Phi^{-1}(u_i) Phi^{-1}(u_j),
// and every component of order >= 3 vanishes identically.
double gaussian_copula_clr(const CorrelationMatrix& sigma, IndexSet I,
                           std::span<const double> u);
std::vector<double> gaussian_copula_clr(const CorrelationMatrix& sigma, IndexSet I,
                                        const std::vector<std::vector<double>>& points);

// Bivariate density x1^{a1-1} (1-x1)^{a0+a2-1} x2^{a2-1} (1-x2)^{a0+a1-1}
// (1 - x1 x2)^{-(a0+a1+a2)} on a grid over the open unit square, evaluated
// without its normalizing constant. Its interaction vanishes as a0+a1+a2 -> 0.
Density beta2_density(double alpha0, double alpha1, double alpha2, GridPtr m);

// Strictly increasing piecewise-linear map onto (0,1) given by breakpoint
// pairs (x_k, F_k). Evaluation extends the end segments linearly; forward()
// rejects arguments whose image leaves (0,1).
class MarginalTransform {
public:
    MarginalTransform(std::vector<double> x, std::vector<double> F);

    double forward(double x) const;   // F(x)
    double inverse(double u) const;   // F^{-1}(u), u in (0,1)
    std::span<const double> breakpoints() const { return x_; }
    std::span<const double> cdf_values() const { return F_; }

private:
    std::vector<double> x_;
    std::vector<double> F_;
};

// Grid realizing the product of the marginal distributions: axis points are
// the inverse images of the cube grid points, axis weights are copied (each
// pulled-back cell keeps its marginal probability mass).
GridPtr pullback_measure(const GridMeasure& cube, std::span<const MarginalTransform> marginals);

// Evaluates c at (F_1(x_1), ..., F_d(x_d)) over m_x, interpolating
// multilinearly in log density between cube grid nodes. Coordinates mapping
// outside the hull of c's grid are an error.
Density sklar_compose(const Density& c, std::span<const MarginalTransform> marginals,
                      GridPtr m_x);

// Two-step pipeline: decompose the copula density on the cube, then carry
// every component onto the pullback grid. Component norms are preserved by
// construction of the pullback measure; the composed components reconstruct
// the composed density up to the reported residual.
struct CopulaPipelineResult {
    Decomposition cube;
    Density composed;
    std::vector<std::pair<IndexSet, Density>> composed_components;
    double reconstruction_residual;
};

CopulaPipelineResult copula_pipeline(const Density& c,
                                     std::span<const MarginalTransform> marginals);

}  // namespace bdecomp
