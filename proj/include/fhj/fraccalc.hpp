#pragma once

// Riemann-Liouville integrals, Caputo derivatives and AC^alpha paths on
// uniform grids.
//
// All integrals use product-trapezoidal quadrature: the data are replaced by
// their piecewise-linear interpolant, which is then integrated exactly against
// the weakly singular kernel (t - s)^(alpha - 1) / Gamma(alpha). The scheme is
// second order for smooth data and reduces to the ordinary trapezoidal rule at
// alpha = 1.

#include <cstddef>
#include <span>
#include <vector>

#include "fhj/path.hpp"

namespace fhj {

/// Gamma function for x > 0. Throws std::domain_error otherwise.
double gamma_fn(double x);

/// Product-trapezoidal weights w(j, k) of I^order on a grid with step h:
/// (I^order psi)(t_j) ~= sum_{k=0..j} w(j, k) psi_k.
class ProductWeights {
public:
    ProductWeights(double order, double h, std::size_t max_index);

    double order() const noexcept { return order_; }
    double operator()(std::size_t j, std::size_t k) const noexcept {
        if (k == j) return j == 0 ? 0.0 : scale_;
        if (k == 0) return start_[j];
        return interior_[j - k];
    }
    /// Weight of psi_k in the sum for node j when only the distance m = j - k
    /// matters (0 < k < j).
    double interior(std::size_t m) const noexcept { return interior_[m]; }
    double start(std::size_t j) const noexcept { return start_[j]; }
    double diagonal() const noexcept { return scale_; }

private:
    double order_;
    double scale_;
    std::vector<double> start_;
    std::vector<double> interior_;
};

/// Rectangle (left-point) weights of I^order used by fractional predictors:
/// (I^order psi)(t_{j+1}) ~= sum_{k=0..j} b(j+1-k) psi_k.
class RectangleWeights {
public:
    RectangleWeights(double order, double h, std::size_t max_index);
    /// Weight for distance m = (j + 1) - k >= 1.
    double operator()(std::size_t m) const noexcept { return b_[m]; }

private:
    std::vector<double> b_;
};

/// (I^alpha psi) at every node 0..psi.last_index(). alpha in [0, 1];
/// alpha = 0 returns psi unchanged.
SampledPath rl_integral(const SampledPath& psi, double alpha);

/// (I^alpha psi)(t_j) at a single node.
std::vector<double> rl_integral_at(const SampledPath& psi, double alpha, std::size_t j);

enum class CaputoScheme {
    /// Exact inverse of the product-trapezoidal rl_integral; the generator at
    /// node 0 is closed by linear extrapolation from nodes 1 and 2.
    ProductTrapezoidInverse,
    /// Classical L1 formula (Caputo derivative of the piecewise-linear
    /// interpolant); node 0 copies node 1.
    L1,
};

/// Caputo derivative of order alpha in (0, 1) at every node. Requires at
/// least two nodes.
SampledPath caputo_derivative(const SampledPath& x, double alpha,
                              CaputoScheme scheme = CaputoScheme::ProductTrapezoidInverse);

/// x(tau) = base + (I^order generator)(tau).
struct AcPath {
    std::vector<double> base;
    SampledPath generator;
    double order;

    std::size_t dim() const noexcept { return base.size(); }
    const Grid& grid() const noexcept { return generator.grid(); }
    std::size_t last_index() const noexcept { return generator.last_index(); }
    SampledPath realize() const;
};

AcPath make_ac_path(std::vector<double> x0, SampledPath generator, double alpha);
SampledPath eval_ac_path(const AcPath& x);

/// Stored generator, exactly.
SampledPath caputo_derivative(const AcPath& x);

/// max_j |I^alpha(I^beta psi) - I^(alpha+beta) psi| over the nodes.
double check_semigroup(const SampledPath& psi, double alpha, double beta);

} // namespace fhj
