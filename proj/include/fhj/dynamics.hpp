#pragma once

// Caputo-order Cauchy problems with path history, the characteristic
// velocity set E(t, x, s) and characteristic trajectories.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fhj/fraccalc.hpp"
#include "fhj/path.hpp"
#include "fhj/pathspace.hpp"

namespace fhj {

using HamiltonianFn = std::function<double(double t, std::span<const double> x, std::span<const double> s)>;
using TerminalCostFn = std::function<double(const SampledPath& w)>;

struct HamiltonianProblem {
    std::string name;
    std::size_t dim = 1;
    double alpha = 0.5;
    Grid grid{1.0, 1000};
    HamiltonianFn hamiltonian;
    TerminalCostFn terminal_cost;
    double c_H = 1.0;
    /// Local Lipschitz constant in x on the ball of the given radius.
    std::function<double(double)> lambda_H;
    /// Constant velocities the policy search offers in addition to the scaled
    /// ball directions (for instance the drift of a transport Hamiltonian).
    std::vector<std::vector<double>> reference_velocities;

    double H(double t, std::span<const double> x, std::span<const double> s) const { return hamiltonian(t, x, s); }
    double sigma(const SampledPath& w) const { return terminal_cost(w); }
    double velocity_bound(std::span<const double> x) const { return c_H * (1.0 + norm(x)); }
};

struct AssumptionReport {
    double growth_ratio = 0.0;    ///< worst |dH| / (c_H (1+|x|) |ds|) over samples
    double lipschitz_ratio = 0.0; ///< worst |dH| / (lambda_H(R) (1+|s|) |dx|) over samples
    bool growth_ok = false;
    bool lipschitz_ok = false;
    bool ok() const noexcept { return growth_ok && lipschitz_ok; }
};

/// Samples random triples in the radius-R ball and compares difference
/// quotients of H with the declared constants c_H and lambda_H(R).
AssumptionReport spot_check_assumptions(const HamiltonianProblem& problem, double R, std::size_t samples,
                                        std::uint64_t seed);

/// Sampled difference-quotient estimate of lambda_H(R) times a 1.25 safety factor.
double estimate_lambda_H(const HamiltonianProblem& problem, double R, std::size_t samples, std::uint64_t seed);

/// Read-only view of a trajectory known at nodes 0..index.
class HistoryView {
public:
    HistoryView(const Grid& grid, std::size_t dim, std::size_t index, std::span<const double> values)
        : grid_(&grid), dim_(dim), index_(index), values_(values) {}
    const Grid& grid() const noexcept { return *grid_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t index() const noexcept { return index_; }
    double time() const noexcept { return grid_->node(index_); }
    std::span<const double> at(std::size_t k) const { return values_.subspan(k * dim_, dim_); }
    std::span<const double> current() const { return at(index_); }
    SampledPath to_path() const {
        return SampledPath(*grid_, dim_, std::vector<double>(values_.begin(), values_.begin() +
                                                              static_cast<std::ptrdiff_t>((index_ + 1) * dim_)));
    }

private:
    const Grid* grid_;
    std::size_t dim_;
    std::size_t index_;
    std::span<const double> values_;
};

struct RhsValue {
    std::vector<double> f;
    double h = 0.0;
};

using Rhs = std::function<RhsValue(const HistoryView&)>;

struct SolverOptions {
    std::size_t corrector_iterations = 1;
    /// Further corrector passes until the node value moves by less than this
    /// (relative to 1 + |x|), at most max_corrector_iterations in total. Zero
    /// keeps exactly corrector_iterations passes.
    double corrector_tolerance = 1e-13;
    std::size_t max_corrector_iterations = 100;
    /// Recovered history generators larger than this are treated as a path
    /// that is not representable at the requested order.
    double history_threshold = 1e8;
    /// Last node to compute; 0 means the horizon.
    std::size_t stop_index = 0;
};

struct Characteristic {
    AcPath x;          ///< base x(0) and the full generator on [0, T]
    SampledPath path;  ///< realized x at every node
    SampledPath z;     ///< scalar cost coordinate
    SampledPath zdot;  ///< cost rate used by the trapezoidal z update
    std::size_t origin_index = 0;
    double z0 = 0.0;
    std::vector<double> s;

    PathPoint restrict_to(std::size_t j) const { return PathPoint{path.truncated(j), x.generator.truncated(j)}; }
    double z_at(std::size_t j) const { return z.scalar_at(j); }
};

/// Solves (D^alpha x)(t) = f, dz/dt = h on (t_0, T] with x = w_0 and z = z_0
/// on [0, t_0], by a fractional Adams predictor-corrector. The history
/// generator is taken from the PathPoint when present and otherwise recovered
/// with caputo_derivative.
Characteristic solve_caputo_ivp(const PathPoint& history, double z0, const Rhs& rhs, double alpha,
                                const SolverOptions& options = {});

/// Finite sample of E(t, x, s): f = 0 plus f = c_H (1 + |x|) d over K unit
/// directions d (n = 1: d in {-1, +1}), each with h = <s, f> - H(t, x, s).
std::vector<RhsValue> characteristic_velocity_set(const HamiltonianProblem& problem, double t,
                                                  std::span<const double> x, std::span<const double> s,
                                                  std::size_t K);

/// Deterministic quasi-uniform unit directions in R^n: {-1, +1} for n = 1,
/// nested van der Corput angles for n = 2, a Fibonacci sphere for n = 3 and
/// signed coordinate axes above.
std::vector<std::vector<double>> unit_directions(std::size_t dim, std::size_t K);

/// Velocity rho * c_H (1 + |x|) * d.
struct ScaledDirective {
    std::vector<double> direction;
    double fraction = 1.0;
};
/// Velocity independent of the state.
struct ConstantDirective {
    std::vector<double> velocity;
};
using CallableDirective = std::function<std::vector<double>(const HistoryView&)>;
using Directive = std::variant<ScaledDirective, ConstantDirective, CallableDirective>;

/// Piecewise directives on a coarse mesh of [start, end] (grid indices).
/// Node j belongs to piece floor((j - start - 1) * J / (end - start)); nodes
/// past `end` use the last piece.
struct SelectionPolicy {
    std::size_t start_index = 0;
    std::size_t end_index = 0;
    std::vector<Directive> pieces;

    std::size_t piece_of(std::size_t j) const noexcept;
    std::vector<double> velocity(const HamiltonianProblem& problem, const HistoryView& history) const;
};

/// Tolerance on the velocity ball used when validating policies.
inline constexpr double kVelocityTolerance = 1e-9;

Characteristic integrate_characteristic(const HamiltonianProblem& problem, const PathPoint& history, double z0,
                                        std::span<const double> s, const SelectionPolicy& policy,
                                        const SolverOptions& options = {});

struct InclusionDefect {
    double velocity_excess = 0.0;  ///< max (|psi| - c_H (1 + |x|))_+
    double cost_rate_error = 0.0;  ///< max |zdot - (<s, psi> - H)|
};

/// Nodewise distance of (generator, zdot) from E(t, x(t), s) after t_0.
InclusionDefect inclusion_defect(const HamiltonianProblem& problem, const Characteristic& ch);

/// Splices `second` (started from first restricted to t_switch) onto `first`.
Characteristic concatenate(const Characteristic& first, std::size_t t_switch, const Characteristic& second,
                           double tolerance = 1e-9);

/// CSV export with columns t, x1..xn, z, psi1..psin.
void write_characteristic_csv(std::ostream& out, const Characteristic& ch);

} // namespace fhj
