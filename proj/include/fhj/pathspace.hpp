#pragma once

// The space of pairs (t, w(.)) with its Hausdorff-type metric.

#include <optional>

#include "fhj/fraccalc.hpp"
#include "fhj/path.hpp"

namespace fhj {

/// A pair (t_j, w(.)) where w is known at nodes 0..j. When the path came from
/// an AcPath the Caputo generator travels with it so solvers can continue the
/// path without numerically recovering its memory.
struct PathPoint {
    SampledPath path;
    std::optional<SampledPath> generator;

    std::size_t t_index() const noexcept { return path.last_index(); }
    double time() const noexcept { return path.end_time(); }
    const Grid& grid() const noexcept { return path.grid(); }
    std::size_t dim() const noexcept { return path.dim(); }
    /// Membership in the sub-horizon set (t < T).
    bool before_horizon() const noexcept { return t_index() < grid().steps(); }
    std::span<const double> current() const { return path.at(t_index()); }
};

PathPoint restrict(const SampledPath& x, std::size_t t_index);
PathPoint restrict(const AcPath& x, std::size_t t_index);
PathPoint restrict(const PathPoint& p, std::size_t t_index);

/// max over nodes of p of the min over nodes of q of the space-time distance.
double dist_star(const PathPoint& p, const PathPoint& q);
double dist(const PathPoint& p, const PathPoint& q);

/// Maximal oscillation ||w(tau) - w(tau')|| over node pairs with |tau - tau'| <= delta.
double modulus_of_continuity(const PathPoint& p, double delta);

/// max over tau in [0, min(t_p, t_q)] of ||w_p(tau) - w_q(tau)||, evaluated at
/// the nodes of both paths with linear interpolation.
double max_deviation(const PathPoint& p, const PathPoint& q);

struct DistBounds {
    double distance = 0.0;
    double time_gap = 0.0;
    double deviation = 0.0;
    double upper_rhs = 0.0;      ///< t - t' + kappa(t - t') + deviation
    double deviation_rhs = 0.0;  ///< dist + kappa(dist)
    double tolerance = 0.0;
    bool upper = false;      ///< dist <= t - t' + kappa(t - t') + max ||dw||
    bool time = false;       ///< t - t' <= dist
    bool deviation_ok = false;  ///< max ||dw|| <= dist + kappa(dist)
    bool all() const noexcept { return upper && time && deviation_ok; }
};

/// Evaluates the three metric inequalities for t_p >= t_q, kappa being the
/// modulus of p's path. Default tolerance is 10 h of p's grid.
DistBounds check_dist_bounds(const PathPoint& p, const PathPoint& q, std::optional<double> tolerance = std::nullopt);

} // namespace fhj
