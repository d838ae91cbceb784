#include "fhj/pathspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fhj {

PathPoint restrict(const SampledPath& x, std::size_t t_index) {
    if (t_index > x.last_index()) {
        throw std::out_of_range("restrict: index " + std::to_string(t_index) + " beyond path end " +
                                std::to_string(x.last_index()));
    }
    return PathPoint{x.truncated(t_index), std::nullopt};
}

PathPoint restrict(const AcPath& x, std::size_t t_index) {
    if (t_index > x.last_index()) throw std::out_of_range("restrict: index beyond AcPath end");
    return PathPoint{x.realize().truncated(t_index), x.generator.truncated(t_index)};
}

PathPoint restrict(const PathPoint& p, std::size_t t_index) {
    PathPoint out = restrict(p.path, t_index);
    if (p.generator) out.generator = p.generator->truncated(t_index);
    return out;
}

namespace {

void require_same_dim(const PathPoint& p, const PathPoint& q) {
    if (p.dim() != q.dim()) throw std::invalid_argument("dist: state dimensions differ");
}

} // namespace

double dist_star(const PathPoint& p, const PathPoint& q) {
    require_same_dim(p, q);
    const std::size_t n = p.dim();
    double worst = 0.0;
    for (std::size_t a = 0; a <= p.t_index(); ++a) {
        const double ta = p.grid().node(a);
        auto wa = p.path.at(a);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b <= q.t_index(); ++b) {
            const double dt = ta - q.grid().node(b);
            double d2 = dt * dt;
            if (d2 >= best) {
                // Nodes of q are ordered in time; once past ta the time gap only grows.
                if (q.grid().node(b) > ta) break;
                continue;
            }
            auto wb = q.path.at(b);
            for (std::size_t i = 0; i < n && d2 < best; ++i) {
                const double dw = wa[i] - wb[i];
                d2 += dw * dw;
            }
            best = std::min(best, d2);
        }
        worst = std::max(worst, best);
    }
    return std::sqrt(worst);
}

double dist(const PathPoint& p, const PathPoint& q) { return std::max(dist_star(p, q), dist_star(q, p)); }

double modulus_of_continuity(const PathPoint& p, double delta) {
    if (!(delta >= 0.0)) throw std::invalid_argument("modulus_of_continuity: delta must be nonnegative");
    const double h = p.grid().step();
    const std::size_t span_nodes =
        std::min(p.t_index(), static_cast<std::size_t>(std::floor(delta / h + 1e-9)));
    double kappa = 0.0;
    for (std::size_t a = 0; a <= p.t_index(); ++a) {
        const std::size_t hi = std::min(p.t_index(), a + span_nodes);
        for (std::size_t b = a + 1; b <= hi; ++b) kappa = std::max(kappa, distance(p.path.at(a), p.path.at(b)));
    }
    return kappa;
}

double max_deviation(const PathPoint& p, const PathPoint& q) {
    require_same_dim(p, q);
    const double t_end = std::min(p.time(), q.time());
    double dev = 0.0;
    auto scan = [&](const PathPoint& a, const PathPoint& b) {
        for (std::size_t j = 0; j <= a.t_index() && a.grid().node(j) <= t_end + 1e-12; ++j) {
            const double tau = a.grid().node(j);
            if (a.grid() == b.grid()) {
                dev = std::max(dev, distance(a.path.at(j), b.path.at(j)));
            } else {
                dev = std::max(dev, distance(a.path.at(j), b.path.value_at(tau)));
            }
        }
    };
    scan(p, q);
    if (!(p.grid() == q.grid())) scan(q, p);
    return dev;
}

DistBounds check_dist_bounds(const PathPoint& p, const PathPoint& q, std::optional<double> tolerance) {
    if (p.time() < q.time()) throw std::invalid_argument("check_dist_bounds: requires t_p >= t_q");
    DistBounds r;
    r.tolerance = tolerance.value_or(10.0 * p.grid().step());
    r.distance = dist(p, q);
    r.time_gap = p.time() - q.time();
    r.deviation = max_deviation(p, q);
    r.upper_rhs = r.time_gap + modulus_of_continuity(p, r.time_gap) + r.deviation;
    r.deviation_rhs = r.distance + modulus_of_continuity(p, r.distance);
    r.upper = r.distance <= r.upper_rhs + r.tolerance;
    r.time = r.time_gap <= r.distance + r.tolerance;
    r.deviation_ok = r.deviation <= r.deviation_rhs + r.tolerance;
    return r;
}

} // namespace fhj
