#include "fhj/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include "fhj/path_io.hpp"

namespace fhj {

namespace {

std::vector<double> random_in_ball(std::mt19937_64& rng, std::size_t n, double radius) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& c : v) c = gauss(rng);
    const double nv = norm(v);
    const double r = radius * std::pow(unif(rng), 1.0 / static_cast<double>(n));
    for (auto& c : v) c *= (nv > 0.0 ? r / nv : 0.0);
    return v;
}

struct QuotientSample {
    double growth = 0.0;
    double lipschitz = 0.0;
};

// Worst difference quotients of H over random triples in the radius-R ball;
// the momentum arguments are drawn from a ball of radius R + 1.
QuotientSample sample_quotients(const HamiltonianProblem& p, double R, std::size_t samples, std::uint64_t seed,
                                double lambda) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, p.grid.horizon());
    QuotientSample q;
    for (std::size_t k = 0; k < samples; ++k) {
        const double t = unif(rng);
        const auto x = random_in_ball(rng, p.dim, R);
        const auto x2 = random_in_ball(rng, p.dim, R);
        const auto s = random_in_ball(rng, p.dim, R + 1.0);
        const auto s2 = random_in_ball(rng, p.dim, R + 1.0);
        const double ds = distance(s, s2);
        const double dx = distance(x, x2);
        if (ds > 1e-12) {
            const double dh = std::abs(p.H(t, x, s) - p.H(t, x, s2));
            q.growth = std::max(q.growth, dh / (p.c_H * (1.0 + norm(x)) * ds));
        }
        if (dx > 1e-12) {
            const double dh = std::abs(p.H(t, x, s) - p.H(t, x2, s));
            q.lipschitz = std::max(q.lipschitz, dh / (lambda * (1.0 + norm(s)) * dx));
        }
    }
    return q;
}

} // namespace

AssumptionReport spot_check_assumptions(const HamiltonianProblem& problem, double R, std::size_t samples,
                                        std::uint64_t seed) {
    if (!problem.hamiltonian) throw std::invalid_argument("spot_check_assumptions: Hamiltonian missing");
    const double lambda = problem.lambda_H ? problem.lambda_H(R) : estimate_lambda_H(problem, R, samples, seed + 1);
    const auto q = sample_quotients(problem, R, samples, seed, lambda);
    AssumptionReport r;
    r.growth_ratio = q.growth;
    r.lipschitz_ratio = q.lipschitz;
    r.growth_ok = q.growth <= 1.0 + 1e-9;
    r.lipschitz_ok = q.lipschitz <= 1.0 + 1e-9;
    return r;
}

double estimate_lambda_H(const HamiltonianProblem& problem, double R, std::size_t samples, std::uint64_t seed) {
    const auto q = sample_quotients(problem, R, samples, seed, 1.0);
    // A Hamiltonian independent of x still needs a positive constant.
    return std::max(1.25 * q.lipschitz, 1e-6);
}

Characteristic solve_caputo_ivp(const PathPoint& history, double z0, const Rhs& rhs, double alpha,
                                const SolverOptions& options) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("solve_caputo_ivp: order must lie in (0, 1)");
    const Grid grid = history.grid();
    const std::size_t N = grid.steps();
    const std::size_t n = history.dim();
    const std::size_t i0 = history.t_index();
    if (i0 >= N) throw std::invalid_argument("solve_caputo_ivp: history must end before the horizon");
    const std::size_t last = options.stop_index ? options.stop_index : N;
    if (last <= i0 || last > N) throw std::invalid_argument("solve_caputo_ivp: stop index outside (t_0, T]");

    SampledPath gen(grid, n, last);
    SampledPath x(grid, n, last);
    SampledPath z(grid, 1, last);
    SampledPath zdot(grid, 1, last);
    std::vector<double>& xv = x.data();

    for (std::size_t j = 0; j <= i0; ++j) {
        std::ranges::copy(history.path.at(j), x.at(j).begin());
        z(j, 0) = z0;
    }
    if (i0 > 0) {
        const SampledPath hist_gen =
            history.generator ? *history.generator : caputo_derivative(history.path, alpha);
        if (hist_gen.last_index() != i0 || hist_gen.dim() != n) {
            throw std::invalid_argument("solve_caputo_ivp: history generator does not match the history path");
        }
        if (!hist_gen.all_finite() || hist_gen.max_norm() > options.history_threshold) {
            throw std::runtime_error("solve_caputo_ivp: history is not representable at this order "
                                     "(recovered generator diverges)");
        }
        for (std::size_t j = 0; j <= i0; ++j) std::ranges::copy(hist_gen.at(j), gen.at(j).begin());
    }

    auto evaluate = [&](std::size_t j) {
        RhsValue v = rhs(HistoryView(grid, n, j, xv));
        if (v.f.size() != n || !std::isfinite(v.h) ||
            !std::ranges::all_of(v.f, [](double c) { return std::isfinite(c); })) {
            throw std::runtime_error("solve_caputo_ivp: right-hand side returned non-finite or mis-sized values");
        }
        return v;
    };

    {
        const RhsValue v0 = evaluate(i0);
        if (i0 == 0) std::ranges::copy(v0.f, gen.at(0).begin());
        zdot(i0, 0) = v0.h;
    }

    const ProductWeights w(alpha, grid.step(), last);
    const RectangleWeights b(alpha, grid.step(), last);
    const auto base = history.path.at(0);
    std::vector<double> memory(n), predicted(n);
    const double h = grid.step();

    for (std::size_t j = i0 + 1; j <= last; ++j) {
        std::ranges::fill(memory, 0.0);
        std::ranges::fill(predicted, 0.0);
        for (std::size_t k = 0; k < j; ++k) {
            const double wk = w(j, k);
            const double bk = b(j - k);
            auto g = gen.at(k);
            for (std::size_t i = 0; i < n; ++i) {
                memory[i] += wk * g[i];
                predicted[i] += bk * g[i];
            }
        }
        auto xj = x.at(j);
        for (std::size_t i = 0; i < n; ++i) xj[i] = base[i] + predicted[i];
        RhsValue v = evaluate(j);
        const std::size_t min_it = std::max<std::size_t>(1, options.corrector_iterations);
        const std::size_t max_it = options.corrector_tolerance > 0.0
                                       ? std::max(min_it, options.max_corrector_iterations)
                                       : min_it;
        for (std::size_t it = 0; it < max_it; ++it) {
            double moved = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double next = base[i] + memory[i] + w.diagonal() * v.f[i];
                moved = std::max(moved, std::abs(next - xj[i]));
                xj[i] = next;
            }
            v = evaluate(j);
            if (it + 1 >= min_it && moved <= options.corrector_tolerance * (1.0 + norm(xj))) break;
        }
        std::ranges::copy(v.f, gen.at(j).begin());
        // Keep the stored path exactly equal to base + I^alpha(generator).
        for (std::size_t i = 0; i < n; ++i) xj[i] = base[i] + memory[i] + w.diagonal() * v.f[i];
        zdot(j, 0) = v.h;
        z(j, 0) = z(j - 1, 0) + 0.5 * h * (zdot(j - 1, 0) + v.h);
    }

    Characteristic ch{make_ac_path({base.begin(), base.end()}, std::move(gen), alpha), std::move(x), std::move(z),
                      std::move(zdot), i0, z0, {}};
    return ch;
}

std::vector<std::vector<double>> unit_directions(std::size_t dim, std::size_t K) {
    if (dim == 0) throw std::invalid_argument("unit_directions: dimension must be positive");
    std::vector<std::vector<double>> dirs;
    if (dim == 1) return {{-1.0}, {1.0}};
    K = std::max<std::size_t>(K, 1);
    if (dim == 2) {
        // Van der Corput angles: the set for K is a prefix of the set for K + 1.
        for (std::size_t k = 0; k < K; ++k) {
            double frac = 0.0, base = 0.5;
            for (std::size_t b = k; b > 0; b >>= 1, base *= 0.5) frac += (b & 1U) ? base : 0.0;
            const double a = 2.0 * std::numbers::pi * frac;
            dirs.push_back({std::cos(a), std::sin(a)});
        }
        return dirs;
    }
    if (dim == 3) {
        // Fibonacci sphere.
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (std::size_t k = 0; k < K; ++k) {
            const double y = K == 1 ? 0.0 : 1.0 - 2.0 * (static_cast<double>(k) + 0.5) / static_cast<double>(K);
            const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
            const double phi = golden * static_cast<double>(k);
            dirs.push_back({r * std::cos(phi), y, r * std::sin(phi)});
        }
        return dirs;
    }
    // Higher dimensions: signed coordinate axes, cycled.
    for (std::size_t k = 0; k < K; ++k) {
        std::vector<double> d(dim, 0.0);
        d[(k / 2) % dim] = (k % 2 == 0) ? 1.0 : -1.0;
        dirs.push_back(std::move(d));
    }
    return dirs;
}

std::vector<RhsValue> characteristic_velocity_set(const HamiltonianProblem& problem, double t,
                                                  std::span<const double> x, std::span<const double> s,
                                                  std::size_t K) {
    if (K < 1) throw std::invalid_argument("characteristic_velocity_set: K must be at least 1");
    const double Hs = problem.H(t, x, s);
    std::vector<RhsValue> out;
    out.push_back({std::vector<double>(problem.dim, 0.0), -Hs});
    const double radius = problem.velocity_bound(x);
    for (const auto& d : unit_directions(problem.dim, K)) {
        std::vector<double> f(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) f[i] = radius * d[i];
        const double hval = dot(s, f) - Hs;
        out.push_back({std::move(f), hval});
    }
    return out;
}

std::size_t SelectionPolicy::piece_of(std::size_t j) const noexcept {
    const std::size_t J = pieces.size();
    if (J <= 1 || j <= start_index) return 0;
    if (j > end_index || end_index <= start_index) return J - 1;
    const std::size_t idx = (j - start_index - 1) * J / (end_index - start_index);
    return std::min(idx, J - 1);
}

std::vector<double> SelectionPolicy::velocity(const HamiltonianProblem& problem, const HistoryView& history) const {
    if (pieces.empty()) throw std::invalid_argument("SelectionPolicy: no directives");
    const Directive& d = pieces[piece_of(history.index())];
    const auto x = history.current();
    std::vector<double> f;
    if (const auto* sd = std::get_if<ScaledDirective>(&d)) {
        const double r = sd->fraction * problem.velocity_bound(x);
        f.resize(sd->direction.size());
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = r * sd->direction[i];
    } else if (const auto* cd = std::get_if<ConstantDirective>(&d)) {
        f = cd->velocity;
    } else {
        f = std::get<CallableDirective>(d)(history);
    }
    if (f.size() != problem.dim) throw std::invalid_argument("SelectionPolicy: velocity has wrong dimension");
    const double bound = problem.velocity_bound(x);
    if (norm(f) > bound * (1.0 + kVelocityTolerance) + kVelocityTolerance) {
        throw std::domain_error("SelectionPolicy: velocity " + std::to_string(norm(f)) +
                                " exceeds the admissible bound " + std::to_string(bound));
    }
    return f;
}

Characteristic integrate_characteristic(const HamiltonianProblem& problem, const PathPoint& history, double z0,
                                        std::span<const double> s, const SelectionPolicy& policy,
                                        const SolverOptions& options) {
    if (s.size() != problem.dim) throw std::invalid_argument("integrate_characteristic: s has wrong dimension");
    std::vector<double> sv(s.begin(), s.end());
    Rhs rhs = [&problem, &policy, sv](const HistoryView& hv) {
        RhsValue v;
        v.f = policy.velocity(problem, hv);
        v.h = dot(sv, v.f) - problem.H(hv.time(), hv.current(), sv);
        return v;
    };
    Characteristic ch = solve_caputo_ivp(history, z0, rhs, problem.alpha, options);
    ch.s = std::move(sv);
    return ch;
}

InclusionDefect inclusion_defect(const HamiltonianProblem& problem, const Characteristic& ch) {
    InclusionDefect d;
    const auto& grid = ch.path.grid();
    for (std::size_t j = ch.origin_index + 1; j <= ch.path.last_index(); ++j) {
        const auto x = ch.path.at(j);
        const auto psi = ch.x.generator.at(j);
        d.velocity_excess = std::max(d.velocity_excess, norm(psi) - problem.velocity_bound(x));
        const double expected = dot(ch.s, psi) - problem.H(grid.node(j), x, ch.s);
        d.cost_rate_error = std::max(d.cost_rate_error, std::abs(ch.zdot.scalar_at(j) - expected));
    }
    d.velocity_excess = std::max(0.0, d.velocity_excess);
    return d;
}

Characteristic concatenate(const Characteristic& first, std::size_t t_switch, const Characteristic& second,
                           double tolerance) {
    if (second.origin_index != t_switch) {
        throw std::invalid_argument("concatenate: second characteristic does not start at the switch time");
    }
    if (t_switch == first.origin_index) return second;
    if (t_switch < first.origin_index || t_switch > first.path.last_index()) {
        throw std::invalid_argument("concatenate: switch time outside the first characteristic");
    }
    for (std::size_t j = 0; j <= t_switch; ++j) {
        if (distance(first.path.at(j), second.path.at(j)) > tolerance) {
            throw std::invalid_argument("concatenate: histories differ at node " + std::to_string(j));
        }
    }
    if (std::abs(second.z0 - first.z_at(t_switch)) > tolerance) {
        throw std::invalid_argument("concatenate: second z0 does not continue the first cost coordinate");
    }
    Characteristic out = second;
    for (std::size_t j = 0; j <= t_switch; ++j) {
        out.z(j, 0) = first.z(j, 0);
        out.zdot(j, 0) = first.zdot(j, 0);
    }
    // The rate at the switch node belongs to the second piece's first step.
    out.zdot(t_switch, 0) = second.zdot(t_switch, 0);
    out.origin_index = first.origin_index;
    out.z0 = first.z0;
    return out;
}

void write_characteristic_csv(std::ostream& out, const Characteristic& ch) {
    const std::size_t n = ch.path.dim();
    std::vector<std::string> header{"t"};
    for (std::size_t i = 0; i < n; ++i) header.push_back("x" + std::to_string(i + 1));
    header.push_back("z");
    for (std::size_t i = 0; i < n; ++i) header.push_back("psi" + std::to_string(i + 1));
    std::vector<std::vector<double>> rows;
    for (std::size_t j = 0; j <= ch.path.last_index(); ++j) {
        std::vector<double> row{ch.path.grid().node(j)};
        for (double v : ch.path.at(j)) row.push_back(v);
        row.push_back(ch.z_at(j));
        for (double v : ch.x.generator.at(j)) row.push_back(v);
        rows.push_back(std::move(row));
    }
    write_table_csv(out, header, rows);
}

} // namespace fhj
