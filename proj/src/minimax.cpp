#include "fhj/minimax.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

namespace fhj {

namespace {

struct Candidate {
    double score = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> choice;
    bool valid = false;
};

// Larger score wins; equal scores go to the lexicographically smaller choice.
bool better(const Candidate& a, const Candidate& b) {
    if (!a.valid) return false;
    if (!b.valid) return true;
    if (a.score != b.score) return a.score > b.score;
    return a.choice < b.choice;
}

std::size_t thread_count(const SearchBudget& budget, std::size_t work) {
    std::size_t t = budget.threads ? budget.threads : std::thread::hardware_concurrency();
    return std::clamp<std::size_t>(t, 1, std::max<std::size_t>(work, 1));
}

SelectionPolicy policy_from_choice(const std::vector<Directive>& menu, const std::vector<std::size_t>& choice,
                                   std::size_t start, std::size_t end) {
    SelectionPolicy pol{start, end, {}};
    pol.pieces.reserve(choice.size());
    for (std::size_t c : choice) pol.pieces.push_back(menu.at(c));
    return pol;
}

std::vector<std::size_t> digits_of(std::size_t index, std::size_t base, std::size_t J) {
    std::vector<std::size_t> d(J);
    for (std::size_t l = J; l-- > 0;) {
        d[l] = index % base;
        index /= base;
    }
    return d;
}

// menu^J, or nullopt when it overflows.
std::optional<std::size_t> class_size(std::size_t menu, std::size_t J) {
    std::size_t total = 1;
    for (std::size_t l = 0; l < J; ++l) {
        if (total > std::numeric_limits<std::size_t>::max() / menu) return std::nullopt;
        total *= menu;
    }
    return total;
}

struct Evaluator {
    const HamiltonianProblem& problem;
    const PathPoint& p;
    std::span<const double> s;
    std::size_t end;
    const std::vector<Directive>& menu;
    const Objective& objective;
    SolverOptions solver;

    Characteristic run(const std::vector<std::size_t>& choice) const {
        return integrate_characteristic(problem, p, 0.0, s, policy_from_choice(menu, choice, p.t_index(), end),
                                        solver);
    }
    Candidate score(std::vector<std::size_t> choice) const {
        Candidate c;
        const double v = objective(run(choice));
        c.score = std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
        c.choice = std::move(choice);
        c.valid = true;
        return c;
    }
};

Candidate exhaustive_search(const Evaluator& ev, std::size_t total, std::size_t J, const SearchBudget& budget) {
    const std::size_t nthreads = thread_count(budget, total);
    std::vector<Candidate> best(nthreads);
    std::vector<std::exception_ptr> errors(nthreads);
    auto worker = [&](std::size_t t) {
        try {
            for (std::size_t idx = t; idx < total; idx += nthreads) {
                Candidate c = ev.score(digits_of(idx, ev.menu.size(), J));
                if (better(c, best[t])) best[t] = std::move(c);
            }
        } catch (...) {
            errors[t] = std::current_exception();
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker, t);
    worker(0);
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    Candidate out;
    for (auto& c : best) {
        if (better(c, out)) out = std::move(c);
    }
    return out;
}

// Prefixes are completed by repeating their last entry.
Candidate beam_search(const Evaluator& ev, std::size_t J, const SearchBudget& budget, std::size_t& evaluated) {
    const std::size_t M = ev.menu.size();
    std::vector<std::vector<std::size_t>> beam{{}};
    Candidate overall;
    for (std::size_t level = 0; level < J; ++level) {
        std::vector<std::vector<std::size_t>> expanded;
        for (const auto& prefix : beam) {
            for (std::size_t c = 0; c < M; ++c) {
                auto next = prefix;
                next.push_back(c);
                expanded.push_back(std::move(next));
            }
        }
        std::vector<Candidate> scored(expanded.size());
        const std::size_t nthreads = thread_count(budget, expanded.size());
        std::vector<std::exception_ptr> errors(nthreads);
        auto worker = [&](std::size_t t) {
            try {
                for (std::size_t i = t; i < expanded.size(); i += nthreads) {
                    auto full = expanded[i];
                    full.resize(J, full.back());
                    scored[i] = ev.score(std::move(full));
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker, t);
        worker(0);
        for (auto& th : pool) th.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
        evaluated += expanded.size();

        std::vector<std::size_t> order(expanded.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::ranges::sort(order, [&](std::size_t a, std::size_t b) {
            if (scored[a].score != scored[b].score) return scored[a].score > scored[b].score;
            return scored[a].choice < scored[b].choice;
        });
        for (std::size_t i : order) {
            if (better(scored[i], overall)) overall = scored[i];
        }
        beam.clear();
        for (std::size_t r = 0; r < std::min(order.size(), std::max<std::size_t>(budget.beam_width, 1)); ++r) {
            beam.push_back(expanded[order[r]]);
        }
    }
    return overall;
}

void require_budget(const SearchBudget& budget) {
    if (budget.J == 0) throw std::invalid_argument("search budget: J must be positive");
    if (budget.magnitudes.empty()) throw std::invalid_argument("search budget: no magnitudes");
    for (double m : budget.magnitudes) {
        if (!(m >= 0.0 && m <= 1.0)) throw std::invalid_argument("search budget: magnitudes must lie in [0, 1]");
    }
    if (budget.max_enumeration == 0 && budget.beam_width == 0) {
        throw std::invalid_argument("search budget: zero budget");
    }
}

} // namespace

std::vector<Directive> policy_menu(const HamiltonianProblem& problem, const SearchBudget& budget) {
    std::vector<Directive> menu;
    menu.emplace_back(ConstantDirective{std::vector<double>(problem.dim, 0.0)});
    const auto dirs = unit_directions(problem.dim, std::max<std::size_t>(budget.K, 1));
    std::vector<double> mags;
    for (double m : budget.magnitudes) {
        if (m > 0.0 && std::ranges::find(mags, m) == mags.end()) mags.push_back(m);
    }
    for (const auto& d : dirs) {
        for (double m : mags) menu.emplace_back(ScaledDirective{d, m});
    }
    if (budget.include_reference_velocities) {
        for (const auto& v : problem.reference_velocities) menu.emplace_back(ConstantDirective{v});
    }
    return menu;
}

SelectionPolicy decode_policy(const std::vector<Directive>& menu, std::size_t index, std::size_t J,
                              std::size_t start, std::size_t end) {
    if (menu.empty() || J == 0) throw std::invalid_argument("decode_policy: empty menu or J = 0");
    return policy_from_choice(menu, digits_of(index, menu.size(), J), start, end);
}

SearchResult search_policies(const HamiltonianProblem& problem, const PathPoint& p, std::span<const double> s,
                             std::size_t end_index, const SearchBudget& budget, const Objective& objective) {
    require_budget(budget);
    if (!p.before_horizon()) throw std::invalid_argument("search_policies: point must lie before the horizon");
    if (end_index <= p.t_index() || end_index > p.grid().steps()) {
        throw std::invalid_argument("search_policies: end index outside (t_0, T]");
    }
    if (s.size() != problem.dim) throw std::invalid_argument("search_policies: s has wrong dimension");
    const auto menu = policy_menu(problem, budget);
    SolverOptions solver = budget.solver;
    solver.stop_index = end_index;
    const Evaluator ev{problem, p, s, end_index, menu, objective, solver};

    SearchResult out;
    const auto total = class_size(menu.size(), budget.J);
    Candidate best;
    if (total && *total <= budget.max_enumeration) {
        best = exhaustive_search(ev, *total, budget.J, budget);
        out.evaluated = *total;
        out.exhaustive = true;
    } else {
        best = beam_search(ev, budget.J, budget, out.evaluated);
    }
    if (!best.valid) throw std::runtime_error("search_policies: no policy evaluated");
    out.value = best.score;
    out.choice = best.choice;
    out.best = ev.run(best.choice);
    return out;
}

SearchResult psi_upper(const HamiltonianProblem& problem, const PathPoint& p, std::span<const double> s,
                       const SearchBudget& budget) {
    require_budget(budget);
    if (!p.before_horizon()) {
        SearchResult r;
        r.value = problem.sigma(p.path);
        r.exhaustive = true;
        return r;
    }
    const std::size_t N = p.grid().steps();
    return search_policies(problem, p, s, N, budget,
                           [&problem, N](const Characteristic& ch) { return problem.sigma(ch.path) - ch.z_at(N); });
}

SearchResult psi_lower(const HamiltonianProblem& problem, const PathPoint& p, std::span<const double> s,
                       const SearchBudget& budget) {
    require_budget(budget);
    if (!p.before_horizon()) {
        SearchResult r;
        r.value = problem.sigma(p.path);
        r.exhaustive = true;
        return r;
    }
    const std::size_t N = p.grid().steps();
    SearchResult r = search_policies(problem, p, s, N, budget, [&problem, N](const Characteristic& ch) {
        return -(problem.sigma(ch.path) - ch.z_at(N));
    });
    r.value = -r.value;
    return r;
}

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Undecided: return "undecided (budget exhausted)";
    case Verdict::RefutedInClass: return "refuted within policy class";
    }
    return "unknown";
}

namespace {

StabilityResult stability_check(const CandidateSolution& phi, const HamiltonianProblem& problem, const PathPoint& p,
                                std::size_t t1, std::span<const double> s, double eps, const SearchBudget& budget,
                                double sign) {
    if (!phi.value) throw std::invalid_argument("stability check: candidate has no value evaluator");
    if (!(eps > 0.0)) throw std::invalid_argument("stability check: epsilon must be positive");
    const double phi0 = phi(p);
    // Excess over phi(p): sign = +1 for the upper condition, -1 for the lower one.
    auto excess = [&, t1, sign](const Characteristic& ch) {
        return sign * (phi(ch.restrict_to(t1)) - ch.z_at(t1) - phi0);
    };
    const SearchResult r =
        search_policies(problem, p, s, t1, budget, [&](const Characteristic& ch) { return -excess(ch); });
    StabilityResult out;
    out.slack = -r.value;
    out.holds = out.slack <= eps;
    out.verdict = out.holds ? Verdict::Holds : (r.exhaustive ? Verdict::RefutedInClass : Verdict::Undecided);
    out.witness = r.best;
    out.evaluated = r.evaluated;
    return out;
}

} // namespace

StabilityResult stability_check_upper(const CandidateSolution& phi, const HamiltonianProblem& problem,
                                      const PathPoint& p, std::size_t t1_index, std::span<const double> s,
                                      double eps, const SearchBudget& budget) {
    return stability_check(phi, problem, p, t1_index, s, eps, budget, 1.0);
}

StabilityResult stability_check_lower(const CandidateSolution& phi, const HamiltonianProblem& problem,
                                      const PathPoint& p, std::size_t t1_index, std::span<const double> s,
                                      double eps, const SearchBudget& budget) {
    return stability_check(phi, problem, p, t1_index, s, eps, budget, -1.0);
}

ChainResult multistep_chain(const CandidateSolution& phi, const HamiltonianProblem& problem, const PathPoint& p,
                            std::span<const double> s, std::size_t k, double eps_step, const SearchBudget& budget) {
    if (k == 0) throw std::invalid_argument("multistep_chain: k must be positive");
    if (!p.before_horizon()) throw std::invalid_argument("multistep_chain: point must lie before the horizon");
    const std::size_t t0 = p.t_index();
    const std::size_t N = p.grid().steps();
    if (k > N - t0) throw std::invalid_argument("multistep_chain: more steps than grid intervals");

    std::vector<std::size_t> breakpoints;
    for (std::size_t i = 0; i <= k; ++i) {
        breakpoints.push_back(t0 + static_cast<std::size_t>(std::llround(
                                           static_cast<double>(N - t0) * static_cast<double>(i) / static_cast<double>(k))));
    }
    const double phi_p = phi(p);
    std::vector<double> step_slack, cumulative_slack;
    std::optional<Characteristic> chain;
    PathPoint current = p;
    double z_offset = 0.0;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t t1 = breakpoints[i + 1];
        StabilityResult step = stability_check_upper(phi, problem, current, t1, s, eps_step, budget);
        if (!step.holds || !step.witness) {
            throw std::runtime_error("multistep_chain: no witness on interval " + std::to_string(i + 1) + " (excess " +
                                     std::to_string(step.slack) + ")");
        }
        Characteristic piece = std::move(*step.witness);
        for (double& v : piece.z.data()) v += z_offset;
        piece.z0 += z_offset;
        chain = chain ? concatenate(*chain, breakpoints[i], piece) : std::move(piece);
        const double slack = std::max(0.0, step.slack);
        cumulative += slack;
        step_slack.push_back(slack);
        cumulative_slack.push_back(cumulative);
        current = chain->restrict_to(t1);
        z_offset = chain->z_at(t1);
    }
    ChainResult out{std::move(*chain), std::move(breakpoints), std::move(step_slack), std::move(cumulative_slack)};
    for (std::size_t j = t0; j <= N; ++j) {
        out.node_excess.push_back(phi(out.trajectory.restrict_to(j)) - out.trajectory.z_at(j) - phi_p);
    }
    out.bound = static_cast<double>(k) * eps_step;
    bool ok = cumulative <= out.bound;
    for (std::size_t i = 1; i <= k; ++i) {
        ok = ok && out.node_excess[out.breakpoints[i] - t0] <= out.cumulative_slack[i - 1] + 1e-9;
    }
    out.within_bound = ok;
    return out;
}

double classical_residual(const CandidateSolution& phi, const HamiltonianProblem& problem, const PathPoint& p) {
    if (!phi.has_derivatives()) throw std::invalid_argument("classical_residual: derivatives missing");
    if (!p.before_horizon()) throw std::invalid_argument("classical_residual: point must lie before the horizon");
    const std::vector<double> g = phi.grad_alpha(p);
    if (g.size() != problem.dim) throw std::invalid_argument("classical_residual: gradient has wrong dimension");
    return std::abs(phi.dt_alpha(p) + problem.H(p.time(), p.current(), g));
}

double boundary_residual(const CandidateSolution& phi, const HamiltonianProblem& problem, const PathPoint& p) {
    if (p.before_horizon()) throw std::invalid_argument("boundary_residual: path must end at the horizon");
    return std::abs(phi(p) - problem.sigma(p.path));
}

Bracket envelope_bracket(const HamiltonianProblem& problem, const PathPoint& p,
                         const std::vector<std::vector<double>>& s_list, const SearchBudget& budget) {
    if (s_list.empty()) throw std::invalid_argument("envelope_bracket: empty s list");
    Bracket b;
    b.lower = -std::numeric_limits<double>::infinity();
    b.upper = std::numeric_limits<double>::infinity();
    for (const auto& s : s_list) {
        const double lo = psi_lower(problem, p, s, budget).value;
        const double hi = psi_upper(problem, p, s, budget).value;
        b.lower_per_s.push_back(lo);
        b.upper_per_s.push_back(hi);
        b.lower = std::max(b.lower, lo);
        b.upper = std::min(b.upper, hi);
    }
    return b;
}

WitnessReport comparison_witness(const HamiltonianProblem& problem, const PathPoint& p, double eps,
                                 const SelectionPolicy& f, const SelectionPolicy& f_prime, double z0,
                                 double tolerance) {
    if (!p.before_horizon()) throw std::invalid_argument("comparison_witness: point must lie before the horizon");
    const std::vector<double> zero(problem.dim, 0.0);
    WitnessReport rep{.x = integrate_characteristic(problem, p, 0.0, zero, f),
                      .x_prime = integrate_characteristic(problem, p, 0.0, zero, f_prime)};

    const Grid& grid = p.grid();
    const std::size_t N = grid.steps();
    const std::size_t t0 = p.t_index();
    const std::size_t n = problem.dim;
    const double R = std::max({rep.x.path.max_norm(), rep.x_prime.path.max_norm(), 1e-12});
    rep.params = build_lyapunov_params(problem.alpha, problem.lambda_H, R, grid.horizon());
    rep.eps = eps > 0.0 ? eps : rep.params.eps0;

    SampledPath delta(grid, n, N);
    for (std::size_t j = 0; j <= N; ++j) {
        for (std::size_t i = 0; i < n; ++i) delta(j, i) = rep.x_prime.path(j, i) - rep.x.path(j, i);
    }
    const VepsSeries ser = V_eps_series(delta, rep.eps, rep.params);

    std::vector<double> zdot(N + 1, 0.0);
    for (std::size_t j = t0; j <= N; ++j) {
        const double t = grid.node(j);
        const auto& sj = ser.s[j];
        const auto g = rep.x.x.generator.at(j);
        const auto gp = rep.x_prime.x.generator.at(j);
        double inner = 0.0;
        for (std::size_t i = 0; i < n; ++i) inner += sj[i] * (g[i] - gp[i]);
        zdot[j] = inner + problem.H(t, rep.x_prime.path.at(j), sj) - problem.H(t, rep.x.path.at(j), sj) + rep.eps;
    }
    rep.z.assign(N + 1, z0);
    for (std::size_t j = t0 + 1; j <= N; ++j) rep.z[j] = rep.z[j - 1] + 0.5 * grid.step() * (zdot[j - 1] + zdot[j]);

    rep.veps = ser.value;
    const double tt0 = grid.node(t0);
    rep.max_increase = -std::numeric_limits<double>::infinity();
    for (std::size_t j = t0; j <= N; ++j) {
        rep.v.push_back(ser.value[j] + rep.z[j] - rep.eps * (grid.node(j) - tt0));
        if (rep.v.size() > 1) rep.max_increase = std::max(rep.max_increase, rep.v.back() - rep.v[rep.v.size() - 2]);
    }
    rep.tolerance = tolerance;
    rep.monotone = rep.max_increase <= tolerance;
    rep.final_lhs = rep.v.back();
    rep.final_rhs = rep.eps + z0;
    rep.final_bound = rep.final_lhs <= rep.final_rhs + tolerance;
    rep.delta_sigma = problem.sigma(rep.x.path) - problem.sigma(rep.x_prime.path);
    return rep;
}

double default_stability_eps(double value_scale) { return 1e-3 * std::max(1.0, std::abs(value_scale)); }

} // namespace fhj
