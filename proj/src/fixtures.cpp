#include "fhj/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fhj {

namespace {

constexpr double kNominalLambda = 0.1;

std::vector<double> param_vector(const FixtureOptions& o, const std::string& key, double fallback) {
    auto it = o.params.find(key);
    if (it == o.params.end()) return std::vector<double>(o.dim, fallback);
    if (it->second.size() == 1 && o.dim > 1) return std::vector<double>(o.dim, it->second[0]);
    if (it->second.size() != o.dim) {
        throw std::invalid_argument("fixture parameter '" + key + "' must have " + std::to_string(o.dim) +
                                    " components");
    }
    return it->second;
}

double param_scalar(const FixtureOptions& o, const std::string& key, double fallback) {
    auto it = o.params.find(key);
    if (it == o.params.end()) return fallback;
    if (it->second.size() != 1) throw std::invalid_argument("fixture parameter '" + key + "' must be a scalar");
    return it->second[0];
}

const FixtureSpec& find_spec(const std::string& name) {
    for (const auto& s : fixture_registry()) {
        if (s.name == name) return s;
    }
    throw std::invalid_argument("unknown fixture '" + name + "'");
}

TerminalCostFn linear_terminal(std::vector<double> a) {
    return [a = std::move(a)](const SampledPath& w) { return dot(a, w.at(w.last_index())); };
}

} // namespace

const std::vector<FixtureSpec>& fixture_registry() {
    static const std::vector<FixtureSpec> registry{
        {"drift",
         "H(t,x,s) = <b,s>, sigma(w) = <a,w(T)>; the solution is <a, forecast>",
         {{"a", "terminal weight", 1.0, true}, {"b", "drift velocity", 1.0, true}}},
        {"zero-hamiltonian",
         "H = 0 with velocity bound c, sigma(w) = <a,w(T)>",
         {{"a", "terminal weight", 1.0, true}, {"c", "velocity-bound constant c_H", 1.0, false}}},
        {"norm-terminal",
         "H(t,x,s) = <b,s>, sigma(w) = ||w(T)||^2",
         {{"b", "drift velocity", 1.0, true}}},
        {"nonlinear",
         "H(t,x,s) = c0 ||s|| + k <tanh x, s> + (k/2) cos x1, sigma(w) = <a,w(T)>; c_H = c0 + k, lambda_H = 1.5 k",
         {{"a", "terminal weight", 1.0, true},
          {"c0", "norm coefficient", 0.5, false},
          {"k", "state coupling", 0.1, false}}},
    };
    return registry;
}

HamiltonianProblem drift_problem(std::vector<double> a, std::vector<double> b, double alpha, Grid grid) {
    if (a.size() != b.size() || a.empty()) throw std::invalid_argument("drift_problem: a and b must share a dimension");
    HamiltonianProblem p;
    p.name = "drift";
    p.dim = a.size();
    p.alpha = alpha;
    p.grid = grid;
    p.c_H = std::max(norm(b), 1e-12);
    p.lambda_H = [](double) { return kNominalLambda; };
    p.hamiltonian = [b](double, std::span<const double>, std::span<const double> s) { return dot(b, s); };
    p.terminal_cost = linear_terminal(a);
    p.reference_velocities = {b};
    return p;
}

HamiltonianProblem make_fixture(const std::string& name, const FixtureOptions& o) {
    const FixtureSpec& spec = find_spec(name);
    for (const auto& [key, value] : o.params) {
        const bool known = std::ranges::any_of(spec.params, [&](const FixtureParam& fp) { return fp.name == key; });
        if (!known) throw std::invalid_argument("fixture '" + name + "' has no parameter '" + key + "'");
    }
    if (o.dim == 0) throw std::invalid_argument("fixture dimension must be positive");
    const Grid grid(o.horizon, o.steps);

    if (name == "drift") return drift_problem(param_vector(o, "a", 1.0), param_vector(o, "b", 1.0), o.alpha, grid);

    HamiltonianProblem p;
    p.name = name;
    p.dim = o.dim;
    p.alpha = o.alpha;
    p.grid = grid;
    if (name == "zero-hamiltonian") {
        const double c = param_scalar(o, "c", 1.0);
        if (!(c > 0.0)) throw std::invalid_argument("zero-hamiltonian: c must be positive");
        p.c_H = c;
        p.lambda_H = [](double) { return kNominalLambda; };
        p.hamiltonian = [](double, std::span<const double>, std::span<const double>) { return 0.0; };
        p.terminal_cost = linear_terminal(param_vector(o, "a", 1.0));
        p.reference_velocities = {std::vector<double>(o.dim, 0.0)};
    } else if (name == "norm-terminal") {
        auto b = param_vector(o, "b", 1.0);
        p.c_H = std::max(norm(b), 1e-12);
        p.lambda_H = [](double) { return kNominalLambda; };
        p.hamiltonian = [b](double, std::span<const double>, std::span<const double> s) { return dot(b, s); };
        p.terminal_cost = [](const SampledPath& w) {
            const double r = norm(w.at(w.last_index()));
            return r * r;
        };
        p.reference_velocities = {b};
    } else {
        const double c0 = param_scalar(o, "c0", 0.5);
        const double k = param_scalar(o, "k", 0.1);
        if (!(c0 > 0.0) || !(k > 0.0)) throw std::invalid_argument("nonlinear: c0 and k must be positive");
        p.c_H = c0 + k;
        p.lambda_H = [k](double) { return 1.5 * k; };
        p.hamiltonian = [c0, k](double, std::span<const double> x, std::span<const double> s) {
            double inner = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) inner += std::tanh(x[i]) * s[i];
            return c0 * norm(s) + k * inner + 0.5 * k * std::cos(x[0]);
        };
        p.terminal_cost = linear_terminal(param_vector(o, "a", 1.0));
    }
    return p;
}

double drift_forecast_value(const PathPoint& p, std::span<const double> a, std::span<const double> b, double alpha) {
    const std::size_t n = p.dim();
    if (a.size() != n || b.size() != n) throw std::invalid_argument("drift_forecast_value: dimension mismatch");
    const Grid& grid = p.grid();
    const std::size_t N = grid.steps();
    const std::size_t i0 = p.t_index();
    if (i0 == N) return dot(a, p.current());
    std::optional<SampledPath> recovered;
    const SampledPath* gen = nullptr;
    if (p.generator) {
        gen = &*p.generator;
    } else if (i0 > 0) {
        recovered = caputo_derivative(p.path, alpha);
        gen = &*recovered;
    }
    const ProductWeights w(alpha, grid.step(), N);
    std::vector<double> x(p.path.at(0).begin(), p.path.at(0).end());
    for (std::size_t k = 0; k <= N; ++k) {
        const double wk = w(N, k);
        for (std::size_t i = 0; i < n; ++i) {
            const double psi = (k <= i0 && i0 > 0) ? (*gen)(k, i) : b[i];
            x[i] += wk * psi;
        }
    }
    return dot(a, x);
}

CandidateSolution drift_forecast_candidate(std::vector<double> a, std::vector<double> b, double alpha) {
    CandidateSolution phi;
    phi.value = [a, b, alpha](const PathPoint& p) { return drift_forecast_value(p, a, b, alpha); };
    auto weight = [alpha](const PathPoint& p) {
        return std::pow(p.grid().horizon() - p.time(), alpha - 1.0) / gamma_fn(alpha);
    };
    phi.dt_alpha = [a, b, weight](const PathPoint& p) { return -dot(a, b) * weight(p); };
    phi.grad_alpha = [a, weight](const PathPoint& p) {
        std::vector<double> g(a);
        for (double& v : g) v *= weight(p);
        return g;
    };
    return phi;
}

CandidateSolution memory_blind_candidate(std::vector<double> a) {
    CandidateSolution phi;
    phi.value = [a](const PathPoint& p) { return dot(a, p.current()); };
    return phi;
}

PathPoint constant_generator_history(const Grid& grid, std::size_t dim, double c, double alpha, std::size_t t_index) {
    AcPath x = make_ac_path(std::vector<double>(dim, 0.0),
                            SampledPath::constant(grid, t_index, std::vector<double>(dim, c)), alpha);
    const SampledPath r = x.realize();
    for (std::size_t i = 0; i < dim; ++i) x.base[i] = -r(t_index, i);
    return restrict(x, t_index);
}

const char* to_string(GeneratorFamily f) {
    switch (f) {
    case GeneratorFamily::PiecewiseConstant: return "piecewise-constant";
    case GeneratorFamily::Trigonometric: return "trigonometric";
    case GeneratorFamily::RandomFourier: return "random-fourier";
    }
    return "unknown";
}

SampledPath random_generator(const Grid& grid, std::size_t dim, const GeneratorOptions& o, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    const std::size_t N = grid.steps();
    const double T = grid.horizon();
    const std::size_t modes = std::max<std::size_t>(o.modes, 1);
    SampledPath psi(grid, dim, N);
    for (std::size_t i = 0; i < dim; ++i) {
        switch (o.family) {
        case GeneratorFamily::PiecewiseConstant: {
            std::vector<double> levels(modes);
            for (auto& v : levels) v = o.amplitude * unif(rng);
            const double width = T / static_cast<double>(modes);
            for (std::size_t j = 0; j <= N; ++j) {
                const double t = grid.node(j);
                const auto piece = std::min(modes - 1, static_cast<std::size_t>(t / width));
                double v = levels[piece];
                const double into = t - static_cast<double>(piece) * width;
                if (piece > 0 && into < o.transition) {
                    const double r = into / o.transition;
                    v = (1.0 - r) * levels[piece - 1] + r * v;
                }
                // A short linear ramp from zero keeps psi(0) = 0 when requested.
                if (o.vanish_at_zero) v *= std::min(1.0, grid.node(j) * static_cast<double>(modes) / T);
                psi(j, i) = v;
            }
            break;
        }
        case GeneratorFamily::Trigonometric: {
            std::vector<double> c(3), ph(3);
            for (std::size_t k = 0; k < 3; ++k) {
                c[k] = o.amplitude * unif(rng) / static_cast<double>(k + 1);
                ph[k] = o.vanish_at_zero ? 0.0 : phase(rng);
            }
            for (std::size_t j = 0; j <= N; ++j) {
                double v = 0.0;
                for (std::size_t k = 0; k < 3; ++k) {
                    v += c[k] * std::sin(static_cast<double>(k + 1) * std::numbers::pi * grid.node(j) / T + ph[k]);
                }
                psi(j, i) = v;
            }
            break;
        }
        case GeneratorFamily::RandomFourier: {
            const double a0 = o.vanish_at_zero ? 0.0 : o.amplitude * unif(rng) / 2.0;
            std::vector<double> ca(modes), cb(modes);
            for (std::size_t k = 0; k < modes; ++k) {
                ca[k] = o.vanish_at_zero ? 0.0 : o.amplitude * unif(rng) / static_cast<double>(k + 1);
                cb[k] = o.amplitude * unif(rng) / static_cast<double>(k + 1);
            }
            for (std::size_t j = 0; j <= N; ++j) {
                double v = a0;
                const double th = 2.0 * std::numbers::pi * grid.node(j) / T;
                for (std::size_t k = 0; k < modes; ++k) {
                    const double kk = static_cast<double>(k + 1);
                    v += ca[k] * std::cos(kk * th) + cb[k] * std::sin(kk * th);
                }
                psi(j, i) = v;
            }
            break;
        }
        }
    }
    return psi;
}

AcPath random_ac_path(const Grid& grid, std::size_t dim, double alpha, const GeneratorOptions& options,
                      std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> x0(dim);
    for (auto& v : x0) v = unif(rng);
    return make_ac_path(std::move(x0), random_generator(grid, dim, options, rng), alpha);
}

SampledPath random_smooth_path(const Grid& grid, std::size_t dim, std::size_t last_index, std::mt19937_64& rng,
                               double amplitude) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const double T = grid.horizon();
    SampledPath w(grid, dim, last_index);
    for (std::size_t i = 0; i < dim; ++i) {
        const double c0 = amplitude * unif(rng);
        double ca[3], cb[3];
        for (int k = 0; k < 3; ++k) {
            ca[k] = amplitude * unif(rng) / (k + 1);
            cb[k] = amplitude * unif(rng) / (k + 1);
        }
        for (std::size_t j = 0; j <= last_index; ++j) {
            const double th = 2.0 * std::numbers::pi * grid.node(j) / T;
            double v = c0;
            for (int k = 0; k < 3; ++k) v += ca[k] * std::cos((k + 1) * th) + cb[k] * std::sin((k + 1) * th);
            w(j, i) = v;
        }
    }
    return w;
}

} // namespace fhj
