#include "fhj/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fhj/dynamics.hpp"
#include "fhj/fixtures.hpp"
#include "fhj/fraccalc.hpp"
#include "fhj/lyapunov.hpp"
#include "fhj/minimax.hpp"
#include "fhj/path_io.hpp"
#include "fhj/pathspace.hpp"

namespace fhj::cli {

using nlohmann::json;

namespace {

// Reads keys from a JSON object, recording every resolved value for the
// params echo. Unknown keys are rejected up front.
class Config {
public:
    Config(json j, const std::set<std::string>& allowed) : j_(std::move(j)) {
        if (!j_.is_object()) throw ConfigError("configuration must be a JSON object");
        for (const auto& [key, value] : j_.items()) {
            if (!allowed.contains(key)) throw ConfigError("unknown configuration key '" + key + "'");
        }
    }

    double number(const std::string& key, double fallback, double lo = -HUGE_VAL, double hi = HUGE_VAL) {
        double v = fallback;
        if (j_.contains(key)) {
            if (!j_[key].is_number()) throw ConfigError("'" + key + "' must be a number");
            v = j_[key].get<double>();
        }
        if (!std::isfinite(v) || v < lo || v > hi) {
            throw ConfigError("'" + key + "' = " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]");
        }
        echo_[key] = v;
        return v;
    }

    std::size_t count(const std::string& key, std::size_t fallback, std::size_t lo = 0,
                      std::size_t hi = std::numeric_limits<std::size_t>::max()) {
        std::size_t v = fallback;
        if (j_.contains(key)) {
            if (!nonnegative_integer(j_[key])) throw ConfigError("'" + key + "' must be a nonnegative integer");
            v = j_[key].get<std::size_t>();
        }
        if (v < lo || v > hi) throw ConfigError("'" + key + "' = " + std::to_string(v) + " out of range");
        echo_[key] = v;
        return v;
    }

    std::uint64_t seed(std::uint64_t fallback = 1) {
        std::uint64_t v = fallback;
        if (j_.contains("seed")) {
            if (!nonnegative_integer(j_["seed"])) throw ConfigError("'seed' must be a nonnegative integer");
            v = j_["seed"].get<std::uint64_t>();
        }
        echo_["seed"] = v;
        return v;
    }

    std::string text(const std::string& key, const std::string& fallback, const std::vector<std::string>& choices) {
        std::string v = fallback;
        if (j_.contains(key)) {
            if (!j_[key].is_string()) throw ConfigError("'" + key + "' must be a string");
            v = j_[key].get<std::string>();
        }
        if (!choices.empty() && std::ranges::find(choices, v) == choices.end()) {
            throw ConfigError("'" + key + "' has unsupported value '" + v + "'");
        }
        echo_[key] = v;
        return v;
    }

    std::vector<double> vector(const std::string& key, std::vector<double> fallback, std::size_t dim) {
        std::vector<double> v = std::move(fallback);
        if (j_.contains(key)) v = parse_vector(j_[key], key);
        if (v.size() == 1 && dim > 1) v.assign(dim, v[0]);
        if (v.size() != dim) throw ConfigError("'" + key + "' must have " + std::to_string(dim) + " components");
        echo_[key] = v;
        return v;
    }

    static bool nonnegative_integer(const json& v) {
        return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    const json& raw(const std::string& key) const { return j_.at(key); }
    void echo(const std::string& key, json v) { echo_[key] = std::move(v); }
    const json& echoed() const { return echo_; }

    static std::vector<double> parse_vector(const json& v, const std::string& key) {
        if (v.is_number()) return {v.get<double>()};
        if (!v.is_array() || v.empty()) throw ConfigError("'" + key + "' must be a number or a nonempty array");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError("'" + key + "' must contain numbers only");
            out.push_back(e.get<double>());
        }
        return out;
    }

private:
    json j_;
    json echo_ = json::object();
};

struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    json detail = json::object();
};

struct Report {
    json params;
    std::vector<Check> checks;
    json results = json::object();
    std::map<std::string, std::string> files;

    void add(Check c) { checks.push_back(std::move(c)); }
    bool pass() const {
        return std::ranges::all_of(checks, [](const Check& c) { return c.pass; });
    }
};

Check make_check(std::string name, double value, double tol, bool pass, json detail = json::object()) {
    return Check{std::move(name), value, tol, pass, std::move(detail)};
}

Check at_most(std::string name, double value, double tol, json detail = json::object()) {
    return make_check(std::move(name), value, tol, value <= tol, std::move(detail));
}

const std::set<std::string> kProblemKeys{"fixture", "dim", "alpha", "T", "N", "params", "seed"};

std::set<std::string> keys(std::set<std::string> base, std::initializer_list<std::string> extra) {
    base.insert(extra.begin(), extra.end());
    return base;
}

struct ProblemSetup {
    HamiltonianProblem problem;
    FixtureOptions options;
    std::string fixture;
};

ProblemSetup read_problem(Config& c, const std::string& default_fixture, std::size_t default_N) {
    ProblemSetup s;
    std::vector<std::string> names;
    for (const auto& f : fixture_registry()) names.push_back(f.name);
    s.fixture = c.text("fixture", default_fixture, names);
    s.options.dim = c.count("dim", 1, 1, 16);
    s.options.alpha = c.number("alpha", 0.5, 1e-6, 1.0 - 1e-6);
    s.options.horizon = c.number("T", 1.0, 1e-9);
    s.options.steps = c.count("N", default_N, 2, 1u << 20);
    if (c.has("params")) {
        const json& p = c.raw("params");
        if (!p.is_object()) throw ConfigError("'params' must be an object");
        for (const auto& [key, value] : p.items()) s.options.params[key] = Config::parse_vector(value, "params." + key);
    }
    try {
        s.problem = make_fixture(s.fixture, s.options);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    json echo = json::object();
    for (const auto& [key, value] : s.options.params) echo[key] = value;
    c.echo("params", echo);
    return s;
}

std::vector<double> fixture_vector(const ProblemSetup& s, const std::string& key) {
    auto it = s.options.params.find(key);
    if (it == s.options.params.end()) return std::vector<double>(s.options.dim, 1.0);
    if (it->second.size() == 1) return std::vector<double>(s.options.dim, it->second[0]);
    return it->second;
}

SearchBudget read_budget(Config& c) {
    SearchBudget b;
    if (c.has("budget")) {
        Config bc(c.raw("budget"), {"J", "K", "magnitudes", "beam_width", "max_enumeration", "threads"});
        b.J = bc.count("J", b.J, 1, 12);
        b.K = bc.count("K", b.K, 1, 64);
        if (c.raw("budget").contains("magnitudes")) {
            b.magnitudes = Config::parse_vector(c.raw("budget")["magnitudes"], "budget.magnitudes");
            for (double m : b.magnitudes) {
                if (!(m >= 0.0 && m <= 1.0)) throw ConfigError("budget magnitudes must lie in [0, 1]");
            }
        }
        b.beam_width = bc.count("beam_width", b.beam_width, 1);
        b.max_enumeration = bc.count("max_enumeration", b.max_enumeration);
        b.threads = bc.count("threads", b.threads);
    }
    c.echo("budget", json{{"J", b.J},
                          {"K", b.K},
                          {"magnitudes", b.magnitudes},
                          {"beam_width", b.beam_width},
                          {"max_enumeration", b.max_enumeration}});
    return b;
}

// "random" (seeded AC^alpha path), "zero", or {"generator": c}.
PathPoint read_history(Config& c, const HamiltonianProblem& problem, std::size_t t_index, std::mt19937_64& rng) {
    if (c.has("history") && c.raw("history").is_object()) {
        Config hc(c.raw("history"), {"generator"});
        const double g = hc.number("generator", 0.0);
        c.echo("history", hc.echoed());
        return constant_generator_history(problem.grid, problem.dim, g, problem.alpha, t_index);
    }
    const std::string kind = c.text("history", "random", {"random", "zero"});
    if (kind == "zero") return PathPoint{SampledPath(problem.grid, problem.dim, t_index), std::nullopt};
    GeneratorOptions go;
    go.amplitude = 0.5;
    return restrict(random_ac_path(problem.grid, problem.dim, problem.alpha, go, rng), t_index);
}

std::size_t time_index(Config& c, const std::string& key, double fallback, const Grid& grid, bool allow_horizon) {
    const double t = c.number(key, fallback, 0.0, grid.horizon());
    const std::size_t j = grid.nearest_index(t);
    if (!allow_horizon && j >= grid.steps()) throw ConfigError("'" + key + "' must lie before the horizon");
    return j;
}

std::string characteristic_csv(const Characteristic& ch) {
    std::ostringstream os;
    write_characteristic_csv(os, ch);
    return os.str();
}

// ---------------------------------------------------------------- fracops

Report cmd_fracops(Config& c) {
    Report r;
    const double alpha = c.number("alpha", 0.5, 1e-6, 1.0 - 1e-6);
    const double beta = c.number("beta", 0.3, 0.0, 1.0);
    if (alpha + beta > 1.0) throw ConfigError("alpha + beta must not exceed 1");
    const double T = c.number("T", 1.0, 1e-9);
    const std::size_t N = c.count("N", 2000, 2);
    const std::size_t samples = c.count("samples", 20, 1);
    std::mt19937_64 rng(c.seed());
    const Grid grid(T, N);

    const SampledPath one = SampledPath::constant(grid, N, std::vector<double>{1.0});
    const SampledPath I = rl_integral(one, alpha);
    double rel = 0.0;
    for (std::size_t j = 1; j <= N; ++j) {
        const double exact = std::pow(grid.node(j), alpha) / gamma_fn(alpha + 1.0);
        rel = std::max(rel, std::abs(I(j, 0) - exact) / exact);
    }
    r.add(at_most("rl_integral_constant_rel_error", rel, 1e-3));
    // psi(0) != 0 leaves an O(h^(alpha+beta)) layer at the first nodes; reported only.
    SampledPath smooth(grid, 1, N);
    for (std::size_t j = 0; j <= N; ++j) smooth(j, 0) = grid.node(j) * std::exp(grid.node(j));
    r.add(at_most("semigroup_error", check_semigroup(smooth, alpha, beta), 1e-3,
                  json{{"psi", "t exp(t)"}, {"constant_psi_error", check_semigroup(one, alpha, beta)}}));

    double worst = 0.0;
    std::optional<AcPath> first;
    SampledPath recovered_first(grid, 1, 0);
    for (std::size_t k = 0; k < samples; ++k) {
        GeneratorOptions go;
        go.family = static_cast<GeneratorFamily>(k % 3);
        const AcPath x = random_ac_path(grid, 1, alpha, go, rng);
        const SampledPath rec = caputo_derivative(x.realize(), alpha);
        double err = 0.0;
        for (std::size_t j = 0; j <= N; ++j) err = std::max(err, std::abs(rec(j, 0) - x.generator(j, 0)));
        worst = std::max(worst, err / std::max(x.generator.max_norm(), 1e-12));
        if (!first) {
            first = x;
            recovered_first = rec;
        }
    }
    r.add(at_most("caputo_round_trip_rel_error", worst, 1e-2, json{{"samples", samples}}));

    const SampledPath xr = first->realize();
    std::vector<std::vector<double>> rows;
    for (std::size_t j = 0; j <= N; ++j) rows.push_back({grid.node(j), xr(j, 0), first->generator(j, 0), recovered_first(j, 0)});
    std::ostringstream os;
    write_table_csv(os, {"t", "x1", "psi1", "psi1_recovered"}, rows);
    r.files["fracops_sample.csv"] = os.str();
    return r;
}

// ---------------------------------------------------------------- metric

Report cmd_metric(Config& c) {
    Report r;
    const double T = c.number("T", 1.0, 1e-9);
    const std::size_t N = c.count("N", 500, 2);
    const std::size_t dim = c.count("dim", 1, 1, 16);
    const std::size_t samples = c.count("samples", 200, 1);
    std::mt19937_64 rng(c.seed());
    const Grid grid(T, N);
    std::uniform_int_distribution<std::size_t> idx(0, N);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::size_t upper = 0, time = 0, dev = 0;
    double worst_upper = -HUGE_VAL, worst_time = -HUGE_VAL, worst_dev = -HUGE_VAL;
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < samples; ++k) {
        const SampledPath w = random_smooth_path(grid, dim, N, rng);
        SampledPath w2 = random_smooth_path(grid, dim, N, rng);
        // Half of the pairs are small perturbations of each other.
        const double mix = (k % 2 == 0) ? 0.1 * unif(rng) : 1.0;
        for (std::size_t j = 0; j <= N; ++j) {
            for (std::size_t i = 0; i < dim; ++i) w2(j, i) = w(j, i) + mix * (w2(j, i) - w(j, i));
        }
        std::size_t a = idx(rng), b = idx(rng);
        if (a < b) std::swap(a, b);
        const PathPoint p = restrict(w, a), q = restrict(w2, b);
        const DistBounds db = check_dist_bounds(p, q);
        upper += db.upper;
        time += db.time;
        dev += db.deviation_ok;
        worst_upper = std::max(worst_upper, db.distance - db.upper_rhs);
        worst_time = std::max(worst_time, db.time_gap - db.distance);
        worst_dev = std::max(worst_dev, db.deviation - db.deviation_rhs);
        rows.push_back({static_cast<double>(k), p.time(), q.time(), db.distance, db.time_gap, db.deviation,
                        db.upper_rhs, db.deviation_rhs});
    }
    const double tol = 10.0 * grid.step();
    r.add(make_check("dist_upper_bound", worst_upper, tol, upper == samples, json{{"holding", upper}}));
    r.add(make_check("dist_time_lower_bound", worst_time, tol, time == samples, json{{"holding", time}}));
    r.add(make_check("dist_deviation_bound", worst_dev, tol, dev == samples, json{{"holding", dev}}));
    std::ostringstream os;
    write_table_csv(os, {"pair", "t_p", "t_q", "dist", "time_gap", "deviation", "upper_rhs", "deviation_rhs"}, rows);
    r.files["metric_pairs.csv"] = os.str();
    return r;
}

// ---------------------------------------------------------------- characteristics

SelectionPolicy read_policy(Config& c, const HamiltonianProblem& problem, std::size_t start) {
    SelectionPolicy pol{start, problem.grid.steps(), {}};
    if (!c.has("policy")) {
        if (!problem.reference_velocities.empty()) {
            pol.pieces.emplace_back(ConstantDirective{problem.reference_velocities.front()});
        } else {
            pol.pieces.emplace_back(ConstantDirective{std::vector<double>(problem.dim, 0.0)});
        }
        c.echo("policy", "reference");
        return pol;
    }
    const json& list = c.raw("policy");
    if (!list.is_array() || list.empty()) throw ConfigError("'policy' must be a nonempty array of pieces");
    for (const auto& piece : list) {
        Config pc(piece, {"direction", "fraction", "velocity"});
        if (piece.contains("velocity")) {
            if (piece.contains("direction") || piece.contains("fraction")) {
                throw ConfigError("a policy piece has either 'velocity' or 'direction'/'fraction'");
            }
            pol.pieces.emplace_back(ConstantDirective{pc.vector("velocity", {}, problem.dim)});
        } else {
            auto d = pc.vector("direction", std::vector<double>(problem.dim, 1.0), problem.dim);
            const double nd = norm(d);
            if (!(nd > 0.0)) throw ConfigError("policy direction must be nonzero");
            for (double& v : d) v /= nd;
            pol.pieces.emplace_back(ScaledDirective{d, pc.number("fraction", 1.0, 0.0, 1.0)});
        }
    }
    c.echo("policy", list);
    return pol;
}

Report cmd_characteristics(Config& c) {
    Report r;
    ProblemSetup s = read_problem(c, "drift", 1000);
    const auto& problem = s.problem;
    std::mt19937_64 rng(c.seed());
    const std::size_t i0 = time_index(c, "t0", 0.3, problem.grid, false);
    const PathPoint p = read_history(c, problem, i0, rng);
    const auto sv = c.vector("s", std::vector<double>(problem.dim, 1.0), problem.dim);
    const double z0 = c.number("z0", 0.0);
    const SelectionPolicy pol = read_policy(c, problem, i0);
    Characteristic ch = [&] {
        try {
            return integrate_characteristic(problem, p, z0, sv, pol);
        } catch (const std::domain_error& e) {
            throw ConfigError(e.what());
        }
    }();
    const InclusionDefect d = inclusion_defect(problem, ch);
    r.add(at_most("velocity_excess", d.velocity_excess, 1e-9));
    r.add(at_most("cost_rate_error", d.cost_rate_error, 1e-9));
    double hist = 0.0, zhist = 0.0;
    for (std::size_t j = 0; j <= i0; ++j) {
        hist = std::max(hist, distance(ch.path.at(j), p.path.at(j)));
        zhist = std::max(zhist, std::abs(ch.z_at(j) - z0));
    }
    r.add(at_most("history_fidelity", hist, 1e-12));
    r.add(at_most("cost_history_fidelity", zhist, 0.0));
    r.results["x_T"] = std::vector<double>(ch.path.at(problem.grid.steps()).begin(), ch.path.at(problem.grid.steps()).end());
    r.results["z_T"] = ch.z_at(problem.grid.steps());
    r.results["sigma"] = problem.sigma(ch.path);
    r.files["characteristic.csv"] = characteristic_csv(ch);
    return r;
}

// ---------------------------------------------------------------- lyapunov-check

struct SweepStats {
    double max = -HUGE_VAL;
    double sum = 0.0;
    std::size_t count = 0;
    void add(double v) {
        max = std::max(max, v);
        sum += v;
        ++count;
    }
    double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
};

GeneratorOptions sweep_generator(std::size_t k, double T) {
    GeneratorOptions go;
    go.family = static_cast<GeneratorFamily>(k % 3);
    go.vanish_at_zero = true;
    go.transition = T / 50.0;
    return go;
}

double refinement_change(const DissipationReport& coarse, const DissipationReport& fine) {
    double d = 0.0;
    for (std::size_t j = 1; j + 1 < coarse.residual.size(); ++j) {
        const double a = coarse.residual[j], b = fine.residual[2 * j];
        if (!std::isnan(a) && !std::isnan(b)) d = std::max(d, std::abs(a - b));
    }
    return d;
}

Report cmd_lyapunov(Config& c) {
    Report r;
    const double alpha = c.number("alpha", 0.5, 1e-6, 1.0 - 1e-6);
    const double lambda = c.number("lambda", 0.4, 1e-9);
    const double T = c.number("T", 1.0, 1e-9);
    const double R = c.number("R", 2.0, 1e-9);
    const std::size_t N = c.count("N", 500, 4);
    const std::size_t samples = c.count("samples", 20, 1);
    std::mt19937_64 rng(c.seed());
    LyapunovParams params = [&] {
        try {
            return build_lyapunov_params_for_rate(alpha, lambda, T);
        } catch (const std::overflow_error& e) {
            throw ConfigError(e.what());
        }
    }();
    params.R = R;
    r.results["lyapunov_params"] = json{{"alpha", params.alpha},   {"lambda", params.lambda},
                                        {"m", params.m},           {"beta", params.beta},
                                        {"mu", params.mu},         {"lambda_star", params.lambda_star},
                                        {"lambda_H", params.lambda_H}, {"R", params.R},
                                        {"T", params.T},           {"eps0", params.eps0}};
    c.echo("m", params.m);

    const Grid grid(T, N), fine(T, 2 * N);
    const double eps = params.eps0 > 0.0 ? 0.5 * params.eps0 : 0.0;
    SweepStats diss, veps_diss, lower, veps_neg;
    double diss_change = 0.0, veps_change = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        const GeneratorOptions go = sweep_generator(k, T);
        std::mt19937_64 twin = rng;
        const AcPath x = random_ac_path(grid, 1, alpha, go, rng);
        const AcPath xf = random_ac_path(fine, 1, alpha, go, twin);
        const DissipationReport d = dissipation_residual(x, params);
        diss.add(d.max_residual);
        diss_change = std::max(diss_change, refinement_change(d, dissipation_residual(xf, params)));

        const SampledPath w = x.realize();
        const PathPoint pend = restrict(w, N);
        for (std::size_t i = 0; i < params.m; ++i) {
            const double V = V_star_beta_mu(pend, params.beta[i], params.mu[i], alpha);
            const double bound = std::exp(-params.mu[i] * std::pow(T, alpha + params.beta[i])) *
                                 rl_integral_at(q_path(pend), 1.0 - alpha, N)[0];
            lower.add(bound - V);
        }
        if (eps > 0.0) {
            const DissipationReport dv = V_eps_dissipation_residual(x, eps, params);
            veps_diss.add(dv.max_residual);
            veps_change = std::max(veps_change, refinement_change(dv, V_eps_dissipation_residual(xf, eps, params)));
            veps_neg.add(-V_eps(pend, eps, params));
        }
    }
    const double diss_tol = 4.0 * diss_change;
    r.add(make_check("dissipation_residual", diss.max, diss_tol, diss.max <= diss_tol,
                     json{{"mean", diss.mean()}, {"calibration", "4 x change under one grid doubling"}}));
    r.add(make_check("v_star_lower_bound", lower.max, 1e-6, lower.max <= 1e-6, json{{"mean", lower.mean()}}));
    if (eps > 0.0) {
        const double vtol = 4.0 * veps_change;
        r.add(make_check("v_eps_dissipation_residual", veps_diss.max, vtol, veps_diss.max <= vtol,
                         json{{"mean", veps_diss.mean()}, {"eps", eps}}));
        r.add(at_most("v_eps_negativity", veps_neg.max, 0.0));
        const SampledPath flat = SampledPath::constant(grid, N, std::vector<double>{0.3});
        const double vflat = V_eps(restrict(flat, N), eps, params);
        r.add(at_most("v_eps_flat_minus_eps", vflat - eps, 0.0));
    } else {
        r.add(make_check("eps0_positive", params.eps0, 0.0, false));
    }
    return r;
}

// ---------------------------------------------------------------- value

std::vector<std::vector<double>> read_s_list(Config& c, std::size_t dim) {
    std::vector<std::vector<double>> out;
    if (c.has("s_list")) {
        const json& l = c.raw("s_list");
        if (!l.is_array() || l.empty()) throw ConfigError("'s_list' must be a nonempty array");
        for (const auto& e : l) {
            auto v = Config::parse_vector(e, "s_list");
            if (v.size() == 1 && dim > 1) v.assign(dim, v[0]);
            if (v.size() != dim) throw ConfigError("every 's_list' entry must have " + std::to_string(dim) + " components");
            out.push_back(std::move(v));
        }
    } else {
        out = {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0), std::vector<double>(dim, -1.0)};
    }
    c.echo("s_list", out);
    return out;
}

Report cmd_value(Config& c) {
    Report r;
    ProblemSetup s = read_problem(c, "drift", 200);
    const auto& problem = s.problem;
    std::mt19937_64 rng(c.seed());
    const std::size_t i0 = time_index(c, "t0", 0.3, problem.grid, true);
    const PathPoint p = read_history(c, problem, i0, rng);
    const auto s_list = read_s_list(c, problem.dim);
    const SearchBudget budget = read_budget(c);
    const Bracket b = envelope_bracket(problem, p, s_list, budget);
    r.results["lower"] = b.lower;
    r.results["upper"] = b.upper;
    r.add(make_check("sandwich", b.lower - b.upper, 0.0, b.lower <= b.upper));
    if (s.fixture == "drift") {
        const double fv = drift_forecast_value(p, fixture_vector(s, "a"), fixture_vector(s, "b"), problem.alpha);
        r.results["forecast_value"] = fv;
        const double tol = 1e-9 * std::max(1.0, std::abs(fv));
        r.add(make_check("forecast_in_bracket", std::max(b.lower - fv, fv - b.upper), tol,
                         b.lower <= fv + tol && fv <= b.upper + tol));
    }
    std::vector<std::vector<double>> rows;
    std::vector<std::string> header{"s_index"};
    for (std::size_t i = 0; i < problem.dim; ++i) header.push_back("s" + std::to_string(i + 1));
    header.push_back("psi_lower");
    header.push_back("psi_upper");
    for (std::size_t k = 0; k < s_list.size(); ++k) {
        std::vector<double> row{static_cast<double>(k)};
        row.insert(row.end(), s_list[k].begin(), s_list[k].end());
        row.push_back(b.lower_per_s[k]);
        row.push_back(b.upper_per_s[k]);
        rows.push_back(std::move(row));
    }
    std::ostringstream os;
    write_table_csv(os, header, rows);
    r.files["value_envelopes.csv"] = os.str();
    return r;
}

// ---------------------------------------------------------------- stability

Report cmd_stability(Config& c) {
    Report r;
    ProblemSetup s = read_problem(c, "drift", 200);
    const auto& problem = s.problem;
    std::mt19937_64 rng(c.seed());
    const std::string kind = c.text("candidate", "forecast", {"forecast", "memory-blind", "constant"});
    CandidateSolution phi;
    if (kind == "forecast") {
        if (s.fixture != "drift") throw ConfigError("the forecast candidate is defined for the drift fixture only");
        phi = drift_forecast_candidate(fixture_vector(s, "a"), fixture_vector(s, "b"), problem.alpha);
    } else if (kind == "memory-blind") {
        phi = memory_blind_candidate(c.vector("a", std::vector<double>(problem.dim, 1.0), problem.dim));
    } else {
        const double v = c.number("value", 0.0);
        phi.value = [v](const PathPoint&) { return v; };
    }
    const std::size_t i0 = time_index(c, "t0", 0.3, problem.grid, false);
    const std::size_t i1 = time_index(c, "t1", std::min(problem.grid.horizon(), problem.grid.node(i0) + 0.2),
                                      problem.grid, true);
    if (i1 <= i0) throw ConfigError("'t1' must exceed 't0' by at least one grid step");
    const PathPoint p = read_history(c, problem, i0, rng);
    const auto sv = c.vector("s", std::vector<double>(problem.dim, 1.0), problem.dim);
    const SearchBudget budget = read_budget(c);
    const double phi0 = phi(p);
    const double eps = c.number("eps", default_stability_eps(phi0), 1e-15);

    const StabilityResult up = stability_check_upper(phi, problem, p, i1, sv, eps, budget);
    const StabilityResult lo = stability_check_lower(phi, problem, p, i1, sv, eps, budget);
    r.add(make_check("upper_stability", up.slack, eps, up.holds,
                     json{{"verdict", to_string(up.verdict)}, {"evaluated", up.evaluated}}));
    r.add(make_check("lower_stability", lo.slack, eps, lo.holds,
                     json{{"verdict", to_string(lo.verdict)}, {"evaluated", lo.evaluated}}));
    if (phi.has_derivatives()) {
        r.add(at_most("classical_residual", classical_residual(phi, problem, p), 1e-6));
    }
    r.results["phi"] = phi0;
    if (up.witness) r.files["stability_upper_witness.csv"] = characteristic_csv(*up.witness);
    if (lo.witness) r.files["stability_lower_witness.csv"] = characteristic_csv(*lo.witness);
    return r;
}

// ---------------------------------------------------------------- witness

SelectionPolicy random_policy(const std::vector<Directive>& menu, std::size_t J, std::size_t start, std::size_t end,
                              std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, menu.size() - 1);
    SelectionPolicy pol{start, end, {}};
    for (std::size_t l = 0; l < J; ++l) pol.pieces.push_back(menu[pick(rng)]);
    return pol;
}

Report cmd_witness(Config& c) {
    Report r;
    ProblemSetup s = read_problem(c, "nonlinear", 200);
    const auto& problem = s.problem;
    std::mt19937_64 rng(c.seed());
    const std::size_t pairs = c.count("pairs", 50, 1);
    const double eps_fraction = c.number("eps_fraction", 0.1, 1e-12, 1.0);
    const double tol = c.number("tolerance", 1e-9, 0.0);
    const SearchBudget budget = read_budget(c);
    const auto menu = policy_menu(problem, budget);
    const std::size_t N = problem.grid.steps();

    std::size_t monotone = 0, bounded = 0;
    double worst_increase = -HUGE_VAL, worst_gap = -HUGE_VAL;
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < pairs; ++k) {
        GeneratorOptions go;
        go.amplitude = 0.5;
        const AcPath hist = random_ac_path(problem.grid, problem.dim, problem.alpha, go, rng);
        const std::size_t i0 = std::uniform_int_distribution<std::size_t>(0, N / 2)(rng);
        const PathPoint p = restrict(hist, i0);
        const SelectionPolicy f = random_policy(menu, budget.J, i0, N, rng);
        const SelectionPolicy fp = random_policy(menu, budget.J, i0, N, rng);
        const WitnessReport probe = comparison_witness(problem, p, -1.0, f, fp);
        const WitnessReport w = comparison_witness(problem, p, probe.eps * eps_fraction, f, fp, 0.0, tol);
        monotone += w.monotone;
        bounded += w.final_bound;
        worst_increase = std::max(worst_increase, w.max_increase);
        worst_gap = std::max(worst_gap, w.final_lhs - w.final_rhs);
        if (k == 0) {
            for (std::size_t j = 0; j < w.v.size(); ++j) {
                rows.push_back({problem.grid.node(i0 + j), w.v[j], w.veps[i0 + j], w.z[i0 + j]});
            }
        }
    }
    r.add(make_check("v_nonincreasing", worst_increase, tol, monotone == pairs, json{{"holding", monotone}}));
    r.add(make_check("final_bound", worst_gap, tol, bounded == pairs, json{{"holding", bounded}}));
    std::ostringstream os;
    write_table_csv(os, {"t", "v", "V_eps", "z"}, rows);
    r.files["witness_series.csv"] = os.str();
    return r;
}

// ---------------------------------------------------------------- list-fixtures

Report cmd_list_fixtures(Config& c) {
    Report r;
    const std::uint64_t seed = c.seed();
    const double R = c.number("R", 2.0, 1e-9);
    json list = json::array();
    for (const auto& spec : fixture_registry()) {
        json params = json::array();
        for (const auto& p : spec.params) {
            params.push_back(json{{"name", p.name},
                                  {"description", p.description},
                                  {"default", p.default_value},
                                  {"per_component", p.per_component}});
        }
        bool ok = true;
        json checks = json::array();
        for (std::size_t dim : {1u, 2u}) {
            FixtureOptions fo;
            fo.dim = dim;
            const HamiltonianProblem prob = make_fixture(spec.name, fo);
            const AssumptionReport a = spot_check_assumptions(prob, R, 2000, seed);
            ok = ok && a.ok();
            checks.push_back(json{{"dim", dim},
                                  {"growth_ratio", a.growth_ratio},
                                  {"lipschitz_ratio", a.lipschitz_ratio},
                                  {"ok", a.ok()}});
        }
        list.push_back(json{{"name", spec.name}, {"description", spec.description}, {"params", params},
                            {"assumption_checks", checks}});
        r.add(make_check("assumptions_" + spec.name, 0.0, 0.0, ok));
    }
    r.results["fixtures"] = list;
    return r;
}

// ---------------------------------------------------------------- verify

Report merge_suite(const std::string& prefix, Report&& sub, Report& into) {
    for (auto& ch : sub.checks) {
        ch.name = prefix + "." + ch.name;
        into.add(std::move(ch));
    }
    return std::move(into);
}

Report cmd_verify(Config& c, const std::string& suite) {
    Report r;
    const std::uint64_t seed = c.seed();
    const json seed_only{{"seed", seed}};
    auto sub = [&](const std::string& name, json cfg, const std::set<std::string>& allowed,
                   const std::function<Report(Config&)>& fn) {
        Config sc(std::move(cfg), allowed);
        r = merge_suite(name, fn(sc), r);
    };
    const bool all = suite == "all";
    if (all || suite == "fraccalc") {
        for (double a : {0.2, 0.3, 0.5, 0.8}) {
            sub("fraccalc.alpha" + std::to_string(a).substr(0, 3),
                json{{"seed", seed}, {"alpha", a}, {"beta", std::min(0.3, 1.0 - a)}, {"samples", 6}},
                {"seed", "alpha", "beta", "samples"}, cmd_fracops);
        }
    }
    if (all || suite == "pathspace") {
        sub("pathspace", json{{"seed", seed}, {"N", 200}, {"samples", 50}}, {"seed", "N", "samples"}, cmd_metric);
    }
    if (all || suite == "dynamics") {
        for (const auto& f : fixture_registry()) {
            sub("dynamics." + f.name, json{{"seed", seed}, {"fixture", f.name}, {"N", 400}},
                {"seed", "fixture", "N"}, cmd_characteristics);
        }
        // Constant generator from zero history: x(T) = T^alpha / Gamma(alpha + 1).
        const HamiltonianProblem prob = make_fixture("drift", FixtureOptions{});
        const PathPoint p{SampledPath(prob.grid, 1, 0), std::nullopt};
        const Characteristic ch = integrate_characteristic(prob, p, 0.0, std::vector<double>{1.0},
                                                           SelectionPolicy{0, prob.grid.steps(), {ConstantDirective{{1.0}}}});
        const double exact = 1.0 / gamma_fn(1.5);
        r.add(at_most("dynamics.constant_generator_error", std::abs(ch.path(prob.grid.steps(), 0) - exact), 1e-6));
    }
    if (all || suite == "lyapunov") {
        for (double a : {0.5, 0.3, 0.2}) {
            sub("lyapunov.alpha" + std::to_string(a).substr(0, 3),
                json{{"seed", seed}, {"alpha", a}, {"samples", 6}, {"N", 250}},
                {"seed", "alpha", "samples", "N"}, cmd_lyapunov);
        }
    }
    if (all || suite == "minimax") {
        json small_budget{{"J", 3}};
        sub("minimax.value", json{{"seed", seed}, {"N", 100}, {"budget", small_budget}},
            {"seed", "N", "budget"}, cmd_value);
        sub("minimax.stability", json{{"seed", seed}, {"N", 100}, {"budget", small_budget}},
            {"seed", "N", "budget"}, cmd_stability);
        sub("minimax.witness", json{{"seed", seed}, {"N", 100}, {"pairs", 10}}, {"seed", "N", "pairs"},
            cmd_witness);
    }
    (void)seed_only;
    return r;
}

// ---------------------------------------------------------------- dispatch

struct CommandSpec {
    std::string name;
    std::string help;
    std::set<std::string> keys;
};

const std::vector<CommandSpec>& command_specs() {
    static const std::vector<CommandSpec> specs{
        {"fracops", "Riemann-Liouville and Caputo oracles", {"alpha", "beta", "T", "N", "seed", "samples"}},
        {"metric", "metric bounds on seeded path pairs", {"T", "N", "dim", "seed", "samples"}},
        {"characteristics", "integrate one characteristic",
         keys(kProblemKeys, {"t0", "history", "s", "z0", "policy"})},
        {"lyapunov-check", "Lyapunov functional inequalities",
         {"alpha", "lambda", "T", "R", "N", "seed", "samples"}},
        {"value", "envelope bracket", keys(kProblemKeys, {"t0", "history", "s_list", "budget"})},
        {"stability", "upper/lower stability checks",
         keys(kProblemKeys, {"candidate", "value", "a", "t0", "t1", "history", "s", "eps", "budget"})},
        {"witness", "comparison monotone witness",
         keys(kProblemKeys, {"pairs", "eps_fraction", "tolerance", "budget"})},
        {"verify", "module property suites", {"seed"}},
        {"list-fixtures", "built-in problems", {"seed", "R"}},
    };
    return specs;
}

json check_json(const Check& c) {
    json j = c.detail;
    j["value"] = c.value;
    j["tolerance"] = c.tolerance;
    j["pass"] = c.pass;
    return j;
}

} // namespace

std::vector<std::string> subcommands() {
    std::vector<std::string> out;
    for (const auto& s : command_specs()) out.push_back(s.name);
    return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fractional Hamilton-Jacobi minimax toolkit"};
    app.require_subcommand(1);
    std::string config_path, out_dir, suite = "all";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> grid_n;
    std::optional<double> alpha;
    std::map<std::string, CLI::App*> subs;
    for (const auto& spec : command_specs()) {
        CLI::App* sc = app.add_subcommand(spec.name, spec.help);
        sc->add_option("--config", config_path, "JSON configuration file");
        sc->add_option("--out", out_dir, "output directory");
        sc->add_option("--seed", seed, "random seed");
        sc->add_option("--grid-n", grid_n, "grid intervals N");
        if (spec.name == "lyapunov-check") sc->add_option("--alpha", alpha, "order alpha");
        if (spec.name == "verify") {
            sc->add_option("--suite", suite, "fraccalc, pathspace, dynamics, lyapunov, minimax or all")
                ->check(CLI::IsMember({"fraccalc", "pathspace", "dynamics", "lyapunov", "minimax", "all"}));
        }
        subs[spec.name] = sc;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitInvalidConfig;
    }
    const CommandSpec* spec = nullptr;
    for (const auto& s : command_specs()) {
        if (subs[s.name]->parsed()) spec = &s;
    }

    const auto start = std::chrono::steady_clock::now();
    Report report;
    json echo;
    try {
        json cfg = json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("cannot open configuration file '" + config_path + "'");
            try {
                cfg = json::parse(in);
            } catch (const json::parse_error& e) {
                throw ConfigError(std::string("malformed JSON configuration: ") + e.what());
            }
            if (!cfg.is_object()) throw ConfigError("configuration must be a JSON object");
        }
        auto override_key = [&](const std::string& key, json v) {
            if (!spec->keys.contains(key)) throw ConfigError("--" + key + " is not used by '" + spec->name + "'");
            cfg[key] = std::move(v);
        };
        if (seed) override_key("seed", *seed);
        if (grid_n) override_key("N", *grid_n);
        if (alpha) override_key("alpha", *alpha);

        Config c(cfg, spec->keys);
        const std::string& name = spec->name;
        if (name == "fracops") report = cmd_fracops(c);
        else if (name == "metric") report = cmd_metric(c);
        else if (name == "characteristics") report = cmd_characteristics(c);
        else if (name == "lyapunov-check") report = cmd_lyapunov(c);
        else if (name == "value") report = cmd_value(c);
        else if (name == "stability") report = cmd_stability(c);
        else if (name == "witness") report = cmd_witness(c);
        else if (name == "verify") report = cmd_verify(c, suite);
        else report = cmd_list_fixtures(c);
        echo = c.echoed();
        if (name == "verify") echo["suite"] = suite;
    } catch (const ConfigError& e) {
        err << "invalid configuration: " << e.what() << "\n";
        return kExitInvalidConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json doc;
    doc["command"] = spec->name;
    doc["params"] = echo;
    doc["checks"] = json::object();
    for (const auto& ch : report.checks) doc["checks"][ch.name] = check_json(ch);
    doc["results"] = report.results;
    doc["pass"] = report.pass();
    doc["timing"] = json{{"wall_seconds", seconds}};

    if (out_dir.empty()) {
        out << doc.dump(2) << "\n";
    } else {
        std::filesystem::create_directories(out_dir);
        std::ofstream(std::filesystem::path(out_dir) / (spec->name + ".json")) << doc.dump(2) << "\n";
        for (const auto& [file, content] : report.files) {
            std::ofstream(std::filesystem::path(out_dir) / file) << content;
        }
        out << spec->name << ": " << (report.pass() ? "pass" : "FAIL") << " (" << report.checks.size()
            << " checks) -> " << out_dir << "\n";
    }
    for (const auto& ch : report.checks) {
        if (!ch.pass) err << "check failed: " << ch.name << " value " << ch.value << " tolerance " << ch.tolerance << "\n";
    }
    return report.pass() ? kExitOk : kExitCheckFailed;
}

} // namespace fhj::cli
