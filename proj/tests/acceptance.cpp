// Acceptance run: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "fhj/fixtures.hpp"
#include "fhj/fraccalc.hpp"
#include "fhj/lyapunov.hpp"
#include "fhj/minimax.hpp"
#include "fhj/pathspace.hpp"

using namespace fhj;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- 1

Outcome fractional_oracles() {
    constexpr std::size_t N = 2000;
    constexpr double kRel = 1e-3, kSemigroup = 1e-3, kRoundTrip = 1e-2, kSeconds = 10.0;
    const auto t0 = std::chrono::steady_clock::now();
    const Grid g(1.0, N);
    std::mt19937_64 rng(20240601);
    double rel = 0.0, semi = 0.0, trip = 0.0;
    SampledPath smooth(g, 1, N);
    for (std::size_t j = 0; j <= N; ++j) smooth(j, 0) = g.node(j) * std::exp(g.node(j));
    const SampledPath one = SampledPath::constant(g, N, std::vector<double>{1.0});
    for (double alpha : {0.2, 0.3, 0.5, 0.8}) {
        const SampledPath I = rl_integral(one, alpha);
        for (std::size_t j = 1; j <= N; ++j) {
            const double exact = std::pow(g.node(j), alpha) / std::tgamma(alpha + 1.0);
            rel = std::max(rel, std::abs(I(j, 0) - exact) / exact);
        }
        semi = std::max(semi, check_semigroup(smooth, alpha, std::min(0.3, 1.0 - alpha)));
        semi = std::max(semi, check_semigroup(one, alpha, 1.0 - alpha));
        for (int k = 0; k < 6; ++k) {
            GeneratorOptions go;
            go.family = static_cast<GeneratorFamily>(k % 3);
            const AcPath x = random_ac_path(g, 2, alpha, go, rng);
            const SampledPath rec = caputo_derivative(x.realize(), alpha);
            double e = 0.0;
            for (std::size_t j = 0; j <= N; ++j) {
                for (std::size_t i = 0; i < 2; ++i) e = std::max(e, std::abs(rec(j, i) - x.generator(j, i)));
            }
            trip = std::max(trip, e / x.generator.max_norm());
        }
    }
    const double secs = seconds_since(t0);
    return {rel < kRel && semi < kSemigroup && trip < kRoundTrip && secs < kSeconds,
            fmt("I^a 1 rel %.2e (<%g), semigroup %.2e (<%g), round trip %.2e (<%g), %.2fs", rel, kRel, semi,
                kSemigroup, trip, kRoundTrip, secs)};
}

// ---------------------------------------------------------------- 2

Outcome metric_bounds() {
    constexpr std::size_t N = 500, kPairs = 200;
    constexpr double kSeconds = 30.0;
    const auto t0 = std::chrono::steady_clock::now();
    const Grid g(1.0, N);
    const double tol = 10.0 * g.step();
    std::mt19937_64 rng(777);
    std::uniform_int_distribution<std::size_t> idx(0, N);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::size_t held = 0;
    double worst = -HUGE_VAL;
    for (std::size_t k = 0; k < kPairs; ++k) {
        const SampledPath w = random_smooth_path(g, 2, N, rng);
        SampledPath w2 = random_smooth_path(g, 2, N, rng);
        const double mix = (k % 2 == 0) ? 0.1 * unif(rng) : 1.0;
        for (std::size_t j = 0; j <= N; ++j) {
            for (std::size_t i = 0; i < 2; ++i) w2(j, i) = w(j, i) + mix * (w2(j, i) - w(j, i));
        }
        std::size_t a = idx(rng), b = idx(rng);
        if (a < b) std::swap(a, b);
        const DistBounds db = check_dist_bounds(restrict(w, a), restrict(w2, b), tol);
        held += db.all();
        worst = std::max({worst, db.distance - db.upper_rhs, db.time_gap - db.distance,
                          db.deviation - db.deviation_rhs});
    }
    const double secs = seconds_since(t0);
    return {held == kPairs && secs < kSeconds,
            fmt("%zu/%zu pairs, worst lhs - rhs %.2e (tol %.2e), %.2fs", held, kPairs, worst, tol, secs)};
}

// ---------------------------------------------------------------- 3

GeneratorOptions dissipation_generator(std::size_t k) {
    GeneratorOptions go;
    go.family = static_cast<GeneratorFamily>(k % 3);
    go.vanish_at_zero = true;
    go.transition = 1.0 / 50.0;
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

Outcome lyapunov_dissipation() {
    constexpr std::size_t N = 500, kPaths = 100;
    constexpr double kLambda = 0.4, kCalibration = 4.0, kShrink = 1.5, kSeconds = 300.0;
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;
    for (double alpha : {0.5, 0.3, 0.2}) {
        const LyapunovParams params = build_lyapunov_params_for_rate(alpha, kLambda, 1.0);
        const Grid g1(1.0, N), g2(1.0, 2 * N), g4(1.0, 4 * N);
        std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(alpha * 100));
        double worst = -HUGE_VAL, change_1 = 0.0, change_2 = 0.0;
        for (std::size_t k = 0; k < kPaths; ++k) {
            const GeneratorOptions go = dissipation_generator(k);
            std::mt19937_64 r2 = rng, r4 = rng;
            const DissipationReport d1 = dissipation_residual(random_ac_path(g1, 1, alpha, go, rng), params);
            const DissipationReport d2 = dissipation_residual(random_ac_path(g2, 1, alpha, go, r2), params);
            const DissipationReport d4 = dissipation_residual(random_ac_path(g4, 1, alpha, go, r4), params);
            worst = std::max(worst, d1.max_residual);
            change_1 = std::max(change_1, refinement_change(d1, d2));
            change_2 = std::max(change_2, refinement_change(d2, d4));
        }
        const double tol = kCalibration * change_1, tol_fine = kCalibration * change_2;
        const double shrink = tol / tol_fine;
        ok = ok && worst <= tol && shrink >= kShrink;
        detail += fmt("a=%.1f m=%zu max %.2e tol %.2e shrink %.2f; ", alpha, params.m, worst, tol, shrink);
    }
    const double secs = seconds_since(t0);
    return {ok && secs < kSeconds, detail + fmt("%.1fs", secs)};
}

// ---------------------------------------------------------------- 4

double caputo_sin(double t, double g) {
    double s = 0.0;
    for (int k = 0; k < 30; ++k) s += std::pow(-1.0, k) * std::pow(t, 2 * k + 1 - g) / std::tgamma(2 * k + 2 - g);
    return s;
}

Outcome derivative_formula() {
    constexpr std::size_t N = 200;
    const Grid g(1.0, N);
    const double h = g.step();
    const double tol = std::max(1e-3, 5.0 * h);
    double worst = 0.0;
    for (double gamma : {0.5, 0.7}) {
        for (double mu : {0.5, 1.0, 2.0}) {
            for (int f = 0; f < 3; ++f) {
                SampledPath r(g, 1, N), psi(g, 1, N);
                for (std::size_t j = 0; j <= N; ++j) {
                    const double t = g.node(j);
                    r(j, 0) = f == 0 ? t : f == 1 ? t * t : std::sin(t);
                    psi(j, 0) = f == 0   ? std::pow(t, 1 - gamma) / std::tgamma(2 - gamma)
                                : f == 1 ? 2 * std::pow(t, 2 - gamma) / std::tgamma(3 - gamma)
                                         : caputo_sin(t, gamma);
                }
                const auto V = V_gamma_mu_series(r, gamma, mu);
                const auto D = V_dot_explicit_series(make_ac_path({0.0}, psi, gamma), mu);
                for (std::size_t j = 1; j < N; ++j) worst = std::max(worst, std::abs((V[j + 1] - V[j - 1]) / (2 * h) - D[j]));
            }
        }
    }
    return {worst <= tol, fmt("max |FD - explicit| %.2e (tol %.2e) over 18 cases", worst, tol)};
}

// ---------------------------------------------------------------- 5

Outcome closed_form_value() {
    constexpr double kTarget = 0.7133003, kTol = 1e-4;
    const Grid g(1.0, 1000);
    const double v = V_gamma_mu(SampledPath::constant(g, 1000, std::vector<double>{1.0}), 0.5, 1.0);
    const double oracle = 2.0 * (1.0 - std::exp(-1.0)) / std::sqrt(std::numbers::pi);
    return {std::abs(v - kTarget) <= kTol && std::abs(v - oracle) <= 1e-10,
            fmt("V = %.8f, 2(1-1/e)/sqrt(pi) = %.8f, target %.7f +- %g", v, oracle, kTarget, kTol)};
}

// ---------------------------------------------------------------- 6

Outcome coupling() {
    constexpr std::size_t kPairs = 100;
    constexpr double R = 2.0, kTol = 1e-9;
    bool ok = true;
    std::string detail;
    for (const char* name : {"drift", "nonlinear"}) {
        FixtureOptions fo;
        fo.dim = 2;
        fo.steps = 200;
        const HamiltonianProblem prob = make_fixture(name, fo);
        const LyapunovParams params = build_lyapunov_params(prob.alpha, prob.lambda_H, R, 1.0);
        std::mt19937_64 rng(42);
        std::uniform_int_distribution<std::size_t> idx(1, fo.steps);
        double worst = -HUGE_VAL, worst_completion = HUGE_VAL;
        std::size_t n = 0;
        while (n < kPairs) {
            GeneratorOptions go;
            go.amplitude = 0.6;
            go.family = static_cast<GeneratorFamily>(n % 3);
            const AcPath a = random_ac_path(prob.grid, 2, prob.alpha, go, rng);
            AcPath b = random_ac_path(prob.grid, 2, prob.alpha, go, rng);
            b.base = a.base;
            const std::size_t j = idx(rng);
            const PathPoint pa = restrict(a, j), pb = restrict(b, j);
            if (pa.path.max_norm() > R || pb.path.max_norm() > R) continue;
            const double eps = params.eps0 * std::pow(0.1, static_cast<double>(n % 3));
            const CouplingReport rep = coupling_inequality_check(prob, pa, pb, eps, params);
            worst = std::max(worst, rep.value);
            worst_completion = std::min(worst_completion, rep.completion);
            ++n;
        }
        ok = ok && worst <= kTol && worst_completion >= -kTol;
        detail += fmt("%s: max %.2e, min completion %.2e; ", name, worst, worst_completion);
    }
    return {ok, detail + fmt("tol %g", kTol)};
}

// ---------------------------------------------------------------- 7

Outcome classical_consistency() {
    constexpr std::size_t N = 200, kConfigs = 10;
    constexpr double kSlack = 1e-2, kResidual = 1e-6, kBracket = 1e-9;
    const HamiltonianProblem prob = make_fixture("drift", FixtureOptions{.steps = N});
    const CandidateSolution phi = drift_forecast_candidate({1.0}, {1.0}, prob.alpha);
    const SearchBudget budget{.J = 4, .K = 3};
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::size_t> start(0, N - 20);
    std::uniform_real_distribution<double> sdist(-2.0, 2.0);
    std::size_t ok = 0;
    double worst_slack = -HUGE_VAL, worst_res = 0.0, worst_gap = -HUGE_VAL;
    for (std::size_t k = 0; k < kConfigs; ++k) {
        const std::size_t i0 = start(rng);
        const std::size_t i1 = std::uniform_int_distribution<std::size_t>(i0 + 1, N)(rng);
        GeneratorOptions go;
        go.amplitude = 0.5;
        go.family = static_cast<GeneratorFamily>(k % 3);
        const PathPoint p = restrict(random_ac_path(prob.grid, 1, prob.alpha, go, rng), i0);
        const std::vector<double> s{sdist(rng)};
        const StabilityResult up = stability_check_upper(phi, prob, p, i1, s, kSlack, budget);
        const StabilityResult lo = stability_check_lower(phi, prob, p, i1, s, kSlack, budget);
        const double res = classical_residual(phi, prob, p);
        const double fv = phi(p);
        const double lower = psi_lower(prob, p, s, budget).value, upper = psi_upper(prob, p, s, budget).value;
        worst_slack = std::max({worst_slack, up.slack, lo.slack});
        worst_res = std::max(worst_res, res);
        worst_gap = std::max({worst_gap, lower - fv, fv - upper});
        ok += up.holds && lo.holds && res <= kResidual && lower <= fv + kBracket && fv <= upper + kBracket;
    }
    return {ok == kConfigs, fmt("%zu/%zu configs; max slack %.2e (<= %g), residual %.2e, bracket gap %.2e", ok,
                                kConfigs, worst_slack, kSlack, worst_res, worst_gap)};
}

// ---------------------------------------------------------------- 8

Outcome comparison_sandwich() {
    constexpr std::size_t N = 200, kPoints = 20, kPairs = 50;
    constexpr double kTol = 1e-9, kEpsFraction = 0.1;
    const SearchBudget budget{.J = 4, .K = 3};
    const std::vector<std::vector<double>> s_list{{-1.0}, {0.0}, {0.5}, {1.0}};
    bool ok = true;
    std::string detail;
    for (const char* name : {"drift", "nonlinear"}) {
        const HamiltonianProblem prob = make_fixture(name, FixtureOptions{.steps = N});
        std::mt19937_64 rng(99);
        std::uniform_int_distribution<std::size_t> idx(0, N);
        std::size_t sandwiched = 0;
        double worst_gap = -HUGE_VAL;
        for (std::size_t k = 0; k < kPoints; ++k) {
            GeneratorOptions go;
            go.amplitude = 0.5;
            const PathPoint p = restrict(random_ac_path(prob.grid, 1, prob.alpha, go, rng), idx(rng));
            const Bracket b = envelope_bracket(prob, p, s_list, budget);
            sandwiched += b.lower <= b.upper;
            worst_gap = std::max(worst_gap, b.lower - b.upper);
        }
        const auto menu = policy_menu(prob, budget);
        std::uniform_int_distribution<std::size_t> pick(0, menu.size() - 1);
        std::size_t monotone = 0;
        double worst_increase = -HUGE_VAL;
        for (std::size_t k = 0; k < kPairs; ++k) {
            GeneratorOptions go;
            go.amplitude = 0.5;
            const std::size_t i0 = std::uniform_int_distribution<std::size_t>(0, N / 2)(rng);
            const PathPoint p = restrict(random_ac_path(prob.grid, 1, prob.alpha, go, rng), i0);
            SelectionPolicy f{i0, N, {}}, fp{i0, N, {}};
            for (std::size_t l = 0; l < budget.J; ++l) {
                f.pieces.push_back(menu[pick(rng)]);
                fp.pieces.push_back(menu[pick(rng)]);
            }
            const double eps0 = comparison_witness(prob, p, -1.0, f, fp).eps;
            const WitnessReport w = comparison_witness(prob, p, kEpsFraction * eps0, f, fp, 0.0, kTol);
            monotone += w.monotone && w.final_bound;
            worst_increase = std::max(worst_increase, w.max_increase);
        }
        ok = ok && sandwiched == kPoints && monotone == kPairs;
        detail += fmt("%s: %zu/%zu sandwiched (max lower-upper %.2e), %zu/%zu monotone (max step %.2e); ", name,
                      sandwiched, kPoints, worst_gap, monotone, kPairs, worst_increase);
    }
    return {ok, detail + fmt("tol %g", kTol)};
}

// ---------------------------------------------------------------- 9

Outcome negative_control() {
    constexpr std::size_t N = 200;
    constexpr double kEps = 1e-3, kMargin = 10.0 * kEps;
    const HamiltonianProblem prob = make_fixture("drift", FixtureOptions{.steps = N});
    const CandidateSolution blind = memory_blind_candidate({1.0});
    const SearchBudget budget{.J = 4, .K = 3};
    const std::vector<double> s{0.0};
    const std::size_t i0 = N / 2, i1 = i0 + N / 10;
    const StabilityResult up =
        stability_check_upper(blind, prob, constant_generator_history(prob.grid, 1, -5.0, prob.alpha, i0), i1, s, kEps, budget);
    const StabilityResult lo =
        stability_check_lower(blind, prob, constant_generator_history(prob.grid, 1, 5.0, prob.alpha, i0), i1, s, kEps, budget);
    const std::size_t size = static_cast<std::size_t>(std::pow(policy_menu(prob, budget).size(), budget.J));
    const bool exhaustive = up.evaluated == size && lo.evaluated == size;
    const double margin = std::max(up.holds ? -HUGE_VAL : up.slack - kEps, lo.holds ? -HUGE_VAL : lo.slack - kEps);
    return {exhaustive && margin > kMargin,
            fmt("upper: %s (slack %.3f), lower: %s (slack %.3f), margin %.3f > %.3f, %zu policies each",
                to_string(up.verdict), up.slack, to_string(lo.verdict), lo.slack, margin, kMargin, up.evaluated)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"fractional-calculus oracles", fractional_oracles},
        {"metric bounds", metric_bounds},
        {"Lyapunov dissipation", lyapunov_dissipation},
        {"V_gamma_mu derivative formula", derivative_formula},
        {"V_gamma_mu closed-form value", closed_form_value},
        {"coupling inequality", coupling},
        {"classical consistency", classical_consistency},
        {"comparison sandwich", comparison_sandwich},
        {"negative control", negative_control},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("[%s] %zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
