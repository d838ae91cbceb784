#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>

#include "fhj/fixtures.hpp"
#include "fhj/minimax.hpp"

using namespace fhj;

namespace {

HamiltonianProblem drift(std::size_t N) { return make_fixture("drift", FixtureOptions{.steps = N}); }

PathPoint history(const HamiltonianProblem& prob, std::size_t j, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return restrict(random_ac_path(prob.grid, prob.dim, prob.alpha, GeneratorOptions{.amplitude = 0.5}, rng), j);
}

}  // namespace

TEST_CASE("menu and policy decoding") {
    const HamiltonianProblem prob = drift(100);
    const SearchBudget budget;
    const auto menu = policy_menu(prob, budget);
    REQUIRE(menu.size() == 6);
    CHECK(std::holds_alternative<ConstantDirective>(menu.front()));
    CHECK(std::get<ConstantDirective>(menu.back()).velocity == std::vector<double>{1.0});
    const SelectionPolicy pol = decode_policy(menu, 6 * 6 + 2 * 6 + 5, 3, 10, 100);
    REQUIRE(pol.pieces.size() == 3);
    CHECK(pol.start_index == 10);
    CHECK(std::holds_alternative<ConstantDirective>(pol.pieces[2]));
    CHECK(std::get<ScaledDirective>(pol.pieces[0]).fraction == doctest::Approx(0.5));
    CHECK(pol.piece_of(11) == 0);
    CHECK(pol.piece_of(100) == 2);
}

TEST_CASE("exhaustive search finds the brute-force optimum") {
    const HamiltonianProblem prob = make_fixture("nonlinear", FixtureOptions{.steps = 80});
    const PathPoint p = history(prob, 20, 3);
    const std::vector<double> s{0.7};
    SearchBudget budget;
    budget.J = 2;
    const auto menu = policy_menu(prob, budget);
    const Objective obj = [](const Characteristic& ch) { return ch.path(ch.path.last_index(), 0) - ch.z_at(80); };
    const SearchResult r = search_policies(prob, p, s, 80, budget, obj);
    CHECK(r.exhaustive);
    CHECK(r.evaluated == menu.size() * menu.size());
    double best = -HUGE_VAL;
    for (std::size_t i = 0; i < menu.size() * menu.size(); ++i) {
        best = std::max(best, obj(integrate_characteristic(prob, p, 0.0, s, decode_policy(menu, i, 2, 20, 80))));
    }
    CHECK(r.value == doctest::Approx(best).epsilon(1e-14));
    REQUIRE(r.best);
    CHECK(obj(*r.best) == r.value);

    SearchBudget beam = budget;
    beam.J = 4;
    beam.max_enumeration = 10;
    beam.beam_width = 4;
    const SearchResult b = search_policies(prob, p, s, 80, beam, obj);
    CHECK_FALSE(b.exhaustive);
    CHECK(b.choice.size() == 4);
}

TEST_CASE("envelopes at the horizon and sandwich") {
    const HamiltonianProblem prob = drift(120);
    const SearchBudget budget{.J = 3};
    const PathPoint end = history(prob, 120, 5);
    const std::vector<double> s{1.0};
    const SearchResult up = psi_upper(prob, end, s, budget);
    CHECK(up.value == prob.sigma(end.path));
    CHECK(psi_lower(prob, end, s, budget).value == prob.sigma(end.path));
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const PathPoint p = history(prob, 30 * seed, seed);
        const Bracket b = envelope_bracket(prob, p, {{0.0}, {1.0}, {-0.5}}, budget);
        const double fv = drift_forecast_value(p, std::vector<double>{1.0}, std::vector<double>{1.0}, prob.alpha);
        CHECK(b.lower <= fv + 1e-9);
        CHECK(fv <= b.upper + 1e-9);
        // s = b makes the cost rate vanish along f = b: both envelopes reach the forecast
        CHECK(b.upper_per_s[1] >= fv - 1e-9);
        CHECK(b.lower_per_s[1] <= fv + 1e-9);
    }
}

TEST_CASE("forecast candidate is a classical solution") {
    const HamiltonianProblem prob = drift(150);
    const CandidateSolution phi = drift_forecast_candidate({1.0}, {1.0}, prob.alpha);
    REQUIRE(phi.has_derivatives());
    const PathPoint p = history(prob, 45, 7);
    CHECK(classical_residual(phi, prob, p) < 1e-12);
    CHECK(boundary_residual(phi, prob, history(prob, 150, 7)) < 1e-12);
    const std::vector<double> s{1.0};
    const SearchBudget budget{.J = 3};
    const StabilityResult up = stability_check_upper(phi, prob, p, 90, s, 1e-3, budget);
    const StabilityResult lo = stability_check_lower(phi, prob, p, 90, s, 1e-3, budget);
    CHECK(up.holds);
    CHECK(lo.holds);
    CHECK(up.verdict == Verdict::Holds);
    CHECK(std::string(to_string(Verdict::RefutedInClass)) == "refuted within policy class");
}

TEST_CASE("memory-blind candidate is refuted") {
    const HamiltonianProblem prob = drift(200);
    const CandidateSolution phi = memory_blind_candidate({1.0});
    const std::vector<double> s{0.0};
    const SearchBudget budget{.J = 3};
    const PathPoint down = constant_generator_history(prob.grid, 1, -5.0, prob.alpha, 100);
    CHECK(down.current()[0] == doctest::Approx(0.0).epsilon(1e-14));
    const StabilityResult up = stability_check_upper(phi, prob, down, 120, s, 1e-3, budget);
    CHECK_FALSE(up.holds);
    CHECK(up.verdict == Verdict::RefutedInClass);
    CHECK(up.slack > 0.1);
    const PathPoint rise = constant_generator_history(prob.grid, 1, 5.0, prob.alpha, 100);
    CHECK_FALSE(stability_check_lower(phi, prob, rise, 120, s, 1e-3, budget).holds);
}

TEST_CASE("chained upper stability") {
    const HamiltonianProblem prob = drift(120);
    const CandidateSolution phi = drift_forecast_candidate({1.0}, {1.0}, prob.alpha);
    const std::vector<double> s{1.0};
    const ChainResult c = multistep_chain(phi, prob, history(prob, 24, 2), s, 4, 1e-3, SearchBudget{.J = 2});
    CHECK(c.breakpoints.size() == 5);
    CHECK(c.breakpoints.back() == 120);
    CHECK(c.within_bound);
    CHECK(c.bound == doctest::Approx(4e-3));
    for (std::size_t k = 1; k < c.cumulative_slack.size(); ++k) CHECK(c.cumulative_slack[k] >= c.cumulative_slack[k - 1]);
}

TEST_CASE("comparison witness is monotone") {
    const HamiltonianProblem prob = make_fixture("nonlinear", FixtureOptions{.steps = 150});
    const SearchBudget budget{.J = 3};
    const auto menu = policy_menu(prob, budget);
    const PathPoint p = history(prob, 30, 4);
    for (std::size_t i : {0u, 17u, 100u}) {
        const SelectionPolicy f = decode_policy(menu, i, 3, 30, 150);
        const SelectionPolicy g = decode_policy(menu, 215 - i, 3, 30, 150);
        const WitnessReport probe = comparison_witness(prob, p, -1.0, f, g);
        const WitnessReport w = comparison_witness(prob, p, 0.1 * probe.eps, f, g, 0.0, 1e-9);
        CHECK(w.monotone);
        CHECK(w.final_bound);
        CHECK(w.max_increase <= 1e-9);
    }
}
