#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>

#include "fhj/dynamics.hpp"
#include "fhj/fixtures.hpp"

using namespace fhj;

namespace {

double mittag_leffler(double alpha, double z) {
    double s = 0.0;
    for (int k = 0; k < 80; ++k) s += std::pow(z, k) / std::tgamma(alpha * k + 1);
    return s;
}

double relaxation_error(std::size_t N, double alpha) {
    const Grid g(1.0, N);
    const PathPoint p = restrict(SampledPath::constant(g, 0, std::vector<double>{1.0}), 0);
    const Rhs rhs = [](const HistoryView& h) { return RhsValue{{-h.current()[0]}, 0.0}; };
    const Characteristic ch = solve_caputo_ivp(p, 0.0, rhs, alpha);
    double e = 0.0;
    for (std::size_t j = 0; j <= N; ++j) {
        e = std::max(e, std::abs(ch.path(j, 0) - mittag_leffler(alpha, -std::pow(g.node(j), alpha))));
    }
    return e;
}

}  // namespace

TEST_CASE("constant right-hand side gives the power law") {
    const Grid g(1.0, 100);
    const PathPoint p = restrict(SampledPath::constant(g, 0, std::vector<double>{0.5}), 0);
    const Rhs rhs = [](const HistoryView&) { return RhsValue{{2.0}, 1.0}; };
    const Characteristic ch = solve_caputo_ivp(p, 0.0, rhs, 0.4);
    for (std::size_t j = 0; j <= 100; ++j) {
        const double t = g.node(j);
        CHECK(ch.path(j, 0) == doctest::Approx(0.5 + 2.0 * std::pow(t, 0.4) / std::tgamma(1.4)).epsilon(1e-12));
        CHECK(ch.z_at(j) == doctest::Approx(t).epsilon(1e-12));
    }
}

TEST_CASE("relaxation equation matches the Mittag-Leffler function") {
    for (double alpha : {0.3, 0.7}) {
        const double e1 = relaxation_error(200, alpha), e2 = relaxation_error(400, alpha);
        CHECK(e2 < 5e-3);
        // x ~ 1 - t^alpha near 0 limits the rate to about 2 alpha
        CHECK(e1 / e2 > std::pow(2.0, 1.5 * alpha));
    }
}

TEST_CASE("solution keeps its history") {
    const Grid g(1.0, 120);
    std::mt19937_64 rng(9);
    const AcPath x = random_ac_path(g, 2, 0.5, GeneratorOptions{}, rng);
    const PathPoint p = restrict(x, 40);
    const Rhs rhs = [](const HistoryView&) { return RhsValue{{0.0, 1.0}, 0.0}; };
    const Characteristic ch = solve_caputo_ivp(p, 3.0, rhs, 0.5);
    for (std::size_t j = 0; j <= 40; ++j) {
        CHECK(ch.path(j, 0) == p.path(j, 0));
        CHECK(ch.z_at(j) == 3.0);
    }
    CHECK(ch.origin_index == 40);
    CHECK(ch.x.generator(80, 1) == 1.0);
}

TEST_CASE("velocity set and directions") {
    const HamiltonianProblem prob = make_fixture("nonlinear", FixtureOptions{.dim = 2});
    const std::vector<double> x{0.3, -0.4}, s{1.0, 2.0};
    const auto set = characteristic_velocity_set(prob, 0.5, x, s, 6);
    REQUIRE(set.size() == 7);
    for (const auto& v : set) {
        CHECK(norm(v.f) <= prob.velocity_bound(x) + 1e-12);
        CHECK(v.h == doctest::Approx(dot(s, v.f) - prob.H(0.5, x, s)));
    }
    const auto d4 = unit_directions(2, 4), d8 = unit_directions(2, 8);
    for (std::size_t k = 0; k < 4; ++k) CHECK(d8[k] == d4[k]);
    for (const auto& d : unit_directions(3, 10)) CHECK(norm(d) == doctest::Approx(1.0));
    CHECK(unit_directions(1, 5).size() == 2);
}

TEST_CASE("characteristics stay in the inclusion") {
    for (const auto& spec : fixture_registry()) {
        const HamiltonianProblem prob = make_fixture(spec.name, FixtureOptions{.dim = 2, .steps = 200});
        std::mt19937_64 rng(4);
        const PathPoint p = restrict(random_ac_path(prob.grid, 2, prob.alpha, GeneratorOptions{.amplitude = 0.5}, rng), 60);
        const std::vector<double> s{0.5, -1.0};
        const SelectionPolicy pol{60, 200, {ScaledDirective{{1.0, 0.0}, 1.0}, ConstantDirective{{0.0, 0.0}},
                                            ScaledDirective{{0.6, 0.8}, 0.5}}};
        const Characteristic ch = integrate_characteristic(prob, p, 0.0, s, pol);
        const InclusionDefect d = inclusion_defect(prob, ch);
        CHECK(d.velocity_excess <= 1e-9);
        INFO(spec.name);
        CHECK(d.cost_rate_error <= 1e-9);
    }
}

TEST_CASE("policies outside the ball are rejected") {
    const HamiltonianProblem prob = make_fixture("drift", FixtureOptions{.steps = 50});
    const PathPoint p = restrict(SampledPath::constant(prob.grid, 0, std::vector<double>{0.0}), 0);
    const std::vector<double> s{1.0};
    const SelectionPolicy pol{0, 50, {ConstantDirective{{5.0}}}};
    CHECK_THROWS(integrate_characteristic(prob, p, 0.0, s, pol));
}

TEST_CASE("concatenation splices at the switch node") {
    const HamiltonianProblem prob = make_fixture("nonlinear", FixtureOptions{.steps = 100});
    const PathPoint p = restrict(SampledPath::constant(prob.grid, 0, std::vector<double>{0.2}), 0);
    const std::vector<double> s{1.0};
    const Characteristic first =
        integrate_characteristic(prob, p, 0.0, s, SelectionPolicy{0, 100, {ScaledDirective{{1.0}, 1.0}}});
    const Characteristic second = integrate_characteristic(prob, first.restrict_to(50), first.z_at(50), s,
                                                           SelectionPolicy{50, 100, {ScaledDirective{{-1.0}, 0.5}}});
    const Characteristic joined = concatenate(first, 50, second);
    for (std::size_t j = 0; j <= 50; ++j) CHECK(joined.path(j, 0) == first.path(j, 0));
    for (std::size_t j = 50; j <= 100; ++j) {
        CHECK(joined.path(j, 0) == doctest::Approx(second.path(j, 0)));
        CHECK(joined.z_at(j) == doctest::Approx(second.z_at(j)));
    }
}

TEST_CASE("fixtures meet their declared constants") {
    for (const auto& spec : fixture_registry()) {
        for (std::size_t dim : {1u, 3u}) {
            const HamiltonianProblem prob = make_fixture(spec.name, FixtureOptions{.dim = dim});
            CHECK(spot_check_assumptions(prob, 2.0, 500, 1).ok());
        }
    }
    CHECK_THROWS_AS(make_fixture("nope", FixtureOptions{}), std::invalid_argument);
    FixtureOptions bad;
    bad.params["zzz"] = {1.0};
    CHECK_THROWS_AS(make_fixture("drift", bad), std::invalid_argument);
}
