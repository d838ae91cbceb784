#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>
#include <random>

#include "fhj/fixtures.hpp"
#include "fhj/fraccalc.hpp"

using namespace fhj;

namespace {

SampledPath sample(const Grid& g, double (*f)(double)) {
    SampledPath p(g, 1, g.steps());
    for (std::size_t j = 0; j <= g.steps(); ++j) p(j, 0) = f(g.node(j));
    return p;
}

// I^alpha cos(t) = sum_k (-1)^k t^(2k+alpha) / Gamma(2k+alpha+1)
double rl_cos(double t, double alpha) {
    double s = 0.0;
    for (int k = 0; k < 25; ++k) s += std::pow(-1.0, k) * std::pow(t, 2 * k + alpha) / std::tgamma(2 * k + alpha + 1);
    return s;
}

double max_err_rl_cos(std::size_t N, double alpha) {
    const Grid g(1.0, N);
    const SampledPath I = rl_integral(sample(g, [](double t) { return std::cos(t); }), alpha);
    double e = 0.0;
    for (std::size_t j = 0; j <= N; ++j) e = std::max(e, std::abs(I(j, 0) - rl_cos(g.node(j), alpha)));
    return e;
}

}  // namespace

TEST_CASE("gamma function reference values") {
    const double sqrt_pi = std::sqrt(std::numbers::pi);
    CHECK(gamma_fn(0.5) == doctest::Approx(sqrt_pi).epsilon(1e-12));
    CHECK(gamma_fn(1.5) == doctest::Approx(sqrt_pi / 2).epsilon(1e-12));
    CHECK(gamma_fn(5.0) == doctest::Approx(24.0).epsilon(1e-12));
    CHECK(gamma_fn(0.3) == doctest::Approx(2.991568987687590).epsilon(1e-12));
    CHECK(gamma_fn(1.8) == doctest::Approx(0.9313837709802427).epsilon(1e-12));
    CHECK_THROWS_AS(gamma_fn(0.0), std::domain_error);
    CHECK_THROWS_AS(gamma_fn(-1.5), std::domain_error);
}

TEST_CASE("I^alpha is exact on linear data") {
    const Grid g(2.0, 64);
    for (double alpha : {0.2, 0.5, 0.9}) {
        const SampledPath one = rl_integral(SampledPath::constant(g, 64, std::vector<double>{1.0}), alpha);
        const SampledPath lin = rl_integral(sample(g, [](double t) { return t; }), alpha);
        for (std::size_t j = 0; j <= 64; ++j) {
            const double t = g.node(j);
            CHECK(one(j, 0) == doctest::Approx(std::pow(t, alpha) / std::tgamma(alpha + 1)).epsilon(1e-12));
            CHECK(lin(j, 0) == doctest::Approx(std::pow(t, alpha + 1) / std::tgamma(alpha + 2)).epsilon(1e-12));
        }
    }
}

TEST_CASE("I^alpha limits and single-node evaluation") {
    const Grid g(1.0, 40);
    const SampledPath c = sample(g, [](double t) { return std::cos(3 * t); });
    const SampledPath id = rl_integral(c, 0.0);
    const SampledPath one = rl_integral(c, 1.0);
    double trap = 0.0;
    for (std::size_t j = 1; j <= 40; ++j) {
        trap += 0.5 * g.step() * (c(j - 1, 0) + c(j, 0));
        CHECK(id(j, 0) == c(j, 0));
        CHECK(one(j, 0) == doctest::Approx(trap).epsilon(1e-12));
    }
    const SampledPath half = rl_integral(c, 0.5);
    CHECK(rl_integral_at(c, 0.5, 17)[0] == doctest::Approx(half(17, 0)).epsilon(1e-13));
}

TEST_CASE("I^alpha converges at second order on smooth data") {
    for (double alpha : {0.3, 0.7}) {
        const double e1 = max_err_rl_cos(100, alpha), e2 = max_err_rl_cos(200, alpha);
        CHECK(e1 / e2 > 3.0);
        CHECK(e2 < 1e-4);
    }
}

// psi(0) is not determined by the nodal values of x; it is extrapolated.
TEST_CASE("Caputo derivative inverts the discrete integral") {
    const Grid g(1.0, 300);
    std::mt19937_64 rng(3);
    for (double alpha : {0.2, 0.5, 0.8}) {
        const AcPath x = random_ac_path(g, 2, alpha, GeneratorOptions{}, rng);
        const SampledPath rec = caputo_derivative(x.realize(), alpha);
        for (std::size_t j = 1; j <= 300; ++j) {
            for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(rec(j, i) - x.generator(j, i)) < 1e-3 * x.generator.max_norm());
        }
    }
}

TEST_CASE("L1 scheme is exact for linear paths") {
    const Grid g(1.0, 50);
    const double alpha = 0.4;
    const SampledPath d = caputo_derivative(sample(g, [](double t) { return 2.0 + t; }), alpha, CaputoScheme::L1);
    for (std::size_t j = 1; j <= 50; ++j) {
        CHECK(d(j, 0) == doctest::Approx(std::pow(g.node(j), 1 - alpha) / std::tgamma(2 - alpha)).epsilon(1e-10));
    }
}

TEST_CASE("Caputo derivative of t^2 approaches the power rule") {
    const double alpha = 0.6;
    double prev = 0.0;
    for (std::size_t N : {200u, 400u}) {
        const Grid g(1.0, N);
        const SampledPath d = caputo_derivative(sample(g, [](double t) { return t * t; }), alpha);
        double e = 0.0;
        for (std::size_t j = N / 10; j <= N; ++j) {
            e = std::max(e, std::abs(d(j, 0) - 2 * std::pow(g.node(j), 2 - alpha) / std::tgamma(3 - alpha)));
        }
        CHECK(e < 1e-3);
        if (prev > 0.0) CHECK(prev / e > 1.8);
        prev = e;
    }
}

TEST_CASE("semigroup property") {
    const Grid g(1.0, 1000);
    const SampledPath smooth = sample(g, [](double t) { return t * std::exp(t); });
    CHECK(check_semigroup(smooth, 0.3, 0.4) < 1e-5);
    // beta = 1 - alpha: both sides integrate to I^1 1 = t.
    const SampledPath one = SampledPath::constant(g, 1000, std::vector<double>{1.0});
    CHECK(check_semigroup(one, 0.2, 0.8) < 1e-4);
    const Grid g2(1.0, 2000);
    const SampledPath smooth2 = sample(g2, [](double t) { return t * std::exp(t); });
    CHECK(check_semigroup(smooth, 0.3, 0.4) / check_semigroup(smooth2, 0.3, 0.4) > 2.0);
    CHECK_THROWS_AS(check_semigroup(one, 0.6, 0.6), std::invalid_argument);
}

TEST_CASE("AcPath realization") {
    const Grid g(1.0, 100);
    const AcPath x = make_ac_path({1.0, -2.0}, SampledPath::constant(g, 100, std::vector<double>{3.0, 0.0}), 0.5);
    const SampledPath w = eval_ac_path(x);
    CHECK(w(0, 0) == doctest::Approx(1.0));
    CHECK(w(100, 0) == doctest::Approx(1.0 + 3.0 / std::tgamma(1.5)).epsilon(1e-12));
    CHECK(w(100, 1) == doctest::Approx(-2.0));
    CHECK(caputo_derivative(x)(50, 0) == 3.0);
}
