#pragma once

// Built-in Hamiltonian problems and seeded random path families.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fhj/dynamics.hpp"
#include "fhj/fraccalc.hpp"
#include "fhj/minimax.hpp"
#include "fhj/path.hpp"

namespace fhj {

struct FixtureParam {
    std::string name;
    std::string description;
    double default_value = 0.0;  ///< vector parameters repeat this in every component
    bool per_component = false;
};

struct FixtureOptions {
    std::size_t dim = 1;
    double alpha = 0.5;
    double horizon = 1.0;
    std::size_t steps = 1000;
    std::map<std::string, std::vector<double>> params;
};

struct FixtureSpec {
    std::string name;
    std::string description;
    std::vector<FixtureParam> params;
};

/// Registry of built-in problems, in a fixed order.
const std::vector<FixtureSpec>& fixture_registry();

/// Builds a registered problem. Unknown names, unknown parameters and
/// parameter vectors of the wrong length throw std::invalid_argument.
HamiltonianProblem make_fixture(const std::string& name, const FixtureOptions& options);

/// Drift problem H = <b, s>, sigma(w) = <a, w(T)>.
HamiltonianProblem drift_problem(std::vector<double> a, std::vector<double> b, double alpha, Grid grid);

/// <a, x(T)> where x extends p after its end time with Caputo generator b.
/// This is the solution of the drift problem.
double drift_forecast_value(const PathPoint& p, std::span<const double> a, std::span<const double> b, double alpha);

/// The drift solution as a candidate, with its ci-derivatives
/// grad = a (T - t)^(alpha - 1) / Gamma(alpha) and d_t = -<a, b> (T - t)^(alpha - 1) / Gamma(alpha).
CandidateSolution drift_forecast_candidate(std::vector<double> a, std::vector<double> b, double alpha);

/// phi(t, w) = <a, w(t)>: ignores the memory of the path.
CandidateSolution memory_blind_candidate(std::vector<double> a);

/// History on [0, t_index] with Caputo generator c in every component,
/// shifted so that it ends at the origin.
PathPoint constant_generator_history(const Grid& grid, std::size_t dim, double c, double alpha, std::size_t t_index);

enum class GeneratorFamily { PiecewiseConstant, Trigonometric, RandomFourier };

const char* to_string(GeneratorFamily f);

struct GeneratorOptions {
    GeneratorFamily family = GeneratorFamily::RandomFourier;
    double amplitude = 1.0;
    std::size_t modes = 4;      ///< pieces or Fourier modes
    bool vanish_at_zero = false; ///< forces psi(0) = 0 (sine modes only, ramped pieces)
    double transition = 0.0;     ///< piecewise family: linear blend of this duration after each jump
};

/// Seeded random generator psi on the full grid.
SampledPath random_generator(const Grid& grid, std::size_t dim, const GeneratorOptions& options, std::mt19937_64& rng);

/// x0 uniform in [-1, 1]^n plus I^alpha of a random generator.
AcPath random_ac_path(const Grid& grid, std::size_t dim, double alpha, const GeneratorOptions& options,
                      std::mt19937_64& rng);

/// Smooth random path (random Fourier series) on nodes 0..last_index.
SampledPath random_smooth_path(const Grid& grid, std::size_t dim, std::size_t last_index, std::mt19937_64& rng,
                               double amplitude = 1.0);

} // namespace fhj
