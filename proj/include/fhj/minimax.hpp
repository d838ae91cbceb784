#pragma once

// Desk-scale minimax machinery: envelope functionals over searched
// characteristics, stability checks for candidate solutions, multi-step
// chaining, classical residuals and the monotone comparison witness.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fhj/dynamics.hpp"
#include "fhj/lyapunov.hpp"
#include "fhj/pathspace.hpp"

namespace fhj {

struct CandidateSolution {
    std::function<double(const PathPoint&)> value;
    std::function<double(const PathPoint&)> dt_alpha;               ///< optional
    std::function<std::vector<double>(const PathPoint&)> grad_alpha; ///< optional

    double operator()(const PathPoint& p) const { return value(p); }
    bool has_derivatives() const noexcept { return static_cast<bool>(dt_alpha) && static_cast<bool>(grad_alpha); }
};

struct SearchBudget {
    std::size_t J = 4;  ///< coarse subintervals
    std::size_t K = 3;  ///< directions per subinterval (ignored for n = 1)
    std::vector<double> magnitudes{0.0, 0.5, 1.0};
    /// Largest menu^J still enumerated exhaustively; beyond it beam search runs.
    std::size_t max_enumeration = 200000;
    std::size_t beam_width = 16;
    std::size_t threads = 0;  ///< 0: hardware concurrency
    bool include_reference_velocities = true;
    SolverOptions solver{};
};

/// Distinct piecewise directives offered on every coarse subinterval:
/// the zero velocity, every nonzero magnitude along every direction, then the
/// problem's reference velocities.
std::vector<Directive> policy_menu(const HamiltonianProblem& problem, const SearchBudget& budget);

/// Decodes a policy index (most significant digit first) into one menu entry
/// per subinterval of [start, end].
SelectionPolicy decode_policy(const std::vector<Directive>& menu, std::size_t index, std::size_t J,
                              std::size_t start, std::size_t end);

struct SearchResult {
    double value = 0.0;
    std::optional<Characteristic> best;
    std::vector<std::size_t> choice;  ///< menu index per subinterval
    std::size_t evaluated = 0;
    bool exhaustive = false;
};

/// Scores a characteristic; larger is better for the search.
using Objective = std::function<double(const Characteristic&)>;

/// Maximizes the objective over policies on the mesh of [p, end] with
/// lexicographically smallest choice winning ties. Exhaustive when the class
/// fits the budget, beam search otherwise.
SearchResult search_policies(const HamiltonianProblem& problem, const PathPoint& p, std::span<const double> s,
                             std::size_t end_index, const SearchBudget& budget, const Objective& objective);

/// max over searched characteristics from (p, z = 0, s) of sigma(x) - z(T).
SearchResult psi_upper(const HamiltonianProblem& problem, const PathPoint& p, std::span<const double> s,
                       const SearchBudget& budget);
/// min over searched characteristics from (p, z = 0, s) of sigma(x) - z(T).
SearchResult psi_lower(const HamiltonianProblem& problem, const PathPoint& p, std::span<const double> s,
                       const SearchBudget& budget);

enum class Verdict { Holds, Undecided, RefutedInClass };
const char* to_string(Verdict v);

struct StabilityResult {
    bool holds = false;
    Verdict verdict = Verdict::Undecided;
    /// Best excess over the allowed bound before epsilon:
    /// phi(t1, x_t1) - z(t1) - phi(p) for the upper check,
    /// phi(p) - phi(t1, x_t1) + z(t1) for the lower check.
    double slack = 0.0;
    std::optional<Characteristic> witness;
    std::size_t evaluated = 0;
};

StabilityResult stability_check_upper(const CandidateSolution& phi, const HamiltonianProblem& problem,
                                      const PathPoint& p, std::size_t t1_index, std::span<const double> s,
                                      double eps, const SearchBudget& budget);
StabilityResult stability_check_lower(const CandidateSolution& phi, const HamiltonianProblem& problem,
                                      const PathPoint& p, std::size_t t1_index, std::span<const double> s,
                                      double eps, const SearchBudget& budget);

struct ChainResult {
    Characteristic trajectory;
    std::vector<std::size_t> breakpoints;  ///< grid indices t_{k,0..k}
    std::vector<double> step_slack;        ///< nonnegative excess per interval
    std::vector<double> cumulative_slack;  ///< running sum of step_slack
    /// phi(t, x_t) - z(t) - phi(p) at every node from p onwards.
    std::vector<double> node_excess;
    double bound = 0.0;  ///< k eps_step
    bool within_bound = false;
};

/// Chains upper-stability witnesses over k equal intervals of [t(p), T].
/// Throws std::runtime_error when some interval search fails.
ChainResult multistep_chain(const CandidateSolution& phi, const HamiltonianProblem& problem, const PathPoint& p,
                            std::span<const double> s, std::size_t k, double eps_step, const SearchBudget& budget);

/// |d_t^alpha phi(p) + H(t, w(t), grad^alpha phi(p))| for p before the horizon.
double classical_residual(const CandidateSolution& phi, const HamiltonianProblem& problem, const PathPoint& p);
/// |phi(T, w) - sigma(w)| for a path ending at the horizon.
double boundary_residual(const CandidateSolution& phi, const HamiltonianProblem& problem, const PathPoint& p);

struct Bracket {
    double lower = 0.0;
    double upper = 0.0;
    std::vector<double> lower_per_s;
    std::vector<double> upper_per_s;
};

Bracket envelope_bracket(const HamiltonianProblem& problem, const PathPoint& p,
                         const std::vector<std::vector<double>>& s_list, const SearchBudget& budget);

struct WitnessReport {
    std::vector<double> v;              ///< V_eps(t, dx_t) + z(t) - eps (t - t_0) from t_0 on
    std::vector<double> veps;
    std::vector<double> z;
    double max_increase = 0.0;          ///< max_j v_{j+1} - v_j
    double tolerance = 0.0;
    bool monotone = false;
    double final_lhs = 0.0;             ///< V_eps(T, dx) + z(T) - eps (T - t_0)
    double final_rhs = 0.0;             ///< eps + z_0
    double delta_sigma = 0.0;           ///< sigma(x) - sigma(x')
    bool final_bound = false;
    LyapunovParams params;
    double eps = 0.0;
    Characteristic x;
    Characteristic x_prime;
};

/// Integrates x under `f` and x' under `f_prime` from the shared history p,
/// takes dz/dt at the upper edge of the coupled band and checks that
/// v(t) = V_eps(t, x'_t - x_t) + z(t) - eps (t - t_0) does not increase.
/// eps <= 0 selects eps0 of the parameters built for the trajectories' radius.
WitnessReport comparison_witness(const HamiltonianProblem& problem, const PathPoint& p, double eps,
                                 const SelectionPolicy& f, const SelectionPolicy& f_prime, double z0 = 0.0,
                                 double tolerance = 1e-6);

/// Default stability epsilon: 1e-3 times the value scale max(1, |phi(p)|).
double default_stability_eps(double value_scale);

} // namespace fhj
