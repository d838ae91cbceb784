#pragma once

// Lyapunov-Krasovskii functionals on sampled paths: the exponential-kernel
// functional V_{gamma,mu}, the path functionals V*_{beta,mu}, the m-level
// composite V_* and the penalty functional V_eps with its companions p_eps
// and s_eps.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fhj/dynamics.hpp"
#include "fhj/fraccalc.hpp"
#include "fhj/path.hpp"
#include "fhj/pathspace.hpp"

namespace fhj {

struct LyapunovParams {
    double alpha = 0.5;
    double lambda = 0.0;       ///< target dissipation rate (4 lambda_H)
    std::size_t m = 1;
    std::vector<double> beta;  ///< beta_i = (2^(i-1) - 1) alpha
    std::vector<double> mu;
    double lambda_star = 0.0;
    double lambda_H = 0.0;
    double R = 0.0;
    double T = 1.0;
    double eps0 = 0.0;         ///< largest admissible epsilon, 2 exp(-(lambda_H + lambda_star / 2) T); may underflow to 0
};

/// Level count m with alpha in [2^-m, 2^-(m-1)).
std::size_t level_count(double alpha);

/// Parameters for lambda = 4 lambda_H(R). Throws std::overflow_error when the
/// Gamma/exponential chain leaves the double range.
LyapunovParams build_lyapunov_params(double alpha, const std::function<double(double)>& lambda_H_of_R, double R,
                                     double T);

/// Same construction for a prescribed dissipation rate lambda; lambda_H is
/// set to lambda / 4.
LyapunovParams build_lyapunov_params_for_rate(double alpha, double lambda, double T);

/// Product-integration weights of (1 / Gamma(1 - gamma)) int_0^t K(t - tau) r(tau) dtau
/// on a uniform grid for a kernel K with closed-form antiderivatives. For the
/// segment at distance m (theta in [m h, (m + 1) h]) `near(m)` multiplies the
/// node closer to t and `far(m)` the other one.
class ConvolutionWeights {
public:
    ConvolutionWeights(std::vector<double> near, std::vector<double> far)
        : near_(std::move(near)), far_(std::move(far)) {}
    std::size_t size() const noexcept { return near_.size(); }
    double near(std::size_t m) const noexcept { return near_[m]; }
    double far(std::size_t m) const noexcept { return far_[m]; }
    /// sum over segments of [0, t_j] for scalar data r.
    double apply(std::span<const double> r, std::size_t j) const noexcept;

private:
    std::vector<double> near_;
    std::vector<double> far_;
};

/// Weights for the kernel exp(-mu theta^gamma) theta^-gamma / Gamma(1 - gamma).
ConvolutionWeights exp_kernel_weights(double gamma, double mu, double h, std::size_t segments);

/// Weights for the kernel dM/dtheta of the auxiliary function
/// M(theta) = 1/gamma - (1 - exp(-mu theta^gamma)) / (gamma mu theta^gamma).
ConvolutionWeights m_dot_kernel_weights(double gamma, double mu, double h, std::size_t segments);

/// M(theta) and its antiderivative, exposed for tests.
double aux_M(double theta, double gamma, double mu);
double aux_M_integral(double theta, double gamma, double mu);

/// V_{gamma,mu}(t, r) at t = r.end_time() for a scalar path r.
double V_gamma_mu(const SampledPath& r, double gamma, double mu);
/// V_{gamma,mu}(t_j, r) for every node j of r.
std::vector<double> V_gamma_mu_series(const SampledPath& r, double gamma, double mu);

/// Derivative of t -> V_{gamma,mu}(t, r_t) from its explicit formula, at node j.
/// r must satisfy r(0) = 0; its Caputo derivative is the stored generator.
double V_dot_explicit(const AcPath& r, double mu, std::size_t j);
std::vector<double> V_dot_explicit_series(const AcPath& r, double mu);

/// Right-hand side of the upper estimate of the derivative for nonnegative r:
/// D^gamma r - mu r / Gamma(1 - gamma) + mu^2 Gamma(gamma + 1) / (2 Gamma(1 - gamma)) I^gamma r.
std::vector<double> V_dot_upper_series(const AcPath& r, double mu);

/// q(tau) = ||w(tau) - w(0)||^2 at every node of the path.
SampledPath q_path(const PathPoint& p);
SampledPath q_path(const SampledPath& w);

/// V*_{beta,mu}(t, w) for the path of p. Requires beta in [0, 1 - alpha).
double V_star_beta_mu(const PathPoint& p, double beta, double mu, double alpha);
/// V*_{beta,mu}(t_j, w_{t_j}) for every node of w.
std::vector<double> V_star_beta_mu_series(const SampledPath& w, double beta, double mu, double alpha);

/// Composite functional (e^{-lambda_* t} / m) sum_i V*_{beta_i, mu_i}.
double V_star(const PathPoint& p, const LyapunovParams& params);
std::vector<double> V_star_series(const SampledPath& w, const LyapunovParams& params);

struct DissipationReport {
    double max_residual = 0.0;
    std::size_t argmax = 0;
    std::vector<double> residual;  ///< per node, NaN at excluded endpoints
};

/// Residual of dv_*/dt <= e^{-lambda_* t}(2 <x - x(0), D^alpha x> - lambda ||x - x(0)||^2)
/// along x. At every interior node the central difference of v_* is compared
/// with the trapezoidal mean of the right-hand side over the same two cells.
/// Nodes with index < skip are excluded as well.
DissipationReport dissipation_residual(const AcPath& x, const LyapunovParams& params, std::size_t skip = 0);

double V_eps(const PathPoint& delta, double eps, const LyapunovParams& params);
double p_eps(const PathPoint& delta, double eps, const LyapunovParams& params);
std::vector<double> s_eps(const PathPoint& delta, double eps, const LyapunovParams& params);

/// V_eps, p_eps and s_eps at every node of a path, sharing one V_* series.
struct VepsSeries {
    std::vector<double> value;
    std::vector<double> p;
    std::vector<std::vector<double>> s;
};
VepsSeries V_eps_series(const SampledPath& delta, double eps, const LyapunovParams& params);

/// Residual of dv/dt <= p_eps + <s_eps, D^alpha x> for v(t) = V_eps(t, x_t),
/// discretized as in dissipation_residual, from index skip on.
DissipationReport V_eps_dissipation_residual(const AcPath& x, double eps, const LyapunovParams& params,
                                             std::size_t skip = 0);

struct CouplingReport {
    double value = 0.0;       ///< p_eps(dw) + H(t, w'(t), s_eps) - H(t, w(t), s_eps); must be <= 0
    double completion = 0.0;  ///< bracket minus its perfect-square lower bound; must be >= 0
    double bracket = 0.0;     ///< the bracket itself, >= 0
};

/// Evaluates the coupling inequality at the common end time of w and w'.
CouplingReport coupling_inequality_check(const HamiltonianProblem& problem, const PathPoint& w,
                                         const PathPoint& w_prime, double eps, const LyapunovParams& params);

struct BetaDominationReport {
    bool holds = false;
    double worst_slack = 0.0;  ///< max over nodes of lhs - rhs
    std::vector<double> lhs;
    std::vector<double> rhs;
};

/// (I^beta psi)(t) <= Gamma(1 - alpha) T^(alpha + beta - 1) / Gamma(beta) (I^(1 - alpha) psi)(t)
/// at every node, T being the grid horizon.
BetaDominationReport check_beta_domination(const SampledPath& psi, double beta, double alpha, double tol = 1e-9);

} // namespace fhj
