#include "fhj/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

namespace fhj {

std::size_t level_count(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("level_count: alpha must lie in (0, 1)");
    std::size_t m = 1;
    while (alpha < std::ldexp(1.0, -static_cast<int>(m))) ++m;
    return m;
}

namespace {

void require_finite_param(double v, const char* what) {
    if (!std::isfinite(v)) throw std::overflow_error(std::string("build_lyapunov_params: ") + what + " overflows");
}

} // namespace

LyapunovParams build_lyapunov_params_for_rate(double alpha, double lambda, double T) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("build_lyapunov_params: alpha must lie in (0, 1)");
    if (!(lambda > 0.0) || !(T > 0.0)) throw std::invalid_argument("build_lyapunov_params: lambda and T must be positive");
    LyapunovParams p;
    p.alpha = alpha;
    p.lambda = lambda;
    p.lambda_H = lambda / 4.0;
    p.T = T;
    p.m = level_count(alpha);
    for (std::size_t i = 1; i <= p.m; ++i) p.beta.push_back((std::ldexp(1.0, static_cast<int>(i) - 1) - 1.0) * alpha);
    p.mu.push_back(static_cast<double>(p.m) * gamma_fn(1.0 - alpha) * lambda);
    for (std::size_t i = 0; i + 1 < p.m; ++i) {
        const double bi = p.beta[i];
        const double bn = p.beta[i + 1];
        p.mu.push_back(p.mu[i] * p.mu[i] * gamma_fn(alpha + bi + 1.0) * gamma_fn(1.0 - alpha - bn) /
                       (2.0 * gamma_fn(1.0 - alpha - bi)));
        require_finite_param(p.mu.back(), "mu");
    }
    const double bm = p.beta.back();
    const double mum = p.mu.back();
    p.lambda_star = mum * mum * gamma_fn(alpha + bm + 1.0) * gamma_fn(1.0 - alpha) *
                    std::pow(T, 2.0 * alpha + 2.0 * bm - 1.0) * std::exp(p.mu.front() * std::pow(T, alpha)) /
                    (2.0 * gamma_fn(1.0 - alpha - bm) * gamma_fn(alpha + 2.0 * bm));
    require_finite_param(p.lambda_star, "lambda_*");
    p.eps0 = 2.0 * std::exp(-(p.lambda_H + p.lambda_star / 2.0) * T);
    return p;
}

LyapunovParams build_lyapunov_params(double alpha, const std::function<double(double)>& lambda_H_of_R, double R,
                                     double T) {
    if (!(R > 0.0)) throw std::invalid_argument("build_lyapunov_params: R must be positive");
    const double lambda_H = lambda_H_of_R(R);
    if (!(lambda_H > 0.0) || !std::isfinite(lambda_H)) {
        throw std::invalid_argument("build_lyapunov_params: lambda_H(R) must be positive");
    }
    LyapunovParams p = build_lyapunov_params_for_rate(alpha, 4.0 * lambda_H, T);
    p.lambda_H = lambda_H;
    p.R = R;
    return p;
}

double ConvolutionWeights::apply(std::span<const double> r, std::size_t j) const noexcept {
    double acc = 0.0;
    for (std::size_t m = 0; m < j; ++m) acc += near_[m] * r[j - m] + far_[m] * r[j - m - 1];
    return acc;
}

namespace {

// Turns antiderivatives A (of K) and B (of theta K) into segment weights.
template <class FA, class FB>
ConvolutionWeights segment_weights(double h, std::size_t segments, FA&& A, FB&& B) {
    std::vector<double> near(segments), far(segments);
    double a_lo = 0.0, b_lo = 0.0;
    for (std::size_t m = 0; m < segments; ++m) {
        const double lo = h * static_cast<double>(m);
        const double hi = h * static_cast<double>(m + 1);
        const double a_hi = A(hi);
        const double b_hi = B(hi);
        const double am = a_hi - a_lo;
        const double bm = b_hi - b_lo;
        near[m] = (hi * am - bm) / h;
        far[m] = (bm - lo * am) / h;
        a_lo = a_hi;
        b_lo = b_hi;
    }
    return ConvolutionWeights(std::move(near), std::move(far));
}

void require_kernel_args(double gamma, double mu, const char* who) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument(std::string(who) + ": gamma must lie in (0, 1)");
    if (!(mu > 0.0)) throw std::invalid_argument(std::string(who) + ": mu must be positive");
}

} // namespace

ConvolutionWeights exp_kernel_weights(double gamma, double mu, double h, std::size_t segments) {
    require_kernel_args(gamma, mu, "exp_kernel_weights");
    const double a = 1.0 / gamma;
    const double g = gamma_fn(1.0 - gamma);
    // theta = (u / mu)^a turns both moments into lower incomplete gamma functions.
    const double ca = a * std::exp((1.0 - a) * std::log(mu)) / g;
    const double cb = a * std::exp((1.0 - 2.0 * a) * std::log(mu)) / g;
    auto A = [&](double theta) { return ca * boost::math::tgamma_lower(a - 1.0, mu * std::pow(theta, gamma)); };
    auto B = [&](double theta) { return cb * boost::math::tgamma_lower(2.0 * a - 1.0, mu * std::pow(theta, gamma)); };
    return segment_weights(h, segments, A, B);
}

double aux_M(double theta, double gamma, double mu) {
    if (theta <= 0.0) return 0.0;
    const double u = mu * std::pow(theta, gamma);
    if (u < 0.1) {
        double term = 1.0, sum = 0.0;
        for (int k = 1; k < 30; ++k) {
            term *= -u / static_cast<double>(k + 1);
            sum -= term;
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        }
        // sum = u/2 - u^2/6 + ... = 1 - (1 - e^{-u}) / u
        return sum / gamma;
    }
    return (1.0 + std::expm1(-u) / u) / gamma;
}

double aux_M_integral(double theta, double gamma, double mu) {
    if (theta <= 0.0) return 0.0;
    const double a = 1.0 / gamma;
    const double u = mu * std::pow(theta, gamma);
    if (u < 1.0) {
        double pw = 1.0, fact = 1.0, sum = 0.0;
        for (int k = 1; k < 60; ++k) {
            pw *= u;
            fact *= static_cast<double>(k + 1);
            const double term = ((k % 2) ? 1.0 : -1.0) * pw / (fact * (a + k));
            sum += term;
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        }
        return a * theta * sum / gamma;
    }
    return (a / gamma) * (theta / a - theta / ((a - 1.0) * u) +
                          std::exp(-a * std::log(mu)) * boost::math::tgamma_lower(a - 1.0, u));
}

ConvolutionWeights m_dot_kernel_weights(double gamma, double mu, double h, std::size_t segments) {
    require_kernel_args(gamma, mu, "m_dot_kernel_weights");
    auto A = [&](double theta) { return aux_M(theta, gamma, mu); };
    auto B = [&](double theta) { return theta * aux_M(theta, gamma, mu) - aux_M_integral(theta, gamma, mu); };
    return segment_weights(h, segments, A, B);
}

namespace {

const std::vector<double>& scalar_values(const SampledPath& r, const char* who) {
    if (r.dim() != 1) throw std::invalid_argument(std::string(who) + ": expects a scalar path");
    return r.data();
}

} // namespace

std::vector<double> V_gamma_mu_series(const SampledPath& r, double gamma, double mu) {
    const auto& v = scalar_values(r, "V_gamma_mu");
    const std::size_t J = r.last_index();
    std::vector<double> out(J + 1, 0.0);
    if (J == 0) return out;
    const auto w = exp_kernel_weights(gamma, mu, r.grid().step(), J);
    for (std::size_t j = 1; j <= J; ++j) out[j] = w.apply(v, j);
    return out;
}

double V_gamma_mu(const SampledPath& r, double gamma, double mu) {
    const auto& v = scalar_values(r, "V_gamma_mu");
    const std::size_t J = r.last_index();
    if (J == 0) return 0.0;
    return exp_kernel_weights(gamma, mu, r.grid().step(), J).apply(v, J);
}

namespace {

void require_zero_start(const AcPath& r) {
    if (r.dim() != 1) throw std::invalid_argument("V_dot_explicit: expects a scalar path");
    if (std::abs(r.base[0]) > 1e-12) throw std::invalid_argument("V_dot_explicit: requires r(0) = 0");
}

} // namespace

std::vector<double> V_dot_explicit_series(const AcPath& r, double mu) {
    require_zero_start(r);
    const double gamma = r.order;
    const SampledPath rv = r.realize();
    const auto& v = rv.data();
    const std::size_t J = r.last_index();
    const double g = gamma_fn(1.0 - gamma);
    const auto w = m_dot_kernel_weights(gamma, mu, r.grid().step(), std::max<std::size_t>(J, 1));
    std::vector<double> out(J + 1);
    for (std::size_t j = 0; j <= J; ++j) {
        out[j] = r.generator.scalar_at(j) - mu / g * v[j] + mu * gamma / g * w.apply(v, j);
    }
    return out;
}

double V_dot_explicit(const AcPath& r, double mu, std::size_t j) {
    if (j > r.last_index()) throw std::out_of_range("V_dot_explicit: node beyond path end");
    require_zero_start(r);
    const double gamma = r.order;
    const SampledPath rv = r.realize();
    const double g = gamma_fn(1.0 - gamma);
    const auto w = m_dot_kernel_weights(gamma, mu, r.grid().step(), std::max<std::size_t>(j, 1));
    return r.generator.scalar_at(j) - mu / g * rv.scalar_at(j) + mu * gamma / g * w.apply(rv.data(), j);
}

std::vector<double> V_dot_upper_series(const AcPath& r, double mu) {
    require_zero_start(r);
    const double gamma = r.order;
    const SampledPath rv = r.realize();
    const SampledPath ir = rl_integral(rv, gamma);
    const double g = gamma_fn(1.0 - gamma);
    const double c = mu * mu * gamma_fn(gamma + 1.0) / (2.0 * g);
    std::vector<double> out(r.last_index() + 1);
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = r.generator.scalar_at(j) - mu / g * rv.scalar_at(j) + c * ir.scalar_at(j);
    }
    return out;
}

SampledPath q_path(const SampledPath& w) {
    std::vector<double> q(w.size());
    const auto w0 = w.at(0);
    for (std::size_t j = 0; j < q.size(); ++j) {
        const double d = distance(w.at(j), w0);
        q[j] = d * d;
    }
    return SampledPath(w.grid(), 1, std::move(q));
}

SampledPath q_path(const PathPoint& p) { return q_path(p.path); }

namespace {

void require_beta(double beta, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("V_star_beta_mu: alpha must lie in (0, 1)");
    if (!(beta >= 0.0 && beta < 1.0 - alpha)) throw std::invalid_argument("V_star_beta_mu: requires beta in [0, 1 - alpha)");
}

SampledPath level_data(const SampledPath& w, double beta) {
    SampledPath q = q_path(w);
    return beta > 0.0 ? rl_integral(q, beta) : q;
}

void require_consistent(const SampledPath& w, const LyapunovParams& params) {
    if (params.mu.size() != params.m || params.beta.size() != params.m || params.m == 0) {
        throw std::invalid_argument("V_star: parameter arrays do not match the level count");
    }
    const double T = w.grid().horizon();
    if (std::abs(T - params.T) > 1e-9 * std::max(1.0, T)) {
        throw std::invalid_argument("V_star: parameters were built for a different horizon");
    }
}

} // namespace

std::vector<double> V_star_beta_mu_series(const SampledPath& w, double beta, double mu, double alpha) {
    require_beta(beta, alpha);
    return V_gamma_mu_series(level_data(w, beta), alpha + beta, mu);
}

double V_star_beta_mu(const PathPoint& p, double beta, double mu, double alpha) {
    require_beta(beta, alpha);
    return V_gamma_mu(level_data(p.path, beta), alpha + beta, mu);
}

std::vector<double> V_star_series(const SampledPath& w, const LyapunovParams& params) {
    require_consistent(w, params);
    std::vector<double> total(w.size(), 0.0);
    for (std::size_t i = 0; i < params.m; ++i) {
        const auto level = V_star_beta_mu_series(w, params.beta[i], params.mu[i], params.alpha);
        for (std::size_t j = 0; j < total.size(); ++j) total[j] += level[j];
    }
    const double inv_m = 1.0 / static_cast<double>(params.m);
    for (std::size_t j = 0; j < total.size(); ++j) {
        total[j] *= std::exp(-params.lambda_star * w.grid().node(j)) * inv_m;
    }
    return total;
}

double V_star(const PathPoint& p, const LyapunovParams& params) {
    require_consistent(p.path, params);
    double total = 0.0;
    for (std::size_t i = 0; i < params.m; ++i) {
        total += V_star_beta_mu(p, params.beta[i], params.mu[i], params.alpha);
    }
    return std::exp(-params.lambda_star * p.time()) * total / static_cast<double>(params.m);
}

namespace {

DissipationReport central_difference_residual(const std::vector<double>& v, double h, std::size_t skip,
                                              const std::function<double(std::size_t)>& bound) {
    DissipationReport rep;
    rep.residual.assign(v.size(), std::numeric_limits<double>::quiet_NaN());
    rep.max_residual = -std::numeric_limits<double>::infinity();
    std::vector<double> g(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) g[j] = bound(j);
    for (std::size_t j = std::max<std::size_t>(1, skip); j + 1 < v.size(); ++j) {
        // Both sides averaged over [t_{j-1}, t_{j+1}]; the right one by the trapezoidal rule.
        const double vdot = (v[j + 1] - v[j - 1]) / (2.0 * h);
        const double res = vdot - 0.25 * (g[j - 1] + 2.0 * g[j] + g[j + 1]);
        rep.residual[j] = res;
        if (res > rep.max_residual) {
            rep.max_residual = res;
            rep.argmax = j;
        }
    }
    return rep;
}

} // namespace

DissipationReport dissipation_residual(const AcPath& x, const LyapunovParams& params, std::size_t skip) {
    if (std::abs(x.order - params.alpha) > 1e-12) {
        throw std::invalid_argument("dissipation_residual: path order differs from the parameters");
    }
    const SampledPath w = x.realize();
    const auto v = V_star_series(w, params);
    const auto w0 = w.at(0);
    const std::size_t n = w.dim();
    auto bound = [&](std::size_t j) {
        const auto wj = w.at(j);
        const auto psi = x.generator.at(j);
        double inner = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = wj[i] - w0[i];
            inner += d * psi[i];
            sq += d * d;
        }
        return std::exp(-params.lambda_star * w.grid().node(j)) * (2.0 * inner - params.lambda * sq);
    };
    return central_difference_residual(v, w.grid().step(), skip, bound);
}

namespace {

void require_eps(double eps, const LyapunovParams& params) {
    if (!(eps > 0.0 && eps <= params.eps0 * (1.0 + 1e-12))) {
        throw std::invalid_argument("V_eps: epsilon must lie in (0, eps0] with eps0 = " + std::to_string(params.eps0));
    }
}

struct VepsParts {
    double value, p;
    std::vector<double> s;
};

VepsParts veps_parts(std::span<const double> wt, std::span<const double> w0, double t, double vstar, double eps,
                     const LyapunovParams& params) {
    const double root = std::sqrt(eps * eps * eps * eps + vstar);
    const double decay = std::exp(-params.lambda_H * t);
    const double decay_star = std::exp(-(params.lambda_H + params.lambda_star) * t);
    VepsParts out;
    out.value = decay / eps * root;
    double sq = 0.0;
    out.s.resize(wt.size());
    for (std::size_t i = 0; i < wt.size(); ++i) {
        const double d = wt[i] - w0[i];
        sq += d * d;
        out.s[i] = decay_star / eps * d / root;
    }
    out.p = -params.lambda_H * decay / eps * root - 2.0 * params.lambda_H * decay_star / eps * sq / root;
    return out;
}

VepsParts veps_at(const PathPoint& delta, double eps, const LyapunovParams& params) {
    require_eps(eps, params);
    return veps_parts(delta.current(), delta.path.at(0), delta.time(), V_star(delta, params), eps, params);
}

} // namespace

double V_eps(const PathPoint& delta, double eps, const LyapunovParams& params) {
    return veps_at(delta, eps, params).value;
}

double p_eps(const PathPoint& delta, double eps, const LyapunovParams& params) {
    return veps_at(delta, eps, params).p;
}

std::vector<double> s_eps(const PathPoint& delta, double eps, const LyapunovParams& params) {
    return veps_at(delta, eps, params).s;
}

VepsSeries V_eps_series(const SampledPath& delta, double eps, const LyapunovParams& params) {
    require_eps(eps, params);
    const auto v = V_star_series(delta, params);
    VepsSeries out;
    for (std::size_t j = 0; j < delta.size(); ++j) {
        auto parts = veps_parts(delta.at(j), delta.at(0), delta.grid().node(j), v[j], eps, params);
        out.value.push_back(parts.value);
        out.p.push_back(parts.p);
        out.s.push_back(std::move(parts.s));
    }
    return out;
}

DissipationReport V_eps_dissipation_residual(const AcPath& x, double eps, const LyapunovParams& params,
                                             std::size_t skip) {
    const SampledPath w = x.realize();
    const auto series = V_eps_series(w, eps, params);
    auto bound = [&](std::size_t j) { return series.p[j] + dot(series.s[j], x.generator.at(j)); };
    return central_difference_residual(series.value, w.grid().step(), skip, bound);
}

CouplingReport coupling_inequality_check(const HamiltonianProblem& problem, const PathPoint& w,
                                         const PathPoint& w_prime, double eps, const LyapunovParams& params) {
    if (w.dim() != w_prime.dim() || !(w.grid() == w_prime.grid()) || w.t_index() != w_prime.t_index()) {
        throw std::invalid_argument("coupling_inequality_check: paths must share dimension, grid and end time");
    }
    if (distance(w.path.at(0), w_prime.path.at(0)) > 1e-12) {
        throw std::invalid_argument("coupling_inequality_check: paths must share the initial value");
    }
    const double R = params.R;
    if (w.path.max_norm() > R * (1.0 + 1e-9) || w_prime.path.max_norm() > R * (1.0 + 1e-9)) {
        throw std::invalid_argument("coupling_inequality_check: path leaves the radius-R ball");
    }
    std::vector<double> diff(w.path.data().size());
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = w_prime.path.data()[k] - w.path.data()[k];
    const PathPoint delta{SampledPath(w.grid(), w.dim(), std::move(diff)), std::nullopt};
    require_eps(eps, params);
    const double t = delta.time();
    const double vstar = V_star(delta, params);
    const auto parts = veps_parts(delta.current(), delta.path.at(0), t, vstar, eps, params);

    CouplingReport rep;
    rep.value = parts.p + problem.H(t, w_prime.current(), parts.s) - problem.H(t, w.current(), parts.s);
    const double root = std::sqrt(eps * eps * eps * eps + vstar);
    const double D = norm(delta.current()) / root;
    rep.bracket = 1.0 - eps * std::exp(params.lambda_H * t) * D + std::exp(-params.lambda_star * t) * D * D;
    const double square = 1.0 - std::exp(-params.lambda_star * t / 2.0) * D;
    rep.completion = rep.bracket - square * square;
    return rep;
}

BetaDominationReport check_beta_domination(const SampledPath& psi, double beta, double alpha, double tol) {
    if (psi.dim() != 1) throw std::invalid_argument("check_beta_domination: expects a scalar path");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("check_beta_domination: alpha must lie in (0, 1)");
    if (!(beta >= 1.0 - alpha - 1e-12 && beta <= 1.0)) {
        throw std::invalid_argument("check_beta_domination: requires 1 - alpha <= beta <= 1");
    }
    for (double v : psi.data()) {
        if (!(v >= 0.0)) throw std::invalid_argument("check_beta_domination: psi must be nonnegative");
    }
    const double T = psi.grid().horizon();
    const double c = gamma_fn(1.0 - alpha) * std::pow(T, alpha + beta - 1.0) / gamma_fn(beta);
    const SampledPath lhs = rl_integral(psi, beta);
    const SampledPath base = rl_integral(psi, 1.0 - alpha);
    BetaDominationReport rep;
    rep.worst_slack = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j <= psi.last_index(); ++j) {
        rep.lhs.push_back(lhs.scalar_at(j));
        rep.rhs.push_back(c * base.scalar_at(j));
        rep.worst_slack = std::max(rep.worst_slack, rep.lhs.back() - rep.rhs.back());
    }
    rep.holds = rep.worst_slack <= tol;
    return rep;
}

} // namespace fhj
