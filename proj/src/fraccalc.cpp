#include "fhj/fraccalc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fhj {

double gamma_fn(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw std::domain_error("gamma_fn: argument must be positive and finite, got " + std::to_string(x));
    }
    return std::tgamma(x);
}

ProductWeights::ProductWeights(double order, double h, std::size_t max_index)
    : order_(order), start_(max_index + 1, 0.0), interior_(max_index + 1, 0.0) {
    if (!(order > 0.0) || order > 1.0) throw std::invalid_argument("ProductWeights: order must lie in (0, 1]");
    const double a1 = order + 1.0;
    scale_ = std::pow(h, order) / gamma_fn(order + 2.0);
    std::vector<double> pw(max_index + 2);
    for (std::size_t m = 0; m < pw.size(); ++m) pw[m] = std::pow(static_cast<double>(m), a1);
    for (std::size_t j = 1; j <= max_index; ++j) {
        const double jd = static_cast<double>(j);
        start_[j] = scale_ * (pw[j - 1] - (jd - 1.0 - order) * std::pow(jd, order));
    }
    for (std::size_t m = 1; m <= max_index; ++m) {
        interior_[m] = scale_ * (pw[m + 1] - 2.0 * pw[m] + pw[m - 1]);
    }
}

RectangleWeights::RectangleWeights(double order, double h, std::size_t max_index) : b_(max_index + 2, 0.0) {
    if (!(order > 0.0) || order > 1.0) throw std::invalid_argument("RectangleWeights: order must lie in (0, 1]");
    const double c = std::pow(h, order) / gamma_fn(order + 1.0);
    for (std::size_t m = 1; m < b_.size(); ++m) {
        const double md = static_cast<double>(m);
        b_[m] = c * (std::pow(md, order) - std::pow(md - 1.0, order));
    }
}

namespace {

void require_finite(const SampledPath& p, const char* who) {
    if (!p.all_finite()) throw std::invalid_argument(std::string(who) + ": non-finite input values");
}

void require_order(double alpha, double lo, double hi, bool open, const char* who) {
    const bool ok = open ? (alpha > lo && alpha < hi) : (alpha >= lo && alpha <= hi);
    if (!ok || !std::isfinite(alpha)) {
        throw std::invalid_argument(std::string(who) + ": order " + std::to_string(alpha) + " out of range");
    }
}

} // namespace

SampledPath rl_integral(const SampledPath& psi, double alpha) {
    require_order(alpha, 0.0, 1.0, false, "rl_integral");
    require_finite(psi, "rl_integral");
    if (alpha == 0.0) return psi;

    const std::size_t last = psi.last_index();
    const std::size_t n = psi.dim();
    const ProductWeights w(alpha, psi.grid().step(), last);
    SampledPath out(psi.grid(), n, last);
    for (std::size_t j = 1; j <= last; ++j) {
        auto dst = out.at(j);
        for (std::size_t k = 0; k <= j; ++k) {
            const double wk = w(j, k);
            auto src = psi.at(k);
            for (std::size_t i = 0; i < n; ++i) dst[i] += wk * src[i];
        }
    }
    return out;
}

std::vector<double> rl_integral_at(const SampledPath& psi, double alpha, std::size_t j) {
    require_order(alpha, 0.0, 1.0, false, "rl_integral_at");
    if (j > psi.last_index()) throw std::out_of_range("rl_integral_at: node index out of range");
    auto v = psi.at(j);
    if (alpha == 0.0) return {v.begin(), v.end()};
    const ProductWeights w(alpha, psi.grid().step(), j);
    std::vector<double> out(psi.dim(), 0.0);
    for (std::size_t k = 0; k <= j; ++k) {
        auto src = psi.at(k);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += w(j, k) * src[i];
    }
    return out;
}

namespace {

SampledPath invert_product_trapezoid(const SampledPath& x, double alpha) {
    const std::size_t last = x.last_index();
    const std::size_t n = x.dim();
    const ProductWeights w(alpha, x.grid().step(), last);
    SampledPath psi(x.grid(), n, last);
    auto y = [&](std::size_t j, std::size_t i) { return x(j, i) - x(0, i); };

    if (last == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            psi(1, i) = y(1, i) / (w(1, 0) + w(1, 1));
            psi(0, i) = psi(1, i);
        }
        return psi;
    }

    // Rows 1 and 2 with psi_0 = 2 psi_1 - psi_2.
    const double a11 = 2.0 * w(1, 0) + w(1, 1);
    const double a12 = -w(1, 0);
    const double a21 = 2.0 * w(2, 0) + w(2, 1);
    const double a22 = w(2, 2) - w(2, 0);
    const double det = a11 * a22 - a12 * a21;
    for (std::size_t i = 0; i < n; ++i) {
        const double b1 = y(1, i);
        const double b2 = y(2, i);
        psi(1, i) = (b1 * a22 - a12 * b2) / det;
        psi(2, i) = (a11 * b2 - a21 * b1) / det;
        psi(0, i) = 2.0 * psi(1, i) - psi(2, i);
    }
    const double diag = w.diagonal();
    for (std::size_t j = 3; j <= last; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = y(j, i);
            for (std::size_t k = 0; k < j; ++k) acc -= w(j, k) * psi(k, i);
            psi(j, i) = acc / diag;
        }
    }
    return psi;
}

SampledPath l1_scheme(const SampledPath& x, double alpha) {
    const std::size_t last = x.last_index();
    const std::size_t n = x.dim();
    const double beta = 1.0 - alpha;
    const double c = std::pow(x.grid().step(), -alpha) / gamma_fn(2.0 - alpha);
    std::vector<double> b(last + 1);
    for (std::size_t l = 0; l <= last; ++l) {
        const double ld = static_cast<double>(l);
        b[l] = std::pow(ld + 1.0, beta) - std::pow(ld, beta);
    }
    SampledPath psi(x.grid(), n, last);
    for (std::size_t j = 1; j <= last; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < j; ++k) acc += b[j - 1 - k] * (x(k + 1, i) - x(k, i));
            psi(j, i) = c * acc;
        }
    }
    for (std::size_t i = 0; i < n; ++i) psi(0, i) = psi(1, i);
    return psi;
}

} // namespace

SampledPath caputo_derivative(const SampledPath& x, double alpha, CaputoScheme scheme) {
    require_order(alpha, 0.0, 1.0, true, "caputo_derivative");
    require_finite(x, "caputo_derivative");
    if (x.last_index() < 1) throw std::invalid_argument("caputo_derivative: at least two nodes are required");
    switch (scheme) {
    case CaputoScheme::L1:
        return l1_scheme(x, alpha);
    case CaputoScheme::ProductTrapezoidInverse:
    default:
        return invert_product_trapezoid(x, alpha);
    }
}

SampledPath AcPath::realize() const {
    SampledPath out = rl_integral(generator, order);
    for (std::size_t j = 0; j <= out.last_index(); ++j) {
        auto v = out.at(j);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += base[i];
    }
    return out;
}

AcPath make_ac_path(std::vector<double> x0, SampledPath generator, double alpha) {
    require_order(alpha, 0.0, 1.0, true, "make_ac_path");
    if (x0.size() != generator.dim()) {
        throw std::invalid_argument("make_ac_path: base dimension " + std::to_string(x0.size()) +
                                    " does not match generator dimension " + std::to_string(generator.dim()));
    }
    require_finite(generator, "make_ac_path");
    return AcPath{std::move(x0), std::move(generator), alpha};
}

SampledPath eval_ac_path(const AcPath& x) { return x.realize(); }

SampledPath caputo_derivative(const AcPath& x) { return x.generator; }

double check_semigroup(const SampledPath& psi, double alpha, double beta) {
    if (!(alpha >= 0.0) || !(beta >= 0.0) || alpha + beta > 1.0 + 1e-12) {
        throw std::invalid_argument("check_semigroup: orders must be nonnegative with alpha + beta <= 1");
    }
    const SampledPath composed = rl_integral(rl_integral(psi, beta), alpha);
    const SampledPath direct = rl_integral(psi, std::min(1.0, alpha + beta));
    double err = 0.0;
    for (std::size_t k = 0; k < direct.data().size(); ++k) {
        err = std::max(err, std::abs(composed.data()[k] - direct.data()[k]));
    }
    return err;
}

} // namespace fhj
