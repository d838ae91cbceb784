#include "fhj/path.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fhj {

Grid::Grid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw std::invalid_argument("Grid: horizon must be positive and finite");
    }
    if (steps < 1) {
        throw std::invalid_argument("Grid: at least one step is required");
    }
}

std::size_t Grid::nearest_index(double t) const noexcept {
    if (!(t > 0.0)) return 0;
    const double r = std::round(t / step());
    if (r >= static_cast<double>(steps_)) return steps_;
    return static_cast<std::size_t>(r);
}

SampledPath::SampledPath(Grid grid, std::size_t dim, std::size_t last_index)
    : grid_(grid), dim_(dim), last_(last_index), data_((last_index + 1) * dim, 0.0) {
    if (dim == 0) throw std::invalid_argument("SampledPath: dimension must be at least 1");
    if (last_index > grid.steps()) throw std::out_of_range("SampledPath: last index beyond grid");
}

SampledPath::SampledPath(Grid grid, std::size_t dim, std::vector<double> values)
    : grid_(grid), dim_(dim), last_(0), data_(std::move(values)) {
    if (dim == 0) throw std::invalid_argument("SampledPath: dimension must be at least 1");
    if (data_.empty() || data_.size() % dim != 0) {
        throw std::invalid_argument("SampledPath: value count is not a positive multiple of the dimension");
    }
    last_ = data_.size() / dim - 1;
    if (last_ > grid.steps()) throw std::out_of_range("SampledPath: more values than grid nodes");
}

SampledPath SampledPath::scalar(Grid grid, std::vector<double> values) {
    return SampledPath(grid, 1, std::move(values));
}

SampledPath SampledPath::constant(Grid grid, std::size_t last_index, std::span<const double> value) {
    SampledPath p(grid, value.size(), last_index);
    for (std::size_t j = 0; j <= last_index; ++j) std::ranges::copy(value, p.at(j).begin());
    return p;
}

std::vector<double> SampledPath::value_at(double tau) const {
    const double h = grid_.step();
    if (tau <= 0.0 || last_ == 0) {
        auto v = at(0);
        return {v.begin(), v.end()};
    }
    const double pos = tau / h;
    std::size_t k = static_cast<std::size_t>(std::floor(pos));
    if (k >= last_) {
        auto v = at(last_);
        return {v.begin(), v.end()};
    }
    const double theta = pos - static_cast<double>(k);
    std::vector<double> out(dim_);
    auto a = at(k);
    auto b = at(k + 1);
    for (std::size_t i = 0; i < dim_; ++i) out[i] = (1.0 - theta) * a[i] + theta * b[i];
    return out;
}

SampledPath SampledPath::truncated(std::size_t j) const {
    if (j > last_) {
        throw std::out_of_range("SampledPath::truncated: index " + std::to_string(j) + " beyond last index " +
                                std::to_string(last_));
    }
    std::vector<double> v(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>((j + 1) * dim_));
    return SampledPath(grid_, dim_, std::move(v));
}

bool SampledPath::all_finite() const noexcept {
    return std::ranges::all_of(data_, [](double v) { return std::isfinite(v); });
}

double SampledPath::max_norm() const noexcept {
    double m = 0.0;
    for (std::size_t j = 0; j <= last_; ++j) m = std::max(m, norm(at(j)));
    return m;
}

double norm(std::span<const double> v) noexcept {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double distance(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

} // namespace fhj
