#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fhj {

/// Uniform time grid t_j = j * T / N on [0, T].
class Grid {
public:
    Grid(double horizon, std::size_t steps);

    double horizon() const noexcept { return horizon_; }
    std::size_t steps() const noexcept { return steps_; }
    std::size_t node_count() const noexcept { return steps_ + 1; }
    double step() const noexcept { return horizon_ / static_cast<double>(steps_); }
    double node(std::size_t j) const noexcept { return step() * static_cast<double>(j); }

    /// Index of the node closest to t, clamped to [0, N].
    std::size_t nearest_index(double t) const noexcept;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    double horizon_;
    std::size_t steps_;
};

/// Values of a path w: [0, t_j] -> R^n at the grid nodes 0..j, linearly
/// interpolated in between. Storage is node-major.
class SampledPath {
public:
    SampledPath(Grid grid, std::size_t dim, std::size_t last_index);
    SampledPath(Grid grid, std::size_t dim, std::vector<double> values);

    static SampledPath scalar(Grid grid, std::vector<double> values);
    static SampledPath constant(Grid grid, std::size_t last_index, std::span<const double> value);

    const Grid& grid() const noexcept { return grid_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t last_index() const noexcept { return last_; }
    std::size_t size() const noexcept { return last_ + 1; }
    double end_time() const noexcept { return grid_.node(last_); }

    std::span<const double> at(std::size_t j) const { return {data_.data() + j * dim_, dim_}; }
    std::span<double> at(std::size_t j) { return {data_.data() + j * dim_, dim_}; }
    double& operator()(std::size_t j, std::size_t i) { return data_[j * dim_ + i]; }
    double operator()(std::size_t j, std::size_t i) const { return data_[j * dim_ + i]; }

    /// Scalar view of component 0 (valid for every dimension).
    double scalar_at(std::size_t j) const { return data_[j * dim_]; }

    const std::vector<double>& data() const noexcept { return data_; }
    std::vector<double>& data() noexcept { return data_; }

    /// Linear interpolation at time tau in [0, end_time()].
    std::vector<double> value_at(double tau) const;

    /// Copy of the nodes 0..j.
    SampledPath truncated(std::size_t j) const;

    bool all_finite() const noexcept;
    double max_norm() const noexcept;

private:
    Grid grid_;
    std::size_t dim_;
    std::size_t last_;
    std::vector<double> data_;
};

double norm(std::span<const double> v) noexcept;
double dot(std::span<const double> a, std::span<const double> b) noexcept;
double distance(std::span<const double> a, std::span<const double> b) noexcept;

} // namespace fhj
