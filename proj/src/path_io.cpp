#include "fhj/path_io.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fhj {

void write_table_csv(std::ostream& out, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    const auto old_precision = out.precision(17);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << '\n';
    }
    out.precision(old_precision);
}

void write_path_csv(std::ostream& out, const SampledPath& path) {
    std::vector<std::string> header{"t"};
    for (std::size_t i = 0; i < path.dim(); ++i) header.push_back("x" + std::to_string(i + 1));
    std::vector<std::vector<double>> rows;
    rows.reserve(path.size());
    for (std::size_t j = 0; j <= path.last_index(); ++j) {
        std::vector<double> row{path.grid().node(j)};
        auto v = path.at(j);
        row.insert(row.end(), v.begin(), v.end());
        rows.push_back(std::move(row));
    }
    write_table_csv(out, header, rows);
}

SampledPath read_path_csv(std::istream& in, std::optional<double> horizon) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_path_csv: empty input");
    std::size_t columns = 1;
    for (char c : line) columns += (c == ',');
    if (columns < 2 || line.rfind("t,", 0) != 0) throw std::runtime_error("read_path_csv: expected header t,x1,...");
    const std::size_t dim = columns - 1;

    std::vector<double> times;
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            try {
                v = std::stod(cell);
            } catch (const std::exception&) {
                throw std::runtime_error("read_path_csv: malformed number '" + cell + "'");
            }
            if (col == 0) times.push_back(v); else values.push_back(v);
            ++col;
        }
        if (col != columns) throw std::runtime_error("read_path_csv: row has wrong column count");
    }
    if (times.size() < 2) throw std::runtime_error("read_path_csv: at least two rows are required");
    if (times.front() != 0.0) throw std::runtime_error("read_path_csv: time column must start at 0");
    const double h = times[1] - times[0];
    if (!(h > 0.0)) throw std::runtime_error("read_path_csv: time column must be increasing");
    for (std::size_t j = 1; j < times.size(); ++j) {
        if (std::abs(times[j] - h * static_cast<double>(j)) > 1e-9 * std::max(1.0, times.back())) {
            throw std::runtime_error("read_path_csv: non-uniform grids are not supported");
        }
    }
    const double T = horizon.value_or(times.back());
    const double steps = std::round(T / h);
    if (std::abs(steps * h - T) > 1e-9 * std::max(1.0, T)) {
        throw std::runtime_error("read_path_csv: horizon is not a multiple of the grid step");
    }
    return SampledPath(Grid(T, static_cast<std::size_t>(steps)), dim, std::move(values));
}

} // namespace fhj
