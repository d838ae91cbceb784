#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fhj/path.hpp"

namespace fhj {

/// CSV with header `t,x1,...,xn`, one node per row, 17 significant digits.
void write_path_csv(std::ostream& out, const SampledPath& path);

/// Reads the format written by write_path_csv. The grid step is taken from the
/// time column, which must be uniform and start at 0. When `horizon` is given
/// the grid spans [0, horizon]; otherwise it ends at the last row.
SampledPath read_path_csv(std::istream& in, std::optional<double> horizon = std::nullopt);

/// Generic numeric table writer used for characteristic and series exports.
void write_table_csv(std::ostream& out, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

} // namespace fhj
