#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace hug {

/// Hungarian algorithm on a rectangular cost matrix. Returns, for each row,
/// the assigned column; min(rows, cols) rows receive one.
std::vector<std::optional<std::size_t>> min_cost_assignment(
    const std::vector<std::vector<double>>& cost);

}  // namespace hug
