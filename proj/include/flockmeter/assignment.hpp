#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace flockmeter::assignment {

struct Solution {
  std::vector<std::size_t> row_to_col;  // a permutation of 0..n-1
  double total_cost = 0.0;
};

/// Exact minimum-cost perfect matching on a dense n x n matrix (row-major),
/// Jonker-Volgenant: column reduction, two rounds of augmenting row
/// reduction, then shortest augmenting paths.
Solution solve_dense(std::span<const double> cost, std::size_t n);

/// Same problem where row i of the n x n matrix is stored at
/// distinct_rows[row_index[i] * n]. Cloned measures repeat rows, so this
/// keeps memory at (#distinct rows) x n.
Solution solve_shared_rows(std::span<const double> distinct_rows, std::span<const std::size_t> row_index,
                           std::size_t n);

}  // namespace flockmeter::assignment
