#include "flockmeter/assignment.hpp"

#include <limits>
#include <numeric>

#include "flockmeter/error.hpp"

namespace flockmeter::assignment {
namespace {

constexpr double kLarge = std::numeric_limits<double>::infinity();

// Row accessor: rows(i) returns a pointer to n contiguous costs.
template <typename Rows>
class JonkerVolgenant {
 public:
  JonkerVolgenant(Rows rows, int n)
      : rows_(rows), n_(n), x_(n, -1), y_(n, -1), v_(n, 0.0), free_rows_(n), d_(n), pred_(n), cols_(n) {}

  Solution run() {
    int n_free = column_reduction();
    for (int round = 0; round < 2 && n_free > 0; ++round) n_free = augmenting_row_reduction(n_free);
    if (n_free > 0) augment(n_free);

    Solution out;
    out.row_to_col.resize(n_);
    for (int i = 0; i < n_; ++i) {
      out.row_to_col[i] = static_cast<std::size_t>(x_[i]);
      out.total_cost += rows_(i)[x_[i]];
    }
    return out;
  }

 private:
  int column_reduction() {
    std::fill(v_.begin(), v_.end(), kLarge);
    std::fill(y_.begin(), y_.end(), 0);
    for (int i = 0; i < n_; ++i) {
      const double* c = rows_(i);
      for (int j = 0; j < n_; ++j) {
        if (c[j] < v_[j]) {
          v_[j] = c[j];
          y_[j] = i;
        }
      }
    }
    std::vector<char> unique(n_, 1);
    for (int j = n_ - 1; j >= 0; --j) {
      const int i = y_[j];
      if (x_[i] < 0) {
        x_[i] = j;
      } else {
        unique[i] = 0;
        y_[j] = -1;
      }
    }
    int n_free = 0;
    for (int i = 0; i < n_; ++i) {
      if (x_[i] < 0) {
        free_rows_[n_free++] = i;
      } else if (unique[i]) {
        // Reduction transfer.
        const int j = x_[i];
        const double* c = rows_(i);
        double best = kLarge;
        for (int k = 0; k < n_; ++k) {
          if (k != j && c[k] - v_[k] < best) best = c[k] - v_[k];
        }
        v_[j] -= best;
      }
    }
    return n_free;
  }

  int augmenting_row_reduction(int n_free) {
    int current = 0;
    int new_free = 0;
    long long rr_count = 0;
    while (current < n_free) {
      ++rr_count;
      const int free_i = free_rows_[current++];
      const double* c = rows_(free_i);
      int j1 = 0;
      double u1 = c[0] - v_[0];
      int j2 = -1;
      double u2 = kLarge;
      for (int j = 1; j < n_; ++j) {
        const double h = c[j] - v_[j];
        if (h < u2) {
          if (h >= u1) {
            u2 = h;
            j2 = j;
          } else {
            u2 = u1;
            u1 = h;
            j2 = j1;
            j1 = j;
          }
        }
      }
      int i0 = y_[j1];
      const double v1_new = v_[j1] - (u2 - u1);
      const bool v1_lowers = v1_new < v_[j1];
      if (rr_count < static_cast<long long>(current) * n_) {
        if (v1_lowers) {
          v_[j1] = v1_new;
        } else if (i0 >= 0 && j2 >= 0) {
          j1 = j2;
          i0 = y_[j2];
        }
        if (i0 >= 0) {
          if (v1_lowers) {
            free_rows_[--current] = i0;
          } else {
            free_rows_[new_free++] = i0;
          }
        }
      } else if (i0 >= 0) {
        free_rows_[new_free++] = i0;
      }
      x_[free_i] = j1;
      y_[j1] = free_i;
    }
    return new_free;
  }

  // Moves the columns with minimal d among cols_[lo..] to the front block
  // [lo, hi); returns hi.
  int find_minimal(int lo) {
    int hi = lo + 1;
    double mind = d_[cols_[lo]];
    for (int k = hi; k < n_; ++k) {
      const int j = cols_[k];
      if (d_[j] <= mind) {
        if (d_[j] < mind) {
          hi = lo;
          mind = d_[j];
        }
        cols_[k] = cols_[hi];
        cols_[hi++] = j;
      }
    }
    return hi;
  }

  int scan(int& plo, int& phi) {
    int lo = plo;
    int hi = phi;
    while (lo != hi) {
      int j = cols_[lo++];
      const int i = y_[j];
      const double mind = d_[j];
      const double* c = rows_(i);
      const double h = c[j] - v_[j] - mind;
      for (int k = hi; k < n_; ++k) {
        j = cols_[k];
        const double reduced = c[j] - v_[j] - h;
        if (reduced < d_[j]) {
          d_[j] = reduced;
          pred_[j] = i;
          if (reduced == mind) {
            if (y_[j] < 0) return j;
            cols_[k] = cols_[hi];
            cols_[hi++] = j;
          }
        }
      }
    }
    plo = lo;
    phi = hi;
    return -1;
  }

  int find_path(int start) {
    int lo = 0;
    int hi = 0;
    int final_j = -1;
    int n_ready = 0;
    const double* c = rows_(start);
    for (int j = 0; j < n_; ++j) {
      cols_[j] = j;
      d_[j] = c[j] - v_[j];
      pred_[j] = start;
    }
    while (final_j == -1) {
      if (lo == hi) {
        n_ready = lo;
        hi = find_minimal(lo);
        for (int k = lo; k < hi; ++k) {
          if (y_[cols_[k]] < 0) final_j = cols_[k];
        }
      }
      if (final_j == -1) final_j = scan(lo, hi);
    }
    const double mind = d_[cols_[lo]];
    for (int k = 0; k < n_ready; ++k) {
      const int j = cols_[k];
      v_[j] += d_[j] - mind;
    }
    return final_j;
  }

  void augment(int n_free) {
    for (int f = 0; f < n_free; ++f) {
      const int free_row = free_rows_[f];
      int j = find_path(free_row);
      int i = -1;
      int guard = 0;
      while (i != free_row) {
        i = pred_[j];
        y_[j] = i;
        std::swap(j, x_[i]);
        if (++guard > n_) throw Error("assignment: augmenting path did not terminate");
      }
    }
  }

  Rows rows_;
  int n_;
  std::vector<int> x_;  // row -> col
  std::vector<int> y_;  // col -> row
  std::vector<double> v_;
  std::vector<int> free_rows_;
  std::vector<double> d_;
  std::vector<int> pred_;
  std::vector<int> cols_;
};

template <typename Rows>
Solution run(Rows rows, std::size_t n) {
  if (n == 0) return {};
  if (n > static_cast<std::size_t>(std::numeric_limits<int>::max() / 2)) {
    throw InvalidArgument("assignment: problem too large");
  }
  if (n == 1) return {{0}, rows(0)[0]};
  return JonkerVolgenant<Rows>(rows, static_cast<int>(n)).run();
}

}  // namespace

Solution solve_dense(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) throw InvalidArgument("assignment: cost matrix must be n x n");
  const double* base = cost.data();
  return run([base, n](int i) { return base + static_cast<std::size_t>(i) * n; }, n);
}

Solution solve_shared_rows(std::span<const double> distinct_rows, std::span<const std::size_t> row_index,
                           std::size_t n) {
  if (row_index.size() != n) throw InvalidArgument("assignment: need one row index per row");
  for (std::size_t r : row_index) {
    if ((r + 1) * n > distinct_rows.size()) throw InvalidArgument("assignment: row index out of range");
  }
  const double* base = distinct_rows.data();
  const std::size_t* index = row_index.data();
  return run([base, index, n](int i) { return base + index[i] * n; }, n);
}

}  // namespace flockmeter::assignment
