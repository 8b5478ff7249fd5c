#pragma once

#include <cstddef>
#include <tuple>
#include <utility>
#include <vector>

#include "polyfilter/matrix.hpp"

namespace polyfilter {

/// Graph edges as given on input. Self-loops and duplicates are allowed here.
struct EdgeList {
  std::size_t n_nodes = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
};

/// Compressed sparse row matrix.
///
/// Invariants: row_ptr[0] == 0, row_ptr is non-decreasing, row_ptr[n_rows] equals
/// col_idx.size() and values.size(); column indices are strictly increasing within
/// a row and bounded by n_cols.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_ptr,
            std::vector<std::size_t> col_idx, std::vector<double> values);

  /// Builds from (row, col, value) triplets. Duplicate coordinates are summed.
  static CsrMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                 std::vector<std::tuple<std::size_t, std::size_t, double>> triplets);
  static CsrMatrix identity(std::size_t n);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t nnz() const { return values_.size(); }
  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }

  /// Entry lookup; 0 for structurally absent entries.
  double at(std::size_t r, std::size_t c) const;
  bool is_symmetric() const;
  Matrix to_dense() const;
  CsrMatrix scaled(double factor) const;

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

/// Binary symmetric adjacency: self-loops dropped, duplicates collapsed.
/// Throws std::out_of_range naming the first offending edge.
CsrMatrix symmetrize_dedup(const EdgeList& edges);

/// Edge list (i < j pairs) recovered from an adjacency matrix.
EdgeList to_edge_list(const CsrMatrix& adjacency);

/// 0.5 * (I - D^-1/2 A D^-1/2), spectrum in [0, 1]. Isolated nodes use
/// D^-1/2 = 0, so their diagonal entry is 0.5.
CsrMatrix laplacian_scaled(const CsrMatrix& adjacency);

/// L_sym - I = -D^-1/2 A D^-1/2, spectrum in [-1, 1]. Domain of the Chebyshev basis.
CsrMatrix chebyshev_operator(const CsrMatrix& adjacency);

/// Sparse times dense. Each output row is accumulated in ascending column order.
Matrix spmm(const CsrMatrix& m, const Matrix& x);

/// mᵀ times dense, with the same deterministic ordering per input row.
Matrix spmm_transposed(const CsrMatrix& m, const Matrix& x);

}  // namespace polyfilter
