#include "polyfilter/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <tuple>

#include "polyfilter/errors.hpp"

namespace polyfilter {

CsrMatrix::CsrMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_ptr,
                     std::vector<std::size_t> col_idx, std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (row_ptr_.size() != n_rows_ + 1 || row_ptr_.front() != 0 || row_ptr_.back() != col_idx_.size() ||
      col_idx_.size() != values_.size()) {
    throw std::invalid_argument("CsrMatrix: inconsistent row_ptr/col_idx/values lengths");
  }
  for (std::size_t r = 0; r < n_rows_; ++r) {
    if (row_ptr_[r] > row_ptr_[r + 1]) throw std::invalid_argument("CsrMatrix: row_ptr decreasing");
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      if (col_idx_[p] >= n_cols_) throw std::invalid_argument("CsrMatrix: column index out of range");
      if (p > row_ptr_[r] && col_idx_[p] <= col_idx_[p - 1])
        throw std::invalid_argument("CsrMatrix: columns not strictly increasing in row " + std::to_string(r));
    }
  }
}

CsrMatrix CsrMatrix::from_triplets(std::size_t n_rows, std::size_t n_cols,
                                   std::vector<std::tuple<std::size_t, std::size_t, double>> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  std::vector<std::size_t> row_ptr(n_rows + 1, 0);
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  cols.reserve(triplets.size());
  vals.reserve(triplets.size());
  std::size_t prev_r = n_rows, prev_c = n_cols;
  for (const auto& [r, c, v] : triplets) {
    if (r >= n_rows || c >= n_cols) throw std::out_of_range("CsrMatrix::from_triplets: index out of range");
    if (r == prev_r && c == prev_c) {
      vals.back() += v;
      continue;
    }
    cols.push_back(c);
    vals.push_back(v);
    ++row_ptr[r + 1];
    prev_r = r;
    prev_c = c;
  }
  for (std::size_t r = 0; r < n_rows; ++r) row_ptr[r + 1] += row_ptr[r];
  return CsrMatrix(n_rows, n_cols, std::move(row_ptr), std::move(cols), std::move(vals));
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
  std::vector<std::size_t> row_ptr(n + 1), cols(n);
  for (std::size_t i = 0; i <= n; ++i) row_ptr[i] = i;
  for (std::size_t i = 0; i < n; ++i) cols[i] = i;
  return CsrMatrix(n, n, std::move(row_ptr), std::move(cols), std::vector<double>(n, 1.0));
}

double CsrMatrix::at(std::size_t r, std::size_t c) const {
  const auto begin = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
  const auto end = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
  const auto it = std::lower_bound(begin, end, c);
  if (it == end || *it != c) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

bool CsrMatrix::is_symmetric() const {
  if (n_rows_ != n_cols_) return false;
  for (std::size_t r = 0; r < n_rows_; ++r)
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      const std::size_t c = col_idx_[p];
      // Structural presence matters, not just value equality.
      const auto begin = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[c]);
      const auto end = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[c + 1]);
      const auto it = std::lower_bound(begin, end, r);
      if (it == end || *it != r) return false;
      if (values_[static_cast<std::size_t>(it - col_idx_.begin())] != values_[p]) return false;
    }
  return true;
}

Matrix CsrMatrix::to_dense() const {
  Matrix d(n_rows_, n_cols_);
  for (std::size_t r = 0; r < n_rows_; ++r)
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) d(r, col_idx_[p]) = values_[p];
  return d;
}

CsrMatrix CsrMatrix::scaled(double factor) const {
  CsrMatrix out = *this;
  for (double& v : out.values_) v *= factor;
  return out;
}

CsrMatrix symmetrize_dedup(const EdgeList& e) {
  if (e.n_nodes == 0) throw std::invalid_argument("symmetrize_dedup: graph must have at least one node");
  std::vector<std::vector<std::size_t>> nbrs(e.n_nodes);
  for (std::size_t i = 0; i < e.edges.size(); ++i) {
    const auto [s, d] = e.edges[i];
    if (s >= e.n_nodes || d >= e.n_nodes) {
      throw std::out_of_range("edge " + std::to_string(i) + " (" + std::to_string(s) + "," + std::to_string(d) +
                              ") out of range for " + std::to_string(e.n_nodes) + " nodes");
    }
    if (s == d) continue;
    nbrs[s].push_back(d);
    nbrs[d].push_back(s);
  }
  std::vector<std::size_t> row_ptr(e.n_nodes + 1, 0), cols;
  for (std::size_t r = 0; r < e.n_nodes; ++r) {
    auto& n = nbrs[r];
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
    cols.insert(cols.end(), n.begin(), n.end());
    row_ptr[r + 1] = cols.size();
  }
  std::vector<double> vals(cols.size(), 1.0);
  return CsrMatrix(e.n_nodes, e.n_nodes, std::move(row_ptr), std::move(cols), std::move(vals));
}

EdgeList to_edge_list(const CsrMatrix& a) {
  EdgeList out{a.n_rows(), {}};
  for (std::size_t r = 0; r < a.n_rows(); ++r)
    for (std::size_t p = a.row_ptr()[r]; p < a.row_ptr()[r + 1]; ++p)
      if (r < a.col_idx()[p]) out.edges.emplace_back(r, a.col_idx()[p]);
  return out;
}

namespace {

std::vector<double> inv_sqrt_degree(const CsrMatrix& a) {
  std::vector<double> d(a.n_rows(), 0.0);
  for (std::size_t r = 0; r < a.n_rows(); ++r) {
    double deg = 0.0;
    for (std::size_t p = a.row_ptr()[r]; p < a.row_ptr()[r + 1]; ++p) deg += a.values()[p];
    d[r] = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
  }
  return d;
}

// -D^-1/2 A D^-1/2 plus diag_value on every diagonal, all scaled by factor.
CsrMatrix shifted_normalized(const CsrMatrix& a, double diag_value, double factor) {
  if (a.n_rows() != a.n_cols()) throw ShapeError("adjacency must be square");
  const auto dinv = inv_sqrt_degree(a);
  const std::size_t n = a.n_rows();
  std::vector<std::size_t> row_ptr(n + 1, 0), cols;
  std::vector<double> vals;
  cols.reserve(a.nnz() + n);
  vals.reserve(a.nnz() + n);
  for (std::size_t r = 0; r < n; ++r) {
    bool diag_done = diag_value == 0.0;
    for (std::size_t p = a.row_ptr()[r]; p < a.row_ptr()[r + 1]; ++p) {
      const std::size_t c = a.col_idx()[p];
      if (!diag_done && c > r) {
        cols.push_back(r);
        vals.push_back(factor * diag_value);
        diag_done = true;
      }
      if (c == r) continue;  // adjacency from symmetrize_dedup has no diagonal
      cols.push_back(c);
      vals.push_back(-factor * dinv[r] * a.values()[p] * dinv[c]);
    }
    if (!diag_done) {
      cols.push_back(r);
      vals.push_back(factor * diag_value);
    }
    row_ptr[r + 1] = cols.size();
  }
  return CsrMatrix(n, n, std::move(row_ptr), std::move(cols), std::move(vals));
}

}  // namespace

CsrMatrix laplacian_scaled(const CsrMatrix& a) { return shifted_normalized(a, 1.0, 0.5); }

CsrMatrix chebyshev_operator(const CsrMatrix& a) { return shifted_normalized(a, 0.0, 1.0); }

Matrix spmm(const CsrMatrix& m, const Matrix& x) {
  if (m.n_cols() != x.rows) {
    throw ShapeError("spmm: sparse " + std::to_string(m.n_rows()) + "x" + std::to_string(m.n_cols()) +
                     " times dense " + x.shape_str());
  }
  Matrix y(m.n_rows(), x.cols);
  const auto& rp = m.row_ptr();
  const auto& ci = m.col_idx();
  const auto& v = m.values();
  for (std::size_t r = 0; r < m.n_rows(); ++r) {
    double* out = y.data.data() + r * y.cols;
    for (std::size_t p = rp[r]; p < rp[r + 1]; ++p) {
      const double w = v[p];
      const double* in = x.data.data() + ci[p] * x.cols;
      for (std::size_t j = 0; j < x.cols; ++j) out[j] += w * in[j];
    }
  }
  return y;
}

Matrix spmm_transposed(const CsrMatrix& m, const Matrix& x) {
  if (m.n_rows() != x.rows) {
    throw ShapeError("spmm_transposed: sparse " + std::to_string(m.n_rows()) + "x" + std::to_string(m.n_cols()) +
                     "^T times dense " + x.shape_str());
  }
  Matrix y(m.n_cols(), x.cols);
  const auto& rp = m.row_ptr();
  const auto& ci = m.col_idx();
  const auto& v = m.values();
  for (std::size_t r = 0; r < m.n_rows(); ++r) {
    const double* in = x.data.data() + r * x.cols;
    for (std::size_t p = rp[r]; p < rp[r + 1]; ++p) {
      const double w = v[p];
      double* out = y.data.data() + ci[p] * y.cols;
      for (std::size_t j = 0; j < x.cols; ++j) out[j] += w * in[j];
    }
  }
  return y;
}

}  // namespace polyfilter
