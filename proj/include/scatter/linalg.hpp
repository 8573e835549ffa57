// SPDX-License-Identifier: Apache-2.0
#ifndef SCATTER_LINALG_HPP
#define SCATTER_LINALG_HPP

#include <iosfwd>
#include <memory>
#include <vector>

#include "scatter/common.hpp"

namespace scatter::la {

/// Raw triplet accumulation; duplicate (row, col) entries sum at finalize.
struct ComplexTripletMatrix {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<int> rows;
  std::vector<int> cols;
  std::vector<Complex> vals;

  ComplexTripletMatrix() = default;
  ComplexTripletMatrix(int nr, int nc) : n_rows(nr), n_cols(nc) {}

  void add(int r, int c, Complex v) {
    rows.push_back(r);
    cols.push_back(c);
    vals.push_back(v);
  }
  /// Appends another triplet set with offsets and a scale factor.
  void append(const ComplexTripletMatrix& other, int row_off, int col_off,
              Complex scale = Complex(1.0));
  size_t nnz() const { return vals.size(); }
};

struct CsrMatrix {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<int> row_ptr;  // size n_rows + 1
  std::vector<int> col_idx;  // sorted unique per row
  std::vector<Complex> vals;

  size_t nnz() const { return vals.size(); }
  Eigen::VectorXcd matvec(const Eigen::VectorXcd& x) const;
  Eigen::VectorXcd matvec_adjoint(const Eigen::VectorXcd& x) const;
  double norm_inf() const;  // max absolute row sum
  double norm_1() const;    // max absolute column sum
  double max_abs() const;
  Complex coeff(int r, int c) const;
};

/// Sorts and sums duplicates; validates index ranges.
CsrMatrix finalize(const ComplexTripletMatrix& t);

/// Immutable sparse LU factorization (reusable for repeated right-hand sides).
class SparseFactor {
public:
  explicit SparseFactor(const CsrMatrix& a);
  ~SparseFactor();
  SparseFactor(SparseFactor&&) noexcept;
  SparseFactor& operator=(SparseFactor&&) noexcept;

  Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const;
  /// Solves A^H x = b.
  Eigen::VectorXcd solve_adjoint(const Eigen::VectorXcd& b) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Direct solve with residual check ||Ax - b||_inf / (||A||_inf ||x||_inf) < 1e-10.
Eigen::VectorXcd solve(const CsrMatrix& a, const Eigen::VectorXcd& b);

/// Hager/Higham style 1-norm condition estimate using solves with A and A^H.
double cond1_estimate(const CsrMatrix& a);

/// MatrixMarket coordinate complex output.
void write_matrix_market(std::ostream& os, const CsrMatrix& a);

}  // namespace scatter::la

#endif
