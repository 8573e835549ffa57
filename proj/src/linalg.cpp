// SPDX-License-Identifier: Apache-2.0
#include "scatter/linalg.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>

#include <Eigen/LU>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace scatter::la {

void ComplexTripletMatrix::append(const ComplexTripletMatrix& other, int row_off,
                                  int col_off, Complex scale) {
  rows.reserve(rows.size() + other.rows.size());
  cols.reserve(cols.size() + other.cols.size());
  vals.reserve(vals.size() + other.vals.size());
  for (size_t i = 0; i < other.vals.size(); ++i) {
    rows.push_back(other.rows[i] + row_off);
    cols.push_back(other.cols[i] + col_off);
    vals.push_back(other.vals[i] * scale);
  }
}

CsrMatrix finalize(const ComplexTripletMatrix& t) {
  for (size_t i = 0; i < t.vals.size(); ++i) {
    if (t.rows[i] < 0 || t.rows[i] >= t.n_rows || t.cols[i] < 0 ||
        t.cols[i] >= t.n_cols)
      throw DomainError("finalize: triplet index out of range");
  }
  std::vector<size_t> order(t.vals.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (t.rows[a] != t.rows[b]) return t.rows[a] < t.rows[b];
    if (t.cols[a] != t.cols[b]) return t.cols[a] < t.cols[b];
    return a < b;  // stable, deterministic summation order
  });

  CsrMatrix m;
  m.n_rows = t.n_rows;
  m.n_cols = t.n_cols;
  m.row_ptr.assign(t.n_rows + 1, 0);
  for (size_t idx = 0; idx < order.size();) {
    const int r = t.rows[order[idx]];
    const int c = t.cols[order[idx]];
    Complex sum = 0.0;
    while (idx < order.size() && t.rows[order[idx]] == r &&
           t.cols[order[idx]] == c) {
      sum += t.vals[order[idx]];
      ++idx;
    }
    m.col_idx.push_back(c);
    m.vals.push_back(sum);
    ++m.row_ptr[r + 1];
  }
  for (int r = 0; r < t.n_rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
  return m;
}

Eigen::VectorXcd CsrMatrix::matvec(const Eigen::VectorXcd& x) const {
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(n_rows);
  for (int r = 0; r < n_rows; ++r)
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
      y[r] += vals[k] * x[col_idx[k]];
  return y;
}

Eigen::VectorXcd CsrMatrix::matvec_adjoint(const Eigen::VectorXcd& x) const {
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(n_cols);
  for (int r = 0; r < n_rows; ++r)
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
      y[col_idx[k]] += std::conj(vals[k]) * x[r];
  return y;
}

double CsrMatrix::norm_inf() const {
  double mx = 0.0;
  for (int r = 0; r < n_rows; ++r) {
    double s = 0.0;
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += std::abs(vals[k]);
    mx = std::max(mx, s);
  }
  return mx;
}

double CsrMatrix::norm_1() const {
  std::vector<double> col_sum(n_cols, 0.0);
  for (int r = 0; r < n_rows; ++r)
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
      col_sum[col_idx[k]] += std::abs(vals[k]);
  double mx = 0.0;
  for (double s : col_sum) mx = std::max(mx, s);
  return mx;
}

double CsrMatrix::max_abs() const {
  double mx = 0.0;
  for (const Complex& v : vals) mx = std::max(mx, std::abs(v));
  return mx;
}

Complex CsrMatrix::coeff(int r, int c) const {
  for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
    if (col_idx[k] == c) return vals[k];
  return 0.0;
}

namespace {
using SpMat = Eigen::SparseMatrix<Complex, Eigen::ColMajor>;

SpMat to_eigen(const CsrMatrix& a) {
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(a.nnz());
  for (int r = 0; r < a.n_rows; ++r)
    for (int k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k)
      trips.emplace_back(r, a.col_idx[k], a.vals[k]);
  SpMat m(a.n_rows, a.n_cols);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}
}  // namespace

struct SparseFactor::Impl {
  SpMat mat;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  bool dense_fallback = false;
  Eigen::PartialPivLU<Eigen::MatrixXcd> dense_lu;
  Eigen::MatrixXcd dense;
};

SparseFactor::SparseFactor(const CsrMatrix& a) : impl_(std::make_unique<Impl>()) {
  if (a.n_rows != a.n_cols)
    throw DomainError("SparseFactor: matrix must be square");
  impl_->mat = to_eigen(a);
  impl_->lu.analyzePattern(impl_->mat);
  impl_->lu.factorize(impl_->mat);
  if (impl_->lu.info() != Eigen::Success) {
    if (a.n_rows <= 4096) {
      impl_->dense_fallback = true;
      impl_->dense = Eigen::MatrixXcd(impl_->mat);
      impl_->dense_lu.compute(impl_->dense);
      Eigen::VectorXcd probe = Eigen::VectorXcd::Ones(a.n_rows);
      Eigen::VectorXcd x = impl_->dense_lu.solve(probe);
      if (!x.allFinite())
        throw SingularityError("SparseFactor: matrix singular to working precision");
    } else {
      throw SingularityError(
          "SparseFactor: sparse LU failed (singular to working precision); "
          "pivot diagnostics: " +
          std::string(impl_->lu.lastErrorMessage()));
    }
  }
}

SparseFactor::~SparseFactor() = default;
SparseFactor::SparseFactor(SparseFactor&&) noexcept = default;
SparseFactor& SparseFactor::operator=(SparseFactor&&) noexcept = default;

Eigen::VectorXcd SparseFactor::solve(const Eigen::VectorXcd& b) const {
  Eigen::VectorXcd x;
  if (impl_->dense_fallback)
    x = impl_->dense_lu.solve(b);
  else
    x = impl_->lu.solve(b);
  if (!x.allFinite())
    throw SingularityError("SparseFactor::solve produced non-finite values");
  return x;
}

Eigen::VectorXcd SparseFactor::solve_adjoint(const Eigen::VectorXcd& b) const {
  Eigen::VectorXcd x;
  if (impl_->dense_fallback)
    x = impl_->dense_lu.adjoint().solve(b);
  else
    x = impl_->lu.adjoint().solve(b);
  if (!x.allFinite())
    throw SingularityError("SparseFactor::solve_adjoint produced non-finite values");
  return x;
}

Eigen::VectorXcd solve(const CsrMatrix& a, const Eigen::VectorXcd& b) {
  if (a.n_rows != a.n_cols) throw DomainError("solve: matrix must be square");
  if (b.size() != a.n_rows) throw DomainError("solve: rhs size mismatch");
  SparseFactor f(a);
  Eigen::VectorXcd x = f.solve(b);
  const double denom = a.norm_inf() * x.lpNorm<Eigen::Infinity>();
  const double resid = (a.matvec(x) - b).lpNorm<Eigen::Infinity>();
  if (denom > 0.0 && resid > 1e-10 * denom)
    throw SingularityError("solve: residual check failed (ill-conditioned system)");
  return x;
}

double cond1_estimate(const CsrMatrix& a) {
  if (a.n_rows != a.n_cols)
    throw DomainError("cond1_estimate: matrix must be square");
  const int n = a.n_rows;
  if (n == 0) return 0.0;
  const double norm_a = a.norm_1();
  if (norm_a == 0.0) return 0.0;
  SparseFactor f(a);

  auto hager = [&](Eigen::VectorXcd x) {
    double est = 0.0;
    for (int iter = 0; iter < 6; ++iter) {
      Eigen::VectorXcd y = f.solve(x);
      est = y.lpNorm<1>();
      Eigen::VectorXcd xi(n);
      for (int i = 0; i < n; ++i) {
        const double m = std::abs(y[i]);
        xi[i] = (m > 0.0) ? y[i] / m : Complex(1.0);
      }
      Eigen::VectorXcd z = f.solve_adjoint(xi);
      int jmax = 0;
      double zmax = 0.0;
      for (int i = 0; i < n; ++i) {
        if (std::abs(z[i]) > zmax) {
          zmax = std::abs(z[i]);
          jmax = i;
        }
      }
      if (zmax <= std::real(z.dot(x))) break;
      x.setZero();
      x[jmax] = 1.0;
    }
    return est;
  };

  double est = hager(Eigen::VectorXcd::Constant(n, Complex(1.0 / n)));
  // LAPACK-style alternate start vector to reduce underestimation
  Eigen::VectorXcd alt(n);
  for (int i = 0; i < n; ++i) {
    const double s = (i % 2 == 0) ? 1.0 : -1.0;
    alt[i] = s * (1.0 + static_cast<double>(i) / std::max(1, n - 1));
  }
  alt /= alt.lpNorm<1>();
  est = std::max(est, hager(alt));
  return est * norm_a;
}

void write_matrix_market(std::ostream& os, const CsrMatrix& a) {
  os << "%%MatrixMarket matrix coordinate complex general\n";
  os << a.n_rows << " " << a.n_cols << " " << a.nnz() << "\n";
  char buf[96];
  for (int r = 0; r < a.n_rows; ++r)
    for (int k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g\n", r + 1,
                    a.col_idx[k] + 1, a.vals[k].real(), a.vals[k].imag());
      os << buf;
    }
}

}  // namespace scatter::la
