#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "dupinlab/error.hpp"
#include "dupinlab/jet.hpp"

namespace dupinlab {

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.value(); }

// Row-major dense matrix over double or Jet. Sizes here are tiny (n <= 8),
// so the algorithms are the textbook ones.
template <class T>
struct Mat {
  int rows = 0, cols = 0;
  std::vector<T> a;

  Mat() = default;
  Mat(int r, int c, const T& fill) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, fill) {}

  T& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  const T& operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  Eigen::MatrixXd values() const {
    Eigen::MatrixXd M(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) M(i, j) = value_of((*this)(i, j));
    return M;
  }
};

template <class T>
Mat<T> operator*(const Mat<T>& A, const Mat<T>& B) {
  if (A.cols != B.rows) throw Error(ErrorCode::DimensionMismatch, "matrix product shapes");
  Mat<T> C(A.rows, B.cols, A(0, 0));
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < B.cols; ++j) {
      T acc = A(i, 0) * B(0, j);
      for (int k = 1; k < A.cols; ++k) acc = acc + A(i, k) * B(k, j);
      C(i, j) = acc;
    }
  return C;
}

template <class T>
T trace(const Mat<T>& A) {
  T acc = A(0, 0);
  for (int i = 1; i < A.rows; ++i) acc = acc + A(i, i);
  return acc;
}

template <class T>
Mat<T> transpose(const Mat<T>& A) {
  Mat<T> B(A.cols, A.rows, A(0, 0));
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) B(j, i) = A(i, j);
  return B;
}

// Gauss-Jordan with partial pivoting on the value level.
template <class T>
Mat<T> inverse(const Mat<T>& A) {
  const int n = A.rows;
  if (A.cols != n) throw Error(ErrorCode::DimensionMismatch, "inverse of a non-square matrix");
  Mat<T> M = A;
  Mat<T> I(n, n, A(0, 0) * 0.0);
  for (int i = 0; i < n; ++i) I(i, i) = I(i, i) + 1.0;
  double scale = 0.0;
  for (const T& x : A.a) scale = std::max(scale, std::abs(value_of(x)));
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(value_of(M(r, c))) > std::abs(value_of(M(p, c)))) p = r;
    if (std::abs(value_of(M(p, c))) <= 1e-14 * std::max(scale, 1e-300))
      throw Error(ErrorCode::RankDeficient, "singular matrix");
    if (p != c)
      for (int j = 0; j < n; ++j) {
        std::swap(M(p, j), M(c, j));
        std::swap(I(p, j), I(c, j));
      }
    T inv = 1.0 / M(c, c);
    for (int j = 0; j < n; ++j) {
      M(c, j) = M(c, j) * inv;
      I(c, j) = I(c, j) * inv;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      T f = M(r, c);
      for (int j = 0; j < n; ++j) {
        M(r, j) = M(r, j) - f * M(c, j);
        I(r, j) = I(r, j) - f * I(c, j);
      }
    }
  }
  return I;
}

template <class T>
T determinant(Mat<T> M) {
  const int n = M.rows;
  T det = M(0, 0) * 0.0 + 1.0;
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(value_of(M(r, c))) > std::abs(value_of(M(p, c)))) p = r;
    if (value_of(M(p, c)) == 0.0) return M(0, 0) * 0.0;
    if (p != c) {
      for (int j = 0; j < n; ++j) std::swap(M(p, j), M(c, j));
      det = -det;
    }
    det = det * M(c, c);
    T inv = 1.0 / M(c, c);
    for (int r = c + 1; r < n; ++r) {
      T f = M(r, c) * inv;
      for (int j = c; j < n; ++j) M(r, j) = M(r, j) - f * M(c, j);
    }
  }
  return det;
}

// Vector N with N_k = det[J | e_k] for a (m+1) x m matrix J, so that
// det[J | N] = |N|^2 > 0 and N is orthogonal to the columns of J.
template <class T>
std::vector<T> cross_product(const Mat<T>& J) {
  const int m = J.cols;
  if (J.rows != m + 1) throw Error(ErrorCode::DimensionMismatch, "cross product needs (m+1) x m");
  std::vector<T> N;
  for (int k = 0; k <= m; ++k) {
    T zero = J(0, 0) * 0.0;
    if (m == 0) {
      N.push_back(zero + 1.0);
      continue;
    }
    Mat<T> minor(m, m, zero);
    for (int r = 0, rr = 0; r <= m; ++r) {
      if (r == k) continue;
      for (int c = 0; c < m; ++c) minor(rr, c) = J(r, c);
      ++rr;
    }
    // expansion of det[J | e_k] along the last column
    T d = determinant(minor);
    N.push_back(((k + m) % 2) ? -d : d);
  }
  return N;
}

template <class T>
T dot(const std::vector<T>& x, const std::vector<T>& y) {
  T acc = x[0] * y[0];
  for (std::size_t i = 1; i < x.size(); ++i) acc = acc + x[i] * y[i];
  return acc;
}

inline Eigen::VectorXd values(const std::vector<Jet>& v) {
  Eigen::VectorXd r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[i].value();
  return r;
}

}  // namespace dupinlab
