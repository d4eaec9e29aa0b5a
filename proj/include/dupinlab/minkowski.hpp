#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dupinlab/error.hpp"

namespace dupinlab {

// Indefinite inner product on R^dim with a list of negative slots.
struct Signature {
  int dim = 0;
  std::vector<int> negative;

  // -x0 y0 + sum xi yi
  static Signature one_minus(int dim) { return {dim, {0}}; }
  // -x0 y0 + ... - x_{dim-1} y_{dim-1}
  static Signature two_minus(int dim) { return {dim, {0, dim - 1}}; }

  double sign(int i) const {
    for (int k : negative)
      if (k == i) return -1.0;
    return 1.0;
  }
  Eigen::MatrixXd gram() const {
    Eigen::MatrixXd J = Eigen::MatrixXd::Identity(dim, dim);
    for (int k : negative) J(k, k) = -1.0;
    return J;
  }
  bool operator==(const Signature& o) const { return dim == o.dim && negative == o.negative; }
  bool operator!=(const Signature& o) const { return !(*this == o); }
};

struct SignedVector {
  Eigen::VectorXd x;
  Signature sig;
};

inline double inner(const Eigen::VectorXd& v, const Eigen::VectorXd& w, const Signature& s) {
  if (v.size() != s.dim || w.size() != s.dim)
    throw Error(ErrorCode::SignatureMismatch, "vector length does not match signature");
  double acc = 0.0;
  for (int i = 0; i < s.dim; ++i) acc += s.sign(i) * v[i] * w[i];
  return acc;
}

inline double inner(const SignedVector& v, const SignedVector& w) {
  if (v.sig != w.sig) throw Error(ErrorCode::SignatureMismatch, "inner product across signatures");
  return inner(v.x, w.x, v.sig);
}

inline double norm2(const SignedVector& v) { return inner(v, v); }

// Null up to a tolerance relative to the Euclidean size of v.
inline bool is_null(const SignedVector& v, double tol = 1e-12) {
  return std::abs(norm2(v)) <= tol * std::max(1.0, v.x.squaredNorm());
}

// Null vector (1,-1,0,...,0) used for the Laguerre space-form normalization.
inline SignedVector laguerre_null_vector(int dim) {
  SignedVector p{Eigen::VectorXd::Zero(dim), Signature::two_minus(dim)};
  p.x[0] = 1.0;
  p.x[1] = -1.0;
  return p;
}

struct LorentzTransform {
  Eigen::MatrixXd M;
  Signature sig;

  static LorentzTransform identity(const Signature& s) {
    return {Eigen::MatrixXd::Identity(s.dim, s.dim), s};
  }

  // max |M^T J M - J|
  double defect() const {
    Eigen::MatrixXd J = sig.gram();
    return (M.transpose() * J * M - J).cwiseAbs().maxCoeff();
  }

  SignedVector apply(const SignedVector& v) const {
    if (v.sig != sig) throw Error(ErrorCode::SignatureMismatch, "transform and vector signatures differ");
    return {M * v.x, sig};
  }
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    if (v.size() != sig.dim) throw Error(ErrorCode::SignatureMismatch, "vector length does not match transform");
    return M * v;
  }

  LorentzTransform compose(const LorentzTransform& o) const {
    if (o.sig != sig) throw Error(ErrorCode::SignatureMismatch, "composing transforms across signatures");
    return {M * o.M, sig};
  }
};

inline Eigen::MatrixXd givens(int dim, int i, int j, double angle) {
  Eigen::MatrixXd G = Eigen::MatrixXd::Identity(dim, dim);
  const double c = std::cos(angle), s = std::sin(angle);
  G(i, i) = c;
  G(j, j) = c;
  G(i, j) = -s;
  G(j, i) = s;
  return G;
}

inline Eigen::MatrixXd boost01(int dim, double rapidity) {
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(dim, dim);
  const double c = std::cosh(rapidity), s = std::sinh(rapidity);
  B(0, 0) = c;
  B(1, 1) = c;
  B(0, 1) = s;
  B(1, 0) = s;
  return B;
}

// Rotation of the spatial slots, then a boost in the (0,1) plane, then another
// rotation. The boost rapidity has magnitude in [0.25, 2].
inline LorentzTransform random_orthochronous(std::uint64_t seed, int dim) {
  if (dim < 3) throw Error(ErrorCode::SignatureMismatch, "need dim >= 3");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  std::uniform_real_distribution<double> mag(0.25, 2.0);
  std::bernoulli_distribution flip(0.5);
  auto rotation = [&] {
    Eigen::MatrixXd R = Eigen::MatrixXd::Identity(dim, dim);
    for (int i = 1; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j) R = givens(dim, i, j, angle(rng)) * R;
    return R;
  };
  Eigen::MatrixXd R1 = rotation();
  double phi = mag(rng);
  if (flip(rng)) phi = -phi;
  Eigen::MatrixXd R2 = rotation();
  return {R2 * boost01(dim, phi) * R1, Signature::one_minus(dim)};
}

}  // namespace dupinlab
