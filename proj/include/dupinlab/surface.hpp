#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "dupinlab/error.hpp"
#include "dupinlab/immersion.hpp"
#include "dupinlab/jet.hpp"
#include "dupinlab/linalg.hpp"

namespace dupinlab {

struct Tolerances {
  double eps_group = 1e-8;
  double eps_umb = 1e-10;
  double eps_rad = 1e-8;
};

// Partition of sorted values into runs whose consecutive gaps are < eps.
// A gap in [eps, 10 eps) means the tolerance cannot decide.
inline std::vector<std::vector<int>> group_sorted(std::span<const double> v, double eps) {
  std::vector<std::vector<int>> groups;
  for (int i = 0; i < static_cast<int>(v.size()); ++i) {
    if (i == 0) {
      groups.push_back({0});
      continue;
    }
    const double gap = v[i] - v[i - 1];
    if (gap >= eps && gap < 10.0 * eps)
      throw Error(ErrorCode::GroupingAmbiguous, "eigenvalue gap " + std::to_string(gap) + " within the 10x guard band");
    if (gap < eps)
      groups.back().push_back(i);
    else
      groups.push_back({i});
  }
  return groups;
}

// Group ids for values in arbitrary order (same tolerance semantics).
inline std::vector<int> group_ids(std::span<const double> v, double eps) {
  std::vector<int> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return v[a] < v[b]; });
  std::vector<double> sorted;
  for (int i : order) sorted.push_back(v[i]);
  auto groups = group_sorted(sorted, eps);
  std::vector<int> id(v.size());
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (int k : groups[g]) id[order[k]] = static_cast<int>(g);
  return id;
}

struct EigenPairs {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns, G-orthonormal
};

// Solve A v = lambda G v; columns sorted by value then lexicographically by
// vector, each with its largest-magnitude entry made positive.
inline EigenPairs generalized_eigen(const Eigen::MatrixXd& A, const Eigen::MatrixXd& G) {
  const int n = static_cast<int>(A.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::MetricNotPositive, "metric not positive definite");
  Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd Linv = L.inverse();
  Eigen::MatrixXd S = Linv * A * Linv.transpose();
  S = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  Eigen::MatrixXd V = Linv.transpose() * es.eigenvectors();
  for (int j = 0; j < n; ++j) {
    Eigen::Index k;
    V.col(j).cwiseAbs().maxCoeff(&k);
    if (V(k, j) < 0) V.col(j) *= -1.0;
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const Eigen::VectorXd ev = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (ev[a] != ev[b]) return ev[a] < ev[b];
    for (int r = 0; r < n; ++r)
      if (V(r, a) != V(r, b)) return V(r, a) < V(r, b);
    return false;
  });
  EigenPairs out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (int j = 0; j < n; ++j) {
    out.values[j] = ev[order[j]];
    out.vectors.col(j) = V.col(order[j]);
  }
  return out;
}

// Jets of the classical invariants of a hypersurface at one point. For a
// spherical immersion the normal is taken tangent to the sphere.
struct SurfaceJets {
  int n = 0;
  int orientation = 1;
  JetVector f;        // order K
  Mat<Jet> df;        // (dim_out) x n, order K-1
  Mat<Jet> I, Iinv;   // order K-1
  JetVector nu;       // unit normal, order K-1
  Mat<Jet> h;         // second fundamental form, order K-2
  Mat<Jet> S;         // shape operator I^{-1} h
};

inline Mat<Jet> jacobian(const JetVector& f, int n) {
  Mat<Jet> J(static_cast<int>(f.size()), n, Jet{});
  for (int r = 0; r < J.rows; ++r)
    for (int c = 0; c < n; ++c) J(r, c) = f[r].partial(c);
  return J;
}

inline JetVector raw_normal(const Immersion& imm, const Mat<Jet>& J, const JetVector& f) {
  const int n = imm.dim_in;
  if (imm.spherical) {
    Mat<Jet> Ja(J.rows, n + 1, Jet{});
    for (int r = 0; r < J.rows; ++r) {
      for (int c = 0; c < n; ++c) Ja(r, c) = J(r, c);
      Ja(r, n) = f[r].truncate(J(r, 0).order());
    }
    return cross_product(Ja);
  }
  return cross_product(J);
}

inline void check_rank(const Mat<Jet>& J) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J.values());
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[s.size() - 1] <= 1e-10 * std::max(1.0, s[0]))
    throw Error(ErrorCode::RankDeficient, "Jacobian rank below n");
}

// Sign making the last clearly nonzero normal component positive at the
// centre of the parameter box.
inline int orientation_sign(const Immersion& imm) {
  const std::vector<double> p = imm.base_point();
  JetVector f = imm.eval_jet(p, 1);
  Mat<Jet> J = jacobian(f, imm.dim_in);
  check_rank(J);
  Eigen::VectorXd N = values(raw_normal(imm, J, f));
  const double big = N.cwiseAbs().maxCoeff();
  for (int k = static_cast<int>(N.size()) - 1; k >= 0; --k)
    if (std::abs(N[k]) > 1e-9 * big) return N[k] > 0 ? 1 : -1;
  return 1;
}

inline SurfaceJets surface_jets(const Immersion& imm, std::span<const double> p, int order, int orientation) {
  if (order < 2) throw Error(ErrorCode::OrderUnavailable, "fundamental forms need order >= 2");
  SurfaceJets s;
  const int n = imm.dim_in;
  s.n = n;
  s.orientation = orientation;
  s.f = imm.eval_jet(p, order);
  s.df = jacobian(s.f, n);
  check_rank(s.df);
  s.I = transpose(s.df) * s.df;
  s.Iinv = inverse(s.I);
  JetVector N = raw_normal(imm, s.df, s.f);
  Jet inv_len = pow(dot(N, N), -0.5) * static_cast<double>(orientation);
  for (auto& x : N) s.nu.push_back(x * inv_len);
  s.h = Mat<Jet>(n, n, Jet{});
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      Jet acc = s.df(0, a).partial(b) * s.nu[0];
      for (int r = 1; r < s.df.rows; ++r) acc = acc + s.df(r, a).partial(b) * s.nu[r];
      s.h(a, b) = acc;
      s.h(b, a) = acc;
    }
  s.S = s.Iinv * s.h;
  return s;
}

struct PointFrame {
  std::vector<double> point;
  Eigen::MatrixXd I;      // coordinate first fundamental form
  Eigen::MatrixXd h;      // coordinate second fundamental form
  Eigen::MatrixXd II;     // h in the Gram-Schmidt I-orthonormal frame
  Eigen::MatrixXd basis;  // coordinate components of that frame (columns)
  Eigen::MatrixXd frame;  // ambient tangent vectors of that frame (columns)
  Eigen::VectorXd normal;
  double H = 0.0;
  int orientation = 1;
};

inline PointFrame fundamental_forms(const Immersion& imm, std::span<const double> p, int orientation = 0) {
  if (orientation == 0) orientation = orientation_sign(imm);
  SurfaceJets s = surface_jets(imm, p, 2, orientation);
  PointFrame pf;
  pf.point.assign(p.begin(), p.end());
  pf.orientation = orientation;
  pf.I = s.I.values();
  pf.h = s.h.values();
  pf.normal = values(s.nu);
  // Gram-Schmidt on coordinate tangents == inverse transpose Cholesky factor
  Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(pf.I).matrixL();
  pf.basis = L.inverse().transpose();
  pf.II = pf.basis.transpose() * pf.h * pf.basis;
  pf.frame = s.df.values() * pf.basis;
  pf.H = pf.II.trace() / s.n;
  return pf;
}

struct PrincipalData {
  std::vector<double> lambdas;              // ascending
  Eigen::MatrixXd directions;               // coordinate vectors, I-orthonormal
  std::vector<std::vector<int>> groups;     // 0-based index classes
  int r = 0;
  double residual = 0.0;                    // max |h v - lambda I v|
};

inline PrincipalData principal_decomposition(const PointFrame& pf, double eps_group = 1e-8) {
  EigenPairs ep = generalized_eigen(pf.h, pf.I);
  PrincipalData pd;
  pd.lambdas.assign(ep.values.data(), ep.values.data() + ep.values.size());
  pd.directions = ep.vectors;
  pd.groups = group_sorted(pd.lambdas, eps_group);
  pd.r = static_cast<int>(pd.groups.size());
  for (int j = 0; j < ep.values.size(); ++j)
    pd.residual = std::max(pd.residual,
                           (pf.h * ep.vectors.col(j) - ep.values[j] * pf.I * ep.vectors.col(j)).cwiseAbs().maxCoeff());
  return pd;
}

// (x_i - x_j)/(x_i - x_s), used for both principal curvatures and radii.
inline double cross_ratio(std::span<const double> x, int i, int j, int s, double eps) {
  const double den = x[i] - x[s];
  if (std::abs(den) <= eps) throw Error(ErrorCode::DegenerateDenominator, "ratio denominator vanishes");
  return (x[i] - x[j]) / den;
}
inline double moebius_curvature(std::span<const double> lambdas, int i, int j, int s, double eps = 1e-8) {
  return cross_ratio(lambdas, i, j, s, eps);
}
inline double laguerre_curvature(std::span<const double> radii, int i, int j, int s, double eps = 1e-8) {
  return cross_ratio(radii, i, j, s, eps);
}

// ---------------------------------------------------------------------------
// Riemannian engine on a coordinate patch.
//
// Convention: R(X,Y)Z = D_X D_Y Z - D_Y D_X Z - D_[X,Y] Z and
// R_ijkl = <R(E_i,E_j)E_l, E_k>, so R_ijij is the sectional curvature and the
// round S^2 has R_1212 = +1.

inline std::size_t idx3(int n, int a, int b, int c) { return (static_cast<std::size_t>(a) * n + b) * n + c; }
inline std::size_t idx4(int n, int a, int b, int c, int d) {
  return ((static_cast<std::size_t>(a) * n + b) * n + c) * n + d;
}

struct CurvatureJets {
  int n = 0;
  Mat<Jet> g, ginv;
  std::vector<Jet> gamma;  // Gamma^a_{bc} at idx3(a,b,c), order k-1
  std::vector<Jet> R;      // R_abcd at idx4, order k-2
  Mat<Jet> ricci;          // Ric_ac = g^{bd} R_abcd
  Jet scalar;
};

inline std::vector<Jet> christoffels(const Mat<Jet>& g, const Mat<Jet>& ginv) {
  const int n = g.rows;
  std::vector<Mat<Jet>> dg;
  for (int c = 0; c < n; ++c) {
    Mat<Jet> m(n, n, Jet{});
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) m(a, b) = g(a, b).partial(c);
    dg.push_back(m);
  }
  std::vector<Jet> G(static_cast<std::size_t>(n) * n * n);
  for (int b = 0; b < n; ++b)
    for (int c = b; c < n; ++c) {
      // first kind: [bc,d] = (d_b g_dc + d_c g_db - d_d g_bc)/2
      std::vector<Jet> first;
      for (int d = 0; d < n; ++d) first.push_back(0.5 * (dg[b](d, c) + dg[c](d, b) - dg[d](b, c)));
      for (int a = 0; a < n; ++a) {
        Jet acc = ginv(a, 0) * first[0];
        for (int d = 1; d < n; ++d) acc = acc + ginv(a, d) * first[d];
        G[idx3(n, a, b, c)] = acc;
        G[idx3(n, a, c, b)] = acc;
      }
    }
  return G;
}

inline CurvatureJets curvature_jets(const Mat<Jet>& g) {
  CurvatureJets cj;
  const int n = g.rows;
  cj.n = n;
  cj.g = g;
  Eigen::LLT<Eigen::MatrixXd> llt(g.values());
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::MetricNotPositive, "metric not positive definite");
  if (g(0, 0).order() < 2) throw Error(ErrorCode::OrderUnavailable, "curvature needs metric jets of order 2");
  cj.ginv = inverse(g);
  cj.gamma = christoffels(g, cj.ginv);
  const auto& G = cj.gamma;
  // R^e_{dab} = d_a G^e_{bd} - d_b G^e_{ad} + G^e_{af} G^f_{bd} - G^e_{bf} G^f_{ad}
  std::vector<Jet> Rup(static_cast<std::size_t>(n) * n * n * n);
  for (int e = 0; e < n; ++e)
    for (int d = 0; d < n; ++d)
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          Jet acc = G[idx3(n, e, b, d)].partial(a) - G[idx3(n, e, a, d)].partial(b);
          for (int f = 0; f < n; ++f)
            acc = acc + G[idx3(n, e, a, f)] * G[idx3(n, f, b, d)] - G[idx3(n, e, b, f)] * G[idx3(n, f, a, d)];
          Rup[idx4(n, e, d, a, b)] = acc;
          Rup[idx4(n, e, d, b, a)] = -acc;
        }
  const Jet zero = Rup[idx4(n, 0, 0, 0, n > 1 ? 1 : 0)] * 0.0;
  for (int e = 0; e < n; ++e)
    for (int d = 0; d < n; ++d)
      for (int a = 0; a < n; ++a) Rup[idx4(n, e, d, a, a)] = zero;
  // R_abcd = <R(d_a,d_b) d_d, d_c> = g_ce R^e_{dab}
  cj.R.assign(static_cast<std::size_t>(n) * n * n * n, zero);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          Jet acc = g(c, 0) * Rup[idx4(n, 0, d, a, b)];
          for (int e = 1; e < n; ++e) acc = acc + g(c, e) * Rup[idx4(n, e, d, a, b)];
          cj.R[idx4(n, a, b, c, d)] = acc;
        }
  cj.ricci = Mat<Jet>(n, n, zero);
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      Jet acc = zero;
      for (int b = 0; b < n; ++b)
        for (int d = 0; d < n; ++d) acc = acc + cj.ginv(b, d) * cj.R[idx4(n, a, b, c, d)];
      cj.ricci(a, c) = acc;
    }
  Jet sc = zero;
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) sc = sc + cj.ginv(a, c) * cj.ricci(a, c);
  cj.scalar = sc;
  return cj;
}

// g-orthonormal frame from the Cholesky factor (Gram-Schmidt on d_1..d_n).
inline Eigen::MatrixXd default_frame(const Eigen::MatrixXd& g) {
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::MetricNotPositive, "metric not positive definite");
  Eigen::MatrixXd L = llt.matrixL();
  return L.inverse().transpose();
}

struct RiemannData {
  int n = 0;
  Eigen::MatrixXd metric;
  std::vector<double> christoffel;  // Gamma^a_{bc}
  Eigen::MatrixXd frame;            // columns: coordinate components of E_i
  std::vector<double> R;            // frame components R_ijkl
  Eigen::MatrixXd ricci;            // frame components Ric_ij = sum_k R_ikjk
  double kappa = 0.0;
  double symmetry_residual = 0.0;
  double bianchi_residual = 0.0;

  double operator()(int i, int j, int k, int l) const { return R[idx4(n, i, j, k, l)]; }
  double sectional(int i, int j) const { return R[idx4(n, i, j, i, j)]; }
};

inline std::vector<double> to_frame4(const std::vector<double>& T, const Eigen::MatrixXd& E) {
  const int n = static_cast<int>(E.rows());
  std::vector<double> cur = T, nxt(cur.size());
  // contract one slot at a time; each pass rotates the slot order
  for (int pass = 0; pass < 4; ++pass) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int d = 0; d < n; ++d) acc += cur[idx4(n, d, a, b, c)] * E(d, i);
            nxt[idx4(n, a, b, c, i)] = acc;
          }
    std::swap(cur, nxt);
  }
  return cur;
}

inline RiemannData riemann_data(const CurvatureJets& cj, const Eigen::MatrixXd* frame = nullptr) {
  RiemannData rd;
  const int n = cj.n;
  rd.n = n;
  rd.metric = cj.g.values();
  rd.frame = frame ? *frame : default_frame(rd.metric);
  if (rd.frame.rows() != n || rd.frame.cols() != n) throw Error(ErrorCode::FrameMismatch, "frame size");
  for (const Jet& x : cj.gamma) rd.christoffel.push_back(x.value());
  std::vector<double> Rc;
  for (const Jet& x : cj.R) Rc.push_back(x.value());
  rd.R = to_frame4(Rc, rd.frame);
  rd.ricci = Eigen::MatrixXd::Zero(n, n);
  double sc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) rd.ricci(i, j) += rd(i, k, j, k);
      sc += rd(i, j, i, j);
    }
  rd.kappa = n > 1 ? sc / (n * (n - 1.0)) : 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double v = rd(i, j, k, l);
          rd.symmetry_residual = std::max({rd.symmetry_residual, std::abs(v + rd(j, i, k, l)),
                                           std::abs(v + rd(i, j, l, k)), std::abs(v - rd(k, l, i, j))});
          rd.bianchi_residual = std::max(rd.bianchi_residual, std::abs(v + rd(j, k, i, l) + rd(k, i, j, l)));
        }
  return rd;
}

inline RiemannData riemann_of_metric(const Mat<Jet>& g, const Eigen::MatrixXd* frame = nullptr) {
  return riemann_data(curvature_jets(g), frame);
}

using MetricField = std::function<Mat<Jet>(std::span<const Jet>)>;

inline RiemannData riemann_of_metric(const MetricField& field, std::span<const double> point,
                                     const Eigen::MatrixXd* frame = nullptr) {
  JetVector u = lift(point, 2);
  return riemann_of_metric(field(u), frame);
}

// Frame components T_{ij,k} = (D_{E_k} T)(E_i, E_j) of a symmetric 2-tensor
// given by coordinate jets of order >= 1.
inline std::vector<double> covariant_derivative(const Mat<Jet>& T, const RiemannData& rd) {
  const int n = rd.n;
  if (T.rows != n || T.cols != n) throw Error(ErrorCode::FrameMismatch, "tensor and metric dimensions differ");
  if (T(0, 0).order() < 1) throw Error(ErrorCode::OrderUnavailable, "covariant derivative needs order >= 1");
  std::vector<double> D(static_cast<std::size_t>(n) * n * n);
  const auto& G = rd.christoffel;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double v = T(a, b).d(c);
        for (int d = 0; d < n; ++d)
          v -= G[idx3(n, d, c, a)] * T(d, b).value() + G[idx3(n, d, c, b)] * T(a, d).value();
        D[idx3(n, a, b, c)] = v;
      }
  std::vector<double> out(D.size(), 0.0);
  const Eigen::MatrixXd& E = rd.frame;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) acc += E(a, i) * E(b, j) * E(c, k) * D[idx3(n, a, b, c)];
        out[idx3(n, i, j, k)] = acc;
      }
  return out;
}

// Frame components C_{i,j} = (D_{E_j} C)(E_i) of a 1-form.
inline Eigen::MatrixXd covariant_derivative(const JetVector& C, const RiemannData& rd) {
  const int n = rd.n;
  if (static_cast<int>(C.size()) != n) throw Error(ErrorCode::FrameMismatch, "form and metric dimensions differ");
  if (C[0].order() < 1) throw Error(ErrorCode::OrderUnavailable, "covariant derivative needs order >= 1");
  Eigen::MatrixXd D(n, n);
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      double v = C[a].d(c);
      for (int d = 0; d < n; ++d) v -= rd.christoffel[idx3(n, d, c, a)] * C[d].value();
      D(a, c) = v;
    }
  return rd.frame.transpose() * D * rd.frame;
}

inline Eigen::MatrixXd frame_components(const Mat<Jet>& T, const Eigen::MatrixXd& E) {
  return E.transpose() * T.values() * E;
}
inline Eigen::VectorXd frame_components(const JetVector& C, const Eigen::MatrixXd& E) {
  return E.transpose() * values(C);
}

}  // namespace dupinlab
