#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "dupinlab/error.hpp"
#include "dupinlab/immersion.hpp"
#include "dupinlab/jet.hpp"
#include "dupinlab/linalg.hpp"
#include "dupinlab/minkowski.hpp"
#include "dupinlab/moebius.hpp"
#include "dupinlab/surface.hpp"

namespace dupinlab {

// Covariant derivatives of L need three derivatives of the curvature of g,
// which is itself built from first derivatives of Y.
inline constexpr int kLaguerreOrder = 6;

// Coordinate-level jets of the Laguerre invariants. With W = h^{-1} I (the
// radii operator, eigenvalues R_i = 1/lambda_i):
//   R = tr W / n,  rho^2 = tr W^2 - n R^2,
//   Y = rho (x.xi, -x.xi, xi, 1),  g = <dY, dY>,
//   B = rho (II - R III),
//   C_a = -rho^{-1} d_a R - B_ab g^{bc} d_c log rho,
//   L = -(Ric - scal g / (2(n-1))) / (n-2)   (n >= 3).
struct LaguerreJets {
  SurfaceJets s;
  Jet rho, logrho, Rmean;
  JetVector Y;
  Mat<Jet> g, III, B, L;
  JetVector C;
  bool has_L = false;
};

// Laguerre orientation: all radii positive when possible at the base point,
// otherwise the surface rule.
inline int laguerre_orientation(const Immersion& imm) {
  const int s = orientation_sign(imm);
  const PointFrame pf = fundamental_forms(imm, imm.base_point(), s);
  const PrincipalData pd = principal_decomposition(pf, 0.0);
  if (pd.lambdas.back() < 0) return -s;
  return s;
}

inline LaguerreJets laguerre_jets(const Immersion& imm, std::span<const double> p, int orientation,
                                  const Tolerances& tol = {}, int order = kLaguerreOrder) {
  if (imm.spherical) throw Error(ErrorCode::BadDimensions, "Laguerre invariants need a Euclidean hypersurface");
  LaguerreJets L;
  L.s = surface_jets(imm, p, order, orientation);
  const SurfaceJets& s = L.s;
  const int n = s.n;
  {
    EigenPairs ep = generalized_eigen(s.h.values(), s.I.values());
    if (ep.values.cwiseAbs().minCoeff() <= tol.eps_rad)
      throw Error(ErrorCode::VanishingPrincipalCurvature, "a principal curvature vanishes");
  }
  Mat<Jet> W = inverse(s.h) * s.I;
  Jet trW = trace(W);
  L.Rmean = trW * (1.0 / n);
  Jet rho2 = trace(W * W) - trW * trW * (1.0 / n);
  if (rho2.value() <= tol.eps_umb * tol.eps_umb)
    throw Error(ErrorCode::UmbilicPoint, "all curvature radii coincide");
  L.rho = sqrt(rho2);
  L.logrho = log(L.rho);

  // Y in R^{n+4}_2, negative slots first and last
  Jet xxi = dot(JetVector(s.f.begin(), s.f.end()), s.nu);
  L.Y.push_back(L.rho * xxi);
  L.Y.push_back(-(L.rho * xxi));
  for (const Jet& c : s.nu) L.Y.push_back(L.rho * c);
  L.Y.push_back(L.rho);
  const int D = n + 4;
  Signature sig = Signature::two_minus(D);
  std::vector<JetVector> dY(n);
  for (int a = 0; a < n; ++a)
    for (int r = 0; r < D; ++r) dY[a].push_back(L.Y[r].partial(a));
  L.g = Mat<Jet>(n, n, Jet{});
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      Jet acc = sig.sign(0) * dY[a][0] * dY[b][0];
      for (int r = 1; r < D; ++r) acc = acc + sig.sign(r) * dY[a][r] * dY[b][r];
      L.g(a, b) = acc;
      L.g(b, a) = acc;
    }
  L.III = s.h * s.Iinv * s.h;
  L.B = Mat<Jet>(n, n, Jet{});
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) L.B(a, b) = L.rho * (L.Rmean * L.III(a, b) - s.h(a, b));

  Mat<Jet> ginv = inverse(L.g);
  JetVector dlr, dR;
  for (int a = 0; a < n; ++a) {
    dlr.push_back(L.logrho.partial(a));
    dR.push_back(L.Rmean.partial(a));
  }
  JetVector grad(n);
  for (int b = 0; b < n; ++b) {
    Jet acc = ginv(b, 0) * dlr[0];
    for (int c = 1; c < n; ++c) acc = acc + ginv(b, c) * dlr[c];
    grad[b] = acc;
  }
  Jet inv_rho = inverse(L.rho);
  for (int a = 0; a < n; ++a) {
    Jet acc = inv_rho * dR[a];
    for (int b = 0; b < n; ++b) acc = acc - L.B(a, b) * grad[b];
    L.C.push_back(-acc);
  }

  if (n >= 3) {
    CurvatureJets cj = curvature_jets(L.g);
    L.L = Mat<Jet>(n, n, Jet{});
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        L.L(a, b) = (cj.ricci(a, b) - cj.scalar * L.g(a, b) * (0.5 / (n - 1))) * (-1.0 / (n - 2));
    L.has_L = true;
  }
  return L;
}

struct LaguerreData {
  std::vector<double> point;
  int n = 0;
  int orientation = 1;
  std::vector<double> radii;  // R_i = 1/lambda_i, ascending
  double R = 0.0;
  double rho = 0.0;
  SignedVector Y;
  Eigen::MatrixXd g;          // coordinate Laguerre metric <dY, dY>
  double metric_consistency = 0.0;  // max |g - rho^2 III| / max |g|
  double metric_printed = 0.0;      // max |g - rho III| / max |g|
  Eigen::MatrixXd frame;
  Eigen::MatrixXd B, L;       // frame components (L empty for n = 2)
  Eigen::VectorXd C;
  std::vector<double> b, l;   // diagonals of B and L in frame order
  std::vector<std::vector<int>> b_groups;
  bool has_L = false;
  RiemannData riemann;
  std::vector<double> dB, dL;
  Eigen::MatrixXd dC;
};

inline LaguerreData laguerre_data(const LaguerreJets& J, std::span<const double> p, const Tolerances& tol = {}) {
  LaguerreData d;
  const int n = J.s.n;
  d.point.assign(p.begin(), p.end());
  d.n = n;
  d.orientation = J.s.orientation;
  EigenPairs lam = generalized_eigen(J.s.h.values(), J.s.I.values());
  for (int i = 0; i < n; ++i) d.radii.push_back(1.0 / lam.values[i]);
  std::sort(d.radii.begin(), d.radii.end());
  d.R = J.Rmean.value();
  d.rho = J.rho.value();
  d.Y = {values(J.Y), Signature::two_minus(n + 4)};
  d.g = J.g.values();
  const Eigen::MatrixXd III = J.III.values();
  const double gmax = d.g.cwiseAbs().maxCoeff();
  d.metric_consistency = (d.g - d.rho * d.rho * III).cwiseAbs().maxCoeff() / gmax;
  d.metric_printed = (d.g - d.rho * III).cwiseAbs().maxCoeff() / gmax;
  const Eigen::MatrixXd Bc = J.B.values();
  const Eigen::MatrixXd Lc = J.has_L ? J.L.values() : Eigen::MatrixXd::Zero(n, n);
  d.has_L = J.has_L;
  d.frame = paired_frame(Bc, Lc, d.g, tol.eps_group, &d.b_groups);
  d.B = d.frame.transpose() * Bc * d.frame;
  d.C = d.frame.transpose() * values(J.C);
  for (int i = 0; i < n; ++i) d.b.push_back(d.B(i, i));
  if (J.has_L) {
    d.L = d.frame.transpose() * Lc * d.frame;
    for (int i = 0; i < n; ++i) d.l.push_back(d.L(i, i));
  }
  Mat<Jet> g2(n, n, Jet{});
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) g2(a, b) = J.g(a, b).truncate(2);
  d.riemann = riemann_of_metric(g2, &d.frame);
  d.dB = covariant_derivative(J.B, d.riemann);
  d.dC = covariant_derivative(J.C, d.riemann);
  if (J.has_L && J.L(0, 0).order() >= 1) d.dL = covariant_derivative(J.L, d.riemann);
  return d;
}

inline LaguerreData laguerre_invariants(const Immersion& imm, std::span<const double> p, int orientation = 0,
                                        const Tolerances& tol = {}) {
  if (orientation == 0) orientation = laguerre_orientation(imm);
  return laguerre_data(laguerre_jets(imm, p, orientation, tol), p, tol);
}

inline std::vector<LaguerreData> laguerre_on_grid(const Immersion& imm, const Grid& grid, const Tolerances& tol = {},
                                                  int threads = 1) {
  const int orientation = laguerre_orientation(imm);
  return parallel_map<LaguerreData>(
      grid.points.size(), [&](std::size_t i) { return laguerre_invariants(imm, grid.points[i], orientation, tol); },
      threads);
}

// Residuals of the five Laguerre conditions at one point (tags 2.5 .. 2.9).
// Conditions that need L are reported as 0 when n = 2.
inline std::array<double, 5> laguerre_residuals(const LaguerreData& d) {
  const int n = d.n;
  auto del = [](int i, int j) { return i == j ? 1.0 : 0.0; };
  std::array<double, 5> r{};
  const auto& B = d.B;
  const auto& C = d.C;
  if (d.has_L && !d.dL.empty())
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          r[0] = std::max(r[0], std::abs(d.dL[idx3(n, i, j, k)] - d.dL[idx3(n, i, k, j)]));
  if (d.has_L)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double rhs = 0.0;
        for (int k = 0; k < n; ++k) rhs += B(i, k) * d.L(k, j) - B(j, k) * d.L(k, i);
        r[1] = std::max(r[1], std::abs(d.dC(i, j) - d.dC(j, i) - rhs));
      }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        r[2] = std::max(r[2], std::abs(d.dB[idx3(n, i, j, k)] - d.dB[idx3(n, i, k, j)] -
                                       (C[j] * del(i, k) - C[k] * del(i, j))));
  if (d.has_L)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            const double rhs = d.L(j, k) * del(i, l) + d.L(i, l) * del(j, k) - d.L(i, k) * del(j, l) -
                               d.L(j, l) * del(i, k);
            r[3] = std::max(r[3], std::abs(d.riemann(i, j, k, l) - rhs));
          }
  double div = 0.0;
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += d.dB[idx3(n, i, j, i)];
    div = std::max(div, std::abs(s - (n - 1.0) * C[j]));
  }
  r[4] = std::max({std::abs(B.squaredNorm() - 1.0), std::abs(B.trace()), div});
  return r;
}

inline const std::array<const char*, 5>& laguerre_tags() {
  static const std::array<const char*, 5> tags{"2.5", "2.6", "2.7", "2.8", "2.9"};
  return tags;
}

struct LaguerreReport {
  std::size_t grid_points = 0;
  double tol = 1e-6;
  std::array<double, 5> residual{};
  std::array<bool, 5> pass{};
  bool has_L = false;
  double b_drift = 0.0, l_drift = 0.0;
  double max_C = 0.0;
  double max_dB = 0.0;
  double max_R = 0.0;  // flatness: max |R_ijkl|
  double metric_consistency = 0.0;
  double metric_printed = 0.0;
  int distinct_b = 0;
  bool all_pass() const { return std::all_of(pass.begin(), pass.end(), [](bool b) { return b; }); }
};

inline LaguerreReport laguerre_report(const std::vector<LaguerreData>& data, double tol) {
  LaguerreReport rep;
  rep.grid_points = data.size();
  rep.tol = tol;
  std::vector<std::vector<double>> bs, ls;
  for (const auto& d : data) {
    auto r = laguerre_residuals(d);
    for (int c = 0; c < 5; ++c) rep.residual[c] = std::max(rep.residual[c], r[c]);
    rep.has_L = d.has_L;
    rep.max_C = std::max(rep.max_C, d.C.cwiseAbs().maxCoeff());
    for (double x : d.dB) rep.max_dB = std::max(rep.max_dB, std::abs(x));
    for (double x : d.riemann.R) rep.max_R = std::max(rep.max_R, std::abs(x));
    rep.metric_consistency = std::max(rep.metric_consistency, d.metric_consistency);
    rep.metric_printed = std::max(rep.metric_printed, d.metric_printed);
    bs.push_back(d.b);
    if (d.has_L) ls.push_back(sorted_eigenvalues(d.L));
  }
  rep.b_drift = eigen_drift(bs);
  rep.l_drift = eigen_drift(ls);
  if (!data.empty()) rep.distinct_b = static_cast<int>(data[0].b_groups.size());
  for (int c = 0; c < 5; ++c) rep.pass[c] = rep.residual[c] < tol;
  return rep;
}

inline LaguerreReport verify_laguerre_integrability(const Immersion& imm, const Grid& grid, double tol = 1e-6,
                                                    const Tolerances& t = {}, int threads = 1) {
  return laguerre_report(laguerre_on_grid(imm, grid, t, threads), tol);
}

inline IsoparametricVerdict laguerre_isoparametric(const std::vector<LaguerreData>& data, double tol) {
  IsoparametricVerdict v;
  std::vector<std::vector<double>> bs, ls;
  for (const auto& d : data) {
    v.max_C = std::max(v.max_C, d.C.cwiseAbs().maxCoeff());
    bs.push_back(d.b);
    if (d.has_L) ls.push_back(sorted_eigenvalues(d.L));
    if (d.b_groups.size() != data[0].b_groups.size()) v.r_constant = false;
  }
  v.max_drift = eigen_drift(bs);
  v.max_drift_second = eigen_drift(ls);
  v.verdict = v.max_C < tol && v.max_drift < tol;
  return v;
}

inline IsoparametricVerdict is_laguerre_isoparametric(const Immersion& imm, const Grid& grid, double tol = 1e-6,
                                                      const Tolerances& t = {}, int threads = 1) {
  return laguerre_isoparametric(laguerre_on_grid(imm, grid, t, threads), tol);
}

struct ParallelVerdict {
  bool verdict = false;
  double max_dB = 0.0;
};

inline ParallelVerdict is_parallel_B(const Immersion& imm, const Grid& grid, double tol = 1e-6, const Tolerances& t = {},
                                     int threads = 1) {
  ParallelVerdict v;
  for (const auto& d : laguerre_on_grid(imm, grid, t, threads))
    for (double x : d.dB) v.max_dB = std::max(v.max_dB, std::abs(x));
  v.verdict = v.max_dB < tol;
  return v;
}

}  // namespace dupinlab
