#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dupinlab/error.hpp"
#include "dupinlab/immersion.hpp"
#include "dupinlab/jet.hpp"
#include "dupinlab/linalg.hpp"
#include "dupinlab/minkowski.hpp"
#include "dupinlab/surface.hpp"

namespace dupinlab {

// Jet order needed for covariant derivatives of the Blaschke tensor.
inline constexpr int kMoebiusOrder = 5;

// Coordinate-level jets of the Moebius invariants of f: R^n -> R^{n+1}.
//   rho^2 = n/(n-1) (|II|^2 - n H^2),  g = rho^2 I,
//   B = rho (II - H I),
//   C_a = -rho^{-1} (d_a H + (h_ab - H I_ab) I^{bc} d_c log rho),
//   A = -(Hess_I log rho - dlog rho dlog rho - H II) - (|dlog rho|_I^2 + H^2) I / 2.
struct MoebiusJets {
  SurfaceJets s;
  Jet rho, logrho, H;
  JetVector Y, xi;  // R^{n+3}_1
  Mat<Jet> g, B, A;
  JetVector C;
};

inline JetVector light_cone_lift(const JetVector& f) {
  Jet sq = f[0] * f[0];
  for (std::size_t i = 1; i < f.size(); ++i) sq = sq + f[i] * f[i];
  JetVector Y{0.5 * (1.0 + sq), 0.5 * (1.0 - sq)};
  for (const Jet& x : f) Y.push_back(x);
  return Y;
}

inline MoebiusJets moebius_jets(const Immersion& imm, std::span<const double> p, int orientation,
                                const Tolerances& tol = {}, int order = kMoebiusOrder) {
  if (imm.spherical) throw Error(ErrorCode::BadDimensions, "Moebius invariants need a Euclidean hypersurface");
  MoebiusJets m;
  m.s = surface_jets(imm, p, order, orientation);
  const SurfaceJets& s = m.s;
  const int n = s.n;
  if (n < 2) throw Error(ErrorCode::BadDimensions, "need n >= 2");
  Jet trS = trace(s.S);
  Jet trS2 = trace(s.S * s.S);
  m.H = trS * (1.0 / n);
  Jet rho2 = (trS2 - trS * trS * (1.0 / n)) * (static_cast<double>(n) / (n - 1));
  if (rho2.value() <= tol.eps_umb) throw Error(ErrorCode::UmbilicPoint, "rho^2 below the umbilic threshold");
  m.rho = sqrt(rho2);
  m.logrho = log(m.rho);
  const Jet& H = m.H;
  const Jet& lr = m.logrho;

  // position and conformal Gauss map
  JetVector Yt = light_cone_lift(s.f);
  for (const Jet& x : Yt) m.Y.push_back(m.rho * x);
  Jet fnu = dot(JetVector(s.f.begin(), s.f.end()), s.nu);
  m.xi.push_back(H * Yt[0] + fnu);
  m.xi.push_back(H * Yt[1] - fnu);
  for (int i = 0; i < n + 1; ++i) m.xi.push_back(H * Yt[i + 2] + s.nu[i]);

  Mat<Jet> I = s.I, Iinv = s.Iinv, h = s.h;
  m.g = Mat<Jet>(n, n, Jet{});
  m.B = Mat<Jet>(n, n, Jet{});
  Mat<Jet> hH(n, n, Jet{});
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      m.g(a, b) = rho2 * I(a, b);
      hH(a, b) = h(a, b) - H * I(a, b);
      m.B(a, b) = m.rho * hH(a, b);
    }

  JetVector dlr, dH;
  for (int a = 0; a < n; ++a) {
    dlr.push_back(lr.partial(a));
    dH.push_back(H.partial(a));
  }
  // I-gradient of log rho
  JetVector grad(n);
  for (int b = 0; b < n; ++b) {
    Jet acc = Iinv(b, 0) * dlr[0];
    for (int c = 1; c < n; ++c) acc = acc + Iinv(b, c) * dlr[c];
    grad[b] = acc;
  }
  Jet inv_rho = inverse(m.rho);
  for (int a = 0; a < n; ++a) {
    Jet acc = dH[a];
    for (int b = 0; b < n; ++b) acc = acc + hH(a, b) * grad[b];
    m.C.push_back(-(inv_rho * acc));
  }

  std::vector<Jet> GI = christoffels(I, Iinv);
  Jet grad2 = dlr[0] * grad[0];
  for (int a = 1; a < n; ++a) grad2 = grad2 + dlr[a] * grad[a];
  Jet iso = 0.5 * (grad2 + H * H);
  m.A = Mat<Jet>(n, n, Jet{});
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      Jet hess = dlr[a].partial(b);
      for (int c = 0; c < n; ++c) hess = hess - GI[idx3(n, c, a, b)] * dlr[c];
      Jet v = -(hess - dlr[a] * dlr[b] - H * h(a, b)) - iso * I(a, b);
      m.A(a, b) = v;
      m.A(b, a) = v;
    }
  return m;
}

struct MoebiusData {
  std::vector<double> point;
  int n = 0;
  int orientation = 1;
  double rho = 0.0;
  double H = 0.0;
  SignedVector Y, xi;
  Eigen::MatrixXd g;      // coordinate components of the Moebius metric
  Eigen::MatrixXd frame;  // columns: coordinate components of the g-orthonormal frame E_i
  Eigen::MatrixXd A, B;   // frame components
  Eigen::VectorXd C;
  std::vector<double> b, a;       // diagonals of B and A in frame order (b ascending)
  std::vector<double> lambda;     // Euclidean principal curvatures, ascending
  std::vector<std::vector<int>> b_groups;
  RiemannData riemann;
  std::vector<double> dA, dB;     // T_{ij,k} at idx3(i,j,k)
  Eigen::MatrixXd dC;             // C_{i,j}
};

// g-orthonormal frame diagonalizing T1, ordered by its eigenvalues; inside
// repeated blocks, re-diagonalized by T2.
inline Eigen::MatrixXd paired_frame(const Eigen::MatrixXd& T1, const Eigen::MatrixXd& T2, const Eigen::MatrixXd& g,
                                    double eps_group, std::vector<std::vector<int>>* groups_out = nullptr) {
  EigenPairs ep = generalized_eigen(T1, g);
  Eigen::MatrixXd E = ep.vectors;
  std::vector<double> vals(ep.values.data(), ep.values.data() + ep.values.size());
  auto groups = group_sorted(vals, eps_group);
  for (const auto& grp : groups) {
    if (grp.size() < 2) continue;
    const int m = static_cast<int>(grp.size());
    Eigen::MatrixXd Eb(E.rows(), m);
    for (int j = 0; j < m; ++j) Eb.col(j) = E.col(grp[j]);
    Eigen::MatrixXd sub = Eb.transpose() * T2 * Eb;
    EigenPairs inner = generalized_eigen(0.5 * (sub + sub.transpose()), Eigen::MatrixXd::Identity(m, m));
    Eigen::MatrixXd rot = Eb * inner.vectors;
    for (int j = 0; j < m; ++j) E.col(grp[j]) = rot.col(j);
  }
  if (groups_out) *groups_out = groups;
  return E;
}

inline MoebiusData moebius_data(const MoebiusJets& m, std::span<const double> p, const Tolerances& tol = {}) {
  MoebiusData d;
  const int n = m.s.n;
  d.point.assign(p.begin(), p.end());
  d.n = n;
  d.orientation = m.s.orientation;
  d.rho = m.rho.value();
  d.H = m.H.value();
  d.Y = {values(m.Y), Signature::one_minus(n + 3)};
  d.xi = {values(m.xi), Signature::one_minus(n + 3)};
  d.g = m.g.values();
  const Eigen::MatrixXd Bc = m.B.values(), Ac = m.A.values();
  d.frame = paired_frame(Bc, Ac, d.g, tol.eps_group, &d.b_groups);
  d.B = d.frame.transpose() * Bc * d.frame;
  d.A = d.frame.transpose() * Ac * d.frame;
  d.C = d.frame.transpose() * values(m.C);
  for (int i = 0; i < n; ++i) {
    d.b.push_back(d.B(i, i));
    d.a.push_back(d.A(i, i));
  }
  EigenPairs lam = generalized_eigen(m.s.h.values(), m.s.I.values());
  d.lambda.assign(lam.values.data(), lam.values.data() + n);

  Mat<Jet> g2(n, n, Jet{});
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) g2(a, b) = m.g(a, b).truncate(2);
  d.riemann = riemann_of_metric(g2, &d.frame);
  if (m.B(0, 0).order() >= 1) d.dB = covariant_derivative(m.B, d.riemann);
  if (m.A(0, 0).order() >= 1) d.dA = covariant_derivative(m.A, d.riemann);
  if (m.C[0].order() >= 1) d.dC = covariant_derivative(m.C, d.riemann);
  return d;
}

inline MoebiusData moebius_invariants(const Immersion& imm, std::span<const double> p, int orientation = 0,
                                      const Tolerances& tol = {}) {
  if (orientation == 0) orientation = orientation_sign(imm);
  return moebius_data(moebius_jets(imm, p, orientation, tol), p, tol);
}

struct MoebiusPosition {
  double rho = 0.0;
  SignedVector Y, xi;
};

inline MoebiusPosition moebius_position(const Immersion& imm, std::span<const double> p, int orientation = 0,
                                        const Tolerances& tol = {}) {
  if (orientation == 0) orientation = orientation_sign(imm);
  // order 4 is the least moebius_jets accepts (A needs second derivatives of log rho)
  MoebiusJets m = moebius_jets(imm, p, orientation, tol, 4);
  const int n = imm.dim_in;
  return {m.rho.value(), {values(m.Y), Signature::one_minus(n + 3)}, {values(m.xi), Signature::one_minus(n + 3)}};
}

// Residuals of the six integrability conditions at one point, in the order
// equa1..equa6 (tags used by reports).
inline std::array<double, 6> integrability_residuals(const MoebiusData& d) {
  const int n = d.n;
  const auto& A = d.A;
  const auto& B = d.B;
  const auto& C = d.C;
  auto del = [](int i, int j) { return i == j ? 1.0 : 0.0; };
  std::array<double, 6> r{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (!d.dA.empty())
          r[0] = std::max(r[0], std::abs(d.dA[idx3(n, i, j, k)] - d.dA[idx3(n, i, k, j)] -
                                         (B(i, k) * C[j] - B(i, j) * C[k])));
        r[2] = std::max(r[2], std::abs(d.dB[idx3(n, i, j, k)] - d.dB[idx3(n, i, k, j)] -
                                       (del(i, j) * C[k] - del(i, k) * C[j])));
      }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double rhs = 0.0;
      for (int k = 0; k < n; ++k) rhs += B(i, k) * A(k, j) - B(j, k) * A(k, i);
      r[1] = std::max(r[1], std::abs(d.dC(i, j) - d.dC(j, i) - rhs));
    }
  const auto& R = d.riemann;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double rhs = B(i, k) * B(j, l) - B(i, l) * B(j, k) + del(i, k) * A(j, l) + del(j, l) * A(i, k) -
                             del(i, l) * A(j, k) - del(j, k) * A(i, l);
          r[3] = std::max(r[3], std::abs(R(i, j, k, l) - rhs));
        }
  const double trA = A.trace();
  Eigen::MatrixXd ric = -B * B + trA * Eigen::MatrixXd::Identity(n, n) + (n - 2.0) * A;
  r[4] = (R.ricci - ric).cwiseAbs().maxCoeff();
  r[5] = std::max({std::abs(B.trace()), std::abs(B.squaredNorm() - (n - 1.0) / n),
                   std::abs(trA - (1.0 + n * n * R.kappa) / (2.0 * n))});
  return r;
}

inline const std::array<const char*, 6>& integrability_tags() {
  static const std::array<const char*, 6> tags{"equa1", "equa2", "equa3", "equa4", "equa5", "equa6"};
  return tags;
}

struct IntegrabilityReport {
  std::size_t grid_points = 0;
  double tol = 1e-6;
  std::array<double, 6> residual{};
  std::array<bool, 6> pass{};
  double riemann_symmetry = 0.0;
  double riemann_bianchi = 0.0;
  bool all_pass() const { return std::all_of(pass.begin(), pass.end(), [](bool b) { return b; }); }
};

inline std::vector<MoebiusData> moebius_on_grid(const Immersion& imm, const Grid& grid, const Tolerances& tol = {},
                                                int threads = 1, int orientation = 0) {
  if (orientation == 0) orientation = orientation_sign(imm);
  return parallel_map<MoebiusData>(
      grid.points.size(), [&](std::size_t i) { return moebius_invariants(imm, grid.points[i], orientation, tol); },
      threads);
}

inline IntegrabilityReport integrability_report(const std::vector<MoebiusData>& data, double tol) {
  IntegrabilityReport rep;
  rep.grid_points = data.size();
  rep.tol = tol;
  for (const auto& d : data) {
    auto r = integrability_residuals(d);
    for (int c = 0; c < 6; ++c) rep.residual[c] = std::max(rep.residual[c], r[c]);
    rep.riemann_symmetry = std::max(rep.riemann_symmetry, d.riemann.symmetry_residual);
    rep.riemann_bianchi = std::max(rep.riemann_bianchi, d.riemann.bianchi_residual);
  }
  for (int c = 0; c < 6; ++c) rep.pass[c] = rep.residual[c] < tol;
  return rep;
}

inline IntegrabilityReport verify_integrability(const Immersion& imm, const Grid& grid, double tol = 1e-6,
                                                const Tolerances& t = {}, int threads = 1) {
  return integrability_report(moebius_on_grid(imm, grid, t, threads), tol);
}

struct IsoparametricVerdict {
  bool verdict = false;
  double max_C = 0.0;
  double max_drift = 0.0;        // eigenvalue drift of the primary tensor
  double max_drift_second = 0.0; // eigenvalue drift of the companion tensor (A, or L)
  bool r_constant = true;
};

inline double eigen_drift(const std::vector<std::vector<double>>& vals) {
  double drift = 0.0;
  if (vals.empty()) return 0.0;
  for (std::size_t i = 0; i < vals[0].size(); ++i) {
    double lo = vals[0][i], hi = vals[0][i];
    for (const auto& v : vals) {
      lo = std::min(lo, v[i]);
      hi = std::max(hi, v[i]);
    }
    drift = std::max(drift, hi - lo);
  }
  return drift;
}

inline std::vector<double> sorted_eigenvalues(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()));
  return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

inline IsoparametricVerdict moebius_isoparametric(const std::vector<MoebiusData>& data, double tol) {
  IsoparametricVerdict v;
  std::vector<std::vector<double>> bs, as;
  for (const auto& d : data) {
    v.max_C = std::max(v.max_C, d.C.cwiseAbs().maxCoeff());
    bs.push_back(d.b);
    as.push_back(sorted_eigenvalues(d.A));
    if (d.b_groups.size() != data[0].b_groups.size()) v.r_constant = false;
  }
  v.max_drift = eigen_drift(bs);
  v.max_drift_second = eigen_drift(as);
  v.verdict = v.max_C < tol && v.max_drift < tol;
  return v;
}

inline IsoparametricVerdict is_moebius_isoparametric(const Immersion& imm, const Grid& grid, double tol = 1e-6,
                                                     const Tolerances& t = {}, int threads = 1) {
  return moebius_isoparametric(moebius_on_grid(imm, grid, t, threads), tol);
}

// Least-squares fit A ~ lambda B + mu I; present iff the max-norm residual < tol.
inline std::optional<std::pair<double, double>> check_linear_dependence(const Eigen::MatrixXd& A,
                                                                        const Eigen::MatrixXd& B, double tol = 1e-7) {
  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXd M(n * n, 2);
  Eigen::VectorXd rhs(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      M(i * n + j, 0) = B(i, j);
      M(i * n + j, 1) = i == j ? 1.0 : 0.0;
      rhs[i * n + j] = A(i, j);
    }
  Eigen::Vector2d x = M.colPivHouseholderQr().solve(rhs);
  const double res = (M * x - rhs).cwiseAbs().maxCoeff();
  if (res < tol) return std::make_pair(x[0], x[1]);
  return std::nullopt;
}

// Moebius curvatures M_ijs over all admissible triples (distinct groups).
inline std::vector<double> moebius_curvature_table(std::span<const double> x, double eps) {
  std::vector<double> out;
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int s = 0; s < n; ++s)
        if (std::abs(x[i] - x[s]) > 10 * eps) out.push_back((x[i] - x[j]) / (x[i] - x[s]));
        else out.push_back(0.0);
  return out;
}

// ---------------------------------------------------------------------------
// Moebius transformations through the light cone.

// L(T) f = (T Yt)_{2..} / ((T Yt)_0 + (T Yt)_1) with Yt the unscaled lift.
inline Immersion transform_immersion(const Immersion& imm, const LorentzTransform& M, double eps_inf = 1e-6) {
  const int n = imm.dim_in;
  if (M.sig.dim != n + 3) throw Error(ErrorCode::SignatureMismatch, "transform dimension must be n+3");
  Immersion out = imm;
  out.name = "moebius(" + imm.name + ")";
  auto fmap = imm.map;
  Eigen::MatrixXd T = M.M;
  out.map = [fmap, T, eps_inf](std::span<const Jet> u) {
    JetVector Yt = light_cone_lift(fmap(u));
    const int D = static_cast<int>(Yt.size());
    JetVector Z;
    for (int r = 0; r < D; ++r) {
      Jet acc = T(r, 0) * Yt[0];
      for (int c = 1; c < D; ++c) acc = acc + T(r, c) * Yt[c];
      Z.push_back(acc);
    }
    Jet den = Z[0] + Z[1];
    if (std::abs(den.value()) < eps_inf) throw Error(ErrorCode::PointAtInfinity, "image point at infinity");
    Jet inv = inverse(den);
    JetVector f;
    for (int r = 2; r < D; ++r) f.push_back(Z[r] * inv);
    return f;
  };
  return out;
}

struct InvarianceReport {
  int orientation = 1;             // orientation of the image matching M xi
  double position_residual = 0.0;  // max |Y(L(T) f) - M Y(f)|
  double g_drift = 0.0;
  double b_drift = 0.0;
  double mijs_drift = 0.0;
  double lambda_drift = 0.0;       // raw principal curvatures, not invariant
};

struct TransformResult {
  Immersion image;
  InvarianceReport report;
};

inline TransformResult apply_moebius(const Immersion& imm, const LorentzTransform& M, const Grid& grid,
                                     const Tolerances& tol = {}, int threads = 1, double eps_inf = 1e-6) {
  TransformResult res{transform_immersion(imm, M, eps_inf), {}};
  const int s0 = orientation_sign(imm);
  const auto base = imm.base_point();
  // orientation of the image chosen so that its conformal Gauss map equals M xi
  MoebiusPosition p0 = moebius_position(imm, base, s0, tol);
  MoebiusPosition p1 = moebius_position(res.image, base, 1, tol);
  const int s1 = (M.M * p0.xi.x).dot(p1.xi.x) >= 0 ? 1 : -1;
  res.report.orientation = s1;
  auto before = moebius_on_grid(imm, grid, tol, threads, s0);
  auto after = moebius_on_grid(res.image, grid, tol, threads, s1);
  auto& r = res.report;
  for (std::size_t k = 0; k < before.size(); ++k) {
    const auto& d0 = before[k];
    const auto& d1 = after[k];
    r.position_residual = std::max(r.position_residual, (M.M * d0.Y.x - d1.Y.x).cwiseAbs().maxCoeff());
    r.g_drift = std::max(r.g_drift, (d0.g - d1.g).cwiseAbs().maxCoeff());
    for (std::size_t i = 0; i < d0.b.size(); ++i) {
      r.b_drift = std::max(r.b_drift, std::abs(d0.b[i] - d1.b[i]));
      r.lambda_drift = std::max(r.lambda_drift, std::abs(d0.lambda[i] - d1.lambda[i]));
    }
    auto m0 = moebius_curvature_table(d0.b, tol.eps_group);
    auto m1 = moebius_curvature_table(d1.b, tol.eps_group);
    for (std::size_t i = 0; i < m0.size(); ++i) r.mijs_drift = std::max(r.mijs_drift, std::abs(m0[i] - m1[i]));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Null normal and cone splitting.

// Jets of Y, xi and the null normal N with <N,N> = 0, <N,Y> = 1, N orthogonal
// to dY and xi.
struct NullFrameJets {
  JetVector Y, xi, N;
  Mat<Jet> dY;  // columns d_a Y
};

inline Jet minkowski_dot(const JetVector& x, const JetVector& y) {
  Jet acc = -(x[0] * y[0]);
  for (std::size_t i = 1; i < x.size(); ++i) acc = acc + x[i] * y[i];
  return acc;
}

inline NullFrameJets null_frame(const MoebiusJets& m) {
  NullFrameJets nf;
  const int n = m.s.n;
  const int D = n + 3;
  nf.Y = m.Y;
  nf.xi = m.xi;
  nf.dY = Mat<Jet>(D, n, Jet{});
  for (int r = 0; r < D; ++r)
    for (int a = 0; a < n; ++a) nf.dY(r, a) = m.Y[r].partial(a);
  std::vector<JetVector> cols(n);
  for (int a = 0; a < n; ++a)
    for (int r = 0; r < D; ++r) cols[a].push_back(nf.dY(r, a));
  Mat<Jet> G(n, n, Jet{});
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) G(a, b) = minkowski_dot(cols[a], cols[b]);
  Mat<Jet> Ginv = inverse(G);
  const int ord = nf.dY(0, 0).order();
  const int dim = m.Y[0].dim();
  JetVector v(D, Jet::constant(0.0, dim, ord));
  v[0] = Jet::constant(1.0, dim, ord);
  v[1] = Jet::constant(-1.0, dim, ord);
  JetVector w = v;
  std::vector<Jet> vc;
  for (int a = 0; a < n; ++a) vc.push_back(minkowski_dot(v, cols[a]));
  for (int b = 0; b < n; ++b) {
    Jet coef = Ginv(b, 0) * vc[0];
    for (int a = 1; a < n; ++a) coef = coef + Ginv(b, a) * vc[a];
    for (int r = 0; r < D; ++r) w[r] = w[r] - coef * cols[b][r];
  }
  Jet vx = minkowski_dot(v, m.xi);
  for (int r = 0; r < D; ++r) w[r] = w[r] - vx * m.xi[r];
  Jet beta = minkowski_dot(w, m.Y);
  Jet alpha = minkowski_dot(w, w) / (2.0 * beta);
  Jet ib = inverse(beta);
  for (int r = 0; r < D; ++r) nf.N.push_back((w[r] - alpha * m.Y[r]) * ib);
  return nf;
}

// A_ij = <dN(E_i), Y_j> and C_i = <dN(E_i), xi> with Y_j = dY(E_j).
struct StructureInvariants {
  Eigen::MatrixXd A;
  Eigen::VectorXd C;
  double null_residual = 0.0;  // max of |<N,N>|, |<N,Y> - 1|, |<N,xi>|, |<N,Y_j>|
};

inline StructureInvariants structure_invariants(const MoebiusJets& m, const MoebiusData& d) {
  NullFrameJets nf = null_frame(m);
  const int n = d.n, D = n + 3;
  Signature sig = Signature::one_minus(D);
  Eigen::VectorXd N = values(nf.N), Y = values(nf.Y), xi = values(nf.xi);
  Eigen::MatrixXd dY = nf.dY.values() * d.frame;  // columns Y_j
  Eigen::MatrixXd dN(D, n);
  for (int r = 0; r < D; ++r)
    for (int a = 0; a < n; ++a) dN(r, a) = nf.N[r].d(a);
  dN = dN * d.frame;
  StructureInvariants si;
  si.A.resize(n, n);
  si.C.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) si.A(i, j) = inner(Eigen::VectorXd(dN.col(i)), Eigen::VectorXd(dY.col(j)), sig);
    si.C[i] = inner(Eigen::VectorXd(dN.col(i)), xi, sig);
  }
  si.null_residual = std::max({std::abs(inner(N, N, sig)), std::abs(inner(N, Y, sig) - 1.0), std::abs(inner(N, xi, sig))});
  for (int j = 0; j < n; ++j) si.null_residual = std::max(si.null_residual, std::abs(inner(N, Eigen::VectorXd(dY.col(j)), sig)));
  return si;
}

struct ConeSplitSample {
  std::vector<double> point;
  Eigen::VectorXd F, P, T;
  double PP = 0.0, TT = 0.0, FF = 0.0;
  double block_dP = 0.0;     // max |dP(E_j)| over block directions
  double nonblock_dT = 0.0;  // max |dT(E_a)| over the other directions
  double pattern = 0.0;      // max |a_a + lambda b_a + mu| over non-block indices
};

struct ConeSplitCertificate {
  double lambda = 0.0, mu = 0.0, K = 0.0;
  std::vector<int> block;  // frame indices of the (lambda, mu) block
  std::vector<ConeSplitSample> samples;
  double max_PP = 0.0, max_TT = 0.0, max_block_dP = 0.0, max_nonblock_dT = 0.0, max_pattern = 0.0;
  double constancy = 0.0;  // drift of (lambda, mu) across samples
  bool valid(double tol_norm = 1e-8, double tol = 1e-6) const {
    return K < 0 && max_PP < tol_norm && max_TT < tol_norm && max_block_dP < tol && max_nonblock_dT < tol &&
           max_pattern < tol && constancy < tol;
  }
};

// Find (lambda, mu) = (b_j, a_j) such that every pair outside that block lies
// on a = -lambda b - mu and K = lambda^2 + 2 mu < 0. Prefers the largest block.
inline std::optional<std::pair<std::vector<int>, std::pair<double, double>>> find_cone_block(
    const std::vector<double>& b, const std::vector<double>& a, double tol) {
  const int n = static_cast<int>(b.size());
  std::optional<std::pair<std::vector<int>, std::pair<double, double>>> best;
  for (int j = 0; j < n; ++j) {
    const double lam = b[j], mu = a[j];
    if (lam * lam + 2 * mu >= 0) continue;
    std::vector<int> block;
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      if (std::abs(b[i] - lam) < tol && std::abs(a[i] - mu) < tol) {
        block.push_back(i);
      } else {
        ok = std::abs(a[i] + lam * b[i] + mu) < tol;
      }
    }
    if (!ok || static_cast<int>(block.size()) == n) continue;
    if (!best || block.size() > best->first.size()) best = std::make_pair(block, std::make_pair(lam, mu));
  }
  return best;
}

inline ConeSplitSample cone_split_sample(const MoebiusJets& m, const MoebiusData& d, double lam, double mu,
                                         const std::vector<int>& block, const NullFrameJets* nf_override = nullptr) {
  NullFrameJets nf = nf_override ? *nf_override : null_frame(m);
  const int n = d.n, D = n + 3;
  const double K = lam * lam + 2 * mu;
  const double s = 1.0 / std::sqrt(-K);
  Signature sig = Signature::one_minus(D);
  auto comb = [&](const JetVector& Y, const JetVector& N, const JetVector& xi, double cy, double cn, double cx) {
    JetVector out;
    for (int r = 0; r < D; ++r) out.push_back(cy * Y[r] + cn * N[r] + cx * xi[r]);
    return out;
  };
  // F = lam Y + xi; P = s(-(lam^2+mu) Y + N - lam xi); T = -s(mu Y + N - lam xi)
  JetVector F = comb(nf.Y, nf.N, nf.xi, lam, 0.0, 1.0);
  JetVector P = comb(nf.Y, nf.N, nf.xi, -s * (lam * lam + mu), s, -s * lam);
  JetVector T = comb(nf.Y, nf.N, nf.xi, -s * mu, -s, s * lam);
  ConeSplitSample cs;
  cs.point = d.point;
  cs.F = values(F);
  cs.P = values(P);
  cs.T = values(T);
  cs.FF = inner(cs.F, cs.F, sig);
  cs.PP = inner(cs.P, cs.P, sig);
  cs.TT = inner(cs.T, cs.T, sig);
  auto dir = [&](const JetVector& V, int i) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(D);
    for (int r = 0; r < D; ++r)
      for (int a = 0; a < n; ++a) out[r] += V[r].d(a) * d.frame(a, i);
    return out;
  };
  for (int i = 0; i < n; ++i) {
    const bool in_block = std::find(block.begin(), block.end(), i) != block.end();
    if (in_block) {
      cs.block_dP = std::max(cs.block_dP, dir(P, i).cwiseAbs().maxCoeff());
    } else {
      cs.nonblock_dT = std::max(cs.nonblock_dT, dir(T, i).cwiseAbs().maxCoeff());
      cs.pattern = std::max(cs.pattern, std::abs(d.a[i] + lam * d.b[i] + mu));
    }
  }
  return cs;
}

inline ConeSplitCertificate cone_split_certificate(const Immersion& imm, const std::vector<std::vector<double>>& samples,
                                                   const Tolerances& tol = {}, double pattern_tol = 1e-6) {
  if (samples.empty()) throw Error(ErrorCode::PatternMismatch, "no samples");
  const int orient = orientation_sign(imm);
  ConeSplitCertificate cert;
  bool first = true;
  double lam0 = 0, mu0 = 0;
  for (const auto& p : samples) {
    MoebiusJets m = moebius_jets(imm, p, orient, tol);
    MoebiusData d = moebius_data(m, p, tol);
    if (first) {
      auto found = find_cone_block(d.b, d.a, pattern_tol);
      if (!found) throw Error(ErrorCode::PatternMismatch, "no (lambda, mu) block with K < 0");
      cert.block = found->first;
      lam0 = found->second.first;
      mu0 = found->second.second;
      cert.lambda = lam0;
      cert.mu = mu0;
      cert.K = lam0 * lam0 + 2 * mu0;
      first = false;
    }
    for (int i : cert.block)
      cert.constancy = std::max({cert.constancy, std::abs(d.b[i] - lam0), std::abs(d.a[i] - mu0)});
    ConeSplitSample cs = cone_split_sample(m, d, lam0, mu0, cert.block);
    cert.max_PP = std::max(cert.max_PP, std::abs(cs.PP - 1.0));
    cert.max_TT = std::max(cert.max_TT, std::abs(cs.TT + 1.0));
    cert.max_block_dP = std::max(cert.max_block_dP, cs.block_dP);
    cert.max_nonblock_dT = std::max(cert.max_nonblock_dT, cs.nonblock_dT);
    cert.max_pattern = std::max(cert.max_pattern, cs.pattern);
    cert.samples.push_back(std::move(cs));
  }
  return cert;
}

}  // namespace dupinlab
