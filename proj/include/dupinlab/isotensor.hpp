#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dupinlab/error.hpp"
#include "dupinlab/laguerre.hpp"
#include "dupinlab/moebius.hpp"
#include "dupinlab/surface.hpp"

namespace dupinlab::iso {

// One sample of a symmetric 2-tensor in an orthonormal frame that diagonalizes
// it with ascending eigenvalues b. dT holds T_{ij,k} at idx3(i,j,k) and R the
// frame Riemann tensor at idx4 (may be empty for purely algebraic checks).
struct TensorFieldSample {
  int n = 0;
  Eigen::MatrixXd T;
  std::vector<double> dT;
  std::vector<double> b;
  std::vector<std::vector<int>> groups;
  std::vector<int> group_of;
  std::vector<double> R;

  double sectional(int i, int j) const { return R[idx4(n, i, j, i, j)]; }
  bool same_group(int i, int j) const { return group_of[i] == group_of[j]; }
};

// Two commuting tensors in a common frame: T1 diagonal with ascending b,
// T2 diagonal with a; refined groups (i) = {k in [i] : a_k = a_i}.
struct PairedTensorSample {
  TensorFieldSample t1, t2;
  std::vector<double> a;
  std::vector<std::vector<int>> refined;
  std::vector<int> refined_of;
  double commutator = 0.0;
};

inline std::vector<double> rotate3(const std::vector<double>& D, const Eigen::MatrixXd& Q) {
  const int n = static_cast<int>(Q.rows());
  std::vector<double> out(D.size(), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) acc += Q(a, i) * Q(b, j) * Q(c, k) * D[idx3(n, a, b, c)];
        out[idx3(n, i, j, k)] = acc;
      }
  return out;
}

inline void assign_groups(TensorFieldSample& f, double eps_group) {
  f.groups = group_sorted(f.b, eps_group);
  f.group_of.assign(f.n, 0);
  for (std::size_t g = 0; g < f.groups.size(); ++g)
    for (int i : f.groups[g]) f.group_of[i] = static_cast<int>(g);
}

// Rotate (T, dT, R) into a frame diagonalizing T; ties inside repeated
// eigenvalues are broken by diagonalizing tie_breaker when given.
inline TensorFieldSample make_field(const Eigen::MatrixXd& T, const std::vector<double>& dT,
                                    const std::vector<double>& R, double eps_group = 1e-8,
                                    const Eigen::MatrixXd* tie_breaker = nullptr, Eigen::MatrixXd* rotation = nullptr) {
  const int n = static_cast<int>(T.rows());
  if (T.cols() != n || dT.size() != static_cast<std::size_t>(n) * n * n ||
      (!R.empty() && R.size() != static_cast<std::size_t>(n) * n * n * n))
    throw Error(ErrorCode::DimensionMismatch, "tensor sample sizes are inconsistent");
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd Ts = 0.5 * (T + T.transpose());
  Eigen::MatrixXd Q = paired_frame(Ts, tie_breaker ? *tie_breaker : Eigen::MatrixXd::Zero(n, n), I, eps_group);
  TensorFieldSample f;
  f.n = n;
  f.T = Q.transpose() * Ts * Q;
  f.dT = rotate3(dT, Q);
  if (!R.empty()) f.R = to_frame4(R, Q);
  for (int i = 0; i < n; ++i) f.b.push_back(f.T(i, i));
  assign_groups(f, eps_group);
  if (rotation) *rotation = Q;
  return f;
}

inline PairedTensorSample make_paired(const Eigen::MatrixXd& T1, const std::vector<double>& dT1,
                                      const Eigen::MatrixXd& T2, const std::vector<double>& dT2,
                                      const std::vector<double>& R, double eps_group = 1e-8) {
  if (T1.rows() != T2.rows() || T1.cols() != T2.cols() || dT1.size() != dT2.size())
    throw Error(ErrorCode::DimensionMismatch, "paired tensors differ in size");
  PairedTensorSample p;
  p.commutator = (T1 * T2 - T2 * T1).cwiseAbs().maxCoeff();
  Eigen::MatrixXd Q;
  const Eigen::MatrixXd T2s = 0.5 * (T2 + T2.transpose());
  p.t1 = make_field(T1, dT1, R, eps_group, &T2s, &Q);
  const int n = p.t1.n;
  p.t2.n = n;
  p.t2.T = Q.transpose() * T2s * Q;
  p.t2.dT = rotate3(dT2, Q);
  p.t2.R = p.t1.R;
  for (int i = 0; i < n; ++i) p.a.push_back(p.t2.T(i, i));
  // t2 keeps the common frame, so its diagonal is not sorted; groups are by value
  p.t2.b = p.a;
  p.t2.group_of.assign(n, -1);
  p.refined_of.assign(n, -1);
  for (const auto& grp : p.t1.groups)
    for (int i : grp) {
      if (p.refined_of[i] >= 0) continue;
      std::vector<int> cls;
      for (int k : grp)
        if (p.refined_of[k] < 0 && std::abs(p.a[k] - p.a[i]) <= eps_group * std::max(1.0, std::abs(p.a[i]))) {
          p.refined_of[k] = static_cast<int>(p.refined.size());
          cls.push_back(k);
        }
      p.refined.push_back(cls);
    }
  for (int i = 0; i < n; ++i) {
    if (p.t2.group_of[i] >= 0) continue;
    const int id = static_cast<int>(p.t2.groups.size());
    std::vector<int> cls;
    for (int k = 0; k < n; ++k)
      if (p.t2.group_of[k] < 0 && std::abs(p.a[k] - p.a[i]) <= eps_group * std::max(1.0, std::abs(p.a[i]))) {
        p.t2.group_of[k] = id;
        cls.push_back(k);
      }
    p.t2.groups.push_back(cls);
  }
  return p;
}

// Samples built from the geometric modules.
inline TensorFieldSample field_moebius_B(const MoebiusData& d, double eps = 1e-8) {
  return make_field(d.B, d.dB, d.riemann.R, eps, &d.A);
}
inline TensorFieldSample field_moebius_A(const MoebiusData& d, double eps = 1e-8) {
  return make_field(d.A, d.dA, d.riemann.R, eps, &d.B);
}
inline PairedTensorSample paired_moebius(const MoebiusData& d, double eps = 1e-8) {
  return make_paired(d.B, d.dB, d.A, d.dA, d.riemann.R, eps);
}
inline TensorFieldSample field_laguerre_B(const LaguerreData& d, double eps = 1e-8) {
  return make_field(d.B, d.dB, d.riemann.R, eps, d.has_L ? &d.L : nullptr);
}
inline TensorFieldSample field_laguerre_L(const LaguerreData& d, double eps = 1e-8) {
  if (!d.has_L || d.dL.empty()) throw Error(ErrorCode::OrderUnavailable, "Laguerre tensor needs n >= 3");
  return make_field(d.L, d.dL, d.riemann.R, eps, &d.B);
}

// (T1 (.) T2)_ijkl = T1_ik T2_jl + T1_jl T2_ik - T1_il T2_jk - T1_jk T2_il.
inline std::vector<double> kulkarni_nomizu(const Eigen::MatrixXd& T1, const Eigen::MatrixXd& T2) {
  if (T1.rows() != T2.rows() || T1.cols() != T2.cols() || T1.rows() != T1.cols())
    throw Error(ErrorCode::DimensionMismatch, "Kulkarni-Nomizu product needs equal square tensors");
  const int n = static_cast<int>(T1.rows());
  std::vector<double> out(static_cast<std::size_t>(n) * n * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          out[idx4(n, i, j, k, l)] =
              T1(i, k) * T2(j, l) + T1(j, l) * T2(i, k) - T1(i, l) * T2(j, k) - T1(j, k) * T2(i, l);
  return out;
}

// max |R - (1/2) T1 (.) T1 - T2 (.) g|.
inline double gauss_relation_residual(const std::vector<double>& R, const Eigen::MatrixXd& T1,
                                      const Eigen::MatrixXd& T2, const Eigen::MatrixXd& g) {
  const auto p11 = kulkarni_nomizu(T1, T1);
  const auto p2g = kulkarni_nomizu(T2, g);
  if (R.size() != p11.size()) throw Error(ErrorCode::DimensionMismatch, "curvature size differs from tensors");
  double r = 0.0;
  for (std::size_t i = 0; i < R.size(); ++i) r = std::max(r, std::abs(R[i] - 0.5 * p11[i] - p2g[i]));
  return r;
}

inline double codazzi_residual(const TensorFieldSample& f) {
  const int n = f.n;
  double r = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) r = std::max(r, std::abs(f.dT[idx3(n, i, j, k)] - f.dT[idx3(n, k, j, i)]));
  return r;
}

inline double max_gradient(const TensorFieldSample& f) {
  double r = 0.0;
  for (double x : f.dT) r = std::max(r, std::abs(x));
  return r;
}

struct IsoparametricCheck {
  bool verdict = false;
  double max_codazzi = 0.0;
  double max_drift = 0.0;
  bool groups_constant = true;
};

inline IsoparametricCheck isoparametric_check(const std::vector<TensorFieldSample>& field, double tol) {
  IsoparametricCheck c;
  std::vector<std::vector<double>> bs;
  for (const auto& f : field) {
    c.max_codazzi = std::max(c.max_codazzi, codazzi_residual(f));
    bs.push_back(f.b);
    if (f.groups.size() != field.front().groups.size()) c.groups_constant = false;
  }
  c.max_drift = eigen_drift(bs);
  c.verdict = !field.empty() && c.max_codazzi < tol && c.max_drift < tol;
  return c;
}

// Coefficients of omega_ij = sum_k T_{ij,k} / (b_i - b_j) omega_k.
inline Eigen::VectorXd connection_form(const TensorFieldSample& f, int i, int j) {
  if (f.same_group(i, j)) throw Error(ErrorCode::SameGroup, "connection form needs indices in distinct groups");
  Eigen::VectorXd w(f.n);
  for (int k = 0; k < f.n; ++k) w[k] = f.dT[idx3(f.n, i, j, k)] / (f.b[i] - f.b[j]);
  return w;
}

// max |T_{ij,k}| over index triples where two of the indices share a group.
inline double vanishing_pattern_residual(const TensorFieldSample& f) {
  const int n = f.n;
  double r = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (f.same_group(i, j) || f.same_group(j, k) || f.same_group(i, k))
          r = std::max(r, std::abs(f.dT[idx3(n, i, j, k)]));
  return r;
}

struct SectionalEstimate {
  int i = 0, j = 0;
  double value = 0.0;
};

// R_ijij = sum_{k not in [i],[j]} 2 T_{ij,k}^2 / ((b_k - b_i)(b_k - b_j)) for [i] != [j].
inline std::vector<SectionalEstimate> sectional_from_gradients(const TensorFieldSample& f) {
  const int n = f.n;
  std::vector<SectionalEstimate> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (f.same_group(i, j)) continue;
      double s = 0.0;
      for (int k = 0; k < n; ++k) {
        if (f.same_group(k, i) || f.same_group(k, j)) continue;
        const double t = f.dT[idx3(n, i, j, k)];
        s += 2.0 * t * t / ((f.b[k] - f.b[i]) * (f.b[k] - f.b[j]));
      }
      out.push_back({i, j, s});
    }
  return out;
}

inline void require_curvature(const TensorFieldSample& f) {
  if (f.R.size() != static_cast<std::size_t>(f.n) * f.n * f.n * f.n)
    throw Error(ErrorCode::DimensionMismatch, "sample carries no curvature tensor");
}

// Only pairs inside a common outer group are compared when outer is given.
inline void check_separation(const std::vector<double>& vals, const std::vector<int>& group_of, double eps,
                             const std::vector<int>* outer = nullptr) {
  for (std::size_t i = 0; i < vals.size(); ++i)
    for (std::size_t j = 0; j < vals.size(); ++j)
      if (group_of[i] != group_of[j] && (!outer || (*outer)[i] == (*outer)[j]) &&
          std::abs(vals[i] - vals[j]) < 10 * eps)
        throw Error(ErrorCode::DegenerateDenominator, "eigenvalue groups collapse under tolerance");
}

// Generalized Cartan sums sum_{j not in [i]} R_ijij / (b_j - b_i), one per i.
inline std::vector<double> cartan_residual(const TensorFieldSample& f, double eps_group = 1e-8) {
  require_curvature(f);
  check_separation(f.b, f.group_of, eps_group);
  std::vector<double> out(f.n, 0.0);
  for (int i = 0; i < f.n; ++i)
    for (int j = 0; j < f.n; ++j)
      if (!f.same_group(i, j)) out[i] += f.sectional(i, j) / (f.b[j] - f.b[i]);
  return out;
}

// Within each eigenspace of T1: sum_{j in [i], j not in (i)} R_ijij / (a_i - a_j).
inline std::vector<double> cartan_residual_paired(const PairedTensorSample& p, double eps_group = 1e-8) {
  const auto& f = p.t1;
  require_curvature(f);
  check_separation(p.a, p.refined_of, eps_group, &f.group_of);
  std::vector<double> out(f.n, 0.0);
  for (int i = 0; i < f.n; ++i)
    for (int j = 0; j < f.n; ++j)
      if (f.same_group(i, j) && p.refined_of[i] != p.refined_of[j])
        out[i] += f.sectional(i, j) / (p.a[i] - p.a[j]);
  return out;
}

// Lines through at least three distinct (a, b) pairs of a paired sample; each
// line lists refined-group ids sorted by b.
inline std::vector<std::vector<int>> pair_lines(const PairedTensorSample& p, double tol) {
  const int s = static_cast<int>(p.refined.size());
  std::vector<double> A(s), B(s);
  for (int g = 0; g < s; ++g) {
    A[g] = p.a[p.refined[g][0]];
    B[g] = p.t1.b[p.refined[g][0]];
  }
  std::vector<std::vector<int>> lines;
  for (int x = 0; x < s; ++x)
    for (int y = x + 1; y < s; ++y) {
      std::vector<int> line{x, y};
      for (int z = 0; z < s; ++z) {
        if (z == x || z == y) continue;
        const double cross = (A[y] - A[x]) * (B[z] - B[x]) - (A[z] - A[x]) * (B[y] - B[x]);
        if (std::abs(cross) < tol) line.push_back(z);
      }
      if (line.size() < 3) continue;
      std::sort(line.begin(), line.end(), [&](int l, int r) { return B[l] < B[r]; });
      if (std::find(lines.begin(), lines.end(), line) == lines.end()) lines.push_back(line);
    }
  return lines;
}

struct LineCartan {
  std::vector<int> line;
  double residual = 0.0;
};

// For each line with >= 3 pairs and each j in a member group (i_k):
// sum_{m in the line's groups, m not in (i_k)} R_jmjm / (b_{i_k} - b_m).
inline std::vector<LineCartan> cartan_residual_line(const PairedTensorSample& p, double tol = 1e-6) {
  const auto& f = p.t1;
  require_curvature(f);
  std::vector<LineCartan> out;
  for (const auto& line : pair_lines(p, tol)) {
    LineCartan lc{line, 0.0};
    std::vector<int> members;
    for (int g : line)
      for (int m : p.refined[g]) members.push_back(m);
    for (int g : line)
      for (int j : p.refined[g]) {
        double s = 0.0;
        for (int m : members) {
          if (p.refined_of[m] == g) continue;
          const double den = f.b[j] - f.b[m];
          if (std::abs(den) < 10 * tol) throw Error(ErrorCode::DegenerateDenominator, "line pairs share b");
          s += f.sectional(j, m) / den;
        }
        lc.residual = std::max(lc.residual, std::abs(s));
      }
    out.push_back(lc);
  }
  return out;
}

// Sign pattern: R_ijij >= 0 between adjacent groups, <= 0 between the extreme groups.
struct SignCheck {
  double min_adjacent = 0.0;
  double max_extreme = 0.0;
  bool pass = true;
};

inline SignCheck tensor3_check(const TensorFieldSample& f, double tol = 1e-8) {
  require_curvature(f);
  SignCheck c;
  const int r = static_cast<int>(f.groups.size());
  if (r < 2) return c;
  c.min_adjacent = std::numeric_limits<double>::infinity();
  c.max_extreme = -std::numeric_limits<double>::infinity();
  for (int g = 0; g + 1 < r; ++g)
    for (int i : f.groups[g])
      for (int j : f.groups[g + 1]) c.min_adjacent = std::min(c.min_adjacent, f.sectional(i, j));
  for (int i : f.groups.front())
    for (int j : f.groups.back()) c.max_extreme = std::max(c.max_extreme, f.sectional(i, j));
  c.pass = c.min_adjacent >= -tol && c.max_extreme <= tol;
  return c;
}

// Eigenvalue count of T2 on each eigenspace of T1, and |b^2 + a + a'| when two.
struct Ble2Check {
  int max_distinct = 0;
  double residual = 0.0;
  bool pass = true;
};

inline Ble2Check ble2_check(const PairedTensorSample& p, double tol = 1e-6) {
  Ble2Check c;
  for (const auto& grp : p.t1.groups) {
    std::vector<double> as;
    for (int i : grp) {
      bool seen = false;
      for (double x : as) seen = seen || std::abs(x - p.a[i]) <= tol;
      if (!seen) as.push_back(p.a[i]);
    }
    c.max_distinct = std::max(c.max_distinct, static_cast<int>(as.size()));
    if (as.size() == 2) {
      const double b = p.t1.b[grp[0]];
      c.residual = std::max(c.residual, std::abs(b * b + as[0] + as[1]));
    }
  }
  c.pass = c.max_distinct <= 2 && c.residual < tol;
  return c;
}

// Sectional curvatures of the frame planes and of seeded random planes.
inline std::vector<double> sampled_sectional(const TensorFieldSample& f, int random_planes = 32, unsigned seed = 1) {
  require_curvature(f);
  const int n = f.n;
  std::vector<double> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.push_back(f.sectional(i, j));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N01;
  for (int s = 0; s < random_planes; ++s) {
    Eigen::VectorXd X(n), Y(n);
    for (int i = 0; i < n; ++i) {
      X[i] = N01(rng);
      Y[i] = N01(rng);
    }
    double num = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) num += f.R[idx4(n, i, j, k, l)] * X[i] * Y[j] * X[k] * Y[l];
    const double den = X.squaredNorm() * Y.squaredNorm() - std::pow(X.dot(Y), 2);
    if (den > 1e-12) out.push_back(num / den);
  }
  return out;
}

// Isoparametric tensor on a patch of one-signed sectional curvature is parallel.
struct LecodaCheck {
  bool applicable = false;
  int sign = 0;  // +1 non-negative, -1 non-positive, 0 mixed
  double max_gradient = 0.0;
  bool pass = true;
};

inline LecodaCheck lecoda_check(const std::vector<TensorFieldSample>& field, double tol = 1e-6,
                                double sign_tol = 1e-8) {
  LecodaCheck c;
  bool nonneg = true, nonpos = true;
  for (const auto& f : field) {
    for (double k : sampled_sectional(f)) {
      nonneg = nonneg && k >= -sign_tol;
      nonpos = nonpos && k <= sign_tol;
    }
    c.max_gradient = std::max(c.max_gradient, max_gradient(f));
  }
  c.sign = nonneg ? 1 : (nonpos ? -1 : 0);
  c.applicable = (nonneg || nonpos) && isoparametric_check(field, tol).verdict;
  c.pass = !c.applicable || c.max_gradient < tol;
  return c;
}

enum class SpectrumKind { ConstantCurvature, TwoBlock, Infeasible };

inline std::string to_string(SpectrumKind k) {
  switch (k) {
    case SpectrumKind::ConstantCurvature: return "ConstantCurvature";
    case SpectrumKind::TwoBlock: return "TwoBlock";
    case SpectrumKind::Infeasible: return "Infeasible";
  }
  return "?";
}

struct SpectrumVerdict {
  SpectrumKind kind = SpectrumKind::Infeasible;
  double b = 0.0;                   // TwoBlock: the spectrum is {b, -b} with b > 0
  std::vector<double> values;       // distinct eigenvalues, ascending
  std::vector<int> multiplicity;
  std::vector<double> sums;         // sum_{j not in [i]} m_j (b_j + b_i) / (b_j - b_i) per group
};

// Schouten spectrum of a locally conformally flat metric with constant
// eigenvalues: either one eigenvalue, or {b, -b}.
inline SpectrumVerdict schouten_spectrum_classify(const std::vector<double>& spectrum, double tol = 1e-8) {
  SpectrumVerdict v;
  std::vector<double> s = spectrum;
  std::sort(s.begin(), s.end());
  for (const auto& grp : group_sorted(s, tol)) {
    v.values.push_back(s[grp[0]]);
    v.multiplicity.push_back(static_cast<int>(grp.size()));
  }
  const int r = static_cast<int>(v.values.size());
  for (int i = 0; i < r; ++i) {
    double sum = 0.0;
    for (int j = 0; j < r; ++j)
      if (j != i) sum += v.multiplicity[j] * (v.values[j] + v.values[i]) / (v.values[j] - v.values[i]);
    v.sums.push_back(sum);
  }
  if (r <= 1) {
    v.kind = SpectrumKind::ConstantCurvature;
    return v;
  }
  const bool balanced = std::all_of(v.sums.begin(), v.sums.end(), [&](double x) { return std::abs(x) < tol; });
  if (r == 2 && balanced) {
    v.kind = SpectrumKind::TwoBlock;
    v.b = v.values[1];
  } else {
    v.kind = SpectrumKind::Infeasible;
  }
  return v;
}

}  // namespace dupinlab::iso
