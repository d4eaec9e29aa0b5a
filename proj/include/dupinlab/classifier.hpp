#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "dupinlab/error.hpp"
#include "dupinlab/moebius.hpp"

namespace dupinlab::classify {

struct Pair {
  double a = 0.0;
  double b = 0.0;
  int multiplicity = 1;
};

struct PairCloud {
  std::vector<Pair> pairs;
  double tol_group = 1e-8;
};

inline bool close(double x, double y, double tol) { return std::abs(x - y) <= tol * std::max(1.0, std::max(std::abs(x), std::abs(y))); }

// Merge equal pairs (within tol_group) and sort by (b, a). Distances in
// [tol, 10 tol) are reported as TolAmbiguous rather than guessed.
inline PairCloud normalize(const PairCloud& in) {
  int total = 0;
  for (const Pair& p : in.pairs) {
    if (p.multiplicity < 1) throw Error(ErrorCode::InvalidCloud, "multiplicities must be positive");
    if (!std::isfinite(p.a) || !std::isfinite(p.b)) throw Error(ErrorCode::InvalidCloud, "pairs must be finite");
    total += p.multiplicity;
  }
  if (total < 3) throw Error(ErrorCode::InvalidCloud, "total multiplicity must be at least 3");
  PairCloud out;
  out.tol_group = in.tol_group;
  const double t = in.tol_group;
  for (const Pair& p : in.pairs) {
    bool merged = false;
    for (Pair& q : out.pairs) {
      const bool eb = close(p.b, q.b, t), ea = close(p.a, q.a, t);
      const bool nb = close(p.b, q.b, 10 * t), na = close(p.a, q.a, 10 * t);
      if ((nb && !eb && na) || (na && !ea && nb))
        throw Error(ErrorCode::TolAmbiguous, "pairs are neither equal nor separated under tolerance");
      if (eb && ea) {
        q.multiplicity += p.multiplicity;
        merged = true;
        break;
      }
    }
    if (!merged) out.pairs.push_back(p);
  }
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const Pair& x, const Pair& y) { return x.b != y.b ? x.b < y.b : x.a < y.a; });
  return out;
}

inline int total_multiplicity(const PairCloud& c) {
  int t = 0;
  for (const Pair& p : c.pairs) t += p.multiplicity;
  return t;
}

// Indices of pairs grouped by equal b.
inline std::vector<std::vector<int>> b_groups(const PairCloud& c) {
  std::vector<std::vector<int>> out;
  for (int i = 0; i < static_cast<int>(c.pairs.size()); ++i) {
    bool placed = false;
    for (auto& g : out)
      if (close(c.pairs[g[0]].b, c.pairs[i].b, c.tol_group)) {
        g.push_back(i);
        placed = true;
        break;
      }
    if (!placed) out.push_back({i});
  }
  return out;
}

inline constexpr double kInfiniteSlope = std::numeric_limits<double>::infinity();

struct LineSet {
  int anchor = 0;
  double slope = 0.0;        // kInfiniteSlope for pairs sharing the anchor's b
  std::vector<int> members;  // anchor first, then the others by ascending b
  bool infinite() const { return std::isinf(slope); }
};

// Maximal families of pairs collinear with the anchor, by ascending slope.
inline std::vector<LineSet> build_line_sets(const PairCloud& cloud, int anchor) {
  const PairCloud& c = cloud;
  const int s = static_cast<int>(c.pairs.size());
  if (anchor < 0 || anchor >= s) throw Error(ErrorCode::InvalidCloud, "anchor out of range");
  const Pair& P = c.pairs[anchor];
  struct Item {
    int k;
    double slope;
  };
  std::vector<Item> items;
  for (int k = 0; k < s; ++k) {
    if (k == anchor) continue;
    const Pair& Q = c.pairs[k];
    if (close(P.b, Q.b, c.tol_group))
      items.push_back({k, kInfiniteSlope});
    else
      items.push_back({k, (P.a - Q.a) / (P.b - Q.b)});
  }
  std::sort(items.begin(), items.end(), [](const Item& x, const Item& y) { return x.slope < y.slope; });
  std::vector<LineSet> out;
  for (std::size_t idx = 0; idx < items.size(); ++idx) {
    const Item& it = items[idx];
    if (!out.empty()) {
      LineSet& last = out.back();
      const bool both_inf = last.infinite() && std::isinf(it.slope);
      const bool same = both_inf || (!last.infinite() && !std::isinf(it.slope) && close(last.slope, it.slope, c.tol_group));
      const bool near = !both_inf && !last.infinite() && !std::isinf(it.slope) &&
                        close(last.slope, it.slope, 10 * c.tol_group);
      if (near && !same) throw Error(ErrorCode::TolAmbiguous, "slopes are neither equal nor separated");
      if (same) {
        last.members.push_back(it.k);
        continue;
      }
    }
    out.push_back({anchor, it.slope, {anchor, it.k}});
  }
  for (LineSet& ls : out)
    std::sort(ls.members.begin() + 1, ls.members.end(),
              [&](int x, int y) { return c.pairs[x].b < c.pairs[y].b; });
  return out;
}

struct LinearlyDependent {
  double lambda = 0.0;  // slope: a = lambda b + mu
  double mu = 0.0;
  double gate = 0.0;    // lambda^2 - 2 mu, must be negative when three or more pairs
  bool gated = false;
};

struct Reducible {
  double b_split = 0.0;
  double a_split = 0.0;
  std::vector<Pair> line;  // pairs on a = -b_split b - a_split
  double gate = 0.0;       // b_split^2 + 2 a_split < 0
  std::string rule;        // "case1" (split eigenspace) or "case3" (two-pair minimal line)
};

struct Inconsistent {
  std::string witness;     // violated condition tag
  std::vector<Pair> pairs;
  double value = 0.0;
};

using Outcome = std::variant<LinearlyDependent, Reducible, Inconsistent>;

inline std::string outcome_name(const Outcome& o) {
  if (std::holds_alternative<LinearlyDependent>(o)) return "LinearlyDependent";
  if (std::holds_alternative<Reducible>(o)) return "Reducible";
  return "Inconsistent";
}

inline bool on_line(const Pair& p, double slope, double intercept, double tol) {
  return std::abs(p.a - (slope * p.b + intercept)) <= tol;
}

inline Outcome reducible_or_witness(const PairCloud& c, int split, double b_split, double a_split,
                                    const std::string& rule, double tol) {
  Reducible r;
  r.b_split = b_split;
  r.a_split = a_split;
  r.rule = rule;
  r.gate = b_split * b_split + 2 * a_split;
  std::vector<Pair> off;
  for (int k = 0; k < static_cast<int>(c.pairs.size()); ++k) {
    if (k == split) continue;
    if (on_line(c.pairs[k], -b_split, -a_split, tol))
      r.line.push_back(c.pairs[k]);
    else
      off.push_back(c.pairs[k]);
  }
  if (!off.empty()) return Inconsistent{rule, off, 0.0};
  if (r.gate >= 0) return Inconsistent{rule + ":neg", {c.pairs[split]}, r.gate};
  return r;
}

// Decision procedure on a cloud of constant eigenvalue pairs (a, b).
inline Outcome classify(const PairCloud& input, double tol = 1e-6) {
  const PairCloud c = normalize(input);
  const auto groups = b_groups(c);
  // (1) an eigenspace of T1 carrying two eigenvalues of T2
  for (const auto& g : groups) {
    if (g.size() < 2) continue;
    if (g.size() > 2) {
      std::vector<Pair> w;
      for (int k : g) w.push_back(c.pairs[k]);
      return Inconsistent{"ble2", w, static_cast<double>(g.size())};
    }
    const int lo = c.pairs[g[0]].a <= c.pairs[g[1]].a ? g[0] : g[1];
    const int hi = lo == g[0] ? g[1] : g[0];
    const Pair& p1 = c.pairs[lo];
    const Pair& p2 = c.pairs[hi];
    const double bb = 0.5 * (p1.b + p2.b);
    const double ble = bb * bb + p1.a + p2.a;
    if (std::abs(ble) > tol) return Inconsistent{"ble2", {p1, p2}, ble};
    return reducible_or_witness(c, lo, bb, p1.a, "case1", tol);
  }
  const int r = static_cast<int>(c.pairs.size());
  // (2) at most two pairs
  if (r == 1) return LinearlyDependent{0.0, c.pairs[0].a, 0.0, false};
  if (r == 2) {
    const double lam = (c.pairs[1].a - c.pairs[0].a) / (c.pairs[1].b - c.pairs[0].b);
    return LinearlyDependent{lam, c.pairs[0].a - lam * c.pairs[0].b, 0.0, false};
  }
  // (3) minimal-slope line through the smallest b
  const auto sets = build_line_sets(c, 0);
  const LineSet& first = sets.front();
  const double eps1 = first.slope;
  const double d = c.pairs[0].a - eps1 * c.pairs[0].b;
  const int t = static_cast<int>(first.members.size());
  if (t == r) {
    const double gate = eps1 * eps1 - 2 * d;
    if (gate >= 0) {
      Inconsistent w{"le4", c.pairs, gate};
      return w;
    }
    return LinearlyDependent{eps1, d, gate, true};
  }
  if (t == 2) {
    const int k = first.members[1];
    return reducible_or_witness(c, k, c.pairs[k].b, c.pairs[k].a, "case3", tol);
  }
  std::vector<Pair> w;
  for (int k : first.members) w.push_back(c.pairs[k]);
  return Inconsistent{"case2", w, static_cast<double>(t)};
}

struct ConditionEntry {
  std::string tag;  // abco1, abco2, le4, le5
  std::vector<Pair> pairs;
  double value = 0.0;
  bool pass = true;
};

struct NecessaryReport {
  std::vector<ConditionEntry> entries;
  bool all_pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const ConditionEntry& e) { return e.pass; });
  }
  std::vector<std::string> failed_tags() const {
    std::vector<std::string> out;
    for (const auto& e : entries)
      if (!e.pass && std::find(out.begin(), out.end(), e.tag) == out.end()) out.push_back(e.tag);
    return out;
  }
};

// Necessary conditions on every finite-slope line set of every anchor:
// two-pair sets b_i b_j + a_i + a_j = 0; sets of three or more pairs (sorted
// by b) need consecutive values >= 0, the extreme value <= 0,
// b_first + eps < 0 < b_last + eps and eps^2 - 2d < 0.
inline NecessaryReport necessary_conditions(const PairCloud& input, double tol = 1e-6) {
  const PairCloud c = normalize(input);
  NecessaryReport rep;
  auto val = [](const Pair& x, const Pair& y) { return x.b * y.b + x.a + y.a; };
  std::vector<std::vector<int>> seen;
  for (int anchor = 0; anchor < static_cast<int>(c.pairs.size()); ++anchor)
    for (const LineSet& ls : build_line_sets(c, anchor)) {
      if (ls.infinite()) continue;
      std::vector<int> m = ls.members;
      std::sort(m.begin(), m.end(), [&](int x, int y) { return c.pairs[x].b < c.pairs[y].b; });
      if (std::find(seen.begin(), seen.end(), m) != seen.end()) continue;
      seen.push_back(m);
      std::vector<Pair> ps;
      for (int k : m) ps.push_back(c.pairs[k]);
      if (ps.size() == 2) {
        const double v = val(ps[0], ps[1]);
        rep.entries.push_back({"abco1", ps, v, std::abs(v) <= tol});
        continue;
      }
      for (std::size_t q = 0; q + 1 < ps.size(); ++q) {
        const double v = val(ps[q], ps[q + 1]);
        rep.entries.push_back({"abco2", {ps[q], ps[q + 1]}, v, v >= -tol});
      }
      const double ext = val(ps.front(), ps.back());
      rep.entries.push_back({"abco2", {ps.front(), ps.back()}, ext, ext <= tol});
      const double eps = ls.slope;
      const double d = ps.front().a - eps * ps.front().b;
      rep.entries.push_back({"le5", {ps.front()}, ps.front().b + eps, ps.front().b + eps < 0});
      rep.entries.push_back({"le5", {ps.back()}, ps.back().b + eps, ps.back().b + eps > 0});
      rep.entries.push_back({"le4", ps, eps * eps - 2 * d, eps * eps - 2 * d < 0});
    }
  return rep;
}

// Cloud of (a_i, b_i) from Moebius invariants at one point.
inline PairCloud cloud_from_moebius(const MoebiusData& d, double tol_group = 1e-7) {
  PairCloud c;
  c.tol_group = tol_group;
  for (int i = 0; i < d.n; ++i) c.pairs.push_back({d.a[i], d.b[i], 1});
  return normalize(c);
}

}  // namespace dupinlab::classify
