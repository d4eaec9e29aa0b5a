#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "dupinlab/error.hpp"

namespace dupinlab {

// Highest Taylor order a jet may carry. Covariant derivatives of the
// curvature-level invariants need six derivatives of the immersion.
inline constexpr int kMaxJetOrder = 6;
inline constexpr int kMaxJetDim = 8;

// Multi-indices in d variables up to kMaxJetOrder, graded by total degree so
// that every lower order is a prefix of the table.
class JetLayout {
 public:
  struct Pair {
    std::uint32_t a, b;
  };

  static const JetLayout& get(int dim) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<JetLayout>> cache;
    if (dim < 1 || dim > kMaxJetDim) throw Error(ErrorCode::DimensionMismatch, "jet dimension out of range");
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[dim];
    if (!slot) slot.reset(new JetLayout(dim));
    return *slot;
  }

  int dim() const { return dim_; }
  std::size_t size(int order) const { return offsets_[order + 1]; }
  int degree(std::size_t k) const { return degree_[k]; }
  const std::uint8_t* exponents(std::size_t k) const { return &exps_[k * dim_]; }
  double weight(std::size_t k) const { return weight_[k]; }  // alpha!

  std::size_t find(std::span<const int> e) const {
    std::uint64_t key = 0;
    int deg = 0;
    for (int i = static_cast<int>(e.size()) - 1; i >= 0; --i) {
      if (e[i] < 0) return npos;
      deg += e[i];
      key = key * 8 + static_cast<std::uint64_t>(e[i]);
    }
    if (deg > kMaxJetOrder) return npos;
    auto it = index_.find(key);
    return it == index_.end() ? npos : it->second;
  }

  // Index of alpha + e_i, or npos past the maximum order.
  std::size_t raise(std::size_t k, int i) const { return raise_[k * dim_ + i]; }

  std::span<const Pair> pairs(std::size_t gamma) const {
    return {pairs_.data() + pair_begin_[gamma], pairs_.data() + pair_begin_[gamma + 1]};
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  explicit JetLayout(int dim) : dim_(dim) {
    std::vector<std::vector<int>> all;
    offsets_.push_back(0);
    for (int deg = 0; deg <= kMaxJetOrder; ++deg) {
      std::vector<std::vector<int>> level;
      std::vector<int> e(dim, 0);
      enumerate(level, e, 0, deg);
      std::sort(level.begin(), level.end(), std::greater<>());
      for (auto& v : level) all.push_back(v);
      offsets_.push_back(all.size());
    }
    const std::size_t N = all.size();
    keys_.resize(N);
    for (std::size_t k = 0; k < N; ++k) {
      std::uint64_t key = 0;
      for (int i = dim - 1; i >= 0; --i) key = key * 8 + static_cast<std::uint64_t>(all[k][i]);
      keys_[k] = key;
      index_[key] = k;
    }
    exps_.resize(N * dim);
    degree_.resize(N);
    weight_.resize(N);
    for (std::size_t k = 0; k < N; ++k) {
      int deg = 0;
      double w = 1.0;
      for (int i = 0; i < dim; ++i) {
        exps_[k * dim + i] = static_cast<std::uint8_t>(all[k][i]);
        deg += all[k][i];
        for (int f = 2; f <= all[k][i]; ++f) w *= f;
      }
      degree_[k] = deg;
      weight_[k] = w;
    }
    raise_.assign(N * dim, npos);
    for (std::size_t k = 0; k < N; ++k)
      for (int i = 0; i < dim; ++i) {
        std::vector<int> e = all[k];
        ++e[i];
        raise_[k * dim + i] = find(e);
      }
    pair_begin_.push_back(0);
    for (std::size_t g = 0; g < N; ++g) {
      for (std::size_t a = 0; a < N && degree_[a] <= degree_[g]; ++a) {
        bool ok = true;
        for (int i = 0; i < dim && ok; ++i) ok = exps_[a * dim + i] <= exps_[g * dim + i];
        if (!ok) continue;
        pairs_.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(index_.at(keys_[g] - keys_[a]))});
      }
      pair_begin_.push_back(pairs_.size());
    }
  }

  static void enumerate(std::vector<std::vector<int>>& out, std::vector<int>& e, int i, int left) {
    if (i == static_cast<int>(e.size()) - 1) {
      e[i] = left;
      out.push_back(e);
      return;
    }
    for (int v = left; v >= 0; --v) {
      e[i] = v;
      enumerate(out, e, i + 1, left - v);
    }
    e[i] = 0;
  }

  int dim_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint64_t> keys_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
  std::vector<std::uint8_t> exps_;
  std::vector<int> degree_;
  std::vector<double> weight_;
  std::vector<std::size_t> raise_;
  std::vector<Pair> pairs_;
  std::vector<std::size_t> pair_begin_;
};

// Truncated multivariate Taylor polynomial. Coefficients are Taylor
// coefficients, so the partial derivative for multi-index alpha is alpha! c_alpha.
// Mixed-order arithmetic truncates to the lower order.
class Jet {
 public:
  Jet() = default;

  static Jet constant(double v, int dim, int order) {
    Jet j(dim, order);
    j.c_[0] = v;
    return j;
  }
  static Jet variable(double v, int i, int dim, int order) {
    Jet j = constant(v, dim, order);
    if (order >= 1) {
      std::vector<int> e(dim, 0);
      e[i] = 1;
      j.c_[j.layout_->find(e)] = 1.0;
    }
    return j;
  }

  bool valid() const { return layout_ != nullptr; }
  int dim() const { return layout_->dim(); }
  int order() const { return order_; }
  double value() const { return c_[0]; }
  std::span<const double> coefficients() const { return c_; }
  double& coefficient(std::size_t k) { return c_[k]; }

  // Partial derivative with the given per-variable counts.
  double derivative(std::span<const int> counts) const {
    int deg = 0;
    for (int v : counts) deg += v;
    if (static_cast<int>(counts.size()) != dim()) throw Error(ErrorCode::DimensionMismatch, "derivative index length");
    if (deg > order_) throw Error(ErrorCode::OrderUnavailable, "derivative above jet order");
    std::size_t k = layout_->find(counts);
    return layout_->weight(k) * c_[k];
  }
  double d(int i) const {
    std::array<int, kMaxJetDim> e{};
    e[i] = 1;
    return derivative(std::span<const int>(e.data(), dim()));
  }
  double d(int i, int j) const {
    std::array<int, kMaxJetDim> e{};
    ++e[i];
    ++e[j];
    return derivative(std::span<const int>(e.data(), dim()));
  }

  // d/du_i as a jet one order lower.
  Jet partial(int i) const {
    if (order_ < 1) throw Error(ErrorCode::OrderUnavailable, "partial of an order-0 jet");
    Jet r(dim(), order_ - 1);
    for (std::size_t k = 0; k < r.c_.size(); ++k) {
      std::size_t up = layout_->raise(k, i);
      r.c_[k] = (layout_->exponents(k)[i] + 1) * c_[up];
    }
    return r;
  }

  Jet truncate(int order) const {
    if (order >= order_) return *this;
    Jet r(dim(), order);
    std::copy(c_.begin(), c_.begin() + r.c_.size(), r.c_.begin());
    return r;
  }

  Jet& operator+=(const Jet& o) { return *this = *this + o; }
  Jet& operator-=(const Jet& o) { return *this = *this - o; }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }
  Jet& operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
  }
  Jet& operator+=(double s) {
    c_[0] += s;
    return *this;
  }

  friend Jet operator-(const Jet& a) {
    Jet r = a;
    for (double& v : r.c_) v = -v;
    return r;
  }
  friend Jet operator+(const Jet& a, const Jet& b) {
    check(a, b);
    Jet r(a.dim(), std::min(a.order_, b.order_));
    for (std::size_t k = 0; k < r.c_.size(); ++k) r.c_[k] = a.c_[k] + b.c_[k];
    return r;
  }
  friend Jet operator-(const Jet& a, const Jet& b) {
    check(a, b);
    Jet r(a.dim(), std::min(a.order_, b.order_));
    for (std::size_t k = 0; k < r.c_.size(); ++k) r.c_[k] = a.c_[k] - b.c_[k];
    return r;
  }
  friend Jet operator*(const Jet& a, const Jet& b) {
    check(a, b);
    Jet r(a.dim(), std::min(a.order_, b.order_));
    const double* ac = a.c_.data();
    const double* bc = b.c_.data();
    for (std::size_t g = 0; g < r.c_.size(); ++g) {
      double acc = 0.0;
      for (const auto& p : a.layout_->pairs(g)) acc += ac[p.a] * bc[p.b];
      r.c_[g] = acc;
    }
    return r;
  }
  friend Jet operator/(const Jet& a, const Jet& b) { return a * inverse(b); }

  friend Jet operator+(const Jet& a, double s) { Jet r = a; r.c_[0] += s; return r; }
  friend Jet operator+(double s, const Jet& a) { return a + s; }
  friend Jet operator-(const Jet& a, double s) { return a + (-s); }
  friend Jet operator-(double s, const Jet& a) { return (-a) + s; }
  friend Jet operator*(const Jet& a, double s) { Jet r = a; r *= s; return r; }
  friend Jet operator*(double s, const Jet& a) { return a * s; }
  friend Jet operator/(const Jet& a, double s) {
    if (std::abs(s) <= kDivTol) throw Error(ErrorCode::DivisionNearZero, "division by a near-zero scalar");
    return a * (1.0 / s);
  }
  friend Jet operator/(double s, const Jet& a) { return s * inverse(a); }

  // phi(c0 + delta) = sum_k a[k] delta^k with a[k] = phi^(k)(c0)/k!.
  Jet compose(std::span<const double> a) const {
    Jet delta = *this;
    delta.c_[0] = 0.0;
    Jet r = constant(a[order_], dim(), order_);
    for (int k = order_ - 1; k >= 0; --k) {
      r = r * delta;
      r.c_[0] += a[k];
    }
    return r;
  }

  friend Jet inverse(const Jet& b) {
    const double v = b.value();
    if (std::abs(v) <= kDivTol) throw Error(ErrorCode::DivisionNearZero, "jet division by near-zero value");
    std::array<double, kMaxJetOrder + 1> a{};
    double p = 1.0 / v;
    for (int k = 0; k <= b.order_; ++k, p *= -1.0 / v) a[k] = p;
    return b.compose(a);
  }

  static constexpr double kDivTol = 1e-300;

 private:
  Jet(int dim, int order) : layout_(&JetLayout::get(dim)), order_(order), c_(layout_->size(order), 0.0) {
    if (order < 0 || order > kMaxJetOrder) throw Error(ErrorCode::OrderOutOfRange, "jet order out of range");
  }
  static void check(const Jet& a, const Jet& b) {
    if (!a.layout_ || !b.layout_ || a.layout_ != b.layout_)
      throw Error(ErrorCode::DimensionMismatch, "jets over different variable counts");
  }

  const JetLayout* layout_ = nullptr;
  int order_ = 0;
  std::vector<double> c_;
};

inline Jet exp(const Jet& x) {
  std::array<double, kMaxJetOrder + 1> a{};
  double e = std::exp(x.value()), f = 1.0;
  for (int k = 0; k <= x.order(); ++k) {
    a[k] = e / f;
    f *= k + 1;
  }
  return x.compose(a);
}

inline Jet sin(const Jet& x) {
  std::array<double, kMaxJetOrder + 1> a{};
  const double s = std::sin(x.value()), c = std::cos(x.value());
  const double cyc[4] = {s, c, -s, -c};
  double f = 1.0;
  for (int k = 0; k <= x.order(); ++k) {
    a[k] = cyc[k % 4] / f;
    f *= k + 1;
  }
  return x.compose(a);
}

inline Jet cos(const Jet& x) {
  std::array<double, kMaxJetOrder + 1> a{};
  const double s = std::sin(x.value()), c = std::cos(x.value());
  const double cyc[4] = {c, -s, -c, s};
  double f = 1.0;
  for (int k = 0; k <= x.order(); ++k) {
    a[k] = cyc[k % 4] / f;
    f *= k + 1;
  }
  return x.compose(a);
}

inline Jet sinh(const Jet& x) {
  std::array<double, kMaxJetOrder + 1> a{};
  const double s = std::sinh(x.value()), c = std::cosh(x.value());
  double f = 1.0;
  for (int k = 0; k <= x.order(); ++k) {
    a[k] = (k % 2 ? c : s) / f;
    f *= k + 1;
  }
  return x.compose(a);
}

inline Jet cosh(const Jet& x) {
  std::array<double, kMaxJetOrder + 1> a{};
  const double s = std::sinh(x.value()), c = std::cosh(x.value());
  double f = 1.0;
  for (int k = 0; k <= x.order(); ++k) {
    a[k] = (k % 2 ? s : c) / f;
    f *= k + 1;
  }
  return x.compose(a);
}

inline Jet log(const Jet& x) {
  const double v = x.value();
  if (!(v > 0.0)) throw Error(ErrorCode::DomainError, "log of a non-positive value");
  std::array<double, kMaxJetOrder + 1> a{};
  a[0] = std::log(v);
  double p = 1.0 / v;
  for (int k = 1; k <= x.order(); ++k, p /= v) a[k] = ((k % 2) ? 1.0 : -1.0) * p / k;
  return x.compose(a);
}

// x^p for real p via the binomial series; needs x > 0.
inline Jet pow(const Jet& x, double p) {
  const double v = x.value();
  if (!(v > 0.0)) throw Error(ErrorCode::DomainError, "real power of a non-positive value");
  std::array<double, kMaxJetOrder + 1> a{};
  double binom = 1.0;
  for (int k = 0; k <= x.order(); ++k) {
    a[k] = binom * std::pow(v, p - k);
    binom *= (p - k) / (k + 1);
  }
  return x.compose(a);
}

inline Jet sqrt(const Jet& x) {
  if (!(x.value() > 0.0)) throw Error(ErrorCode::DomainError, "sqrt of a non-positive value");
  return pow(x, 0.5);
}

// Integer power by repeated squaring; negative exponents go through inverse.
inline Jet pow(const Jet& x, int k) {
  if (k < 0) return pow(inverse(x), -k);
  Jet r = Jet::constant(1.0, x.dim(), x.order());
  Jet b = x;
  while (k > 0) {
    if (k & 1) r = r * b;
    k >>= 1;
    if (k) b = b * b;
  }
  return r;
}

using JetVector = std::vector<Jet>;

// Lift a point to coordinate jets u_i = p_i + h_i.
inline JetVector lift(std::span<const double> p, int order) {
  if (order < 0 || order > kMaxJetOrder) throw Error(ErrorCode::OrderOutOfRange, "requested jet order out of range");
  JetVector u;
  const int d = static_cast<int>(p.size());
  for (int i = 0; i < d; ++i) u.push_back(Jet::variable(p[i], i, d, order));
  return u;
}

}  // namespace dupinlab
