#pragma once

#include <cstdlib>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "dupinlab/error.hpp"
#include "dupinlab/jet.hpp"

namespace dupinlab {

struct Interval {
  double lo = 0.0, hi = 0.0;
};

// Parametrized hypersurface u -> f(u) in R^{dim_out}. The map is written once
// against jets; the value path lifts the point at order 0.
struct Immersion {
  using Map = std::function<JetVector(std::span<const Jet>)>;
  using Predicate = std::function<bool(std::span<const double>)>;

  std::string name;
  int dim_in = 0;
  int dim_out = 0;
  std::vector<Interval> box;
  Map map;
  // true where the point is excluded from the domain
  Predicate excluded;
  // f lands on the unit sphere of R^{dim_out} (cone bases, Clifford tori)
  bool spherical = false;

  bool contains(std::span<const double> p) const {
    if (static_cast<int>(p.size()) != dim_in) return false;
    for (int i = 0; i < dim_in; ++i)
      if (!(p[i] >= box[i].lo && p[i] <= box[i].hi)) return false;
    return !(excluded && excluded(p));
  }

  JetVector eval_jet(std::span<const double> p, int order) const {
    if (static_cast<int>(p.size()) != dim_in)
      throw Error(ErrorCode::DimensionMismatch, name + ": point has wrong dimension");
    if (!contains(p)) throw Error(ErrorCode::PointOutsideDomain, name + ": point outside the parameter domain");
    JetVector u = lift(p, order);
    JetVector f = map(u);
    if (static_cast<int>(f.size()) != dim_out)
      throw Error(ErrorCode::DimensionMismatch, name + ": map returned wrong component count");
    return f;
  }

  std::vector<double> eval(std::span<const double> p) const {
    JetVector f = eval_jet(p, 0);
    std::vector<double> r;
    for (const Jet& x : f) r.push_back(x.value());
    return r;
  }

  std::vector<double> base_point() const {
    std::vector<double> c;
    for (const auto& iv : box) c.push_back(0.5 * (iv.lo + iv.hi));
    return c;
  }
};

// Tensor grid of `per_axis` points inside the box, inset by `margin` of each
// side. Excluded points are dropped.
struct Grid {
  std::vector<std::vector<double>> points;

  static Grid make(const Immersion& imm, int per_axis = 4, double margin = 0.05) {
    Grid g;
    const int d = imm.dim_in;
    std::vector<int> idx(d, 0);
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(per_axis);
    for (std::size_t k = 0; k < total; ++k) {
      std::size_t rem = k;
      std::vector<double> p(d);
      for (int i = d - 1; i >= 0; --i) {
        const int j = static_cast<int>(rem % per_axis);
        rem /= per_axis;
        const double lo = imm.box[i].lo, hi = imm.box[i].hi;
        const double a = lo + margin * (hi - lo), b = hi - margin * (hi - lo);
        p[i] = per_axis == 1 ? 0.5 * (a + b) : a + (b - a) * j / (per_axis - 1);
      }
      if (!(imm.excluded && imm.excluded(p))) g.points.push_back(std::move(p));
    }
    return g;
  }
};

inline int default_threads() {
  if (const char* s = std::getenv("DUPINLAB_THREADS")) {
    int t = std::atoi(s);
    if (t > 0) return t;
  }
  return 1;
}

// Evaluate fn at every index. Results keep grid order; the lowest-index
// exception is rethrown so failures do not depend on scheduling.
template <class R, class F>
std::vector<R> parallel_map(std::size_t count, F&& fn, int threads = 1) {
  std::vector<std::optional<R>> out(count);
  std::vector<std::exception_ptr> errs(count);
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < count; i += step) {
      try {
        out[i].emplace(fn(i));
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  const std::size_t t = static_cast<std::size_t>(std::max(1, threads));
  if (t == 1 || count < 2) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < t; ++w) pool.emplace_back(work, w, t);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  std::vector<R> r;
  r.reserve(count);
  for (auto& o : out) r.push_back(std::move(*o));
  return r;
}

}  // namespace dupinlab
