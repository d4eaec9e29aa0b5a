#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "dupinlab/error.hpp"
#include "dupinlab/exprdsl.hpp"
#include "dupinlab/immersion.hpp"
#include "dupinlab/jet.hpp"

// Closed-form example families. Each family carries its jet map and a text
// restatement of the same formula in the expression language, built from the
// component formulas over named variables.

namespace dupinlab::families {

using Names = std::vector<std::string>;
using TextMap = std::function<Names(const Names&)>;

struct Family {
  std::string tag;
  std::map<std::string, std::string> params;
  Immersion imm;
  TextMap text;                           // component formulas over variable names
  std::vector<double> expected_lambda;    // at the reference point, ascending
  std::vector<std::pair<double, double>> expected_cloud;  // (a, b) pairs, multiplicity 1 each

  // Expression-language source for the same immersion.
  std::string dsl() const {
    Names vars;
    for (int i = 0; i < imm.dim_in; ++i) vars.push_back("u" + std::to_string(i + 1));
    std::string s = "n=" + std::to_string(imm.dim_in) + " on ";
    for (int i = 0; i < imm.dim_in; ++i) {
      if (i) s += "x";
      s += "[" + dsl::detail::number(imm.box[i].lo) + "," + dsl::detail::number(imm.box[i].hi) + "]";
    }
    for (const auto& c : text(vars)) s += ";\n" + c;
    return s + "\n";
  }
};

inline std::string num(double v) {
  std::string s = dsl::detail::number(v);
  return v < 0 ? "(" + s + ")" : s;
}
inline std::string par(const std::string& s) { return "(" + s + ")"; }

// Hyperspherical coordinates: m angles -> point of the unit S^m in R^{m+1}.
inline JetVector sphere_coords(std::span<const Jet> ang) {
  JetVector out;
  const int m = static_cast<int>(ang.size());
  Jet prod = Jet::constant(1.0, ang[0].dim(), ang[0].order());
  for (int i = 0; i < m; ++i) {
    out.push_back(prod * cos(ang[i]));
    prod = prod * sin(ang[i]);
  }
  out.push_back(prod);
  return out;
}

inline Names sphere_coords_text(const Names& ang) {
  Names out;
  std::string prod;
  for (const auto& a : ang) {
    out.push_back(prod.empty() ? "cos(" + a + ")" : prod + "*cos(" + a + ")");
    prod = prod.empty() ? "sin(" + a + ")" : prod + "*sin(" + a + ")";
  }
  out.push_back(prod);
  return out;
}

// Angle box: polar angles stay off the coordinate poles.
inline std::vector<Interval> sphere_box(int m) {
  std::vector<Interval> b;
  for (int i = 0; i < m; ++i) b.push_back(i + 1 < m ? Interval{0.5, 2.6} : Interval{0.2, 2.8});
  return b;
}

// S^p(cos t) x S^q(sin t) inside the unit sphere of R^{p+q+2}.
inline Family make_clifford_torus(int p, int q, double theta) {
  if (p < 1 || q < 1) throw Error(ErrorCode::BadDimensions, "Clifford torus needs p, q >= 1");
  if (!(theta > 1e-6 && theta < M_PI / 2 - 1e-6)) throw Error(ErrorCode::DegenerateAngle, "angle must lie in (0, pi/2)");
  Family fam;
  fam.tag = "clifford-torus";
  fam.params = {{"p", std::to_string(p)}, {"q", std::to_string(q)}, {"theta", dsl::detail::number(theta)}};
  Immersion& imm = fam.imm;
  imm.name = "clifford-torus";
  imm.dim_in = p + q;
  imm.dim_out = p + q + 2;
  imm.spherical = true;
  imm.box = sphere_box(p);
  for (auto iv : sphere_box(q)) imm.box.push_back(iv);
  const double c = std::cos(theta), s = std::sin(theta);
  imm.map = [p, c, s](std::span<const Jet> u) {
    JetVector a = sphere_coords(u.subspan(0, p));
    JetVector b = sphere_coords(u.subspan(p));
    JetVector f;
    for (auto& x : a) f.push_back(c * x);
    for (auto& x : b) f.push_back(s * x);
    return f;
  };
  fam.text = [p, c, s](const Names& v) {
    Names a = sphere_coords_text(Names(v.begin(), v.begin() + p));
    Names b = sphere_coords_text(Names(v.begin() + p, v.end()));
    Names f;
    for (auto& x : a) f.push_back(num(c) + "*" + x);
    for (auto& x : b) f.push_back(num(s) + "*" + x);
    return f;
  };
  // principal curvatures in the sphere: -tan(theta) (mult p), cot(theta) (mult q), up to orientation
  return fam;
}

// Clifford-type torus whose radius angle varies with the first parameter:
// theta(a) = theta0 + eps*sin(a). Lies on S^3 but is not isoparametric.
inline Family make_perturbed_torus(double theta0 = M_PI / 4, double eps = 0.15) {
  Family fam;
  fam.tag = "perturbed-torus";
  fam.params = {{"theta", dsl::detail::number(theta0)}, {"eps", dsl::detail::number(eps)}};
  Immersion& imm = fam.imm;
  imm.name = "perturbed-torus";
  imm.dim_in = 2;
  imm.dim_out = 4;
  imm.spherical = true;
  imm.box = {{0.2, 2.8}, {0.2, 2.8}};
  imm.map = [theta0, eps](std::span<const Jet> u) {
    Jet th = theta0 + eps * sin(u[0]);
    Jet c = cos(th), s = sin(th);
    return JetVector{c * cos(u[0]), c * sin(u[0]), s * cos(u[1]), s * sin(u[1])};
  };
  fam.text = [theta0, eps](const Names& v) {
    const std::string th = par(num(theta0) + " + " + num(eps) + "*sin(" + v[0] + ")");
    return Names{"cos" + th + "*cos(" + v[0] + ")", "cos" + th + "*sin(" + v[0] + ")",
                 "sin" + th + "*cos(" + v[1] + ")", "sin" + th + "*sin(" + v[1] + ")"};
  };
  return fam;
}

// f(t, y, p) = (y, t u(p)) over a spherical base u in S^{k+1}.
inline Family make_cone(const Family& base, int n, Interval t_range = {0.5, 1.5}) {
  const int k = base.imm.dim_in;
  if (!base.imm.spherical) throw Error(ErrorCode::BadDimensions, "cone base must be spherical");
  if (n - k - 1 < 0) throw Error(ErrorCode::BadDimensions, "cone needs n - k - 1 >= 0");
  if (!(t_range.lo > 0.0 && t_range.hi > t_range.lo)) throw Error(ErrorCode::BadDimensions, "t range must lie in (0, inf)");
  const int ny = n - k - 1;
  Family fam;
  fam.tag = "cone";
  fam.params = base.params;
  fam.params["n"] = std::to_string(n);
  fam.params["k"] = std::to_string(k);
  fam.params["base"] = base.tag;
  Immersion& imm = fam.imm;
  imm.name = "cone(" + base.imm.name + ")";
  imm.dim_in = n;
  imm.dim_out = n + 1;
  imm.box.push_back(t_range);
  for (int i = 0; i < ny; ++i) imm.box.push_back({-1.0, 1.0});
  for (auto iv : base.imm.box) imm.box.push_back(iv);
  auto umap = base.imm.map;
  imm.map = [umap, ny](std::span<const Jet> x) {
    JetVector f(x.begin() + 1, x.begin() + 1 + ny);
    for (const Jet& c : umap(x.subspan(1 + ny))) f.push_back(x[0] * c);
    return f;
  };
  auto utext = base.text;
  fam.text = [utext, ny](const Names& v) {
    Names f(v.begin() + 1, v.begin() + 1 + ny);
    for (const auto& c : utext(Names(v.begin() + 1 + ny, v.end()))) f.push_back(v[0] + "*" + par(c));
    return f;
  };
  return fam;
}

// Cone over the minimal Clifford torus S^1 x S^1 in S^3.
inline Family make_clifford_cone(int n = 3) {
  Family fam = make_cone(make_clifford_torus(1, 1, M_PI / 4), n);
  fam.tag = "cone-clifford";
  const double r3 = 1.0 / std::sqrt(3.0);
  if (n == 3) {
    fam.expected_lambda = {-1.0, 0.0, 1.0};  // at t = 1
    fam.expected_cloud = {{1.0 / 6, -r3}, {-1.0 / 6, 0.0}, {1.0 / 6, r3}};
  }
  return fam;
}

// sigma(x) = (x_0..x_n)/(1 - x_{n+1}) applied to a spherical immersion.
inline Family make_stereographic_image(const Family& sph, double eps_pole = 1e-3) {
  if (!sph.imm.spherical) throw Error(ErrorCode::BadDimensions, "stereographic projection needs a spherical immersion");
  Family fam;
  fam.tag = "stereographic(" + sph.tag + ")";
  fam.params = sph.params;
  Immersion& imm = fam.imm;
  imm.name = "stereographic(" + sph.imm.name + ")";
  imm.dim_in = sph.imm.dim_in;
  imm.dim_out = sph.imm.dim_out - 1;
  imm.box = sph.imm.box;
  auto smap = sph.imm.map;
  imm.map = [smap, eps_pole](std::span<const Jet> u) {
    JetVector x = smap(u);
    Jet den = 1.0 - x.back();
    if (den.value() < eps_pole) throw Error(ErrorCode::PoleProximity, "point too close to the projection pole");
    Jet inv = inverse(den);
    JetVector f;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) f.push_back(x[i] * inv);
    return f;
  };
  auto stext = sph.text;
  fam.text = [stext](const Names& v) {
    Names x = stext(v);
    Names f;
    const std::string den = "(1 - " + par(x.back()) + ")";
    for (std::size_t i = 0; i + 1 < x.size(); ++i) f.push_back(par(x[i]) + "/" + den);
    return f;
  };
  // probe the patch so pole proximity is reported at construction
  const Grid g = Grid::make(imm, 5, 0.0);
  for (const auto& p : g.points) imm.eval_jet(p, 0);
  return fam;
}

inline Family make_stereographic_clifford(int p = 1, int q = 2, double theta = M_PI / 4) {
  Family fam = make_stereographic_image(make_clifford_torus(p, q, theta));
  fam.tag = "stereographic-clifford";
  return fam;
}

// x(u, v, w) = (u (1 + w)/w, v/w) on S^k x H^{n-k}, with
// (v, w) = (sinh(s) omega, cosh(s)) and omega in S^{n-k-1}.
inline Family make_cyclide(int k, int n) {
  if (k < 1 || k > n - 1) throw Error(ErrorCode::BadDimensions, "cyclide needs 1 <= k <= n-1");
  const int m = n - k - 1;  // angles of omega
  Family fam;
  fam.tag = "cyclide";
  fam.params = {{"k", std::to_string(k)}, {"n", std::to_string(n)}};
  Immersion& imm = fam.imm;
  imm.name = "cyclide";
  imm.dim_in = n;
  imm.dim_out = n + 1;
  imm.box = sphere_box(k);
  imm.box.push_back(m == 0 ? Interval{-2.0, 2.0} : Interval{0.3, 2.0});  // s, capped well below 3
  for (auto iv : (m > 0 ? sphere_box(m) : std::vector<Interval>{})) imm.box.push_back(iv);
  imm.map = [k, m](std::span<const Jet> x) {
    JetVector u = sphere_coords(x.subspan(0, k));
    const Jet& s = x[k];
    Jet w = cosh(s), sh = sinh(s);
    Jet iw = inverse(w);
    Jet scale = (1.0 + w) * iw;
    JetVector f;
    for (auto& c : u) f.push_back(c * scale);
    if (m == 0) {
      f.push_back(sh * iw);
    } else {
      for (auto& c : sphere_coords(x.subspan(k + 1))) f.push_back(sh * c * iw);
    }
    return f;
  };
  fam.text = [k, m](const Names& v) {
    Names u = sphere_coords_text(Names(v.begin(), v.begin() + k));
    const std::string s = v[k];
    const std::string w = "cosh(" + s + ")";
    Names f;
    for (auto& c : u) f.push_back(par(c) + "*(1 + " + w + ")/" + w);
    if (m == 0) {
      f.push_back("sinh(" + s + ")/" + w);
    } else {
      for (auto& c : sphere_coords_text(Names(v.begin() + k + 1, v.end())))
        f.push_back("sinh(" + s + ")*" + par(c) + "/" + w);
    }
    return f;
  };
  return fam;
}

// x(u) = (phi, (1 - phi k_1) u_1, ..., (1 - phi k_s) u_s) with
// phi = sum k_i |u_i|^2 / (sum k_i^2 |u_i|^2 + 1). With a plus sign in the
// scale factors (scale_sign = +1) the Laguerre principal curvatures are not
// constant; that variant is kept as a negative control.
inline Family make_flat_laguerre(const std::vector<int>& m, const std::vector<double>& kappa, int scale_sign = -1) {
  if (m.empty() || m.size() != kappa.size()) throw Error(ErrorCode::BadDimensions, "need one kappa per block");
  for (int mi : m)
    if (mi < 1) throw Error(ErrorCode::BadDimensions, "block sizes must be positive");
  for (std::size_t i = 0; i < kappa.size(); ++i) {
    if (kappa[i] == 0.0) throw Error(ErrorCode::BadKappa, "kappa must be nonzero");
    for (std::size_t j = 0; j < i; ++j)
      if (kappa[i] == kappa[j]) throw Error(ErrorCode::BadKappa, "kappa values must be distinct");
  }
  const int n = std::accumulate(m.begin(), m.end(), 0);
  Family fam;
  fam.tag = "flat-laguerre";
  std::string ms, ks;
  for (std::size_t i = 0; i < m.size(); ++i) {
    ms += (i ? "," : "") + std::to_string(m[i]);
    ks += (i ? "," : "") + dsl::detail::number(kappa[i]);
  }
  fam.params = {{"m", ms}, {"kappa", ks}, {"n", std::to_string(n)}};
  Immersion& imm = fam.imm;
  imm.name = "flat-laguerre";
  imm.dim_in = n;
  imm.dim_out = n + 1;
  imm.box.assign(n, Interval{-0.3, 0.5});
  std::vector<double> kap_of;  // kappa per coordinate
  for (std::size_t i = 0; i < m.size(); ++i)
    for (int j = 0; j < m[i]; ++j) kap_of.push_back(kappa[i]);
  imm.map = [kap_of, n, scale_sign](std::span<const Jet> u) {
    Jet num = u[0] * u[0] * kap_of[0];
    Jet den = u[0] * u[0] * (kap_of[0] * kap_of[0]) + 1.0;
    for (int i = 1; i < n; ++i) {
      Jet sq = u[i] * u[i];
      num = num + kap_of[i] * sq;
      den = den + (kap_of[i] * kap_of[i]) * sq;
    }
    Jet phi = num / den;
    JetVector f{phi};
    for (int i = 0; i < n; ++i) f.push_back((1.0 + scale_sign * kap_of[i] * phi) * u[i]);
    return f;
  };
  fam.text = [kap_of, n, scale_sign](const Names& v) {
    std::string top, bot;
    for (int i = 0; i < n; ++i) {
      top += (i ? " + " : "") + num(kap_of[i]) + "*" + v[i] + "^2";
      bot += num(kap_of[i] * kap_of[i]) + "*" + v[i] + "^2 + ";
    }
    const std::string phi = "(" + top + ")/(" + bot + "1)";
    Names f{phi};
    for (int i = 0; i < n; ++i) f.push_back(std::string(scale_sign < 0 ? "(1 - " : "(1 + ") + num(kap_of[i]) + "*" + phi + ")*" + v[i]);
    return f;
  };
  return fam;
}

// Ellipsoid with the given semi-axes (n+1 of them) in R^{n+1}.
inline Family make_ellipsoid(const std::vector<double>& axes) {
  if (axes.size() < 3) throw Error(ErrorCode::BadDimensions, "need at least 3 semi-axes");
  for (double a : axes)
    if (!(a > 0)) throw Error(ErrorCode::BadDimensions, "semi-axes must be positive");
  const int n = static_cast<int>(axes.size()) - 1;
  Family fam;
  fam.tag = "ellipsoid";
  std::string as;
  for (std::size_t i = 0; i < axes.size(); ++i) as += (i ? "," : "") + dsl::detail::number(axes[i]);
  fam.params = {{"axes", as}};
  Immersion& imm = fam.imm;
  imm.name = "ellipsoid";
  imm.dim_in = n;
  imm.dim_out = n + 1;
  imm.box = sphere_box(n);
  imm.map = [axes](std::span<const Jet> u) {
    JetVector x = sphere_coords(u);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = axes[i] * x[i];
    return x;
  };
  fam.text = [axes](const Names& v) {
    Names x = sphere_coords_text(v);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = num(axes[i]) + "*" + x[i];
    return x;
  };
  return fam;
}

inline Family make_sphere(int n = 2) {
  Family fam = make_ellipsoid(std::vector<double>(n + 1, 1.0));
  fam.tag = "sphere";
  return fam;
}

// Round cylinder S^1 x R^{n-1}; one principal curvature vanishes.
inline Family make_cylinder(int n = 2) {
  if (n < 2) throw Error(ErrorCode::BadDimensions, "cylinder needs n >= 2");
  Family fam;
  fam.tag = "cylinder";
  fam.params = {{"n", std::to_string(n)}};
  Immersion& imm = fam.imm;
  imm.name = "cylinder";
  imm.dim_in = n;
  imm.dim_out = n + 1;
  imm.box.push_back({0.2, 2.8});
  for (int i = 1; i < n; ++i) imm.box.push_back({-1.0, 1.0});
  imm.map = [n](std::span<const Jet> u) {
    JetVector f{cos(u[0]), sin(u[0])};
    for (int i = 1; i < n; ++i) f.push_back(u[i]);
    return f;
  };
  fam.text = [n](const Names& v) {
    Names f{"cos(" + v[0] + ")", "sin(" + v[0] + ")"};
    for (int i = 1; i < n; ++i) f.push_back(v[i]);
    return f;
  };
  return fam;
}

// Family from expression-language source.
inline Family from_dsl(const std::string& source, const std::string& tag = "dsl") {
  Family fam;
  fam.tag = tag;
  dsl::ImmersionSpec spec = dsl::parse(source);
  fam.imm = spec.to_immersion(tag);
  fam.text = [spec](const Names& v) {
    (void)v;
    Names f;
    for (const auto& c : spec.components) f.push_back(dsl::to_string(*c));
    return f;
  };
  return fam;
}

}  // namespace dupinlab::families
