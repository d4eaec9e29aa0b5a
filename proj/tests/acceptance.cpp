// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dupinlab/dupinlab.hpp"
#include "oracles.hpp"

using namespace dupinlab;
namespace fm = dupinlab::families;
namespace cl = dupinlab::classify;

namespace {

const double kS3 = std::sqrt(3.0);

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

const fm::Family& cone() {
  static const fm::Family f = fm::make_clifford_cone(3);
  return f;
}

const std::vector<MoebiusData>& cone_data() {
  static const std::vector<MoebiusData> d = moebius_on_grid(cone().imm, Grid::make(cone().imm, 4));
  return d;
}

double sum(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

void criterion1(Outcome& o) {
  const auto rep = integrability_report(cone_data(), 1e-6);
  double worst = 0, max_sum = 0, max_sq = 0, max_tr = 0;
  for (double r : rep.residual) worst = std::max(worst, r);
  for (const auto& d : cone_data()) {
    double sq = 0;
    for (double b : d.b) sq += b * b;
    max_sum = std::max(max_sum, std::abs(sum(d.b)));
    max_sq = std::max(max_sq, std::abs(sq - 2.0 / 3));
    max_tr = std::max(max_tr, std::abs(d.A.trace() - 1.0 / 6));
  }
  o.detail << "points=" << rep.grid_points << " max_residual=" << worst << " |sum b|=" << max_sum
           << " |sum b^2-2/3|=" << max_sq << " |trA-1/6|=" << max_tr;
  o.require(rep.grid_points == 64, "4^3 grid");
  o.require(rep.all_pass() && worst < 1e-6, "identity residuals");
  o.require(max_sum < 1e-8, "sum b");
  o.require(max_sq < 1e-8, "sum b^2");
  o.require(max_tr < 1e-7, "trace A");
}

void criterion2(Outcome& o) {
  const std::vector<std::pair<double, double>> golden{{1.0 / 6, -1 / kS3}, {-1.0 / 6, 0.0}, {1.0 / 6, 1 / kS3}};
  double cloud_err = 0;
  for (const auto& d : cone_data())
    for (int i = 0; i < 3; ++i)
      cloud_err = std::max({cloud_err, std::abs(d.a[i] - golden[i].first), std::abs(d.b[i] - golden[i].second)});
  const auto pts = Grid::make(cone().imm, 4).points;
  const auto cert = cone_split_certificate(cone().imm, {pts[0], pts[21], pts[42], pts[63]});
  o.detail << "cloud_err=" << cloud_err << " K=" << cert.K << " <P,P>-1=" << cert.max_PP << " <T,T>+1=" << cert.max_TT;
  o.require(cloud_err < 1e-7, "cloud");
  o.require(std::abs(cert.K + 1.0 / 3) < 1e-7, "K = -1/3");
  o.require(cert.max_PP < 1e-8 && cert.max_TT < 1e-8, "frame norms");
  o.require(cert.valid(), "certificate");
}

void criterion3(Outcome& o) {
  const Grid grid = Grid::make(cone().imm, 3);
  double g = 0, b = 0, m = 0, lam = 1e300;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = apply_moebius(cone().imm, random_orthochronous(seed, 6), grid).report;
    g = std::max(g, r.g_drift);
    b = std::max(b, r.b_drift);
    m = std::max(m, r.mijs_drift);
    lam = std::min(lam, r.lambda_drift);
  }
  o.detail << "seeds=5 g_drift=" << g << " b_drift=" << b << " mijs_drift=" << m << " min_lambda_drift=" << lam;
  o.require(g < 1e-6 && b < 1e-6 && m < 1e-6, "invariant drift");
  o.require(lam > 1e-2, "negative control");
}

void criterion4(Outcome& o) {
  const auto c1 = cl::classify(cl::cloud_from_moebius(cone_data().front()));
  const auto* red = std::get_if<cl::Reducible>(&c1);
  o.detail << "cone=" << cl::outcome_name(c1);
  o.require(red && red->b_split * red->b_split + 2 * red->a_split < 0, "cone Reducible with negative gate");
  if (red) o.detail << "(b^2+2a=" << red->b_split * red->b_split + 2 * red->a_split << ")";

  const auto st = fm::make_stereographic_clifford(1, 2, M_PI / 4);
  const auto c2 = cl::classify(cl::cloud_from_moebius(moebius_invariants(st.imm, st.imm.base_point())));
  const auto* ld = std::get_if<cl::LinearlyDependent>(&c2);
  o.detail << " stereographic=" << cl::outcome_name(c2);
  if (ld) o.detail << "(eps^2-2d=" << ld->lambda * ld->lambda - 2 * ld->mu << ")";
  o.require(ld && ld->lambda * ld->lambda - 2 * ld->mu < 0, "stereographic LinearlyDependent with negative gate");

  cl::PairCloud bad;
  bad.pairs = {{-0.4, -0.8, 1}, {-0.25, -0.5, 1}, {0.1, 0.2, 1}};
  const auto c3 = cl::classify(bad);
  const auto* inc = std::get_if<cl::Inconsistent>(&c3);
  o.detail << " gate_cloud=" << cl::outcome_name(c3);
  o.require(inc && inc->witness == "le4" && inc->value > 0, "gate rejects");
}

void criterion5(Outcome& o) {
  const auto flat = fm::make_flat_laguerre({1, 1, 1}, {1, 2, 3});
  const auto data = laguerre_on_grid(flat.imm, Grid::make(flat.imm, 4));
  const auto rep = laguerre_report(data, 1e-6);
  double worst = 0, norm = 0;
  for (double r : rep.residual) worst = std::max(worst, r);
  for (const auto& d : data) {
    double sq = 0;
    for (double b : d.b) sq += b * b;
    norm = std::max(norm, std::abs(sq - 1));
  }
  o.detail << "flat: max_residual=" << worst << " |sum B^2-1|=" << norm << " max|R|=" << rep.max_R
           << " max|grad B|=" << rep.max_dB;
  o.require(rep.all_pass() && worst < 1e-6, "identity residuals");
  o.require(norm < 1e-8, "normalization");
  o.require(rep.max_R < 1e-6, "flatness");
  o.require(rep.max_dB < 1e-6, "parallel B");

  const auto cyc = fm::make_cyclide(1, 3);
  const auto crep = laguerre_report(laguerre_on_grid(cyc.imm, Grid::make(cyc.imm, 4)), 1e-6);
  o.detail << " cyclide: distinct=" << crep.distinct_b << " max|C|=" << crep.max_C << " drift=" << crep.b_drift;
  o.require(crep.distinct_b == 2, "two Laguerre principal curvatures");
  o.require(crep.b_drift < 1e-6, "constant");
  o.require(crep.max_C < 1e-7, "Laguerre form");
}

void criterion6(Outcome& o) {
  double recon = 0, cartan = 0, sign_adj = 1e300, sign_ext = -1e300, ble = 0;
  auto cartan_of = [&](const iso::TensorFieldSample& f) {
    if (f.groups.size() > 1) cartan = std::max(cartan, testsupport::max_abs(iso::cartan_residual(f)));
    const auto s = iso::tensor3_check(f);
    if (f.groups.size() > 1) {
      sign_adj = std::min(sign_adj, s.min_adjacent);
      sign_ext = std::max(sign_ext, s.max_extreme);
    }
  };
  for (const auto& d : cone_data()) {
    const auto f = iso::field_moebius_B(d);
    for (const auto& s : iso::sectional_from_gradients(f))
      recon = std::max(recon, std::abs(s.value - f.sectional(s.i, s.j)));
    cartan_of(f);
    cartan_of(iso::field_moebius_A(d));
    const auto b2 = iso::ble2_check(iso::paired_moebius(d));
    ble = std::max(ble, b2.residual);
  }
  const auto flat = fm::make_flat_laguerre({1, 1, 1}, {1, 2, 3});
  for (const auto& d : laguerre_on_grid(flat.imm, Grid::make(flat.imm, 3))) cartan_of(iso::field_laguerre_B(d));
  const auto cyc = fm::make_cyclide(1, 3);
  for (const auto& d : laguerre_on_grid(cyc.imm, Grid::make(cyc.imm, 3))) {
    cartan_of(iso::field_laguerre_B(d));
    cartan_of(iso::field_laguerre_L(d));
  }
  o.detail << "reconstruction=" << recon << " cartan=" << cartan << " min_adjacent=" << sign_adj
           << " max_extreme=" << sign_ext << " ble2=" << ble;
  o.require(recon < 1e-5, "curvature reconstruction");
  o.require(cartan < 1e-5, "Cartan sums");
  o.require(sign_adj >= -1e-8 && sign_ext <= 1e-8, "sign pattern");
  o.require(ble < 1e-6, "eigenspace split");
}

void criterion7(Outcome& o) {
  const auto a = iso::schouten_spectrum_classify({0.4, 0.4, 0.4, 0.4});
  const auto b = iso::schouten_spectrum_classify({0.3, 0.3, -0.3, -0.3, -0.3});
  const auto c = iso::schouten_spectrum_classify({1, 2, 3});
  o.detail << "{c,c,c,c}=" << iso::to_string(a.kind) << " {b,b,-b,-b,-b}=" << iso::to_string(b.kind)
           << " {1,2,3}=" << iso::to_string(c.kind);
  o.require(a.kind == iso::SpectrumKind::ConstantCurvature, "constant");
  o.require(b.kind == iso::SpectrumKind::TwoBlock && std::abs(b.b - 0.3) < 1e-15, "two block");
  o.require(c.kind == iso::SpectrumKind::Infeasible && c.sums.back() < 0, "infeasible");
}

void criterion8(Outcome& o) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> coord(-0.8, 0.8);
  std::vector<std::vector<int>> dirs;
  for (int i = 0; i < 3; ++i) {
    dirs.push_back({i});
    for (int j = i; j < 3; ++j) {
      dirs.push_back({i, j});
      for (int k = j; k < 3; ++k) dirs.push_back({i, j, k});
    }
  }
  double worst_jet = 0;
  int jet_checks = 0;
  for (int e = 0; e < 12; ++e) {
    const auto ex = testsupport::random_expr(rng, 3);
    const std::vector<double> p{coord(rng), coord(rng), coord(rng)};
    const auto u = lift(p, 3);
    const Jet j = dsl::evaluate<Jet>(*ex, std::span<const Jet>(u));
    testsupport::ScalarFn g = [&](std::span<const double> x) { return dsl::evaluate<double>(*ex, x); };
    for (const auto& d : dirs) {
      int counts[3] = {0, 0, 0};
      for (int i : d) ++counts[i];
      const double fd = testsupport::richardson(g, p, d);
      worst_jet = std::max(worst_jet, std::abs(j.derivative(counts) - fd) / std::max(1.0, std::abs(fd)));
      ++jet_checks;
    }
  }
  const std::vector<fm::Family> fams{fm::make_clifford_cone(3),
                                     fm::make_stereographic_clifford(1, 2, M_PI / 4),
                                     fm::make_cyclide(1, 3),
                                     fm::make_flat_laguerre({1, 1, 1}, {1, 2, 3}),
                                     fm::make_ellipsoid({1, 1.3, 1.7, 2.1}),
                                     fm::make_cone(fm::make_perturbed_torus(), 3),
                                     fm::make_cylinder(2)};
  double worst_dsl = 0;
  int dsl_checks = 0;
  for (const auto& fam : fams) {
    const auto text = fm::from_dsl(fam.dsl(), fam.tag);
    const auto pts = Grid::make(fam.imm, 3).points;
    for (std::size_t k = 0; k < 5; ++k) {
      const auto& p = pts[(k * 7) % pts.size()];
      const auto a = fam.imm.eval_jet(p, 3), b = text.imm.eval_jet(p, 3);
      for (std::size_t c = 0; c < a.size(); ++c) {
        const auto ca = a[c].coefficients(), cb = b[c].coefficients();
        for (std::size_t i = 0; i < ca.size(); ++i)
          worst_dsl = std::max(worst_dsl, std::abs(ca[i] - cb[i]) / std::max(1.0, std::abs(ca[i])));
      }
      ++dsl_checks;
    }
  }
  o.detail << "jet_checks=" << jet_checks << " max_rel=" << worst_jet << " dsl_points=" << dsl_checks
           << " max_rel=" << worst_dsl;
  o.require(worst_jet < 1e-6, "jets vs finite differences");
  o.require(worst_dsl < 1e-12, "expression source vs native");
}

void criterion9(Outcome& o) {
  const auto e = fm::make_ellipsoid({1, 1.3, 1.7, 2.1});
  const Grid grid = Grid::make(e.imm, 3);
  const bool mo = is_moebius_isoparametric(e.imm, grid).verdict;
  const bool la = is_laguerre_isoparametric(e.imm, grid).verdict;
  o.detail << "ellipsoid moebius_iso=" << mo << " laguerre_iso=" << la;
  o.require(!mo && !la, "ellipsoid rejected");

  auto d = moebius_invariants(cone().imm, std::vector<double>{1.0, 0.3, 1.9});
  d.B(0, 1) += 0.01;
  d.B(1, 0) += 0.01;
  const double r4 = integrability_residuals(d)[3];
  const auto flat = fm::make_flat_laguerre({1, 1, 1}, {1, 2, 3});
  auto l = laguerre_invariants(flat.imm, flat.imm.base_point());
  int k = 0;
  for (int i = 1; i < l.n; ++i)
    if (std::abs(l.b[i]) > std::abs(l.b[k])) k = i;
  l.B(k, k) += 0.01;
  const double r9 = laguerre_residuals(l)[4];
  o.detail << " perturbed: equa4=" << r4 << " 2.9=" << r9;
  o.require(r4 > 1e-3 && r9 > 1e-3, "perturbations detected");

  const auto pc = fm::make_cone(fm::make_perturbed_torus(), 3);
  const bool pci = is_moebius_isoparametric(pc.imm, Grid::make(pc.imm, 4)).verdict;
  o.detail << " perturbed_cone_iso=" << pci;
  o.require(!pci, "perturbed cone rejected");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"Moebius identity suite", criterion1}, {"cone golden values", criterion2},
      {"Moebius invariance", criterion3},     {"dichotomy round trip", criterion4},
      {"Laguerre identity suite", criterion5}, {"tensor identities", criterion6},
      {"Schouten spectra", criterion7},       {"derivative oracle", criterion8},
      {"negative controls", criterion9}};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    std::printf("criterion %zu: %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.str().c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
