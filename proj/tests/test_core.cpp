// Minkowski algebra, jets, the expression language and point geometry.

#include <gtest/gtest.h>

#include <random>

#include "dupinlab/exprdsl.hpp"
#include "dupinlab/families.hpp"
#include "dupinlab/minkowski.hpp"
#include "dupinlab/moebius.hpp"
#include "dupinlab/surface.hpp"
#include "support.hpp"

using namespace dupinlab;

// ---------------------------------------------------------------------------
// minkowski

TEST(Minkowski, InnerProductSigns) {
  const Signature s = Signature::one_minus(6);
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(6);
  e0[0] = 1;
  EXPECT_EQ(inner(SignedVector{e0, s}, SignedVector{e0, s}), -1.0);
  Eigen::VectorXd l = Eigen::VectorXd::Zero(6);
  l[0] = l[1] = 1;
  EXPECT_EQ(norm2(SignedVector{l, s}), 0.0);
  EXPECT_TRUE(is_null(SignedVector{l, s}));
  const Signature t = Signature::two_minus(6);
  EXPECT_EQ(inner(SignedVector{e0, t}, SignedVector{e0, t}), -1.0);
  Eigen::VectorXd e5 = Eigen::VectorXd::Zero(6);
  e5[5] = 1;
  EXPECT_EQ(inner(SignedVector{e5, t}, SignedVector{e5, t}), -1.0);
  EXPECT_EQ(inner(SignedVector{e5, s}, SignedVector{e5, s}), 1.0);
}

TEST(Minkowski, SignatureMismatch) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(6);
  EXPECT_DUPIN_ERROR(inner(SignedVector{v, Signature::one_minus(6)}, SignedVector{v, Signature::two_minus(6)}),
                     ErrorCode::SignatureMismatch);
  EXPECT_DUPIN_ERROR(inner(v, Eigen::VectorXd::Ones(5), Signature::one_minus(6)), ErrorCode::SignatureMismatch);
  const auto M = random_orthochronous(1, 6);
  EXPECT_DUPIN_ERROR(M.apply(SignedVector{v, Signature::two_minus(6)}), ErrorCode::SignatureMismatch);
}

TEST(Minkowski, RandomTransformIsOrthochronousIsometry) {
  const auto M = random_orthochronous(0, 6);
  EXPECT_LT(M.defect(), 1e-12);
  EXPECT_GT(M.M(0, 0), 0.0);
  EXPECT_EQ(random_orthochronous(0, 6).M, M.M);
  EXPECT_NE(random_orthochronous(1, 6).M, M.M);
}

TEST(Minkowski, ZeroParametersGiveIdentity) {
  EXPECT_EQ(boost01(6, 0.0), Eigen::MatrixXd::Identity(6, 6));
  EXPECT_EQ(givens(6, 2, 4, 0.0), Eigen::MatrixXd::Identity(6, 6));
  const auto I = LorentzTransform::identity(Signature::one_minus(6));
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(6, -1, 2);
  EXPECT_EQ(I.apply(x), x);
}

TEST(Minkowski, NullVectorStaysNullUnderRepeatedAction) {
  const auto M = random_orthochronous(7, 6);
  const Signature s = Signature::one_minus(6);
  Eigen::VectorXd x(6);
  x << std::sqrt(0.5 * 0.5 + 0.3 * 0.3 + 0.2 * 0.2 + 0.1 * 0.1 + 0.7 * 0.7), 0.5, 0.3, 0.2, 0.1, 0.7;
  SignedVector v{x, s};
  ASSERT_LT(std::abs(norm2(v)), 1e-14);
  v = M.apply(v);
  EXPECT_LT(std::abs(norm2(v)), 1e-10);
  v = M.apply(v);
  EXPECT_LT(std::abs(norm2(v)), 1e-10);
}

TEST(Minkowski, TimelikeUnitStaysUnit) {
  const auto M = random_orthochronous(11, 6);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(6);
  x[0] = 1;
  SignedVector v{x, Signature::one_minus(6)};
  EXPECT_NEAR(norm2(M.apply(v)), -1.0, 1e-10);
}

TEST(MinkowskiProperty, InnerProductPreserved) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd(0, 1);
  for (int seed = 0; seed < 25; ++seed) {
    for (int dim : {4, 5, 6, 7}) {
      const auto M = random_orthochronous(seed, dim);
      ASSERT_LT(M.defect(), 1e-12);
      ASSERT_GT(M.M(0, 0), 0.0);
      const Signature s = Signature::one_minus(dim);
      Eigen::VectorXd x(dim), y(dim);
      for (int i = 0; i < dim; ++i) {
        x[i] = nd(rng);
        y[i] = nd(rng);
      }
      const double before = inner(x, y, s);
      const double after = inner(M.apply(x), M.apply(y), s);
      EXPECT_LT(std::abs(after - before), 1e-10 * (1 + std::abs(before)));
      Eigen::VectorXd z = x;
      z[0] = x.tail(dim - 1).norm();
      EXPECT_LT(std::abs(inner(M.apply(z), M.apply(z), s)), 1e-10 * (1 + z.squaredNorm()));
    }
  }
}

TEST(Minkowski, ComposeMatchesProduct) {
  const auto A = random_orthochronous(3, 5), B = random_orthochronous(4, 5);
  EXPECT_LT((A.compose(B).M - A.M * B.M).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT(A.compose(B).defect(), 1e-12);
}

// ---------------------------------------------------------------------------
// jets

TEST(Jets, LiftGivesCoordinateJets) {
  const std::vector<double> p{2, 3};
  const auto u = lift(p, 2);
  ASSERT_EQ(u.size(), 2u);
  EXPECT_EQ(u[0].value(), 2.0);
  EXPECT_EQ(u[0].d(0), 1.0);
  EXPECT_EQ(u[0].d(1), 0.0);
  EXPECT_EQ(u[0].d(0, 0), 0.0);
  EXPECT_EQ(u[0].d(0, 1), 0.0);
  EXPECT_EQ(u[1].d(1), 1.0);
  const auto v = lift(p, 0);
  EXPECT_EQ(v[1].value(), 3.0);
  EXPECT_EQ(v[1].order(), 0);
  EXPECT_DUPIN_ERROR(lift(p, kMaxJetOrder + 1), ErrorCode::OrderOutOfRange);
}

TEST(Jets, ProductRule) {
  const std::vector<double> p{2, 3};
  const auto u = lift(p, 2);
  const Jet m = u[0] * u[1];
  EXPECT_EQ(m.value(), 6.0);
  EXPECT_EQ(m.d(0), 3.0);
  EXPECT_EQ(m.d(1), 2.0);
  EXPECT_EQ(m.d(0, 1), 1.0);
  EXPECT_EQ(m.d(0, 0), 0.0);
  EXPECT_EQ(m.d(1, 1), 0.0);
}

TEST(Jets, ElementaryIdentities) {
  const Jet four = Jet::constant(4.0, 2, 3);
  const Jet r = sqrt(four);
  EXPECT_EQ(r.value(), 2.0);
  for (std::size_t k = 1; k < r.coefficients().size(); ++k) EXPECT_EQ(r.coefficients()[k], 0.0);
  const std::vector<double> zero{0.0};
  const Jet e = exp(lift(zero, 4)[0]);
  const int c4[] = {4};
  EXPECT_EQ(e.derivative(c4), 1.0);
}

TEST(Jets, DomainAndDivisionErrors) {
  const std::vector<double> p{0.0, 1.0};
  const auto u = lift(p, 2);
  EXPECT_DUPIN_ERROR(log(u[0]), ErrorCode::DomainError);
  EXPECT_DUPIN_ERROR(sqrt(u[0] - 1.0), ErrorCode::DomainError);
  EXPECT_DUPIN_ERROR(u[1] / u[0], ErrorCode::DivisionNearZero);
  EXPECT_DUPIN_ERROR(u[1].d(0, 0) + u[1].truncate(1).d(0, 0), ErrorCode::OrderUnavailable);
}

TEST(Jets, MixedOrderTruncatesToLowerOrder) {
  const std::vector<double> p{0.5, 0.25};
  const auto u = lift(p, 3);
  const Jet low = u[0].truncate(1);
  const Jet s = low * u[1] + u[0];
  EXPECT_EQ(s.order(), 1);
  EXPECT_DOUBLE_EQ(s.d(0), 1.25);
}

TEST(Jets, SinOfProductMatchesRichardsonOracle) {
  const std::vector<double> p{0.3, 0.7};
  const auto u = lift(p, 4);
  const Jet f = sin(u[0] * u[1]);
  testsupport::ScalarFn g = [](std::span<const double> x) { return std::sin(x[0] * x[1]); };
  const std::vector<std::vector<int>> dirs{{0}, {1}, {0, 0}, {0, 1}, {1, 1}, {0, 0, 1}, {0, 1, 1}, {1, 1, 1}};
  for (const auto& d : dirs) {
    int counts[2] = {0, 0};
    for (int i : d) ++counts[i];
    const double fd = testsupport::richardson(g, p, d);
    EXPECT_NEAR(f.derivative(counts), fd, 1e-6 * std::max(1.0, std::abs(fd)));
  }
}


TEST(JetsProperty, RandomCorpusMatchesRichardsonToThirdOrder) {
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
  int checked = 0;
  for (int e = 0; e < 12; ++e) {
    const auto ex = testsupport::random_expr(rng, 3);
    const std::vector<double> p{coord(rng), coord(rng), coord(rng)};
    const auto u = lift(p, 3);
    const Jet j = dsl::evaluate<Jet>(*ex, std::span<const Jet>(u));
    testsupport::ScalarFn g = [&](std::span<const double> x) { return dsl::evaluate<double>(*ex, x); };
    EXPECT_NEAR(j.value(), g(p), 1e-14 * std::max(1.0, std::abs(g(p))));
    for (const auto& d : dirs) {
      int counts[3] = {0, 0, 0};
      for (int i : d) ++counts[i];
      const double fd = testsupport::richardson(g, p, d);
      EXPECT_NEAR(j.derivative(counts), fd, 1e-6 * std::max(1.0, std::abs(fd)))
          << dsl::to_string(*ex) << " at order " << d.size();
      ++checked;
    }
  }
  EXPECT_EQ(checked, 12 * 19);
}

TEST(JetsProperty, AddAndMulAreCommutativeAndAssociative) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coord(-1, 1);
  for (int t = 0; t < 10; ++t) {
    const std::vector<double> p{coord(rng), coord(rng)};
    const auto u = lift(p, 4);
    const Jet a = sin(u[0]) + u[1], b = exp(u[0] * u[1]), c = cos(u[1]) * 2.0 - u[0];
    auto diff = [](const Jet& x, const Jet& y) {
      double m = 0;
      for (std::size_t k = 0; k < x.coefficients().size(); ++k)
        m = std::max(m, std::abs(x.coefficients()[k] - y.coefficients()[k]));
      return m;
    };
    EXPECT_LT(diff(a + b, b + a), 1e-15);
    EXPECT_LT(diff(a * b, b * a), 1e-14);
    EXPECT_LT(diff((a + b) + c, a + (b + c)), 1e-14);
    EXPECT_LT(diff((a * b) * c, a * (b * c)), 1e-13);
  }
}

// ---------------------------------------------------------------------------
// exprdsl

TEST(ExprDsl, CircleSpec) {
  const auto spec = dsl::parse("n=1 on [0,6.28]; cos(u1); sin(u1)");
  EXPECT_EQ(spec.n, 1);
  EXPECT_EQ(spec.components.size(), 2u);
  const std::vector<double> p{0.0};
  const auto j = dsl::eval_jet(spec, p, 1);
  EXPECT_DOUBLE_EQ(j[0].value(), 1.0);
  EXPECT_DOUBLE_EQ(j[1].value(), 0.0);
  EXPECT_DOUBLE_EQ(j[0].d(0), 0.0);
  EXPECT_DOUBLE_EQ(j[1].d(0), 1.0);
  const auto v = dsl::eval_jet(spec, p, 0);
  EXPECT_EQ(v[0].order(), 0);
}

TEST(ExprDsl, MalformedHeaderReportsPosition) {
  try {
    dsl::parse("n=2 [0,1]x[0,1]; cos(u1)*cos(u2); sin(u1); u2");
    FAIL() << "expected SyntaxError";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line, 1);
    EXPECT_EQ(e.column, 5);
  }
  try {
    dsl::parse("n=1 on [0,1];\n cos(u1) + ;\n sin(u1)");
    FAIL() << "expected SyntaxError";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line, 2);
  }
}

TEST(ExprDsl, IdentifierAndArityErrors) {
  EXPECT_DUPIN_ERROR(dsl::parse("n=1 on [0,1]; cos(u2); sin(u1)"), ErrorCode::UnknownIdentifier);
  EXPECT_DUPIN_ERROR(dsl::parse("n=1 on [0,1]; tan(u1); sin(u1)"), ErrorCode::UnknownIdentifier);
  EXPECT_DUPIN_ERROR(dsl::parse("n=2 on [0,1]x[0,1]; u1; u2"), ErrorCode::ArityError);
  EXPECT_DUPIN_ERROR(dsl::parse("n=2 on [0,1]x[0,1]x[0,1]; u1; u2; u1"), ErrorCode::ArityError);
  EXPECT_DUPIN_ERROR(dsl::parse("n=1 on [0,1]; sin(u1, u1); u1"), ErrorCode::ArityError);
  EXPECT_DUPIN_ERROR(dsl::parse("n=1 on [0,1]; u1^0.5; u1"), ErrorCode::SyntaxError);
}

TEST(ExprDsl, PrecedenceAndAssociativity) {
  const std::vector<double> u{3.0, 2.0, 4.0};
  auto val = [&](const std::string& s) { return dsl::evaluate<double>(*dsl::parse_expression(s, 3), u); };
  EXPECT_DOUBLE_EQ(val("-u1^2"), -9.0);
  EXPECT_DOUBLE_EQ(val("u1-u2-u3"), -3.0);
  EXPECT_DOUBLE_EQ(val("u3/u2/u2"), 1.0);
  EXPECT_DOUBLE_EQ(val("u1+u2*u3"), 11.0);
  EXPECT_DOUBLE_EQ(val("(u1+u2)*u3"), 20.0);
  EXPECT_DOUBLE_EQ(val("2*-u2^3"), -16.0);
  EXPECT_DOUBLE_EQ(val("u2^-1"), 0.5);
}

TEST(ExprDsl, CommentsAndExclusions) {
  const auto spec = dsl::parse(
      "# annulus chart\n"
      "n=2 on [-1,1]x[-1,1] exclude u1^2+u2^2 < 0.01  # keep away from the origin\n"
      "; u1; u2; u1^2 - u2^2\n");
  EXPECT_EQ(spec.exclusions.size(), 1u);
  const auto imm = spec.to_immersion();
  const std::vector<double> origin{0.0, 0.0}, off{0.5, 0.5};
  EXPECT_FALSE(imm.contains(origin));
  EXPECT_TRUE(imm.contains(off));
  EXPECT_DUPIN_ERROR(dsl::eval_jet(spec, origin, 1), ErrorCode::PointOutsideDomain);
  const std::vector<double> outside{2.0, 0.0};
  EXPECT_DUPIN_ERROR(dsl::eval_jet(spec, outside, 1), ErrorCode::PointOutsideDomain);
}

TEST(ExprDsl, JetDomainErrorsPropagate) {
  const auto spec = dsl::parse("n=1 on [-1,1]; log(u1); u1");
  const std::vector<double> p{-0.5};
  EXPECT_DUPIN_ERROR(dsl::eval_jet(spec, p, 1), ErrorCode::DomainError);
}

TEST(ExprDslProperty, PrettyPrintRoundTrip) {
  std::vector<std::string> corpus{
      "n=1 on [0,6.28]; cos(u1); sin(u1)",
      "n=2 on [0.1,3]x[0,6]; sin(u1)*cos(u2); sin(u1)*sin(u2); cos(u1)",
      "n=2 on [-1,1] exclude u1^2+u2^2 < 0.01; u1/(1+u2^2); -u2; sqrt(1+u1^2)*exp(-u2)",
      "n=3 on [0.5,1.5]x[0,6.28]x[0,6.28]; (u1/1.4142135623730951)*cos(u2); (u1/1.4142135623730951)*sin(u2);"
      " (u1/1.4142135623730951)*cos(u3); (u1/1.4142135623730951)*sin(u3)",
      "n=1 on [0,1]; -(-u1)^3 - u1^-2; cosh(sinh(u1))/log(2+u1)",
      "n=1 on [0,1]; u1-(u1-u1); (u1/u1)/u1",
  };
  std::mt19937_64 rng(99);
  for (int i = 0; i < 20; ++i) {
    corpus.push_back("n=3 on [-1,1]; " + dsl::to_string(*testsupport::random_expr(rng, 3)) + "; " +
                     dsl::to_string(*testsupport::random_expr(rng, 2)) + "; u1; " + dsl::to_string(*testsupport::random_expr(rng, 3)));
  }
  for (const auto& s : corpus) {
    const auto a = dsl::parse(s);
    const auto text = dsl::to_string(a);
    const auto b = dsl::parse(text);
    EXPECT_TRUE(dsl::equal(a, b)) << s << "\n  printed: " << text;
    EXPECT_EQ(dsl::to_string(b), text);
  }
}

// ---------------------------------------------------------------------------
// surface

TEST(Surface, SphereIsUmbilic) {
  const auto imm = dsl::parse("n=2 on [0.1,3]x[0,6]; sin(u1)*cos(u2); sin(u1)*sin(u2); cos(u1)").to_immersion();
  const std::vector<double> p{1.0, 0.5};
  const auto pf = fundamental_forms(imm, p, 1);
  const auto pg = fundamental_forms(imm, p, -1);
  const double s = pf.II(0, 0);
  EXPECT_NEAR(std::abs(s), 1.0, 1e-12);
  EXPECT_LT((pf.II - s * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(pf.H, s, 1e-12);
  EXPECT_LT((pf.II + pg.II).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(pf.orientation, 1);
  EXPECT_EQ(pg.orientation, -1);
  EXPECT_LT((pf.frame.transpose() * pf.frame - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-10);
  const auto pd = principal_decomposition(pf);
  EXPECT_EQ(pd.r, 1);
  EXPECT_EQ(pd.groups[0].size(), 2u);
}

TEST(Surface, CylinderCurvatures) {
  const auto fam = families::make_cylinder(2);
  const auto p = fam.imm.base_point();
  const auto pf = fundamental_forms(fam.imm, p);
  const auto pd = principal_decomposition(pf);
  EXPECT_NEAR(std::abs(pf.H), 0.5, 1e-12);
  const double sgn = pf.H > 0 ? 1 : -1;
  EXPECT_NEAR(pd.lambdas[0], sgn > 0 ? 0.0 : -1.0, 1e-12);
  EXPECT_NEAR(pd.lambdas[1], sgn > 0 ? 1.0 : 0.0, 1e-12);
  EXPECT_LT(pd.residual, 1e-10);
}

TEST(Surface, CliffordConeAtUnitScale) {
  const auto fam = families::make_clifford_cone(3);
  const std::vector<double> p{1.0, 0.4, 2.0};
  const auto pf = fundamental_forms(fam.imm, p);
  const auto pd = principal_decomposition(pf, 1e-8);
  ASSERT_EQ(pd.lambdas.size(), 3u);
  EXPECT_NEAR(pd.lambdas[0], -1.0, 1e-12);
  EXPECT_NEAR(pd.lambdas[1], 0.0, 1e-12);
  EXPECT_NEAR(pd.lambdas[2], 1.0, 1e-12);
  EXPECT_NEAR(pf.H, 0.0, 1e-12);
  EXPECT_EQ(pd.r, 3);
  EXPECT_LT(pd.residual, 1e-10);
}

TEST(Surface, OrientationFlipNegatesCurvatures) {
  for (const auto& fam : {families::make_ellipsoid({1, 1.3, 1.7}), families::make_clifford_cone(3)}) {
    const auto p = fam.imm.base_point();
    const auto a = principal_decomposition(fundamental_forms(fam.imm, p, 1));
    const auto b = principal_decomposition(fundamental_forms(fam.imm, p, -1));
    const int n = static_cast<int>(a.lambdas.size());
    for (int i = 0; i < n; ++i) EXPECT_NEAR(a.lambdas[i], -b.lambdas[n - 1 - i], 1e-12);
    if (n >= 3) {
      const double ma = moebius_curvature(a.lambdas, 0, 1, 2);
      const double mb = moebius_curvature(b.lambdas, n - 1, n - 2, n - 3);
      EXPECT_NEAR(ma, mb, 1e-12);
    }
  }
}

TEST(Surface, GroupingToleranceSemantics) {
  const std::vector<double> v{0.0, 5e-9, 1.0};
  const auto g = group_sorted(v, 1e-8);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[0], (std::vector<int>{0, 1}));
  EXPECT_EQ(g[1], (std::vector<int>{2}));
  const std::vector<double> w{0.0, 5e-8, 1.0};
  EXPECT_DUPIN_ERROR(group_sorted(w, 1e-8), ErrorCode::GroupingAmbiguous);
}

TEST(Surface, CurvatureRatios) {
  const std::vector<double> radii{1, 2, 4};
  EXPECT_DOUBLE_EQ(laguerre_curvature(radii, 0, 1, 2), 1.0 / 3.0);
  EXPECT_EQ(moebius_curvature(radii, 1, 1, 2), 0.0);
  for (double t : {0.5, 1.0, 1.7}) {
    const std::vector<double> lam{1 / t, -1 / t, 0};
    EXPECT_NEAR(moebius_curvature(lam, 0, 1, 2), 2.0, 1e-14);
  }
  const std::vector<double> bad{1, 2, 1};
  EXPECT_DUPIN_ERROR(moebius_curvature(bad, 0, 1, 2), ErrorCode::DegenerateDenominator);
}

namespace {

Mat<Jet> zero_metric(std::span<const Jet> u, int n) {
  const Jet z = u[0] * 0.0;
  return Mat<Jet>(n, n, z);
}

}  // namespace

TEST(Surface, RiemannGoldenMetrics) {
  const std::vector<double> p{1.0, 0.5};
  MetricField flat = [](std::span<const Jet> u) {
    Mat<Jet> g = zero_metric(u, 2);
    g(0, 0) = g(0, 0) + 1.0;
    g(1, 1) = g(1, 1) + 1.0;
    return g;
  };
  const auto rf = riemann_of_metric(flat, p);
  EXPECT_LT(testsupport::max_abs(rf.R), 1e-10);

  MetricField round = [](std::span<const Jet> u) {
    Mat<Jet> g = zero_metric(u, 2);
    g(0, 0) = g(0, 0) + 1.0;
    const Jet s = sin(u[0]);
    g(1, 1) = s * s;
    return g;
  };
  const auto rs = riemann_of_metric(round, p);
  EXPECT_NEAR(rs(0, 1, 0, 1), 1.0, 1e-10);
  EXPECT_NEAR(rs.sectional(0, 1), 1.0, 1e-10);
  EXPECT_NEAR(rs.kappa, 1.0, 1e-10);

  MetricField half_plane = [](std::span<const Jet> u) {
    Mat<Jet> g = zero_metric(u, 2);
    const Jet t = pow(u[1], -2);
    g(0, 0) = t;
    g(1, 1) = t;
    return g;
  };
  const std::vector<double> q{0.3, 1.7};
  EXPECT_NEAR(riemann_of_metric(half_plane, q)(0, 1, 0, 1), -1.0, 1e-8);

  MetricField negative = [](std::span<const Jet> u) {
    Mat<Jet> g = zero_metric(u, 2);
    g(0, 0) = g(0, 0) - 1.0;
    g(1, 1) = g(1, 1) + 1.0;
    return g;
  };
  EXPECT_DUPIN_ERROR(riemann_of_metric(negative, p), ErrorCode::MetricNotPositive);
}

TEST(SurfaceProperty, RiemannSymmetriesOnFamilies) {
  // 3-dimensional metric with non-constant curvature
  MetricField warped = [](std::span<const Jet> u) {
    Mat<Jet> g = zero_metric(u, 3);
    g(0, 0) = exp(u[1]) + 1.0;
    g(1, 1) = 1.0 + u[0] * u[0] + 0.0 * u[0];
    g(2, 2) = cosh(u[0] * u[2]);
    g(0, 1) = 0.2 * sin(u[2]);
    g(1, 0) = g(0, 1);
    return g;
  };
  const std::vector<double> p{0.3, -0.2, 0.7};
  const auto rd = riemann_of_metric(warped, p);
  const int n = 3;
  double sym = 0, bianchi = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          sym = std::max({sym, std::abs(rd(i, j, k, l) + rd(j, i, k, l)), std::abs(rd(i, j, k, l) + rd(i, j, l, k)),
                          std::abs(rd(i, j, k, l) - rd(k, l, i, j))});
          bianchi = std::max(bianchi, std::abs(rd(i, j, k, l) + rd(i, k, l, j) + rd(i, l, j, k)));
        }
  EXPECT_LT(sym, 1e-8);
  EXPECT_LT(bianchi, 1e-8);
  EXPECT_LT(rd.symmetry_residual, 1e-8);
  EXPECT_LT(rd.bianchi_residual, 1e-8);
  double sum = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sum += rd.sectional(i, j);
  EXPECT_NEAR(rd.kappa, sum / (n * (n - 1)), 1e-12);
}

TEST(Surface, CovariantDerivativeBasics) {
  const std::vector<double> p{0.4, 0.9};
  const auto u = lift(p, 2);
  Mat<Jet> flat(2, 2, u[0] * 0.0);
  flat(0, 0) = flat(0, 0) + 1.0;
  flat(1, 1) = flat(1, 1) + 1.0;
  const auto rf = riemann_of_metric(flat);
  Mat<Jet> T(2, 2, u[0] * 0.0);
  T(0, 0) = T(0, 0) + 2.0;
  T(0, 1) = T(0, 1) - 0.5;
  T(1, 0) = T(0, 1);
  EXPECT_LT(testsupport::max_abs(covariant_derivative(T, rf)), 1e-14);

  Mat<Jet> round(2, 2, u[0] * 0.0);
  round(0, 0) = round(0, 0) + 1.0;
  round(1, 1) = sin(u[0]) * sin(u[0]);
  const auto rs = riemann_of_metric(round);
  EXPECT_LT(testsupport::max_abs(covariant_derivative(round, rs)), 1e-8);

  Mat<Jet> wrong(3, 3, u[0] * 0.0);
  EXPECT_DUPIN_ERROR(covariant_derivative(wrong, rs), ErrorCode::FrameMismatch);
}

TEST(SurfaceProperty, EigenResidualAcrossFamilies) {
  for (const auto& fam : {families::make_ellipsoid({1, 1.3, 1.7, 2.1}), families::make_clifford_cone(3),
                          families::make_cyclide(1, 3), families::make_flat_laguerre({1, 1, 1}, {1, 2, 3})}) {
    const Grid grid = Grid::make(fam.imm, 3, 0.05);
    for (const auto& p : grid.points) {
      const auto pd = principal_decomposition(fundamental_forms(fam.imm, p));
      EXPECT_LT(pd.residual, 1e-10) << fam.tag;
    }
  }
}
