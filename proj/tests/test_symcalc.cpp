#include <cmath>
#include <random>

#include "degenlab/error.hpp"
#include "degenlab/symcalc.hpp"
#include "doctest.h"

using namespace degenlab;

namespace {

double at(const SymbolExpr& s, std::initializer_list<double> v) {
  return expr::evaluate(s.e, expr::Bindings(s.variables(), std::span<const double>(v.begin(), v.size())));
}

double at(const expr::Expr& e, int n, std::initializer_list<double> v) {
  return expr::evaluate(e, expr::Bindings(expr::VarSet::phase_space(n), std::span<const double>(v.begin(), v.size())));
}

}  // namespace

TEST_CASE("lattice layout") {
  const auto l1 = Lattice::standard(1);
  CHECK(l1.xi_norms.size() == 24);
  CHECK(l1.xi_norms.front() == doctest::Approx(10.0));
  CHECK(l1.xi_norms.back() == doctest::Approx(1e4));
  CHECK(l1.directions.size() == 2);
  CHECK(l1.xs.size() == 16);
  const auto l2 = Lattice::standard(2);
  CHECK(l2.directions.size() == 8);
  for (const auto& d : l2.directions) CHECK(std::hypot(d[0], d[1]) == doctest::Approx(1.0));
  CHECK(Lattice::standard(3).directions.size() == 6);
  CHECK(Lattice::standard(3).xs.size() == 16);
}

TEST_CASE("estimate_order examples") {
  const auto lat = Lattice::standard(1);
  const auto a = SymbolExpr::parse("1 + xi1^2", 1, 2.0);
  const auto e0 = estimate_order(a, {0}, {0}, lat);
  CHECK(std::fabs(e0.slope - 2.0) <= 0.02);
  CHECK_FALSE(e0.log_flag);
  CHECK(e0.consistent);
  const auto e1 = estimate_order(a, {0}, {1}, lat);
  CHECK(std::fabs(e1.slope - 1.0) <= 0.02);
  CHECK(e1.nominal == 1.0);
  CHECK(e1.consistent);

  const auto lg = SymbolExpr::parse("log(sqrt(1 + xi1^2))", 1, 0.0);
  const auto el = estimate_order(lg, {}, {}, lat);
  CHECK(std::fabs(el.slope) <= 0.02);
  CHECK(el.log_flag);
  CHECK(el.log_power == 1);

  CHECK(estimate_order(a, {1}, {0}, lat).slope == -HUGE_VAL);
  // x-dependence with eta = 0: d_x of (1 + x^2) xi^2 is still order 2.
  const auto b = SymbolExpr::parse("(1 + x1^2)*xi1^2", 1, 2.0);
  CHECK(std::fabs(estimate_order(b, {1}, {0}, lat).slope - 2.0) <= 0.02);
  // Declared order too small is reported inconsistent.
  const auto wrong = SymbolExpr::parse("xi1^3", 1, 2.0);
  CHECK_FALSE(estimate_order(wrong, {0}, {0}, lat).consistent);
  CHECK_THROWS_AS(estimate_order(a, {2}, {2}, lat), DomainError);
}

TEST_CASE("parametrix of an x-independent symbol") {
  const auto lat = Lattice::standard(1);
  const auto a = SymbolExpr::parse("1 + xi1^2", 1, 2.0);
  const auto c = parametrix(a, 2, lat);
  REQUIRE(c.b.size() == 3);
  CHECK(at(c.b[0].re, 1, {0.3, 7.0}) == doctest::Approx(1.0 / 50.0));
  CHECK(c.b[1].is_zero());
  CHECK(c.b[2].is_zero());
  for (int M = 0; M <= 2; ++M) CHECK(residual_order(parametrix(a, M, lat), lat).slope == -HUGE_VAL);
}

TEST_CASE("parametrix of (1 + x^2) xi^2 against a symbolic oracle") {
  const auto lat = Lattice::standard(1);
  const auto a = SymbolExpr::parse("(1 + x1^2)*xi1^2", 1, 2.0);
  const auto c = parametrix(a, 2, lat);
  const double p[] = {1.0, 2.0};
  const auto vars = a.variables();
  const auto b1 = evaluate(c.b[1], vars, p);
  CHECK(b1.first == 0.0);
  CHECK(b1.second == doctest::Approx(-0.125).epsilon(1e-14));
  const auto b2 = evaluate(c.b[2], vars, p);
  CHECK(b2.first == doctest::Approx(-0.09375).epsilon(1e-14));
  CHECK(std::fabs(b2.second) <= 1e-15);

  // Displayed formula and recursion agree.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ux(-1.0, 1.0), ul(1.0, 4.0);
  for (int i = 0; i < 100; ++i) {
    const double q[] = {ux(rng), (ux(rng) < 0 ? -1.0 : 1.0) * std::pow(10.0, ul(rng))};
    const auto r = evaluate(c.b[1], vars, q), d = evaluate(c.b1_displayed, vars, q);
    CHECK(std::fabs(r.second - d.second) <= 1e-12 * std::fabs(d.second) + 1e-300);
    CHECK(r.first == d.first);
  }
}

TEST_CASE("parametrix residual decays one order per term") {
  const auto lat = Lattice::standard(1);
  const auto a = SymbolExpr::parse("(1 + x1^2)*xi1^2", 1, 2.0);
  const double s0 = residual_order(parametrix(a, 0, lat), lat).slope;
  const double s1 = residual_order(parametrix(a, 1, lat), lat).slope;
  const double s2 = residual_order(parametrix(a, 2, lat), lat).slope;
  CHECK(std::fabs(s0 + 1.0) <= 0.3);
  CHECK(s0 <= -0.7);
  CHECK(s1 <= -1.7);
  CHECK(s2 <= -2.7);
  // Fit oracle values.
  CHECK(s0 == doctest::Approx(-1.0004038924314245).epsilon(1e-6));
  CHECK(s1 == doctest::Approx(-2.000657048491989).epsilon(1e-6));
  CHECK(s2 == doctest::Approx(-3.001052061346667).epsilon(1e-6));
}

TEST_CASE("parametrix in two dimensions") {
  const auto lat = Lattice::standard(2);
  const auto a = SymbolExpr::parse("(2 + sin(x1)*x2)*(xi1^2 + xi2^2) + x1*xi1*xi2", 2, 2.0);
  const auto c = parametrix(a, 2, lat);
  CHECK(residual_order(parametrix(a, 0, lat), lat).slope <= -0.7);
  CHECK(residual_order(c, lat).slope <= -2.7);
  const auto vars = a.variables();
  const double q[] = {0.3, -0.2, 40.0, -15.0};
  const auto r = evaluate(c.b[1], vars, q), d = evaluate(c.b1_displayed, vars, q);
  CHECK(r.second == doctest::Approx(d.second).epsilon(1e-12));
}

TEST_CASE("parametrix rejects non-elliptic symbols") {
  const auto lat = Lattice::standard(1);
  try {
    parametrix(SymbolExpr::parse("x1^2*xi1^2", 1, 2.0), 1, lat);
    FAIL("expected NotElliptic");
  } catch (const NotElliptic& e) {
    CHECK(std::string(e.what()).find("(x, xi) = (0") != std::string::npos);
  }
  CHECK_THROWS_AS(parametrix(SymbolExpr::parse("xi1", 1, 2.0), 0, lat), NotElliptic);
  CHECK_THROWS_AS(parametrix(SymbolExpr::parse("xi1^2", 1, 2.0), 3, lat), DomainError);
}

TEST_CASE("poisson bracket examples") {
  const auto f = SymbolExpr::parse("xi1^2", 1), g = SymbolExpr::parse("x1", 1);
  CHECK(at(poisson_bracket(f, g), {0.4, 3.0}) == doctest::Approx(6.0));
  const auto h = SymbolExpr::parse("x1*xi1", 1);
  CHECK(poisson_bracket(h, h).e.is_const(0.0));
  const auto l = SymbolExpr::parse("log(sqrt(1 + xi1^2))", 1), s = SymbolExpr::parse("sin(x1)", 1);
  for (double x : {-0.5, 0.1, 0.8})
    for (double xi : {-20.0, 3.0, 100.0})
      CHECK(at(poisson_bracket(l, s), {x, xi}) == doctest::Approx(xi / (1 + xi * xi) * std::cos(x)).epsilon(1e-13));
}

TEST_CASE("poisson bracket antisymmetry and Leibniz") {
  const char* texts[] = {"x1*xi1^2 + x2*xi2", "sin(x1 + x2)*xi1", "exp(x2)*sqrt(1 + xi1^2 + xi2^2)",
                         "log(sqrt(1 + xi1^2 + xi2^2))*cos(x1)"};
  std::vector<SymbolExpr> syms;
  for (const char* t : texts) syms.push_back(SymbolExpr::parse(t, 2));
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ux(-1.0, 1.0), uxi(-50.0, 50.0);
  for (int i = 0; i < 100; ++i) {
    const double pt[] = {ux(rng), ux(rng), uxi(rng), uxi(rng)};
    const expr::Bindings b(expr::VarSet::phase_space(2), pt);
    const auto& f = syms[static_cast<std::size_t>(i) % 4];
    const auto& g = syms[static_cast<std::size_t>(i + 1) % 4];
    const auto& h = syms[static_cast<std::size_t>(i + 2) % 4];
    const double fg = expr::evaluate(poisson_bracket(f.e, g.e, 2), b);
    const double gf = expr::evaluate(poisson_bracket(g.e, f.e, 2), b);
    CHECK(std::fabs(fg + gf) <= 1e-10);
    const double lhs = expr::evaluate(poisson_bracket(f.e, g.e * h.e, 2), b);
    const double rhs = expr::evaluate(g.e, b) * expr::evaluate(poisson_bracket(f.e, h.e, 2), b) +
                       fg * expr::evaluate(h.e, b);
    CHECK(std::fabs(lhs - rhs) <= 1e-9 * (1.0 + std::fabs(lhs)));
  }
}

TEST_CASE("weight symbol examples") {
  const auto lat = Lattice::standard(1);
  const auto w0 = weight_symbol(1.5, 3.0, SymbolExpr::parse("0", 1), lat);
  CHECK(at(w0.lambda, {0.2, 50.0}) == doctest::Approx(std::pow(50.0, 1.5)));
  const auto w1 = weight_symbol(0.0, 1.0, SymbolExpr::parse("1", 1), lat);
  for (double xi : {3.0, 10.0, -400.0}) CHECK(at(w1.lambda, {0.0, xi}) == doctest::Approx(1.0 / std::fabs(xi)));
  // Frozen at e below |xi| = e, continuous across it.
  CHECK(at(w1.lambda, {0.0, 1.0}) == doctest::Approx(std::exp(-1.0)));
  CHECK(at(w1.lambda, {0.0, 0.0}) == doctest::Approx(std::exp(-1.0)));
  CHECK(at(w1.log_lambda, {0.0, 100.0}) == doctest::Approx(-std::log(100.0)));

  const auto psi = SymbolExpr::parse("0.5 + 0.5*sin(3*x1)*xi1/sqrt(xi1^2)", 1);
  const double gamma = 1.0, n0 = 2.0;
  const auto w = weight_symbol(gamma, n0, psi, lat);
  const auto e = estimate_order(w.lambda, {0}, {0}, lat);
  CHECK(e.slope >= gamma - n0 - 0.05);
  CHECK(e.slope <= gamma + 0.05);

  CHECK_THROWS_AS(weight_symbol(0.0, 1.0, SymbolExpr::parse("x1", 1), lat), PsiNegative);
  CHECK_THROWS_AS(weight_symbol(0.0, 1.0, SymbolExpr::parse("xi1^2/(1 + xi1^2)", 1), lat), PsiNotHomogeneous);
}

TEST_CASE("psi template") {
  const auto lat = Lattice::standard(2);
  const double rho = 0.2;
  const auto psi = psi_template(2, 1, rho);
  CHECK(at(psi, {0.0, 0.0, 0.0, 100.0}) == 0.0);
  CHECK(at(psi, {0.1, 0.1, 1.0, 0.0}) == 1.0);
  CHECK(at(psi, {0.61, 0.0, 0.0, 5.0}) == 1.0);
  const double mid = at(psi, {0.4, 0.0, 0.0, 5.0});
  CHECK(mid == doctest::Approx(0.5));
  CHECK_NOTHROW(weight_symbol(0.0, 1.0, psi, lat));
  // Homogeneous of degree 0 in xi.
  CHECK(at(psi, {0.1, 0.2, 3.0, 4.0}) == doctest::Approx(at(psi, {0.1, 0.2, 30.0, 40.0})).epsilon(1e-14));
}

TEST_CASE("r1 symbol") {
  const auto lat = Lattice::standard(1);
  const Grid grid(1, 1.0, 101);
  const auto samples = sample_points(grid, 1, grid.spacing());

  MatrixFunction c(1, 1);
  c.set(1, 1, "3");
  const auto rc = r1_symbol(c, 1, 1, 0.5, lat, samples);
  CHECK(rc.entries[0][0].is_zero());

  MatrixFunction q(1, 1);
  q.set(1, 1, "x1^2");
  const auto r = r1_symbol(q, 1, 1, 0.5, lat, samples);
  for (double x : {-0.5, 0.3})
    for (double xi : {2.0, -30.0}) {
      const double v[] = {x, xi};
      const auto z = evaluate(r.entries[0][0], expr::VarSet::phase_space(1), v);
      CHECK(z.first == 0.0);
      CHECK(z.second == doctest::Approx(-2.0 * x * xi * xi / (1 + xi * xi)));
    }
  CHECK(r.theta_bounded);
  CHECK(r.theta_max <= 1.0);
  CHECK(r.subunit.constant == doctest::Approx(4.0).epsilon(1e-8));

  // Two variables, block acting on x2.
  const auto lat2 = Lattice::standard(2);
  MatrixFunction q2(1, 2);
  q2.set(1, 1, "1 + x1^2*x2");
  const Grid g2(1, 1.0, 21);
  const auto r2 = r1_symbol(q2, 2, 2, 1.0, lat2, {});
  const double v[] = {0.5, 0.2, 3.0, 4.0};
  const auto z = evaluate(r2.entries[0][0], expr::VarSet::phase_space(2), v);
  CHECK(z.second == doctest::Approx(-(2 * 0.5 * 0.2 * 3.0 + 0.25 * 4.0) * 4.0 / 26.0));
  CHECK(r2.theta_max <= 1.0);
}
