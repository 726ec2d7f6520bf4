#include <cmath>
#include <numbers>

#include "degenlab/error.hpp"
#include "degenlab/numeric.hpp"
#include "degenlab/spectral.hpp"
#include "doctest.h"

using namespace degenlab;

namespace {

std::shared_ptr<const Grid> grid1(int n = 2001, double r = 1.0) { return std::make_shared<const Grid>(1, r, n); }

Profile prof(const std::string& text, std::optional<double> at0 = std::nullopt, int m = 1) {
  return Profile::parse(text, m, 1.0, text, at0, false);
}

double rayleigh(const EigenProblem& p, const EigenResult& r) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(p.nodes.size()));
  for (std::size_t u = 0; u < p.nodes.size(); ++u) v[static_cast<Eigen::Index>(u)] = r.v[p.nodes[u]];
  return v.dot(p.K * v) / v.dot(p.M.cwiseProduct(v));
}

double norm2(const EigenResult& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.grid->size(); ++i) s += r.grid->weight(i) * r.v[i] * r.v[i];
  return s;
}

std::vector<double> etas12() { return numeric::logspace(10.0, 1e4, 12); }

}  // namespace

TEST_CASE("assemble: stencil and masses") {
  const auto g = grid1(21);
  const auto one = prof("1");
  const auto p = assemble(one, one, 1.0, 0.0, g);
  CHECK(p.nodes.size() == 19);
  const double inv = 1.0 / (0.1 * 0.1);
  CHECK(p.K.coeff(0, 0) == doctest::Approx(2 * inv));
  CHECK(p.K.coeff(0, 1) == doctest::Approx(-inv));
  CHECK(p.K.coeff(0, 2) == 0.0);
  CHECK(p.M.minCoeff() == 1.0);
  const auto q = assemble(one, one, 1.0, 3.0, g);
  CHECK(q.K.coeff(9, 9) - p.K.coeff(9, 9) == doctest::Approx(9.0));
  const auto e = prof("exp(-1/abs(x1))", 0.0);
  const auto r = assemble(e, e, 1.0, 1.0, g);
  CHECK(r.M[9] == 0.0);
  CHECK(r.M[0] == doctest::Approx(std::exp(-2.0 / 0.9)));
  CHECK_THROWS_AS(assemble(one, one, 2.0, 0.0, g), DomainError);
  CHECK_THROWS_AS(assemble(one, prof("1", std::nullopt, 2), 1.0, 0.0, g), DimensionMismatch);
}

TEST_CASE("smallest_eigen: Dirichlet ground state and shift") {
  const auto g = grid1();
  const auto one = prof("1");
  const auto p0 = assemble(one, one, 1.0, 0.0, g);
  const auto r0 = smallest_eigen(p0);
  const double exact = std::numbers::pi * std::numbers::pi / 4;
  CHECK(std::fabs(r0.lambda0 - exact) / exact < 0.005);
  CHECK(r0.lambda0 == doctest::Approx(2.4674005929307947).epsilon(1e-10));
  const auto r10 = smallest_eigen(assemble(one, one, 1.0, 10.0, g));
  CHECK(std::fabs((r10.lambda0 - r0.lambda0) - 100.0) / 100.0 < 1e-6);
  CHECK(std::fabs(rayleigh(p0, r0) - r0.lambda0) <= 1e-10 * r0.lambda0);
  CHECK(r0.residual <= 1e-8 * r0.kv_norm);
  CHECK(std::fabs(norm2(r0) - 1.0) < 1e-12);
  CHECK(mass_fraction(r0, 1.0) == 1.0);
  CHECK(mass_fraction(r0, 0.5) == doctest::Approx(0.5 + 1.0 / std::numbers::pi).epsilon(0.01 / 0.8183));
  CHECK(mass_fraction(r0, 0.5) == doctest::Approx(0.8188096243843446).epsilon(1e-8));
}

TEST_CASE("smallest_eigen: singular mass matches the oracle") {
  const auto g = grid1();
  const auto e = prof("exp(-1/abs(x1))", 0.0);
  for (double eta : {10.0, 1000.0}) {
    const auto p = assemble(e, e, 1.0, eta, g);
    const auto r = smallest_eigen(p);
    CHECK(r.lambda0 - eta * eta == doctest::Approx(180.1728538575).epsilon(1e-7));
    CHECK(mass_fraction(r, 0.5) == doctest::Approx(0.66306740012).epsilon(1e-7));
    CHECK(std::fabs(rayleigh(p, r) - r.lambda0) <= 1e-10 * r.lambda0);
    CHECK(std::fabs(norm2(r) - 1.0) < 1e-12);
  }
}

TEST_CASE("smallest_eigen: monotonicity and grid convergence") {
  const auto g = grid1();
  const auto f = prof("abs(x1)");
  const auto e = prof("exp(-1/abs(x1))", 0.0);
  const double l_half = smallest_eigen(assemble(f, e, 0.5, 5.0, g)).lambda0;
  const double l_one = smallest_eigen(assemble(f, e, 1.0, 5.0, g)).lambda0;
  CHECK(l_one <= l_half);
  double prev = 0.0;
  for (double eta : {0.0, 1.0, 5.0, 20.0, 100.0}) {
    const double l = smallest_eigen(assemble(f, e, 1.0, eta, g)).lambda0;
    CHECK(l >= prev);
    prev = l;
  }
  const auto one = prof("1");
  const double l1 = smallest_eigen(assemble(one, one, 1.0, 0.0, grid1(1001))).lambda0;
  const double l2 = smallest_eigen(assemble(one, one, 1.0, 0.0, grid1(2001))).lambda0;
  CHECK(std::fabs(l1 - l2) / l2 <= 0.01);
}

TEST_CASE("smallest_eigen: guards") {
  const auto g = grid1(201);
  const auto tiny = prof("1e-160");
  CHECK_THROWS_AS(smallest_eigen(assemble(prof("1"), tiny, 1.0, 0.0, g)), DomainError);
  CHECK_THROWS_AS(smallest_eigen(assemble(prof("1"), prof("0"), 1.0, 0.0, g)), DomainError);
  EigenOptions opt;
  opt.max_iter = 1;
  try {
    smallest_eigen(assemble(prof("1"), prof("1"), 1.0, 0.0, g), opt);
    FAIL("expected EigenNotConverged");
  } catch (const EigenNotConverged& ex) {
    CHECK(ex.best().lambda0 > 0.0);
  }
}

TEST_CASE("smallest_eigen: disk with conjugate gradients") {
  const auto g = std::make_shared<const Grid>(2, 1.0, 81, true);
  const auto one = prof("1", std::nullopt, 2);
  const auto p = assemble(one, one, 1.0, 0.0, g);
  const auto r = smallest_eigen(p);
  // j_{0,1}^2 for the unit disk; the staircase boundary shrinks the domain.
  CHECK(r.lambda0 == doctest::Approx(5.783185962946784).epsilon(0.05));
  CHECK(std::fabs(rayleigh(p, r) - r.lambda0) <= 1e-10 * r.lambda0);
  CHECK(std::fabs(norm2(r) - 1.0) < 1e-12);
  const auto r2 = smallest_eigen(assemble(one, one, 1.0, 2.0, g));
  CHECK(r2.lambda0 - r.lambda0 == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("lambda0_scan: series and fits") {
  const auto g = grid1();
  const auto e = prof("exp(-1/abs(x1))", 0.0);
  const auto etas = etas12();
  const auto s = lambda0_scan(e, e, 1.0, etas, g);
  REQUIRE(s.lambda0.size() == 12);
  CHECK(s.lambda0[0] == doctest::Approx(280.1728538575403).epsilon(1e-8));
  CHECK(s.lambda0[11] == doctest::Approx(100000180.17285475).epsilon(1e-10));
  CHECK(s.q == doctest::Approx(9.513461840486025).epsilon(1e-6));
  CHECK(s.fit_meaningful);
  REQUIRE(s.b[0].has_value());
  CHECK(*s.b[0] == doctest::Approx(1.0 / std::log(10.0)).epsilon(1e-9));
  for (std::size_t i = 1; i < 12; ++i) CHECK(s.lambda0[i] > s.lambda0[i - 1]);

  const auto one = prof("1");
  const auto c = lambda0_scan(one, one, 1.0, etas, g);
  CHECK_FALSE(c.fit_meaningful);
  for (std::size_t i = 0; i < 12; ++i) CHECK(c.lambda0[i] - etas[i] * etas[i] == doctest::Approx(2.4674005929).epsilon(1e-6));

  const auto root = prof("exp(-1/abs(x1)^0.5)", 0.0);
  CHECK(lambda0_scan(root, root, 1.0, etas, g).q > 2.5);

  const std::vector<double> bad = {10.0, 5.0};
  CHECK_THROWS_AS(lambda0_scan(one, one, 1.0, bad, g), DomainError);
  const std::vector<double> small = {1.0, 10.0};
  CHECK_THROWS_AS(lambda0_scan(one, one, 1.0, small, g), DomainError);
}

TEST_CASE("hoshiro_ratio: guards") {
  const auto g = grid1(1001);
  const auto one = prof("1");
  const auto s = lambda0_scan(one, one, 1.0, etas12(), g);
  const auto r = hoshiro_ratio(s, 3, 0.1);
  CHECK(r.log_ratio.size() == 12);
  CHECK(r.exponent < 0.0);
  CHECK_FALSE(r.contradiction);
  const auto z = hoshiro_ratio(s, 0, 0.1);
  CHECK_FALSE(z.contradiction);
  for (std::size_t i = 1; i < z.log_ratio.size(); ++i) CHECK(z.log_ratio[i] <= z.log_ratio[i - 1] + 1e-9);
  CHECK_THROWS_AS(hoshiro_ratio(s, -1, 0.1), DomainError);

  // Synthetic logarithmic series: the eta^{2k} growth wins.
  CounterexampleSeries syn;
  syn.etas = etas12();
  for (double eta : syn.etas) {
    const double l = std::log(eta);
    syn.lambda0.push_back(l * l);
    syn.mass_half.push_back(1.0);
  }
  syn.c1 = 1.0;
  CHECK(hoshiro_ratio(syn, 3, 0.1).contradiction);
}

TEST_CASE("lowerbound_check") {
  const auto g = grid1(4001);
  const std::vector<double> taus = {100.0};
  const auto lin = lowerbound_check(prof("abs(x1)"), taus, g);
  CHECK(lin.rows[0].lambda0 == doctest::Approx(99.9993749960918).epsilon(1e-3));
  CHECK(lin.rows[0].c == doctest::Approx(4.0).epsilon(0.1));
  const auto c = lowerbound_check(prof("1"), taus, g);
  CHECK(c.rows[0].lambda0 == doctest::Approx(std::numbers::pi * std::numbers::pi / 4 + 1e4).epsilon(1e-6));
  CHECK(c.rows[0].w == doctest::Approx(101.0).epsilon(1e-9));
  const std::vector<double> big = {100.0, 1000.0};
  const auto flat = lowerbound_check(prof("max(abs(x1) - 0.3, 0)"), big, grid1(2001));
  CHECK(flat.rows[0].lambda0 == doctest::Approx(12.241259513790483).epsilon(1e-6));
  CHECK(flat.rows[1].lambda0 == doctest::Approx(20.511223589643393).epsilon(1e-6));
  CHECK(flat.rows[1].w == doctest::Approx(1.0 / 0.3).epsilon(0.02));
  CHECK(flat.c_max < 1.0);
}
