#include <cmath>

#include "degenlab/error.hpp"
#include "degenlab/inequal.hpp"
#include "degenlab/numeric.hpp"
#include "doctest.h"

using namespace degenlab;

namespace {

std::shared_ptr<const Grid> grid1(int n = 4001) { return std::make_shared<const Grid>(1, 1.0, n); }

Profile prof(const std::string& text, std::optional<double> at0 = std::nullopt) {
  return Profile::parse(text, 1, 1.0, text, at0, true);
}

// Tent of height 1 on (-r, r).
BumpFunction tent(const std::shared_ptr<const Grid>& g, double r) {
  std::vector<double> v(g->size()), d(g->size());
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double x = g->node(i)[0];
    if (std::fabs(x) < r) {
      v[i] = 1.0 - std::fabs(x) / r;
      d[i] = x > 0 ? -1.0 / r : (x < 0 ? 1.0 / r : 0.0);
    }
  }
  return BumpFunction::from_nodes(g, std::move(v), std::move(d));
}

BumpParams fixed_params() {
  BumpParams p;
  p.center = {0.1};
  p.width = 0.3;
  p.amplitude = 1.3;
  p.a0 = 0.4;
  p.cos_coeffs = {{0.5, -0.2, 0.1}};
  p.sin_coeffs = {{0.3, 0.1, -0.05}};
  return p;
}

BumpParams scaled(BumpParams p, double c) {
  for (double& x : p.center) x *= c;
  p.width *= c;
  return p;
}

}  // namespace

TEST_CASE("bumps are seeded, supported and have exact gradients") {
  const auto g = grid1(2001);
  const auto a = BumpFunction::random(g, 42, 7, 0.5);
  const auto b = BumpFunction::random(g, 42, 7, 0.5);
  const auto c = BumpFunction::random(g, 42, 8, 0.5);
  bool differ = false;
  for (std::size_t i = 0; i < g->size(); ++i) {
    CHECK(a.value(i) == b.value(i));
    differ = differ || a.value(i) != c.value(i);
    if (g->node_radius(i) > 0.5) CHECK(a.value(i) == 0.0);
  }
  CHECK(differ);
  CHECK(a.params()->reach() <= 0.5 + 1e-12);
  CHECK(a.support_extent() <= 0.5);

  const auto p = fixed_params();
  for (double x : {-0.15, 0.0, 0.12, 0.33}) {
    const double h = 1e-6;
    const double xp[] = {x + h}, xm[] = {x - h}, x0[] = {x};
    double grad[1];
    p.gradient(x0, grad);
    CHECK(grad[0] == doctest::Approx((p.value(xp) - p.value(xm)) / (2 * h)).epsilon(1e-6));
  }

  const auto g2 = std::make_shared<const Grid>(2, 1.0, 81, true);
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto q = BumpFunction::random(g2, 3, i, 0.8);
    for (std::size_t k = 0; k < g2->size(); ++k)
      if (g2->node_radius(k) > 0.8) CHECK(q.value(k) == 0.0);
  }
  CHECK(BumpFunction::zero(g).is_zero());

  const auto batch = random_bumps(g, 11, 16, 0.5, 4);
  for (std::size_t i = 0; i < batch.size(); ++i) CHECK(batch[i].params()->index == i);
  CHECK(batch[3].value(1000) == BumpFunction::random(g, 11, 3, 0.5).value(1000));
}

TEST_CASE("bound_aux examples") {
  const auto g = grid1();
  const auto one = prof("1");
  const auto r = check_bound_aux(one, tent(g, 1.0), 1.0, 0.5, 1);
  CHECK(r.ratio == doctest::Approx(0.2).epsilon(1e-3));
  CHECK(r.norm2 == doctest::Approx(2.0 / 3.0).epsilon(1e-4));
  CHECK(r.deriv2 == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(check_bound_aux(one, BumpFunction::zero(g), 1.0, 0.5, 1).ratio == 0.0);

  // Quadrature oracle for a fixed trigonometric bump.
  const auto f = prof("exp(-1/abs(x1))", 0.0);
  const auto b = BumpFunction::from_params(g, fixed_params());
  CHECK(check_bound_aux(f, b, 100.0, 0.2, 1).ratio == doctest::Approx(0.0059769204158298846).epsilon(1e-4));

  CHECK_THROWS_AS(check_bound_aux(prof("exp(-1/abs(x1))", 0.0), b, 1.0, 0.001, 1), DegenerateMin);
  CHECK_THROWS_AS(check_bound_aux(one, b, 1.0, 0.5, 2), DomainError);
}

TEST_CASE("bound_aux empirical constant is stable across tau decades") {
  const auto g = grid1(2001);
  const auto f = prof("exp(-1/abs(x1))", 0.0);
  const auto bumps = random_bumps(g, 42, 500, 1.0);
  std::vector<double> cl;
  for (double tau : {1e2, 1e3, 1e4}) {
    const double s = r_of_tau(f, tau, *g);
    double worst = 0.0;
    for (const auto& b : bumps) worst = std::max(worst, check_bound_aux(f, b, tau, s, 1).ratio);
    CHECK(std::isfinite(worst));
    CHECK(worst > 0.0);
    cl.push_back(worst);
  }
  const auto [lo, hi] = std::minmax_element(cl.begin(), cl.end());
  CHECK(*hi <= 4.0 * *lo);
}

TEST_CASE("hardy claim examples") {
  const auto g = grid1();
  const double r = 0.5;
  const auto c = prof("0.3");
  const auto h = check_hardy_claim(c, tent(g, r), r);
  CHECK(h.ratio == doctest::Approx(1.0 / 12.0).epsilon(1e-3));
  CHECK(h.mu == doctest::Approx(std::sqrt(0.3) * r).epsilon(1e-6));
  CHECK(check_hardy_claim(c, BumpFunction::zero(g), r).ratio == 0.0);

  const auto e = prof("exp(-2/abs(x1))", 0.0);
  const auto b = BumpFunction::from_params(g, fixed_params());
  CHECK(check_hardy_claim(e, b, r).ratio == doctest::Approx(0.0016713461166426168).epsilon(1e-3));
}

TEST_CASE("hardy claim holds on seeded bumps") {
  const auto g = grid1();
  const auto bumps = random_bumps(g, 2024, 200, 0.5);
  for (const char* text : {"0.7", "x1^2", "exp(-2/abs(x1))"}) {
    const auto lam = prof(text, 0.0);
    const double m = mu(0.5, sqrt_profile(lam)).value;
    for (const auto& b : bumps) CHECK(check_hardy_claim(lam, b, 0.5, m).ratio <= 1.05);
  }
}

TEST_CASE("hardy ratio is invariant under dilation for homogeneous weights") {
  const auto g = grid1();
  auto base = fixed_params();
  base.center = {0.05};
  base.width = 0.2;
  for (const char* text : {"0.7", "x1^2"}) {
    const auto lam = prof(text);
    const double r1 = check_hardy_claim(lam, BumpFunction::from_params(g, base), 0.25).ratio;
    const double r2 = check_hardy_claim(lam, BumpFunction::from_params(g, scaled(base, 2.0)), 0.5).ratio;
    CHECK(r2 == doctest::Approx(r1).epsilon(0.02));
  }
}

TEST_CASE("suffic: unit family has delta ~ 2 (log tau)^2 / tau^2") {
  const auto g = grid1();
  DegeneracyFamily fam(1, 3, 3, {prof("1"), prof("1")});
  const auto b = BumpFunction::from_params(g, fixed_params());
  for (double tau : {10.0, 100.0, 1000.0}) {
    const auto s = check_suffic(fam, b, tau);
    const double lt = std::log(tau);
    CHECK(s.delta <= 2.0 * lt * lt / (tau * tau));
    CHECK(s.delta <= s.split_bound);
    if (tau == 1000.0) CHECK(s.delta * tau * tau / (lt * lt) == doctest::Approx(2.0).epsilon(1e-2));
  }
  const auto z = check_suffic(fam, BumpFunction::zero(g), 10.0);
  CHECK(z.undefined);
  CHECK(std::isnan(z.delta));
  CHECK_THROWS_AS(check_suffic(fam, b, 2.0), DomainError);
}

TEST_CASE("suffic: quadrature oracle and split dominance") {
  const auto g = grid1();
  DegeneracyFamily fam(1, 3, 3, {prof("1"), prof("exp(-2/abs(x1))", 0.0)});
  const auto b = BumpFunction::from_params(g, fixed_params());
  CHECK(check_suffic(fam, b, 100.0).delta == doctest::Approx(0.2842798425263038).epsilon(1e-4));
  for (const auto& bump : random_bumps(g, 5, 50, 1.0)) {
    for (double tau : {10.0, 1e3}) {
      const auto s = check_suffic(fam, bump, tau);
      CHECK(s.outer <= s.outer_bound * (1 + 1e-12));
      CHECK(s.delta <= 1.05 * s.split_bound);
    }
  }
}

TEST_CASE("suffic sweep separates Holds and Fails families") {
  const auto g = grid1();
  const auto bumps = random_bumps(g, 42, 100, 1.0);
  const auto taus = numeric::logspace(10.0, 1e4, 7);
  DegeneracyFamily holds(1, 3, 3, {prof("1"), prof("exp(-2/abs(x1)^0.5)", 0.0)});
  DegeneracyFamily fails(1, 3, 3, {prof("1"), prof("exp(-2/abs(x1))", 0.0)});
  const auto h = suffic_sweep(holds, bumps, taus);
  const auto f = suffic_sweep(fails, bumps, taus);
  CHECK(h.monotone);
  CHECK(h.worst_delta.back() < 0.5 * h.worst_delta.front());
  CHECK(f.worst_delta.back() > 0.5 * f.worst_delta.front());
  CHECK(f.worst_delta.back() > 4.0 * h.worst_delta.back());
}

TEST_CASE("malgrange examples") {
  const Grid g(1, 1.0, 2001);
  CHECK(check_malgrange(prof("x1^2"), g).constant == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(check_malgrange(prof("0.4"), g).constant == 0.0);
  const auto q = check_malgrange(prof("x1^4"), g);
  CHECK(std::fabs(q.constant - 16.0) <= 1e-4);
  CHECK(std::fabs(q.argmax[0]) == 1.0);
  CHECK(check_malgrange(prof("x1^2"), g).skipped == 1);
}

TEST_CASE("malgrange of a square is four times the squared gradient") {
  const Grid g(1, 1.0, 2001);
  for (const char* f : {"x1 - 0.3", "x1^3 + 2*x1 - 0.5", "0.5*x1^2 - x1 + 0.2"}) {
    const auto p = prof(f);
    const auto sq = Profile::parse("sq", 1, 1.0, std::string("(") + f + ")^2");
    double sup = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (sq(g.node(i)) < 1e-30) continue;
      const double d = p.gradient(g.node(i))[0];
      sup = std::max(sup, d * d);
    }
    CHECK(check_malgrange(sq, g).constant == doctest::Approx(4.0 * sup).epsilon(1e-6));
  }
}
