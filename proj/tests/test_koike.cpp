#include <cmath>
#include <random>

#include "degenlab/error.hpp"
#include "degenlab/koike.hpp"
#include "doctest.h"

using namespace degenlab;

namespace {

Profile prof(const std::string& name, const std::string& text, std::optional<double> at0 = std::nullopt, int m = 1) {
  return Profile::parse(name, m, 1.0, text, at0, true);
}

DegeneracyFamily ks_family(const std::string& lam3) {
  return DegeneracyFamily(1, 3, 3, {prof("lam2", "1"), prof("lam3", lam3, 0.0)});
}

}  // namespace

TEST_CASE("mu examples") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double t = u(rng), c = u(rng);
    const Profile g = Profile::parse("c", 1, 1.0, std::to_string(c));
    const double cv = Profile::parse("c", 1, 1.0, std::to_string(c))({0.0});
    auto r = mu(t, g);
    CHECK(r.value == cv * t);
    CHECK(r.argmax_radius == 0.0);
  }
  auto a = mu(1.0, prof("abs", "abs(x1)"));
  CHECK(a.value == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(std::fabs(a.argmax_radius - 0.5) <= 1e-4);

  const Profile e = Profile::parse("e", 1, 2.0, "exp(-1/abs(x1))", 0.0);
  auto b = mu(2.0, e);
  CHECK(b.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
  CHECK(std::fabs(b.argmax_radius - 1.0) <= 1e-4);
  CHECK_THROWS_AS(mu(3.0, e), DomainError);
}

TEST_CASE("mu in two dimensions uses the max envelope") {
  const Profile r = Profile::parse("r", 2, 1.0, "norm(x1, x2)");
  CHECK(mu(1.0, r).value == doctest::Approx(0.25).epsilon(1e-6));
  const Profile a = Profile::parse("a", 2, 1.0, "abs(x1)");
  CHECK(mu(1.0, a).value == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("mu properties") {
  const Profile g = prof("g", "abs(x1)^1.5 + 0.1*abs(x1)");
  double prev = 0.0;
  for (double t = 0.05; t <= 1.0; t += 0.05) {
    auto r = mu(t, g);
    CHECK(r.value >= prev - 1e-15);
    prev = r.value;
    CHECK(r.value <= t * (1.1) + 1e-15);
    const Profile cg = prof("cg", "0.37*(abs(x1)^1.5 + 0.1*abs(x1))");
    CHECK(mu(t, cg).value == doctest::Approx(0.37 * r.value).epsilon(1e-10));
  }
  // Log-space version agrees where nothing underflows.
  auto lg = [&](std::span<const double> x) { return g.log_value(x).value; };
  CHECK(std::exp(log_mu(0.7, 1, lg).value) == doctest::Approx(mu(0.7, g).value).epsilon(1e-10));
}

TEST_CASE("aggregates") {
  const auto fam = ks_family("exp(-2/abs(x1))");
  const double x[] = {0.5};
  auto a = aggregates(fam, x);
  const double e4 = std::exp(-4.0);
  CHECK(a.sum == doctest::Approx(1.0 + e4));
  CHECK(a.product == doctest::Approx(e4));
  CHECK(a.max == 1.0);
  CHECK(a.min == doctest::Approx(e4));

  DegeneracyFamily single(1, 2, 2, {prof("l", "x1^2")});
  auto s = aggregates(single, x);
  CHECK(s.sum == 0.25);
  CHECK(s.product == 0.25);
  CHECK(s.max == 0.25);
  CHECK(s.min == 0.25);

  DegeneracyFamily ones(1, 4, 4, {prof("a", "1"), prof("b", "1"), prof("c", "1")});
  auto o = aggregates(ones, x);
  CHECK(o.sum == 3.0);
  CHECK(o.product == 1.0);
  CHECK(o.max == 1.0);
  CHECK(o.min == 1.0);

  auto la = log_aggregates(fam, std::vector<double>{1e-3});
  CHECK(la.log_product == doctest::Approx(-2000.0));
  CHECK(la.log_min == doctest::Approx(-2000.0));
  CHECK(la.log_max == 0.0);
  CHECK_FALSE(la.clamped);
}

TEST_CASE("family validation") {
  CHECK_THROWS_AS(DegeneracyFamily(1, 2, 2, {prof("x", "x1")}), InvalidFamily);
  try {
    DegeneracyFamily(1, 2, 2, {prof("big", "2 + x1^2")});
    FAIL("expected InvalidFamily");
  } catch (const InvalidFamily& e) {
    CHECK(std::string(e.what()).find("rescale") != std::string::npos);
  }
  CHECK_THROWS_AS(DegeneracyFamily(1, 3, 3, {prof("a", "1")}), InvalidFamily);
  CHECK_THROWS_AS(DegeneracyFamily(2, 2, 3, {}), InvalidFamily);
}

TEST_CASE("classify: exp(-2/|x|) fails the criterion") {
  const auto fam = ks_family("exp(-2/abs(x1))");
  for (auto form : {CriterionForm::MaxMin, CriterionForm::SumProduct}) {
    auto r = classify(fam, form);
    CHECK(r.verdict == Verdict::Fails);
    REQUIRE(r.scales.size() == 39);
    CHECK(r.scales.front().k == 2);
    CHECK(r.scales.back().k == 40);
    for (const auto& s : r.scales) {
      if (form == CriterionForm::MaxMin) CHECK(s.c == doctest::Approx(-2.0).epsilon(1e-6));
      if (s.k > 1) CHECK(s.t < 1.0);
    }
    for (std::size_t i = 1; i < r.scales.size(); ++i) CHECK(r.scales[i].t < r.scales[i - 1].t);
  }
}

TEST_CASE("classify: exp(-2/|x|^(1/2)) holds with the analytic sequence") {
  const auto fam = ks_family("exp(-2/abs(x1)^0.5)");
  auto r = classify(fam, CriterionForm::MaxMin);
  CHECK(r.verdict == Verdict::Holds);
  for (const auto& s : r.scales) CHECK(s.c == doctest::Approx(-2.0 * std::sqrt(s.t)).epsilon(1e-6));
  CHECK(classify(fam, CriterionForm::SumProduct).verdict == Verdict::Holds);
}

TEST_CASE("classify: single profile x^2 holds") {
  DegeneracyFamily fam(1, 2, 2, {prof("l", "x1^2")});
  auto r = classify(fam, CriterionForm::SumProduct);
  CHECK(r.verdict == Verdict::Holds);
  for (const auto& s : r.scales) {
    const double oracle = s.t * s.t / 4.0 * 2.0 * std::log(s.t);
    CHECK(s.c == doctest::Approx(oracle).epsilon(1e-6));
  }
}

TEST_CASE("classify: profiles bounded below hold") {
  DegeneracyFamily fam(1, 3, 3, {prof("a", "0.5 + 0.25*x1^2"), prof("b", "0.3")});
  CHECK(classify(fam, CriterionForm::SumProduct).verdict == Verdict::Holds);
  CHECK(classify(fam, CriterionForm::MaxMin).verdict == Verdict::Holds);
}

TEST_CASE("verdicts are invariant under rescaling by c in [0.1, 1]") {
  for (double c : {0.1, 0.35, 1.0}) {
    const std::string s = std::to_string(c);
    DegeneracyFamily fails(1, 3, 3, {prof("a", s), prof("b", s + "*exp(-2/abs(x1))", 0.0)});
    DegeneracyFamily holds(1, 3, 3, {prof("a", s), prof("b", s + "*exp(-2/abs(x1)^0.5)", 0.0)});
    for (auto form : {CriterionForm::MaxMin, CriterionForm::SumProduct}) {
      CHECK(classify(fails, form).verdict == Verdict::Fails);
      CHECK(classify(holds, form).verdict == Verdict::Holds);
    }
  }
}

TEST_CASE("classify in two dimensions") {
  const Profile one = Profile::parse("a", 2, 1.0, "1", std::nullopt, true);
  const Profile flat = Profile::parse("b", 2, 1.0, "exp(-2/norm(x1, x2))", 0.0, true);
  DegeneracyFamily fam(2, 4, 4, {one, flat}, true, Grid(2, 1.0, 41, true));
  auto r = classify(fam, CriterionForm::MaxMin);
  CHECK(r.verdict == Verdict::Fails);
  CHECK(r.scales.back().c == doctest::Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("w and r examples") {
  const Grid g(1, 1.0, 2001);
  const Profile lin = prof("lin", "abs(x1)");
  CHECK(std::fabs(w_of_tau(lin, 100.0, g) - 20.0) <= 0.1);
  CHECK(std::fabs(r_of_tau(lin, 100.0, g) - 0.1) <= 1e-4);
  const double wr = w_of_tau(lin, 100.0, g) * r_of_tau(lin, 100.0, g);
  CHECK(wr >= 1.0);
  CHECK(wr <= 2.0 + 1e-3);

  for (double c : {0.0, 0.2, 1.0}) {
    const Profile k = prof("c", std::to_string(c));
    CHECK(w_of_tau(k, 10.0, g) == doctest::Approx(1.0 + 10.0 * c).epsilon(1e-9));
  }
  CHECK(r_of_tau(prof("one", "1"), 4.0, g) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(r_of_tau(prof("small", "0.1"), 1.0, g), NoCrossing);

  // Dense-scan oracle: min_s 1/s + e^2 exp(-1/s) = 3 at s = 1/2.
  const Profile f = prof("f", "exp(-1/abs(x1))", 0.0);
  CHECK(w_of_tau(f, std::exp(2.0), g) == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("w is nondecreasing in tau and w r stays in [1, 2]") {
  const Grid g(1, 1.0, 2001);
  for (const char* text : {"abs(x1)", "x1^2", "exp(-1/abs(x1))"}) {
    const Profile f = prof("f", text, 0.0);
    const auto env = radial_envelopes(f, g);
    double prev = 0.0;
    for (double tau = 2.0; tau < 1e6; tau *= 1.7) {
      const double w = w_of_tau(env, tau);
      CHECK(w >= prev - 1e-12);
      prev = w;
      try {
        const double r = r_of_tau(env, tau);
        CHECK(w * r >= 1.0 - 1e-9);
        CHECK(w * r <= 2.0 + 1e-2);
      } catch (const NoCrossing&) {
      }
    }
  }
}
