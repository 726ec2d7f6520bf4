#include "degenlab/koike.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "degenlab/error.hpp"
#include "degenlab/numeric.hpp"

namespace degenlab {

namespace {

std::optional<double> origin_value(const Profile& p) {
  if (p.at0()) return *p.at0();
  Point zero(static_cast<std::size_t>(p.dimension()), 0.0);
  try {
    return p(zero);
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

double logsumexp(std::span<const double> v) {
  double hi = -HUGE_VAL;
  for (double x : v) hi = std::max(hi, x);
  if (hi == -HUGE_VAL) return hi;
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

const std::vector<Point>& sphere_directions(int m) {
  static const std::vector<Point> d1 = {{1.0}, {-1.0}};
  static const std::vector<Point> d2 = [] {
    std::vector<Point> d;
    for (int k = 0; k < 64; ++k) {
      const double a = 2.0 * std::numbers::pi * k / 64.0;
      d.push_back({std::cos(a), std::sin(a)});
    }
    return d;
  }();
  if (m == 1) return d1;
  if (m == 2) return d2;
  throw DomainError("sphere sampling supports m = 1 or m = 2 only");
}

// --- family -----------------------------------------------------------------------

DegeneracyFamily::DegeneracyFamily(int m, int p, int n, std::vector<Profile> profiles, bool last_applies_to_tail,
                                   std::optional<Grid> validation)
    : m_(m), p_(p), n_(n), tail_(last_applies_to_tail), profiles_(std::move(profiles)) {
  if (!(1 <= m_ && m_ < p_ && p_ <= n_)) throw InvalidFamily("need 1 <= m < p <= n");
  if (static_cast<int>(profiles_.size()) != p_ - m_) {
    throw InvalidFamily("expected " + std::to_string(p_ - m_) + " profiles (lambda_" + std::to_string(m_ + 1) + ".." +
                        std::to_string(p_) + "), got " + std::to_string(profiles_.size()));
  }
  radius_ = HUGE_VAL;
  for (const auto& pr : profiles_) {
    if (pr.dimension() != m_) throw InvalidFamily("profile '" + pr.name() + "' is not a function of x1..x" + std::to_string(m_));
    radius_ = std::min(radius_, pr.support_radius());
  }
  if (m_ > 2) throw InvalidFamily("families are supported for m = 1 or m = 2 only");
  const Grid grid = validation ? *validation : Grid(m_, radius_, 201);
  for (const auto& pr : profiles_) {
    auto ell = check_elliptical(pr, grid);
    if (!ell.holds) {
      std::string at;
      for (double c : ell.where) at += (at.empty() ? "" : ", ") + fmt(c);
      throw InvalidFamily("profile '" + pr.name() + "' is not elliptical: value " + fmt(ell.value) + " at (" + at + ")");
    }
    double hi = -HUGE_VAL, lo = HUGE_VAL;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double v = pr(grid.node(i));
      hi = std::max(hi, v);
      lo = std::min(lo, v);
    }
    if (lo < -1e-12) throw InvalidFamily("profile '" + pr.name() + "' takes the negative value " + fmt(lo));
    if (hi > 1.0 + 1e-12) {
      throw InvalidFamily("profile '" + pr.name() + "' exceeds 1 (max " + fmt(hi) + " on the grid); rescale by 1/" + fmt(hi));
    }
  }
}

Profile DegeneracyFamily::sum_profile() const {
  expr::Expr e = profiles_.front().expression();
  for (std::size_t i = 1; i < profiles_.size(); ++i) e = e + profiles_[i].expression();
  std::optional<double> at0 = 0.0;
  for (const auto& pr : profiles_) {
    auto v = origin_value(pr);
    if (!v) {
      at0.reset();
      break;
    }
    *at0 += *v;
  }
  return Profile("Lambda_sum", m_, radius_, e, at0, true);
}

Profile DegeneracyFamily::sqrt_sum_profile() const {
  Profile s = sum_profile();
  std::optional<double> at0;
  if (s.at0()) at0 = std::sqrt(*s.at0());
  return Profile("sqrt_Lambda_sum", m_, radius_, expr::apply(expr::Op::Sqrt, s.expression()), at0, true);
}

Profile DegeneracyFamily::product_profile() const {
  expr::Expr e = profiles_.front().expression();
  for (std::size_t i = 1; i < profiles_.size(); ++i) e = e * profiles_[i].expression();
  std::optional<double> at0 = 1.0;
  for (const auto& pr : profiles_) {
    auto v = origin_value(pr);
    if (!v) {
      at0.reset();
      break;
    }
    *at0 *= *v;
  }
  return Profile("Lambda_product", m_, radius_, e, at0, true);
}

Aggregates aggregates(const DegeneracyFamily& fam, std::span<const double> x) {
  Aggregates a{0.0, 1.0, -HUGE_VAL, HUGE_VAL};
  for (const auto& pr : fam.profiles()) {
    const double v = pr(x);
    a.sum += v;
    a.product *= v;
    a.max = std::max(a.max, v);
    a.min = std::min(a.min, v);
  }
  return a;
}

LogAggregates log_aggregates(const DegeneracyFamily& fam, std::span<const double> x) {
  std::vector<double> logs;
  LogAggregates a{0.0, 0.0, -HUGE_VAL, HUGE_VAL};
  for (const auto& pr : fam.profiles()) {
    auto lv = pr.log_value(x);
    a.clamped = a.clamped || lv.clamped;
    logs.push_back(lv.value);
    a.log_product += lv.value;
    a.log_max = std::max(a.log_max, lv.value);
    a.log_min = std::min(a.log_min, lv.value);
  }
  a.log_sum = logsumexp(logs);
  return a;
}

// --- Koike functional -------------------------------------------------------------

namespace {

constexpr int kMuSamples = 256;

// Dense scan of phi on [0, t] followed by golden refinement on the best bracket.
// Ties keep the smallest radius.
MuResult scan_max(double t, const std::function<double(double)>& phi) {
  int best = 0;
  double best_v = phi(0.0);
  std::vector<double> vals(kMuSamples + 1);
  vals[0] = best_v;
  for (int i = 1; i <= kMuSamples; ++i) {
    vals[static_cast<std::size_t>(i)] = phi(t * i / kMuSamples);
    if (vals[static_cast<std::size_t>(i)] > best_v) {
      best_v = vals[static_cast<std::size_t>(i)];
      best = i;
    }
  }
  MuResult r{best_v, t * best / kMuSamples};
  const double lo = t * std::max(best - 1, 0) / kMuSamples;
  const double hi = t * std::min(best + 1, kMuSamples) / kMuSamples;
  auto g = numeric::golden_max(phi, lo, hi, 1e-13 * t);
  if (g.value > best_v) r = {g.value, g.x};
  return r;
}

}  // namespace

MuResult mu(double t, const Profile& g) {
  if (!(t > 0.0)) throw DomainError("mu needs t > 0");
  if (t > g.support_radius() * (1.0 + 1e-12)) throw DomainError("mu: t exceeds the support radius of '" + g.name() + "'");
  const auto& dirs = sphere_directions(g.dimension());
  Point x(static_cast<std::size_t>(g.dimension()));
  auto phi = [&](double rho) {
    double gs = -HUGE_VAL;
    for (const auto& d : dirs) {
      for (std::size_t k = 0; k < x.size(); ++k) x[k] = rho * d[k];
      gs = std::max(gs, g(x));
    }
    return gs * (t - rho);
  };
  return scan_max(t, phi);
}

MuResult log_mu(double t, int m, const std::function<double(std::span<const double>)>& log_g) {
  if (!(t > 0.0)) throw DomainError("mu needs t > 0");
  const auto& dirs = sphere_directions(m);
  Point x(static_cast<std::size_t>(m));
  auto phi = [&](double rho) {
    if (rho >= t) return -HUGE_VAL;
    double gs = -HUGE_VAL;
    for (const auto& d : dirs) {
      for (std::size_t k = 0; k < x.size(); ++k) x[k] = rho * d[k];
      gs = std::max(gs, log_g(x));
    }
    return gs + std::log(t - rho);
  };
  return scan_max(t, phi);
}

// --- classifier -------------------------------------------------------------------

std::string to_string(CriterionForm f) { return f == CriterionForm::SumProduct ? "sum-product" : "max-min"; }

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "Holds";
    case Verdict::Fails: return "Fails";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

KoikeReport classify(const DegeneracyFamily& fam, CriterionForm form, const ClassifierThresholds& th) {
  KoikeReport rep;
  rep.form = form;
  rep.thresholds = th;
  const int m = fam.m();
  const bool sum = form == CriterionForm::SumProduct;
  bool clamped_here = false;

  auto log_g = [&](std::span<const double> x) {
    auto a = log_aggregates(fam, x);
    clamped_here = clamped_here || a.clamped;
    return 0.5 * (sum ? a.log_sum : a.log_max);
  };

  for (int k = th.k_min; k <= th.k_max; ++k) {
    const double t = std::ldexp(fam.support_radius(), -k);
    clamped_here = false;
    KoikeScale s{k, t, 0.0, 0.0, 0.0, false};
    try {
      s.log_mu = log_mu(t, m, log_g).value;
      double lp = HUGE_VAL;
      Point x(static_cast<std::size_t>(m));
      for (const auto& d : sphere_directions(m)) {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = t * d[i];
        auto a = log_aggregates(fam, x);
        clamped_here = clamped_here || a.clamped;
        lp = std::min(lp, sum ? a.log_product : a.log_min);
      }
      s.log_p = lp;
    } catch (const DomainError& e) {
      rep.note = "resolution exhausted at k = " + std::to_string(k) + ": " + e.what();
      break;
    }
    if (s.log_p == 0.0 || s.log_mu == -HUGE_VAL) {
      s.c = 0.0;
    } else {
      const double mag = std::exp(s.log_mu + std::log(std::fabs(s.log_p)));
      s.c = s.log_p < 0.0 ? -mag : mag;
    }
    s.clamped = clamped_here;
    rep.any_clamped = rep.any_clamped || clamped_here;
    rep.scales.push_back(s);
  }

  const int have = static_cast<int>(rep.scales.size());
  const int expected = th.k_max - th.k_min + 1;
  if (have < std::max(th.fit_window, th.finest)) {
    rep.verdict = Verdict::Inconclusive;
    rep.slope = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }

  std::vector<double> ks, lc;
  for (int i = have - th.fit_window; i < have; ++i) {
    const auto& s = rep.scales[static_cast<std::size_t>(i)];
    ks.push_back(s.k);
    lc.push_back(s.c == 0.0 ? -HUGE_VAL : std::log(std::fabs(s.c)));
  }
  auto fit = numeric::fit_line(ks, lc);
  rep.slope = fit.slope;

  bool finest_small = true, finest_large = true;
  for (int i = have - th.finest; i < have; ++i) {
    const double c = std::fabs(rep.scales[static_cast<std::size_t>(i)].c);
    finest_small = finest_small && c < th.eps;
    finest_large = finest_large && c > th.eps;
  }

  if (finest_small || (std::isfinite(fit.slope) && fit.slope < th.holds_slope)) {
    rep.verdict = Verdict::Holds;
  } else if (finest_large && std::isfinite(fit.slope) && std::fabs(fit.slope) < th.fails_slope) {
    rep.verdict = Verdict::Fails;
  } else {
    rep.verdict = Verdict::Inconclusive;
  }
  // A truncated scale sequence never yields a verdict.
  if (have < expected) rep.verdict = Verdict::Inconclusive;
  return rep;
}

// --- w and r ----------------------------------------------------------------------

double w_of_tau(const RadialEnvelope& env, double tau) {
  if (!(tau > 0.0)) throw DomainError("w_of_tau needs tau > 0");
  std::size_t best = 0;
  double best_v = HUGE_VAL;
  for (std::size_t i = 0; i < env.radii.size(); ++i) {
    const double v = 1.0 / env.radii[i] + tau * env.f0[i];
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  const double lo = env.radii[best == 0 ? 0 : best - 1];
  const double hi = env.radii[std::min(best + 1, env.radii.size() - 1)];
  if (hi > lo) {
    auto g = numeric::golden_min([&](double s) { return 1.0 / s + tau * env.f0_at(s); }, lo, hi, 1e-12 * hi);
    best_v = std::min(best_v, g.value);
  }
  return best_v;
}

double w_of_tau(const Profile& f, double tau, const Grid& grid) { return w_of_tau(radial_envelopes(f, grid), tau); }

double r_of_tau(const RadialEnvelope& env, double tau) {
  if (!(tau > 0.0)) throw DomainError("r_of_tau needs tau > 0");
  auto F = [&](double s) { return 1.0 / s - tau * env.f0_at(s); };
  double lo = env.radii.front(), hi = env.radii.back();
  if (F(hi) > 0.0) {
    throw NoCrossing("tau f0(s_max) = " + fmt(tau * env.f0.back()) + " < 1/s_max = " + fmt(1.0 / hi));
  }
  if (F(lo) < 0.0) {
    throw NoCrossing("crossing lies below the first sample radius " + fmt(lo) + " (refine the grid)");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (F(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double r_of_tau(const Profile& f, double tau, const Grid& grid) { return r_of_tau(radial_envelopes(f, grid), tau); }

}  // namespace degenlab
