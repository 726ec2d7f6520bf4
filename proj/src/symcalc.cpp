#include "degenlab/symcalc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "degenlab/error.hpp"
#include "degenlab/numeric.hpp"

namespace degenlab {

using expr::Expr;

namespace {

std::string xname(int i) { return "x" + std::to_string(i); }
std::string xiname(int i) { return "xi" + std::to_string(i); }

Expr d_multi(Expr e, const MultiIndex& mu, bool frequency) {
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const std::string v = frequency ? xiname(static_cast<int>(i) + 1) : xname(static_cast<int>(i) + 1);
    for (int k = 0; k < mu[i]; ++k) e = expr::differentiate(e, v);
  }
  return e;
}

ComplexExpr cd_multi(const ComplexExpr& c, const MultiIndex& mu) {
  return {d_multi(c.re, mu, false), d_multi(c.im, mu, false)};
}

ComplexExpr operator+(const ComplexExpr& a, const ComplexExpr& b) { return {a.re + b.re, a.im + b.im}; }
ComplexExpr operator*(const Expr& r, const ComplexExpr& c) { return {r * c.re, r * c.im}; }

// (-i)^k c
ComplexExpr times_minus_i(const ComplexExpr& c, int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return c;
    case 1: return {c.im, -c.re};
    case 2: return {-c.re, -c.im};
    default: return {-c.im, c.re};
  }
}

ComplexExpr zero_c() { return {expr::constant(0.0), expr::constant(0.0)}; }

/// Multi-indices of length n and total order `order`.
std::vector<MultiIndex> multi_indices(int n, int order) {
  std::vector<MultiIndex> out;
  MultiIndex cur(static_cast<std::size_t>(n), 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == n - 1) {
      cur[static_cast<std::size_t>(pos)] = left;
      out.push_back(cur);
      return;
    }
    for (int v = left; v >= 0; --v) {
      cur[static_cast<std::size_t>(pos)] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, order);
  return out;
}

double factorial_of(const MultiIndex& mu) {
  double f = 1.0;
  for (int v : mu)
    for (int k = 2; k <= v; ++k) f *= k;
  return f;
}

int order_of(const MultiIndex& mu) {
  int s = 0;
  for (int v : mu) s += v;
  return s;
}

void check_multi(const MultiIndex& mu, int n, const char* what) {
  if (!mu.empty() && mu.size() != static_cast<std::size_t>(n))
    throw DomainError(std::string(what) + " multi-index has the wrong length");
  for (int v : mu)
    if (v < 0) throw DomainError(std::string(what) + " multi-index must be nonnegative");
}

MultiIndex padded(const MultiIndex& mu, int n) { return mu.empty() ? MultiIndex(static_cast<std::size_t>(n), 0) : mu; }

std::string point_text(std::span<const double> v, int n) {
  std::string s = "(x, xi) = (";
  for (std::size_t i = 0; i < v.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v[i]);
    s += (i ? (i == static_cast<std::size_t>(n) ? "; " : ", ") : "") + std::string(buf);
  }
  return s + ")";
}

struct CProgram {
  expr::Program re, im;
  CProgram(const ComplexExpr& c, const expr::VarSet& vars) : re(c.re, vars), im(c.im, vars) {}
  double abs(std::span<const double> v) const { return std::hypot(re(v), im(v)); }
};

/// sup over directions and x of f per |xi|.
template <class F>
std::vector<double> sup_per_norm(const Lattice& lat, F&& f) {
  std::vector<double> v(static_cast<std::size_t>(2 * lat.n));
  std::vector<double> sup(lat.xi_norms.size(), 0.0);
  for (std::size_t s = 0; s < lat.xi_norms.size(); ++s)
    for (std::size_t d = 0; d < lat.directions.size(); ++d)
      for (std::size_t k = 0; k < lat.xs.size(); ++k) {
        lat.point(s, d, k, v);
        sup[s] = std::max(sup[s], std::fabs(f(std::span<const double>(v))));
      }
  return sup;
}

std::vector<double> log_brackets(const Lattice& lat) {
  std::vector<double> lb;
  for (double r : lat.xi_norms) lb.push_back(0.5 * std::log1p(r * r));
  return lb;
}

}  // namespace

SymbolExpr SymbolExpr::parse(std::string_view text, int n, double order, double rho, double eta) {
  if (n < 1) throw DomainError("symbol dimension must be at least 1");
  SymbolExpr s;
  s.e = expr::parse(text, expr::VarSet::phase_space(n));
  s.n = n;
  s.order = order;
  s.rho = rho;
  s.eta = eta;
  return s;
}

Lattice Lattice::standard(int n, double lo, double hi) {
  if (n < 1) throw DomainError("lattice dimension must be at least 1");
  if (!(lo > 0.0 && hi > lo)) throw DomainError("lattice needs 0 < lo < hi");
  Lattice l;
  l.n = n;
  l.xi_norms = numeric::logspace(lo, hi, 24);
  const auto un = static_cast<std::size_t>(n);
  if (n == 1) {
    l.directions = {{1.0}, {-1.0}};
  } else if (n == 2) {
    for (int k = 0; k < 8; ++k) {
      const double t = (k + 0.5) * std::numbers::pi / 4.0;
      l.directions.push_back({std::cos(t), std::sin(t)});
    }
  } else {
    for (std::size_t k = 0; k < un; ++k)
      for (double s : {1.0, -1.0}) {
        Point d(un, 0.0);
        d[k] = s;
        l.directions.push_back(d);
      }
  }
  if (n == 1) {
    for (int k = 0; k < 16; ++k) l.xs.push_back({0.12 * (k - 7)});
  } else {
    // Halton points in [-0.9, 0.9]^n, starting at the origin.
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
    l.xs.push_back(Point(un, 0.0));
    for (int idx = 1; l.xs.size() < 16; ++idx) {
      Point p(un);
      for (std::size_t k = 0; k < un; ++k) {
        const int b = primes[k % 8];
        double f = 1.0, r = 0.0;
        for (int i = idx; i > 0; i /= b) {
          f /= b;
          r += f * (i % b);
        }
        p[k] = -0.9 + 1.8 * r;
      }
      l.xs.push_back(p);
    }
  }
  return l;
}

void Lattice::point(std::size_t s, std::size_t d, std::size_t k, std::span<double> out) const {
  const auto un = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i < un; ++i) {
    out[i] = xs[k][i];
    out[un + i] = xi_norms[s] * directions[d][i];
  }
}

Expr japanese_bracket(int n) {
  Expr s = expr::constant(1.0);
  for (int i = 1; i <= n; ++i) s = s + expr::pow(expr::variable(xiname(i)), expr::constant(2.0));
  return expr::apply(expr::Op::Sqrt, s);
}

std::pair<double, double> evaluate(const ComplexExpr& c, const expr::VarSet& vars, std::span<const double> values) {
  const expr::Bindings b(vars, values);
  return {expr::evaluate(c.re, b), expr::evaluate(c.im, b)};
}

// --- order estimation -----------------------------------------------------------------

OrderEstimate estimate_order(const SymbolExpr& a, const MultiIndex& alpha, const MultiIndex& beta,
                             const Lattice& lattice) {
  if (lattice.n != a.n) throw DimensionMismatch("lattice and symbol dimensions differ");
  check_multi(alpha, a.n, "alpha");
  check_multi(beta, a.n, "beta");
  const MultiIndex al = padded(alpha, a.n), be = padded(beta, a.n);
  if (order_of(al) + order_of(be) > 3) throw DomainError("estimate_order supports |alpha| + |beta| <= 3");

  OrderEstimate r;
  r.nominal = a.order - a.rho * order_of(be) + a.eta * order_of(al);
  const Expr d = d_multi(d_multi(a.e, al, false), be, true);
  const expr::Program prog(d, a.variables());
  const auto sup = sup_per_norm(lattice, [&](std::span<const double> v) { return prog(v); });
  for (double v : sup)
    if (!std::isfinite(v)) throw DomainError("derivative is not finite on the lattice");
  if (std::all_of(sup.begin(), sup.end(), [](double v) { return v == 0.0; })) {
    r.slope = -HUGE_VAL;
    r.rss = 0.0;
    return r;
  }
  const auto lb = log_brackets(lattice);
  std::vector<double> y(sup.size());
  numeric::LineFit best;
  std::vector<numeric::LineFit> fits;
  for (int k = 0; k <= 3; ++k) {
    for (std::size_t i = 0; i < sup.size(); ++i) y[i] = std::log(sup[i]) - k * std::log(lb[i]);
    fits.push_back(numeric::fit_line(lb, y));
  }
  int pick = 0;
  for (int k = 1; k <= 3; ++k)
    if (fits[static_cast<std::size_t>(k)].rss < fits[static_cast<std::size_t>(pick)].rss) pick = k;
  if (pick > 0 && !(fits[static_cast<std::size_t>(pick)].rss < 0.1 * fits[0].rss)) pick = 0;
  best = fits[static_cast<std::size_t>(pick)];
  r.slope = best.slope;
  r.rss = best.rss;
  r.log_power = pick;
  r.log_flag = pick > 0;
  for (std::size_t i = 0; i < sup.size(); ++i)
    r.constant = std::max(r.constant, sup[i] / (std::exp(r.slope * lb[i]) * std::pow(lb[i], pick)));
  r.consistent = r.slope <= r.nominal + 0.05;
  return r;
}

// --- parametrix -------------------------------------------------------------------------

ParametrixChain parametrix(const SymbolExpr& a, int M, const Lattice& lattice) {
  if (M < 0 || M > 2) throw DomainError("parametrix order M must be 0, 1 or 2");
  if (lattice.n != a.n) throw DimensionMismatch("lattice and symbol dimensions differ");
  const int n = a.n;
  const auto vars = a.variables();

  // Empirical ellipticity |a| >= c |xi|^m: bounded below and not decaying in |xi|.
  ParametrixChain c;
  c.a = a;
  c.ellipticity = HUGE_VAL;
  {
    const expr::Program prog(a.e, vars);
    std::vector<double> v(static_cast<std::size_t>(2 * n)), worst, last;
    std::vector<double> per(lattice.xi_norms.size(), HUGE_VAL), logs;
    for (std::size_t s = 0; s < lattice.xi_norms.size(); ++s) {
      for (std::size_t d = 0; d < lattice.directions.size(); ++d)
        for (std::size_t k = 0; k < lattice.xs.size(); ++k) {
          lattice.point(s, d, k, v);
          double q = std::fabs(prog(v)) / std::pow(lattice.xi_norms[s], a.order);
          if (!std::isfinite(q)) q = 0.0;
          if (q < per[s]) {
            per[s] = q;
            if (s + 1 == per.size()) last = v;
          }
          if (q < c.ellipticity) {
            c.ellipticity = q;
            worst = v;
          }
        }
      logs.push_back(std::log(lattice.xi_norms[s]));
    }
    if (!(c.ellipticity > 1e-10))
      throw NotElliptic("|a| / |xi|^m = " + std::to_string(c.ellipticity) + " at " + point_text(worst, n));
    std::vector<double> y;
    for (double q : per) y.push_back(std::log(q));
    const double trend = numeric::fit_line(logs, y).slope;
    if (trend < -0.1)
      throw NotElliptic("min |a| / |xi|^m decays like |xi|^" + std::to_string(trend) + "; smallest at " +
                        point_text(last, n));
  }

  const ComplexExpr b0{expr::constant(1.0) / a.e, expr::constant(0.0)};
  c.b.push_back(b0);
  for (int j = 1; j <= M; ++j) {
    ComplexExpr acc = zero_c();
    for (int ord = 1; ord <= j; ++ord) {
      for (const auto& mu : multi_indices(n, ord)) {
        const Expr da = d_multi(a.e, mu, true);
        if (da.is_const(0.0)) continue;
        const ComplexExpr db = times_minus_i(cd_multi(c.b[static_cast<std::size_t>(j - ord)], mu), ord);
        if (db.is_zero()) continue;
        acc = acc + (expr::constant(1.0 / factorial_of(mu)) * da) * db;
      }
    }
    c.b.push_back((-b0.re) * acc);
  }

  // Displayed first-order term: i b0 grad_xi a . grad_x b0.
  Expr dot = expr::constant(0.0);
  for (int i = 1; i <= n; ++i)
    dot = dot + expr::differentiate(a.e, xiname(i)) * expr::differentiate(b0.re, xname(i));
  c.b1_displayed = {expr::constant(0.0), b0.re * dot};

  c.sum = c.b.front();
  for (std::size_t j = 1; j < c.b.size(); ++j) c.sum = c.sum + c.b[j];
  return c;
}

ResidualReport residual_order(const ParametrixChain& chain, const Lattice& lattice) {
  const SymbolExpr& a = chain.a;
  const int n = a.n;
  const int M = static_cast<int>(chain.b.size()) - 1;
  ResidualReport r;

  ComplexExpr res = zero_c();
  for (std::size_t j = 1; j < chain.b.size(); ++j) res = res + a.e * chain.b[j];
  for (int ord = 1; ord <= M + 2; ++ord) {
    for (const auto& mu : multi_indices(n, ord)) {
      const Expr da = d_multi(a.e, mu, true);
      if (da.is_const(0.0)) continue;
      const ComplexExpr db = times_minus_i(cd_multi(chain.sum, mu), ord);
      if (db.is_zero()) continue;
      res = res + (expr::constant(1.0 / factorial_of(mu)) * da) * db;
    }
  }
  r.residual = res;
  r.xi_norms = lattice.xi_norms;
  if (res.is_zero()) {
    r.slope = -HUGE_VAL;
    r.sup_abs.assign(lattice.xi_norms.size(), 0.0);
    return r;
  }
  const CProgram prog(res, a.variables());
  r.sup_abs = sup_per_norm(lattice, [&](std::span<const double> v) { return prog.abs(v); });
  if (std::all_of(r.sup_abs.begin(), r.sup_abs.end(), [](double v) { return v == 0.0; })) {
    r.slope = -HUGE_VAL;
    return r;
  }
  std::vector<double> y;
  for (double v : r.sup_abs) y.push_back(std::log(v));
  r.slope = numeric::fit_line(log_brackets(lattice), y).slope;
  return r;
}

// --- brackets and weights -------------------------------------------------------------

Expr poisson_bracket(const Expr& f, const Expr& g, int n) {
  if (f == g) return expr::constant(0.0);
  Expr s = expr::constant(0.0);
  for (int i = 1; i <= n; ++i) {
    const auto xi = xiname(i), x = xname(i);
    s = s + (expr::differentiate(f, xi) * expr::differentiate(g, x) -
             expr::differentiate(f, x) * expr::differentiate(g, xi));
  }
  return s;
}

SymbolExpr poisson_bracket(const SymbolExpr& f, const SymbolExpr& g) {
  if (f.n != g.n) throw DimensionMismatch("symbols live on different phase spaces");
  SymbolExpr s;
  s.e = poisson_bracket(f.e, g.e, f.n);
  s.n = f.n;
  s.rho = std::min(f.rho, g.rho);
  s.eta = std::max(f.eta, g.eta);
  s.order = f.order + g.order - (s.rho - s.eta);
  return s;
}

WeightSymbol weight_symbol(double gamma, double n0, const SymbolExpr& psi, const Lattice& lattice) {
  if (lattice.n != psi.n) throw DimensionMismatch("lattice and symbol dimensions differ");
  const int n = psi.n;
  const auto vars = psi.variables();
  const expr::Program prog(psi.e, vars);
  std::vector<double> v(static_cast<std::size_t>(2 * n)), w(v.size());
  for (std::size_t s = 0; s < lattice.xi_norms.size(); ++s)
    for (std::size_t d = 0; d < lattice.directions.size(); ++d)
      for (std::size_t k = 0; k < lattice.xs.size(); ++k) {
        lattice.point(s, d, k, v);
        const double p = prog(v);
        if (!(p >= -1e-12)) throw PsiNegative("psi = " + std::to_string(p) + " at " + point_text(v, n));
        for (double c : {2.0, 10.0}) {
          w = v;
          for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(n + i)] *= c;
          const double q = prog(w);
          if (!(std::fabs(q - p) <= 1e-9 * (1.0 + std::fabs(p))))
            throw PsiNotHomogeneous("psi(x, " + std::to_string(c) + " xi) = " + std::to_string(q) + " but psi = " +
                                    std::to_string(p) + " at " + point_text(v, n));
        }
      }

  std::vector<Expr> xis;
  for (int i = 1; i <= n; ++i) xis.push_back(expr::variable(xiname(i)));
  const Expr norm = expr::node(expr::Op::Norm, xis);
  const Expr L = expr::node(expr::Op::Max, {norm, expr::constant(std::numbers::e)});
  const Expr logL = expr::apply(expr::Op::Log, L);
  const Expr expo = expr::constant(gamma) * logL - expr::constant(n0) * logL * psi.e;

  WeightSymbol ws;
  ws.lambda.e = expr::apply(expr::Op::Exp, expo);
  ws.lambda.n = n;
  ws.lambda.order = gamma;
  ws.lambda.rho = 1.0;
  ws.lambda.eta = 0.0;
  ws.log_lambda = ws.lambda;
  ws.log_lambda.e = expo;
  ws.log_lambda.order = 0.0;
  ws.log_lambda.log_power = 1;
  return ws;
}

SymbolExpr psi_template(int n, int m, double rho) {
  if (m < 1 || m > n) throw DomainError("psi template needs 1 <= m <= n");
  if (!(rho > 0.0)) throw DomainError("psi template needs rho > 0");
  std::vector<Expr> xis;
  for (int i = 1; i <= n; ++i) xis.push_back(expr::variable(xiname(i)));
  const Expr xinorm = expr::node(expr::Op::Norm, xis);
  std::vector<Expr> parts;
  for (int i = 1; i <= n; ++i) parts.push_back(expr::variable(xname(i)));
  for (int i = 1; i <= m; ++i) parts.push_back(expr::variable(xiname(i)) / xinorm);
  const Expr r = expr::node(expr::Op::Norm, parts);
  const Expr t = (r - expr::constant(rho)) / expr::constant(2.0 * rho);
  const Expr tc = expr::node(expr::Op::Min, {expr::node(expr::Op::Max, {t, expr::constant(0.0)}), expr::constant(1.0)});
  const Expr poly = expr::constant(10.0) - expr::constant(15.0) * tc + expr::constant(6.0) * tc * tc;
  SymbolExpr s;
  s.e = tc * tc * tc * poly;
  s.n = n;
  s.order = 0.0;
  return s;
}

R1Symbol r1_symbol(const MatrixFunction& q, int n, int p, double s, const Lattice& lattice,
                   std::span<const Point> samples) {
  if (p < 1 || p > n) throw DomainError("r1_symbol needs 1 <= p <= n");
  const int sz = n - p + 1;
  if (q.size() != sz) throw DimensionMismatch("Q must be (n - p + 1) square");
  if (q.nvars() > n) throw DimensionMismatch("Q depends on more than n variables");
  if (lattice.n != n) throw DimensionMismatch("lattice and symbol dimensions differ");

  R1Symbol r;
  r.n = n;
  r.p = p;
  r.s = s;
  const Expr jb2 = expr::constant(1.0) + [&] {
    Expr t = expr::constant(0.0);
    for (int i = 1; i <= n; ++i) t = t + expr::pow(expr::variable(xiname(i)), expr::constant(2.0));
    return t;
  }();
  r.entries.assign(static_cast<std::size_t>(sz), std::vector<ComplexExpr>(static_cast<std::size_t>(sz), zero_c()));
  for (int i = 1; i <= sz; ++i) {
    const Expr xi_i = expr::variable(xiname(p - 1 + i));
    for (int j = 1; j <= sz; ++j) {
      Expr acc = expr::constant(0.0);
      for (int k = 1; k <= q.nvars(); ++k) {
        const Expr dq = expr::differentiate(q.entry(i, j), xname(k));
        if (dq.is_const(0.0)) continue;
        acc = acc + dq * expr::variable(xiname(k)) * xi_i;
      }
      if (!acc.is_const(0.0)) r.entries[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] = {expr::constant(0.0), -(acc / jb2)};
    }
  }

  std::vector<double> v(static_cast<std::size_t>(2 * n));
  for (std::size_t si = 0; si < lattice.xi_norms.size(); ++si)
    for (std::size_t d = 0; d < lattice.directions.size(); ++d) {
      lattice.point(si, d, 0, v);
      const double b2 = 1.0 + lattice.xi_norms[si] * lattice.xi_norms[si];
      for (int k = 0; k < n; ++k)
        for (int i = p - 1; i < n; ++i)
          r.theta_max = std::max(r.theta_max, std::fabs(v[static_cast<std::size_t>(n + k)] *
                                                           v[static_cast<std::size_t>(n + i)]) / b2);
    }
  r.theta_bounded = r.theta_max <= 1.0;
  if (!samples.empty()) r.subunit = check_subordinate(q, samples);
  return r;
}

}  // namespace degenlab
