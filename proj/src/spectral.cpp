#include "degenlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "degenlab/koike.hpp"
#include "degenlab/numeric.hpp"

namespace degenlab {

EigenProblem assemble(const Profile& f, const Profile& h, double a, double eta, std::shared_ptr<const Grid> grid) {
  if (!grid) throw DomainError("assemble needs a grid");
  const int m = grid->dimension();
  if (m != 1 && m != 2) throw DomainError("eigenproblems are supported for m = 1, 2");
  if (f.dimension() != m || h.dimension() != m) throw DimensionMismatch("profile and grid dimensions differ");
  if (!(a > 0.0) || a > grid->radius() * (1.0 + 1e-12)) throw DomainError("grid does not cover B(0, a)");
  if (!(eta >= 0.0)) throw DomainError("eta must be nonnegative");

  EigenProblem p;
  p.m = m;
  p.a = a;
  p.eta = eta;
  p.grid = grid;
  const int N = grid->nodes_per_axis();
  const double edge = a * (1.0 - 1e-12);
  std::vector<long> node_of_tensor(static_cast<std::size_t>(m == 1 ? N : N * N), -1);
  std::vector<long> unknown(grid->size(), -1);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const auto t = grid->index(i);
    const long flat = m == 1 ? t[0] : static_cast<long>(t[0]) * N + t[1];
    node_of_tensor[static_cast<std::size_t>(flat)] = static_cast<long>(i);
    if (grid->node_radius(i) < edge) {
      unknown[i] = static_cast<long>(p.nodes.size());
      p.nodes.push_back(i);
    }
  }
  const auto n = static_cast<Eigen::Index>(p.nodes.size());
  if (n == 0) throw DomainError("no interior nodes");
  const double inv = 1.0 / (grid->spacing() * grid->spacing());
  p.f.resize(n);
  p.h.resize(n);
  p.M.resize(n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(2 * m + 1));
  for (Eigen::Index u = 0; u < n; ++u) {
    const std::size_t i = p.nodes[static_cast<std::size_t>(u)];
    const auto x = grid->node(i);
    const double fv = f(x), hv = h(x);
    p.f[u] = fv;
    p.h[u] = hv;
    p.M[u] = hv * hv;
    trip.emplace_back(u, u, 2.0 * m * inv + fv * fv * eta * eta);
    const auto t = grid->index(i);
    for (int axis = 0; axis < m; ++axis) {
      for (int step : {-1, 1}) {
        int ti[2] = {t[0], m == 2 ? t[1] : 0};
        ti[axis] += step;
        if (ti[axis] < 0 || ti[axis] >= N) continue;
        const long flat = m == 1 ? ti[0] : static_cast<long>(ti[0]) * N + ti[1];
        const long node = node_of_tensor[static_cast<std::size_t>(flat)];
        if (node < 0) continue;
        const long v = unknown[static_cast<std::size_t>(node)];
        if (v >= 0) trip.emplace_back(u, v, -inv);
      }
    }
  }
  p.K.resize(n, n);
  p.K.setFromTriplets(trip.begin(), trip.end());
  p.K.makeCompressed();
  return p;
}

namespace {

class ShiftedSolver {
public:
  ShiftedSolver(const Eigen::SparseMatrix<double>& a, int m, double tol) : m_(m) {
    if (m == 1) {
      ldlt_.compute(a);
      if (ldlt_.info() != Eigen::Success) throw DomainError("shifted stiffness matrix is not positive definite");
    } else {
      cg_.setTolerance(tol);
      cg_.setMaxIterations(static_cast<Eigen::Index>(std::max<Eigen::Index>(1000, 10 * a.rows())));
      cg_.compute(a);
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, const Eigen::VectorXd& guess) {
    if (m_ == 1) return ldlt_.solve(rhs);
    Eigen::VectorXd y = cg_.solveWithGuess(rhs, guess);
    if (cg_.info() != Eigen::Success) throw NotConverged("conjugate gradient did not reach its tolerance");
    return y;
  }

private:
  int m_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg_;
};

EigenResult finish(const EigenProblem& prob, const Eigen::VectorXd& vin, int it, double shift) {
  EigenResult r;
  r.grid = prob.grid;
  r.a = prob.a;
  r.iterations = it;
  r.shift = shift;
  Eigen::VectorXd v = vin;
  if (v.sum() < 0) v = -v;
  double s = 0.0;
  for (Eigen::Index u = 0; u < v.size(); ++u) s += prob.grid->weight(prob.nodes[static_cast<std::size_t>(u)]) * v[u] * v[u];
  v /= std::sqrt(s);
  const Eigen::VectorXd kv = prob.K * v;
  const Eigen::VectorXd mv = prob.M.cwiseProduct(v);
  r.lambda0 = v.dot(kv) / v.dot(mv);
  r.kv_norm = kv.norm();
  r.residual = (kv - r.lambda0 * mv).norm();
  r.v.assign(prob.grid->size(), 0.0);
  for (Eigen::Index u = 0; u < v.size(); ++u) r.v[prob.nodes[static_cast<std::size_t>(u)]] = v[u];
  return r;
}

}  // namespace

EigenResult smallest_eigen(const EigenProblem& prob, const EigenOptions& opt) {
  const Eigen::Index n = prob.K.rows();
  if (prob.M.size() != n || n == 0) throw DimensionMismatch("malformed eigenproblem");
  if (!(prob.M.maxCoeff() > 0.0)) throw DomainError("mass form vanishes identically");

  double ratio = HUGE_VAL;
  for (Eigen::Index u = 0; u < n; ++u)
    if (prob.h[u] != 0.0) ratio = std::min(ratio, (prob.f[u] / prob.h[u]) * (prob.f[u] / prob.h[u]));
  const double shift = prob.eta * prob.eta * ratio;
  Eigen::SparseMatrix<double> shifted = prob.K;
  for (Eigen::Index u = 0; u < n; ++u) shifted.coeffRef(u, u) -= shift * prob.M[u];
  ShiftedSolver solver(shifted, prob.m, opt.cg_tol);

  Eigen::VectorXd v = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  Eigen::VectorXd y = v, best = v;
  double prev = std::numeric_limits<double>::quiet_NaN(), best_rel = HUGE_VAL;
  for (int it = 1; it <= opt.max_iter; ++it) {
    y = solver.solve(prob.M.cwiseProduct(v), y);
    const double yn = y.norm();
    if (!(yn > 0.0) || !std::isfinite(yn)) throw DomainError("inverse iteration collapsed");
    const Eigen::VectorXd step = y / yn - v;
    v = y / yn;
    y = v;
    const Eigen::VectorXd kv = prob.K * v;
    const Eigen::VectorXd mv = prob.M.cwiseProduct(v);
    const double den = v.dot(mv);
    if (!(den >= 1e-300)) throw DomainError("Rayleigh denominator below 1e-300");
    const double rho = v.dot(kv) / den;
    const double res = (kv - rho * mv).norm(), kn = kv.norm();
    const double rel = res / kn;
    if (rel < best_rel) {
      best_rel = rel;
      best = v;
    }
    if (std::fabs(rho - prev) < opt.rayleigh_tol * std::fabs(rho) && res <= opt.residual_tol * kn &&
        step.norm() < opt.vector_tol)
      return finish(prob, v, it, shift);
    prev = rho;
  }
  auto r = finish(prob, best, opt.max_iter, shift);
  throw EigenNotConverged("inverse iteration did not converge in " + std::to_string(opt.max_iter) + " iterations",
                          std::move(r));
}

double mass_fraction(const EigenResult& res, double inner_radius_ratio) {
  const Grid& g = *res.grid;
  const double edge = inner_radius_ratio * res.a * (1.0 + 1e-12);
  double inner = 0.0, total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double c = g.weight(i) * res.v[i] * res.v[i];
    total += c;
    if (g.node_radius(i) <= edge) inner += c;
  }
  return inner / total;
}

namespace {

std::optional<double> inverse_along_axis(const Profile& f, double target, double a) {
  Point x(static_cast<std::size_t>(f.dimension()), 0.0);
  auto at = [&](double s) {
    x[0] = s;
    return f(x);
  };
  double prev = -HUGE_VAL;
  for (int i = 1; i <= 256; ++i) {
    const double v = at(a * i / 256.0);
    if (v < prev) return std::nullopt;
    prev = v;
  }
  double lo = a / 256.0 * 1e-6, hi = a;
  if (!(at(lo) <= target && at(hi) >= target)) return std::nullopt;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (at(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

bool is_constant(const Profile& p) { return expr::free_variables(p.expression()).empty(); }

}  // namespace

CounterexampleSeries lambda0_scan(const Profile& f, const Profile& h, double a, std::span<const double> etas,
                                  std::shared_ptr<const Grid> grid, unsigned threads, const EigenOptions& opt) {
  if (etas.size() < 2) throw DomainError("lambda0_scan needs at least two eta values");
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (!(etas[i] >= std::numbers::e)) throw DomainError("eta values must be >= e");
    if (i && !(etas[i] > etas[i - 1])) throw DomainError("eta values must be strictly increasing");
  }
  CounterexampleSeries s;
  s.a = a;
  s.etas.assign(etas.begin(), etas.end());
  const std::size_t n = etas.size();
  s.lambda0.resize(n);
  s.mass_half.resize(n);
  s.iterations.resize(n);
  s.b.resize(n);
  numeric::parallel_for(n, threads, [&](std::size_t i) {
    const auto res = smallest_eigen(assemble(f, h, a, etas[i], grid), opt);
    s.lambda0[i] = res.lambda0;
    s.mass_half[i] = mass_fraction(res, 0.5);
    s.iterations[i] = res.iterations;
    s.b[i] = inverse_along_axis(f, 1.0 / etas[i], a);
  });
  std::vector<double> l2, lnln, lnl;
  for (std::size_t i = 0; i < n; ++i) {
    const double le = std::log(etas[i]);
    l2.push_back(le * le);
    lnln.push_back(std::log(le));
    lnl.push_back(std::log(s.lambda0[i]));
  }
  const auto c1 = numeric::fit_line(l2, s.lambda0);
  s.c1 = c1.slope;
  s.c1_intercept = c1.intercept;
  s.q = numeric::fit_line(lnln, lnl).slope;
  if (is_constant(f) && is_constant(h)) {
    s.fit_meaningful = false;
    s.note = "constant f and h: lambda0 - eta^2 is constant, growth fits are not meaningful";
  }
  return s;
}

namespace {

// ln(e^z - 1) for z > 0 without overflow.
double log_expm1(double z) { return z > 30.0 ? z + std::log1p(-std::exp(-z)) : std::log(std::expm1(z)); }

}  // namespace

HoshiroReport hoshiro_ratio(const CounterexampleSeries& series, int k, double delta) {
  if (k < 0) throw DomainError("k must be nonnegative");
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  HoshiroReport r;
  r.k = k;
  r.delta = delta;
  std::vector<double> le;
  for (std::size_t i = 0; i < series.etas.size(); ++i) {
    const double s = std::sqrt(series.lambda0[i]);
    const double num = 2.0 * k * std::log(series.etas[i]) + std::log(series.mass_half[i]) + std::log(std::numbers::pi) +
                       log_expm1(s * delta) - std::log(2.0 * s);
    const double den = 2.0 * s * delta;
    r.log_ratio.push_back(num - den);
    le.push_back(std::log(series.etas[i]));
  }
  r.exponent = numeric::fit_line(le, r.log_ratio).slope;
  r.sqrt_c1_delta = std::sqrt(std::max(series.c1, 0.0)) * delta;
  r.contradiction = r.exponent > 0.0 && k > r.sqrt_c1_delta;
  return r;
}

LowerBoundReport lowerbound_check(const Profile& f, std::span<const double> taus, std::shared_ptr<const Grid> grid,
                                  double a, unsigned threads, const EigenOptions& opt) {
  if (!grid) throw DomainError("lowerbound_check needs a grid");
  const Profile one("one", f.dimension(), f.support_radius(), expr::constant(1.0));
  const auto env = radial_envelopes(f, *grid);
  LowerBoundReport rep;
  rep.rows.resize(taus.size());
  numeric::parallel_for(taus.size(), threads, [&](std::size_t i) {
    auto& row = rep.rows[i];
    row.tau = taus[i];
    row.w = w_of_tau(env, taus[i]);
    row.lambda0 = smallest_eigen(assemble(f, one, a, taus[i], grid), opt).lambda0;
    row.c = row.w * row.w / row.lambda0;
  });
  for (const auto& row : rep.rows) rep.c_max = std::max(rep.c_max, row.c);
  return rep;
}

}  // namespace degenlab
