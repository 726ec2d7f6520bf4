#include "degenlab/matrixcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "degenlab/error.hpp"
#include "degenlab/numeric.hpp"

namespace degenlab {

// --- MatrixFunction ---------------------------------------------------------------

MatrixFunction::MatrixFunction(int size, int nvars) : size_(size), nvars_(nvars), vars_(expr::VarSet::spatial(nvars)) {
  if (size_ < 1) throw DimensionMismatch("matrix size must be positive");
  const auto cells = static_cast<std::size_t>(size_ * (size_ + 1) / 2);
  entries_.assign(cells, expr::constant(0.0));
  for (const auto& e : entries_) programs_.emplace_back(e, vars_);
}

std::size_t MatrixFunction::slot(int k, int j) const {
  if (k > j) std::swap(k, j);
  if (k < 1 || j > size_) throw DimensionMismatch("entry (" + std::to_string(k) + ", " + std::to_string(j) + ") outside a " + std::to_string(size_) + "x" + std::to_string(size_) + " matrix");
  // Row-major upper triangle, 1-based.
  const int row = k - 1;
  return static_cast<std::size_t>(row * size_ - row * (row - 1) / 2 + (j - k));
}

void MatrixFunction::set(int k, int j, expr::Expr e) {
  for (const auto& v : expr::free_variables(e)) {
    if (!vars_.contains(v)) throw UnknownVariable(v + " in matrix entry");
  }
  const std::size_t s = slot(k, j);
  programs_[s] = expr::Program(e, vars_);
  entries_[s] = std::move(e);
}

void MatrixFunction::set(int k, int j, std::string_view text) { set(k, j, expr::parse(text, vars_)); }

const expr::Expr& MatrixFunction::entry(int k, int j) const { return entries_[slot(k, j)]; }

double MatrixFunction::eval_entry(int k, int j, std::span<const double> x) const { return programs_[slot(k, j)](x); }

Eigen::MatrixXd MatrixFunction::operator()(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != nvars_) throw DimensionMismatch("matrix function expects " + std::to_string(nvars_) + " coordinates");
  Eigen::MatrixXd m(size_, size_);
  for (int k = 1; k <= size_; ++k) {
    for (int j = k; j <= size_; ++j) {
      const double v = programs_[slot(k, j)](x);
      m(k - 1, j - 1) = v;
      m(j - 1, k - 1) = v;
    }
  }
  return m;
}

MatrixFunction MatrixFunction::derivative(int var) const {
  MatrixFunction d(size_, nvars_);
  const std::string& name = vars_.names().at(static_cast<std::size_t>(var - 1));
  for (int k = 1; k <= size_; ++k) {
    for (int j = k; j <= size_; ++j) d.set(k, j, expr::differentiate(entry(k, j), name));
  }
  return d;
}

GrushinMatrix::GrushinMatrix(int n, int m, int p, MatrixFunction a) : n_(n), m_(m), p_(p), a_(std::move(a)) {
  if (!(1 <= m_ && m_ < p_ && p_ <= n_ + 1)) throw DimensionMismatch("need 1 <= m < p <= n + 1");
  if (a_.size() != n_ || a_.nvars() != n_) throw DimensionMismatch("Grushin matrix must be n x n in x1..xn");
}

std::vector<Point> sample_points(const Grid& grid, int n, double exclude_radius) {
  if (n < grid.dimension()) throw DimensionMismatch("grid has more dimensions than the matrix variables");
  std::vector<Point> pts;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.node_radius(i) < exclude_radius * (1.0 - 1e-9)) continue;
    Point x(static_cast<std::size_t>(n), 0.0);
    std::copy(grid.node(i).begin(), grid.node(i).end(), x.begin());
    pts.push_back(std::move(x));
  }
  return pts;
}

// --- generalized eigenvalues on a range -------------------------------------------

namespace {

struct RangeEig {
  double lo = HUGE_VAL;
  double hi = -HUGE_VAL;
  bool mismatch = false;
  Eigen::VectorXd witness;
};

// Generalized eigenvalues of (A, B) restricted to the numerical range of B.
// Directions in null(B) where the A-form exceeds the floor are a mismatch.
RangeEig range_eig(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  RangeEig out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sb(b);
  const Eigen::VectorXd s = sb.eigenvalues();
  const Eigen::MatrixXd u = sb.eigenvectors();
  const double trb = std::max(b.trace(), 0.0);
  const double floor_b = 1e-12 * trb;
  const double floor_a = 1e-12 * std::max({trb, std::fabs(a.trace()), 1e-300});
  std::vector<int> range, null;
  for (int i = 0; i < s.size(); ++i) (s(i) > floor_b && trb > 0.0 ? range : null).push_back(i);

  double worst = floor_a;
  for (int i : null) {
    const Eigen::VectorXd w = u.col(i);
    const double form = w.dot(a * w);
    if (form > worst) {
      worst = form;
      out.mismatch = true;
      out.witness = w;
    }
  }
  if (range.empty()) return out;
  Eigen::MatrixXd ur(b.rows(), static_cast<Eigen::Index>(range.size()));
  Eigen::VectorXd inv_sqrt(static_cast<Eigen::Index>(range.size()));
  for (std::size_t c = 0; c < range.size(); ++c) {
    ur.col(static_cast<Eigen::Index>(c)) = u.col(range[c]);
    inv_sqrt(static_cast<Eigen::Index>(c)) = 1.0 / std::sqrt(s(range[c]));
  }
  const Eigen::MatrixXd c = inv_sqrt.asDiagonal() * (ur.transpose() * a * ur) * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sc(0.5 * (c + c.transpose()), Eigen::EigenvaluesOnly);
  out.lo = sc.eigenvalues().minCoeff();
  out.hi = sc.eigenvalues().maxCoeff();
  return out;
}

void require_psd(const Eigen::MatrixXd& b, std::span<const double> x, const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sb(b, Eigen::EigenvaluesOnly);
  const double lo = sb.eigenvalues().minCoeff();
  if (lo < -1e-10) {
    std::string at;
    for (double c : x) at += (at.empty() ? "" : ", ") + std::to_string(c);
    throw NotPSD(std::string(what) + " has eigenvalue " + std::to_string(lo) + " at (" + at + ")");
  }
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

ComparabilityResult comparability(const MatrixFunction& a, const MatrixFunction& b, std::span<const Point> samples) {
  if (a.size() != b.size()) throw DimensionMismatch("comparability needs matrices of equal size");
  ComparabilityResult out;
  for (const auto& x : samples) {
    const Eigen::MatrixXd bm = b(x);
    require_psd(bm, x, "B");
    auto r = range_eig(a(x), bm);
    if (r.mismatch && out.comparable) {
      out.comparable = false;
      out.witness_x = x;
      out.witness_xi = to_std(r.witness);
    }
    out.beta = std::min(out.beta, r.lo);
    out.alpha = std::max(out.alpha, r.hi);
  }
  if (out.beta == HUGE_VAL) out.beta = 0.0;
  if (!(out.beta > 0.0)) out.comparable = false;
  return out;
}

SubordinateResult check_subordinate(const MatrixFunction& a, std::span<const Point> samples) {
  SubordinateResult out;
  std::vector<MatrixFunction> da;
  for (int k = 1; k <= a.nvars(); ++k) da.push_back(a.derivative(k));
  for (const auto& x : samples) {
    const Eigen::MatrixXd am = a(x);
    for (int k = 1; k <= a.nvars(); ++k) {
      const Eigen::MatrixXd d = da[static_cast<std::size_t>(k - 1)](x);
      auto r = range_eig(d.transpose() * d, am);
      if (r.mismatch) {
        if (!out.range_mismatch) {
          out.range_mismatch = true;
          out.worst_var = k;
          out.witness_x = x;
          out.witness_xi = to_std(r.witness);
        }
        continue;
      }
      if (r.hi > out.constant) {
        out.constant = r.hi;
        if (!out.range_mismatch) {
          out.worst_var = k;
          out.witness_x = x;
        }
      }
    }
  }
  if (out.range_mismatch) out.constant = HUGE_VAL;
  return out;
}

QuasiconformalResult check_quasiconformal(const MatrixFunction& q, std::span<const Point> samples, double cap,
                                          double floor) {
  QuasiconformalResult out;
  double worst = 0.0;
  for (const auto& x : samples) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s(q(x), Eigen::EigenvaluesOnly);
    const double lo = s.eigenvalues().minCoeff();
    const double hi = s.eigenvalues().maxCoeff();
    if (lo < -1e-10) {
      if (out.ok || out.reason != "negative eigenvalue") {
        out.ok = false;
        out.reason = "negative eigenvalue";
        out.where = x;
        out.lambda_min = lo;
        out.lambda_max = hi;
      }
      continue;
    }
    if (hi <= floor) continue;
    const double ratio = lo > 0.0 ? hi / lo : HUGE_VAL;
    out.ratio_bound = std::max(out.ratio_bound, ratio);
    if (ratio > cap && ratio > worst && out.reason != "negative eigenvalue") {
      worst = ratio;
      out.ok = false;
      out.reason = "eigenvalue ratio exceeds cap";
      out.where = x;
      out.lambda_min = lo;
      out.lambda_max = hi;
    }
  }
  return out;
}

// --- differential estimates -------------------------------------------------------

EstimateParams::EstimateParams(double eps_, double delta_, double delta2_)
    : eps(eps_), delta(delta_), delta2(delta2_), delta_prime(2.0 * delta_ * (1.0 + delta_) / (2.0 + delta_)) {
  if (!(eps >= 0.25 && eps < 1.0)) throw DomainError("eps must lie in [1/4, 1)");
  if (!(delta > 0.0 && delta < delta2)) throw DomainError("need 0 < delta < delta''");
  if (!(delta2 < 0.5)) throw DomainError("need delta'' < 1/2");
}

namespace {

void multi_indices(int nvars, int order, MultiIndex& cur, int pos, std::vector<MultiIndex>& out) {
  if (pos == nvars - 1) {
    cur[static_cast<std::size_t>(pos)] = order;
    out.push_back(cur);
    return;
  }
  for (int a = order; a >= 0; --a) {
    cur[static_cast<std::size_t>(pos)] = a;
    multi_indices(nvars, order - a, cur, pos + 1, out);
  }
}

std::vector<MultiIndex> multi_indices(int nvars, int order) {
  std::vector<MultiIndex> out;
  MultiIndex cur(static_cast<std::size_t>(nvars), 0);
  multi_indices(nvars, order, cur, 0, out);
  return out;
}

// Memoized D^mu of one expression.
class DerivativeCache {
public:
  DerivativeCache(expr::Expr e, const expr::VarSet& vars) : vars_(vars) {
    cache_[MultiIndex(vars.size(), 0)] = std::move(e);
  }
  const expr::Expr& get(const MultiIndex& mu) {
    auto it = cache_.find(mu);
    if (it != cache_.end()) return it->second;
    std::size_t i = 0;
    while (mu[i] == 0) ++i;
    MultiIndex lower = mu;
    --lower[i];
    expr::Expr d = expr::differentiate(get(lower), vars_.names()[i]);
    return cache_.emplace(mu, std::move(d)).first->second;
  }

private:
  const expr::VarSet& vars_;
  std::map<MultiIndex, expr::Expr> cache_;
};

double safe_eval(const expr::Program& p, std::span<const double> x, bool& ok) {
  try {
    ok = true;
    return p(x);
  } catch (const DomainError&) {
    ok = false;
    return 0.0;
  }
}

// Profile of e over R^n extended at the origin by its limit along x1.
Profile continuous_profile(const expr::Expr& e, int n, double radius) {
  Profile p("entry", n, radius, e);
  Point zero(static_cast<std::size_t>(n), 0.0);
  try {
    p(zero);
    return p;
  } catch (const DomainError&) {
  }
  Point near = zero;
  near[0] = 1e-6 * radius;
  double v = 0.0;
  try {
    v = p(near);
    if (!std::isfinite(v)) v = 0.0;
  } catch (const DomainError&) {
  }
  return Profile("entry", n, radius, e, v);
}

}  // namespace

DifferentialReport check_differential_estimates(const GrushinMatrix& a, const EstimateParams& params, const Grid& grid,
                                                const DifferentialOptions& opt) {
  DifferentialReport rep;
  rep.delta_prime = params.delta_prime;
  const int n = a.n();
  const int p = a.p();
  const auto& mf = a.matrix();
  const double dx = grid.spacing();
  const double r_min = std::max(dx, opt.min_radius);
  const auto samples = sample_points(grid, n, r_min);
  const double fit_hi = std::max(10.0 * dx, 0.1 * grid.radius());

  std::vector<expr::Program> diag;
  for (int s = 1; s <= n; ++s) diag.emplace_back(mf.entry(s, s), mf.variables());

  struct Target {
    int k, j;
    std::string regime;
    int min_upto;  // base = min_{1<=s<=min_upto} a_ss, or a_kk when diag
    int mu_lo;
  };
  std::vector<Target> targets;
  for (int k = 1; k <= std::min(p - 1, n); ++k) targets.push_back({k, k, "diag", 0, 1});
  for (int k = 1; k <= std::min(p - 1, n); ++k) {
    for (int j = k + 1; j <= n; ++j) {
      if (j <= p - 1) {
        targets.push_back({k, j, "offdiag_inner", j, 0});
      } else {
        targets.push_back({k, j, "offdiag_tail", k, 0});
      }
    }
  }

  std::vector<double> base_vals(samples.size());
  for (const auto& tg : targets) {
    DerivativeCache cache(mf.entry(tg.k, tg.j), mf.variables());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      bool ok = true;
      if (tg.regime == "diag") {
        base_vals[i] = safe_eval(diag[static_cast<std::size_t>(tg.k - 1)], samples[i], ok);
      } else {
        double b = HUGE_VAL;
        for (int s = 1; s <= tg.min_upto; ++s) b = std::min(b, safe_eval(diag[static_cast<std::size_t>(s - 1)], samples[i], ok));
        base_vals[i] = b;
      }
      if (!ok) base_vals[i] = std::numeric_limits<double>::quiet_NaN();
    }

    for (int order = tg.mu_lo; order <= 4; ++order) {
      const double exponent = tg.regime == "diag"
                                  ? std::max(1.0 - order * params.eps, 0.0) + params.delta_prime
                                  : std::max(0.5 + (2 - order) * params.eps, 0.0) + params.delta2;
      for (const auto& mu : multi_indices(n, order)) {
        const expr::Expr& d = cache.get(mu);
        EntryEstimate est{tg.k, tg.j, tg.regime, mu, exponent, 0.0, {}, std::numeric_limits<double>::quiet_NaN(), false};
        if (d.is_const(0.0)) {
          rep.entries.push_back(std::move(est));
          continue;
        }
        const expr::Program prog(d, mf.variables());
        std::vector<double> lr, lratio;
        double best_log = -HUGE_VAL;
        for (std::size_t i = 0; i < samples.size(); ++i) {
          bool ok = true;
          const double v = safe_eval(prog, samples[i], ok);
          const double b = base_vals[i];
          if (!ok || std::isnan(b)) continue;
          double log_ratio;
          if (v == 0.0) {
            log_ratio = -HUGE_VAL;
          } else if (b <= 0.0) {
            log_ratio = HUGE_VAL;
          } else {
            log_ratio = std::log(std::fabs(v)) - exponent * std::log(b);
          }
          if (log_ratio > best_log) {
            best_log = log_ratio;
            est.argmax = samples[i];
          }
          const double r = euclidean_norm(samples[i]);
          if (r <= fit_hi && std::isfinite(log_ratio)) {
            lr.push_back(std::log(r));
            lratio.push_back(log_ratio);
          }
        }
        est.constant = std::exp(best_log);
        est.growth_slope = numeric::fit_line(lr, lratio).slope;
        est.flagged = est.constant > opt.cap || (std::isfinite(est.growth_slope) && est.growth_slope < opt.growth_slope);
        rep.pass = rep.pass && !est.flagged;
        rep.entries.push_back(std::move(est));
      }
    }

    if (!opt.seminorms) continue;
    // [D^mu a]_{2 delta} <= 1 at |mu| = 4, at the origin and a few nodes.
    std::vector<Point> at{Point(static_cast<std::size_t>(n), 0.0)};
    for (std::size_t s = 0; s < samples.size(); s += std::max<std::size_t>(1, samples.size() / 4)) at.push_back(samples[s]);
    std::vector<int> axes;
    for (int c = 0; c < grid.dimension(); ++c) axes.push_back(c);
    const double window = 8.0 * dx;
    for (const auto& mu : multi_indices(n, 4)) {
      const expr::Expr& d = cache.get(mu);
      SeminormEstimate se{tg.k, tg.j, tg.regime, mu, 0.0, at.front(), false};
      if (!d.is_const()) {
        const Profile prof = continuous_profile(d, n, grid.radius() * std::sqrt(static_cast<double>(grid.dimension())));
        for (const auto& x : at) {
          try {
            const double v = holder_seminorm(prof, MultiIndex(static_cast<std::size_t>(n), 0), 2.0 * params.delta, x, window, axes);
            if (v > se.value) {
              se.value = v;
              se.at = x;
            }
          } catch (const DomainError&) {
          }
        }
      }
      se.flagged = se.value > opt.cap;
      rep.pass = rep.pass && !se.flagged;
      rep.seminorms.push_back(std::move(se));
    }
  }
  return rep;
}

// --- sum of squares ---------------------------------------------------------------

SosReport verify_sos(const GrushinMatrix& a, const SosDecomposition& cand, const Grid& grid, const SosOptions& opt) {
  const int n = a.n();
  const int p = a.p();
  if (static_cast<int>(cand.x.size()) > p - 1) throw DimensionMismatch("more vector groups than p - 1");
  for (const auto& group : cand.x) {
    for (const auto& v : group) {
      if (static_cast<int>(v.size()) != n) throw DimensionMismatch("vector field of length " + std::to_string(v.size()) + ", expected " + std::to_string(n));
    }
  }
  if (p <= n) {
    if (!cand.q || cand.q->size() != n - p + 1) throw DimensionMismatch("Q_p must be (n-p+1) x (n-p+1)");
  } else if (cand.q) {
    throw DimensionMismatch("Q_p given but p = n + 1 leaves no block");
  }

  const expr::VarSet vars = expr::VarSet::spatial(n);
  std::vector<std::vector<std::vector<expr::Program>>> xp;
  for (const auto& group : cand.x) {
    auto& g = xp.emplace_back();
    for (const auto& v : group) {
      auto& comp = g.emplace_back();
      for (const auto& e : v) comp.emplace_back(e, vars);
    }
  }

  SosReport rep;
  const auto samples = sample_points(grid, n);
  rep.sandwich.resize(static_cast<std::size_t>(std::min(p - 1, n)));
  for (std::size_t k = 0; k < rep.sandwich.size(); ++k) rep.sandwich[k] = {static_cast<int>(k + 1), HUGE_VAL, 0.0, true, {}};

  auto eval_vec = [&](const std::vector<expr::Program>& comp, std::span<const double> x) {
    Eigen::VectorXd v(n);
    for (int c = 0; c < n; ++c) v(c) = comp[static_cast<std::size_t>(c)](x);
    return v;
  };

  for (const auto& x : samples) {
    Eigen::MatrixXd am, sum = Eigen::MatrixXd::Zero(n, n);
    std::vector<Eigen::MatrixXd> z;
    try {
      am = a(x);
      for (const auto& g : xp) {
        Eigen::MatrixXd zk = Eigen::MatrixXd::Zero(n, n);
        for (const auto& comp : g) {
          const Eigen::VectorXd v = eval_vec(comp, x);
          zk += v * v.transpose();
        }
        sum += zk;
        z.push_back(std::move(zk));
      }
      if (cand.q) sum.bottomRightCorner(n - p + 1, n - p + 1) += (*cand.q)(x);
    } catch (const DomainError&) {
      continue;
    }
    const double res = (am - sum).cwiseAbs().maxCoeff();
    if (res > rep.residual) {
      rep.residual = res;
      rep.residual_at = x;
    }

    // c a_kk e_k e_k^T <= Z_k + sum_{m>k} a_mm e_m e_m^T <= C sum_{m>=k} a_mm e_m e_m^T
    for (std::size_t k = 0; k < rep.sandwich.size(); ++k) {
      auto& row = rep.sandwich[k];
      const int kk = static_cast<int>(k);
      Eigen::MatrixXd mk = k < z.size() ? z[k] : Eigen::MatrixXd::Zero(n, n);
      Eigen::MatrixXd dk = Eigen::MatrixXd::Zero(n, n);
      for (int m = kk; m < n; ++m) {
        if (m > kk) mk(m, m) += am(m, m);
        dk(m, m) = am(m, m);
      }
      const double akk = am(kk, kk);
      if (akk > 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s(mk);
        const double floor = 1e-12 * std::max(mk.trace(), 1e-300);
        double quad = 0.0;
        bool in_range = true;
        for (int i = 0; i < n; ++i) {
          const double c = s.eigenvectors()(kk, i);
          if (s.eigenvalues()(i) > floor) {
            quad += c * c / s.eigenvalues()(i);
          } else if (c * c > 1e-12) {
            in_range = false;
          }
        }
        const double c = in_range ? 1.0 / (akk * quad) : 0.0;
        if (c < row.lower) {
          row.lower = c;
          row.witness_x = x;
        }
      }
      auto r = range_eig(mk, dk);
      const double up = r.mismatch ? HUGE_VAL : r.hi;
      if (up > row.upper) {
        row.upper = up;
        if (r.mismatch) row.witness_x = x;
      }
    }
  }
  rep.residual_ok = rep.residual <= opt.residual_tol;
  for (auto& row : rep.sandwich) {
    if (row.lower == HUGE_VAL) row.lower = 0.0;
    row.pass = row.lower >= 1.0 / opt.cap && row.upper <= opt.cap;
    rep.sandwich_ok = rep.sandwich_ok && row.pass;
  }

  if (cand.q) {
    MatrixFunction app(n - p + 1, n);
    for (int i = 1; i <= n - p + 1; ++i) app.set(i, i, a.matrix().entry(p, p));
    rep.q_vs_app = comparability(*cand.q, app, samples);
    rep.q_ok = rep.q_vs_app->comparable && rep.q_vs_app->beta >= 1.0 / opt.cap && rep.q_vs_app->alpha <= opt.cap;
  }

  // C^{2,delta}: Hoelder seminorm of the second derivatives of every component.
  std::vector<Point> at{Point(static_cast<std::size_t>(n), 0.0)};
  const auto nodes = sample_points(grid, n, grid.spacing());
  for (std::size_t s = 0; s < nodes.size(); s += std::max<std::size_t>(1, nodes.size() / 4)) at.push_back(nodes[s]);
  std::vector<int> axes;
  for (int c = 0; c < grid.dimension(); ++c) axes.push_back(c);
  std::vector<MultiIndex> second;
  for (auto mu : multi_indices(n, 2)) {
    bool on_grid = true;
    for (int c = grid.dimension(); c < n; ++c) on_grid = on_grid && mu[static_cast<std::size_t>(c)] == 0;
    if (on_grid) second.push_back(mu);
  }
  const double window = 8.0 * grid.spacing();
  const double radius = grid.radius() * std::sqrt(static_cast<double>(grid.dimension()));
  for (std::size_t k = 0; k < cand.x.size(); ++k) {
    for (std::size_t i = 0; i < cand.x[k].size(); ++i) {
      for (int c = 0; c < n; ++c) {
        const expr::Expr& e = cand.x[k][i][static_cast<std::size_t>(c)];
        HolderRow row{static_cast<int>(k + 1), static_cast<int>(i + 1), c + 1, 0.0, at.front(), false};
        if (!e.is_const()) {
          const Profile prof("X", n, radius, e);
          for (const auto& mu : second) {
            for (const auto& x : at) {
              try {
                const double v = holder_seminorm(prof, mu, opt.delta, x, window, axes);
                if (v > row.value) {
                  row.value = v;
                  row.at = x;
                }
              } catch (const Error&) {
              }
            }
          }
        }
        row.flagged = row.value > opt.cap;
        rep.holder_ok = rep.holder_ok && !row.flagged;
        rep.holder.push_back(std::move(row));
      }
    }
  }
  return rep;
}

}  // namespace degenlab
