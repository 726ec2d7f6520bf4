#include "degenlab/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "degenlab/error.hpp"

namespace degenlab {

double euclidean_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// --- Profile ----------------------------------------------------------------------

Profile::Profile(std::string name, int dimension, double support_radius, expr::Expr e, std::optional<double> at0,
                 bool declared_elliptical)
    : name_(std::move(name)), dim_(dimension), radius_(support_radius), expr_(std::move(e)), at0_(at0),
      elliptical_(declared_elliptical), vars_(expr::VarSet::spatial(dimension)) {
  if (dim_ < 1) throw DomainError("profile '" + name_ + "' needs dimension >= 1");
  if (!(radius_ > 0.0)) throw DomainError("profile '" + name_ + "' needs support radius > 0");
  for (const auto& v : expr::free_variables(expr_)) {
    if (!vars_.contains(v)) throw UnknownVariable(v + " in profile '" + name_ + "'");
  }
  program_ = std::make_shared<const expr::Program>(expr_, vars_);
  std::vector<expr::Program> grad;
  for (const auto& v : vars_.names()) grad.emplace_back(expr::differentiate(expr_, v), vars_);
  grad_ = std::make_shared<const std::vector<expr::Program>>(std::move(grad));
}

Profile Profile::parse(std::string name, int dimension, double support_radius, std::string_view text,
                       std::optional<double> at0, bool declared_elliptical) {
  auto e = expr::parse(text, expr::VarSet::spatial(dimension));
  return Profile(std::move(name), dimension, support_radius, std::move(e), at0, declared_elliptical);
}

double Profile::operator()(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) throw DimensionMismatch("profile '" + name_ + "' expects a point of dimension " + std::to_string(dim_));
  if (at0_ && euclidean_norm(x) == 0.0) return *at0_;
  return (*program_)(x);
}

expr::LogValue Profile::log_value(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) throw DimensionMismatch("profile '" + name_ + "' expects a point of dimension " + std::to_string(dim_));
  if (at0_ && euclidean_norm(x) == 0.0) {
    if (*at0_ > 0.0) return {std::log(*at0_)};
    return {-HUGE_VAL};
  }
  // Fast path while the value is comfortably normal.
  try {
    const double v = (*program_)(x);
    if (v >= 1e-280) return {std::log(v)};
    if (v == 0.0 && euclidean_norm(x) == 0.0) return {-HUGE_VAL};
  } catch (const DomainError&) {
  }
  return expr::evaluate_log(expr_, expr::Bindings(vars_, x));
}

std::vector<double> Profile::gradient(std::span<const double> x) const {
  std::vector<double> g(static_cast<std::size_t>(dim_), 0.0);
  if (at0_ && euclidean_norm(x) == 0.0) return g;
  for (int k = 0; k < dim_; ++k) g[static_cast<std::size_t>(k)] = (*grad_)[static_cast<std::size_t>(k)](x);
  return g;
}

Profile Profile::derivative(const MultiIndex& mu) const {
  if (static_cast<int>(mu.size()) != dim_) throw DimensionMismatch("multi-index length differs from profile dimension");
  expr::Expr d = expr_;
  for (int k = 0; k < dim_; ++k) {
    for (int j = 0; j < mu[static_cast<std::size_t>(k)]; ++j) d = expr::differentiate(d, vars_.names()[static_cast<std::size_t>(k)]);
  }
  const bool flat = std::accumulate(mu.begin(), mu.end(), 0) > 0;
  std::optional<double> at0 = at0_;
  if (at0_ && flat) at0 = 0.0;
  return Profile(name_ + "_d", dim_, radius_, d, at0, false);
}

// --- Grid -------------------------------------------------------------------------

Grid::Grid(int dimension, double radius, int nodes_per_axis, bool ball)
    : dim_(dimension), radius_(radius), n_(nodes_per_axis), ball_(ball) {
  if (dim_ != 1 && dim_ != 2) throw DomainError("grids support m = 1 or m = 2 only");
  if (n_ < 16) throw DomainError("grid needs at least 16 nodes per axis");
  if (!(radius_ > 0.0)) throw DomainError("grid radius must be positive");
  spacing_ = 2.0 * radius_ / (n_ - 1);
  axis_.resize(static_cast<std::size_t>(n_));
  // Built from integers so that axis[i] == -axis[N-1-i] exactly.
  for (int i = 0; i < n_; ++i) axis_[static_cast<std::size_t>(i)] = radius_ * (2.0 * i - (n_ - 1)) / (n_ - 1);
  std::vector<double> w1(static_cast<std::size_t>(n_), spacing_);
  w1.front() = w1.back() = 0.5 * spacing_;

  const double limit = radius_ * (1.0 + 1e-12);
  if (dim_ == 1) {
    for (int i = 0; i < n_; ++i) {
      const double x = axis_[static_cast<std::size_t>(i)];
      coords_.push_back(x);
      radii_.push_back(std::fabs(x));
      weights_.push_back(w1[static_cast<std::size_t>(i)]);
      tensor_.push_back(i);
    }
    return;
  }
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      const double x = axis_[static_cast<std::size_t>(i)];
      const double y = axis_[static_cast<std::size_t>(j)];
      const double r = std::hypot(x, y);
      if (ball_ && r > limit) continue;
      coords_.push_back(x);
      coords_.push_back(y);
      radii_.push_back(r);
      weights_.push_back(w1[static_cast<std::size_t>(i)] * w1[static_cast<std::size_t>(j)]);
      tensor_.push_back(i);
      tensor_.push_back(j);
    }
  }
}

// --- finite differences ----------------------------------------------------------

namespace {

struct Stencil {
  std::vector<int> offsets;
  std::vector<double> coeffs;  // multiply by h^-order
  double scale;
};

const Stencil& stencil(int order) {
  static const Stencil s[5] = {
      {{0}, {1.0}, 1.0},
      {{-1, 1}, {-1.0, 1.0}, 0.5},
      {{-1, 0, 1}, {1.0, -2.0, 1.0}, 1.0},
      {{-2, -1, 1, 2}, {-1.0, 2.0, -2.0, 1.0}, 0.5},
      {{-2, -1, 0, 1, 2}, {1.0, -4.0, 6.0, -4.0, 1.0}, 1.0},
  };
  return s[order];
}

}  // namespace

double fd_derivative(const Profile& p, const MultiIndex& mu, std::span<const double> x) {
  const int m = p.dimension();
  if (static_cast<int>(mu.size()) != m || static_cast<int>(x.size()) != m) {
    throw DimensionMismatch("fd_derivative: multi-index/point dimension differs from profile");
  }
  int order = 0;
  for (int k : mu) {
    if (k < 0) throw DomainError("negative multi-index entry");
    order += k;
  }
  if (order > 4) throw DomainError("fd_derivative supports |mu| <= 4");
  if (order == 0) return p(x);
  for (int k : mu) {
    if (k > 4) throw DomainError("fd_derivative supports |mu| <= 4");
  }

  const double r = euclidean_norm(x);
  const double h = order >= 3 ? std::max(1e-2 * r, 2.5e-3) : std::max(1e-3 * r, 1e-4);
  const int reach = *std::max_element(mu.begin(), mu.end()) >= 3 ? 2 : 1;
  if (r + reach * h * std::sqrt(static_cast<double>(m)) > p.support_radius() * (1.0 + 1e-12)) {
    throw StepTooLarge("stencil of step " + std::to_string(h) + " at |x| = " + std::to_string(r) +
                       " leaves the support radius " + std::to_string(p.support_radius()));
  }
  if (p.at0() && r < 4.0 * h) {
    throw DomainError("stencil at |x| = " + std::to_string(r) + " reaches the origin where the profile is extended by continuity");
  }

  // Tensor product of one-dimensional stencils.
  std::vector<const Stencil*> st;
  for (int k = 0; k < m; ++k) st.push_back(&stencil(mu[static_cast<std::size_t>(k)]));
  std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
  std::vector<double> y(x.begin(), x.end());
  double acc = 0.0;
  for (;;) {
    double c = 1.0;
    for (int k = 0; k < m; ++k) {
      const auto& s = *st[static_cast<std::size_t>(k)];
      const std::size_t i = idx[static_cast<std::size_t>(k)];
      y[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] + s.offsets[i] * h;
      c *= s.coeffs[i] * s.scale;
    }
    acc += c * p(y);
    int k = 0;
    for (; k < m; ++k) {
      auto& i = idx[static_cast<std::size_t>(k)];
      if (++i < st[static_cast<std::size_t>(k)]->offsets.size()) break;
      i = 0;
    }
    if (k == m) break;
  }
  return acc / std::pow(h, order);
}

double holder_seminorm(const Profile& p, const MultiIndex& alpha, double delta, std::span<const double> x,
                       double window, std::span<const int> axes) {
  if (!(window > 0.0)) throw DomainError("holder_seminorm needs window > 0");
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("holder_seminorm needs delta in (0, 1]");
  const int m = p.dimension();
  std::vector<int> ax(axes.begin(), axes.end());
  if (ax.empty()) {
    ax.resize(static_cast<std::size_t>(m));
    std::iota(ax.begin(), ax.end(), 0);
  }
  const int per_axis = ax.size() == 1 ? 17 : ax.size() == 2 ? 9 : 5;
  const bool plain = std::all_of(alpha.begin(), alpha.end(), [](int a) { return a == 0; });

  double best_small = 0.0;
  constexpr int kWindows = 7;
  for (int k = 0; k < kWindows; ++k) {
    const double w = window * std::ldexp(1.0, -k);
    std::vector<Point> pts;
    std::vector<double> vals;
    std::vector<int> idx(ax.size(), 0);
    for (;;) {
      Point y(x.begin(), x.end());
      for (std::size_t a = 0; a < ax.size(); ++a) {
        y[static_cast<std::size_t>(ax[a])] += w * (-1.0 + 2.0 * idx[a] / (per_axis - 1));
      }
      if (euclidean_norm(y) <= p.support_radius() * (1.0 + 1e-12)) {
        vals.push_back(plain ? p(y) : fd_derivative(p, alpha, y));
        pts.push_back(std::move(y));
      }
      std::size_t a = 0;
      for (; a < ax.size(); ++a) {
        if (++idx[a] < per_axis) break;
        idx[a] = 0;
      }
      if (a == ax.size()) break;
    }
    double best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        double d2 = 0.0;
        for (int c = 0; c < m; ++c) {
          const double d = pts[i][static_cast<std::size_t>(c)] - pts[j][static_cast<std::size_t>(c)];
          d2 += d * d;
        }
        if (d2 == 0.0) continue;
        const double ratio = std::fabs(vals[i] - vals[j]) / std::pow(std::sqrt(d2), delta);
        best = std::max(best, ratio);
      }
    }
    if (k >= kWindows - 2) best_small = std::max(best_small, best);
  }
  return best_small;
}

// --- envelopes --------------------------------------------------------------------

double RadialEnvelope::f0_at(double s) const {
  if (radii.empty()) throw EmptyShell("envelope has no samples");
  if (s <= radii.front()) return f0.front();
  if (s >= radii.back()) return f0.back();
  auto it = std::upper_bound(radii.begin(), radii.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - radii.begin());
  const double t = (s - radii[i - 1]) / (radii[i] - radii[i - 1]);
  return f0[i - 1] + t * (f0[i] - f0[i - 1]);
}

RadialEnvelope radial_envelopes(const Profile& p, const Grid& grid) {
  if (p.dimension() != grid.dimension()) throw DimensionMismatch("profile and grid dimensions differ");
  const std::size_t n = grid.size();
  std::vector<double> vals(n);
  for (std::size_t i = 0; i < n; ++i) vals[i] = p(grid.node(i));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return grid.node_radius(a) < grid.node_radius(b); });

  // suffix[i]: min of p over nodes order[i..].
  std::vector<double> suffix(n + 1, HUGE_VAL);
  for (std::size_t i = n; i-- > 0;) suffix[i] = std::min(suffix[i + 1], vals[order[i]]);
  auto f0_from = [&](double rho) {
    auto it = std::lower_bound(order.begin(), order.end(), rho * (1.0 - 1e-12),
                               [&](std::size_t a, double r) { return grid.node_radius(a) < r; });
    return suffix[static_cast<std::size_t>(it - order.begin())];
  };

  RadialEnvelope env;
  env.max_radius = grid.node_radius(order.back());
  const double dx = grid.spacing();
  if (grid.dimension() == 1) {
    for (std::size_t k = 0; k < n;) {
      const double r = grid.node_radius(order[k]);
      double g = -HUGE_VAL;
      std::size_t j = k;
      for (; j < n && grid.node_radius(order[j]) == r; ++j) g = std::max(g, vals[order[j]]);
      if (r > 0.0) {
        env.radii.push_back(r);
        env.gstar.push_back(g);
        env.f0.push_back(suffix[k]);
      }
      k = j;
    }
  } else {
    const int shells = static_cast<int>(std::floor(env.max_radius / dx + 1e-9));
    for (int i = 1; i <= shells; ++i) {
      const double rho = i * dx;
      double half = 0.5 * dx;
      double g = -HUGE_VAL;
      for (int attempt = 0; attempt < 2 && g == -HUGE_VAL; ++attempt, half *= 2.0) {
        auto lo = std::upper_bound(order.begin(), order.end(), rho - half,
                                   [&](double r, std::size_t a) { return r < grid.node_radius(a); });
        for (auto it = lo; it != order.end() && grid.node_radius(*it) <= rho + half; ++it) g = std::max(g, vals[*it]);
      }
      if (g == -HUGE_VAL) throw EmptyShell("no nodes near radius " + std::to_string(rho));
      env.radii.push_back(rho);
      env.gstar.push_back(g);
      env.f0.push_back(f0_from(rho));
    }
  }
  if (env.radii.empty()) throw EmptyShell("grid has no node away from the origin");
  for (std::size_t i = 1; i < env.f0.size(); ++i) {
    if (env.f0[i] < env.f0[i - 1]) throw DomainError("internal: min-envelope is not monotone");
  }
  return env;
}

MonotoneCheck check_strong_monotone(const Profile& p, const Grid& grid) {
  const std::size_t n = grid.size();
  std::vector<double> vals(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    vals[i] = p(grid.node(i));
    scale = std::max(scale, std::fabs(vals[i]));
  }
  const double tol = 1e-12 * (1.0 + scale);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return grid.node_radius(a) < grid.node_radius(b); });

  MonotoneCheck out;
  std::size_t arg = order.front();
  for (std::size_t k = 0; k < n;) {
    // A group of (numerically) equal radii is compared against itself too.
    const double r = grid.node_radius(order[k]);
    std::size_t j = k;
    while (j < n && grid.node_radius(order[j]) <= r * (1.0 + 1e-12) + 1e-300) {
      if (vals[order[j]] > vals[arg]) arg = order[j];
      ++j;
    }
    for (std::size_t i = k; i < j; ++i) {
      const std::size_t x = order[i];
      if (vals[arg] > vals[x] + tol) {
        out.holds = false;
        out.z.assign(grid.node(arg).begin(), grid.node(arg).end());
        out.x.assign(grid.node(x).begin(), grid.node(x).end());
        out.pz = vals[arg];
        out.px = vals[x];
        return out;
      }
    }
    k = j;
  }
  return out;
}

EllipticCheck check_elliptical(const Profile& p, const Grid& grid) {
  EllipticCheck out;
  const double floor = grid.spacing() * (1.0 - 1e-9);
  double best_r = HUGE_VAL;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid.node_radius(i);
    if (r < floor) continue;
    const double v = p(grid.node(i));
    if (!(v > 0.0) && r < best_r) {
      best_r = r;
      out.holds = false;
      out.where.assign(grid.node(i).begin(), grid.node(i).end());
      out.value = v;
    }
  }
  return out;
}

}  // namespace degenlab
