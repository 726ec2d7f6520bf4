#include "degenlab/inequal.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <random>

#include "degenlab/error.hpp"
#include "degenlab/numeric.hpp"

namespace degenlab {

namespace {

constexpr int kDegree = 3;

double window(double t) {
  if (std::fabs(t) >= 1.0) return 0.0;
  const double u = 1.0 - t * t;
  return u * u * u;
}

double window_derivative(double t) {
  if (std::fabs(t) >= 1.0) return 0.0;
  const double u = 1.0 - t * t;
  return -6.0 * t * u * u;
}

std::size_t dim_of(const Grid& g) { return static_cast<std::size_t>(g.dimension()); }

}  // namespace

// --- bumps --------------------------------------------------------------------------

double BumpParams::value(std::span<const double> x) const {
  const std::size_t m = center.size();
  double w = 1.0, t = a0;
  for (std::size_t i = 0; i < m; ++i) {
    const double u = (x[i] - center[i]) / width;
    w *= window(u);
    if (w == 0.0) return 0.0;
    for (std::size_t k = 0; k < cos_coeffs[i].size(); ++k) {
      const double arg = static_cast<double>(k + 1) * std::numbers::pi * u;
      t += cos_coeffs[i][k] * std::cos(arg) + sin_coeffs[i][k] * std::sin(arg);
    }
  }
  return amplitude * w * t;
}

void BumpParams::gradient(std::span<const double> x, std::span<double> out) const {
  const std::size_t m = center.size();
  std::vector<double> u(m), w(m), dw(m), dt(m);
  double t = a0;
  for (std::size_t i = 0; i < m; ++i) {
    u[i] = (x[i] - center[i]) / width;
    w[i] = window(u[i]);
    dw[i] = window_derivative(u[i]);
    dt[i] = 0.0;
    for (std::size_t k = 0; k < cos_coeffs[i].size(); ++k) {
      const double kp = static_cast<double>(k + 1) * std::numbers::pi;
      const double arg = kp * u[i];
      t += cos_coeffs[i][k] * std::cos(arg) + sin_coeffs[i][k] * std::sin(arg);
      dt[i] += kp * (-cos_coeffs[i][k] * std::sin(arg) + sin_coeffs[i][k] * std::cos(arg));
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    double others = 1.0;
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) others *= w[j];
    out[i] = amplitude / width * others * (dw[i] * t + w[i] * dt[i]);
  }
}

double BumpParams::reach() const {
  return euclidean_norm(center) + width * std::sqrt(static_cast<double>(center.size()));
}

BumpFunction::BumpFunction(std::shared_ptr<const Grid> grid, std::vector<double> values, std::vector<double> gradient,
                           std::optional<BumpParams> params)
    : grid_(std::move(grid)), values_(std::move(values)), gradient_(std::move(gradient)), params_(std::move(params)) {}

BumpFunction BumpFunction::from_params(std::shared_ptr<const Grid> grid, BumpParams params) {
  if (!grid) throw DomainError("bump needs a grid");
  const std::size_t m = dim_of(*grid);
  if (params.center.size() != m || params.cos_coeffs.size() != m || params.sin_coeffs.size() != m)
    throw DimensionMismatch("bump parameters do not match the grid dimension");
  if (!(params.width > 0.0)) throw DomainError("bump width must be positive");
  std::vector<double> v(grid->size()), g(grid->size() * m);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const auto x = grid->node(i);
    v[i] = params.value(x);
    params.gradient(x, std::span<double>(g.data() + i * m, m));
  }
  return BumpFunction(std::move(grid), std::move(v), std::move(g), std::move(params));
}

BumpFunction BumpFunction::random(std::shared_ptr<const Grid> grid, std::uint64_t seed, std::uint64_t index,
                                  double radius) {
  if (!grid) throw DomainError("bump needs a grid");
  const std::size_t m = dim_of(*grid);
  const double sm = std::sqrt(static_cast<double>(m));
  radius = std::min(radius, grid->radius());
  const double wmax = radius / sm;
  const double wmin = std::min(8.0 * grid->spacing(), 0.5 * wmax);
  if (!(wmax > 0.0)) throw DomainError("bump radius must be positive");

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  BumpParams p;
  p.seed = seed;
  p.index = index;
  p.width = wmin * std::pow(wmax / wmin, unit(rng));
  const double room = std::max(0.0, radius - p.width * sm) * (1.0 - 1e-12);
  p.center.assign(m, 0.0);
  if (m == 1) {
    p.center[0] = uni(-room, room);
  } else {
    const double ang = uni(0.0, 2.0 * std::numbers::pi);
    const double rho = room * std::sqrt(unit(rng));
    p.center[0] = rho * std::cos(ang);
    p.center[1] = rho * std::sin(ang);
  }
  p.amplitude = uni(0.5, 2.0);
  p.a0 = uni(-1.0, 1.0);
  p.cos_coeffs.assign(m, std::vector<double>(kDegree));
  p.sin_coeffs.assign(m, std::vector<double>(kDegree));
  for (std::size_t i = 0; i < m; ++i) {
    for (int k = 0; k < kDegree; ++k) {
      p.cos_coeffs[i][static_cast<std::size_t>(k)] = uni(-1.0, 1.0) / (k + 1);
      p.sin_coeffs[i][static_cast<std::size_t>(k)] = uni(-1.0, 1.0) / (k + 1);
    }
  }
  return from_params(std::move(grid), std::move(p));
}

BumpFunction BumpFunction::from_nodes(std::shared_ptr<const Grid> grid, std::vector<double> values,
                                      std::vector<double> gradient) {
  if (!grid) throw DomainError("bump needs a grid");
  if (values.size() != grid->size() || gradient.size() != grid->size() * dim_of(*grid))
    throw DimensionMismatch("node data does not match the grid");
  return BumpFunction(std::move(grid), std::move(values), std::move(gradient), std::nullopt);
}

BumpFunction BumpFunction::zero(std::shared_ptr<const Grid> grid) {
  if (!grid) throw DomainError("bump needs a grid");
  const std::size_t n = grid->size(), m = dim_of(*grid);
  return BumpFunction(std::move(grid), std::vector<double>(n, 0.0), std::vector<double>(n * m, 0.0), std::nullopt);
}

bool BumpFunction::is_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; }) &&
         std::all_of(gradient_.begin(), gradient_.end(), [](double v) { return v == 0.0; });
}

double BumpFunction::support_extent() const {
  double r = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (values_[i] != 0.0) r = std::max(r, grid_->node_radius(i));
  return r;
}

std::vector<BumpFunction> random_bumps(std::shared_ptr<const Grid> grid, std::uint64_t seed, std::size_t count,
                                       double radius, unsigned threads) {
  std::vector<std::optional<BumpFunction>> slots(count);
  numeric::parallel_for(count, threads, [&](std::size_t i) { slots[i] = BumpFunction::random(grid, seed, i, radius); });
  std::vector<BumpFunction> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

// --- inequalities ---------------------------------------------------------------------

BoundAuxResult check_bound_aux(const Profile& f, const BumpFunction& phi, double tau, double s, int axis) {
  const Grid& g = phi.grid();
  if (axis < 1 || axis > g.dimension()) throw DomainError("axis out of range");
  if (f.dimension() != g.dimension()) throw DimensionMismatch("profile and grid dimensions differ");
  if (!(s >= 0.0) || s > g.radius() * std::sqrt(static_cast<double>(g.dimension())))
    throw DomainError("s lies outside the grid");
  BoundAuxResult r;
  r.fmin = HUGE_VAL;
  bool any = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = f(g.node(i));
    if (g.node_radius(i) >= s) {
      r.fmin = std::min(r.fmin, v);
      any = true;
    }
    const double p = phi.value(i), d = phi.gradient(i)[static_cast<std::size_t>(axis - 1)];
    r.norm2 += g.weight(i) * p * p;
    r.deriv2 += g.weight(i) * d * d;
    r.weighted += g.weight(i) * v * v * p * p;
  }
  if (!any) throw DomainError("no grid node with |x| >= s");
  if (!(r.fmin >= DBL_MIN)) throw DegenerateMin("min of '" + f.name() + "' over |x| >= s underflows");
  r.weighted *= tau * tau;
  const double tf = tau * r.fmin;
  r.factor = 1.0 / (tf * tf) + s * s;
  const double rhs = r.factor * (r.deriv2 + r.weighted);
  r.ratio = r.norm2 == 0.0 ? 0.0 : r.norm2 / rhs;
  return r;
}

Profile sqrt_profile(const Profile& p) {
  std::optional<double> at0;
  if (p.at0()) at0 = std::sqrt(*p.at0());
  return Profile("sqrt_" + p.name(), p.dimension(), p.support_radius(), expr::apply(expr::Op::Sqrt, p.expression()),
                 at0, p.declared_elliptical());
}

HardyResult check_hardy_claim(const Profile& lam_sum, const BumpFunction& phi, double r) {
  return check_hardy_claim(lam_sum, phi, r, mu(r, sqrt_profile(lam_sum)).value);
}

HardyResult check_hardy_claim(const Profile& lam_sum, const BumpFunction& phi, double r, double mu_value) {
  const Grid& g = phi.grid();
  if (lam_sum.dimension() != g.dimension()) throw DimensionMismatch("profile and grid dimensions differ");
  HardyResult h;
  h.mu = mu_value;
  const double edge = r * (1.0 + 1e-12);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double p = phi.value(i);
    const auto d = phi.gradient(i);
    double gg = 0.0;
    for (double c : d) gg += c * c;
    h.grad2 += g.weight(i) * gg;
    if (p != 0.0 && g.node_radius(i) <= edge) h.lhs += g.weight(i) * lam_sum(g.node(i)) * p * p;
  }
  if (h.lhs == 0.0) return h;
  const double rhs = 4.0 * h.mu * h.mu * h.grad2;
  h.ratio = h.lhs / rhs;
  return h;
}

namespace {

struct SufficData {
  std::vector<double> ls, lp;
  std::vector<double> dlp;  // node-major gradient of Lambda_product
  Profile sqrt_ls;
  std::size_t count;
  double radius;
};

SufficData suffic_data(const DegeneracyFamily& fam, const Grid& g) {
  const std::size_t m = dim_of(g);
  const Profile ls = fam.sum_profile(), lp = fam.product_profile();
  SufficData d{std::vector<double>(g.size()), std::vector<double>(g.size()), std::vector<double>(g.size() * m),
               fam.sqrt_sum_profile(), fam.profiles().size(), fam.support_radius()};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.node(i);
    d.ls[i] = ls(x);
    d.lp[i] = lp(x);
    const auto gr = lp.gradient(x);
    std::copy(gr.begin(), gr.end(), d.dlp.begin() + static_cast<std::ptrdiff_t>(i * m));
  }
  return d;
}

SufficResult suffic_one(const SufficData& d, const BumpFunction& phi, double tau) {
  const Grid& g = phi.grid();
  const std::size_t m = dim_of(g);
  SufficResult s;
  s.tau = tau;
  const double lt = std::log(tau), l2 = lt * lt;
  double ls_phi = 0.0, grad2 = 0.0, lp_phi = 0.0, inner = 0.0, outer = 0.0, i_lp = 0.0, nu_grad2 = 0.0;
  double r = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double p = phi.value(i), w = g.weight(i);
    const auto dp = phi.gradient(i);
    const double t = tau * d.lp[i];
    const double nu = numeric::cutoff(t), dnu = numeric::cutoff_derivative(t) * tau;
    double gg = 0.0, ng = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      gg += dp[k] * dp[k];
      const double c = nu * dp[k] + p * dnu * d.dlp[i * m + k];
      ng += c * c;
    }
    grad2 += w * gg;
    nu_grad2 += w * ng;
    if (p == 0.0) continue;
    const double p2 = p * p;
    ls_phi += w * d.ls[i] * p2;
    lp_phi += w * d.lp[i] * p2;
    inner += w * d.ls[i] * nu * nu * p2;
    outer += w * d.ls[i] * (1.0 - nu) * (1.0 - nu) * p2;
    if (t > 1.0) {
      i_lp += w * d.lp[i] * p2;
      s.i_measure += w;
    }
    if (t <= 2.0) r = std::max(r, g.node_radius(i));
  }
  const double denom = grad2 + tau * tau * lp_phi;
  if (denom == 0.0) {
    s.undefined = true;
    s.delta = std::numeric_limits<double>::quiet_NaN();
    s.split_bound = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  if (r > 0.0) {
    s.r = std::min(r + g.spacing(), d.radius);
    s.mu = mu(s.r, d.sqrt_ls).value;
  }
  s.delta = l2 * ls_phi / denom;
  s.inner = 2.0 * l2 * inner;
  s.inner_bound = 2.0 * l2 * 4.0 * s.mu * s.mu * nu_grad2;
  s.outer = 2.0 * l2 * outer;
  s.outer_bound = 2.0 * static_cast<double>(d.count) * l2 * tau * i_lp;
  s.split_bound = (s.inner_bound + s.outer_bound) / denom;
  return s;
}

/// Bump A W(x / r) centred at 0 of width r, the scale where tau Lp crosses 2.
std::optional<BumpFunction> adapted_bump(const SufficData& d, const std::shared_ptr<const Grid>& grid, double tau) {
  double r = 0.0;
  for (std::size_t i = 0; i < grid->size(); ++i)
    if (tau * d.lp[i] <= 2.0) r = std::max(r, grid->node_radius(i));
  const double sm = std::sqrt(static_cast<double>(grid->dimension()));
  r = std::min(r, d.radius / sm);
  if (r < 8.0 * grid->spacing()) return std::nullopt;
  BumpParams p;
  p.center.assign(dim_of(*grid), 0.0);
  p.width = r;
  p.cos_coeffs.assign(dim_of(*grid), {});
  p.sin_coeffs.assign(dim_of(*grid), {});
  return BumpFunction::from_params(grid, std::move(p));
}

}  // namespace

SufficResult check_suffic(const DegeneracyFamily& fam, const BumpFunction& phi, double tau) {
  if (!(tau >= std::numbers::e)) throw DomainError("check_suffic needs tau >= e");
  if (fam.m() != phi.grid().dimension()) throw DimensionMismatch("family and grid dimensions differ");
  return suffic_one(suffic_data(fam, phi.grid()), phi, tau);
}

SufficSweep suffic_sweep(const DegeneracyFamily& fam, std::span<const BumpFunction> bumps,
                         std::span<const double> taus, unsigned threads) {
  if (bumps.empty()) throw DomainError("suffic sweep needs bumps");
  for (double t : taus)
    if (!(t >= std::numbers::e)) throw DomainError("check_suffic needs tau >= e");
  const auto& grid = bumps.front().grid_ptr();
  if (fam.m() != grid->dimension()) throw DimensionMismatch("family and grid dimensions differ");
  const SufficData d = suffic_data(fam, *grid);

  std::vector<BumpFunction> all(bumps.begin(), bumps.end());
  for (double t : taus)
    if (auto b = adapted_bump(d, grid, t)) all.push_back(std::move(*b));

  SufficSweep out;
  out.taus.assign(taus.begin(), taus.end());
  const std::size_t nb = all.size();
  std::vector<SufficResult> res(nb * taus.size());
  numeric::parallel_for(res.size(), threads,
                        [&](std::size_t k) { res[k] = suffic_one(d, all[k % nb], taus[k / nb]); });
  for (std::size_t t = 0; t < taus.size(); ++t) {
    double worst = 0.0, split = 0.0;
    std::size_t which = 0;
    for (std::size_t b = 0; b < nb; ++b) {
      const auto& r = res[t * nb + b];
      if (r.undefined) continue;
      if (r.delta > worst) {
        worst = r.delta;
        which = b;
      }
      split = std::max(split, r.split_bound);
    }
    out.worst_delta.push_back(worst);
    out.worst_bump.push_back(which);
    out.worst_split.push_back(split);
    if (t > 0 && worst > 1.1 * out.worst_delta[t - 1]) {
      out.monotone = false;
      if (out.note.empty()) out.note = "worst delta rises between tau samples " + std::to_string(t - 1) + " and " +
                                       std::to_string(t);
    }
  }
  return out;
}

MalgrangeResult check_malgrange(const Profile& f, const Grid& grid, double exclude_radius) {
  if (f.dimension() != grid.dimension()) throw DimensionMismatch("profile and grid dimensions differ");
  MalgrangeResult r;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.node_radius(i) < exclude_radius) continue;
    const auto x = grid.node(i);
    const double v = f(x);
    if (v < 1e-30) {
      ++r.skipped;
      continue;
    }
    double gg = 0.0;
    for (double c : f.gradient(x)) gg += c * c;
    const double q = gg / v;
    if (r.argmax.empty() || q > r.constant) {
      r.constant = q;
      r.argmax.assign(x.begin(), x.end());
    }
  }
  return r;
}

}  // namespace degenlab
