#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "degenlab/koike.hpp"
#include "degenlab/profiles.hpp"

namespace degenlab {

/// Parameters of a random bump A W((x - c)/w) T(x), W(t) = prod (1 - t_i^2)^3,
/// T(x) = a0 + sum_i sum_k a_ik cos(k pi u_i) + b_ik sin(k pi u_i), u = (x - c)/w.
struct BumpParams {
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  Point center;
  double width = 1.0;
  double amplitude = 1.0;
  double a0 = 1.0;
  std::vector<std::vector<double>> cos_coeffs;  // [axis][k - 1]
  std::vector<std::vector<double>> sin_coeffs;

  double value(std::span<const double> x) const;
  void gradient(std::span<const double> x, std::span<double> out) const;
  /// Support radius: |x| <= |c| + w sqrt(m).
  double reach() const;
};

/// A C^2 test function sampled on a grid, values and exact gradient per node.
class BumpFunction {
public:
  /// Deterministic random bump inside the ball |x| <= radius.
  static BumpFunction random(std::shared_ptr<const Grid> grid, std::uint64_t seed, std::uint64_t index,
                             double radius);
  static BumpFunction from_params(std::shared_ptr<const Grid> grid, BumpParams params);
  /// Externally sampled function; gradient is node-major, dimension entries per node.
  static BumpFunction from_nodes(std::shared_ptr<const Grid> grid, std::vector<double> values,
                                 std::vector<double> gradient);
  static BumpFunction zero(std::shared_ptr<const Grid> grid);

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  const std::optional<BumpParams>& params() const { return params_; }
  double value(std::size_t node) const { return values_[node]; }
  std::span<const double> gradient(std::size_t node) const {
    const auto m = static_cast<std::size_t>(grid_->dimension());
    return {gradient_.data() + node * m, m};
  }
  bool is_zero() const;
  /// Largest node radius where the function is nonzero (0 if identically zero).
  double support_extent() const;

private:
  BumpFunction(std::shared_ptr<const Grid> grid, std::vector<double> values, std::vector<double> gradient,
               std::optional<BumpParams> params);
  std::shared_ptr<const Grid> grid_;
  std::vector<double> values_;
  std::vector<double> gradient_;
  std::optional<BumpParams> params_;
};

/// `count` bumps numbered 0..count-1 from one seed.
std::vector<BumpFunction> random_bumps(std::shared_ptr<const Grid> grid, std::uint64_t seed, std::size_t count,
                                       double radius, unsigned threads = 0);

struct BoundAuxResult {
  double ratio = 0.0;
  double norm2 = 0.0;       // ||phi||^2
  double deriv2 = 0.0;      // ||d_l phi||^2
  double weighted = 0.0;    // tau^2 int f^2 phi^2
  double fmin = 0.0;        // min of f over |x| >= s
  double factor = 0.0;      // 1/(tau fmin)^2 + s^2
};

/// ||phi||^2 / ((1/(tau^2 fmin^2) + s^2)(||d_l phi||^2 + tau^2 ||f phi||^2)); axis is 1-based.
BoundAuxResult check_bound_aux(const Profile& f, const BumpFunction& phi, double tau, double s, int axis);

struct HardyResult {
  double ratio = 0.0;
  double lhs = 0.0;    // int_{|x| <= r} Lambda phi^2
  double mu = 0.0;     // mu(r, sqrt Lambda)
  double grad2 = 0.0;  // int |grad phi|^2
};

/// int_{|x|<=r} Lambda phi^2 / (4 mu(r, sqrt Lambda)^2 int |grad phi|^2).
HardyResult check_hardy_claim(const Profile& lam_sum, const BumpFunction& phi, double r);
/// Same with mu computed once for the batch.
HardyResult check_hardy_claim(const Profile& lam_sum, const BumpFunction& phi, double r, double mu_value);

/// sqrt of a profile, for use as a Koike weight.
Profile sqrt_profile(const Profile& p);

struct SufficResult {
  double tau = 0.0;
  bool undefined = false;  // phi == 0: 0/0
  double delta = 0.0;      // (log tau)^2 int Ls phi^2 / (int |grad phi|^2 + tau^2 int Lp phi^2)
  double split_bound = 0.0;   // same denominator, numerator from the nu split
  double inner = 0.0;         // 2 (log tau)^2 int Ls nu^2 phi^2
  double inner_bound = 0.0;   // 2 (log tau)^2 4 mu(r)^2 int |grad(nu phi)|^2
  double outer = 0.0;         // 2 (log tau)^2 int Ls (1 - nu)^2 phi^2
  double outer_bound = 0.0;   // 2 count (log tau)^2 tau int_I Lp phi^2
  double r = 0.0;             // sup{|y| in supp phi : tau Lp(y) <= 2}
  double mu = 0.0;            // mu(r, sqrt Ls)
  double i_measure = 0.0;     // measure of I(tau) = {tau Lp > 1} in supp phi
};

/// Direct ratio and proof-split bound for one bump at one tau >= e.
SufficResult check_suffic(const DegeneracyFamily& fam, const BumpFunction& phi, double tau);

struct SufficSweep {
  std::vector<double> taus;
  std::vector<double> worst_delta;   // max over bumps at each tau
  std::vector<std::size_t> worst_bump;
  std::vector<double> worst_split;
  bool monotone = true;  // false when some worst_delta rises by more than 10%
  std::string note;
};

SufficSweep suffic_sweep(const DegeneracyFamily& fam, std::span<const BumpFunction> bumps,
                         std::span<const double> taus, unsigned threads = 0);

struct MalgrangeResult {
  double constant = 0.0;  // sup |grad f|^2 / f
  Point argmax;
  std::size_t skipped = 0;  // nodes with f < 1e-30
};

/// Empirical Malgrange constant over grid nodes with |x| >= exclude_radius.
MalgrangeResult check_malgrange(const Profile& f, const Grid& grid, double exclude_radius = 0.0);

}  // namespace degenlab
