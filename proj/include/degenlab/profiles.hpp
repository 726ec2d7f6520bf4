#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "degenlab/expr.hpp"

namespace degenlab {

using Point = std::vector<double>;
using MultiIndex = std::vector<int>;

/// Scalar degeneracy profile lambda(x1..xm) with support radius R.  When at0
/// is present the profile is extended to the origin by that value.
class Profile {
public:
  Profile(std::string name, int dimension, double support_radius, expr::Expr e,
          std::optional<double> at0 = std::nullopt, bool declared_elliptical = false);

  static Profile parse(std::string name, int dimension, double support_radius, std::string_view text,
                       std::optional<double> at0 = std::nullopt, bool declared_elliptical = false);

  /// Value at x.  At |x| = 0 the at0 value is used when present.
  double operator()(std::span<const double> x) const;
  double operator()(std::initializer_list<double> x) const {
    return (*this)(std::span<const double>(x.begin(), x.size()));
  }

  /// Natural log of the value, structurally where possible so that
  /// exp(-1/|x|^s) keeps its information far below DBL_MIN.
  expr::LogValue log_value(std::span<const double> x) const;

  /// Symbolic gradient at x.  Profiles with at0 are taken flat at the origin.
  std::vector<double> gradient(std::span<const double> x) const;

  /// Symbolic partial derivative D^mu, as a new profile (same support).
  Profile derivative(const MultiIndex& mu) const;

  const std::string& name() const { return name_; }
  int dimension() const { return dim_; }
  double support_radius() const { return radius_; }
  const std::optional<double>& at0() const { return at0_; }
  bool declared_elliptical() const { return elliptical_; }
  const expr::Expr& expression() const { return expr_; }
  const expr::VarSet& variables() const { return vars_; }

private:
  std::string name_;
  int dim_;
  double radius_;
  expr::Expr expr_;
  std::optional<double> at0_;
  bool elliptical_;
  expr::VarSet vars_;
  std::shared_ptr<const expr::Program> program_;
  std::shared_ptr<const std::vector<expr::Program>> grad_;
};

/// Uniform tensor grid on [-a, a]^m, optionally restricted to the ball |x| <= a.
class Grid {
public:
  Grid(int dimension, double radius, int nodes_per_axis, bool ball = false);

  int dimension() const { return dim_; }
  double radius() const { return radius_; }
  int nodes_per_axis() const { return n_; }
  double spacing() const { return spacing_; }
  bool ball() const { return ball_; }
  const std::vector<double>& axis() const { return axis_; }

  std::size_t size() const { return radii_.size(); }
  std::span<const double> node(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  double node_radius(std::size_t i) const { return radii_[i]; }
  /// Product trapezoid weight of node i.
  double weight(std::size_t i) const { return weights_[i]; }
  /// Tensor index of node i along each axis.
  std::span<const int> index(std::size_t i) const {
    return {tensor_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }

private:
  int dim_;
  double radius_;
  int n_;
  double spacing_;
  bool ball_;
  std::vector<double> axis_;
  std::vector<double> coords_;
  std::vector<double> radii_;
  std::vector<double> weights_;
  std::vector<int> tensor_;
};

/// Central finite-difference approximation of D^mu p(x), |mu| <= 4.
double fd_derivative(const Profile& p, const MultiIndex& mu, std::span<const double> x);

/// Shrinking-window estimator of the Hoelder seminorm [D^alpha p]_delta at x.
/// `axes` restricts sampling to the listed coordinates (default: all).
double holder_seminorm(const Profile& p, const MultiIndex& alpha, double delta, std::span<const double> x,
                       double window, std::span<const int> axes = {});

struct RadialEnvelope {
  std::vector<double> radii;  // increasing, first > 0
  std::vector<double> f0;     // min of p over |x| >= rho
  std::vector<double> gstar;  // max of p over the shell at rho
  double max_radius = 0.0;    // largest node radius on the grid

  /// Piecewise-linear interpolant of f0, constant beyond the samples.
  double f0_at(double s) const;
};

RadialEnvelope radial_envelopes(const Profile& p, const Grid& grid);

struct MonotoneCheck {
  bool holds = true;
  Point z;  // |z| <= |x| but p(z) > p(x)
  Point x;
  double pz = 0.0;
  double px = 0.0;
};

MonotoneCheck check_strong_monotone(const Profile& p, const Grid& grid);

struct EllipticCheck {
  bool holds = true;
  Point where;
  double value = 0.0;
};

EllipticCheck check_elliptical(const Profile& p, const Grid& grid);

double euclidean_norm(std::span<const double> x);

}  // namespace degenlab
