#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "degenlab/profiles.hpp"

namespace degenlab {

/// Degeneracy profiles lambda_{m+1..p} on R^m of a diagonal block.
class DegeneracyFamily {
public:
  /// Validates ellipticity and 0 <= lambda <= 1 on `validation` (default:
  /// Grid(m, R, 201) with R the smallest support radius).
  DegeneracyFamily(int m, int p, int n, std::vector<Profile> profiles, bool last_applies_to_tail = true,
                   std::optional<Grid> validation = std::nullopt);

  int m() const { return m_; }
  int p() const { return p_; }
  int n() const { return n_; }
  bool last_applies_to_tail() const { return tail_; }
  const std::vector<Profile>& profiles() const { return profiles_; }
  double support_radius() const { return radius_; }

  /// Profiles for sqrt(Lambda_sum), Lambda_product and Lambda_sum itself.
  Profile sqrt_sum_profile() const;
  Profile sum_profile() const;
  Profile product_profile() const;

private:
  int m_, p_, n_;
  bool tail_;
  std::vector<Profile> profiles_;
  double radius_;
};

struct Aggregates {
  double sum;
  double product;
  double max;
  double min;
};

Aggregates aggregates(const DegeneracyFamily& fam, std::span<const double> x);

/// Log-space aggregates; clamped reports an underflow fallback in some lambda.
struct LogAggregates {
  double log_sum;
  double log_product;
  double log_max;
  double log_min;
  bool clamped = false;
};

LogAggregates log_aggregates(const DegeneracyFamily& fam, std::span<const double> x);

struct MuResult {
  double value;
  double argmax_radius;
};

/// Koike functional max{ g(x)(t - |x|) : |x| <= t }.
MuResult mu(double t, const Profile& g);

/// Natural log of the Koike functional for a radial max-envelope given in
/// log form; used where g underflows.
MuResult log_mu(double t, int m, const std::function<double(std::span<const double>)>& log_g);

enum class CriterionForm { SumProduct, MaxMin };
enum class Verdict { Holds, Fails, Inconclusive };

std::string to_string(CriterionForm f);
std::string to_string(Verdict v);

struct ClassifierThresholds {
  double eps = 1e-2;
  int fit_window = 6;
  double fails_slope = 0.05;
  double holds_slope = -0.2;
  int finest = 3;
  int k_min = 2;
  int k_max = 40;
};

struct KoikeScale {
  int k;
  double t;
  double log_mu;    // ln mu(t, sqrt(G))
  double log_p;     // ln P at |x| = t (most degenerate direction)
  double c;         // mu * ln P
  bool clamped;
};

struct KoikeReport {
  CriterionForm form;
  ClassifierThresholds thresholds;
  std::vector<KoikeScale> scales;
  double slope = 0.0;  // least squares of ln|c_k| against k over the fit window
  Verdict verdict = Verdict::Inconclusive;
  bool any_clamped = false;
  std::string note;
};

KoikeReport classify(const DegeneracyFamily& fam, CriterionForm form, const ClassifierThresholds& th = {});

/// w(tau) = inf_s (1/s + tau f0(s)) for the min-envelope of f.
double w_of_tau(const Profile& f, double tau, const Grid& grid);
double w_of_tau(const RadialEnvelope& env, double tau);

/// The crossing 1/r = tau f0(r).
double r_of_tau(const Profile& f, double tau, const Grid& grid);
double r_of_tau(const RadialEnvelope& env, double tau);

/// Unit directions used to sample spheres in R^m (m = 1: +-1; m = 2: 64).
const std::vector<Point>& sphere_directions(int m);

}  // namespace degenlab
