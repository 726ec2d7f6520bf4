#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "degenlab/expr.hpp"
#include "degenlab/profiles.hpp"

namespace degenlab {

/// Symmetric matrix of expressions in x1..x_nvars.  Indices are 1-based
/// and only k <= j is stored.
class MatrixFunction {
public:
  MatrixFunction(int size, int nvars);

  void set(int k, int j, expr::Expr e);
  void set(int k, int j, std::string_view text);
  const expr::Expr& entry(int k, int j) const;

  Eigen::MatrixXd operator()(std::span<const double> x) const;
  double eval_entry(int k, int j, std::span<const double> x) const;
  MatrixFunction derivative(int var) const;  // d/dx_var, 1-based

  int size() const { return size_; }
  int nvars() const { return nvars_; }
  const expr::VarSet& variables() const { return vars_; }

private:
  std::size_t slot(int k, int j) const;
  int size_;
  int nvars_;
  expr::VarSet vars_;
  std::vector<expr::Expr> entries_;
  std::vector<expr::Program> programs_;
};

/// Grushin matrix function of type m with degenerate block starting at p.
/// p = n + 1 means there is no quasiconformal block.
class GrushinMatrix {
public:
  GrushinMatrix(int n, int m, int p, MatrixFunction a);
  int n() const { return n_; }
  int m() const { return m_; }
  int p() const { return p_; }
  const MatrixFunction& matrix() const { return a_; }
  Eigen::MatrixXd operator()(std::span<const double> x) const { return a_(x); }

private:
  int n_, m_, p_;
  MatrixFunction a_;
};

/// Points of `grid` embedded in R^n (remaining coordinates 0), skipping the
/// ball |x| < exclude_radius.
std::vector<Point> sample_points(const Grid& grid, int n, double exclude_radius = 0.0);

struct ComparabilityResult {
  double beta = HUGE_VAL;
  double alpha = 0.0;
  bool comparable = true;
  Point witness_x;                // set when some direction fails
  std::vector<double> witness_xi;
};

/// beta B <= A <= alpha B at every sample.
ComparabilityResult comparability(const MatrixFunction& a, const MatrixFunction& b, std::span<const Point> samples);

struct SubordinateResult {
  double constant = 0.0;
  bool range_mismatch = false;
  int worst_var = 0;
  Point witness_x;
  std::vector<double> witness_xi;
};

/// Smallest C with (d_k A)^T (d_k A) <= C A at the samples, k = 1..nvars.
SubordinateResult check_subordinate(const MatrixFunction& a, std::span<const Point> samples);

struct QuasiconformalResult {
  double ratio_bound = 1.0;
  bool ok = true;
  Point where;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  std::string reason;
};

QuasiconformalResult check_quasiconformal(const MatrixFunction& q, std::span<const Point> samples,
                                          double cap = 1e3, double floor = 1e-12);

struct EstimateParams {
  EstimateParams(double eps, double delta, double delta2);
  double eps;
  double delta;
  double delta2;
  double delta_prime;  // 2 delta (1 + delta) / (2 + delta)
};

struct EntryEstimate {
  int k, j;
  std::string regime;  // diag, offdiag_inner, offdiag_tail
  MultiIndex mu;
  double exponent;
  double constant;     // sup of |D^mu a| / rhs
  Point argmax;
  double growth_slope;  // d log(ratio) / d log|x| near the origin
  bool flagged;
};

struct SeminormEstimate {
  int k, j;
  std::string regime;
  MultiIndex mu;
  double value;
  Point at;
  bool flagged;
};

struct DifferentialOptions {
  double cap = 1e3;
  double growth_slope = -0.1;
  double min_radius = 0.0;  // samples closer to 0 are skipped (at least one grid step)
  bool seminorms = true;
};

struct DifferentialReport {
  std::vector<EntryEstimate> entries;
  std::vector<SeminormEstimate> seminorms;
  double delta_prime = 0.0;
  bool pass = true;
};

DifferentialReport check_differential_estimates(const GrushinMatrix& a, const EstimateParams& params, const Grid& grid,
                                                const DifferentialOptions& opt = {});

struct SosDecomposition {
  // x[k-1][i] is the n-vector X_{k,i}.
  std::vector<std::vector<std::vector<expr::Expr>>> x;
  std::optional<MatrixFunction> q;
};

struct SandwichRow {
  int k;
  double lower;  // best c
  double upper;  // best C
  bool pass;
  Point witness_x;
};

struct HolderRow {
  int k, i, component;
  double value;
  Point at;
  bool flagged;
};

struct SosOptions {
  double delta = 0.5;
  double cap = 1e3;
  double residual_tol = 1e-10;
};

struct SosReport {
  double residual = 0.0;
  Point residual_at;
  std::vector<SandwichRow> sandwich;
  std::optional<ComparabilityResult> q_vs_app;
  std::vector<HolderRow> holder;
  bool residual_ok = true;
  bool sandwich_ok = true;
  bool q_ok = true;
  bool holder_ok = true;
  bool pass() const { return residual_ok && sandwich_ok && q_ok && holder_ok; }
};

SosReport verify_sos(const GrushinMatrix& a, const SosDecomposition& cand, const Grid& grid, const SosOptions& opt = {});

}  // namespace degenlab
