#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Sparse>

#include "degenlab/error.hpp"
#include "degenlab/profiles.hpp"

namespace degenlab {

/// Discretized L_eta v = lambda h^2 v on B(0, a), v = 0 on the boundary.
struct EigenProblem {
  int m = 1;
  double a = 1.0;
  double eta = 0.0;
  std::shared_ptr<const Grid> grid;
  std::vector<std::size_t> nodes;    // grid node of each unknown (|x| < a)
  Eigen::SparseMatrix<double> K;     // -Laplacian / spacing^2 + diag(f^2 eta^2)
  Eigen::VectorXd M;                 // diag(h^2)
  Eigen::VectorXd f;                 // f at the unknowns
  Eigen::VectorXd h;                 // h at the unknowns
};

EigenProblem assemble(const Profile& f, const Profile& h, double a, double eta, std::shared_ptr<const Grid> grid);

struct EigenResult {
  double lambda0 = 0.0;
  std::vector<double> v;     // per grid node, zero outside the unknowns; sum w v^2 = 1
  int iterations = 0;
  double residual = 0.0;     // ||K v - lambda M v||
  double kv_norm = 0.0;      // ||K v||
  double shift = 0.0;
  std::shared_ptr<const Grid> grid;
  double a = 1.0;
};

class EigenNotConverged : public NotConverged {
public:
  EigenNotConverged(const std::string& what, EigenResult best) : NotConverged(what), best_(std::move(best)) {}
  const EigenResult& best() const { return best_; }

private:
  EigenResult best_;
};

struct EigenOptions {
  double rayleigh_tol = 1e-12;
  double residual_tol = 1e-8;
  double vector_tol = 1e-10;  // change of the unit iterate
  int max_iter = 100000;
  double cg_tol = 1e-14;
};

/// Shifted inverse iteration on (K - sigma M)^{-1} M, sigma = eta^2 min (f/h)^2.
EigenResult smallest_eigen(const EigenProblem& prob, const EigenOptions& opt = {});

/// int_{|x| <= ratio a} v^2, exactly 1 for ratio >= 1.
double mass_fraction(const EigenResult& res, double inner_radius_ratio);

struct CounterexampleSeries {
  std::vector<double> etas;
  std::vector<double> lambda0;
  std::vector<double> mass_half;
  std::vector<int> iterations;
  std::vector<std::optional<double>> b;  // f^{-1}(1/eta) along the x1 axis when f is monotone there
  double c1 = 0.0;         // slope of lambda0 against (ln eta)^2
  double c1_intercept = 0.0;
  double q = 0.0;          // slope of ln lambda0 against ln ln eta
  bool fit_meaningful = true;
  std::string note;
  double a = 1.0;
};

CounterexampleSeries lambda0_scan(const Profile& f, const Profile& h, double a, std::span<const double> etas,
                                  std::shared_ptr<const Grid> grid, unsigned threads = 0,
                                  const EigenOptions& opt = {});

struct HoshiroReport {
  int k = 0;
  double delta = 0.0;
  std::vector<double> log_ratio;  // ln(numerator / denominator) per eta
  double exponent = 0.0;          // slope of log_ratio against ln eta
  double sqrt_c1_delta = 0.0;
  bool contradiction = false;     // exponent > 0 and k > sqrt(C1) delta
};

HoshiroReport hoshiro_ratio(const CounterexampleSeries& series, int k, double delta);

struct LowerBoundRow {
  double tau = 0.0;
  double w = 0.0;
  double lambda0 = 0.0;
  double c = 0.0;  // w^2 / lambda0
};

struct LowerBoundReport {
  std::vector<LowerBoundRow> rows;
  double c_max = 0.0;
};

/// lambda0 of -Delta + tau^2 f^2 (h = 1) against w(tau)^2 on the same grid.
LowerBoundReport lowerbound_check(const Profile& f, std::span<const double> taus, std::shared_ptr<const Grid> grid,
                                  double a = 1.0, unsigned threads = 0, const EigenOptions& opt = {});

}  // namespace degenlab
