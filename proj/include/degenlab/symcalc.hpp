#pragma once

#include <optional>
#include <string>
#include <vector>

#include "degenlab/expr.hpp"
#include "degenlab/matrixcheck.hpp"
#include "degenlab/profiles.hpp"

namespace degenlab {

/// Real symbol a(x, xi) over x1..xn, xi1..xin with nominal class S^m_{rho,eta}.
struct SymbolExpr {
  expr::Expr e;
  int n = 1;
  double order = 0.0;
  double rho = 1.0;
  double eta = 0.0;
  std::optional<int> log_power;

  static SymbolExpr parse(std::string_view text, int n, double order = 0.0, double rho = 1.0, double eta = 0.0);
  expr::VarSet variables() const { return expr::VarSet::phase_space(n); }
};

/// Complex expression re + i im.
struct ComplexExpr {
  expr::Expr re;
  expr::Expr im;
  bool is_zero() const { return re.is_const(0.0) && im.is_const(0.0); }
};

/// Phase-space sample points: |xi| values times unit directions, times spatial points.
struct Lattice {
  int n = 1;
  std::vector<double> xi_norms;
  std::vector<Point> directions;
  std::vector<Point> xs;

  /// 24 log-spaced |xi| in [lo, hi], 8 directions (n = 1: +-1; n >= 3: +-e_k),
  /// 16 spatial samples in [-0.9, 0.9]^n.
  static Lattice standard(int n, double lo = 10.0, double hi = 1e4);
  /// Values (x, xi) of point (s, d, k), laid out for phase_space(n).
  void point(std::size_t s, std::size_t d, std::size_t k, std::span<double> out) const;
};

/// <xi> = sqrt(1 + |xi|^2) as an expression.
expr::Expr japanese_bracket(int n);

struct OrderEstimate {
  double slope = 0.0;            // d log sup|D a| / d log <xi>, -inf when the derivative vanishes
  double constant = 0.0;         // max over the lattice of |D a| / <xi>^slope (log-corrected)
  int log_power = 0;             // k in <xi>^slope (log <xi>)^k
  bool log_flag = false;
  double nominal = 0.0;          // m - rho|beta| + eta|alpha|
  bool consistent = true;        // slope <= nominal + 0.05
  double rss = 0.0;
};

/// Decay rate of D_x^alpha D_xi^beta a on the lattice, |alpha| + |beta| <= 3.
OrderEstimate estimate_order(const SymbolExpr& a, const MultiIndex& alpha, const MultiIndex& beta,
                             const Lattice& lattice);

struct ParametrixChain {
  SymbolExpr a;
  std::vector<ComplexExpr> b;   // b_0..b_M
  ComplexExpr sum;
  ComplexExpr b1_displayed;     // i b0 grad_xi a . grad_x b0, for cross-checking b[1]
  double ellipticity = 0.0;     // min over the lattice of |a| / |xi|^m
};

/// b_j from b_0 a = 1, b_j = -b_0 sum_{1<=|alpha|<=j} (1/alpha!) d_xi^alpha a D_x^alpha b_{j-|alpha|}.
ParametrixChain parametrix(const SymbolExpr& a, int M, const Lattice& lattice);

struct ResidualReport {
  ComplexExpr residual;
  double slope = 0.0;  // -inf when the residual vanishes identically
  std::vector<double> xi_norms;
  std::vector<double> sup_abs;  // sup over directions and x per |xi|
};

/// a o (sum b_j) - 1 through derivative order M + 2, with its decay slope in <xi>.
ResidualReport residual_order(const ParametrixChain& chain, const Lattice& lattice);

/// {f, g} = sum_i (d_xi_i f d_x_i g - d_x_i f d_xi_i g).
expr::Expr poisson_bracket(const expr::Expr& f, const expr::Expr& g, int n);
SymbolExpr poisson_bracket(const SymbolExpr& f, const SymbolExpr& g);

struct WeightSymbol {
  SymbolExpr lambda;      // max(|xi|, e)^gamma exp(-N0 log(max(|xi|, e)) psi)
  SymbolExpr log_lambda;  // gamma log L - N0 log L psi
  std::string extension = "|xi| frozen at e below e";
};

/// Checks psi >= 0 and psi(x, c xi) = psi(x, xi), c in {2, 10}, on the lattice.
WeightSymbol weight_symbol(double gamma, double n0, const SymbolExpr& psi, const Lattice& lattice);

/// Smoothstep template psi = S((|(x, xi~/|xi|)| - rho) / (2 rho)) with xi~ = (xi1..xim):
/// 0 inside radius rho, 1 outside 3 rho, homogeneous of degree 0 in xi.
SymbolExpr psi_template(int n, int m, double rho);

struct R1Symbol {
  int n = 0;
  int p = 0;
  double s = 0.0;
  std::vector<std::vector<ComplexExpr>> entries;  // size (n - p + 1)^2
  double theta_max = 0.0;                         // max |xi_k xi_i| / <xi>^2 on the lattice
  bool theta_bounded = true;
  SubordinateResult subunit;                      // S_k^T S_k <= C Q
};

/// -i sum_k d_x_k q_ij xi_k xi_{p-1+i} / <xi>^2 for the block Q acting on x_p..x_n.
R1Symbol r1_symbol(const MatrixFunction& q, int n, int p, double s, const Lattice& lattice,
                   std::span<const Point> samples);

/// Value of a complex symbol at phase-space values (x, xi).
std::pair<double, double> evaluate(const ComplexExpr& c, const expr::VarSet& vars, std::span<const double> values);

}  // namespace degenlab
