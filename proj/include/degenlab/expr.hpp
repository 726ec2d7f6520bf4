#pragma once

// Expression trees for profiles, matrix entries, symbols and test functions.
//
// Grammar (whitespace-insensitive):
//   sum     := term (('+' | '-') term)*
//   term    := '-' term | product
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | name | name '(' args ')' | '(' sum ')'
//
// Functions: exp log abs sqrt sin cos sign heav pos (unary), min max (n-ary,
// at least two arguments), norm (at least one argument), selmax selmin (2k
// arguments: k candidates followed by k values).
//
// Expr values are immutable and may be shared and evaluated concurrently.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace degenlab::expr {

enum class Op : std::uint8_t {
  Const,
  Var,
  Neg,
  Exp,
  Log,
  Abs,
  Sqrt,
  Sin,
  Cos,
  Sign,       // sign(t), 0 at t = 0
  Heaviside,  // heav(t) = 1 for t > 0, else 0
  PosPart,    // pos(t) = [t]_+
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Min,
  Max,
  Norm,       // Euclidean norm of the arguments
  SelectMax,  // value paired with the (first) largest candidate
  SelectMin,  // value paired with the (first) smallest candidate
};

std::string_view op_name(Op op);

class Expr;

struct Node {
  Op op;
  double value = 0.0;   // Const
  std::string name;     // Var
  std::vector<Expr> args;
};

class Expr {
public:
  Expr();  // the constant 0
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  Op op() const { return node_->op; }
  double value() const { return node_->value; }
  const std::string& name() const { return node_->name; }
  const std::vector<Expr>& args() const { return node_->args; }
  const Expr& arg(std::size_t i) const { return node_->args.at(i); }
  /// Node identity; shared subtrees compare equal.
  const Node* id() const { return node_.get(); }

  bool is_const() const { return op() == Op::Const; }
  bool is_const(double v) const { return is_const() && value() == v; }

  friend bool operator==(const Expr& a, const Expr& b);

private:
  std::shared_ptr<const Node> node_;
};

enum class Role : std::uint8_t { Spatial, Frequency, Parameter };

/// Ordered, duplicate-free variable declarations.
class VarSet {
public:
  VarSet() = default;
  VarSet(std::initializer_list<std::pair<std::string, Role>> vars);

  /// Spatial x1..xn, optionally followed by frequency xi1..xin.
  static VarSet spatial(int n);
  static VarSet phase_space(int n);

  void add(std::string name, Role role);
  bool contains(std::string_view name) const;
  std::optional<std::size_t> index_of(std::string_view name) const;
  Role role(std::string_view name) const;
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  std::vector<std::string> names_with_role(Role role) const;

private:
  std::vector<std::string> names_;
  std::vector<Role> roles_;
};

/// Small name -> value table used by the tree-walking evaluator.
class Bindings {
public:
  Bindings() = default;
  Bindings(std::initializer_list<std::pair<std::string, double>> values);
  Bindings(const VarSet& vars, std::span<const double> values);

  void set(std::string_view name, double value);
  std::optional<double> get(std::string_view name) const;

private:
  std::vector<std::pair<std::string, double>> values_;
};

// Raw constructors.  `node` performs no simplification except that negation of
// a constant becomes a negative constant, so Neg(Const) never occurs.
Expr constant(double v);
Expr variable(std::string name);
Expr node(Op op, std::vector<Expr> args);

// Folding constructors: literal subtrees are evaluated, and the identities
// 0+a, a-0, 1*a, 0*a, a/1, 0/a, a^1, a^0 are applied.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, const Expr& exponent);
Expr apply(Op unary, const Expr& a);

inline Expr operator+(const Expr& a, double b) { return a + constant(b); }
inline Expr operator*(double a, const Expr& b) { return constant(a) * b; }
inline Expr operator-(double a, const Expr& b) { return constant(a) - b; }

Expr parse(std::string_view text, const VarSet& vars);

/// Canonical, fully parenthesized form.  parse(print(e)) == e.
std::string print(const Expr& e);

/// Exact symbolic derivative.  abs, min, max, norm and pos differentiate to
/// sign/selector nodes that are valid away from their kink sets.
Expr differentiate(const Expr& e, std::string_view var);

/// Mixed partial derivative: differentiate once per entry of `vars`.
Expr differentiate(const Expr& e, std::span<const std::string> vars);

double evaluate(const Expr& e, const Bindings& point);

struct LogValue {
  double value;
  bool clamped = false;  // fell back to ln(DBL_MIN) after an underflow
};

/// ln e(point) computed structurally where possible: exp(g) -> g, products,
/// quotients, powers and square roots are split into sums of logs.  Other
/// nodes are evaluated directly; a zero result (underflow) is clamped to
/// ln(DBL_MIN) and reported.
LogValue evaluate_log(const Expr& e, const Bindings& point);

/// Collects the variable names occurring in e.
std::vector<std::string> free_variables(const Expr& e);

bool depends_on(const Expr& e, std::string_view var);

/// Replaces every occurrence of variable `var`.
Expr substitute(const Expr& e, std::string_view var, const Expr& replacement);

/// Index-based evaluator compiled against a VarSet, for hot loops.
class Program {
public:
  Program() = default;
  Program(const Expr& e, const VarSet& vars);
  double operator()(std::span<const double> values) const;
  bool empty() const { return code_.empty(); }

private:
  enum class Mode : std::uint8_t { Eval, Store, Load };
  struct Instr {
    Op op;
    Mode mode;
    std::uint32_t arity;
    double value;
    std::uint32_t slot;  // variable index, or register for Store / Load
  };
  std::vector<Instr> code_;
  std::size_t max_depth_ = 0;
  std::size_t registers_ = 0;
};

}  // namespace degenlab::expr
