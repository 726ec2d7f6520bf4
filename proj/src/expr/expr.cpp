#include "degenlab/expr.hpp"

#include <algorithm>
#include <array>
#include <cfloat>
#include <charconv>
#include <cmath>
#include <set>
#include <unordered_map>

#include "degenlab/error.hpp"

namespace degenlab::expr {

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Const: return "const";
    case Op::Var: return "var";
    case Op::Neg: return "neg";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Abs: return "abs";
    case Op::Sqrt: return "sqrt";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Sign: return "sign";
    case Op::Heaviside: return "heav";
    case Op::PosPart: return "pos";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Pow: return "^";
    case Op::Min: return "min";
    case Op::Max: return "max";
    case Op::Norm: return "norm";
    case Op::SelectMax: return "selmax";
    case Op::SelectMin: return "selmin";
  }
  return "?";
}

namespace {

bool is_unary(Op op) {
  switch (op) {
    case Op::Neg:
    case Op::Exp:
    case Op::Log:
    case Op::Abs:
    case Op::Sqrt:
    case Op::Sin:
    case Op::Cos:
    case Op::Sign:
    case Op::Heaviside:
    case Op::PosPart:
      return true;
    default:
      return false;
  }
}

bool is_binary(Op op) {
  return op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div || op == Op::Pow;
}

const Expr& zero() {
  static const Expr z = constant(0.0);
  return z;
}

[[noreturn]] void domain(std::string_view what, double v, const std::string& where) {
  throw DomainError(std::string(what) + " (value " + std::to_string(v) + ") at " + where);
}

// Scalar kernels shared by the tree walker and Program.  `where` is only
// materialized on error.
template <class Where>
double apply_unary(Op op, double a, Where&& where) {
  switch (op) {
    case Op::Neg: return -a;
    case Op::Exp: return std::exp(a);
    case Op::Log:
      if (!(a > 0.0)) domain("log of non-positive value", a, where());
      return std::log(a);
    case Op::Abs: return std::fabs(a);
    case Op::Sqrt:
      if (a < 0.0) domain("sqrt of negative value", a, where());
      return std::sqrt(a);
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    case Op::Sign: return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
    case Op::Heaviside: return a > 0.0 ? 1.0 : 0.0;
    case Op::PosPart: return a > 0.0 ? a : 0.0;
    default: break;
  }
  throw DomainError("not a unary operator");
}

template <class Where>
double apply_binary(Op op, double a, double b, Where&& where) {
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div:
      if (b == 0.0) domain("division by zero", a, where());
      return a / b;
    case Op::Pow: {
      const bool integral = std::nearbyint(b) == b;
      if (a < 0.0 && !integral) domain("negative base with non-integer exponent", a, where());
      if (a == 0.0 && b < 0.0) domain("zero base with negative exponent", b, where());
      return std::pow(a, b);
    }
    default: break;
  }
  throw DomainError("not a binary operator");
}

double apply_nary(Op op, std::span<const double> v) {
  switch (op) {
    case Op::Min: return *std::min_element(v.begin(), v.end());
    case Op::Max: return *std::max_element(v.begin(), v.end());
    case Op::Norm: {
      double s = 0.0;
      for (double x : v) s += x * x;
      return std::sqrt(s);
    }
    case Op::SelectMax:
    case Op::SelectMin: {
      const std::size_t k = v.size() / 2;
      std::size_t best = 0;
      for (std::size_t i = 1; i < k; ++i) {
        if (op == Op::SelectMax ? v[i] > v[best] : v[i] < v[best]) best = i;
      }
      return v[k + best];
    }
    default: break;
  }
  throw DomainError("not an n-ary operator");
}

void format_double(std::string& out, double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), res.ptr);
}

void print_into(std::string& out, const Expr& e) {
  const Op op = e.op();
  switch (op) {
    case Op::Const:
      if (std::signbit(e.value())) {
        out += '(';
        format_double(out, e.value());
        out += ')';
      } else {
        format_double(out, e.value());
      }
      return;
    case Op::Var:
      out += e.name();
      return;
    case Op::Neg:
      out += "(-";
      print_into(out, e.arg(0));
      out += ')';
      return;
    default:
      break;
  }
  if (is_binary(op)) {
    out += '(';
    print_into(out, e.arg(0));
    out += ' ';
    out += op_name(op);
    out += ' ';
    print_into(out, e.arg(1));
    out += ')';
    return;
  }
  out += op_name(op);
  out += '(';
  for (std::size_t i = 0; i < e.args().size(); ++i) {
    if (i) out += ", ";
    print_into(out, e.arg(i));
  }
  out += ')';
}

double eval_tree(const Expr& e, const Bindings& point) {
  const Op op = e.op();
  if (op == Op::Const) return e.value();
  if (op == Op::Var) {
    auto v = point.get(e.name());
    if (!v) throw UnboundVariable(e.name());
    return *v;
  }
  auto where = [&] { return print(e); };
  if (is_unary(op)) return apply_unary(op, eval_tree(e.arg(0), point), where);
  if (is_binary(op)) {
    const double a = eval_tree(e.arg(0), point);
    const double b = eval_tree(e.arg(1), point);
    return apply_binary(op, a, b, where);
  }
  std::vector<double> vals;
  vals.reserve(e.args().size());
  for (const auto& a : e.args()) vals.push_back(eval_tree(a, point));
  return apply_nary(op, vals);
}

// Structural log.  Returns nullopt when the structural rules do not apply, in
// which case the caller evaluates directly.
std::optional<LogValue> log_structural(const Expr& e, const Bindings& point) {
  switch (e.op()) {
    case Op::Const:
      if (e.value() > 0.0) return LogValue{std::log(e.value())};
      return std::nullopt;
    case Op::Exp:
      return LogValue{eval_tree(e.arg(0), point)};
    case Op::Sqrt: {
      auto a = log_structural(e.arg(0), point);
      if (!a) return std::nullopt;
      return LogValue{0.5 * a->value, a->clamped};
    }
    case Op::Mul:
    case Op::Div: {
      auto a = log_structural(e.arg(0), point);
      auto b = log_structural(e.arg(1), point);
      if (!a || !b) return std::nullopt;
      const double v = e.op() == Op::Mul ? a->value + b->value : a->value - b->value;
      return LogValue{v, a->clamped || b->clamped};
    }
    case Op::Pow: {
      auto a = log_structural(e.arg(0), point);
      if (!a) return std::nullopt;
      return LogValue{eval_tree(e.arg(1), point) * a->value, a->clamped};
    }
    case Op::Add: {
      auto a = log_structural(e.arg(0), point);
      auto b = log_structural(e.arg(1), point);
      if (!a || !b) return std::nullopt;
      const double hi = std::max(a->value, b->value);
      const double lo = std::min(a->value, b->value);
      if (hi == -HUGE_VAL) return LogValue{hi, a->clamped || b->clamped};
      return LogValue{hi + std::log1p(std::exp(lo - hi)), a->clamped || b->clamped};
    }
    default: {
      const double v = eval_tree(e, point);
      if (v > 0.0) return LogValue{std::log(v)};
      return std::nullopt;
    }
  }
}

void collect_vars(const Expr& e, std::set<std::string>& out) {
  if (e.op() == Op::Var) {
    out.insert(e.name());
    return;
  }
  for (const auto& a : e.args()) collect_vars(a, out);
}

}  // namespace

Expr::Expr() : Expr(zero()) {}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.op() != b.op()) return false;
  if (a.op() == Op::Const) {
    return a.value() == b.value() || (std::isnan(a.value()) && std::isnan(b.value()));
  }
  if (a.op() == Op::Var) return a.name() == b.name();
  if (a.args().size() != b.args().size()) return false;
  for (std::size_t i = 0; i < a.args().size(); ++i) {
    if (!(a.arg(i) == b.arg(i))) return false;
  }
  return true;
}

// --- VarSet -----------------------------------------------------------------

VarSet::VarSet(std::initializer_list<std::pair<std::string, Role>> vars) {
  for (const auto& [n, r] : vars) add(n, r);
}

VarSet VarSet::spatial(int n) {
  VarSet v;
  for (int i = 1; i <= n; ++i) v.add("x" + std::to_string(i), Role::Spatial);
  return v;
}

VarSet VarSet::phase_space(int n) {
  VarSet v = spatial(n);
  for (int i = 1; i <= n; ++i) v.add("xi" + std::to_string(i), Role::Frequency);
  return v;
}

void VarSet::add(std::string name, Role role) {
  if (contains(name)) throw Error("DuplicateVariable", name);
  names_.push_back(std::move(name));
  roles_.push_back(role);
}

bool VarSet::contains(std::string_view name) const { return index_of(name).has_value(); }

std::optional<std::size_t> VarSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

Role VarSet::role(std::string_view name) const {
  auto i = index_of(name);
  if (!i) throw UnknownVariable(std::string(name));
  return roles_[*i];
}

std::vector<std::string> VarSet::names_with_role(Role role) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (roles_[i] == role) out.push_back(names_[i]);
  }
  return out;
}

// --- Bindings ---------------------------------------------------------------

Bindings::Bindings(std::initializer_list<std::pair<std::string, double>> values) {
  for (const auto& [n, v] : values) set(n, v);
}

Bindings::Bindings(const VarSet& vars, std::span<const double> values) {
  if (values.size() != vars.size()) throw DimensionMismatch("binding arity");
  for (std::size_t i = 0; i < values.size(); ++i) set(vars.names()[i], values[i]);
}

void Bindings::set(std::string_view name, double value) {
  for (auto& [n, v] : values_) {
    if (n == name) {
      v = value;
      return;
    }
  }
  values_.emplace_back(std::string(name), value);
}

std::optional<double> Bindings::get(std::string_view name) const {
  for (const auto& [n, v] : values_) {
    if (n == name) return v;
  }
  return std::nullopt;
}

// --- construction -------------------------------------------------------------

Expr constant(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = v;
  return Expr(std::move(n));
}

Expr variable(std::string name) {
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr node(Op op, std::vector<Expr> args) {
  if (op == Op::Const || op == Op::Var) throw ArityError("leaf nodes take no arguments");
  if (is_unary(op) && args.size() != 1) throw ArityError(std::string(op_name(op)) + " takes 1 argument");
  if (is_binary(op) && args.size() != 2) throw ArityError(std::string(op_name(op)) + " takes 2 arguments");
  if ((op == Op::Min || op == Op::Max) && args.size() < 2) {
    throw ArityError(std::string(op_name(op)) + " takes at least 2 arguments");
  }
  if (op == Op::Norm && args.empty()) throw ArityError("norm takes at least 1 argument");
  if ((op == Op::SelectMax || op == Op::SelectMin) && (args.size() < 2 || args.size() % 2 != 0)) {
    throw ArityError(std::string(op_name(op)) + " takes an even number of arguments");
  }
  if (op == Op::Neg && args[0].is_const()) return constant(-args[0].value());
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = std::move(args);
  return Expr(std::move(n));
}

namespace {

std::optional<Expr> fold_if_finite(double v) {
  if (std::isfinite(v)) return constant(v);
  return std::nullopt;
}

}  // namespace

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) {
    if (auto f = fold_if_finite(a.value() + b.value())) return *f;
  }
  if (a.is_const(0.0)) return b;
  if (b.is_const(0.0)) return a;
  return node(Op::Add, {a, b});
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) {
    if (auto f = fold_if_finite(a.value() - b.value())) return *f;
  }
  if (b.is_const(0.0)) return a;
  if (a.is_const(0.0)) return -b;
  return node(Op::Sub, {a, b});
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const()) {
    if (auto f = fold_if_finite(a.value() * b.value())) return *f;
  }
  if (a.is_const(0.0) || b.is_const(0.0)) return constant(0.0);
  if (a.is_const(1.0)) return b;
  if (b.is_const(1.0)) return a;
  return node(Op::Mul, {a, b});
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_const() && b.is_const() && b.value() != 0.0) {
    if (auto f = fold_if_finite(a.value() / b.value())) return *f;
  }
  if (a.is_const(0.0) && !b.is_const(0.0)) return constant(0.0);
  if (b.is_const(1.0)) return a;
  return node(Op::Div, {a, b});
}

Expr operator-(const Expr& a) {
  if (a.op() == Op::Neg) return a.arg(0);
  return node(Op::Neg, {a});
}

Expr pow(const Expr& base, const Expr& exponent) {
  if (base.is_const() && exponent.is_const()) {
    try {
      const double v = apply_binary(Op::Pow, base.value(), exponent.value(), [] { return std::string(); });
      if (auto f = fold_if_finite(v)) return *f;
    } catch (const DomainError&) {
    }
  }
  if (exponent.is_const(1.0)) return base;
  if (exponent.is_const(0.0)) return constant(1.0);
  return node(Op::Pow, {base, exponent});
}

Expr apply(Op unary, const Expr& a) {
  if (!is_unary(unary)) throw ArityError(std::string(op_name(unary)) + " is not unary");
  if (unary == Op::Neg) return -a;
  if (a.is_const()) {
    try {
      const double v = apply_unary(unary, a.value(), [] { return std::string(); });
      if (auto f = fold_if_finite(v)) return *f;
    } catch (const DomainError&) {
    }
  }
  return node(unary, {a});
}

// --- printing / evaluation ------------------------------------------------------

std::string print(const Expr& e) {
  std::string out;
  print_into(out, e);
  return out;
}

double evaluate(const Expr& e, const Bindings& point) { return eval_tree(e, point); }

LogValue evaluate_log(const Expr& e, const Bindings& point) {
  std::optional<LogValue> s;
  try {
    s = log_structural(e, point);
  } catch (const DomainError&) {
    s.reset();
  }
  if (s) return *s;
  const double v = eval_tree(e, point);
  if (v > 0.0) return LogValue{std::log(v)};
  if (v == 0.0) return LogValue{std::log(DBL_MIN), true};
  throw DomainError("log of negative value " + std::to_string(v) + " at " + print(e));
}

std::vector<std::string> free_variables(const Expr& e) {
  std::set<std::string> s;
  collect_vars(e, s);
  return {s.begin(), s.end()};
}

bool depends_on(const Expr& e, std::string_view var) {
  if (e.op() == Op::Var) return e.name() == var;
  return std::any_of(e.args().begin(), e.args().end(), [&](const Expr& a) { return depends_on(a, var); });
}

Expr substitute(const Expr& e, std::string_view var, const Expr& replacement) {
  if (e.op() == Op::Var) return e.name() == var ? replacement : e;
  if (e.op() == Op::Const) return e;
  std::vector<Expr> args;
  args.reserve(e.args().size());
  for (const auto& a : e.args()) args.push_back(substitute(a, var, replacement));
  return node(e.op(), std::move(args));
}

// --- Program ----------------------------------------------------------------------

namespace {

struct Compiler {
  explicit Compiler(const VarSet& v) : vars(v) {}
  const VarSet& vars;
  std::size_t depth = 0;
  std::size_t max_depth = 0;
  std::unordered_map<const Node*, int> uses;
  std::unordered_map<const Node*, std::uint32_t> reg;
  std::size_t registers = 0;

  void count(const Expr& e) {
    if (e.op() == Op::Const || e.op() == Op::Var) return;
    if (uses[e.id()]++ > 0) return;
    for (const auto& a : e.args()) count(a);
  }

  template <class Code>
  void emit(Code& code, const Expr& e) {
    using Instr = typename Code::value_type;
    using Mode = decltype(Instr::mode);
    if (e.op() == Op::Const) {
      code.push_back(Instr{Op::Const, Mode::Eval, 0, e.value(), 0});
      push(1);
      return;
    }
    if (e.op() == Op::Var) {
      auto slot = vars.index_of(e.name());
      if (!slot) throw UnknownVariable(e.name());
      code.push_back(Instr{Op::Var, Mode::Eval, 0, 0.0, static_cast<std::uint32_t>(*slot)});
      push(1);
      return;
    }
    if (auto it = reg.find(e.id()); it != reg.end()) {
      code.push_back(Instr{e.op(), Mode::Load, 0, 0.0, it->second});
      push(1);
      return;
    }
    for (const auto& a : e.args()) emit(code, a);
    const auto n = static_cast<std::uint32_t>(e.args().size());
    code.push_back(Instr{e.op(), Mode::Eval, n, 0.0, 0});
    depth -= n;
    push(1);
    if (uses[e.id()] > 1) {
      const auto r = static_cast<std::uint32_t>(registers++);
      reg.emplace(e.id(), r);
      code.push_back(Instr{e.op(), Mode::Store, 0, 0.0, r});
    }
  }

  void push(std::size_t k) {
    depth += k;
    max_depth = std::max(max_depth, depth);
  }
};

}  // namespace

Program::Program(const Expr& e, const VarSet& vars) {
  Compiler c(vars);
  c.count(e);
  c.emit(code_, e);
  max_depth_ = c.max_depth;
  registers_ = c.registers;
}

double Program::operator()(std::span<const double> values) const {
  std::array<double, 64> small{};
  std::vector<double> large;
  double* stack = small.data();
  if (max_depth_ > small.size()) {
    large.resize(max_depth_);
    stack = large.data();
  }
  std::vector<double> regs(registers_);
  std::size_t top = 0;
  for (const auto& in : code_) {
    if (in.mode == Mode::Store) {
      regs[in.slot] = stack[top - 1];
      continue;
    }
    if (in.mode == Mode::Load) {
      stack[top++] = regs[in.slot];
      continue;
    }
    auto where = [&] { return std::string(op_name(in.op)) + " node"; };
    switch (in.op) {
      case Op::Const:
        stack[top++] = in.value;
        break;
      case Op::Var:
        stack[top++] = values[in.slot];
        break;
      default:
        if (is_unary(in.op)) {
          stack[top - 1] = apply_unary(in.op, stack[top - 1], where);
        } else if (is_binary(in.op)) {
          const double b = stack[--top];
          stack[top - 1] = apply_binary(in.op, stack[top - 1], b, where);
        } else {
          const double v = apply_nary(in.op, std::span<const double>(stack + top - in.arity, in.arity));
          top -= in.arity;
          stack[top++] = v;
        }
    }
  }
  return stack[0];
}

}  // namespace degenlab::expr
