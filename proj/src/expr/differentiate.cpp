#include <cmath>

#include "degenlab/error.hpp"
#include "degenlab/expr.hpp"

namespace degenlab::expr {

namespace {

Expr d(const Expr& e, std::string_view var);

Expr d_select(const Expr& e, std::string_view var) {
  // selmax(c1..ck, v1..vk)' = selmax(c1..ck, v1'..vk'), valid away from ties.
  const std::size_t k = e.args().size() / 2;
  std::vector<Expr> args(e.args().begin(), e.args().begin() + static_cast<std::ptrdiff_t>(k));
  bool all_zero = true;
  for (std::size_t i = 0; i < k; ++i) {
    args.push_back(d(e.arg(k + i), var));
    all_zero = all_zero && args.back().is_const(0.0);
  }
  if (all_zero) return constant(0.0);
  return node(e.op(), std::move(args));
}

Expr d_minmax(const Expr& e, std::string_view var) {
  std::vector<Expr> args = e.args();
  bool all_zero = true;
  for (const auto& a : e.args()) {
    args.push_back(d(a, var));
    all_zero = all_zero && args.back().is_const(0.0);
  }
  if (all_zero) return constant(0.0);
  return node(e.op() == Op::Max ? Op::SelectMax : Op::SelectMin, std::move(args));
}

Expr d(const Expr& e, std::string_view var) {
  switch (e.op()) {
    case Op::Const:
      return constant(0.0);
    case Op::Var:
      return constant(e.name() == var ? 1.0 : 0.0);
    case Op::Sign:
    case Op::Heaviside:
      return constant(0.0);
    default:
      break;
  }

  if (e.op() == Op::SelectMax || e.op() == Op::SelectMin) return d_select(e, var);
  if (e.op() == Op::Min || e.op() == Op::Max) return d_minmax(e, var);

  if (e.op() == Op::Norm) {
    Expr num = constant(0.0);
    for (const auto& a : e.args()) num = num + a * d(a, var);
    return num / e;
  }

  const Expr& u = e.arg(0);
  const Expr du = d(u, var);

  switch (e.op()) {
    case Op::Neg:
      return -du;
    case Op::Exp:
      return du * e;
    case Op::Log:
      return du / u;
    case Op::Abs:
      return apply(Op::Sign, u) * du;
    case Op::Sqrt:
      return du / (constant(2.0) * e);
    case Op::Sin:
      return apply(Op::Cos, u) * du;
    case Op::Cos:
      return -(apply(Op::Sin, u) * du);
    case Op::PosPart:
      return apply(Op::Heaviside, u) * du;
    default:
      break;
  }

  const Expr& v = e.arg(1);
  const Expr dv = d(v, var);
  switch (e.op()) {
    case Op::Add:
      return du + dv;
    case Op::Sub:
      return du - dv;
    case Op::Mul:
      return du * v + u * dv;
    case Op::Div:
      if (dv.is_const(0.0)) return du / v;
      return (du * v - u * dv) / pow(v, constant(2.0));
    case Op::Pow:
      if (v.is_const()) {
        // Power rule for constant exponents (integer or real).
        return v * pow(u, constant(v.value() - 1.0)) * du;
      }
      // a^b = exp(b log a), restricted to a > 0.
      return e * (dv * apply(Op::Log, u) + v * du / u);
    default:
      break;
  }
  throw DomainError("cannot differentiate node " + std::string(op_name(e.op())));
}

}  // namespace

Expr differentiate(const Expr& e, std::string_view var) { return d(e, var); }

Expr differentiate(const Expr& e, std::span<const std::string> vars) {
  Expr out = e;
  for (const auto& v : vars) out = d(out, v);
  return out;
}

}  // namespace degenlab::expr
