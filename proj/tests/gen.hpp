#pragma once

// Random expression generators shared by the property tests.

#include <random>

#include "degenlab/expr.hpp"

namespace gen {

using degenlab::expr::Expr;
using degenlab::expr::Op;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int pick(std::mt19937_64& rng, int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

/// Arbitrary well-formed tree built with the raw constructors, for printer
/// round trips.
inline Expr any_tree(std::mt19937_64& rng, int depth, int nvars = 2) {
  using namespace degenlab::expr;
  if (depth == 0 || pick(rng, 4) == 0) {
    if (pick(rng, 2) == 0) return variable("x" + std::to_string(1 + pick(rng, nvars)));
    switch (pick(rng, 4)) {
      case 0: return constant(static_cast<double>(pick(rng, 10)));
      case 1: return constant(uniform(rng, -5.0, 5.0));
      case 2: return constant(std::ldexp(uniform(rng, 0.5, 1.0), pick(rng, 120) - 60));
      default: return constant(-static_cast<double>(1 + pick(rng, 5)));
    }
  }
  static const Op unary[] = {Op::Neg, Op::Exp, Op::Log, Op::Abs, Op::Sqrt, Op::Sin, Op::Cos, Op::Sign, Op::Heaviside, Op::PosPart};
  static const Op binary[] = {Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Pow};
  switch (pick(rng, 4)) {
    case 0:
      return node(unary[pick(rng, 10)], {any_tree(rng, depth - 1, nvars)});
    case 1: {
      const Op op = pick(rng, 2) == 0 ? Op::Min : pick(rng, 2) == 0 ? Op::Max : Op::Norm;
      std::vector<Expr> args;
      const int k = 2 + pick(rng, 2);
      for (int i = 0; i < k; ++i) args.push_back(any_tree(rng, depth - 1, nvars));
      return node(op, std::move(args));
    }
    default:
      return node(binary[pick(rng, 5)], {any_tree(rng, depth - 1, nvars), any_tree(rng, depth - 1, nvars)});
  }
}

/// Smooth, kink-free tree in x1 whose values stay moderate on [-2, 2].
inline Expr smooth_tree(std::mt19937_64& rng, int depth) {
  using namespace degenlab::expr;
  const Expr x = variable("x1");
  if (depth == 0 || pick(rng, 5) == 0) {
    if (pick(rng, 3) != 0) return x;
    return constant(std::round(uniform(rng, -3.0, 3.0) * 4.0) / 4.0);
  }
  const Expr a = smooth_tree(rng, depth - 1);
  switch (pick(rng, 11)) {
    case 0: return node(Op::Add, {a, smooth_tree(rng, depth - 1)});
    case 1: return node(Op::Sub, {a, smooth_tree(rng, depth - 1)});
    case 2: return node(Op::Mul, {a, smooth_tree(rng, depth - 1)});
    case 3: {
      // Denominator bounded away from 0.
      const Expr b = smooth_tree(rng, depth - 1);
      return node(Op::Div, {a, node(Op::Add, {constant(1.0), node(Op::Pow, {b, constant(2.0)})})});
    }
    case 4: return node(Op::Exp, {node(Op::Sin, {a})});
    case 5: return node(Op::Log, {node(Op::Add, {constant(1.0), node(Op::Pow, {a, constant(2.0)})})});
    case 6: return node(Op::Sqrt, {node(Op::Add, {constant(2.0), node(Op::Cos, {a})})});
    case 7: return node(Op::Sin, {a});
    case 8: return node(Op::Cos, {a});
    case 9: return node(Op::Pow, {node(Op::Sin, {a}), constant(static_cast<double>(1 + pick(rng, 3)))});
    default:
      return node(Op::Pow, {node(Op::Add, {constant(1.5), node(Op::Cos, {a})}), constant(uniform(rng, -1.5, 1.5))});
  }
}

}  // namespace gen
