#include <cctype>
#include <charconv>
#include <numbers>

#include "degenlab/error.hpp"
#include "degenlab/expr.hpp"

namespace degenlab::expr {

namespace {

struct FunctionInfo {
  std::string_view name;
  Op op;
};

constexpr FunctionInfo kFunctions[] = {
    {"exp", Op::Exp},       {"log", Op::Log},        {"abs", Op::Abs},        {"sqrt", Op::Sqrt},
    {"sin", Op::Sin},       {"cos", Op::Cos},        {"sign", Op::Sign},      {"heav", Op::Heaviside},
    {"pos", Op::PosPart},   {"min", Op::Min},        {"max", Op::Max},        {"norm", Op::Norm},
    {"selmax", Op::SelectMax}, {"selmin", Op::SelectMin},
};

class Parser {
public:
  Parser(std::string_view text, const VarSet& vars) : text_(text), vars_(vars) {}

  Expr run() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError(pos_, "expression");
    Expr e = sum();
    skip_ws();
    if (pos_ < text_.size()) throw SyntaxError(pos_, "operator or end of input");
    return e;
  }

private:
  std::string_view text_;
  const VarSet& vars_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) throw SyntaxError(pos_, std::string("'") + c + "'");
  }

  Expr sum() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = node(Op::Add, {lhs, term()});
      } else if (accept('-')) {
        lhs = node(Op::Sub, {lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  // A leading minus negates the whole product: -1/x is neg(div(1, x)).
  Expr term() {
    if (accept('-')) return node(Op::Neg, {term()});
    return product();
  }

  Expr product() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = node(Op::Mul, {lhs, unary()});
      } else if (accept('/')) {
        lhs = node(Op::Div, {lhs, unary()});
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return node(Op::Neg, {unary()});
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) return node(Op::Pow, {base, unary()});
    return base;
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError(pos_, "operand");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
    if (accept('(')) {
      Expr e = sum();
      expect(')');
      return e;
    }
    throw SyntaxError(pos_, "operand");
  }

  Expr number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc() || ptr != text_.data() + pos_) throw SyntaxError(start, "number");
    return constant(v);
  }

  Expr name() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view id = text_.substr(start, pos_ - start);
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      for (const auto& f : kFunctions) {
        if (f.name == id) return call(f.op, start);
      }
      throw UnknownVariable("unknown function '" + std::string(id) + "'");
    }
    if (vars_.contains(id)) return variable(std::string(id));
    if (id == "pi") return constant(std::numbers::pi);
    if (id == "e") return constant(std::numbers::e);
    throw UnknownVariable(std::string(id));
  }

  Expr call(Op op, std::size_t start) {
    expect('(');
    std::vector<Expr> args;
    if (!accept(')')) {
      args.push_back(sum());
      while (accept(',')) args.push_back(sum());
      expect(')');
    }
    try {
      return node(op, std::move(args));
    } catch (const ArityError& err) {
      throw ArityError(std::string(err.what()) + " (call at position " + std::to_string(start) + ")");
    }
  }
};

}  // namespace

Expr parse(std::string_view text, const VarSet& vars) { return Parser(text, vars).run(); }

}  // namespace degenlab::expr
