#include "mpoc/expression.hpp"

#include "mpoc/common.hpp"

#include <cctype>
#include <cmath>
#include <numbers>

namespace mpoc {

struct Expression::Node {
  enum Kind { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call } kind = Const;
  double value = 0.0;
  int index = 0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> a, b;

  double eval(const double* v) const {
    switch (kind) {
      case Const: return value;
      case Var: return v[index];
      case Neg: return -a->eval(v);
      case Add: return a->eval(v) + b->eval(v);
      case Sub: return a->eval(v) - b->eval(v);
      case Mul: return a->eval(v) * b->eval(v);
      case Div: return a->eval(v) / b->eval(v);
      case Pow: return std::pow(a->eval(v), b->eval(v));
      case Call: return fn(a->eval(v));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

struct FunctionEntry {
  const char* name;
  double (*fn)(double);
};

double f_sin(double x) { return std::sin(x); }
double f_cos(double x) { return std::cos(x); }
double f_tan(double x) { return std::tan(x); }
double f_exp(double x) { return std::exp(x); }
double f_log(double x) { return std::log(x); }
double f_sqrt(double x) { return std::sqrt(x); }
double f_abs(double x) { return std::abs(x); }

constexpr FunctionEntry kFunctions[] = {{"sin", f_sin},   {"cos", f_cos},   {"tan", f_tan}, {"exp", f_exp},
                                        {"log", f_log},   {"sqrt", f_sqrt}, {"abs", f_abs}};

NodePtr make(Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  // Fold constant subtrees.
  if (k != Node::Const && k != Node::Var && n->a && n->a->kind == Node::Const &&
      (!n->b || n->b->kind == Node::Const) && k != Node::Call) {
    const double v = n->eval(nullptr);
    auto c = std::make_shared<Node>();
    c->value = v;
    return c;
  }
  return n;
}

NodePtr constant(double v) {
  auto n = std::make_shared<Node>();
  n->value = v;
  return n;
}

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& vars) : t_(text), vars_(vars) {}

  NodePtr run() {
    NodePtr n = sum();
    skip();
    if (pos_ != t_.size()) fail("unexpected character '" + std::string(1, t_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw InputError("expression \"" + t_ + "\": " + what + " at position " + std::to_string(pos_ + 1));
  }
  void skip() {
    while (pos_ < t_.size() && std::isspace(static_cast<unsigned char>(t_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < t_.size() && t_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr sum() {
    NodePtr n = term();
    for (;;) {
      if (accept('+')) n = make(Node::Add, n, term());
      else if (accept('-')) n = make(Node::Sub, n, term());
      else return n;
    }
  }
  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*')) n = make(Node::Mul, n, unary());
      else if (accept('/')) n = make(Node::Div, n, unary());
      else return n;
    }
  }
  NodePtr unary() {
    if (accept('-')) return make(Node::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }
  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return make(Node::Pow, base, unary());
    return base;
  }
  NodePtr atom() {
    skip();
    if (pos_ >= t_.size()) fail("unexpected end of input");
    const char c = t_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = sum();
      if (!accept(')')) fail("missing ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = t_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<size_t>(end - begin);
      return constant(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const size_t start = pos_;
      while (pos_ < t_.size() && (std::isalnum(static_cast<unsigned char>(t_[pos_])) || t_[pos_] == '_')) ++pos_;
      const std::string name = t_.substr(start, pos_ - start);
      for (const auto& f : kFunctions) {
        if (name == f.name) {
          if (!accept('(')) fail("expected '(' after " + name);
          NodePtr arg = sum();
          if (!accept(')')) fail("missing ')'");
          auto n = std::make_shared<Node>();
          n->kind = Node::Call;
          n->fn = f.fn;
          n->a = arg;
          if (arg->kind == Node::Const) return constant(f.fn(arg->value));
          return n;
        }
      }
      for (size_t i = 0; i < vars_.size(); ++i) {
        if (name == vars_[i]) {
          auto n = std::make_shared<Node>();
          n->kind = Node::Var;
          n->index = static_cast<int>(i);
          return n;
        }
      }
      if (name == "pi") return constant(std::numbers::pi);
      if (name == "e") return constant(std::numbers::e);
      pos_ = start;
      fail("unknown name '" + name + "'");
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  const std::string& t_;
  const std::vector<std::string>& vars_;
  size_t pos_ = 0;
};

}  // namespace

Expression::Expression() : root_(constant(0.0)), text_("0") {}

Expression Expression::parse(const std::string& text, const std::vector<std::string>& variables) {
  Expression e;
  e.text_ = text;
  e.root_ = Parser(text, variables).run();
  return e;
}

double Expression::eval(const double* values) const { return root_->eval(values); }

bool Expression::is_constant() const { return root_->kind == Node::Const; }

}  // namespace mpoc
