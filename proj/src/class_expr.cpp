#include "pqmc/class_expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

#include "pqmc/errors.hpp"

namespace pqmc {

struct ClassExpression::Node {
  enum class Op { number, leaf, add, mul, compose } op;
  double value = 0.0;          // number
  GrowthClass leaf;            // leaf
  std::vector<std::shared_ptr<const Node>> kids;

  [[nodiscard]] bool constant() const {
    if (op == Op::number) return true;
    if (op == Op::mul) {
      for (const auto& k : kids) {
        if (!k->constant()) return false;
      }
      return true;
    }
    return false;
  }
};

namespace {

using Node = ClassExpression::Node;
using NodePtr = std::shared_ptr<const Node>;

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError("class expression: " + what + " at position " +
                          std::to_string(pos_) + " in '" + std::string(s_) + "'");
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  bool keyword(std::string_view kw) {
    skip();
    if (s_.substr(pos_, kw.size()) == kw) {
      const std::size_t end = pos_ + kw.size();
      if (end < s_.size() && s_[end] == '(') {
        pos_ = end;
        return true;
      }
    }
    return false;
  }

  double number() {
    skip();
    const char* first = s_.data() + pos_;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), v);
    if (ec != std::errc() || ptr == first) fail("expected a number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return v;
  }

  static NodePtr make(Node::Op op, std::vector<NodePtr> kids) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->kids = std::move(kids);
    return n;
  }

  NodePtr expr() {
    std::vector<NodePtr> terms{term()};
    while (accept('+')) terms.push_back(term());
    if (terms.size() == 1) return terms.front();
    return make(Node::Op::add, std::move(terms));
  }

  NodePtr term() {
    const std::size_t start = pos_;
    std::vector<NodePtr> factors{factor()};
    while (accept('*')) factors.push_back(factor());
    NodePtr t = factors.size() == 1 ? factors.front()
                                    : make(Node::Op::mul, std::move(factors));
    if (t->constant()) {
      pos_ = start;
      fail("a constant term has no growth class");
    }
    return t;
  }

  NodePtr factor() {
    if (accept('(')) {
      NodePtr e = expr();
      expect(')');
      return e;
    }
    const bool gp = keyword("Gp");
    if (gp || keyword("Ge")) {
      expect('(');
      const double M = number();
      expect(',');
      const double B = number();
      expect(',');
      const double k = number();
      expect(')');
      auto n = std::make_shared<Node>();
      n->op = Node::Op::leaf;
      try {
        n->leaf = gp ? GrowthClass::poly(M, B, k) : GrowthClass::expo(M, B, k);
      } catch (const DomainError& e) {
        fail(e.what());
      }
      return n;
    }
    if (keyword("compose")) {
      expect('(');
      NodePtr outer = expr();
      expect(',');
      NodePtr inner = expr();
      expect(')');
      return make(Node::Op::compose, {outer, inner});
    }
    auto n = std::make_shared<Node>();
    n->op = Node::Op::number;
    n->value = number();
    return n;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

double constant_value(const Node& n) {
  if (n.op == Node::Op::number) return n.value;
  double v = 1.0;
  for (const auto& k : n.kids) v *= constant_value(*k);
  return v;
}

GrowthClass eval_class(const Node& n, const AlgebraOptions& opts) {
  switch (n.op) {
    case Node::Op::leaf:
      return n.leaf;
    case Node::Op::add: {
      GrowthClass g = eval_class(*n.kids[0], opts);
      for (std::size_t i = 1; i < n.kids.size(); ++i) {
        g = add_classes(g, eval_class(*n.kids[i], opts), opts);
      }
      return g;
    }
    case Node::Op::mul: {
      double c = 1.0;
      std::optional<GrowthClass> g;
      for (const auto& k : n.kids) {
        if (k->constant()) {
          c *= constant_value(*k);
        } else {
          GrowthClass next = eval_class(*k, opts);
          g = g ? mul_classes(*g, next, opts) : next;
        }
      }
      return c == 1.0 ? *g : scale_class(c, *g);
    }
    case Node::Op::compose:
      return compose_classes(eval_class(*n.kids[0], opts),
                             eval_class(*n.kids[1], opts), opts);
    case Node::Op::number:
      break;
  }
  throw ValidationError("class expression: constant has no growth class");
}

double eval_point(const Node& n, std::span<const double> x) {
  switch (n.op) {
    case Node::Op::number:
      return n.value;
    case Node::Op::leaf: {
      double s = 0.0;
      for (double v : x) s += v * v;
      return n.leaf.bound(std::sqrt(s));
    }
    case Node::Op::add: {
      double s = 0.0;
      for (const auto& k : n.kids) s += eval_point(*k, x);
      return s;
    }
    case Node::Op::mul: {
      double p = 1.0;
      for (const auto& k : n.kids) p *= eval_point(*k, x);
      return p;
    }
    case Node::Op::compose: {
      const double inner = eval_point(*n.kids[1], x);
      return eval_point(*n.kids[0], std::span<const double>(&inner, 1));
    }
  }
  return 0.0;
}

}  // namespace

ClassExpression ClassExpression::parse(std::string_view text) {
  ClassExpression e;
  e.text_ = std::string(text);
  e.root_ = Parser(e.text_).parse();
  return e;
}

GrowthClass ClassExpression::growth(const AlgebraOptions& opts) const {
  return eval_class(*root_, opts);
}

TestIntegrand ClassExpression::integrand(std::size_t d) const {
  if (d == 0) throw DomainError("dimension must be positive");
  TestIntegrand h;
  h.name = text_;
  h.dim = d;
  h.eval = [root = root_](std::span<const double> x) { return eval_point(*root, x); };
  h.growth = growth();
  return h;
}

}  // namespace pqmc
