#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "pqmc/growth.hpp"

namespace pqmc {

/// Growth-class expressions, e.g. `2*Gp(1,1,3)+Ge(0.1,1,1)`.
///
///   expr   := term ('+' term)*
///   term   := factor ('*' factor)*
///   factor := NUMBER | Gp(M,B,k) | Ge(M,B,k) | compose(expr, expr) | '(' expr ')'
///
/// Numbers act only as scale factors; a term made of numbers alone is
/// rejected. `compose(f, g)` is f applied to the scalar g(x).
class ClassExpression {
 public:
  /// ValidationError with the offending position on malformed input.
  static ClassExpression parse(std::string_view text);

  [[nodiscard]] GrowthClass growth(const AlgebraOptions& opts = {}) const;

  /// A concrete integrand realising the expression: each Gp/Ge leaf is the
  /// radial function attaining its bound (M|x|^k + B or B e^{M|x|^k}).
  [[nodiscard]] TestIntegrand integrand(std::size_t d) const;

  [[nodiscard]] const std::string& text() const noexcept { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace pqmc
