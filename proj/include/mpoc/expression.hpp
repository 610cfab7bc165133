#ifndef MPOC_EXPRESSION_HPP
#define MPOC_EXPRESSION_HPP

#include <memory>
#include <string>
#include <vector>

namespace mpoc {

// Arithmetic expression over named variables.
// Grammar: sum := term (('+'|'-') term)*, term := unary (('*'|'/') unary)*,
// unary := ('+'|'-') unary | power, power := atom ('^' unary)?,
// atom := number | name | name '(' sum ')' | '(' sum ')'.
// Functions: sin cos tan exp log sqrt abs. Constants: pi, e.
class Expression {
 public:
  Expression();
  // Throws InputError naming the offending position.
  static Expression parse(const std::string& text, const std::vector<std::string>& variables);
  // values[i] is bound to variables[i].
  double eval(const double* values) const;
  double operator()(std::initializer_list<double> values) const { return eval(values.begin()); }
  const std::string& text() const { return text_; }
  // True when the expression is a literal constant after folding.
  bool is_constant() const;

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace mpoc

#endif
