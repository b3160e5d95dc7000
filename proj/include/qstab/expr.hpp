#pragma once
// Operator expressions over the truncated mode:
//
//   expr    := term (('+' | '-') term)*
//   term    := unary ('*' unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' INT)*
//   primary := 'a' | 'ad' | 'n' | 'id' | NUMBER | PARAM | 'dag' '(' expr ')' | '(' expr ')'
//
// NUMBER is a real literal (`2`, `0.5`, `1e-3`), an imaginary literal
// (`0.4i`) or a complex literal written as one token without spaces
// (`0.8+0.4i`, `1-2i`). Scalars act as multiples of the identity.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qstab/hilbert.hpp"

namespace qstab {

using ParamMap = std::map<std::string, cplx>;

enum class ExprKind { a, ad, n, id, literal, param, neg, add, sub, mul, pow, dag };

struct Expr {
    ExprKind kind = ExprKind::id;
    cplx value{};          // literal
    std::string name;      // param
    int exponent = 0;      // pow
    std::vector<Expr> args;

    bool operator==(const Expr&) const = default;
};

// When `params` is given, identifiers not in it are rejected at parse time.
Expr parse_expr(std::string_view text, const ParamMap* params = nullptr);

// Fully parenthesized text that parses back to the same tree.
std::string print_expr(const Expr& e);

Operator evaluate(const Expr& e, int dim, const ParamMap& params = {});

// Number of ladder factors (a or ad) in the highest-order monomial.
int ladder_degree(const Expr& e);

// Parses `RE+IMi`, `RE`, `IMi`; a leading sign on the real part is allowed.
cplx parse_complex(std::string_view text);
std::string format_complex(cplx z);
std::string format_double(double x);

}  // namespace qstab
