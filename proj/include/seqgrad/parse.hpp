#pragma once

#include <string>

#include "seqgrad/function.hpp"

namespace seqgrad {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/**
 * Parses the infix expression grammar used by scenario files:
 *
 *   expr   := term (('+'|'-') term)*
 *   term   := unary (('*'|'/') unary)*
 *   unary  := ('-'|'+') unary | power
 *   power  := atom ('^' integer)?            integer exponent, e.g. y1^4
 *   atom   := number | variable | call | '(' expr ')'
 *   call   := ('sin'|'cos'|'exp'|'sinc') '(' expr ')'
 *           | 'root' '(' expr ',' integer ')'  k-th root, argument > 0
 *
 * Variables are y1..yM (1-based). Numbers are plain decimals.
 */
AnalyticFunction parse_function(const std::string& text, int arity);

/// Structure-preserving infix form; constants carry 17 significant digits so
/// printing and reparsing reproduces evaluation bit-for-bit.
std::string to_string(const AnalyticFunction& f);
std::string to_string(const Expr& e);

/// Formats a double with 17 significant digits (exact round trip).
std::string format_double(double v);

}  // namespace seqgrad
