#pragma once

#include <cmath>

#include "gpsl/tape.hpp"

namespace gpsl::diff {

/// Scalar expression handle. Lets numeric formulas be written once as
/// templates and instantiated both with plain double and with tape-backed
/// scalars; ADL picks these overloads up for the Expr instantiation.
struct Expr {
  Tape* tape = nullptr;
  Var v{};

  double value() const { return tape->scalar(v); }
};

inline Expr make_expr(Tape& t, Var v) { return Expr{&t, v}; }
inline Expr make_const(Tape& t, double c) { return Expr{&t, t.constant_scalar(c)}; }

inline Expr operator+(Expr a, Expr b) { return {a.tape, a.tape->add(a.v, b.v)}; }
inline Expr operator-(Expr a, Expr b) { return {a.tape, a.tape->sub(a.v, b.v)}; }
inline Expr operator*(Expr a, Expr b) { return {a.tape, a.tape->mul(a.v, b.v)}; }
inline Expr operator/(Expr a, Expr b) { return {a.tape, a.tape->div(a.v, b.v)}; }
inline Expr operator-(Expr a) { return {a.tape, a.tape->neg(a.v)}; }

inline Expr operator+(Expr a, double b) { return a + make_const(*a.tape, b); }
inline Expr operator+(double a, Expr b) { return make_const(*b.tape, a) + b; }
inline Expr operator-(Expr a, double b) { return a - make_const(*a.tape, b); }
inline Expr operator-(double a, Expr b) { return make_const(*b.tape, a) - b; }
inline Expr operator*(Expr a, double b) { return {a.tape, a.tape->scale(a.v, b)}; }
inline Expr operator*(double a, Expr b) { return {b.tape, b.tape->scale(b.v, a)}; }
inline Expr operator/(Expr a, double b) { return {a.tape, a.tape->scale(a.v, 1.0 / b)}; }
inline Expr operator/(double a, Expr b) { return make_const(*b.tape, a) / b; }

inline Expr sqrt(Expr a) { return {a.tape, a.tape->sqrt(a.v)}; }
inline Expr sin(Expr a) { return {a.tape, a.tape->sin(a.v)}; }
inline Expr cos(Expr a) { return {a.tape, a.tape->cos(a.v)}; }
inline Expr exp(Expr a) { return {a.tape, a.tape->exp(a.v)}; }
inline Expr log(Expr a) { return {a.tape, a.tape->log(a.v)}; }
inline Expr abs(Expr a) { return {a.tape, a.tape->abs(a.v)}; }
inline Expr max(Expr a, Expr b) { return {a.tape, a.tape->max2(a.v, b.v)}; }
inline Expr max(Expr a, double b) { return max(a, make_const(*a.tape, b)); }

}  // namespace gpsl::diff
