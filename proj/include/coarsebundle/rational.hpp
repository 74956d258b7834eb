#pragma once

#include <gmpxx.h>

#include <cmath>
#include <string>

#include "errors.hpp"

namespace coarsebundle {

using Integer = mpz_class;
using Rational = mpq_class;

inline Rational make_rational(Integer num, Integer den = 1) {
  if (den == 0) throw ZeroParameter("denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

// Accepts "p", "-p" and "p/q".
inline Rational parse_rational(std::string const& text) {
  Rational q;
  if (text.empty() || q.set_str(text, 10) != 0) throw ParseError("rational '" + text + "'");
  if (q.get_den() == 0) throw ParseError("zero denominator in '" + text + "'");
  q.canonicalize();
  return q;
}

inline std::string to_string(Rational const& q) { return q.get_str(); }
inline std::string to_string(Integer const& z) { return z.get_str(); }

inline double to_double(Rational const& q) { return q.get_d(); }
inline double to_double(Integer const& z) { return z.get_d(); }
inline double to_double(mpf_class const& x) { return x.get_d(); }
inline double to_double(double x) { return x; }

inline Integer floor_div(Integer const& a, Integer const& b) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

inline Integer floor_mod(Integer const& a, Integer const& b) {
  Integer r;
  mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  if (r < 0) r += abs(b);
  return r;
}

inline Integer gcd(Integer const& a, Integer const& b) {
  Integer g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g;
}

inline Integer floor(Rational const& q) { return floor_div(q.get_num(), q.get_den()); }

// Scalar operations shared by the templated numeric code. Rounding is to the
// nearest integer with ties away from zero.
template <class T>
struct scalar_traits;

template <>
struct scalar_traits<Rational> {
  static constexpr bool exact = true;
  static Rational abs(Rational const& x) { return ::abs(x); }
  static Rational round(Rational const& x) {
    Rational h = ::abs(x) + Rational(1, 2);
    Rational r(coarsebundle::floor(h));
    return x < 0 ? Rational(-r) : r;
  }
  static bool is_zero(Rational const& x) { return sgn(x) == 0; }
};

template <>
struct scalar_traits<double> {
  static constexpr bool exact = false;
  static double abs(double x) { return std::fabs(x); }
  static double round(double x) { return std::round(x); }
  static bool is_zero(double x) { return x == 0.0; }
};

template <>
struct scalar_traits<mpf_class> {
  static constexpr bool exact = false;
  static mpf_class abs(mpf_class const& x) { return ::abs(x); }
  static mpf_class round(mpf_class const& x) {
    mpf_class r = ::floor(mpf_class(::abs(x) + 0.5, x.get_prec()));
    return x < 0 ? mpf_class(-r) : r;
  }
  static bool is_zero(mpf_class const& x) { return sgn(x) == 0; }
};

}  // namespace coarsebundle
