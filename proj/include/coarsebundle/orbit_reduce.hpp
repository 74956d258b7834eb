#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "matrix.hpp"

namespace coarsebundle {

// One move x_i -= k x_j, i.e. left multiplication by I - k e_i e_j^T.
template <class T>
struct ReductionStep {
  std::size_t i, j;
  Integer k;
  T norm;  // sup norm after the move
};

template <class T>
struct OrbitTrace {
  enum class Stop { Terminal, BelowTolerance, MaxSteps } stop = Stop::MaxSteps;
  std::vector<T> start, current;
  std::vector<T> norms;  // norms[0] is the starting norm
  std::vector<ReductionStep<T>> steps;
  IntMatrix transform;          // product of the moves, current = transform * start
  IntMatrix transform_inverse;
};

inline IntMatrix elementary(std::size_t n, std::size_t i, std::size_t j, Integer const& k) {
  IntMatrix e = IntMatrix::identity(n);
  e(i, j) = -k;
  return e;
}

namespace detail {

template <class T>
T sup_norm(std::vector<T> const& v) {
  T best = 0;
  for (auto const& x : v)
    if (scalar_traits<T>::abs(x) > best) best = scalar_traits<T>::abs(x);
  return best;
}

inline Integer to_integer_scalar(Rational const& x) { return x.get_num(); }
inline Integer to_integer_scalar(double x) { return Integer(x); }
inline Integer to_integer_scalar(mpf_class const& x) { return Integer(x); }

template <class T>
T from_integer(Integer const& k, T const& like) {
  if constexpr (std::is_same_v<T, mpf_class>)
    return mpf_class(k, like.get_prec());
  else if constexpr (std::is_same_v<T, double>)
    return k.get_d();
  else
    return T(k);
}

}  // namespace detail

// Greedy reduction in the GL(n,Z) orbit: shrink the largest coordinate by
// its nearest residue modulo another nonzero coordinate.
template <class T>
OrbitTrace<T> orbit_reduce(std::vector<T> const& v, std::size_t max_steps, T tol = T(0)) {
  using S = scalar_traits<T>;
  std::size_t n = v.size();
  if (n < 2) throw DimensionTooSmall(std::to_string(n));
  OrbitTrace<T> tr;
  tr.start = v;
  tr.current = v;
  tr.transform = IntMatrix::identity(n);
  tr.transform_inverse = IntMatrix::identity(n);
  tr.norms.push_back(detail::sup_norm(v));
  auto& x = tr.current;
  for (;;) {
    std::size_t nonzero = 0, i = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (!S::is_zero(x[k])) ++nonzero;
      if (S::abs(x[k]) > S::abs(x[i])) i = k;
    }
    if (nonzero <= 1) {
      tr.stop = OrbitTrace<T>::Stop::Terminal;
      break;
    }
    if (tol > 0 && tr.norms.back() < tol) {
      tr.stop = OrbitTrace<T>::Stop::BelowTolerance;
      break;
    }
    if (tr.steps.size() >= max_steps) {
      tr.stop = OrbitTrace<T>::Stop::MaxSteps;
      break;
    }
    std::optional<std::size_t> best_j;
    T best_val = 0;
    Integer best_k = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || S::is_zero(x[j])) continue;
      T q = S::round(T(x[i] / x[j]));
      T val = x[i] - q * x[j];
      if (!best_j || S::abs(val) < S::abs(best_val)) {
        best_j = j;
        best_val = val;
        best_k = detail::to_integer_scalar(q);
      }
    }
    std::size_t j = *best_j;
    x[i] = x[i] - detail::from_integer(best_k, x[i]) * x[j];
    // transform <- E transform: row i -= k row j; inverse: column j += k column i.
    for (std::size_t c = 0; c < n; ++c) tr.transform(i, c) -= best_k * tr.transform(j, c);
    for (std::size_t r = 0; r < n; ++r) tr.transform_inverse(r, j) += best_k * tr.transform_inverse(r, i);
    T norm = detail::sup_norm(x);
    tr.steps.push_back({i, j, best_k, norm});
    tr.norms.push_back(norm);
  }
  return tr;
}

struct RationalLineResult {
  enum class Kind { OnRationalLine, NotOnRationalLine, Unknown } kind;
  std::vector<Integer> direction;  // primitive, first nonzero entry positive
  double final_norm = 0;
  std::size_t steps = 0;
};

inline std::string to_string(RationalLineResult::Kind k) {
  switch (k) {
    case RationalLineResult::Kind::OnRationalLine: return "OnRationalLine";
    case RationalLineResult::Kind::NotOnRationalLine: return "NotOnRationalLine";
    case RationalLineResult::Kind::Unknown: return "Unknown";
  }
  return "?";
}

namespace detail {

inline std::vector<Integer> primitive(std::vector<Integer> d) {
  Integer g = 0;
  for (auto const& x : d) g = gcd(g, x);
  if (g == 0) return d;
  for (auto& x : d) x /= g;
  for (auto const& x : d) {
    if (x == 0) continue;
    if (x < 0)
      for (auto& y : d) y = -y;
    break;
  }
  return d;
}

template <class T>
int mantissa_bits(T const& x) {
  if constexpr (std::is_same_v<T, mpf_class>)
    return static_cast<int>(x.get_prec());
  else
    return 53;
}

}  // namespace detail

inline RationalLineResult rational_line_test(std::vector<Rational> const& v) {
  if (v.size() < 2) throw DimensionTooSmall(std::to_string(v.size()));
  Integer l = 1;
  for (auto const& x : v) l = lcm(l, Integer(x.get_den()));
  std::vector<Integer> d;
  for (auto const& x : v) d.push_back(Rational(x * l).get_num());
  return {RationalLineResult::Kind::OnRationalLine, detail::primitive(d), 0, 0};
}

// Floating input: decay of the orbit norm below tol certifies irrationality of
// the direction, provided tol is above the working precision.
template <class T>
RationalLineResult rational_line_test(std::vector<T> const& v, T tol, std::size_t max_steps) {
  if (v.size() < 2) throw DimensionTooSmall(std::to_string(v.size()));
  T start = detail::sup_norm(v);
  T floor = start * T(std::ldexp(1.0, -detail::mantissa_bits(start) + 6));
  auto trace = orbit_reduce<T>(v, max_steps, tol);
  RationalLineResult out{RationalLineResult::Kind::Unknown, {}, to_double(trace.norms.back()),
                         trace.steps.size()};
  // Past the precision floor the arithmetic no longer tracks the orbit.
  for (auto const& nrm : trace.norms)
    if (nrm < floor) return out;
  if (trace.stop == OrbitTrace<T>::Stop::BelowTolerance) {
    out.kind = RationalLineResult::Kind::NotOnRationalLine;
  } else if (trace.stop == OrbitTrace<T>::Stop::Terminal && trace.norms.back() > 0) {
    std::size_t k = 0;
    while (scalar_traits<T>::is_zero(trace.current[k])) ++k;
    std::vector<Integer> d;
    for (std::size_t r = 0; r < v.size(); ++r) d.push_back(trace.transform_inverse(r, k));
    out.kind = RationalLineResult::Kind::OnRationalLine;
    out.direction = detail::primitive(d);
  }
  return out;
}

}  // namespace coarsebundle
