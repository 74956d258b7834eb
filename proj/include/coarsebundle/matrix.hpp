#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace coarsebundle {

// Dense square matrix, row-major.
template <class T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  explicit Matrix(std::size_t n) : n_(n), a_(n * n, T(0)) {}
  Matrix(std::initializer_list<std::initializer_list<T>> rows) : n_(rows.size()) {
    a_.reserve(n_ * n_);
    for (auto const& row : rows) {
      if (row.size() != n_) throw InvalidArgument("matrix must be square");
      for (auto const& x : row) a_.push_back(x);
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  static Matrix diagonal(std::vector<T> const& d) {
    Matrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t size() const { return n_; }
  T& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  T const& operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  std::vector<T> const& entries() const { return a_; }

  bool is_identity() const {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if ((*this)(i, j) != (i == j ? T(1) : T(0))) return false;
    return true;
  }

  friend bool operator==(Matrix const& x, Matrix const& y) {
    return x.n_ == y.n_ && x.a_ == y.a_;
  }

  // Arbitrary total order so matrices can key ordered containers.
  friend bool operator<(Matrix const& x, Matrix const& y) {
    if (x.n_ != y.n_) return x.n_ < y.n_;
    for (std::size_t k = 0; k < x.a_.size(); ++k) {
      int c = cmp(x.a_[k], y.a_[k]);
      if (c != 0) return c < 0;
    }
    return false;
  }

  friend Matrix operator*(Matrix const& x, Matrix const& y) {
    if (x.n_ != y.n_) throw RankMismatch();
    Matrix z(x.n_);
    for (std::size_t i = 0; i < x.n_; ++i)
      for (std::size_t k = 0; k < x.n_; ++k) {
        if (x(i, k) == 0) continue;
        for (std::size_t j = 0; j < x.n_; ++j) z(i, j) += x(i, k) * y(k, j);
      }
    return z;
  }

  friend Matrix operator+(Matrix x, Matrix const& y) {
    if (x.n_ != y.n_) throw RankMismatch();
    for (std::size_t k = 0; k < x.a_.size(); ++k) x.a_[k] += y.a_[k];
    return x;
  }

  friend Matrix operator-(Matrix x, Matrix const& y) {
    if (x.n_ != y.n_) throw RankMismatch();
    for (std::size_t k = 0; k < x.a_.size(); ++k) x.a_[k] -= y.a_[k];
    return x;
  }

  friend Matrix operator*(T const& s, Matrix x) {
    for (auto& v : x.a_) v *= s;
    return x;
  }

  Matrix transpose() const {
    Matrix t(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  void swap_rows(std::size_t i, std::size_t j) {
    for (std::size_t c = 0; c < n_; ++c) std::swap((*this)(i, c), (*this)(j, c));
  }

 private:
  std::size_t n_ = 0;
  std::vector<T> a_;
};

using RatMatrix = Matrix<Rational>;
using IntMatrix = Matrix<Integer>;

template <class T>
std::string to_string(Matrix<T> const& m) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < m.size(); ++i) {
    os << (i ? ",[" : "[");
    for (std::size_t j = 0; j < m.size(); ++j) os << (j ? "," : "") << m(i, j).get_str();
    os << ']';
  }
  os << ']';
  return os.str();
}

inline RatMatrix to_rational(IntMatrix const& m) {
  RatMatrix r(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) r(i, j) = Rational(m(i, j));
  return r;
}

inline bool is_integral(RatMatrix const& m) {
  return std::all_of(m.entries().begin(), m.entries().end(),
                     [](Rational const& q) { return q.get_den() == 1; });
}

inline IntMatrix to_integer(RatMatrix const& m) {
  if (!is_integral(m)) throw InvalidArgument("matrix has non-integral entries");
  IntMatrix r(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) r(i, j) = m(i, j).get_num();
  return r;
}

inline Rational determinant(RatMatrix m) {
  std::size_t const n = m.size();
  Rational det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && m(p, c) == 0) ++p;
    if (p == n) return 0;
    if (p != c) {
      m.swap_rows(p, c);
      det = -det;
    }
    det *= m(c, c);
    for (std::size_t i = c + 1; i < n; ++i) {
      if (m(i, c) == 0) continue;
      Rational f = m(i, c) / m(c, c);
      for (std::size_t j = c; j < n; ++j) m(i, j) -= f * m(c, j);
    }
  }
  return det;
}

inline Integer determinant(IntMatrix const& m) { return determinant(to_rational(m)).get_num(); }

inline RatMatrix inverse(RatMatrix m) {
  std::size_t const n = m.size();
  RatMatrix inv = RatMatrix::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && m(p, c) == 0) ++p;
    if (p == n) throw SingularMatrix();
    m.swap_rows(p, c);
    inv.swap_rows(p, c);
    Rational pivot = m(c, c);
    for (std::size_t j = 0; j < n; ++j) {
      m(c, j) /= pivot;
      inv(c, j) /= pivot;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == c || m(i, c) == 0) continue;
      Rational f = m(i, c);
      for (std::size_t j = 0; j < n; ++j) {
        m(i, j) -= f * m(c, j);
        inv(i, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

inline RatMatrix inverse(IntMatrix const& m) { return inverse(to_rational(m)); }

inline bool is_unimodular(IntMatrix const& m) { return abs(determinant(m)) == 1; }

// Index of the sublattice A·Z^n in Z^n.
inline Integer lattice_index(IntMatrix const& a) {
  Integer d = abs(determinant(a));
  if (d == 0) throw SingularMatrix();
  return d;
}

inline RatMatrix power(RatMatrix const& m, long k) {
  if (k < 0) return power(inverse(m), -k);
  RatMatrix result = RatMatrix::identity(m.size()), base = m;
  while (k > 0) {
    if (k & 1) result = result * base;
    base = base * base;
    k >>= 1;
  }
  return result;
}

struct HermiteForm {
  IntMatrix H;
  IntMatrix U;
};

// Row-style Hermite normal form: H = U·A is upper triangular with positive
// pivots and entries above each pivot reduced into [0, pivot).
inline HermiteForm hermite_normal_form(IntMatrix const& a) {
  std::size_t const n = a.size();
  IntMatrix h = a, u = IntMatrix::identity(n);
  auto add_row = [&](std::size_t dst, std::size_t src, Integer const& q) {
    for (std::size_t c = 0; c < n; ++c) {
      h(dst, c) -= q * h(src, c);
      u(dst, c) -= q * u(src, c);
    }
  };
  auto negate_row = [&](std::size_t r) {
    for (std::size_t c = 0; c < n; ++c) {
      h(r, c) = -h(r, c);
      u(r, c) = -u(r, c);
    }
  };
  std::size_t r = 0;
  for (std::size_t c = 0; c < n && r < n; ++c) {
    for (;;) {
      std::size_t p = n;
      for (std::size_t i = r; i < n; ++i)
        if (h(i, c) != 0 && (p == n || abs(h(i, c)) < abs(h(p, c)))) p = i;
      if (p == n) break;
      h.swap_rows(p, r);
      u.swap_rows(p, r);
      bool clean = true;
      for (std::size_t i = r + 1; i < n; ++i) {
        if (h(i, c) == 0) continue;
        add_row(i, r, floor_div(h(i, c), h(r, c)));
        if (h(i, c) != 0) clean = false;
      }
      if (clean) break;
    }
    if (h(r, c) == 0) continue;
    if (h(r, c) < 0) negate_row(r);
    for (std::size_t i = 0; i < r; ++i) add_row(i, r, floor_div(h(i, c), h(r, c)));
    ++r;
  }
  return {h, u};
}

struct Letter {
  std::size_t gen;
  int exp;  // +1 or -1
  friend bool operator==(Letter const&, Letter const&) = default;
  friend auto operator<=>(Letter const&, Letter const&) = default;
};

using MatrixWord = std::vector<Letter>;

inline MatrixWord inverse_word(MatrixWord const& w) {
  MatrixWord r;
  r.reserve(w.size());
  for (auto it = w.rbegin(); it != w.rend(); ++it) r.push_back({it->gen, -it->exp});
  return r;
}

// Left-to-right product of the letters.
inline RatMatrix evaluate_word(MatrixWord const& w, std::vector<RatMatrix> const& gens,
                               std::size_t n = 0) {
  if (n == 0) {
    if (gens.empty()) {
      if (!w.empty()) throw IndexOutOfRange("word letter without generators");
      return RatMatrix::identity(1);
    }
    n = gens.front().size();
  }
  std::vector<RatMatrix> inverses(gens.size());
  std::vector<bool> have(gens.size(), false);
  RatMatrix r = RatMatrix::identity(n);
  for (auto const& l : w) {
    if (l.gen >= gens.size()) throw IndexOutOfRange("generator " + std::to_string(l.gen));
    if (l.exp == 1) {
      r = r * gens[l.gen];
    } else if (l.exp == -1) {
      if (!have[l.gen]) {
        inverses[l.gen] = inverse(gens[l.gen]);
        have[l.gen] = true;
      }
      r = r * inverses[l.gen];
    } else {
      throw InvalidArgument("letter exponent must be +1 or -1");
    }
  }
  return r;
}

inline std::string to_string(MatrixWord const& w) {
  std::string s;
  for (auto const& l : w) {
    if (!s.empty()) s += ' ';
    s += "g" + std::to_string(l.gen) + (l.exp < 0 ? "^-1" : "");
  }
  return s.empty() ? "e" : s;
}

}  // namespace coarsebundle
