#pragma once

#include <algorithm>
#include <functional>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "matrix.hpp"
#include "psl2z.hpp"
#include "spectral.hpp"

namespace coarsebundle {

using Gl2Subgroup = std::vector<RatMatrix>;

// ---------------------------------------------------------------------------
// Subgroups of Q* up to Hausdorff equivalence.

struct Gl1Class {
  enum class Kind { Trivial, Discrete, Dense } kind = Kind::Trivial;
  Rational generator = 1;  // Discrete only, always > 1
  std::vector<Integer> base;
  std::vector<Integer> exponents;  // of the generator over base

  double lambda() const { return kind == Kind::Discrete ? std::log(to_double(generator)) : 0.0; }
  bool operator==(Gl1Class const& o) const { return kind == o.kind && generator == o.generator; }
};

inline std::string to_string(Gl1Class::Kind k) {
  switch (k) {
    case Gl1Class::Kind::Trivial: return "Trivial";
    case Gl1Class::Kind::Discrete: return "Discrete";
    case Gl1Class::Kind::Dense: return "Dense";
  }
  return "?";
}

namespace detail {

// Pairwise coprime integers > 1 such that every input is a product of their
// powers (factor refinement).
inline std::vector<Integer> coprime_base(std::vector<Integer> const& xs) {
  std::vector<Integer> base;
  std::vector<Integer> work;
  for (auto const& x : xs)
    if (abs(x) > 1) work.push_back(abs(x));
  while (!work.empty()) {
    Integer y = work.back();
    work.pop_back();
    if (y == 1) continue;
    bool split = false;
    for (std::size_t k = 0; k < base.size(); ++k) {
      Integer g = gcd(base[k], y);
      if (g == 1) continue;
      split = true;
      if (g == base[k] && g == y) break;
      Integer b = base[k];
      base.erase(base.begin() + static_cast<long>(k));
      for (Integer z : {Integer(b / g), Integer(y / g), g})
        if (z > 1) work.push_back(z);
      break;
    }
    if (!split) base.push_back(y);
  }
  std::sort(base.begin(), base.end());
  return base;
}

inline long valuation(Integer x, Integer const& p) {
  long v = 0;
  while (x % p == 0) {
    x /= p;
    ++v;
  }
  return v;
}

inline long rational_rank(std::vector<std::vector<Integer>> rows) {
  std::vector<std::vector<Rational>> m;
  for (auto const& r : rows) m.emplace_back(r.begin(), r.end());
  if (m.empty()) return 0;
  std::size_t cols = m.front().size(), rank = 0;
  for (std::size_t c = 0; c < cols && rank < m.size(); ++c) {
    std::size_t p = rank;
    while (p < m.size() && m[p][c] == 0) ++p;
    if (p == m.size()) continue;
    std::swap(m[p], m[rank]);
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == rank || m[r][c] == 0) continue;
      Rational f = m[r][c] / m[rank][c];
      for (std::size_t k = 0; k < cols; ++k) m[r][k] -= f * m[rank][k];
    }
    ++rank;
  }
  return static_cast<long>(rank);
}

}  // namespace detail

inline Gl1Class hausdorff_class_gl1(std::vector<Rational> const& values) {
  std::vector<Integer> parts;
  for (auto const& v : values) {
    if (v == 0) throw ZeroValue();
    parts.push_back(abs(v.get_num()));
    parts.push_back(v.get_den());
  }
  Gl1Class out;
  out.base = detail::coprime_base(parts);
  std::vector<std::vector<Integer>> vecs;
  for (auto const& v : values) {
    std::vector<Integer> e;
    Rational check = 1;
    for (auto const& p : out.base) {
      long k = detail::valuation(abs(v.get_num()), p) - detail::valuation(v.get_den(), p);
      e.emplace_back(k);
      Rational pk = 1;
      for (long i = 0; i < std::labs(k); ++i) pk *= p;
      check *= k >= 0 ? pk : Rational(1) / pk;
    }
    if (check != abs(v)) throw Error("internal: coprime base does not factor " + to_string(v));
    vecs.push_back(std::move(e));
  }
  long rank = detail::rational_rank(vecs);
  if (rank == 0) {
    out.base.clear();
    return out;
  }
  if (rank >= 2) {
    out.kind = Gl1Class::Kind::Dense;
    return out;
  }
  // All exponent vectors are multiples of one primitive vector.
  std::vector<Integer> const* first = nullptr;
  for (auto const& v : vecs)
    if (std::any_of(v.begin(), v.end(), [](Integer const& x) { return x != 0; })) {
      first = &v;
      break;
    }
  Integer content = 0;
  for (auto const& x : *first) content = gcd(content, x);
  std::vector<Integer> prim;
  for (auto const& x : *first) prim.push_back(x / content);
  std::size_t lead = 0;
  while (prim[lead] == 0) ++lead;
  Integer mult = 0;
  for (auto const& v : vecs) mult = gcd(mult, Integer(v[lead] / prim[lead]));
  Rational gen = 1;
  for (std::size_t k = 0; k < prim.size(); ++k) {
    Integer e = mult * prim[k];
    for (Integer i = 0; i < abs(e); ++i) gen *= e > 0 ? Rational(out.base[k]) : Rational(1, 1) / out.base[k];
    out.exponents.push_back(e);
  }
  if (gen < 1) {
    gen = 1 / gen;
    for (auto& e : out.exponents) e = -e;
  }
  out.kind = Gl1Class::Kind::Discrete;
  out.generator = gen;
  return out;
}

// ---------------------------------------------------------------------------
// Determinant splitting.

struct DetSplit {
  std::vector<Eigen::Matrix2d> normalized;  // g / sqrt|det g|
  std::vector<Rational> det_values;
  Gl1Class det_part;
};

inline void require_gl2(Gl2Subgroup const& gens) {
  for (auto const& g : gens) {
    if (g.size() != 2) throw RankUnsupported(std::to_string(g.size()));
    if (determinant(g) == 0) throw SingularGenerator(to_string(g));
  }
}

inline DetSplit split_det(Gl2Subgroup const& gens) {
  require_gl2(gens);
  DetSplit out;
  std::vector<Rational> abs_dets;
  for (auto const& g : gens) {
    Rational d = determinant(g);
    out.det_values.push_back(d);
    abs_dets.push_back(abs(d));
    double s = std::sqrt(std::fabs(to_double(d)));
    Eigen::Matrix2d m;
    m << to_double(g(0, 0)) / s, to_double(g(0, 1)) / s, to_double(g(1, 0)) / s,
        to_double(g(1, 1)) / s;
    out.normalized.push_back(m);
  }
  out.det_part = hausdorff_class_gl1(abs_dets);
  return out;
}

// ---------------------------------------------------------------------------
// Projective geometry of single elements.

// Coefficients (a, b, c) of a x^2 + b xy + c y^2, whose roots are the fixed
// points of g on the projective line.
struct BinaryForm {
  Rational a, b, c;
  bool is_zero() const { return a == 0 && b == 0 && c == 0; }
  Rational discriminant() const { return b * b - 4 * a * c; }
  Rational at(Rational const& x, Rational const& y) const { return a * x * x + b * x * y + c * y * y; }
};

inline BinaryForm fixed_form(RatMatrix const& g) {
  return {g(1, 0), g(1, 1) - g(0, 0), -g(0, 1)};
}

inline bool proportional(BinaryForm const& f, BinaryForm const& h) {
  return f.a * h.b == f.b * h.a && f.a * h.c == f.c * h.a && f.b * h.c == f.c * h.b;
}

// Whether g maps the root set of f to itself.
inline bool preserves(RatMatrix const& g, BinaryForm const& f) {
  Rational const &a = g(0, 0), &b = g(0, 1), &c = g(1, 0), &d = g(1, 1);
  BinaryForm h{f.a * a * a + f.b * a * c + f.c * c * c,
               2 * f.a * a * b + f.b * (a * d + b * c) + 2 * f.c * c * d,
               f.a * b * b + f.b * b * d + f.c * d * d};
  return proportional(f, h);
}

enum class ElementKind { Trivial, Elliptic, Parabolic, Hyperbolic, Reflection };

inline ElementKind element_kind(RatMatrix const& g) {
  BinaryForm f = fixed_form(g);
  if (f.is_zero()) return ElementKind::Trivial;
  Rational det = determinant(g), tr = g(0, 0) + g(1, 1);
  if (det < 0) return tr == 0 ? ElementKind::Reflection : ElementKind::Hyperbolic;
  Rational disc = f.discriminant();
  if (disc < 0) return ElementKind::Elliptic;
  if (disc == 0) return ElementKind::Parabolic;
  return ElementKind::Hyperbolic;
}

// Finite order in PGL(2,R).
inline bool projectively_finite(RatMatrix const& g) {
  switch (element_kind(g)) {
    case ElementKind::Trivial:
    case ElementKind::Reflection:
      return true;
    case ElementKind::Elliptic: {
      Rational tr = g(0, 0) + g(1, 1);
      Rational q = tr * tr / determinant(g);
      return q == 0 || q == 1 || q == 2 || q == 3;
    }
    default:
      return false;
  }
}

// log of the larger |eigenvalue| of g / sqrt|det g|; 0 unless hyperbolic.
inline double translation_length(RatMatrix const& g) {
  if (element_kind(g) != ElementKind::Hyperbolic) return 0.0;
  double tr = to_double(Rational(g(0, 0) + g(1, 1))), det = to_double(determinant(g));
  double lmax = (std::fabs(tr) + std::sqrt(tr * tr - 4 * det)) / 2;
  return std::log(lmax / std::sqrt(std::fabs(det)));
}

// ---------------------------------------------------------------------------
// Elementary types.

enum class ElementaryKind {
  Finite,
  EllipticBounded,
  ParabolicElementary,
  HyperbolicElementary,
  AffineElementary,  // common boundary fixed point, not of a single trace type
  NonElementary
};

inline std::string to_string(ElementaryKind k) {
  switch (k) {
    case ElementaryKind::Finite: return "Finite";
    case ElementaryKind::EllipticBounded: return "EllipticBounded";
    case ElementaryKind::ParabolicElementary: return "ParabolicElementary";
    case ElementaryKind::HyperbolicElementary: return "HyperbolicElementary";
    case ElementaryKind::AffineElementary: return "AffineElementary";
    case ElementaryKind::NonElementary: return "NonElementary";
  }
  return "?";
}

struct ElementaryReport {
  ElementaryKind kind;
  std::string witness;
};

namespace detail {

// Candidate common rational root of two non-proportional forms, as (x : y).
inline std::optional<std::pair<Rational, Rational>> common_root(BinaryForm const& f,
                                                                BinaryForm const& h) {
  std::vector<std::pair<Rational, Rational>> cands{{1, 0}};
  // f*h.a - h*f.a has no x^2 term: y (alpha x + beta y).
  Rational alpha = f.b * h.a - h.b * f.a, beta = f.c * h.a - h.c * f.a;
  if (alpha != 0) cands.push_back({-beta, alpha});
  // Same with the y^2 term removed: x (gamma x + delta y).
  Rational gamma = f.a * h.c - h.a * f.c, delta = f.b * h.c - h.b * f.c;
  if (delta != 0) cands.push_back({delta, -gamma});
  cands.push_back({0, 1});
  for (auto const& [x, y] : cands)
    if (f.at(x, y) == 0 && h.at(x, y) == 0) return std::make_pair(x, y);
  return std::nullopt;
}

inline std::vector<RatMatrix> with_pair_products(Gl2Subgroup const& gens) {
  std::vector<RatMatrix> out = gens;
  for (std::size_t i = 0; i < gens.size(); ++i)
    for (std::size_t j = i + 1; j < gens.size(); ++j) out.push_back(gens[i] * gens[j]);
  return out;
}

}  // namespace detail

inline ElementaryReport elementary_type(Gl2Subgroup const& gens) {
  require_gl2(gens);
  std::vector<RatMatrix> nontrivial;
  for (auto const& g : gens)
    if (element_kind(g) != ElementKind::Trivial) nontrivial.push_back(g);
  if (nontrivial.empty()) return {ElementaryKind::Finite, "all generators projectively trivial"};
  auto all_preserve = [&](BinaryForm const& f) {
    return std::all_of(gens.begin(), gens.end(), [&](RatMatrix const& g) { return preserves(g, f); });
  };
  auto candidates = detail::with_pair_products(nontrivial);

  // A common fixed point inside the hyperbolic plane.
  for (auto const& c : candidates) {
    if (element_kind(c) != ElementKind::Elliptic || !all_preserve(fixed_form(c))) continue;
    bool finite = true;
    for (auto const& x : candidates) finite = finite && projectively_finite(x);
    if (finite) return {ElementaryKind::Finite, "common elliptic fixed point, torsion"};
    return {ElementaryKind::EllipticBounded, "common elliptic fixed point " + to_string(c)};
  }

  std::vector<BinaryForm> forms;
  for (auto const& g : nontrivial) forms.push_back(fixed_form(g));
  bool all_prop = std::all_of(forms.begin(), forms.end(),
                              [&](BinaryForm const& f) { return proportional(f, forms[0]); });
  if (all_prop && forms[0].discriminant() == 0)
    return {ElementaryKind::ParabolicElementary, "common parabolic fixed point"};
  if (all_prop && forms[0].discriminant() > 0)
    return {ElementaryKind::HyperbolicElementary, "common axis " + to_string(nontrivial[0])};

  // A single common boundary point.
  std::optional<std::pair<Rational, Rational>> root;
  for (std::size_t k = 1; k < forms.size() && !root; ++k)
    if (!proportional(forms[0], forms[k])) root = detail::common_root(forms[0], forms[k]);
  if (root && std::all_of(forms.begin(), forms.end(), [&](BinaryForm const& f) {
        return f.at(root->first, root->second) == 0;
      })) {
    bool parabolic = std::all_of(nontrivial.begin(), nontrivial.end(), [](RatMatrix const& g) {
      return element_kind(g) == ElementKind::Parabolic;
    });
    std::string where = "(" + to_string(root->first) + ":" + to_string(root->second) + ")";
    if (parabolic) return {ElementaryKind::ParabolicElementary, "common parabolic fixed point " + where};
    return {ElementaryKind::AffineElementary, "common boundary fixed point " + where};
  }

  // An invariant pair of boundary points, possibly swapped.
  for (auto const& c : candidates) {
    BinaryForm f = fixed_form(c);
    if (f.discriminant() > 0 && all_preserve(f))
      return {ElementaryKind::HyperbolicElementary, "invariant axis of " + to_string(c)};
  }
  return {ElementaryKind::NonElementary,
          "no common fixed point: " + to_string(nontrivial[0]) + " and another generator"};
}

// ---------------------------------------------------------------------------
// Freeness certificates.

struct FreenessCertificate {
  enum class Kind { PingPong, RelationFound, InfiniteOrder, Unknown } kind = Kind::Unknown;
  MatrixWord relation;             // RelationFound
  std::vector<std::string> cones;  // PingPong: open arcs of the projective line
  bool strict = false;             // PingPong with pairwise disjoint closures
  bool gap = false;                // PingPong whose closed arcs miss an open interval
  int depth = 0;                   // word length searched
};

inline std::string to_string(FreenessCertificate::Kind k) {
  switch (k) {
    case FreenessCertificate::Kind::PingPong: return "PingPong";
    case FreenessCertificate::Kind::RelationFound: return "RelationFound";
    case FreenessCertificate::Kind::InfiniteOrder: return "InfiniteOrder";
    case FreenessCertificate::Kind::Unknown: return "Unknown";
  }
  return "?";
}

namespace detail {

// Letters ordered by generator, positive power first.
inline bool letter_less(Letter const& a, Letter const& b) {
  if (a.gen != b.gen) return a.gen < b.gen;
  return a.exp > b.exp;
}

inline bool word_less(MatrixWord const& a, MatrixWord const& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), letter_less);
}

inline MatrixWord free_reduce(MatrixWord const& w) {
  MatrixWord out;
  for (auto const& l : w) {
    if (!out.empty() && out.back().gen == l.gen && out.back().exp == -l.exp)
      out.pop_back();
    else
      out.push_back(l);
  }
  return out;
}

inline std::vector<Letter> alphabet(std::size_t k) {
  std::vector<Letter> out;
  for (std::size_t g = 0; g < k; ++g) {
    out.push_back({g, 1});
    out.push_back({g, -1});
  }
  return out;
}

// lcm of all m with phi(m) <= n: every finite-order element of GL(n,Q) has
// order dividing it.
inline long torsion_exponent(std::size_t n) {
  long l = 1;
  for (long m = 1; m <= static_cast<long>(2 * n * n + 2); ++m) {
    long phi = m, x = m;
    for (long p = 2; p * p <= x; ++p)
      if (x % p == 0) {
        while (x % p == 0) x /= p;
        phi -= phi / p;
      }
    if (x > 1) phi -= phi / x;
    if (phi <= static_cast<long>(n)) l = std::lcm(l, m);
  }
  return l;
}

// Shortest (then least) reduced word of length <= depth evaluating to the
// identity, if one exists.
inline std::optional<MatrixWord> shortest_relation(std::vector<RatMatrix> const& gens, int depth,
                                                   int& searched) {
  std::size_t n = gens.front().size();
  std::vector<RatMatrix> invs;
  for (auto const& g : gens) invs.push_back(inverse(g));
  auto letter_matrix = [&](Letter const& l) -> RatMatrix const& {
    return l.exp > 0 ? gens[l.gen] : invs[l.gen];
  };
  auto letters = alphabet(gens.size());
  constexpr std::size_t word_cap = 400000;

  // Meet in the middle over reduced words of length <= half.
  int half = (depth + 1) / 2;
  std::map<RatMatrix, MatrixWord> first;
  std::vector<std::pair<MatrixWord, RatMatrix>> level{{{}, RatMatrix::identity(n)}};
  first.emplace(RatMatrix::identity(n), MatrixWord{});
  std::optional<MatrixWord> best;
  auto consider = [&](MatrixWord const& u, MatrixWord const& w) {
    MatrixWord r = u;
    auto wi = inverse_word(w);
    r.insert(r.end(), wi.begin(), wi.end());
    r = free_reduce(r);
    if (r.empty() || static_cast<int>(r.size()) > depth) return;
    if (!best || word_less(r, *best)) best = r;
  };
  searched = 0;
  std::size_t stored = 1;
  for (int len = 1; len <= half; ++len) {
    std::vector<std::pair<MatrixWord, RatMatrix>> next;
    for (auto const& [w, m] : level) {
      for (auto const& l : letters) {
        if (!w.empty() && w.back().gen == l.gen && w.back().exp == -l.exp) continue;
        MatrixWord nw = w;
        nw.push_back(l);
        RatMatrix nm = m * letter_matrix(l);
        auto [it, fresh] = first.emplace(nm, nw);
        if (!fresh) consider(nw, it->second);
        next.emplace_back(std::move(nw), std::move(nm));
      }
    }
    stored += next.size();
    level = std::move(next);
    searched = std::min(depth, 2 * len);
    if (stored > word_cap) break;
  }
  if (!best) return std::nullopt;

  // Least word of the shortest length, by direct enumeration when affordable.
  std::size_t len = best->size();
  double count = 2.0 * static_cast<double>(gens.size()) *
                 std::pow(2.0 * static_cast<double>(gens.size()) - 1, static_cast<double>(len) - 1);
  if (count > 2e6) return best;
  std::vector<Letter> sorted = letters;
  std::sort(sorted.begin(), sorted.end(), letter_less);
  MatrixWord cur;
  std::vector<RatMatrix> prefix{RatMatrix::identity(n)};
  std::optional<MatrixWord> found;
  auto dfs = [&](auto&& self) -> void {
    if (found) return;
    if (cur.size() == len) {
      if (prefix.back().is_identity()) found = cur;
      return;
    }
    for (auto const& l : sorted) {
      if (!cur.empty() && cur.back().gen == l.gen && cur.back().exp == -l.exp) continue;
      cur.push_back(l);
      prefix.push_back(prefix.back() * letter_matrix(l));
      self(self);
      prefix.pop_back();
      cur.pop_back();
      if (found) return;
    }
  };
  dfs(dfs);
  return found ? found : best;
}

// Points of the projective line as nonzero rational vectors up to scale,
// kept in the closed upper half plane.
struct Dir {
  Rational x, y;
};

inline Dir normalize(Dir d) {
  if (d.y < 0 || (d.y == 0 && d.x < 0)) {
    d.x = -d.x;
    d.y = -d.y;
  }
  // Scale so the larger coordinate has absolute value 1.
  Rational s = abs(d.x) > abs(d.y) ? abs(d.x) : abs(d.y);
  d.x /= s;
  d.y /= s;
  return d;
}

inline Rational cross(Dir const& a, Dir const& b) { return a.x * b.y - a.y * b.x; }
inline bool same(Dir const& a, Dir const& b) { return cross(a, b) == 0; }

// Position of p going counterclockwise from s: (wrapped, p).
inline bool before(Dir const& s, Dir const& p, Dir const& q) {
  bool wp = cross(s, p) < 0, wq = cross(s, q) < 0;
  if (same(s, p)) wp = false;
  if (same(s, q)) wq = false;
  if (wp != wq) return !wp;
  return cross(p, q) > 0;
}

struct Arc {
  Dir start, end;  // open, counterclockwise from start to end
};

// Whether the open arc `inner` lies in the open arc `outer`. With `strict`
// the closure of inner must lie in outer.
inline bool arc_within(Arc const& inner, Arc const& outer, bool strict) {
  Dir const& s = outer.start;
  // positions relative to s; an endpoint equal to s counts as the far end
  auto rank_end = [&](Dir const& p) { return same(p, s) ? 2 : 1; };
  auto le = [&](Dir const& p, bool p_end, Dir const& q, bool q_end) {
    int rp = p_end ? rank_end(p) : (same(p, s) ? 0 : 1);
    int rq = q_end ? rank_end(q) : (same(q, s) ? 0 : 1);
    if (rp != rq) return rp < rq;
    if (rp != 1) return true;
    return same(p, q) || before(s, p, q);
  };
  auto lt = [&](Dir const& p, bool p_end, Dir const& q, bool q_end) {
    return le(p, p_end, q, q_end) && !le(q, q_end, p, p_end);
  };
  if (same(inner.start, inner.end)) return false;
  bool ordered = lt(inner.start, false, inner.end, true);
  if (!ordered) return false;
  if (!le(inner.end, true, outer.end, true)) return false;
  if (strict) {
    if (same(inner.start, s) || same(inner.end, outer.end)) return false;
  }
  return true;
}

inline bool disjoint(Arc const& a, Arc const& b, bool strict) {
  return arc_within(b, Arc{a.end, a.start}, strict);
}

inline Dir apply(RatMatrix const& g, Dir const& p) {
  return normalize({g(0, 0) * p.x + g(0, 1) * p.y, g(1, 0) * p.x + g(1, 1) * p.y});
}

inline Arc image(RatMatrix const& g, Arc const& a) {
  Dir s = apply(g, a.start), e = apply(g, a.end);
  return determinant(g) > 0 ? Arc{s, e} : Arc{e, s};
}

inline std::string to_string(Dir const& d) {
  return "(" + coarsebundle::to_string(d.x) + ":" + coarsebundle::to_string(d.y) + ")";
}

inline std::string to_string(Arc const& a) { return to_string(a.start) + ".." + to_string(a.end); }

inline std::vector<Rational> const& arc_scales() {
  static std::vector<Rational> const scales = [] {
    std::vector<Rational> v;
    for (int k = -10; k <= 10; ++k) {
      Rational p = 1;
      for (int i = 0; i < std::abs(k); ++i) p *= 2;
      if (k < 0) p = 1 / p;
      v.push_back(p);
      v.push_back(p * Rational(3, 2));
    }
    std::sort(v.begin(), v.end());
    return v;
  }();
  return scales;
}

struct PingPongTable {
  std::vector<Arc> minus, plus;
  bool strict = false;
  bool gap = false;  // the closed arcs leave an open interval uncovered
};

inline bool inside(Dir const& x, Arc const& a) {
  return !same(x, a.start) && !same(x, a.end) && before(a.start, x, a.end);
}

// Pairwise disjoint open arcs leave an open interval exactly when some arc's
// end is not the start of the next arc counterclockwise.
inline bool leaves_gap(std::vector<Arc> arcs) {
  if (arcs.empty()) return true;
  Dir const base = arcs.front().start;
  std::sort(arcs.begin(), arcs.end(), [&](Arc const& a, Arc const& b) {
    if (same(a.start, b.start)) return false;
    if (same(a.start, base)) return true;
    if (same(b.start, base)) return false;
    return before(base, a.start, b.start);
  });
  for (std::size_t i = 0; i < arcs.size(); ++i)
    if (!same(arcs[i].end, arcs[(i + 1) % arcs.size()].start)) return true;
  return false;
}

// Rational fixed directions of the generators and of products of two
// distinct generators, with their images under the generators. Arcs of
// lattices touch at such points.
inline std::vector<Dir> special_directions(std::vector<RatMatrix> const& gens) {
  std::vector<RatMatrix> letters;
  for (auto const& g : gens) {
    letters.push_back(g);
    letters.push_back(inverse(g));
  }
  std::vector<RatMatrix> words = letters;
  for (std::size_t i = 0; i < letters.size(); ++i)
    for (std::size_t j = 0; j < letters.size(); ++j)
      if (i / 2 != j / 2) words.push_back(letters[i] * letters[j]);
  std::vector<Dir> fixed;
  auto add = [](std::vector<Dir>& v, Dir d) {
    d = normalize(d);
    for (auto const& x : v)
      if (same(x, d)) return;
    v.push_back(d);
  };
  for (auto const& w : words) {
    // Roots of c x^2 + (d - a) x - b over Q, in (x : 1) form.
    BinaryForm f = fixed_form(w);
    if (f.a == 0 && f.b == 0 && f.c == 0) continue;
    if (f.a == 0) {
      add(fixed, Dir{1, 0});
      if (f.b != 0) add(fixed, Dir{-f.c, f.b});
      continue;
    }
    Rational disc = f.b * f.b - 4 * f.a * f.c;
    if (disc < 0) continue;
    Integer num = disc.get_num(), den = disc.get_den();
    if (!mpz_perfect_square_p(num.get_mpz_t()) || !mpz_perfect_square_p(den.get_mpz_t())) continue;
    Rational root = Rational(Integer(sqrt(num)), Integer(sqrt(den)));
    add(fixed, Dir{-f.b + root, 2 * f.a});
    add(fixed, Dir{-f.b - root, 2 * f.a});
  }
  std::vector<Dir> out = fixed;
  for (auto const& d : fixed)
    for (auto const& l : letters) add(out, apply(l, d));
  if (out.size() > 64) out.resize(64);
  return out;
}

inline Rational to_rational_exact(double x) { return Rational(x); }

// Repelling fixed point r, a second direction w and a preferred arc scale.
// Arcs are drawn between r - t w and r + t w. For hyperbolic elements w is
// the attracting direction, so arcs are balanced in eigen-coordinates.
struct Repeller {
  Dir r, w;
  Rational scale;
  bool parabolic;
};

inline std::optional<Repeller> repeller(RatMatrix const& g) {
  ElementKind kind = element_kind(g);
  if (kind == ElementKind::Parabolic) {
    BinaryForm f = fixed_form(g);
    Dir r = normalize(f.a != 0 ? Dir{-f.b, 2 * f.a} : Dir{1, 0});
    return Repeller{r, Dir{-r.y, r.x}, Rational(1), true};
  }
  if (kind != ElementKind::Hyperbolic) return std::nullopt;
  Eigen::Matrix2d m;
  m << to_double(g(0, 0)), to_double(g(0, 1)), to_double(g(1, 0)), to_double(g(1, 1));
  Eigen::EigenSolver<Eigen::Matrix2d> es(m);
  auto vals = es.eigenvalues();
  int small = std::abs(vals(0).real()) < std::abs(vals(1).real()) ? 0 : 1;
  Eigen::Vector2d v = es.eigenvectors().col(small).real().normalized();
  Eigen::Vector2d u = es.eigenvectors().col(1 - small).real().normalized();
  double ratio = std::sqrt(std::abs(vals(small).real() / vals(1 - small).real()));
  Dir r = normalize({to_rational_exact(v(0)), to_rational_exact(v(1))});
  Dir w{to_rational_exact(u(0)), to_rational_exact(u(1))};
  if (same(r, w)) return std::nullopt;
  return Repeller{r, w, to_rational_exact(ratio), false};
}

}  // namespace detail

// Ping-pong certificate for rank-2 matrices: open arcs D-(g) and
// D+(g) = g(complement of the closure of D-(g)) with all arcs disjoint.
// Candidate arcs per generator come from a scale family balanced in
// eigen-coordinates and from special directions; the joint choice is found
// by backtracking, preferring strict tables, then tables with a gap.
inline std::optional<detail::PingPongTable> ping_pong(std::vector<RatMatrix> const& gens) {
  using namespace detail;
  if (gens.size() < 2 || gens.front().size() != 2) return std::nullopt;
  using Pair = std::pair<Arc, Arc>;
  auto const& scales = arc_scales();
  long const n_scales = static_cast<long>(scales.size());
  std::vector<Dir> special = special_directions(gens);
  std::vector<std::vector<Pair>> options(gens.size()), strict_options(gens.size());
  for (std::size_t i = 0; i < gens.size(); ++i) {
    auto rep = repeller(gens[i]);
    if (!rep) return std::nullopt;
    std::vector<Arc> minus;
    long base = 0;
    double want = std::log(to_double(rep->scale));
    for (long k = 0; k < n_scales; ++k)
      if (std::fabs(std::log(to_double(scales[k])) - want) < std::fabs(std::log(to_double(scales[base])) - want))
        base = k;
    std::vector<long> order{base};
    for (long o = 1; o < n_scales; ++o)
      for (long idx : {base + o, base - o})
        if (idx >= 0 && idx < n_scales) order.push_back(idx);
    bool ccw = cross(rep->r, rep->w) > 0;
    for (long idx : order) {
      Rational const& t = scales[idx];
      Dir lo = normalize({rep->r.x - t * rep->w.x, rep->r.y - t * rep->w.y});
      Dir hi = normalize({rep->r.x + t * rep->w.x, rep->r.y + t * rep->w.y});
      if (!ccw) std::swap(lo, hi);
      if (rep->parabolic) {
        minus.push_back({lo, rep->r});
        minus.push_back({rep->r, hi});
      } else {
        minus.push_back({lo, hi});
      }
    }
    for (auto const& p : special) {
      if (same(p, rep->r)) continue;
      if (rep->parabolic) {
        minus.push_back({p, rep->r});
        minus.push_back({rep->r, p});
        continue;
      }
      for (auto const& q : special)
        if (!same(p, q) && !same(q, rep->r) && inside(rep->r, Arc{p, q})) minus.push_back({p, q});
    }
    for (auto const& m : minus) {
      Arc plus = image(gens[i], Arc{m.end, m.start});
      if (!disjoint(m, plus, false)) continue;
      options[i].push_back({m, plus});
      if (disjoint(m, plus, true)) strict_options[i].push_back({m, plus});
    }
  }
  enum class Pass { Strict, Gap, Any };
  for (Pass pass : {Pass::Strict, Pass::Gap, Pass::Any}) {
    bool strict = pass == Pass::Strict;
    auto const& opts = strict ? strict_options : options;
    std::vector<Pair const*> chosen;
    long budget = 200000;
    auto complete = [&] {
      if (pass != Pass::Gap) return true;
      std::vector<Arc> all;
      for (auto const* p : chosen) {
        all.push_back(p->first);
        all.push_back(p->second);
      }
      return leaves_gap(all);
    };
    std::function<bool(std::size_t)> search = [&](std::size_t i) -> bool {
      if (i == gens.size()) return complete();
      for (auto const& p : opts[i]) {
        if (--budget < 0) return false;
        bool clash = false;
        for (std::size_t j = 0; j < chosen.size() && !clash; ++j)
          for (Arc const* a : {&chosen[j]->first, &chosen[j]->second})
            for (Arc const* b : {&p.first, &p.second}) clash = clash || !disjoint(*a, *b, strict);
        if (clash) continue;
        chosen.push_back(&p);
        if (search(i + 1)) return true;
        chosen.pop_back();
      }
      return false;
    };
    if (!search(0)) continue;
    PingPongTable table;
    for (auto const* p : chosen) {
      table.minus.push_back(p->first);
      table.plus.push_back(p->second);
    }
    std::vector<Arc> all = table.minus;
    all.insert(all.end(), table.plus.begin(), table.plus.end());
    table.strict = strict;
    table.gap = leaves_gap(all);
    return table;
  }
  return std::nullopt;
}

inline FreenessCertificate free_injectivity(std::vector<RatMatrix> const& gens, int depth) {
  if (gens.empty()) throw InvalidArgument("no generators");
  if (depth < 1) throw InvalidArgument("depth must be positive");
  for (auto const& g : gens)
    if (g.size() != gens.front().size() || determinant(g) == 0) throw SingularGenerator(to_string(g));
  FreenessCertificate out;
  int searched = 0;
  if (auto rel = detail::shortest_relation(gens, depth, searched)) {
    out.kind = FreenessCertificate::Kind::RelationFound;
    out.relation = *rel;
    out.depth = searched;
    return out;
  }
  out.depth = searched;
  if (gens.size() == 1) {
    long l = detail::torsion_exponent(gens[0].size());
    RatMatrix gl = power(gens[0], l);
    if (!gl.is_identity()) {
      out.kind = FreenessCertificate::Kind::InfiniteOrder;
      return out;
    }
    for (long m = 1; m <= l; ++m)
      if (l % m == 0 && power(gens[0], m).is_identity()) {
        out.kind = FreenessCertificate::Kind::RelationFound;
        out.relation = MatrixWord(static_cast<std::size_t>(m), Letter{0, 1});
        return out;
      }
  }
  if (auto table = ping_pong(gens)) {
    out.kind = FreenessCertificate::Kind::PingPong;
    out.strict = table->strict;
    out.gap = table->gap;
    for (std::size_t i = 0; i < gens.size(); ++i) {
      out.cones.push_back("g" + std::to_string(i) + "-: " + detail::to_string(table->minus[i]));
      out.cones.push_back("g" + std::to_string(i) + "+: " + detail::to_string(table->plus[i]));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hausdorff classes.

enum class Sl2Kind {
  Trivial,
  EllipticBounded,
  ParabolicElementary,
  HyperbolicElementary,
  AffineElementary,
  NonElementaryCantor,
  Lattice,
  FullGroup,
  Unknown
};

inline std::string to_string(Sl2Kind k) {
  switch (k) {
    case Sl2Kind::Trivial: return "Trivial";
    case Sl2Kind::EllipticBounded: return "EllipticBounded";
    case Sl2Kind::ParabolicElementary: return "ParabolicElementary";
    case Sl2Kind::HyperbolicElementary: return "HyperbolicElementary";
    case Sl2Kind::AffineElementary: return "AffineElementary";
    case Sl2Kind::NonElementaryCantor: return "NonElementaryCantor";
    case Sl2Kind::Lattice: return "Lattice";
    case Sl2Kind::FullGroup: return "FullGroup";
    case Sl2Kind::Unknown: return "Unknown";
  }
  return "?";
}

// Closed subgroup of (norm-one part) x (log|det|): either a graph of a
// homomorphism or a product.
struct HomGraph {
  bool graph = true;
  double slope = 0;  // log|det|/2 per unit translation length, hyperbolic case
  std::string descriptor() const;
};

inline std::string HomGraph::descriptor() const {
  if (!graph) return "product";
  char buf[64];
  std::snprintf(buf, sizeof buf, "graph slope=%.12g", slope);
  return buf;
}

struct HausdorffClass {
  Sl2Kind sl2 = Sl2Kind::Unknown;
  double translation_length = 0;  // HyperbolicElementary
  std::size_t lattice_index = 0;  // Lattice
  std::uint64_t cantor_hash = 0;  // NonElementaryCantor
  std::string certificate;
  Gl1Class det_part;
  std::optional<HomGraph> hom_graph;
};

namespace detail {

inline std::uint64_t fnv1a(std::string const& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// g scaled so its first nonzero entry is 1.
inline RatMatrix projective_normal(RatMatrix const& g) {
  for (auto const& x : g.entries())
    if (x != 0) return (1 / x) * g;
  return g;
}

inline std::optional<RatMatrix> rational_normalized(RatMatrix const& g) {
  Rational d = abs(determinant(g));
  Integer num_root = sqrt(Integer(d.get_num())), den_root = sqrt(Integer(d.get_den()));
  if (num_root * num_root != d.get_num() || den_root * den_root != d.get_den()) return std::nullopt;
  return (Rational(den_root) / Rational(num_root)) * g;
}

// Elliptic element of infinite order among short products.
inline std::optional<RatMatrix> irrational_rotation(Gl2Subgroup const& gens) {
  auto cands = with_pair_products(gens);
  for (std::size_t i = 0; i < gens.size(); ++i)
    for (std::size_t j = 0; j < gens.size(); ++j)
      if (i != j) cands.push_back(gens[i] * inverse(gens[j]));
  for (auto const& c : cands)
    if (element_kind(c) == ElementKind::Elliptic && !projectively_finite(c)) return c;
  return std::nullopt;
}

// Jorgensen's inequality fails for a non-elementary pair.
inline std::optional<std::string> jorgensen_violation(Gl2Subgroup const& gens) {
  for (std::size_t i = 0; i < gens.size(); ++i)
    for (std::size_t j = 0; j < gens.size(); ++j) {
      if (i == j) continue;
      RatMatrix const &a = gens[i], &b = gens[j];
      if (determinant(a) < 0 || determinant(b) < 0) continue;
      if (elementary_type({a, b}).kind != ElementaryKind::NonElementary) continue;
      Rational tr = a(0, 0) + a(1, 1);
      Rational t1 = abs(tr * tr / determinant(a) - 4);
      RatMatrix comm = a * b * inverse(a) * inverse(b);
      Rational t2 = abs(comm(0, 0) + comm(1, 1) - 2);
      if (t1 + t2 < 1) return "Jorgensen: " + to_string(a) + ", " + to_string(b);
    }
  return std::nullopt;
}

inline std::optional<HomGraph> hom_graph_for(Gl2Subgroup const& gens, Sl2Kind kind,
                                             Gl1Class const& det_part) {
  if (det_part.kind == Gl1Class::Kind::Trivial) return std::nullopt;
  if (kind != Sl2Kind::HyperbolicElementary && kind != Sl2Kind::ParabolicElementary)
    return std::nullopt;
  // Rows (motion along the one-parameter group, log|det|/2).
  std::vector<std::pair<double, double>> rows;
  std::optional<Eigen::Vector2d> attract;
  std::optional<Eigen::Matrix2d> nilpotent_ref;
  for (auto const& g : gens) {
    double half_log_det = std::log(std::fabs(to_double(determinant(g)))) / 2;
    double motion = 0;
    ElementKind ek = element_kind(g);
    if (ek == ElementKind::Hyperbolic) {
      Eigen::Matrix2d m = to_eigen(g);
      Eigen::EigenSolver<Eigen::Matrix2d> es(m);
      auto vals = es.eigenvalues();
      int big = std::abs(vals(0).real()) > std::abs(vals(1).real()) ? 0 : 1;
      Eigen::Vector2d v = es.eigenvectors().col(big).real().normalized();
      double len = translation_length(g);
      if (!attract) attract = v;
      motion = std::fabs(attract->dot(v)) > 0.5 ? len : -len;
    } else if (ek == ElementKind::Parabolic) {
      // g = +-sqrt|det| (I + tau N0) for a nilpotent N0 fixed by the first
      // parabolic generator.
      double scale = std::sqrt(std::fabs(to_double(determinant(g))));
      double sign = to_double(Rational(g(0, 0) + g(1, 1))) >= 0 ? 1 : -1;
      Eigen::Matrix2d nil = sign * to_eigen(g) / scale - Eigen::Matrix2d::Identity();
      if (!nilpotent_ref) nilpotent_ref = nil;
      Eigen::Index r = 0, c = 0;
      nilpotent_ref->cwiseAbs().maxCoeff(&r, &c);
      motion = nil(r, c) / (*nilpotent_ref)(r, c);
    }
    rows.push_back({motion, half_log_det});
  }
  // Rank of the rows.
  double ref_m = 0, ref_d = 0;
  for (auto const& [m, d] : rows)
    if (std::hypot(m, d) > std::hypot(ref_m, ref_d)) {
      ref_m = m;
      ref_d = d;
    }
  HomGraph out;
  for (auto const& [m, d] : rows) {
    double crossv = ref_m * d - ref_d * m;
    if (std::fabs(crossv) > 1e-9 * (1 + std::hypot(m, d)) * (1 + std::hypot(ref_m, ref_d)))
      out.graph = false;
  }
  if (out.graph) {
    if (ref_m == 0) {
      out.graph = false;
    } else if (kind == Sl2Kind::HyperbolicElementary) {
      out.slope = std::fabs(ref_d / ref_m);
    } else {
      out.slope = 1;  // all nonzero parabolic slopes are conjugate
    }
  }
  return out;
}

}  // namespace detail

struct HausdorffOptions {
  std::size_t coset_budget = 100000;
  int pingpong_depth = 8;
};

inline HausdorffClass hausdorff_class(Gl2Subgroup const& gens, HausdorffOptions const& opt = {}) {
  auto split = split_det(gens);
  HausdorffClass out;
  out.det_part = split.det_part;
  auto et = elementary_type(gens);
  out.certificate = et.witness;
  switch (et.kind) {
    case ElementaryKind::Finite: {
      bool trivial = std::all_of(gens.begin(), gens.end(), [](RatMatrix const& g) {
        return element_kind(g) == ElementKind::Trivial;
      });
      out.sl2 = trivial ? Sl2Kind::Trivial : Sl2Kind::EllipticBounded;
      break;
    }
    case ElementaryKind::EllipticBounded:
      out.sl2 = Sl2Kind::EllipticBounded;
      break;
    case ElementaryKind::ParabolicElementary:
      out.sl2 = Sl2Kind::ParabolicElementary;
      break;
    case ElementaryKind::HyperbolicElementary: {
      out.sl2 = Sl2Kind::HyperbolicElementary;
      double best = 0;
      for (auto const& g : detail::with_pair_products(gens)) {
        double l = translation_length(g);
        if (l > 1e-12 && (best == 0 || l < best)) best = l;
      }
      out.translation_length = best;
      break;
    }
    case ElementaryKind::AffineElementary:
      out.sl2 = Sl2Kind::AffineElementary;
      break;
    case ElementaryKind::NonElementary: {
      std::vector<RatMatrix> normalized;
      bool integral = true;
      for (auto const& g : gens) {
        auto n = detail::rational_normalized(g);
        if (!n || !is_integral(*n)) {
          integral = false;
          break;
        }
        normalized.push_back(*n);
      }
      if (integral) {
        auto idx = classify_psl2z_subgroup(normalized, opt.coset_budget);
        if (idx.kind == Psl2zIndex::Kind::FiniteIndex) {
          out.sl2 = Sl2Kind::Lattice;
          out.lattice_index = idx.index;
          out.certificate = "coset enumeration: index " + std::to_string(idx.index);
          break;
        }
      }
      if (auto rot = detail::irrational_rotation(gens)) {
        out.sl2 = Sl2Kind::FullGroup;
        out.certificate = "infinite-order rotation " + to_string(*rot);
        break;
      }
      if (auto jv = detail::jorgensen_violation(gens)) {
        out.sl2 = Sl2Kind::FullGroup;
        out.certificate = *jv;
        break;
      }
      auto table = ping_pong(gens);
      if (table && table->gap) {
        out.sl2 = Sl2Kind::NonElementaryCantor;
        std::vector<std::string> keys;
        for (auto const& g : gens) keys.push_back(to_string(detail::projective_normal(g)));
        std::sort(keys.begin(), keys.end());
        std::string joined;
        for (auto const& k : keys) joined += k + ";";
        out.cantor_hash = detail::fnv1a(joined);
        out.certificate = "Schottky arcs";
        break;
      }
      out.sl2 = Sl2Kind::Unknown;
      out.certificate = integral ? "coset budget exhausted, no Schottky certificate"
                                 : "no discreteness or density certificate";
      break;
    }
  }
  out.hom_graph = detail::hom_graph_for(gens, out.sl2, out.det_part);
  return out;
}

struct Equivalence {
  enum class Kind { Equivalent, NotEquivalent, Unknown } kind;
  std::string detail;
};

inline std::string to_string(Equivalence::Kind k) {
  switch (k) {
    case Equivalence::Kind::Equivalent: return "Equivalent";
    case Equivalence::Kind::NotEquivalent: return "NotEquivalent";
    case Equivalence::Kind::Unknown: return "Unknown";
  }
  return "?";
}

namespace detail {

inline bool bounded(Sl2Kind k) { return k == Sl2Kind::Trivial || k == Sl2Kind::EllipticBounded; }

inline bool projectively_equal(RatMatrix const& a, RatMatrix const& b) {
  return projective_normal(a) == projective_normal(b);
}

inline bool generators_match(Gl2Subgroup const& a, Gl2Subgroup const& b) {
  auto covered = [](Gl2Subgroup const& xs, Gl2Subgroup const& ys) {
    return std::all_of(xs.begin(), xs.end(), [&](RatMatrix const& x) {
      return std::any_of(ys.begin(), ys.end(), [&](RatMatrix const& y) {
        return projectively_equal(x, y) || projectively_equal(x, inverse(y));
      });
    });
  };
  return covered(a, b) && covered(b, a);
}

}  // namespace detail

inline Equivalence hausdorff_equivalent(HausdorffClass const& c1, HausdorffClass const& c2) {
  using K = Equivalence::Kind;
  if (c1.sl2 == Sl2Kind::Unknown || c2.sl2 == Sl2Kind::Unknown) return {K::Unknown, "undecided class"};
  bool same_sl2 = c1.sl2 == c2.sl2 || (detail::bounded(c1.sl2) && detail::bounded(c2.sl2));
  if (!same_sl2) return {K::NotEquivalent, "sl2_part"};
  if (c1.det_part.kind != c2.det_part.kind) return {K::NotEquivalent, "det_part"};
  if (c1.det_part.kind == Gl1Class::Kind::Discrete && !(c1.det_part == c2.det_part))
    return {K::NotEquivalent, "det_part"};
  bool det_trivial = c1.det_part.kind == Gl1Class::Kind::Trivial;
  switch (c1.sl2) {
    case Sl2Kind::Lattice:
      if (det_trivial) return {K::Equivalent, "both commensurable with PSL(2,Z)"};
      return {K::Unknown, "homomorphisms on lattices are not compared"};
    case Sl2Kind::NonElementaryCantor:
      return {K::Unknown, "Cantor limit sets need a conjugator"};
    case Sl2Kind::FullGroup:
      if (det_trivial) return {K::Equivalent, "both dense"};
      return {K::Unknown, "dense with determinant part"};
    case Sl2Kind::AffineElementary:
      if (det_trivial) return {K::Equivalent, "both cocompact in a Borel subgroup"};
      return {K::Unknown, "affine with determinant part"};
    default:
      break;
  }
  if (c1.hom_graph.has_value() != c2.hom_graph.has_value()) return {K::NotEquivalent, "hom_graph"};
  if (c1.hom_graph) {
    auto const &h1 = *c1.hom_graph, &h2 = *c2.hom_graph;
    if (h1.graph != h2.graph) return {K::NotEquivalent, "hom_graph"};
    if (h1.graph && std::fabs(h1.slope - h2.slope) > 1e-9 * (1 + std::fabs(h1.slope)))
      return {K::NotEquivalent, "hom_graph"};
  }
  return {K::Equivalent, "same elementary class " + to_string(c1.sl2)};
}

inline Equivalence hausdorff_equivalent(Gl2Subgroup const& g1, Gl2Subgroup const& g2,
                                        std::optional<RatMatrix> const& conjugator = std::nullopt,
                                        HausdorffOptions const& opt = {}) {
  auto c1 = hausdorff_class(g1, opt), c2 = hausdorff_class(g2, opt);
  auto result = hausdorff_equivalent(c1, c2);
  if (result.kind == Equivalence::Kind::Unknown && conjugator &&
      c1.sl2 == Sl2Kind::NonElementaryCantor && c2.sl2 == Sl2Kind::NonElementaryCantor) {
    Gl2Subgroup moved;
    RatMatrix ci = inverse(*conjugator);
    for (auto const& g : g1) moved.push_back(*conjugator * g * ci);
    if (detail::generators_match(moved, g2) && c1.det_part == c2.det_part)
      return {Equivalence::Kind::Equivalent, "conjugator matches generators"};
  }
  return result;
}

}  // namespace coarsebundle
