#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "matrix.hpp"

namespace coarsebundle {

// Words in the generators of PSL(2,Z) = <s, t | s^2, t^3>.
enum class ModularLetter : std::uint8_t { S = 0, T = 1, TInv = 2 };
using ModularWord = std::vector<ModularLetter>;

inline RatMatrix modular_s() { return RatMatrix{{0, -1}, {1, 0}}; }
inline RatMatrix modular_t() { return RatMatrix{{0, -1}, {1, -1}}; }

inline RatMatrix evaluate_modular(ModularWord const& w) {
  static RatMatrix const s = modular_s(), t = modular_t(), ti = inverse(modular_t());
  RatMatrix r = RatMatrix::identity(2);
  for (auto l : w) r = r * (l == ModularLetter::S ? s : l == ModularLetter::T ? t : ti);
  return r;
}

inline std::string to_string(ModularWord const& w) {
  std::string out;
  for (auto l : w) out += l == ModularLetter::S ? "s" : l == ModularLetter::T ? "t" : "T";
  return out.empty() ? "e" : out;
}

namespace detail {

inline void append_translation(ModularWord& w, Integer const& k) {
  // [[1,1],[0,1]] = t^-1 s and its inverse is s t (up to sign).
  Integer n = abs(k);
  for (Integer i = 0; i < n; ++i) {
    if (k > 0) {
      w.push_back(ModularLetter::TInv);
      w.push_back(ModularLetter::S);
    } else {
      w.push_back(ModularLetter::S);
      w.push_back(ModularLetter::T);
    }
  }
}

}  // namespace detail

// Word in s, t equal to +-m, by the Euclidean algorithm on the first column.
inline ModularWord rewrite_modular(RatMatrix const& m) {
  if (m.size() != 2 || !is_integral(m) || determinant(m) != 1) throw NotInLattice(to_string(m));
  IntMatrix cur = to_integer(m);
  ModularWord w;
  IntMatrix const s_inv{{0, 1}, {-1, 0}};
  while (cur(1, 0) != 0) {
    Integer c = cur(1, 0);
    Integer q = floor_div(cur(0, 0), Integer(abs(c)));
    if (c < 0) q = -q;
    detail::append_translation(w, q);
    IntMatrix shift{{1, -q}, {0, 1}};
    cur = shift * cur;
    w.push_back(ModularLetter::S);
    cur = s_inv * cur;
  }
  // cur = +-[[1, b], [0, 1]].
  detail::append_translation(w, cur(0, 1) * cur(0, 0));
  return w;
}

struct CosetEnumeration {
  bool complete = false;
  std::size_t index = 0;         // number of live cosets when complete
  std::size_t cosets_defined = 0;
};

// Hasse-Lenz-Trotter enumeration of the cosets of H in <s, t | s^2, t^3>.
inline CosetEnumeration todd_coxeter(std::vector<ModularWord> const& subgroup,
                                     std::size_t budget = 100000) {
  constexpr int ngen = 3;
  auto inv = [](int x) { return x == 0 ? 0 : (x == 1 ? 2 : 1); };
  using Row = std::array<std::int64_t, ngen>;
  std::vector<Row> table;
  std::vector<std::int64_t> parent;
  std::vector<std::vector<int>> relators{{0, 0}, {1, 1, 1}};
  std::vector<std::vector<int>> hgens;
  for (auto const& w : subgroup) {
    std::vector<int> v;
    for (auto l : w) v.push_back(static_cast<int>(l));
    hgens.push_back(std::move(v));
  }
  bool exhausted = false;

  auto new_coset = [&]() -> std::int64_t {
    if (table.size() >= budget) {
      exhausted = true;
      return -1;
    }
    table.push_back({-1, -1, -1});
    parent.push_back(static_cast<std::int64_t>(parent.size()));
    return static_cast<std::int64_t>(table.size() - 1);
  };
  auto rep = [&](std::int64_t c) {
    std::int64_t r = c;
    while (parent[r] != r) r = parent[r];
    while (parent[c] != r) {
      std::int64_t next = parent[c];
      parent[c] = r;
      c = next;
    }
    return r;
  };
  auto alive = [&](std::int64_t c) { return parent[c] == c; };

  std::vector<std::int64_t> queue;
  auto merge = [&](std::int64_t a, std::int64_t b) {
    a = rep(a);
    b = rep(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent[b] = a;
    queue.push_back(b);
  };
  auto coincidence = [&](std::int64_t a, std::int64_t b) {
    queue.clear();
    merge(a, b);
    for (std::size_t k = 0; k < queue.size(); ++k) {
      std::int64_t g = queue[k];
      for (int x = 0; x < ngen; ++x) {
        std::int64_t d = table[g][x];
        if (d < 0) continue;
        if (table[d][inv(x)] == g) table[d][inv(x)] = -1;
        std::int64_t mu = rep(g), nu = rep(d);
        if (table[mu][x] >= 0) {
          merge(nu, table[mu][x]);
        } else if (table[nu][inv(x)] >= 0) {
          merge(mu, table[nu][inv(x)]);
        } else {
          table[mu][x] = nu;
          table[nu][inv(x)] = mu;
        }
      }
    }
  };
  auto define = [&](std::int64_t c, int x) {
    std::int64_t d = new_coset();
    if (d < 0) return;
    table[c][x] = d;
    table[d][inv(x)] = c;
  };
  auto scan_and_fill = [&](std::int64_t c, std::vector<int> const& w) {
    if (w.empty()) return;
    std::int64_t f = c, b = c;
    long const r = static_cast<long>(w.size()) - 1;
    long i = 0, j = r;
    for (;;) {
      while (i <= r && table[f][w[i]] >= 0) f = table[f][w[i++]];
      if (i > r) {
        if (f != c) coincidence(f, c);
        return;
      }
      while (j >= i && table[b][inv(w[j])] >= 0) b = table[b][inv(w[j--])];
      if (j < i) {
        coincidence(f, b);
        return;
      }
      if (i == j) {
        table[f][w[i]] = b;
        table[b][inv(w[i])] = f;
        return;
      }
      define(f, w[i]);
      if (exhausted) return;
    }
  };

  new_coset();
  for (auto const& w : hgens) {
    scan_and_fill(0, w);
    if (exhausted) break;
  }
  for (std::int64_t a = 0; !exhausted && a < static_cast<std::int64_t>(table.size()); ++a) {
    for (auto const& r : relators) {
      if (!alive(a)) break;
      scan_and_fill(a, r);
      if (exhausted) break;
    }
    if (exhausted || !alive(a)) continue;
    for (int x = 0; x < ngen; ++x) {
      if (table[a][x] < 0) define(a, x);
      if (exhausted) break;
    }
  }
  CosetEnumeration out;
  out.cosets_defined = table.size();
  if (exhausted) return out;
  out.complete = true;
  for (std::size_t c = 0; c < table.size(); ++c)
    if (parent[c] == static_cast<std::int64_t>(c)) ++out.index;
  return out;
}

struct Psl2zIndex {
  enum class Kind { FiniteIndex, InfiniteIndexOrUnknown } kind;
  std::size_t index = 0;           // when FiniteIndex
  std::size_t cosets_defined = 0;  // work spent
};

// Index in PSL(2,Z) of the image of the orientation-preserving part of the
// group generated by integral matrices with determinant +-1.
inline Psl2zIndex classify_psl2z_subgroup(std::vector<RatMatrix> const& gens,
                                          std::size_t budget = 100000) {
  std::vector<RatMatrix> positive;
  std::optional<RatMatrix> flip;
  for (auto const& g : gens) {
    if (g.size() != 2 || !is_integral(g) || abs(determinant(g)) != 1)
      throw NotInLattice(to_string(g));
    if (determinant(g) == -1 && !flip) flip = g;
  }
  if (!flip) {
    positive = gens;
  } else {
    // Schreier generators of H intersect SL(2,Z) for transversal {I, flip}.
    RatMatrix const flip_inv = inverse(*flip);
    for (bool use_flip : {false, true}) {
      RatMatrix r = use_flip ? *flip : RatMatrix::identity(2);
      for (auto const& g : gens) {
        RatMatrix x = r * g;
        RatMatrix y = determinant(x) == 1 ? x : x * flip_inv;
        if (!y.is_identity()) positive.push_back(y);
      }
    }
  }
  std::vector<ModularWord> words;
  for (auto const& g : positive) words.push_back(rewrite_modular(g));
  auto run = todd_coxeter(words, budget);
  Psl2zIndex out{run.complete ? Psl2zIndex::Kind::FiniteIndex
                              : Psl2zIndex::Kind::InfiniteIndexOrUnknown,
                 run.index, run.cosets_defined};
  return out;
}

}  // namespace coarsebundle
