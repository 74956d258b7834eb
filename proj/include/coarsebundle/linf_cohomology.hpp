#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <type_traits>
#include <vector>

#include "matrix.hpp"

namespace coarsebundle {

struct BaseEdge {
  std::size_t from, to;
};

// A 2-complex. Edges are stored once; the reversed edge carries the negated
// cochain value. Face boundaries and loops are sequences of signed 1-based
// edge references: +k runs edge k-1 forward, -k backward.
struct BaseComplex {
  std::size_t vertex_count = 0;
  std::vector<BaseEdge> edges;
  std::vector<std::vector<long>> faces;
  std::size_t basepoint = 0;
  std::size_t grid_nx = 0, grid_ny = 0;  // vertex counts of a grid complex, else 0

  bool is_grid() const { return grid_nx > 0; }
};

struct Loop {
  std::vector<long> steps;
  std::size_t length() const { return steps.size(); }
};

namespace detail {

inline std::size_t step_edge(long s) { return static_cast<std::size_t>(s > 0 ? s - 1 : -s - 1); }

inline std::size_t step_tail(BaseComplex const& cx, long s) {
  auto const& e = cx.edges[step_edge(s)];
  return s > 0 ? e.from : e.to;
}

inline std::size_t step_head(BaseComplex const& cx, long s) {
  auto const& e = cx.edges[step_edge(s)];
  return s > 0 ? e.to : e.from;
}

}  // namespace detail

inline void validate(BaseComplex const& cx) {
  std::size_t const n = cx.vertex_count;
  if (n == 0) throw InvalidArgument("complex has no vertices");
  if (cx.basepoint >= n) throw IndexOutOfRange("basepoint");
  for (auto const& e : cx.edges)
    if (e.from >= n || e.to >= n) throw IndexOutOfRange("edge endpoint");
  for (std::size_t f = 0; f < cx.faces.size(); ++f) {
    auto const& b = cx.faces[f];
    if (b.empty()) throw InvalidArgument("face " + std::to_string(f) + " has an empty boundary");
    for (long s : b)
      if (s == 0 || detail::step_edge(s) >= cx.edges.size()) throw IndexOutOfRange("face edge reference");
    for (std::size_t k = 0; k < b.size(); ++k)
      if (detail::step_head(cx, b[k]) != detail::step_tail(cx, b[(k + 1) % b.size()]))
        throw InvalidArgument("face " + std::to_string(f) + " boundary is not a closed loop");
  }
  std::vector<std::size_t> parent(n);
  for (std::size_t v = 0; v < n; ++v) parent[v] = v;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto const& e : cx.edges) parent[find(e.from)] = find(e.to);
  for (std::size_t v = 0; v < n; ++v)
    if (find(v) != find(0)) throw Disconnected("complex");
}

// nx by ny vertices, unit squares as counterclockwise faces.
inline BaseComplex grid_complex(std::size_t nx, std::size_t ny) {
  if (nx < 2 || ny < 2) throw InvalidArgument("grid needs at least 2x2 vertices");
  BaseComplex cx;
  cx.vertex_count = nx * ny;
  cx.grid_nx = nx;
  cx.grid_ny = ny;
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t x = 0; x + 1 < nx; ++x) cx.edges.push_back({y * nx + x, y * nx + x + 1});
  for (std::size_t y = 0; y + 1 < ny; ++y)
    for (std::size_t x = 0; x < nx; ++x) cx.edges.push_back({y * nx + x, (y + 1) * nx + x});
  auto h = [&](std::size_t x, std::size_t y) { return static_cast<long>(y * (nx - 1) + x + 1); };
  auto v = [&](std::size_t x, std::size_t y) { return static_cast<long>((nx - 1) * ny + y * nx + x + 1); };
  for (std::size_t y = 0; y + 1 < ny; ++y)
    for (std::size_t x = 0; x + 1 < nx; ++x) cx.faces.push_back({h(x, y), v(x + 1, y), -h(x, y + 1), -v(x, y)});
  return cx;
}

template <class T>
struct Cochain1 {
  std::size_t dim = 1;
  std::vector<std::vector<T>> values;  // per stored edge
};

template <class T>
struct Cochain2 {
  std::size_t dim = 1;
  std::vector<std::vector<T>> values;  // per face
};

template <class T>
Cochain1<T> zero_cochain1(BaseComplex const& cx, std::size_t dim) {
  return {dim, std::vector<std::vector<T>>(cx.edges.size(), std::vector<T>(dim, T(0)))};
}

template <class T>
Cochain2<T> zero_cochain2(BaseComplex const& cx, std::size_t dim) {
  return {dim, std::vector<std::vector<T>>(cx.faces.size(), std::vector<T>(dim, T(0)))};
}

// a(x,y -> x+1,y) = 0, a(x,y -> x,y+1) = x.
template <class T>
Cochain1<T> heisenberg_cochain(BaseComplex const& cx) {
  if (!cx.is_grid()) throw InvalidArgument("the Heisenberg cochain needs a grid complex");
  auto a = zero_cochain1<T>(cx, 1);
  for (std::size_t e = 0; e < cx.edges.size(); ++e)
    if (cx.edges[e].to == cx.edges[e].from + cx.grid_nx) a.values[e][0] = T(static_cast<long>(cx.edges[e].from % cx.grid_nx));
  return a;
}

template <class T>
std::vector<T> loop_sum(BaseComplex const& cx, Cochain1<T> const& a, std::vector<long> const& steps) {
  std::vector<T> s(a.dim, T(0));
  for (long st : steps) {
    auto const& v = a.values[detail::step_edge(st)];
    for (std::size_t c = 0; c < a.dim; ++c) s[c] += st > 0 ? v[c] : T(-v[c]);
  }
  (void)cx;
  return s;
}

template <class T>
Cochain2<T> d1(BaseComplex const& cx, Cochain1<T> const& a) {
  if (a.values.size() != cx.edges.size()) throw InvalidArgument("cochain size does not match the complex");
  Cochain2<T> c{a.dim, {}};
  for (auto const& f : cx.faces) c.values.push_back(loop_sum(cx, a, f));
  return c;
}

template <class T>
Cochain2<T> tau_from_gluing(BaseComplex const& cx, Cochain1<T> const& gluing) {
  return d1(cx, gluing);
}

// (df)(u -> v) = f(u) - f(v).
template <class T>
Cochain1<T> coboundary0(BaseComplex const& cx, std::vector<std::vector<T>> const& f) {
  std::size_t dim = f.empty() ? 1 : f.front().size();
  auto out = zero_cochain1<T>(cx, dim);
  for (std::size_t e = 0; e < cx.edges.size(); ++e)
    for (std::size_t c = 0; c < dim; ++c) out.values[e][c] = f[cx.edges[e].from][c] - f[cx.edges[e].to][c];
  return out;
}

template <class T>
Cochain1<T> add(Cochain1<T> a, Cochain1<T> const& b) {
  for (std::size_t e = 0; e < a.values.size(); ++e)
    for (std::size_t c = 0; c < a.dim; ++c) a.values[e][c] += b.values[e][c];
  return a;
}

template <class T>
Cochain2<T> add(Cochain2<T> a, Cochain2<T> const& b) {
  for (std::size_t f = 0; f < a.values.size(); ++f)
    for (std::size_t c = 0; c < a.dim; ++c) a.values[f][c] += b.values[f][c];
  return a;
}

template <class T>
T sup_norm(Cochain1<T> const& a) {
  T m(0);
  for (auto const& v : a.values)
    for (auto const& x : v) m = std::max<T>(m, scalar_traits<T>::abs(x));
  return m;
}

// ---------------------------------------------------------------------------
// Loop scans.

template <class T>
struct ScanRow {
  std::size_t length;
  T max_abs;
  T ratio;
  Loop witness;
};

namespace detail {

template <class T>
T vec_sup(std::vector<T> const& v) {
  T m(0);
  for (auto const& x : v) m = std::max<T>(m, scalar_traits<T>::abs(x));
  return m;
}

// Counterclockwise boundary of the rectangle of faces [x0, x0+w) x [y0, y0+h).
inline Loop rectangle_loop(BaseComplex const& cx, std::size_t x0, std::size_t y0, std::size_t w, std::size_t h) {
  std::size_t nx = cx.grid_nx, ny = cx.grid_ny;
  auto hz = [&](std::size_t x, std::size_t y) { return static_cast<long>(y * (nx - 1) + x + 1); };
  auto vt = [&](std::size_t x, std::size_t y) { return static_cast<long>((nx - 1) * ny + y * nx + x + 1); };
  Loop l;
  for (std::size_t k = 0; k < w; ++k) l.steps.push_back(hz(x0 + k, y0));
  for (std::size_t k = 0; k < h; ++k) l.steps.push_back(vt(x0 + w, y0 + k));
  for (std::size_t k = w; k-- > 0;) l.steps.push_back(-hz(x0 + k, y0 + h));
  for (std::size_t k = h; k-- > 0;) l.steps.push_back(-vt(x0, y0 + k));
  return l;
}

template <class T>
void record(std::map<std::size_t, ScanRow<T>>& rows, std::size_t len, T const& value,
            std::function<Loop()> const& make) {
  auto it = rows.find(len);
  if (it == rows.end()) {
    rows.emplace(len, ScanRow<T>{len, value, T(0), make()});
  } else if (value > it->second.max_abs) {
    it->second.max_abs = value;
    it->second.witness = make();
  }
}

// All axis-aligned rectangles, summed by Stokes over prefix sums of da.
template <class T>
void scan_rectangles(BaseComplex const& cx, Cochain1<T> const& a, std::size_t cap,
                     std::map<std::size_t, ScanRow<T>>& rows) {
  std::size_t fx = cx.grid_nx - 1, fy = cx.grid_ny - 1;
  auto da = d1(cx, a);
  // P[c][(y)*(fx+1)+x] = sum over faces with x' < x, y' < y
  std::vector<std::vector<T>> P(a.dim, std::vector<T>((fx + 1) * (fy + 1), T(0)));
  for (std::size_t c = 0; c < a.dim; ++c)
    for (std::size_t y = 1; y <= fy; ++y)
      for (std::size_t x = 1; x <= fx; ++x)
        P[c][y * (fx + 1) + x] = da.values[(y - 1) * fx + (x - 1)][c] + P[c][(y - 1) * (fx + 1) + x] +
                                 P[c][y * (fx + 1) + x - 1] - P[c][(y - 1) * (fx + 1) + x - 1];
  std::vector<T> best;
  for (std::size_t w = 1; w <= fx; ++w)
    for (std::size_t h = 1; h <= fy; ++h) {
      std::size_t len = 2 * (w + h);
      if (len > cap) continue;
      T top(0);
      std::size_t bx = 0, by = 0;
      bool any = false;
      for (std::size_t y0 = 0; y0 + h <= fy; ++y0)
        for (std::size_t x0 = 0; x0 + w <= fx; ++x0) {
          T m(0);
          for (std::size_t c = 0; c < a.dim; ++c) {
            auto const& p = P[c];
            T s = p[(y0 + h) * (fx + 1) + x0 + w] - p[y0 * (fx + 1) + x0 + w] - p[(y0 + h) * (fx + 1) + x0] +
                  p[y0 * (fx + 1) + x0];
            m = std::max<T>(m, scalar_traits<T>::abs(s));
          }
          if (!any || m > top) {
            top = m;
            bx = x0;
            by = y0;
            any = true;
          }
        }
      if (any) record<T>(rows, len, top, [&] { return rectangle_loop(cx, bx, by, w, h); });
    }
}

inline std::vector<long> free_reduce_steps(std::vector<long> const& w) {
  std::vector<long> out;
  for (long s : w) {
    if (!out.empty() && out.back() == -s)
      out.pop_back();
    else
      out.push_back(s);
  }
  // cyclic reduction
  std::size_t i = 0, j = out.size();
  while (j - i >= 2 && out[i] == -out[j - 1]) {
    ++i;
    --j;
  }
  return std::vector<long>(out.begin() + static_cast<long>(i), out.begin() + static_cast<long>(j));
}

// Face boundaries, fundamental cycles of a BFS tree and random products of
// based fundamental cycles.
template <class T>
void scan_general(BaseComplex const& cx, Cochain1<T> const& a, std::size_t cap, std::uint64_t seed,
                  std::size_t samples, std::map<std::size_t, ScanRow<T>>& rows) {
  auto consider = [&](std::vector<long> steps) {
    steps = free_reduce_steps(steps);
    if (steps.empty() || steps.size() > cap) return;
    T m = vec_sup(loop_sum(cx, a, steps));
    record<T>(rows, steps.size(), m, [&] { return Loop{steps}; });
  };
  for (auto const& f : cx.faces) consider(f);
  std::size_t n = cx.vertex_count;
  std::vector<std::vector<long>> adj(n);
  for (std::size_t e = 0; e < cx.edges.size(); ++e) {
    adj[cx.edges[e].from].push_back(static_cast<long>(e + 1));
    adj[cx.edges[e].to].push_back(-static_cast<long>(e + 1));
  }
  std::vector<std::optional<long>> via(n);
  std::vector<bool> seen(n, false), tree(cx.edges.size(), false);
  std::deque<std::size_t> q{cx.basepoint};
  seen[cx.basepoint] = true;
  while (!q.empty()) {
    std::size_t v = q.front();
    q.pop_front();
    for (long s : adj[v]) {
      std::size_t w = step_head(cx, s);
      if (seen[w]) continue;
      seen[w] = true;
      via[w] = s;
      tree[step_edge(s)] = true;
      q.push_back(w);
    }
  }
  auto path_to = [&](std::size_t v) {
    std::vector<long> p;
    while (via[v]) {
      p.push_back(*via[v]);
      v = step_tail(cx, *via[v]);
    }
    std::reverse(p.begin(), p.end());
    return p;
  };
  std::vector<std::vector<long>> based;
  for (std::size_t e = 0; e < cx.edges.size(); ++e) {
    if (tree[e]) continue;
    long s = static_cast<long>(e + 1);
    std::vector<long> w = path_to(step_tail(cx, s));
    w.push_back(s);
    auto back = path_to(step_head(cx, s));
    for (auto it = back.rbegin(); it != back.rend(); ++it) w.push_back(-*it);
    based.push_back(w);
    consider(w);
  }
  if (based.empty()) return;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, based.size() - 1), count(2, 4);
  std::bernoulli_distribution flip(0.5);
  for (std::size_t k = 0; k < samples; ++k) {
    std::vector<long> w;
    std::size_t m = count(rng);
    for (std::size_t i = 0; i < m; ++i) {
      auto const& b = based[pick(rng)];
      if (flip(rng)) {
        w.insert(w.end(), b.begin(), b.end());
      } else {
        for (auto it = b.rbegin(); it != b.rend(); ++it) w.push_back(-*it);
      }
    }
    consider(w);
  }
}

}  // namespace detail

// Largest |a(l)| per loop length over a deterministic loop family.
template <class T>
std::vector<ScanRow<T>> linear_bound_scan(BaseComplex const& cx, Cochain1<T> const& a, std::size_t length_cap,
                                          std::uint64_t seed = 0, std::size_t samples = 512) {
  if (a.values.size() != cx.edges.size()) throw InvalidArgument("cochain size does not match the complex");
  std::map<std::size_t, ScanRow<T>> rows;
  if (cx.is_grid())
    detail::scan_rectangles(cx, a, length_cap, rows);
  else
    detail::scan_general(cx, a, length_cap, seed, samples, rows);
  std::vector<ScanRow<T>> out;
  for (auto& [len, row] : rows) {
    row.ratio = row.max_abs / T(static_cast<long>(len));
    out.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Solving c = da.

namespace detail {

template <class T>
bool negligible(T const& x, T const& scale) {
  if constexpr (scalar_traits<T>::exact)
    return scalar_traits<T>::is_zero(x);
  else
    return scalar_traits<T>::abs(x) <= T(1e-9) * (T(1) + scale);
}

}  // namespace detail

// Sparse elimination over the face-edge incidence; free edges are set to 0.
template <class T>
Cochain1<T> solve_coboundary(BaseComplex const& cx, Cochain2<T> const& c) {
  if (c.values.size() != cx.faces.size()) throw InvalidArgument("cochain size does not match the complex");
  std::size_t const dim = c.dim;
  struct Row {
    std::map<std::size_t, T> coef;
    std::vector<T> rhs;
    std::size_t pivot = 0;
  };
  std::vector<std::size_t> occurrences(cx.edges.size(), 0);
  for (auto const& f : cx.faces)
    for (long s : f) ++occurrences[detail::step_edge(s)];
  std::vector<Row> rows;
  std::vector<long> pivot_row(cx.edges.size(), -1);
  T scale(0);
  for (auto const& v : c.values)
    for (auto const& x : v) scale = std::max<T>(scale, scalar_traits<T>::abs(x));
  for (std::size_t f = 0; f < cx.faces.size(); ++f) {
    Row r;
    r.rhs = c.values[f];
    for (long s : cx.faces[f]) r.coef[detail::step_edge(s)] += T(s > 0 ? 1 : -1);
    std::priority_queue<long, std::vector<long>, std::greater<long>> todo;
    auto enqueue = [&](std::size_t col) {
      if (pivot_row[col] >= 0) todo.push(pivot_row[col]);
    };
    for (auto const& [col, x] : r.coef) enqueue(col);
    long last = -1;
    while (!todo.empty()) {
      long i = todo.top();
      todo.pop();
      if (i == last) continue;
      last = i;
      Row const& p = rows[static_cast<std::size_t>(i)];
      auto it = r.coef.find(p.pivot);
      if (it == r.coef.end()) continue;
      T factor = it->second;
      for (auto const& [col, x] : p.coef) {
        T& y = r.coef[col];
        y -= factor * x;
        if (col != p.pivot) enqueue(col);
      }
      for (std::size_t k = 0; k < dim; ++k) r.rhs[k] -= factor * p.rhs[k];
      for (auto jt = r.coef.begin(); jt != r.coef.end();)
        jt = detail::negligible(jt->second, T(1)) ? r.coef.erase(jt) : std::next(jt);
    }
    if (r.coef.empty()) {
      for (auto const& x : r.rhs)
        if (!detail::negligible(x, scale)) throw NotCoboundary("face " + std::to_string(f));
      continue;
    }
    std::size_t best = r.coef.begin()->first;
    for (auto const& [col, x] : r.coef)
      if (occurrences[col] < occurrences[best]) best = col;
    T lead = r.coef[best];
    for (auto& [col, x] : r.coef) x /= lead;
    for (auto& x : r.rhs) x /= lead;
    r.pivot = best;
    pivot_row[best] = static_cast<long>(rows.size());
    rows.push_back(std::move(r));
  }
  auto a = zero_cochain1<T>(cx, dim);
  for (std::size_t i = rows.size(); i-- > 0;) {
    Row const& r = rows[i];
    std::vector<T> v = r.rhs;
    for (auto const& [col, x] : r.coef)
      if (col != r.pivot)
        for (std::size_t k = 0; k < dim; ++k) v[k] -= x * a.values[col][k];
    a.values[r.pivot] = v;
  }
  return a;
}

// ---------------------------------------------------------------------------
// The sup-potential f(b) = sup { a(p) - 2C|p| : p a path from the basepoint to b }.

class PositiveCycle : public Error {
 public:
  PositiveCycle(std::size_t coord, Loop l)
      : Error("cycle with a(l) > 2C|l| in coordinate " + std::to_string(coord)),
        coordinate(coord),
        loop(std::move(l)) {}
  std::size_t coordinate;
  Loop loop;
};

template <class T>
struct PrimitiveResult {
  std::vector<std::vector<T>> f;  // per vertex
  T C;
  T bound;  // sup norm of a + df
};

template <class T>
PrimitiveResult<T> primitive(BaseComplex const& cx, Cochain1<T> const& a, T const& C) {
  validate(cx);
  if (C < 0) throw InvalidArgument("C must be nonnegative");
  if (a.values.size() != cx.edges.size()) throw InvalidArgument("cochain size does not match the complex");
  std::size_t const n = cx.vertex_count;
  std::vector<std::vector<long>> adj(n);
  for (std::size_t e = 0; e < cx.edges.size(); ++e) {
    adj[cx.edges[e].from].push_back(static_cast<long>(e + 1));
    adj[cx.edges[e].to].push_back(-static_cast<long>(e + 1));
  }
  T const twoC = T(2) * C;
  auto gain = [&](long s, std::size_t c) -> T {
    T const& x = a.values[detail::step_edge(s)][c];
    return (s > 0 ? x : T(-x)) - twoC;
  };
  auto better = [](T const& cand, T const& cur) {
    if constexpr (scalar_traits<T>::exact)
      return cand > cur;
    else
      return cand > cur + T(1e-12) * (T(1) + scalar_traits<T>::abs(cur));
  };
  PrimitiveResult<T> out{std::vector<std::vector<T>>(n, std::vector<T>(a.dim, T(0))), C, T(0)};
  for (std::size_t c = 0; c < a.dim; ++c) {
    std::vector<T> g(n, T(0));
    std::vector<bool> reached(n, false), queued(n, false);
    std::vector<std::size_t> hops(n, 0);  // edges on the current best path
    std::vector<long> pred(n, 0);
    std::deque<std::size_t> q{cx.basepoint};
    reached[cx.basepoint] = queued[cx.basepoint] = true;
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop_front();
      queued[u] = false;
      for (long s : adj[u]) {
        std::size_t v = detail::step_head(cx, s);
        T cand = g[u] + gain(s, c);
        if (reached[v] && !better(cand, g[v])) continue;
        g[v] = cand;
        reached[v] = true;
        pred[v] = s;
        hops[v] = hops[u] + 1;
        if (hops[v] >= n) {
          // Walk back n steps to land on the cycle, then read it off.
          std::size_t x = v;
          for (std::size_t k = 0; k < n; ++k) x = detail::step_tail(cx, pred[x]);
          Loop l;
          std::size_t y = x;
          do {
            l.steps.push_back(pred[y]);
            y = detail::step_tail(cx, pred[y]);
          } while (y != x);
          std::reverse(l.steps.begin(), l.steps.end());
          throw PositiveCycle(c, l);
        }
        if (!queued[v]) {
          queued[v] = true;
          q.push_back(v);
        }
      }
    }
    // Stabilization: one more full round changes nothing.
    for (std::size_t u = 0; u < n; ++u)
      for (long s : adj[u]) {
        std::size_t v = detail::step_head(cx, s);
        if (better(g[u] + gain(s, c), g[v])) throw Error("longest-path values did not stabilize");
      }
    for (std::size_t v = 0; v < n; ++v) out.f[v][c] = g[v];
  }
  out.bound = sup_norm(add(a, coboundary0(cx, out.f)));
  return out;
}

// ---------------------------------------------------------------------------
// Triviality.

enum class TrivialityKind { Trivial, Nontrivial, Unknown };

inline std::string to_string(TrivialityKind k) {
  switch (k) {
    case TrivialityKind::Trivial: return "Trivial";
    case TrivialityKind::Nontrivial: return "Nontrivial";
    default: return "Unknown";
  }
}

template <class T>
struct TrivialityVerdict {
  using Kind = TrivialityKind;
  Kind kind = Kind::Unknown;
  Cochain1<T> potential;  // a with da = c
  std::vector<ScanRow<T>> scan;
  std::vector<std::size_t> scales;  // doubling loop lengths
  std::vector<T> cumulative;        // max ratio over loops up to each scale
  std::vector<Loop> witnesses;      // maximizing loops at the scales
  std::optional<PrimitiveResult<T>> certificate;
  T bound_limit = T(0);  // 4C exact, 6C floating
  std::string reason;
};

inline constexpr double growth_factor = 1.5;
inline constexpr double flat_factor = 1.1;

template <class T>
TrivialityVerdict<T> is_trivial(BaseComplex const& cx, Cochain2<T> const& c, std::size_t length_cap,
                                std::vector<T> const& C_grid = {}, std::uint64_t seed = 0) {
  using K = typename TrivialityVerdict<T>::Kind;
  validate(cx);
  TrivialityVerdict<T> v;
  v.potential = solve_coboundary(cx, c);
  v.scan = linear_bound_scan(cx, v.potential, length_cap, seed);
  if (!v.scan.empty()) {
    std::size_t lmin = v.scan.front().length, lmax = v.scan.back().length;
    for (std::size_t l = lmin; l <= lmax; l *= 2) {
      T best(0);
      Loop arg;
      for (auto const& r : v.scan)
        if (r.length <= l && (arg.steps.empty() || r.ratio > best)) {
          best = r.ratio;
          arg = r.witness;
        }
      v.scales.push_back(l);
      v.cumulative.push_back(best);
      v.witnesses.push_back(arg);
    }
  }
  std::size_t K_ = v.cumulative.size();
  auto grows = [&](std::size_t k) {
    return v.cumulative[k - 1] > 0 && v.cumulative[k] >= T(growth_factor) * v.cumulative[k - 1];
  };
  if (K_ >= 4 && grows(K_ - 1) && grows(K_ - 2) && grows(K_ - 3)) {
    v.kind = K::Nontrivial;
    v.reason = "loop ratios grow across the last three doublings";
    return v;
  }
  bool flat = K_ <= 1 || v.cumulative[K_ - 1] <= T(flat_factor) * v.cumulative[K_ - 2];
  if (!flat) {
    v.reason = "loop ratios neither flat nor steadily growing";
    return v;
  }
  T observed = K_ ? v.cumulative.back() : T(0);
  std::vector<T> tries = C_grid;
  if (tries.empty()) {
    T C = observed;
    tries.push_back(C);
    if (C > 0)
      for (int k = 0; k < 4; ++k) tries.push_back(C *= T(2));
  }
  T const factor = scalar_traits<T>::exact ? T(4) : T(6);
  for (auto const& C : tries) {
    try {
      auto p = primitive(cx, v.potential, C);
      if (p.bound > factor * C) continue;
      v.kind = K::Trivial;
      v.bound_limit = factor * C;
      v.certificate = std::move(p);
      v.reason = "flat loop ratios; bounded primitive found";
      return v;
    } catch (PositiveCycle const&) {
    }
  }
  v.reason = "flat loop ratios but no primitive within the C grid";
  return v;
}

template <class T>
TrivialityVerdict<T> classes_equivalent_via(BaseComplex const& cx, Cochain2<T> const& c1, Cochain2<T> const& c2,
                                            RatMatrix const& M, std::size_t length_cap,
                                            std::vector<T> const& C_grid = {}, std::uint64_t seed = 0) {
  if (M.size() != c1.dim || c1.dim != c2.dim) throw RankMismatch("coefficient dimension");
  if (determinant(M) == 0) throw SingularMatrix();
  if (c1.values.size() != c2.values.size()) throw InvalidArgument("cochain sizes differ");
  Cochain2<T> diff = c1;
  for (std::size_t f = 0; f < diff.values.size(); ++f)
    for (std::size_t i = 0; i < c1.dim; ++i) {
      T s(0);
      for (std::size_t j = 0; j < c1.dim; ++j) {
        if constexpr (std::is_same_v<T, Rational>)
          s += M(i, j) * c2.values[f][j];
        else
          s += T(to_double(M(i, j))) * c2.values[f][j];
      }
      diff.values[f][i] -= s;
    }
  return is_trivial(cx, diff, length_cap, C_grid, seed);
}

}  // namespace coarsebundle
