#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "matrix.hpp"

namespace coarsebundle {

// Windows are never materialized; the window cap only bounds the index space.
inline constexpr std::size_t default_window_cap = std::size_t{1} << 50;
inline constexpr std::size_t default_growth_cap = 20'000'000;

// A fiber identification Z^n -> Z^n attached to a base edge.
struct FiberMap {
  enum class Kind { Translation, Linear, Affine, Tabulated, PhiFamily };
  Kind kind = Kind::Translation;
  IntMatrix matrix;                               // Linear, Affine
  std::vector<long> shift;                        // Translation, Affine
  std::vector<std::pair<long, long>> table;       // Tabulated, fiber_dim 1

  static FiberMap translation(std::vector<long> t) {
    FiberMap m;
    m.shift = std::move(t);
    return m;
  }
  static FiberMap linear(IntMatrix a) {
    FiberMap m;
    m.kind = Kind::Linear;
    m.matrix = std::move(a);
    return m;
  }
  static FiberMap affine(IntMatrix a, std::vector<long> t) {
    FiberMap m;
    m.kind = Kind::Affine;
    m.matrix = std::move(a);
    m.shift = std::move(t);
    return m;
  }
  static FiberMap tabulated(std::vector<std::pair<long, long>> t) {
    FiberMap m;
    m.kind = Kind::Tabulated;
    m.table = std::move(t);
    return m;
  }
  static FiberMap phi_family() {
    FiberMap m;
    m.kind = Kind::PhiFamily;
    return m;
  }
};

inline std::string to_string(FiberMap::Kind k) {
  switch (k) {
    case FiberMap::Kind::Translation: return "translation";
    case FiberMap::Kind::Linear: return "linear";
    case FiberMap::Kind::Affine: return "affine";
    case FiberMap::Kind::Tabulated: return "tabulated";
    default: return "phi";
  }
}

// phi_n(x) = 2x for |x| <= n, x + n for x > n, x - n for x < -n; negative n acts as 0.
inline long phi(long n, long x) {
  n = std::max(n, 0L);
  if (x > n) return x + n;
  if (x < -n) return x - n;
  return 2 * x;
}

inline std::optional<long> phi_preimage(long n, long y) {
  n = std::max(n, 0L);
  if (y > 2 * n) return y - n;
  if (y < -2 * n) return y + n;
  if (y % 2 == 0) return y / 2;
  return std::nullopt;
}

struct GluingSpec {
  enum class Base { Line, Grid, Graph };
  Base base = Base::Line;
  std::size_t fiber_dim = 1;
  // Line: maps[0] on b -> b+1. Grid: maps[0] on x-steps, maps[1] on y-steps.
  std::vector<FiberMap> maps;
  struct Edge {
    std::size_t from, to;
    FiberMap map;
  };
  std::size_t graph_vertices = 0;
  std::vector<Edge> graph_edges;
};

inline GluingSpec phi_example_spec() {
  GluingSpec s;
  s.maps.push_back(FiberMap::phi_family());
  return s;
}

struct Interval {
  long lo = 0, hi = 0;
  bool contains(long x) const { return lo <= x && x <= hi; }
  std::size_t size() const { return static_cast<std::size_t>(hi - lo + 1); }
};

struct Windows {
  std::vector<Interval> base;   // one per base coordinate; empty for Graph bases
  std::vector<Interval> fiber;  // one per fiber coordinate
};

struct TotalPoint {
  std::vector<long> fiber;
  std::vector<long> base;  // line: {b}; grid: {x, y}; graph: {vertex}
  bool operator==(TotalPoint const&) const = default;
};

namespace detail {

// Exact integer action of a Linear/Affine map and its integral preimage.
struct CompiledMap {
  FiberMap::Kind kind;
  std::vector<std::vector<long>> a;
  std::vector<long> t;
  std::vector<std::vector<long>> inv_num;  // adjugate-style numerators
  long inv_den = 1;
  std::map<long, long> fwd, back;
};

inline long to_long_checked(Integer const& x) {
  if (!x.fits_slong_p()) throw InvalidArgument("matrix entry exceeds the machine range");
  return x.get_si();
}

inline CompiledMap compile(FiberMap const& m, std::size_t n) {
  CompiledMap c;
  c.kind = m.kind;
  using K = FiberMap::Kind;
  if (m.kind == K::Translation || m.kind == K::Affine) {
    if (m.shift.size() != n) throw RankMismatch("translation vector");
    c.t = m.shift;
  }
  if (m.kind == K::Linear || m.kind == K::Affine) {
    if (m.matrix.size() != n) throw RankMismatch("fiber map matrix");
    if (determinant(m.matrix) == 0) throw SingularMatrix("fiber map");
    if (c.t.empty()) c.t.assign(n, 0);
    c.a.assign(n, std::vector<long>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) c.a[i][j] = to_long_checked(m.matrix(i, j));
    RatMatrix inv = inverse(m.matrix);
    Integer den = 1;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        Integer d = inv(i, j).get_den();
        den = den * d / gcd(den, d);
      }
    c.inv_den = to_long_checked(den);
    c.inv_num.assign(n, std::vector<long>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) c.inv_num[i][j] = to_long_checked(Rational(inv(i, j) * den).get_num());
  }
  if (m.kind == K::Tabulated) {
    if (n != 1) throw RankMismatch("tabulated maps act on Z");
    for (auto [x, y] : m.table) {
      if (!c.fwd.emplace(x, y).second) throw NonBijectiveTabulated("input " + std::to_string(x) + " listed twice");
      if (!c.back.emplace(y, x).second) throw NonBijectiveTabulated("value " + std::to_string(y) + " hit twice");
    }
  }
  if (m.kind == K::PhiFamily && n != 1) throw RankMismatch("the phi family acts on Z");
  return c;
}

// param is the source base vertex, used by the phi family.
inline std::optional<std::vector<long>> apply(CompiledMap const& c, long param, std::vector<long> const& x) {
  using K = FiberMap::Kind;
  std::size_t n = x.size();
  switch (c.kind) {
    case K::Translation: {
      std::vector<long> y = x;
      for (std::size_t i = 0; i < n; ++i) y[i] += c.t[i];
      return y;
    }
    case K::Linear:
    case K::Affine: {
      std::vector<long> y(c.t);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) y[i] += c.a[i][j] * x[j];
      return y;
    }
    case K::Tabulated: {
      auto it = c.fwd.find(x[0]);
      if (it == c.fwd.end()) return std::nullopt;
      return std::vector<long>{it->second};
    }
    default:
      return std::vector<long>{phi(param, x[0])};
  }
}

inline std::optional<std::vector<long>> preimage(CompiledMap const& c, long param, std::vector<long> const& y) {
  using K = FiberMap::Kind;
  std::size_t n = y.size();
  switch (c.kind) {
    case K::Translation: {
      std::vector<long> x = y;
      for (std::size_t i = 0; i < n; ++i) x[i] -= c.t[i];
      return x;
    }
    case K::Linear:
    case K::Affine: {
      std::vector<long> x(n, 0);
      for (std::size_t i = 0; i < n; ++i) {
        long s = 0;
        for (std::size_t j = 0; j < n; ++j) s += c.inv_num[i][j] * (y[j] - c.t[j]);
        if (s % c.inv_den != 0) return std::nullopt;
        x[i] = s / c.inv_den;
      }
      return x;
    }
    case K::Tabulated: {
      auto it = c.back.find(y[0]);
      if (it == c.back.end()) return std::nullopt;
      return std::vector<long>{it->second};
    }
    default: {
      auto x = phi_preimage(param, y[0]);
      if (!x) return std::nullopt;
      return std::vector<long>{*x};
    }
  }
}

}  // namespace detail

inline std::size_t env_vertex_cap(std::size_t fallback) {
  if (char const* s = std::getenv("COARSEBUNDLE_VERTEX_CAP")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(s, &end, 10);
    if (end != s && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return fallback;
}

// The total space restricted to the windows. Adjacency is generated on demand.
class TotalSpaceBall {
 public:
  enum class StepKind { Fiber, Glue, GlueBack };
  struct Neighbor {
    std::size_t index;
    StepKind kind;
    std::size_t base_edge;  // for Glue steps: index into base_edges()
  };
  struct BaseEdge {
    std::vector<long> from, to;
    std::size_t map;  // index into the compiled maps
    long param;
  };

  TotalSpaceBall(GluingSpec spec, Windows w, TotalPoint origin, std::size_t cap)
      : spec_(std::move(spec)), win_(std::move(w)) {
    std::size_t n = spec_.fiber_dim;
    if (n == 0) throw InvalidArgument("fiber dimension must be positive");
    if (win_.fiber.size() != n) throw RankMismatch("fiber window");
    std::size_t base_coords = spec_.base == GluingSpec::Base::Line ? 1 : spec_.base == GluingSpec::Base::Grid ? 2 : 0;
    if (spec_.base == GluingSpec::Base::Graph) {
      if (spec_.graph_vertices == 0) throw InvalidArgument("base graph has no vertices");
      win_.base = {Interval{0, static_cast<long>(spec_.graph_vertices) - 1}};
      for (auto const& e : spec_.graph_edges) {
        if (e.from >= spec_.graph_vertices || e.to >= spec_.graph_vertices) throw IndexOutOfRange("base edge");
        compiled_.push_back(detail::compile(e.map, n));
      }
    } else {
      if (win_.base.size() != base_coords) throw RankMismatch("base window");
      if (spec_.maps.size() < base_coords) throw InvalidArgument("gluing spec needs one map per base direction");
      for (std::size_t k = 0; k < base_coords; ++k) compiled_.push_back(detail::compile(spec_.maps[k], n));
      for (std::size_t k = 0; k < base_coords; ++k)
        if (spec_.base == GluingSpec::Base::Grid && spec_.maps[k].kind == FiberMap::Kind::PhiFamily)
          throw InvalidArgument("the phi family needs a line base");
    }
    for (auto const& iv : win_.base)
      if (iv.hi < iv.lo) throw InvalidArgument("empty base window");
    for (auto const& iv : win_.fiber)
      if (iv.hi < iv.lo) throw InvalidArgument("empty fiber window");
    long double total = 1;
    for (auto const& iv : win_.fiber) total *= static_cast<long double>(iv.size());
    for (auto const& iv : win_.base) total *= static_cast<long double>(iv.size());
    if (total > static_cast<long double>(cap)) throw WindowTooLarge(std::to_string(cap));
    count_ = static_cast<std::size_t>(total);
    fiber_volume_ = 1;
    for (auto const& iv : win_.fiber) fiber_volume_ *= iv.size();
    for (std::size_t k = 0; k < compiled_.size(); ++k)
      if (compiled_[k].kind == FiberMap::Kind::Tabulated) check_tabulated(compiled_[k]);
    if (!contains(origin)) throw InvalidArgument("origin lies outside the windows");
    origin_ = index(origin);
  }

  GluingSpec const& spec() const { return spec_; }
  Windows const& windows() const { return win_; }
  std::size_t vertex_count() const { return count_; }
  std::size_t origin() const { return origin_; }

  bool contains(TotalPoint const& p) const {
    if (p.fiber.size() != win_.fiber.size() || p.base.size() != win_.base.size()) return false;
    for (std::size_t i = 0; i < p.fiber.size(); ++i)
      if (!win_.fiber[i].contains(p.fiber[i])) return false;
    for (std::size_t i = 0; i < p.base.size(); ++i)
      if (!win_.base[i].contains(p.base[i])) return false;
    return true;
  }

  std::size_t index(TotalPoint const& p) const {
    std::size_t b = 0;
    for (std::size_t i = p.base.size(); i-- > 0;)
      b = b * win_.base[i].size() + static_cast<std::size_t>(p.base[i] - win_.base[i].lo);
    std::size_t f = 0;
    for (std::size_t i = p.fiber.size(); i-- > 0;)
      f = f * win_.fiber[i].size() + static_cast<std::size_t>(p.fiber[i] - win_.fiber[i].lo);
    return b * fiber_volume_ + f;
  }

  TotalPoint point(std::size_t idx) const {
    TotalPoint p;
    std::size_t f = idx % fiber_volume_, b = idx / fiber_volume_;
    for (auto const& iv : win_.fiber) {
      p.fiber.push_back(iv.lo + static_cast<long>(f % iv.size()));
      f /= iv.size();
    }
    for (auto const& iv : win_.base) {
      p.base.push_back(iv.lo + static_cast<long>(b % iv.size()));
      b /= iv.size();
    }
    return p;
  }

  // Base edges leaving (out) or entering (in) a base vertex, in the infinite base.
  void base_edges(std::vector<long> const& b, std::vector<BaseEdge>& out, std::vector<BaseEdge>& in) const {
    out.clear();
    in.clear();
    switch (spec_.base) {
      case GluingSpec::Base::Line:
        out.push_back({b, {b[0] + 1}, 0, b[0]});
        in.push_back({{b[0] - 1}, b, 0, b[0] - 1});
        break;
      case GluingSpec::Base::Grid:
        for (std::size_t k = 0; k < 2; ++k) {
          std::vector<long> up = b, down = b;
          ++up[k];
          --down[k];
          out.push_back({b, up, k, b[k]});
          in.push_back({down, b, k, down[k]});
        }
        break;
      case GluingSpec::Base::Graph:
        for (std::size_t e = 0; e < spec_.graph_edges.size(); ++e) {
          auto const& ge = spec_.graph_edges[e];
          long from = static_cast<long>(ge.from), to = static_cast<long>(ge.to);
          if (from == b[0]) out.push_back({{from}, {to}, e, from});
          if (to == b[0]) in.push_back({{from}, {to}, e, from});
        }
        break;
    }
  }

  // In-window neighbours; returns false if some neighbour of the full space lies outside.
  bool neighbors(std::size_t idx, std::vector<Neighbor>& result) const {
    result.clear();
    bool complete = true;
    TotalPoint p = point(idx);
    for (std::size_t i = 0; i < p.fiber.size(); ++i)
      for (long d : {1L, -1L}) {
        TotalPoint q = p;
        q.fiber[i] += d;
        if (contains(q))
          result.push_back({index(q), StepKind::Fiber, 0});
        else
          complete = false;
      }
    thread_local std::vector<BaseEdge> out, in;
    base_edges(p.base, out, in);
    for (std::size_t k = 0; k < out.size(); ++k) {
      auto y = detail::apply(compiled_[out[k].map], out[k].param, p.fiber);
      if (!y) continue;
      TotalPoint q{*y, out[k].to};
      if (contains(q))
        result.push_back({index(q), StepKind::Glue, out[k].map});
      else
        complete = false;
    }
    for (std::size_t k = 0; k < in.size(); ++k) {
      auto x = detail::preimage(compiled_[in[k].map], in[k].param, p.fiber);
      if (!x) continue;
      TotalPoint q{*x, in[k].from};
      if (contains(q))
        result.push_back({index(q), StepKind::GlueBack, in[k].map});
      else
        complete = false;
    }
    return complete;
  }

  bool is_boundary(std::size_t idx) const {
    thread_local std::vector<Neighbor> scratch;
    return !neighbors(idx, scratch);
  }

  // Applies the map of a glue step, for edge verification.
  std::optional<std::vector<long>> glue_image(std::size_t map, long param, std::vector<long> const& x) const {
    return detail::apply(compiled_[map], param, x);
  }

 private:
  void check_tabulated(detail::CompiledMap const& c) const {
    auto const& iv = win_.fiber[0];
    for (long x = iv.lo; x <= iv.hi; ++x) {
      if (!c.fwd.count(x)) throw NonBijectiveTabulated("undefined at " + std::to_string(x));
      if (!c.back.count(x)) throw NonBijectiveTabulated("no preimage for " + std::to_string(x));
    }
  }

  GluingSpec spec_;
  Windows win_;
  std::vector<detail::CompiledMap> compiled_;
  std::size_t count_ = 0, fiber_volume_ = 1, origin_ = 0;
};

inline TotalSpaceBall build_total_space(GluingSpec const& spec, Windows const& w, TotalPoint const& origin,
                                        std::size_t cap = default_window_cap) {
  return TotalSpaceBall(spec, w, origin, cap);
}

struct GrowthSeries {
  std::vector<std::size_t> counts;  // |B(r)| for r = 0..rmax
  std::vector<bool> clipped;        // r touched the window boundary
};

// Cumulative ball sizes by BFS. Radius r is clipped when a vertex at distance
// at most r - 1 lies on the window boundary.
inline GrowthSeries ball_growth(TotalSpaceBall const& ball, std::size_t rmax,
                                std::size_t cap = env_vertex_cap(default_growth_cap)) {
  if (ball.is_boundary(ball.origin())) throw InvalidArgument("origin lies on the window boundary");
  GrowthSeries s;
  std::unordered_map<std::size_t, std::uint32_t> dist;
  std::vector<std::size_t> frontier{ball.origin()}, next;
  dist.emplace(ball.origin(), 0);
  std::size_t total = 1;
  bool touched = false;
  std::vector<TotalSpaceBall::Neighbor> nb;
  s.counts.push_back(1);
  s.clipped.push_back(false);
  for (std::size_t r = 1; r <= rmax; ++r) {
    next.clear();
    for (std::size_t v : frontier) {
      if (!ball.neighbors(v, nb)) touched = true;
      for (auto const& w : nb)
        if (dist.emplace(w.index, static_cast<std::uint32_t>(r)).second) next.push_back(w.index);
    }
    if (dist.size() > cap) throw BallTooLarge(std::to_string(cap));
    total += next.size();
    s.counts.push_back(total);
    s.clipped.push_back(touched);
    frontier.swap(next);
  }
  return s;
}

inline std::string growth_csv(GrowthSeries const& s) {
  std::string out = "r,count,clipped\n";
  for (std::size_t r = 0; r < s.counts.size(); ++r)
    out += std::to_string(r) + "," + std::to_string(s.counts[r]) + "," + (s.clipped[r] ? "1" : "0") + "\n";
  return out;
}

struct GrowthClass {
  enum class Kind { Polynomial, Exponential, Undetermined } kind = Kind::Undetermined;
  double degree = 0;  // slope of log|B| against log r
  double rate = 0;    // slope of log|B| against r
  double r2_polynomial = 0, r2_exponential = 0;
  std::size_t radii = 0;
};

inline std::string to_string(GrowthClass::Kind k) {
  switch (k) {
    case GrowthClass::Kind::Polynomial: return "Polynomial";
    case GrowthClass::Kind::Exponential: return "Exponential";
    default: return "Undetermined";
  }
}

inline constexpr double growth_r2_margin = 0.02;
inline constexpr std::size_t growth_min_radii = 8;

namespace detail {

struct LineFit {
  double slope, r2;
};

inline LineFit fit_line(std::vector<double> const& x, std::vector<double> const& y) {
  double n = static_cast<double>(x.size()), mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  double slope = sxx > 0 ? sxy / sxx : 0;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double e = y[i] - (my + slope * (x[i] - mx));
    ss_res += e * e;
  }
  double r2 = syy > 0 ? 1 - ss_res / syy : (ss_res <= 1e-24 ? 1.0 : 0.0);
  return {slope, r2};
}

}  // namespace detail

// Least squares on the valid radii r >= 1.
inline GrowthClass growth_class(GrowthSeries const& s) {
  std::vector<double> r, logr, logc;
  for (std::size_t k = 1; k < s.counts.size(); ++k) {
    if (k < s.clipped.size() && s.clipped[k]) continue;
    if (s.counts[k] == 0) continue;
    r.push_back(static_cast<double>(k));
    logr.push_back(std::log(static_cast<double>(k)));
    logc.push_back(std::log(static_cast<double>(s.counts[k])));
  }
  if (r.size() < growth_min_radii) throw TooFewRadii(std::to_string(r.size()) + " valid");
  GrowthClass g;
  g.radii = r.size();
  auto poly = detail::fit_line(logr, logc), expo = detail::fit_line(r, logc);
  g.degree = poly.slope;
  g.rate = expo.slope;
  g.r2_polynomial = poly.r2;
  g.r2_exponential = expo.r2;
  bool constant = std::all_of(logc.begin(), logc.end(), [&](double v) { return v == logc.front(); });
  if (constant)
    g.kind = GrowthClass::Kind::Polynomial;
  else if (poly.r2 >= expo.r2 + growth_r2_margin)
    g.kind = GrowthClass::Kind::Polynomial;
  else if (expo.r2 >= poly.r2 + growth_r2_margin)
    g.kind = GrowthClass::Kind::Exponential;
  return g;
}

inline GrowthClass growth_class(std::vector<std::size_t> const& counts) {
  return growth_class(GrowthSeries{counts, std::vector<bool>(counts.size(), false)});
}

}  // namespace coarsebundle
