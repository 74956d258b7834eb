#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "matrix.hpp"

namespace coarsebundle {

struct GogEdge {
  std::string id;
  std::string iota;
  std::string tau;
  IntMatrix incl_iota;
  IntMatrix incl_tau;
};

// Graph of Z^n groups. Every vertex and edge group is Z^n; the inclusions
// are given by integer matrices of nonzero determinant.
struct GraphOfGroups {
  std::size_t rank = 1;
  std::vector<std::string> vertices;
  std::vector<GogEdge> edges;

  std::size_t vertex_index(std::string const& id) const {
    auto it = std::find(vertices.begin(), vertices.end(), id);
    if (it == vertices.end()) throw IndexOutOfRange("vertex '" + id + "'");
    return static_cast<std::size_t>(it - vertices.begin());
  }

  std::size_t edge_index(std::string const& id) const {
    for (std::size_t k = 0; k < edges.size(); ++k)
      if (edges[k].id == id) return k;
    throw IndexOutOfRange("edge '" + id + "'");
  }

  std::size_t iota(std::size_t e) const { return vertex_index(edges[e].iota); }
  std::size_t tau(std::size_t e) const { return vertex_index(edges[e].tau); }

  friend bool operator==(GraphOfGroups const& x, GraphOfGroups const& y) {
    if (x.rank != y.rank || x.vertices != y.vertices || x.edges.size() != y.edges.size())
      return false;
    for (std::size_t k = 0; k < x.edges.size(); ++k) {
      auto const &a = x.edges[k], &b = y.edges[k];
      if (a.id != b.id || a.iota != b.iota || a.tau != b.tau || !(a.incl_iota == b.incl_iota) ||
          !(a.incl_tau == b.incl_tau))
        return false;
    }
    return true;
  }
};

enum class Direction { Forward, Backward };

inline Direction reverse(Direction d) {
  return d == Direction::Forward ? Direction::Backward : Direction::Forward;
}

// A step of a walk: cross edge `edge` from iota to tau (Forward) or back.
struct Step {
  std::size_t edge;
  Direction dir;
  friend bool operator==(Step const&, Step const&) = default;
};

inline void validate(GraphOfGroups const& g) {
  if (g.rank == 0) throw RankMismatch("rank must be positive");
  if (g.vertices.empty()) throw Disconnected("no vertices");
  std::vector<std::string> sorted = g.vertices;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidArgument("duplicate vertex id");
  std::vector<std::string> edge_ids;
  for (auto const& e : g.edges) edge_ids.push_back(e.id);
  std::sort(edge_ids.begin(), edge_ids.end());
  if (std::adjacent_find(edge_ids.begin(), edge_ids.end()) != edge_ids.end())
    throw InvalidArgument("duplicate edge id");

  std::vector<std::size_t> parent(g.vertices.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    auto const& e = g.edges[k];
    std::size_t a = g.iota(k), b = g.tau(k);
    if (e.incl_iota.size() != g.rank || e.incl_tau.size() != g.rank) throw RankMismatch(e.id);
    if (determinant(e.incl_iota) == 0 || determinant(e.incl_tau) == 0)
      throw SingularInclusion(e.id);
    parent[find(a)] = find(b);
  }
  for (std::size_t v = 0; v < g.vertices.size(); ++v)
    if (find(v) != find(0)) throw Disconnected("vertex '" + g.vertices[v] + "'");
}

// BS(m,n) = <a, b | a^-1 b^m a = b^n>.
inline GraphOfGroups bs(long m, long n) {
  if (m == 0 || n == 0) throw ZeroParameter("BS parameters");
  GraphOfGroups g;
  g.rank = 1;
  g.vertices = {"v"};
  g.edges.push_back({"a", "v", "v", IntMatrix{{Integer(m)}}, IntMatrix{{Integer(n)}}});
  return g;
}

// Z^n semidirect the free group on the given automorphisms.
inline GraphOfGroups semidirect(std::size_t n, std::vector<IntMatrix> const& gens) {
  GraphOfGroups g;
  g.rank = n;
  g.vertices = {"v"};
  for (std::size_t k = 0; k < gens.size(); ++k) {
    if (gens[k].size() != n) throw RankMismatch("generator " + std::to_string(k));
    if (!is_unimodular(gens[k])) throw NotUnimodular("generator " + std::to_string(k));
    g.edges.push_back({"a" + std::to_string(k), "v", "v", IntMatrix::identity(n), gens[k]});
  }
  return g;
}

// Fiber identification when crossing edge e from its iota end to its tau end.
inline RatMatrix crossing(GraphOfGroups const& g, std::size_t e) {
  return to_rational(g.edges[e].incl_tau) * inverse(g.edges[e].incl_iota);
}

inline RatMatrix crossing(GraphOfGroups const& g, Step s) {
  RatMatrix c = crossing(g, s.edge);
  return s.dir == Direction::Forward ? c : inverse(c);
}

inline std::size_t step_source(GraphOfGroups const& g, Step s) {
  return s.dir == Direction::Forward ? g.iota(s.edge) : g.tau(s.edge);
}

inline std::size_t step_target(GraphOfGroups const& g, Step s) {
  return s.dir == Direction::Forward ? g.tau(s.edge) : g.iota(s.edge);
}

// Holonomy along a walk, composed as transport maps: the last step acts last.
inline RatMatrix walk_holonomy(GraphOfGroups const& g, std::size_t start,
                               std::vector<Step> const& walk) {
  RatMatrix h = RatMatrix::identity(g.rank);
  std::size_t at = start;
  for (auto const& s : walk) {
    if (step_source(g, s) != at) throw InvalidArgument("walk is not connected");
    h = crossing(g, s) * h;
    at = step_target(g, s);
  }
  return h;
}

struct FreeGenerator {
  std::size_t edge;
  RatMatrix matrix;
};

struct HolonomyRep {
  GraphOfGroups gog;
  std::size_t basepoint = 0;
  std::vector<std::size_t> spanning_tree;  // edge indices
  std::vector<FreeGenerator> free_gens;
  std::vector<RatMatrix> tree_transport;   // per vertex index
  std::vector<std::vector<Step>> tree_path;  // basepoint -> vertex

  std::vector<RatMatrix> generator_matrices() const {
    std::vector<RatMatrix> r;
    for (auto const& f : free_gens) r.push_back(f.matrix);
    return r;
  }

  // Closed walk at the basepoint whose holonomy is free generator k.
  std::vector<Step> generator_walk(std::size_t k) const {
    std::size_t e = free_gens[k].edge;
    std::vector<Step> w = tree_path[gog.iota(e)];
    w.push_back({e, Direction::Forward});
    auto back = tree_path[gog.tau(e)];
    for (auto it = back.rbegin(); it != back.rend(); ++it) w.push_back({it->edge, reverse(it->dir)});
    return w;
  }
};

namespace detail {

inline std::vector<std::size_t> edges_by_id(GraphOfGroups const& g) {
  std::vector<std::size_t> order(g.edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return g.edges[a].id < g.edges[b].id; });
  return order;
}

}  // namespace detail

inline HolonomyRep modular_holonomy(GraphOfGroups const& g, std::size_t basepoint = 0) {
  validate(g);
  if (basepoint >= g.vertices.size()) throw IndexOutOfRange("basepoint");
  HolonomyRep rep;
  rep.gog = g;
  rep.basepoint = basepoint;
  std::size_t const nv = g.vertices.size();
  rep.tree_transport.assign(nv, RatMatrix());
  rep.tree_path.assign(nv, {});
  std::vector<bool> seen(nv, false), in_tree(g.edges.size(), false);
  auto order = detail::edges_by_id(g);
  std::deque<std::size_t> queue{basepoint};
  seen[basepoint] = true;
  rep.tree_transport[basepoint] = RatMatrix::identity(g.rank);
  while (!queue.empty()) {
    std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t e : order) {
      std::size_t a = g.iota(e), b = g.tau(e);
      if (a == b) continue;
      Step s;
      if (a == u && !seen[b]) {
        s = {e, Direction::Forward};
      } else if (b == u && !seen[a]) {
        s = {e, Direction::Backward};
      } else {
        continue;
      }
      std::size_t v = step_target(g, s);
      seen[v] = true;
      in_tree[e] = true;
      rep.spanning_tree.push_back(e);
      rep.tree_transport[v] = crossing(g, s) * rep.tree_transport[u];
      rep.tree_path[v] = rep.tree_path[u];
      rep.tree_path[v].push_back(s);
      queue.push_back(v);
    }
  }
  for (std::size_t e : order) {
    if (in_tree[e]) continue;
    RatMatrix m = inverse(rep.tree_transport[g.tau(e)]) * crossing(g, e) *
                  rep.tree_transport[g.iota(e)];
    rep.free_gens.push_back({e, m});
  }
  return rep;
}

inline HolonomyRep modular_holonomy(GraphOfGroups const& g, std::string const& basepoint) {
  return modular_holonomy(g, g.vertex_index(basepoint));
}

struct CollapseResult {
  GraphOfGroups graph;
  std::string collapsed_edge;
  std::string removed_vertex;
  std::string survivor;
  // Maps fiber coordinates at the removed vertex to those at the survivor.
  RatMatrix change_of_basis;
};

inline CollapseResult collapse_edge_with_basis(GraphOfGroups const& g, std::size_t e) {
  auto const& edge = g.edges[e];
  if (edge.iota == edge.tau) throw LoopEdge(edge.id);
  std::string removed, survivor;
  IntMatrix phi;
  if (is_unimodular(edge.incl_iota)) {
    removed = edge.iota;
    survivor = edge.tau;
    phi = to_integer(to_rational(edge.incl_tau) * inverse(edge.incl_iota));
  } else if (is_unimodular(edge.incl_tau)) {
    removed = edge.tau;
    survivor = edge.iota;
    phi = to_integer(to_rational(edge.incl_iota) * inverse(edge.incl_tau));
  } else {
    throw NoUnimodularEnd(edge.id);
  }
  CollapseResult out;
  out.collapsed_edge = edge.id;
  out.removed_vertex = removed;
  out.survivor = survivor;
  out.change_of_basis = to_rational(phi);
  out.graph.rank = g.rank;
  for (auto const& v : g.vertices)
    if (v != removed) out.graph.vertices.push_back(v);
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    if (k == e) continue;
    GogEdge f = g.edges[k];
    if (f.iota == removed) {
      f.iota = survivor;
      f.incl_iota = phi * f.incl_iota;
    }
    if (f.tau == removed) {
      f.tau = survivor;
      f.incl_tau = phi * f.incl_tau;
    }
    out.graph.edges.push_back(std::move(f));
  }
  return out;
}

inline CollapseResult collapse_edge_with_basis(GraphOfGroups const& g, std::string const& id) {
  return collapse_edge_with_basis(g, g.edge_index(id));
}

inline GraphOfGroups collapse_edge(GraphOfGroups const& g, std::string const& id) {
  return collapse_edge_with_basis(g, id).graph;
}

struct Reduction {
  GraphOfGroups graph;
  std::vector<CollapseResult> history;
};

// Collapses the first (in edge order) non-loop edge with a unimodular end
// until none is left.
inline Reduction reduce_with_history(GraphOfGroups const& g) {
  validate(g);
  Reduction r{g, {}};
  for (;;) {
    std::optional<std::size_t> pick;
    for (std::size_t k = 0; k < r.graph.edges.size() && !pick; ++k) {
      auto const& e = r.graph.edges[k];
      if (e.iota != e.tau && (is_unimodular(e.incl_iota) || is_unimodular(e.incl_tau))) pick = k;
    }
    if (!pick) return r;
    r.history.push_back(collapse_edge_with_basis(r.graph, *pick));
    r.graph = r.history.back().graph;
  }
}

inline GraphOfGroups reduce(GraphOfGroups const& g) { return reduce_with_history(g).graph; }

struct AscendingHnnForm {
  IntMatrix endomorphism;
  bool strict = false;  // |det| > 1
};

inline std::optional<AscendingHnnForm> detect_ascending_hnn(GraphOfGroups const& g) {
  GraphOfGroups r = reduce(g);
  if (r.vertices.size() != 1 || r.edges.size() != 1) return std::nullopt;
  auto const& e = r.edges.front();
  IntMatrix endo;
  if (is_unimodular(e.incl_iota)) {
    endo = to_integer(to_rational(e.incl_tau) * inverse(e.incl_iota));
  } else if (is_unimodular(e.incl_tau)) {
    endo = to_integer(to_rational(e.incl_iota) * inverse(e.incl_tau));
  } else {
    return std::nullopt;
  }
  bool strict = abs(determinant(endo)) > 1;
  return AscendingHnnForm{endo, strict};
}

inline std::size_t betti_number(GraphOfGroups const& g) {
  return g.edges.size() + 1 - g.vertices.size();
}

}  // namespace coarsebundle
