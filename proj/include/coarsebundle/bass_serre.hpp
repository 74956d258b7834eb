#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include "graph_of_groups.hpp"
#include "spectral.hpp"

namespace coarsebundle {

inline constexpr std::size_t default_vertex_cap = 2'000'000;

// Slack on distance comparisons, which are computed in floating point.
inline constexpr double distance_slack = 1e-9;

// Number of tree edges at a vertex of the right type that cross e in
// direction d: the index of the inclusion at the end we leave from.
inline std::size_t coset_count(GraphOfGroups const& g, Step s) {
  auto const& e = g.edges[s.edge];
  Integer idx = lattice_index(s.dir == Direction::Forward ? e.incl_iota : e.incl_tau);
  if (!idx.fits_ulong_p()) throw BallTooLarge("coset index");
  return idx.get_ui();
}

// Steps leaving a vertex of the given type, in deterministic order.
inline std::vector<Step> outgoing_steps(GraphOfGroups const& g, std::size_t type) {
  std::vector<Step> out;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (g.iota(e) == type) out.push_back({e, Direction::Forward});
    if (g.tau(e) == type) out.push_back({e, Direction::Backward});
  }
  return out;
}

struct ViaEdge {
  std::size_t edge;
  Direction dir;
  std::size_t coset;
};

struct TreeVertex {
  std::size_t id;
  std::size_t type;  // vertex index in the graph of groups
  std::optional<std::size_t> parent;
  std::optional<ViaEdge> via;
  RatMatrix label;
  int depth;
};

struct TreeBall {
  GraphOfGroups gog;
  int radius = 0;
  std::vector<TreeVertex> vertices;  // breadth-first order, root first
  std::vector<std::vector<std::size_t>> children;

  TreeVertex const& root() const { return vertices.front(); }
  std::size_t size() const { return vertices.size(); }
};

inline TreeBall build_ball(GraphOfGroups const& g, std::size_t base, int radius,
                           std::size_t cap = default_vertex_cap) {
  validate(g);
  if (radius < 0) throw InvalidArgument("negative radius");
  if (base >= g.vertices.size()) throw IndexOutOfRange("base vertex");
  TreeBall ball;
  ball.gog = g;
  ball.radius = radius;
  std::vector<RatMatrix> cross(g.edges.size()), cross_inv(g.edges.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    cross[e] = crossing(g, e);
    cross_inv[e] = inverse(cross[e]);
  }
  std::vector<std::vector<Step>> steps(g.vertices.size());
  for (std::size_t v = 0; v < g.vertices.size(); ++v) steps[v] = outgoing_steps(g, v);

  ball.vertices.push_back({0, base, std::nullopt, std::nullopt, RatMatrix::identity(g.rank), 0});
  ball.children.emplace_back();
  for (std::size_t k = 0; k < ball.vertices.size(); ++k) {
    TreeVertex const cur = ball.vertices[k];
    if (cur.depth == radius) continue;
    for (Step s : steps[cur.type]) {
      std::size_t count = coset_count(g, s);
      std::size_t first = 0;
      if (cur.via && cur.via->edge == s.edge && cur.via->dir == reverse(s.dir)) first = 1;
      for (std::size_t c = first; c < count; ++c) {
        if (ball.vertices.size() >= cap) throw BallTooLarge(std::to_string(cap));
        std::size_t id = ball.vertices.size();
        RatMatrix const& m = s.dir == Direction::Forward ? cross[s.edge] : cross_inv[s.edge];
        ball.vertices.push_back(
            {id, step_target(g, s), cur.id, ViaEdge{s.edge, s.dir, c}, cur.label * m, cur.depth + 1});
        ball.children.emplace_back();
        ball.children[cur.id].push_back(id);
      }
    }
  }
  return ball;
}

enum class Side { Iota, Tau };

struct Halfspace {
  std::size_t edge;  // tree edge, named by its child endpoint
  Side side;
  std::vector<std::size_t> members;
};

namespace detail {

inline void require_tree_edge(TreeBall const& ball, std::size_t child) {
  if (child == 0 || child >= ball.size()) throw EdgeNotInBall(std::to_string(child));
}

// Whether the parent endpoint of the tree edge lies on the requested side.
inline bool parent_on_side(TreeBall const& ball, std::size_t child, Side side) {
  bool parent_is_iota = ball.vertices[child].via->dir == Direction::Forward;
  return parent_is_iota == (side == Side::Iota);
}

inline std::vector<std::size_t> subtree(TreeBall const& ball, std::size_t top) {
  std::vector<std::size_t> out{top};
  for (std::size_t k = 0; k < out.size(); ++k)
    for (std::size_t c : ball.children[out[k]]) out.push_back(c);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

inline Halfspace halfspace(TreeBall const& ball, std::size_t edge, Side side) {
  detail::require_tree_edge(ball, edge);
  auto below = detail::subtree(ball, edge);
  Halfspace h{edge, side, {}};
  if (!detail::parent_on_side(ball, edge, side)) {
    h.members = std::move(below);
  } else {
    std::vector<bool> in(ball.size(), false);
    for (auto v : below) in[v] = true;
    for (std::size_t v = 0; v < ball.size(); ++v)
      if (!in[v]) h.members.push_back(v);
  }
  return h;
}

struct CoverageReport {
  double radius_R = 0;
  double covered_fraction = 0;
  double worst_gap = 0;
  int depth = 0;
};

namespace detail {

// Covering of target labels by member labels; each distinct target label
// counts with its multiplicity.
inline CoverageReport coverage(std::map<RatMatrix, std::size_t> const& targets,
                               std::set<RatMatrix> const& members, double R, int depth) {
  if (members.empty()) throw EmptyHalfspace();
  CoverageReport rep;
  rep.radius_R = R;
  rep.depth = depth;
  std::size_t total = 0, covered = 0;
  for (auto const& [label, weight] : targets) {
    double best = std::numeric_limits<double>::infinity();
    if (members.count(label)) {
      best = 0;
    } else {
      for (auto const& m : members) {
        best = std::min(best, gl_distance(label, m));
        if (best == 0) break;
      }
    }
    rep.worst_gap = std::max(rep.worst_gap, best);
    total += weight;
    if (best <= R + distance_slack) covered += weight;
  }
  rep.covered_fraction = total ? static_cast<double>(covered) / static_cast<double>(total) : 1.0;
  return rep;
}

}  // namespace detail

// Coverage of the ball's labels (those at depth <= target_depth, all if
// negative) by the halfspace's labels.
inline CoverageReport carries_holonomy(TreeBall const& ball, Halfspace const& h, double R,
                                       int target_depth = -1) {
  if (ball.vertices.empty()) throw InvalidArgument("empty ball");
  std::map<RatMatrix, std::size_t> targets;
  for (auto const& v : ball.vertices)
    if (target_depth < 0 || v.depth <= target_depth) ++targets[v.label];
  std::set<RatMatrix> members;
  for (auto v : h.members) members.insert(ball.vertices[v].label);
  return detail::coverage(targets, members, R, target_depth < 0 ? ball.radius : target_depth);
}

struct LiftRow {
  double u;               // gl_distance from the label at the edge's iota end
  std::optional<int> r;   // least depth into the halfspace reaching within R
};

inline std::vector<LiftRow> directed_lifting_score(TreeBall const& ball, std::size_t edge,
                                                   double R, Side side = Side::Tau,
                                                   int target_depth = -1) {
  detail::require_tree_edge(ball, edge);
  std::size_t parent = *ball.vertices[edge].parent;
  bool parent_iota = detail::parent_on_side(ball, edge, Side::Iota);
  RatMatrix const& iota_label = ball.vertices[parent_iota ? parent : edge].label;
  std::size_t start = detail::parent_on_side(ball, edge, side) ? parent : edge;

  // Distances from `start` inside the halfspace (never crossing the edge).
  std::vector<int> dist(ball.size(), -1);
  std::deque<std::size_t> queue{start};
  dist[start] = 0;
  while (!queue.empty()) {
    std::size_t v = queue.front();
    queue.pop_front();
    std::vector<std::size_t> nbrs = ball.children[v];
    if (ball.vertices[v].parent) nbrs.push_back(*ball.vertices[v].parent);
    for (std::size_t w : nbrs) {
      bool crosses = (v == parent && w == edge) || (v == edge && w == parent);
      if (crosses || dist[w] >= 0) continue;
      dist[w] = dist[v] + 1;
      queue.push_back(w);
    }
  }
  // Closest (by tree distance) member per distinct label.
  std::map<RatMatrix, int> member_depth;
  for (std::size_t v = 0; v < ball.size(); ++v) {
    if (dist[v] < 0) continue;
    auto [it, fresh] = member_depth.emplace(ball.vertices[v].label, dist[v]);
    if (!fresh) it->second = std::min(it->second, dist[v]);
  }
  std::set<RatMatrix> targets;
  for (auto const& v : ball.vertices)
    if (target_depth < 0 || v.depth <= target_depth) targets.insert(v.label);
  std::vector<LiftRow> rows;
  for (auto const& g : targets) {
    LiftRow row{gl_distance(iota_label, g), std::nullopt};
    for (auto const& [label, d] : member_depth)
      if (gl_distance(label, g) <= R + distance_slack && (!row.r || d < *row.r)) row.r = d;
    rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end(), [](LiftRow const& a, LiftRow const& b) {
    return std::tie(a.u, a.r) < std::tie(b.u, b.r);
  });
  return rows;
}

// Labels reachable within `depth` steps from a tree vertex of the given type
// and label, never going back through `arrival` reversed. The tree is
// explored up to the equivalence (type, label, arrival step), which keeps the
// label sets exact while avoiding the exponential number of cosets.
inline std::set<RatMatrix> label_profile(GraphOfGroups const& g, std::size_t type,
                                         RatMatrix const& label, std::optional<Step> arrival,
                                         int depth, std::size_t cap = default_vertex_cap) {
  using State = std::tuple<std::size_t, RatMatrix, long>;  // arrival encoded, -1 none
  auto code = [](std::optional<Step> s) {
    return s ? static_cast<long>(2 * s->edge + (s->dir == Direction::Forward ? 0 : 1)) : -1L;
  };
  std::vector<RatMatrix> cross(g.edges.size()), cross_inv(g.edges.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    cross[e] = crossing(g, e);
    cross_inv[e] = inverse(cross[e]);
  }
  std::vector<std::vector<Step>> steps(g.vertices.size());
  for (std::size_t v = 0; v < g.vertices.size(); ++v) steps[v] = outgoing_steps(g, v);

  std::set<State> seen;
  std::set<RatMatrix> labels{label};
  std::vector<std::pair<State, std::optional<Step>>> frontier{{{type, label, code(arrival)}, arrival}};
  seen.insert(frontier.front().first);
  for (int d = 0; d < depth && !frontier.empty(); ++d) {
    std::vector<std::pair<State, std::optional<Step>>> next;
    for (auto const& [state, arr] : frontier) {
      auto const& [t, lab, c] = state;
      for (Step s : steps[t]) {
        std::size_t count = coset_count(g, s);
        if (arr && arr->edge == s.edge && arr->dir == reverse(s.dir)) --count;
        if (count == 0) continue;
        RatMatrix const& m = s.dir == Direction::Forward ? cross[s.edge] : cross_inv[s.edge];
        State ns{step_target(g, s), lab * m, code(s)};
        if (!seen.insert(ns).second) continue;
        if (seen.size() > cap) throw BallTooLarge(std::to_string(cap));
        labels.insert(std::get<1>(ns));
        next.push_back({std::move(ns), s});
      }
    }
    frontier = std::move(next);
  }
  return labels;
}

}  // namespace coarsebundle
