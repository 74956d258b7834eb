#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bass_serre.hpp"
#include "graph_of_groups.hpp"
#include "subgroup_analysis.hpp"

namespace coarsebundle {

enum class TrichotomyKind { Proper, Parabolic, Folded, Undetermined };

inline std::string to_string(TrichotomyKind k) {
  switch (k) {
    case TrichotomyKind::Proper: return "Proper";
    case TrichotomyKind::Parabolic: return "Parabolic";
    case TrichotomyKind::Folded: return "Folded";
    case TrichotomyKind::Undetermined: return "Undetermined";
  }
  return "?";
}

struct FiniteImage {
  bool decided = false;
  bool finite = false;
  std::size_t order = 0;  // when finite
};

// Coverage of the ball around an edge's iota end by each of its halfspaces.
struct EdgeCoverage {
  std::string edge;
  CoverageReport iota_side, tau_side;
  bool sampled = true;  // false when the comparison budget was exceeded
  bool iota_covered() const { return iota_side.covered_fraction >= 1.0; }
  bool tau_covered() const { return tau_side.covered_fraction >= 1.0; }
};

struct TrichotomyEvidence {
  int depth = 0;
  double R = 0;
  FiniteImage finite_image;
  std::optional<AscendingHnnForm> ascending;
  bool unimodular_inclusions = false;
  std::optional<FreenessCertificate> freeness;
  std::vector<EdgeCoverage> coverage;
  std::string holonomy_class;
  std::string rule;  // "a".."d", or empty when nothing decided

  // Kinds backed by an exact certificate.
  std::vector<TrichotomyKind> certified() const {
    std::vector<TrichotomyKind> out;
    if (finite_image.decided && finite_image.finite) out.push_back(TrichotomyKind::Folded);
    if (ascending && ascending->strict) out.push_back(TrichotomyKind::Parabolic);
    if (freeness && unimodular_inclusions &&
        (freeness->kind == FreenessCertificate::Kind::PingPong ||
         freeness->kind == FreenessCertificate::Kind::InfiniteOrder))
      out.push_back(TrichotomyKind::Proper);
    return out;
  }
};

struct TrichotomyVerdict {
  TrichotomyKind kind = TrichotomyKind::Undetermined;
  std::optional<AscendingHnnForm> form;  // Parabolic
  TrichotomyEvidence evidence;
  std::string reason;
};

inline constexpr int default_trichotomy_depth = 6;
// Label comparisons allowed per sampled edge.
inline constexpr std::size_t coverage_budget = 20'000'000;

namespace detail {

// Largest finite subgroup of GL(n,Q), n <= 6.
inline std::size_t minkowski_bound(std::size_t n) {
  static std::size_t const table[] = {1, 2, 12, 48, 1152, 3840, 103680};
  return n <= 6 ? table[n] : 0;
}

inline FiniteImage finite_image(std::vector<RatMatrix> const& gens, std::size_t n) {
  FiniteImage out;
  if (std::all_of(gens.begin(), gens.end(), [](RatMatrix const& g) { return g.is_identity(); })) {
    out = {true, true, 1};
    return out;
  }
  long const l = torsion_exponent(n);
  for (auto const& g : gens)
    if (abs(determinant(g)) != 1 || !power(g, l).is_identity()) {
      out.decided = true;
      return out;
    }
  std::size_t const bound = minkowski_bound(n);
  std::size_t const cap = bound ? bound : 200000;
  std::set<RatMatrix> group{RatMatrix::identity(n)};
  std::vector<RatMatrix> frontier{RatMatrix::identity(n)};
  while (!frontier.empty()) {
    std::vector<RatMatrix> next;
    for (auto const& x : frontier)
      for (auto const& g : gens) {
        RatMatrix y = x * g;
        if (!group.insert(y).second) continue;
        if (group.size() > cap) {
          out.decided = bound != 0;
          return out;
        }
        next.push_back(std::move(y));
      }
    frontier = std::move(next);
  }
  out = {true, true, group.size()};
  return out;
}

inline double default_radius(GraphOfGroups const& g, HolonomyRep const& rep) {
  RatMatrix id = RatMatrix::identity(g.rank);
  double r = 0;
  for (std::size_t e = 0; e < g.edges.size(); ++e) r = std::max(r, gl_distance(id, crossing(g, e)));
  for (auto const& m : rep.generator_matrices()) r = std::max(r, gl_distance(id, m));
  return r;
}

inline EdgeCoverage edge_coverage(GraphOfGroups const& g, std::size_t e, int depth, double R) {
  RatMatrix id = RatMatrix::identity(g.rank);
  std::map<RatMatrix, std::size_t> targets;
  for (auto const& l : label_profile(g, g.iota(e), id, std::nullopt, depth)) targets[l] = 1;
  auto root_side = label_profile(g, g.iota(e), id, Step{e, Direction::Backward}, 2 * depth);
  auto child_side =
      label_profile(g, g.tau(e), crossing(g, e), Step{e, Direction::Forward}, 2 * depth - 1);
  EdgeCoverage out;
  out.edge = g.edges[e].id;
  if (targets.size() * (root_side.size() + child_side.size()) > coverage_budget) {
    out.sampled = false;
    return out;
  }
  out.iota_side = coverage(targets, root_side, R, depth);
  out.tau_side = coverage(targets, child_side, R, depth);
  return out;
}

inline std::string holonomy_class_name(GraphOfGroups const& g, std::vector<RatMatrix> const& gens) {
  if (g.rank == 1) {
    std::vector<Rational> v;
    for (auto const& m : gens) v.push_back(m(0, 0));
    Gl1Class c = hausdorff_class_gl1(v.empty() ? std::vector<Rational>{1} : v);
    if (c.kind == Gl1Class::Kind::Discrete) return "Discrete(" + coarsebundle::to_string(c.generator) + ")";
    return coarsebundle::to_string(c.kind);
  }
  if (g.rank == 2) {
    HausdorffClass c = hausdorff_class(gens.empty() ? Gl2Subgroup{RatMatrix::identity(2)} : gens);
    return coarsebundle::to_string(c.sl2);
  }
  return "";
}

}  // namespace detail

// R < 0 selects the default radius.
inline TrichotomyVerdict classify(GraphOfGroups const& g, int depth = default_trichotomy_depth,
                                  double R = -1) {
  validate(g);
  if (depth < 1) throw InvalidArgument("depth must be positive");
  HolonomyRep rep = modular_holonomy(g);
  auto gens = rep.generator_matrices();
  TrichotomyVerdict v;
  auto& ev = v.evidence;
  ev.depth = depth;
  ev.R = R < 0 ? detail::default_radius(g, rep) : R;

  // (a) finite image, (b) strict ascending HNN, (c) free discrete image.
  ev.finite_image = detail::finite_image(gens, g.rank);
  ev.ascending = detect_ascending_hnn(g);
  ev.unimodular_inclusions = std::all_of(g.edges.begin(), g.edges.end(), [](GogEdge const& e) {
    return is_unimodular(e.incl_iota) && is_unimodular(e.incl_tau);
  });
  if (!gens.empty() && !(ev.finite_image.decided && ev.finite_image.finite))
    ev.freeness = free_injectivity(gens, 8);
  if (g.rank <= 2) {
    try {
      ev.holonomy_class = detail::holonomy_class_name(g, gens);
    } catch (Error const&) {
    }
  }

  if (ev.finite_image.decided && ev.finite_image.finite) {
    v.kind = TrichotomyKind::Folded;
    ev.rule = "a";
    v.reason = "finite holonomy image of order " + std::to_string(ev.finite_image.order);
    return v;
  }
  if (ev.ascending && ev.ascending->strict) {
    v.kind = TrichotomyKind::Parabolic;
    v.form = ev.ascending;
    ev.rule = "b";
    v.reason = "strict ascending HNN extension";
    return v;
  }
  auto certified = ev.certified();
  if (std::find(certified.begin(), certified.end(), TrichotomyKind::Proper) != certified.end()) {
    v.kind = TrichotomyKind::Proper;
    ev.rule = "c";
    v.reason = "free discrete holonomy image (" + to_string(ev.freeness->kind) + ")";
    return v;
  }

  // (d) finite-depth halfspace evidence, one sample per graph edge.
  bool all_both = true, all_one = true, some_neither = false, skipped = false;
  for (std::size_t e : detail::edges_by_id(g)) {
    ev.coverage.push_back(detail::edge_coverage(g, e, depth, ev.R));
    auto const& c = ev.coverage.back();
    if (!c.sampled) {
      skipped = true;
      continue;
    }
    int sides = (c.iota_covered() ? 1 : 0) + (c.tau_covered() ? 1 : 0);
    all_both = all_both && sides == 2;
    all_one = all_one && sides == 1;
    some_neither = some_neither || sides == 0;
  }
  ev.rule = "d";
  bool relation = ev.freeness && ev.freeness->kind == FreenessCertificate::Kind::RelationFound;
  if (g.edges.empty()) {
    v.reason = "no edges to sample";
  } else if (skipped) {
    v.reason = "coverage comparison budget exceeded";
  } else if (all_both) {
    v.kind = TrichotomyKind::Folded;
    v.reason = "both halfspaces carry the holonomy on every sampled edge";
  } else if (all_one) {
    v.reason = "one-sided coverage without a strict ascending HNN form";
  } else if (some_neither && ev.unimodular_inclusions && !relation) {
    v.kind = TrichotomyKind::Proper;
    v.reason = "no halfspace carries the holonomy on some sampled edge";
  } else {
    v.reason = some_neither ? "uncovered halfspaces with non-free or non-integral holonomy"
                            : "conflicting coverage across edges";
  }
  return v;
}

struct QiComparison {
  enum class Kind { SameQiClass, DifferentQiClass, Undetermined } kind = Kind::Undetermined;
  std::string reason;
  TrichotomyVerdict first, second;
  std::vector<IntMatrix> endomorphisms;  // both Parabolic
};

inline std::string to_string(QiComparison::Kind k) {
  switch (k) {
    case QiComparison::Kind::SameQiClass: return "SameQiClass";
    case QiComparison::Kind::DifferentQiClass: return "DifferentQiClass";
    case QiComparison::Kind::Undetermined: return "Undetermined";
  }
  return "?";
}

inline QiComparison qi_compare(GraphOfGroups const& g1, GraphOfGroups const& g2,
                               int depth = default_trichotomy_depth, double R = -1) {
  using K = QiComparison::Kind;
  QiComparison out;
  out.first = classify(g1, depth, R);
  out.second = classify(g2, depth, R);
  auto k1 = out.first.kind, k2 = out.second.kind;
  if (g1.rank != g2.rank) {
    out.kind = K::DifferentQiClass;
    out.reason = "rank";
    return out;
  }
  if (k1 == TrichotomyKind::Undetermined || k2 == TrichotomyKind::Undetermined) {
    out.reason = "trichotomy undetermined";
    return out;
  }
  if (k1 == TrichotomyKind::Parabolic && k2 == TrichotomyKind::Parabolic) {
    out.endomorphisms = {out.first.form->endomorphism, out.second.form->endomorphism};
    out.reason = "both parabolic; ascending HNN classification not attempted";
    return out;
  }
  if (k1 != k2) {
    out.kind = K::DifferentQiClass;
    out.reason = "trichotomy kind";
    return out;
  }
  if (g1.rank > 2) throw RankUnsupported(std::to_string(g1.rank));
  auto gens1 = modular_holonomy(g1).generator_matrices();
  auto gens2 = modular_holonomy(g2).generator_matrices();
  Equivalence::Kind eq;
  if (g1.rank == 1) {
    auto values = [](std::vector<RatMatrix> const& gs) {
      std::vector<Rational> v{1};
      for (auto const& m : gs) v.push_back(m(0, 0));
      return v;
    };
    eq = hausdorff_class_gl1(values(gens1)) == hausdorff_class_gl1(values(gens2))
             ? Equivalence::Kind::Equivalent
             : Equivalence::Kind::NotEquivalent;
  } else {
    auto nonempty = [](Gl2Subgroup gs) {
      if (gs.empty()) gs.push_back(RatMatrix::identity(2));
      return gs;
    };
    eq = hausdorff_equivalent(hausdorff_class(nonempty(gens1)), hausdorff_class(nonempty(gens2))).kind;
  }
  if (eq == Equivalence::Kind::NotEquivalent) {
    out.kind = K::DifferentQiClass;
    out.reason = "Hausdorff class of the holonomy image";
  } else if (eq == Equivalence::Kind::Unknown) {
    out.reason = "Hausdorff classes not decided";
  } else {
    out.kind = K::SameQiClass;
    out.reason = k1 == TrichotomyKind::Folded
                     ? "folded with equivalent holonomy: a single quasi-isometry type"
                     : "proper with equivalent holonomy";
  }
  return out;
}

}  // namespace coarsebundle
