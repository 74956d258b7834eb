#include <catch_amalgamated.hpp>

#include <coarsebundle/trichotomy.hpp>

#include <cmath>
#include <random>

using namespace coarsebundle;
using Catch::Approx;

namespace {

using TK = TrichotomyKind;
using QK = QiComparison::Kind;

IntMatrix const A{{1, 2}, {0, 1}};
IntMatrix const B{{1, 0}, {2, 1}};

IntMatrix scalar(long x) { return IntMatrix{{Integer(x)}}; }

// Two vertex groups amalgamated along index-p and index-q subgroups, plus a loop.
GraphOfGroups amalgam_with_loop(long p, long q, long a, long b) {
  GraphOfGroups g;
  g.rank = 1;
  g.vertices = {"u", "v"};
  g.edges.push_back({"e0", "u", "v", scalar(p), scalar(q)});
  g.edges.push_back({"e1", "v", "v", scalar(a), scalar(b)});
  return g;
}

std::vector<GraphOfGroups> corpus() {
  return {bs(1, 2),
          bs(2, 3),
          bs(2, 2),
          bs(1, -1),
          bs(3, -2),
          bs(2, 4),
          semidirect(2, {A, B}),
          semidirect(2, {IntMatrix{{1, 1}, {0, 1}}}),
          semidirect(2, {IntMatrix{{2, 1}, {1, 1}}}),
          semidirect(2, {IntMatrix{{0, -1}, {1, 0}}, IntMatrix{{1, 1}, {0, 1}}}),
          semidirect(2, {IntMatrix{{0, -1}, {1, 0}}}),
          semidirect(1, {scalar(1), scalar(1)}),
          amalgam_with_loop(2, 3, 1, 1),
          amalgam_with_loop(2, 2, 2, 3)};
}

}  // namespace

TEST_CASE("classify examples", "[trichotomy]") {
  auto b12 = classify(bs(1, 2));
  REQUIRE(b12.kind == TK::Parabolic);
  REQUIRE(b12.form);
  CHECK(b12.form->endomorphism == scalar(2));

  auto b23 = classify(bs(2, 3), 6, std::log(1.5));
  CHECK(b23.kind == TK::Folded);
  CHECK(b23.evidence.rule == "d");
  REQUIRE(b23.evidence.coverage.size() == 1);
  CHECK(b23.evidence.coverage[0].iota_covered());
  CHECK(b23.evidence.coverage[0].tau_covered());

  auto b22 = classify(bs(2, 2));
  CHECK(b22.kind == TK::Folded);
  CHECK(b22.evidence.rule == "a");

  auto sanov = classify(semidirect(2, {A, B}));
  CHECK(sanov.kind == TK::Proper);
  CHECK(sanov.evidence.rule == "c");
  REQUIRE(sanov.evidence.freeness);
  CHECK(sanov.evidence.freeness->kind == FreenessCertificate::Kind::PingPong);
}

TEST_CASE("default radius is the largest crossing distance", "[trichotomy]") {
  CHECK(classify(bs(2, 3)).evidence.R == Approx(std::log(1.5)));
  CHECK(classify(bs(2, 2)).evidence.R == 0);
  CHECK(classify(bs(1, 6)).evidence.R == Approx(std::log(6.0)));
}

TEST_CASE("finite holonomy images are recognized exactly", "[trichotomy]") {
  auto rot = classify(semidirect(2, {IntMatrix{{0, -1}, {1, 0}}}));
  CHECK(rot.kind == TK::Folded);
  CHECK(rot.evidence.finite_image.order == 4);

  // Two involutions generating an infinite dihedral group.
  auto dihedral = classify(semidirect(2, {IntMatrix{{0, 1}, {1, 0}}, IntMatrix{{1, 2}, {0, -1}}}));
  CHECK(dihedral.evidence.finite_image.decided);
  CHECK_FALSE(dihedral.evidence.finite_image.finite);

  // The order 12 image of a hexagonal rotation and a reflection.
  auto hex = classify(semidirect(2, {IntMatrix{{1, -1}, {1, 0}}, IntMatrix{{0, 1}, {1, 0}}}));
  CHECK(hex.kind == TK::Folded);
  CHECK(hex.evidence.finite_image.order == 12);
}

TEST_CASE("Parabolic exactly for solvable BS groups", "[trichotomy][property]") {
  for (long m = -6; m <= 6; ++m)
    for (long n = -6; n <= 6; ++n) {
      if (m == 0 || n == 0) continue;
      INFO("bs(" << m << "," << n << ")");
      auto v = classify(bs(m, n));
      bool solvable_strict = (std::abs(m) == 1) != (std::abs(n) == 1);
      CHECK((v.kind == TK::Parabolic) == solvable_strict);
      CHECK(v.kind != TK::Undetermined);
    }
}

TEST_CASE("halfspace coverage matches an explicit ball", "[trichotomy][property]") {
  // The label-profile search against halfspaces of a materialized tree ball.
  std::vector<GraphOfGroups> gs{bs(2, 3), bs(1, 2), bs(2, 4), bs(3, -2), amalgam_with_loop(2, 3, 1, 1),
                                semidirect(2, {IntMatrix{{1, 1}, {0, 1}}})};
  for (auto const& g : gs)
    for (int depth : {1, 2, 3}) {
      for (std::size_t e = 0; e < g.edges.size(); ++e) {
        double R = std::log(1.5);
        auto fast = detail::edge_coverage(g, e, depth, R);
        TreeBall ball = build_ball(g, g.iota(e), 2 * depth);
        std::size_t child = 0;
        for (std::size_t c : ball.children[0])
          if (ball.vertices[c].via->edge == e && ball.vertices[c].via->dir == Direction::Forward) {
            child = c;
            break;
          }
        REQUIRE(child != 0);
        auto root_side = carries_holonomy(ball, halfspace(ball, child, Side::Iota), R, depth);
        auto child_side = carries_holonomy(ball, halfspace(ball, child, Side::Tau), R, depth);
        INFO("edge " << g.edges[e].id << " depth " << depth);
        CHECK(fast.iota_covered() == (root_side.covered_fraction >= 1.0));
        CHECK(fast.tau_covered() == (child_side.covered_fraction >= 1.0));
        CHECK(fast.iota_side.worst_gap == Approx(root_side.worst_gap).margin(1e-12));
        CHECK(fast.tau_side.worst_gap == Approx(child_side.worst_gap).margin(1e-12));
      }
    }
}

TEST_CASE("evidence never certifies two kinds", "[trichotomy][property]") {
  for (auto const& g : corpus()) {
    auto v = classify(g);
    auto certified = v.evidence.certified();
    CHECK(certified.size() <= 1);
    if (!certified.empty()) CHECK(certified.front() == v.kind);
    if (v.kind == TK::Parabolic) {
      REQUIRE(v.form);
      CHECK(v.form->strict);
    }
  }
}

TEST_CASE("verdicts are stable under deeper search", "[trichotomy][property]") {
  for (auto const& g : corpus()) {
    std::optional<TK> settled;
    for (int depth = 2; depth <= 7; ++depth) {
      auto v = classify(g, depth);
      if (settled) {
        INFO("depth " << depth);
        CHECK(v.kind == *settled);
      } else if (v.kind != TK::Undetermined) {
        settled = v.kind;
      }
    }
  }
}

TEST_CASE("qi_compare examples", "[trichotomy]") {
  auto c1 = qi_compare(bs(2, 3), bs(4, 9));
  CHECK(c1.kind == QK::DifferentQiClass);
  auto c2 = qi_compare(bs(2, 3), bs(8, 27));
  CHECK(c2.kind == QK::DifferentQiClass);
  auto c3 = qi_compare(bs(2, 2), semidirect(1, {scalar(1), scalar(1)}));
  CHECK(c3.kind == QK::SameQiClass);
  auto c4 = qi_compare(bs(1, 2), bs(1, 3));
  CHECK(c4.kind == QK::Undetermined);
  REQUIRE(c4.endomorphisms.size() == 2);
  CHECK(c4.endomorphisms[0] == scalar(2));
  CHECK(c4.endomorphisms[1] == scalar(3));

  CHECK(qi_compare(bs(2, 3), bs(-2, 3)).kind == QK::SameQiClass);
  CHECK(qi_compare(bs(1, 2), bs(2, 3)).kind == QK::DifferentQiClass);
  // <A^3, B^3> has infinite index, so its limit set is a Cantor set.
  auto c5 = qi_compare(semidirect(2, {A, B}),
                       semidirect(2, {IntMatrix{{1, 3}, {0, 1}}, IntMatrix{{1, 0}, {3, 1}}}));
  CHECK(c5.kind == QK::DifferentQiClass);
  CHECK(c5.reason == "Hausdorff class of the holonomy image");
  // Conjugating the Sanov pair by [[1,1],[0,1]].
  CHECK(qi_compare(semidirect(2, {A, B}), semidirect(2, {A, IntMatrix{{3, -2}, {2, -1}}})).kind ==
        QK::SameQiClass);
  CHECK(qi_compare(bs(2, 3), semidirect(2, {A})).kind == QK::DifferentQiClass);
  CHECK_THROWS_AS(qi_compare(semidirect(3, {IntMatrix{{1, 1, 0}, {0, 1, 0}, {0, 0, 1}}}),
                             semidirect(3, {IntMatrix{{1, 0, 1}, {0, 1, 0}, {0, 0, 1}}})),
                  RankUnsupported);
}

TEST_CASE("qi_compare is symmetric", "[trichotomy][property]") {
  auto gs = corpus();
  gs.push_back(bs(4, 9));
  gs.push_back(bs(1, 3));
  for (std::size_t i = 0; i < gs.size(); ++i)
    for (std::size_t j = i; j < gs.size(); ++j) {
      INFO(i << " vs " << j);
      auto ab = qi_compare(gs[i], gs[j]);
      auto ba = qi_compare(gs[j], gs[i]);
      CHECK(ab.kind == ba.kind);
      CHECK(ab.reason == ba.reason);
      if (i == j && ab.first.kind != TK::Undetermined && ab.first.kind != TK::Parabolic)
        CHECK(ab.kind != QK::DifferentQiClass);
    }
}
