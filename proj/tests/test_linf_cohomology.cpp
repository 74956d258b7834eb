#include <catch_amalgamated.hpp>

#include <coarsebundle/linf_cohomology.hpp>

#include <random>

using namespace coarsebundle;
using Catch::Approx;

namespace {

using Q = Rational;

Q qr(long n, long d) { return make_rational(n, d); }

std::vector<std::vector<Q>> random_potential(BaseComplex const& cx, std::mt19937_64& rng, long M) {
  std::uniform_int_distribution<long> pick(-4 * M, 4 * M);
  std::vector<std::vector<Q>> f(cx.vertex_count, std::vector<Q>(1));
  for (auto& v : f) v[0] = qr(pick(rng), 4);
  return f;
}

Cochain1<Q> random_bounded(BaseComplex const& cx, std::mt19937_64& rng, long M) {
  std::uniform_int_distribution<long> pick(-3 * M, 3 * M);
  auto a = zero_cochain1<Q>(cx, 1);
  for (auto& v : a.values) v[0] = qr(pick(rng), 3);
  return a;
}

// Two triangles glued along a diagonal and a pendant edge.
BaseComplex small_complex() {
  BaseComplex cx;
  cx.vertex_count = 5;
  cx.edges = {{0, 1}, {1, 2}, {2, 0}, {2, 3}, {3, 0}, {3, 4}};
  cx.faces = {{1, 2, 3}, {-3, 4, 5}};
  return cx;
}

bool closed(BaseComplex const& cx, Loop const& l) {
  if (l.steps.empty()) return false;
  for (std::size_t k = 0; k < l.steps.size(); ++k)
    if (detail::step_head(cx, l.steps[k]) != detail::step_tail(cx, l.steps[(k + 1) % l.steps.size()])) return false;
  return true;
}

}  // namespace

TEST_CASE("grid layout", "[linf]") {
  auto cx = grid_complex(3, 4);
  CHECK(cx.vertex_count == 12);
  CHECK(cx.edges.size() == 2 * 4 + 3 * 3);
  CHECK(cx.faces.size() == 6);
  CHECK_NOTHROW(validate(cx));
  CHECK_THROWS_AS(grid_complex(1, 5), InvalidArgument);
  BaseComplex broken = small_complex();
  broken.faces.push_back({1, 4});
  CHECK_THROWS_AS(validate(broken), InvalidArgument);
  BaseComplex split;
  split.vertex_count = 3;
  split.edges = {{0, 1}};
  CHECK_THROWS_AS(validate(split), Disconnected);
}

TEST_CASE("d1 examples", "[linf]") {
  auto cx = grid_complex(6, 5);
  auto z = d1(cx, zero_cochain1<Q>(cx, 2));
  for (auto const& v : z.values) CHECK((v[0] == 0 && v[1] == 0));

  auto tau = d1(cx, heisenberg_cochain<Q>(cx));
  for (auto const& v : tau.values) CHECK(v[0] == 1);
  auto tau_f = tau_from_gluing(cx, heisenberg_cochain<double>(cx));
  for (auto const& v : tau_f.values) CHECK(v[0] == 1.0);
  for (auto const& v : tau_from_gluing(cx, zero_cochain1<Q>(cx, 1)).values) CHECK(v[0] == 0);
}

TEST_CASE("d of a coboundary vanishes", "[linf][property]") {
  std::mt19937_64 rng(7);
  for (auto cx : {grid_complex(5, 5), small_complex(), grid_complex(2, 9)})
    for (int trial = 0; trial < 20; ++trial) {
      auto c = d1(cx, coboundary0(cx, random_potential(cx, rng, 5)));
      for (auto const& v : c.values) CHECK(v[0] == 0);
    }
}

TEST_CASE("Heisenberg scan ratios are area over perimeter", "[linf]") {
  auto cx = grid_complex(40, 40);
  auto rows = linear_bound_scan(cx, heisenberg_cochain<Q>(cx), 160);
  std::map<std::size_t, ScanRow<Q>> by_len;
  for (auto const& r : rows) by_len.emplace(r.length, r);
  for (long s = 1; s <= 39; ++s) {
    INFO("side " << s);
    auto const& r = by_len.at(static_cast<std::size_t>(4 * s));
    CHECK(r.max_abs == Q(s * s));
    CHECK(r.ratio == qr(s, 4));
    CHECK(closed(cx, r.witness));
    CHECK(r.witness.length() == static_cast<std::size_t>(4 * s));
    CHECK(loop_sum(cx, heisenberg_cochain<Q>(cx), r.witness.steps)[0] == Q(s * s));
  }
  // Odd half-perimeters maximize at the near-square rectangles.
  CHECK(by_len.at(10).max_abs == 6);
  for (auto const& r : linear_bound_scan(cx, zero_cochain1<Q>(cx, 1), 40)) CHECK(r.ratio == 0);
}

TEST_CASE("rectangle scan agrees with direct loop sums", "[linf][property]") {
  std::mt19937_64 rng(8);
  auto cx = grid_complex(7, 6);
  for (int trial = 0; trial < 5; ++trial) {
    auto a = random_bounded(cx, rng, 2);
    auto rows = linear_bound_scan(cx, a, 1000);
    std::map<std::size_t, Q> direct;
    for (std::size_t w = 1; w <= 6; ++w)
      for (std::size_t h = 1; h <= 5; ++h)
        for (std::size_t x = 0; x + w <= 6; ++x)
          for (std::size_t y = 0; y + h <= 5; ++y) {
            Q s = abs(loop_sum(cx, a, detail::rectangle_loop(cx, x, y, w, h).steps)[0]);
            Q& m = direct[2 * (w + h)];
            if (s > m) m = s;
          }
    REQUIRE(rows.size() == direct.size());
    for (auto const& r : rows) {
      CHECK(r.max_abs == direct.at(r.length));
      CHECK(abs(loop_sum(cx, a, r.witness.steps)[0]) == r.max_abs);
    }
  }
}

TEST_CASE("telescoping bound for perturbed coboundaries", "[linf]") {
  std::mt19937_64 rng(9);
  auto cx = grid_complex(12, 12);
  auto eps = random_bounded(cx, rng, 1);
  auto a = add(coboundary0(cx, random_potential(cx, rng, 50)), eps);
  for (auto const& r : linear_bound_scan(cx, a, 44)) CHECK(r.ratio <= sup_norm(eps));
}

TEST_CASE("general complexes scan faces and cycle products", "[linf]") {
  auto cx = small_complex();
  auto a = zero_cochain1<Q>(cx, 1);
  a.values[0][0] = 3;
  auto rows = linear_bound_scan(cx, a, 10, 0);
  REQUIRE(!rows.empty());
  CHECK(rows.front().length == 3);
  CHECK(rows.front().max_abs == 3);
  for (auto const& r : rows) {
    CHECK(closed(cx, r.witness));
    CHECK(r.witness.length() == r.length);
    CHECK(abs(loop_sum(cx, a, r.witness.steps)[0]) == r.max_abs);
  }
  auto again = linear_bound_scan(cx, a, 10, 0);
  REQUIRE(again.size() == rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) CHECK(again[k].witness.steps == rows[k].witness.steps);
}

TEST_CASE("solve_coboundary inverts d1", "[linf][property]") {
  std::mt19937_64 rng(10);
  for (auto cx : {grid_complex(9, 7), small_complex()})
    for (int trial = 0; trial < 10; ++trial) {
      auto a = random_bounded(cx, rng, 5);
      auto c = d1(cx, a);
      auto b = solve_coboundary(cx, c);
      auto back = d1(cx, b);
      for (std::size_t f = 0; f < c.values.size(); ++f) CHECK(back.values[f][0] == c.values[f][0]);
    }
  // A sphere: two faces on the same triangle; only c with zero total sum is exact.
  BaseComplex sphere;
  sphere.vertex_count = 3;
  sphere.edges = {{0, 1}, {1, 2}, {2, 0}};
  sphere.faces = {{1, 2, 3}, {-3, -2, -1}};
  Cochain2<Q> bad{1, {{Q(1)}, {Q(1)}}};
  CHECK_THROWS_AS(solve_coboundary(sphere, bad), NotCoboundary);
  Cochain2<Q> good{1, {{Q(2)}, {Q(-2)}}};
  CHECK(d1(sphere, solve_coboundary(sphere, good)).values[0][0] == 2);
  Cochain2<double> bad_f{1, {{1.0}, {1.0}}};
  CHECK_THROWS_AS(solve_coboundary(sphere, bad_f), NotCoboundary);
}

TEST_CASE("primitive examples", "[linf]") {
  auto cx = grid_complex(8, 8);
  // For a = 0 the best path is a geodesic: f(x, y) = -2C(x + y).
  auto p0 = primitive(cx, zero_cochain1<Q>(cx, 1), Q(1));
  for (std::size_t v = 0; v < cx.vertex_count; ++v) CHECK(p0.f[v][0] == Q(-2 * static_cast<long>(v % 8 + v / 8)));
  CHECK(p0.bound == 2);

  std::mt19937_64 rng(11);
  for (long M : {1, 3, 10}) {
    auto g = random_potential(cx, rng, M);
    auto a = coboundary0(cx, g);
    auto p = primitive(cx, a, Q(M));
    CHECK(p.bound <= Q(4 * M));
  }

  auto big = grid_complex(40, 40);
  try {
    primitive(big, heisenberg_cochain<Q>(big), qr(1, 10));
    FAIL("expected a positive cycle");
  } catch (PositiveCycle const& e) {
    CHECK(closed(big, e.loop));
    Q s = loop_sum(big, heisenberg_cochain<Q>(big), e.loop.steps)[0];
    CHECK(s > qr(2, 10) * Q(static_cast<long>(e.loop.length())));
  }
}

TEST_CASE("primitive soundness and optimality", "[linf][property]") {
  std::mt19937_64 rng(12);
  for (auto cx : {grid_complex(10, 10), small_complex()})
    for (int trial = 0; trial < 15; ++trial) {
      auto a = random_bounded(cx, rng, 1 + trial % 4);
      Q C = sup_norm(a) / 2;
      auto p = primitive(cx, a, C);
      auto fixed = add(a, coboundary0(cx, p.f));
      CHECK(sup_norm(fixed) <= 4 * C);
      auto da = d1(cx, a), dfixed = d1(cx, fixed);
      for (std::size_t f = 0; f < da.values.size(); ++f) CHECK(dfixed.values[f][0] == da.values[f][0]);
      CHECK(p.f[cx.basepoint][0] == 0);
      // Random walks from the basepoint.
      std::vector<std::vector<long>> adj(cx.vertex_count);
      for (std::size_t e = 0; e < cx.edges.size(); ++e) {
        adj[cx.edges[e].from].push_back(static_cast<long>(e + 1));
        adj[cx.edges[e].to].push_back(-static_cast<long>(e + 1));
      }
      for (int walk = 0; walk < 30; ++walk) {
        std::size_t v = cx.basepoint;
        Q value = 0;
        for (int step = 0; step < 40; ++step) {
          auto const& out = adj[v];
          long s = out[std::uniform_int_distribution<std::size_t>(0, out.size() - 1)(rng)];
          Q x = a.values[detail::step_edge(s)][0];
          value += (s > 0 ? x : Q(-x)) - 2 * C;
          v = detail::step_head(cx, s);
          CHECK(p.f[v][0] >= value);
        }
      }
      // Stabilization: no edge can improve the values.
      for (std::size_t e = 0; e < cx.edges.size(); ++e) {
        auto [u, w] = cx.edges[e];
        CHECK(p.f[w][0] >= p.f[u][0] + a.values[e][0] - 2 * C);
        CHECK(p.f[u][0] >= p.f[w][0] - a.values[e][0] - 2 * C);
      }
    }
}

TEST_CASE("float primitive respects the 6C ceiling", "[linf][property]") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  auto cx = grid_complex(12, 12);
  for (int trial = 0; trial < 10; ++trial) {
    auto a = zero_cochain1<double>(cx, 2);
    for (auto& v : a.values)
      for (auto& x : v) x = u(rng);
    double C = sup_norm(a) / 2;
    auto p = primitive(cx, a, C);
    CHECK(p.bound <= 6 * C);
  }
}

TEST_CASE("is_trivial examples", "[linf]") {
  using K = TrivialityKind;
  auto cx = grid_complex(40, 40);
  auto zero = is_trivial(cx, zero_cochain2<Q>(cx, 1), 160);
  REQUIRE(zero.kind == K::Trivial);
  for (auto const& v : zero.certificate->f) CHECK(v[0] == 0);

  auto h = is_trivial(cx, d1(cx, heisenberg_cochain<Q>(cx)), 128);
  REQUIRE(h.kind == K::Nontrivial);
  std::vector<long> sides;
  for (std::size_t k = 0; k < h.scales.size(); ++k)
    if (h.scales[k] >= 16) {
      CHECK(h.cumulative[k] == qr(static_cast<long>(h.scales[k]), 16));
      sides.push_back(static_cast<long>(h.witnesses[k].length() / 4));
      CHECK(closed(cx, h.witnesses[k]));
    }
  CHECK(sides == std::vector<long>{4, 8, 16, 32});

  std::mt19937_64 rng(14);
  auto small = grid_complex(20, 20);
  for (int trial = 0; trial < 5; ++trial) {
    auto a = random_bounded(small, rng, 2);
    auto v = is_trivial(small, d1(small, a), 80);
    REQUIRE(v.kind == K::Trivial);
    auto fixed = add(v.potential, coboundary0(small, v.certificate->f));
    CHECK(sup_norm(fixed) <= v.bound_limit);
    CHECK(v.bound_limit == 4 * v.certificate->C);
    auto lhs = d1(small, fixed), rhs = d1(small, a);
    for (std::size_t f = 0; f < lhs.values.size(); ++f) CHECK(lhs.values[f][0] == rhs.values[f][0]);
  }

  // Too few doublings to call growth.
  auto tiny = grid_complex(5, 5);
  CHECK(is_trivial(tiny, d1(tiny, heisenberg_cochain<Q>(tiny)), 16).kind != K::Nontrivial);
}

TEST_CASE("Heisenberg nontriviality in float mode", "[linf]") {
  auto cx = grid_complex(40, 40);
  auto v = is_trivial(cx, d1(cx, heisenberg_cochain<double>(cx)), 128);
  CHECK(v.kind == TrivialityKind::Nontrivial);
  CHECK(v.cumulative.back() == Approx(8.0));
}

TEST_CASE("triviality is closed under sums", "[linf][property]") {
  std::mt19937_64 rng(15);
  auto cx = grid_complex(16, 16);
  std::vector<Cochain2<Q>> trivial{zero_cochain2<Q>(cx, 1)};
  for (int k = 0; k < 4; ++k) trivial.push_back(d1(cx, random_bounded(cx, rng, 1 + k)));
  for (auto const& c : trivial) REQUIRE(is_trivial(cx, c, 64).kind == TrivialityKind::Trivial);
  for (std::size_t i = 0; i < trivial.size(); ++i)
    for (std::size_t j = i; j < trivial.size(); ++j)
      CHECK(is_trivial(cx, add(trivial[i], trivial[j]), 64).kind == TrivialityKind::Trivial);
}

TEST_CASE("classes_equivalent_via examples", "[linf]") {
  auto cx = grid_complex(40, 40);
  auto tau = d1(cx, heisenberg_cochain<Q>(cx));
  auto twice = add(tau, tau);
  RatMatrix half{{qr(1, 2)}};
  CHECK(classes_equivalent_via(cx, tau, twice, half, 128).kind == TrivialityKind::Trivial);
  CHECK(classes_equivalent_via(cx, tau, zero_cochain2<Q>(cx, 1), RatMatrix{{Q(5)}}, 128).kind ==
        TrivialityKind::Nontrivial);
  CHECK(classes_equivalent_via(cx, tau, tau, RatMatrix{{Q(1)}}, 128).kind == TrivialityKind::Trivial);
  CHECK(classes_equivalent_via(cx, tau, tau, RatMatrix{{Q(2)}}, 128).kind == TrivialityKind::Nontrivial);
  CHECK_THROWS_AS(classes_equivalent_via(cx, tau, tau, RatMatrix{{Q(0)}}, 128), SingularMatrix);
  CHECK_THROWS_AS(classes_equivalent_via(cx, tau, tau, RatMatrix{{1, 0}, {0, 1}}, 128), RankMismatch);
}
