#include <catch_amalgamated.hpp>

#include <coarsebundle/io.hpp>

using namespace coarsebundle;

TEST_CASE("rationals serialize as strings", "[io]") {
  CHECK(to_json(make_rational(3, 2)) == "3/2");
  CHECK(to_json(make_rational(-4, 2)) == -2);
  CHECK(rational_from_json(json("6/4")) == make_rational(3, 2));
  CHECK(rational_from_json(json(7)) == 7);
  CHECK(rational_from_json(json("0.1")) == make_rational(1, 10));
  CHECK(rational_from_json(json(0.5), true) == make_rational(1, 2));
  CHECK_THROWS_AS(rational_from_json(json(0.5)), ParseError);
  CHECK_THROWS_AS(rational_from_json(json("x/2")), ParseError);
  CHECK_THROWS_AS(rational_from_json(json("1/0")), ParseError);
  CHECK(parse_decimal("-1.25e1") == make_rational(-25, 2));
  CHECK(parse_decimal("3e2") == 300);
  CHECK_THROWS_AS(parse_decimal("1.2.3"), ParseError);
  Integer big("123456789012345678901234567890");
  CHECK(rational_from_json(to_json(Rational(big))) == Rational(big));
}

TEST_CASE("graph of groups documents round-trip", "[io]") {
  auto doc = parse_json_text(R"({"rank": 1, "vertices": ["v"],
    "edges": [{"id": "a", "from": "v", "to": "v", "incl_from": [[2]], "incl_to": [[3]]}]})");
  GraphOfGroups g = gog_from_json(doc);
  CHECK(g.rank == 1);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].incl_iota == IntMatrix{{2}});
  CHECK(g.edges[0].incl_tau == IntMatrix{{3}});
  CHECK(to_json(g) == doc);

  GraphOfGroups s = semidirect(2, {IntMatrix{{2, 1}, {1, 1}}});
  GraphOfGroups back = gog_from_json(to_json(s));
  CHECK(to_json(back) == to_json(s));
}

TEST_CASE("malformed graph documents are rejected", "[io]") {
  CHECK_THROWS_AS(parse_json_text("{\"rank\": 1,"), ParseError);
  CHECK_THROWS_AS(gog_from_json(parse_json_text(R"({"vertices": ["v"], "edges": []})")), ParseError);
  CHECK_THROWS_AS(gog_from_json(parse_json_text(
                      R"({"rank": 1, "vertices": ["v"], "edges": [{"id": "a", "from": "v", "to": "v",
                          "incl_from": [[1, 0]], "incl_to": [[1]]}]})")),
                  ParseError);
  CHECK_THROWS_AS(gog_from_json(parse_json_text(
                      R"({"rank": 1, "vertices": ["v"], "edges": [{"id": "a", "from": "v", "to": "w",
                          "incl_from": [[1]], "incl_to": [[1]]}]})")),
                  Error);
  CHECK_THROWS_AS(gog_from_json(parse_json_text(
                      R"({"rank": 1, "vertices": ["v", "w"], "edges": []})")),
                  Disconnected);
  CHECK_THROWS_AS(gog_from_json(parse_json_text(
                      R"({"rank": 1, "vertices": ["v"], "edges": [{"id": "a", "from": "v", "to": "v",
                          "incl_from": [["1/2"]], "incl_to": [[1]]}]})")),
                  ParseError);
}

TEST_CASE("complexes and cochains", "[io]") {
  auto grid = complex_from_json(parse_json_text(R"({"kind": "grid", "nx": 3, "ny": 2})"));
  CHECK(grid.vertex_count == 6);
  CHECK(grid.edges.size() == 7);
  CHECK(grid.faces.size() == 2);
  CHECK(to_json(grid) == parse_json_text(R"({"kind": "grid", "nx": 3, "ny": 2})"));

  auto tri = complex_from_json(
      parse_json_text(R"({"vertices": 3, "edges": [[0, 1], [1, 2], [2, 0]], "faces": [[1, 2, 3]]})"));
  CHECK(tri.faces.size() == 1);
  auto again = complex_from_json(to_json(tri));
  CHECK(again.edges.size() == 3);
  CHECK(again.faces == tri.faces);
  CHECK_THROWS_AS(complex_from_json(parse_json_text(R"({"vertices": 2, "edges": [[0, 5]]})")), IndexOutOfRange);

  auto heis = cochain_from_json(parse_json_text(R"({"degree": 1, "builtin": "heisenberg"})"));
  auto a = materialize1<Rational>(grid, heis);
  auto c = materialize2<Rational>(grid, heis);
  CHECK(c.values[0][0] == d1(grid, a).values[0][0]);
  CHECK(c.values[0][0] == 1);

  auto cst = cochain_from_json(parse_json_text(R"({"degree": 2, "dim": 2, "constant": ["1/2", 3]})"));
  auto cc = materialize2<Rational>(grid, cst);
  REQUIRE(cc.values.size() == 2);
  CHECK(cc.values[1] == std::vector<Rational>{make_rational(1, 2), 3});
  CHECK(cochain_from_json(to_json(cst)).constant == cst.constant);

  auto fl = cochain_from_json(parse_json_text(R"({"degree": 1, "mode": "float", "values": [0.5, 1, 2, 3, 4, 5, 6]})"));
  CHECK_FALSE(fl.exact);
  auto fa = materialize1<double>(grid, fl);
  CHECK(fa.values[0][0] == 0.5);
  CHECK_THROWS_AS(materialize1<double>(tri, fl), ParseError);
  CHECK_THROWS_AS(cochain_from_json(parse_json_text(R"({"degree": 1, "values": [0.5]})")), ParseError);
  CHECK_THROWS_AS(cochain_from_json(parse_json_text(R"({"degree": 3, "constant": 1})")), ParseError);
  CHECK_THROWS_AS(cochain_from_json(parse_json_text(R"({"degree": 1, "constant": 1, "values": []})")), ParseError);

  auto both = cocycle_input_from_json(
      parse_json_text(R"({"complex": {"kind": "grid", "nx": 4, "ny": 4}, "cochain": {"degree": 1, "constant": 0}})"));
  REQUIRE(both.complex);
  CHECK(both.complex->vertex_count == 16);
}

TEST_CASE("gluing specs round-trip", "[io]") {
  auto doc = parse_json_text(R"({"base": "line", "fiber_dim": 1, "maps": [{"kind": "phi"}],
    "windows": {"base": [[0, 10]], "fiber": [[-50, 50]]}, "origin": {"fiber": [0], "base": [5]}, "rmax": 4})");
  auto b = bundle_from_json(doc);
  CHECK(b.spec.maps[0].kind == FiberMap::Kind::PhiFamily);
  REQUIRE(b.windows);
  CHECK(b.windows->fiber[0].lo == -50);
  CHECK(b.origin->base == std::vector<long>{5});
  CHECK(*b.rmax == 4);
  CHECK(to_json(gluing_spec_from_json(to_json(b.spec))) == to_json(b.spec));

  GluingSpec g;
  g.base = GluingSpec::Base::Graph;
  g.fiber_dim = 2;
  g.graph_vertices = 2;
  g.graph_edges.push_back({0, 1, FiberMap::affine(IntMatrix{{1, 1}, {0, 1}}, {1, -1})});
  g.graph_edges.push_back({1, 0, FiberMap::translation({0, 2})});
  CHECK(to_json(gluing_spec_from_json(to_json(g))) == to_json(g));

  GluingSpec t;
  t.maps.push_back(FiberMap::tabulated({{0, 1}, {1, 0}}));
  CHECK(to_json(gluing_spec_from_json(to_json(t))) == to_json(t));

  CHECK_THROWS_AS(gluing_spec_from_json(parse_json_text(R"({"base": "line", "maps": []})")), ParseError);
  CHECK_THROWS_AS(gluing_spec_from_json(parse_json_text(R"({"base": "line", "maps": [{"kind": "shear"}]})")),
                  ParseError);
  CHECK_THROWS_AS(
      gluing_spec_from_json(parse_json_text(R"({"base": "line", "maps": [{"kind": "translation", "shift": [1, 2]}]})")),
      ParseError);
  CHECK_THROWS_AS(bundle_from_json(parse_json_text(R"({"base": "line", "maps": [{"kind": "phi"}],
    "windows": {"fiber": [[3, 1]]}})")),
                  ParseError);
}

TEST_CASE("subgroups and vectors", "[io]") {
  auto g = subgroup_from_json(parse_json_text(R"({"generators": [[[1, 2], [0, 1]], [[1, 0], ["2", 1]]]})"));
  REQUIRE(g.size() == 2);
  CHECK(g[1](1, 0) == 2);
  CHECK(subgroup_from_json(to_json(g)) == g);
  CHECK(subgroup_from_json(parse_json_text(R"([[[2]]])")).size() == 1);
  CHECK_THROWS_AS(subgroup_from_json(parse_json_text(R"({"generators": []})")), ParseError);
  CHECK_THROWS_AS(subgroup_from_json(parse_json_text(R"([[[1]], [[1, 0], [0, 1]]])")), RankMismatch);

  CHECK(parse_vector("4 6") == std::vector<Rational>{4, 6});
  CHECK(parse_vector(" 1/2,  -3 ") == std::vector<Rational>{make_rational(1, 2), -3});
  CHECK(parse_vector("").empty());
  CHECK_THROWS_AS(parse_vector("4 six"), ParseError);
}

TEST_CASE("run reports re-parse and re-validate", "[io][property]") {
  RunReport r;
  r.command = "classify";
  r.seed = 7;
  r.parameters = {{"depth", 6}};
  r.verdict = {{"kind", "Folded"}};
  r.evidence = {{"rule", "b"}};
  json j = to_json(r);
  CHECK_FALSE(j.contains("timing"));
  RunReport back = report_from_json(parse_json_text(j.dump(2)));
  CHECK(to_json(back) == j);
  CHECK(to_json(back).dump() == j.dump());

  r.timing = 0.25;
  CHECK(report_from_json(to_json(r)).timing == 0.25);

  json bad = j;
  bad.erase("verdict");
  CHECK_THROWS_AS(report_from_json(bad), ParseError);
  bad = j;
  bad["verdict"] = {{"kind", 3}};
  CHECK_THROWS_AS(report_from_json(bad), ParseError);
  bad = j;
  bad["extra"] = 1;
  CHECK_THROWS_AS(report_from_json(bad), ParseError);
  bad = j;
  bad["seed"] = -1;
  CHECK_THROWS_AS(report_from_json(bad), ParseError);
}
