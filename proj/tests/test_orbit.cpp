#include <catch_amalgamated.hpp>

#include <coarsebundle/orbit_reduce.hpp>

#include <random>

using namespace coarsebundle;

TEST_CASE("orbit_reduce examples", "[orbit]") {
  auto t = orbit_reduce<Rational>({4, 6}, 100);
  CHECK(t.stop == OrbitTrace<Rational>::Stop::Terminal);
  CHECK(t.norms.back() == 2);
  CHECK(abs(t.current[0]) + abs(t.current[1]) == 2);
  CHECK((t.current[0] == 0 || t.current[1] == 0));

  auto z = orbit_reduce<Rational>({0, 0, 0}, 100);
  CHECK(z.steps.empty());
  CHECK(z.norms.back() == 0);
  CHECK(z.stop == OrbitTrace<Rational>::Stop::Terminal);

  CHECK_THROWS_AS(orbit_reduce<Rational>({5}, 10), DimensionTooSmall);
}

TEST_CASE("golden ratio orbit norms decay geometrically", "[orbit]") {
  mp_bitcnt_t const prec = 512;
  mpf_class five(5, prec), one(1, prec);
  mpf_class phi = (one + sqrt(five)) / 2;
  mpf_class ratio = (sqrt(five) - one) / 2;
  auto t = orbit_reduce<mpf_class>({one, phi}, 40);
  REQUIRE(t.steps.size() == 40);
  mpf_class bound(1, prec);
  for (std::size_t k = 1; k <= 40; ++k) {
    // bound = ratio^(k-2)
    mpf_class b(1, prec);
    if (k >= 2)
      for (std::size_t i = 0; i < k - 2; ++i) b *= ratio;
    else
      b /= ratio;
    INFO("step " << k);
    CHECK(t.norms[k] <= b * mpf_class(1 + 1e-12, prec));
  }
}

TEST_CASE("exact reduction ends at the gcd", "[orbit][property]") {
  std::mt19937_64 rng(51);
  std::uniform_int_distribution<long> num(-2000, 2000), den(1, 60);
  for (int trial = 0; trial < 1000; ++trial) {
    Rational a = make_rational(num(rng), den(rng)), b = make_rational(num(rng), den(rng));
    auto t = orbit_reduce<Rational>({a, b}, 1000);
    REQUIRE(t.stop == OrbitTrace<Rational>::Stop::Terminal);
    // gcd oracle: common denominator, then integer gcd of the numerators.
    Integer l = lcm(Integer(a.get_den()), Integer(b.get_den()));
    Integer g = gcd(Integer(Rational(a * l).get_num()), Integer(Rational(b * l).get_num()));
    Rational expected = Rational(g) / Rational(l);
    CHECK(abs(t.current[0]) + abs(t.current[1]) == expected);
  }
}

TEST_CASE("applied matrices are unimodular and reproduce the vector", "[orbit][property]") {
  std::mt19937_64 rng(52);
  std::uniform_int_distribution<long> num(-500, 500), den(1, 9);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 2 + trial % 3;
    std::vector<Rational> v(n);
    for (auto& x : v) x = make_rational(num(rng), den(rng));
    auto t = orbit_reduce<Rational>(v, 1000);
    IntMatrix acc = IntMatrix::identity(n);
    for (auto const& s : t.steps) {
      IntMatrix e = elementary(n, s.i, s.j, s.k);
      CHECK(abs(determinant(e)) == 1);
      acc = e * acc;
    }
    CHECK(acc == t.transform);
    CHECK(t.transform * t.transform_inverse == IntMatrix::identity(n));
    for (std::size_t r = 0; r < n; ++r) {
      Rational sum = 0;
      for (std::size_t c = 0; c < n; ++c) sum += Rational(t.transform(r, c)) * v[c];
      CHECK(sum == t.current[r]);
    }
  }
}

TEST_CASE("rational_line_test examples", "[orbit]") {
  auto r = rational_line_test(std::vector<Rational>{4, 6});
  CHECK(r.kind == RationalLineResult::Kind::OnRationalLine);
  CHECK(r.direction == std::vector<Integer>{2, 3});

  auto irr = rational_line_test<double>({1.0, std::sqrt(2.0)}, 1e-6, 200);
  CHECK(irr.kind == RationalLineResult::Kind::NotOnRationalLine);

  auto near = rational_line_test<double>({1.0, 1.0 + 1e-15}, 1e-20, 200);
  CHECK(near.kind == RationalLineResult::Kind::Unknown);

  auto exact_float = rational_line_test<double>({4.0, 6.0}, 1e-9, 200);
  CHECK(exact_float.kind == RationalLineResult::Kind::OnRationalLine);
  CHECK(exact_float.direction == std::vector<Integer>{2, 3});
}

TEST_CASE("rational directions are primitive and parallel", "[orbit][property]") {
  std::mt19937_64 rng(53);
  std::uniform_int_distribution<long> num(-300, 300), den(1, 12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Rational> v(3);
    for (auto& x : v) x = make_rational(num(rng), den(rng));
    auto r = rational_line_test(v);
    REQUIRE(r.kind == RationalLineResult::Kind::OnRationalLine);
    Integer g = 0;
    for (auto const& d : r.direction) g = gcd(g, d);
    bool zero = std::all_of(v.begin(), v.end(), [](Rational const& x) { return x == 0; });
    CHECK(g == (zero ? 0 : 1));
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(v[i] * Rational(r.direction[j]) == v[j] * Rational(r.direction[i]));
  }
}
