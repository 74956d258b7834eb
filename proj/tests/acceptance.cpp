// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.

#include <coarsebundle/coarsebundle.hpp>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <string>

using namespace coarsebundle;

namespace {

// Time limits in seconds.
constexpr double limit_bs_table = 30;
constexpr double limit_gl1 = 1;
constexpr double limit_heisenberg = 5;
constexpr double limit_primitive = 60;
constexpr double limit_growth = 60;

constexpr double phi_growth_base = 1.1;
constexpr double golden_decay = 0.62;
constexpr double drift_tolerance = 0.01;
constexpr double angle_tolerance = 1e-9;

constexpr std::uint64_t corpus_seed = 2024;
constexpr int corpus_size = 50;

struct Result {
  bool pass = true;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(char const* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

Result within_time(Result r, Stopwatch const& sw, double limit) {
  double t = sw.seconds();
  if (t >= limit) r.pass = false;
  r.detail += (r.detail.empty() ? "" : ", ") + fmt("%.2f s", t) + fmt(" (limit %.0f s)", limit);
  return r;
}

// 1. Parabolic iff m = 1 < n, Folded otherwise, none Undetermined.
Result bs_table() {
  Stopwatch sw;
  Result r;
  int graphs = 0, wrong = 0, undetermined = 0;
  for (long m = 1; m <= 6; ++m)
    for (long n = m; n <= 6; ++n) {
      ++graphs;
      auto v = classify(bs(m, n), 6);
      TrichotomyKind want = (m == 1 && n > 1) ? TrichotomyKind::Parabolic : TrichotomyKind::Folded;
      if (v.kind == TrichotomyKind::Undetermined) ++undetermined;
      if (v.kind != want) {
        ++wrong;
        r.detail += "bs(" + std::to_string(m) + "," + std::to_string(n) + ")=" + to_string(v.kind) + " ";
      }
    }
  r.pass = wrong == 0 && undetermined == 0;
  r.detail += std::to_string(graphs) + " graphs, " + std::to_string(wrong) + " wrong, " +
              std::to_string(undetermined) + " undetermined";
  return within_time(r, sw, limit_bs_table);
}

// 2. Holonomy n/m, checked against a^-1 b^m a = b^n in fiber coordinates.
Result bs_holonomy() {
  Result r;
  int checked = 0;
  for (long m = 1; m <= 6; ++m)
    for (long n = m; n <= 6; ++n) {
      auto rep = modular_holonomy(bs(m, n));
      bool ok = rep.free_gens.size() == 1;
      if (ok) {
        Rational h = rep.free_gens[0].matrix(0, 0);
        // The stable letter carries the fiber element b^m (coordinate m) to b^n.
        ok = h == make_rational(n, m) && h * Rational(m) == Rational(n);
      }
      if (!ok) {
        r.pass = false;
        r.detail += "bs(" + std::to_string(m) + "," + std::to_string(n) + ") ";
      }
      ++checked;
    }
  r.detail += std::to_string(checked) + " holonomies exact";
  return r;
}

// 3. Rank-one Hausdorff classes.
Result gl1_classes() {
  Stopwatch sw;
  Result r;
  auto c32 = hausdorff_class_gl1({make_rational(3, 2)});
  auto c94 = hausdorff_class_gl1({make_rational(9, 4)});
  auto c827 = hausdorff_class_gl1({make_rational(8, 27)});
  auto dense = hausdorff_class_gl1({2, 3});
  auto trivial = hausdorff_class_gl1({1});
  bool ok = c32.kind == Gl1Class::Kind::Discrete && c32.generator == make_rational(3, 2) &&
            c94.kind == Gl1Class::Kind::Discrete && c94.generator == make_rational(9, 4) && !(c32 == c94) &&
            c827.kind == Gl1Class::Kind::Discrete && c827.generator == make_rational(27, 8) && !(c32 == c827) &&
            dense.kind == Gl1Class::Kind::Dense && trivial.kind == Gl1Class::Kind::Trivial;
  r.pass = ok;
  r.detail = "<3/2> " + c32.generator.get_str() + ", <9/4> " + c94.generator.get_str() + ", <8/27> " +
             c827.generator.get_str() + ", <2,3> " + to_string(dense.kind) + ", <1> " + to_string(trivial.kind);
  return within_time(r, sw, limit_gl1);
}

// 4. Heisenberg class on the 40x40 grid.
Result heisenberg() {
  Stopwatch sw;
  Result r;
  auto cx = grid_complex(40, 40);
  auto a = heisenberg_cochain<Rational>(cx);
  auto rows = linear_bound_scan(cx, a, 4 * 39);
  for (long side : {4, 8, 16, 32}) {
    std::size_t len = 4 * side;
    Rational want = make_rational(side, 4);  // area / perimeter
    auto it = std::find_if(rows.begin(), rows.end(), [&](auto const& row) { return row.length == len; });
    bool ok = it != rows.end() && it->ratio == want;
    if (!ok) r.pass = false;
    r.detail += "side " + std::to_string(side) + ": " + (it == rows.end() ? "missing" : it->ratio.get_str()) + "; ";
  }
  auto v = is_trivial(cx, d1(cx, a), 4 * 39);
  if (v.kind != TrivialityKind::Nontrivial) r.pass = false;
  r.detail += to_string(v.kind);
  return within_time(r, sw, limit_heisenberg);
}

// 5. Primitive soundness on random bounded cochains, exact arithmetic.
Result primitive_soundness() {
  Stopwatch sw;
  Result r;
  std::mt19937_64 rng(corpus_seed);
  std::uniform_int_distribution<long> num(-12, 12), den(1, 4);
  auto cx = grid_complex(30, 30);
  int ok = 0;
  Rational worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto a = zero_cochain1<Rational>(cx, 1);
    for (auto& v : a.values) v[0] = make_rational(num(rng), den(rng));
    Rational ratio = 0;
    for (auto const& row : linear_bound_scan(cx, a, 4 * 29))
      if (row.ratio > ratio) ratio = row.ratio;
    Rational half_sup = sup_norm(a) / 2;
    Rational C = std::max(ratio, half_sup);
    bool good = false;
    try {
      auto p = primitive(cx, a, C);
      auto b = add(a, coboundary0(cx, p.f));
      Rational s = sup_norm(b);
      bool curl = d1(cx, b).values == d1(cx, a).values;
      good = s <= 4 * C && curl;
      if (C > 0 && Rational(s / C) > worst) worst = s / C;
    } catch (PositiveCycle const&) {
      good = false;
    }
    if (good) ++ok;
  }
  r.pass = ok == 100;
  r.detail = std::to_string(ok) + "/100 within 4C with d(a+df) = da, worst |a+df|/C = " + worst.get_str();
  return within_time(r, sw, limit_primitive);
}

// 6. Growth of the trivial bundle and the phi bundle.
Result growth() {
  Stopwatch sw;
  Result r;
  GluingSpec trivial;
  trivial.maps.push_back(FiberMap::translation({0}));
  auto tb = build_total_space(trivial, Windows{{Interval{-30, 30}}, {Interval{-30, 30}}}, TotalPoint{{0}, {0}});
  auto ts = ball_growth(tb, 25);
  int exact = 0;
  for (std::size_t k = 0; k <= 25; ++k)
    if (!ts.clipped[k] && ts.counts[k] == 2 * k * k + 2 * k + 1) ++exact;
  if (exact != 26) r.pass = false;

  long const b0 = 2000;
  auto pb = build_total_space(phi_example_spec(), Windows{{Interval{b0 - 30, b0 + 30}}, {Interval{-30000, 30000}}},
                              TotalPoint{{0}, {b0}});
  auto ps = ball_growth(pb, 25);
  int valid = 0, above = 0;
  for (std::size_t k = 15; k <= 25; ++k) {
    if (ps.clipped[k]) continue;
    ++valid;
    if (static_cast<double>(ps.counts[k]) >= std::pow(phi_growth_base, static_cast<double>(k))) ++above;
  }
  GrowthClass g = growth_class(ps);
  if (valid == 0 || above != valid || g.kind != GrowthClass::Kind::Exponential) r.pass = false;
  r.detail = "trivial exact " + std::to_string(exact) + "/26; phi >= 1.1^r on " + std::to_string(above) + "/" +
             std::to_string(valid) + " valid radii, class " + to_string(g.kind) +
             fmt(" (R2 exp %.4f", g.r2_exponential) + fmt(" vs poly %.4f)", g.r2_polynomial);
  return within_time(r, sw, limit_growth);
}

// 7. Orbit reduction oracles.
Result orbit() {
  Result r;
  std::mt19937_64 rng(corpus_seed);
  std::uniform_int_distribution<long> pick(-1000000, 1000000);
  int ok = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    long x = pick(rng), y = pick(rng);
    auto t = orbit_reduce<Rational>({x, y}, 10000);
    long g = std::gcd(x, y);
    if (t.stop == OrbitTrace<Rational>::Stop::Terminal && t.norms.back() == g) ++ok;
  }
  mp_bitcnt_t const prec = 512;
  mpf_class one(1, prec), five(5, prec);
  mpf_class golden = (one + sqrt(five)) / 2;
  auto t = orbit_reduce<mpf_class>({one, golden}, 40);
  int decay_ok = 0;
  for (std::size_t k = 1; k <= 40 && k < t.norms.size(); ++k) {
    double bound = std::pow(golden_decay, static_cast<double>(k) - 2);
    if (t.norms[k].get_d() <= bound) ++decay_ok;
  }
  r.pass = ok == 1000 && decay_ok == 40;
  r.detail = std::to_string(ok) + "/1000 gcd exact, " + std::to_string(decay_ok) + "/40 steps within 0.62^(k-2)";
  return r;
}

// Order of the image of the generators in SL(2, Z/2).
std::size_t image_mod2(std::vector<RatMatrix> const& gens) {
  using M = std::array<int, 4>;
  auto reduce = [](RatMatrix const& m) {
    M out;
    for (int k = 0; k < 4; ++k) out[k] = static_cast<int>(floor_mod(m(k / 2, k % 2).get_num(), 2).get_si());
    return out;
  };
  auto mul = [](M const& a, M const& b) {
    return M{(a[0] * b[0] + a[1] * b[2]) % 2, (a[0] * b[1] + a[1] * b[3]) % 2, (a[2] * b[0] + a[3] * b[2]) % 2,
             (a[2] * b[1] + a[3] * b[3]) % 2};
  };
  std::set<M> group{M{1, 0, 0, 1}};
  std::vector<M> frontier(group.begin(), group.end());
  while (!frontier.empty()) {
    std::vector<M> next;
    for (auto const& x : frontier)
      for (auto const& g : gens)
        if (M y = mul(x, reduce(g)); group.insert(y).second) next.push_back(y);
    frontier = std::move(next);
  }
  return group.size();
}

// 8. Coset enumeration. The oracle for the Sanov pair: it generates the
// level-2 congruence subgroup, whose index is |SL(2, Z/2)| / |image| = 6 / 1.
Result cosets() {
  Result r;
  RatMatrix A{{1, 2}, {0, 1}}, B{{1, 0}, {2, 1}};
  std::size_t oracle = 6 / image_mod2({A, B});
  auto sanov = classify_psl2z_subgroup({A, B});
  auto full = classify_psl2z_subgroup({modular_s(), modular_t()});
  std::size_t budget = 20000;
  auto cyclic = classify_psl2z_subgroup({RatMatrix{{1, 1}, {0, 1}}}, budget);
  bool ok = sanov.kind == Psl2zIndex::Kind::FiniteIndex && sanov.index == oracle && oracle == 6 &&
            full.kind == Psl2zIndex::Kind::FiniteIndex && full.index == 1 &&
            cyclic.kind == Psl2zIndex::Kind::InfiniteIndexOrUnknown;
  r.pass = ok;
  r.detail = "Sanov index " + std::to_string(sanov.index) + " (oracle " + std::to_string(oracle) + "), full " +
             std::to_string(full.index) + ", parabolic cyclic " +
             (cyclic.kind == Psl2zIndex::Kind::FiniteIndex ? "finite?!" : "budget exhausted") + " after " +
             std::to_string(cyclic.cosets_defined) + " cosets";
  return r;
}

// 9. Drift seminorm convergence and foliation kernels.
Result drift() {
  Result r;
  RatMatrix D{{2, 0}, {0, make_rational(1, 2)}}, G{{2, 1}, {1, 1}};
  MatrixWord one{{0, 1}};
  std::mt19937_64 rng(corpus_seed);
  std::normal_distribution<double> z;
  int ok = 0, total = 0;
  double worst = 0;
  for (auto const& M : {D, G})
    for (int trial = 0; trial < 20; ++trial) {
      ++total;
      auto e = drift_seminorm({M}, one, {z(rng), z(rng)}, 64);
      double lim = *e.limit, c = e.truncations.back();
      double rel = lim > 0 ? std::fabs(lim - c) / lim : std::fabs(c);
      worst = std::max(worst, rel);
      if (rel <= drift_tolerance) ++ok;
    }
  double golden = (1 + std::sqrt(5.0)) / 2;
  auto sine = [](Eigen::VectorXd const& b, Eigen::Vector2d v) {
    v.normalize();
    return std::fabs(b(0) * v(1) - b(1) * v(0));
  };
  auto kd = foliation_kernel({D}, one), kg = foliation_kernel({G}, one);
  double angle_d = kd.cols() == 1 ? sine(kd.col(0), {0, 1}) : 1;
  double angle_g = kg.cols() == 1 ? sine(kg.col(0), {1, -golden}) : 1;
  r.pass = ok == total && angle_d <= angle_tolerance && angle_g <= angle_tolerance;
  r.detail = std::to_string(ok) + "/" + std::to_string(total) + fmt(" within 1%% at k=64 (worst %.2e)", worst) +
             fmt(", kernel angles %.1e", angle_d) + fmt(" and %.1e", angle_g);
  return r;
}

// Random graph of groups for the corpus.
GraphOfGroups random_gog(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_int_distribution<long> small(1, 4), sign(0, 1);
  auto signed_small = [&] { return small(rng) * (sign(rng) ? 1 : -1); };
  switch (kind(rng)) {
    case 0:
      return bs(signed_small(), signed_small());
    case 1: {
      GraphOfGroups g;
      g.rank = 1;
      g.vertices = {"u", "v"};
      g.edges.push_back({"e0", "u", "v", IntMatrix{{Integer(signed_small())}}, IntMatrix{{Integer(signed_small())}}});
      if (sign(rng))
        g.edges.push_back({"e1", "v", "v", IntMatrix{{Integer(signed_small())}}, IntMatrix{{Integer(signed_small())}}});
      return g;
    }
    case 2: {
      // Unimodular semidirect products over short words in elementary matrices.
      std::uniform_int_distribution<int> letter(0, 3), len(1, 3);
      IntMatrix m = IntMatrix::identity(2);
      std::array<IntMatrix, 4> el{IntMatrix{{1, 1}, {0, 1}}, IntMatrix{{1, 0}, {1, 1}}, IntMatrix{{0, -1}, {1, 0}},
                                  IntMatrix{{1, 0}, {0, -1}}};
      for (int k = len(rng); k > 0; --k) m = m * el[letter(rng)];
      return semidirect(2, {m});
    }
    default: {
      std::vector<IntMatrix> gens;
      for (int k = 1 + static_cast<int>(sign(rng)); k > 0; --k) gens.push_back(IntMatrix{{Integer(sign(rng) ? 1 : -1)}});
      return semidirect(1, gens);
    }
  }
}

// 10. Exclusivity and depth stability on a random corpus.
Result corpus_properties() {
  Result r;
  std::mt19937_64 rng(corpus_seed);
  int exclusive = 0, stable = 0, decided = 0;
  for (int k = 0; k < corpus_size; ++k) {
    GraphOfGroups g = random_gog(rng);
    std::optional<TrichotomyKind> settled;
    bool excl = true, stab = true;
    for (int depth = 2; depth <= 6; ++depth) {
      auto v = classify(g, depth);
      auto cert = v.evidence.certified();
      if (cert.size() > 1 || (!cert.empty() && cert.front() != v.kind)) excl = false;
      if (v.kind == TrichotomyKind::Parabolic && !(v.form && v.form->strict)) excl = false;
      if (settled && v.kind != *settled) stab = false;
      if (!settled && v.kind != TrichotomyKind::Undetermined) settled = v.kind;
    }
    exclusive += excl;
    stable += stab;
    decided += settled.has_value();
  }
  r.pass = exclusive == corpus_size && stable == corpus_size;
  r.detail = std::to_string(exclusive) + "/" + std::to_string(corpus_size) + " exclusive, " + std::to_string(stable) +
             "/" + std::to_string(corpus_size) + " stable over depths 2..6 (" + std::to_string(decided) +
             " decided)";
  return r;
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<Result()>>> criteria{
      {"BS trichotomy table", bs_table},
      {"BS holonomy oracle", bs_holonomy},
      {"rank-one Hausdorff classes", gl1_classes},
      {"Heisenberg nontriviality", heisenberg},
      {"primitive soundness", primitive_soundness},
      {"growth dichotomy", growth},
      {"orbit reduction oracles", orbit},
      {"coset enumeration", cosets},
      {"seminorm convergence", drift},
      {"trichotomy corpus properties", corpus_properties},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Result r;
    try {
      r = criteria[k].second();
    } catch (std::exception const& e) {
      r = {false, std::string("threw: ") + e.what()};
    }
    failures += !r.pass;
    std::printf("%s %2zu %s: %s\n", r.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), r.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
