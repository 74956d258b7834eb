#pragma once

#include <json.hpp>

#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bundle_lab.hpp"
#include "graph_of_groups.hpp"
#include "linf_cohomology.hpp"
#include "subgroup_analysis.hpp"

namespace coarsebundle {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Scalars and matrices.

// "p", "p/q", or a decimal such as "-0.125" or "1e-3".
inline Rational parse_decimal(std::string const& text) {
  if (text.find_first_of(".eE") == std::string::npos) return parse_rational(text);
  std::size_t pos = 0;
  bool neg = false;
  if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) neg = text[pos++] == '-';
  std::string digits;
  long scale = 0;
  bool dot = false, any = false;
  for (; pos < text.size() && text[pos] != 'e' && text[pos] != 'E'; ++pos) {
    char c = text[pos];
    if (c == '.' && !dot) {
      dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digits += c;
      any = true;
      if (dot) --scale;
    } else {
      throw ParseError("decimal '" + text + "'");
    }
  }
  if (!any) throw ParseError("decimal '" + text + "'");
  if (pos < text.size()) {
    std::string ex = text.substr(pos + 1);
    if (ex.empty() || ex.size() > 6) throw ParseError("decimal exponent in '" + text + "'");
    try {
      std::size_t used = 0;
      scale += std::stol(ex, &used);
      if (used != ex.size()) throw ParseError("decimal exponent in '" + text + "'");
    } catch (std::logic_error const&) {
      throw ParseError("decimal exponent in '" + text + "'");
    }
  }
  Integer num(digits), ten = 10, p;
  mpz_pow_ui(p.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(scale < 0 ? -scale : scale));
  Rational q = scale < 0 ? make_rational(num, p) : Rational(num * p);
  return neg ? Rational(-q) : q;
}

inline json to_json(Integer const& z) {
  if (z.fits_slong_p()) return z.get_si();
  return z.get_str();
}

inline json to_json(Rational const& q) {
  if (q.get_den() == 1) return to_json(q.get_num());
  return q.get_str();
}

// Integers, "p/q" strings, and (when allowed) binary floats taken exactly.
inline Rational rational_from_json(json const& j, bool allow_float = false) {
  if (j.is_number_integer()) return Rational(Integer(j.dump()));
  if (j.is_string()) return parse_decimal(j.get<std::string>());
  if (j.is_number_float()) {
    if (!allow_float) throw ParseError("float " + j.dump() + " where an exact value is required");
    return Rational(j.get<double>());
  }
  throw ParseError("expected a number, got " + j.dump());
}

inline Integer integer_from_json(json const& j) {
  Rational q = rational_from_json(j);
  if (q.get_den() != 1) throw ParseError("expected an integer, got " + j.dump());
  return q.get_num();
}

inline long long_from_json(json const& j) {
  Integer z = integer_from_json(j);
  if (!z.fits_slong_p()) throw ParseError("integer out of range: " + j.dump());
  return z.get_si();
}

template <class T>
json to_json(Matrix<T> const& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.size(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline RatMatrix rat_matrix_from_json(json const& j) {
  if (!j.is_array() || j.empty()) throw ParseError("matrix must be a nonempty array of rows");
  RatMatrix m(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != j.size()) throw ParseError("matrix must be square");
    for (std::size_t k = 0; k < j.size(); ++k) m(i, k) = rational_from_json(j[i][k]);
  }
  return m;
}

inline IntMatrix int_matrix_from_json(json const& j) {
  RatMatrix m = rat_matrix_from_json(j);
  if (!is_integral(m)) throw ParseError("matrix must be integral");
  return to_integer(m);
}

inline json parse_json_text(std::string const& text, std::string const& what = "input") {
  try {
    return json::parse(text);
  } catch (json::parse_error const& e) {
    throw ParseError(what + ": " + e.what());
  }
}

inline json read_json_file(std::string const& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

namespace detail {

inline json const& field(json const& j, char const* key) {
  if (!j.is_object()) throw ParseError(std::string("expected an object holding '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing field '") + key + "'");
  return *it;
}

inline std::string string_field(json const& j, char const* key) {
  auto const& v = field(j, key);
  if (!v.is_string()) throw ParseError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

inline std::size_t size_field(json const& j, char const* key) {
  long v = long_from_json(field(j, key));
  if (v < 0) throw ParseError(std::string("field '") + key + "' must be nonnegative");
  return static_cast<std::size_t>(v);
}

inline std::vector<long> long_list(json const& j) {
  if (!j.is_array()) throw ParseError("expected an array of integers");
  std::vector<long> out;
  for (auto const& x : j) out.push_back(long_from_json(x));
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Graph of groups documents.

inline GraphOfGroups gog_from_json(json const& j) {
  GraphOfGroups g;
  long rank = long_from_json(detail::field(j, "rank"));
  if (rank <= 0) throw ParseError("rank must be positive");
  g.rank = static_cast<std::size_t>(rank);
  for (auto const& v : detail::field(j, "vertices")) {
    if (!v.is_string()) throw ParseError("vertex names must be strings");
    g.vertices.push_back(v.get<std::string>());
  }
  auto const& edges = detail::field(j, "edges");
  if (!edges.is_array()) throw ParseError("'edges' must be an array");
  for (auto const& e : edges)
    g.edges.push_back({detail::string_field(e, "id"), detail::string_field(e, "from"), detail::string_field(e, "to"),
                       int_matrix_from_json(detail::field(e, "incl_from")),
                       int_matrix_from_json(detail::field(e, "incl_to"))});
  validate(g);
  return g;
}

inline json to_json(GraphOfGroups const& g) {
  json edges = json::array();
  for (auto const& e : g.edges)
    edges.push_back({{"id", e.id}, {"from", e.iota}, {"to", e.tau},
                     {"incl_from", to_json(e.incl_iota)}, {"incl_to", to_json(e.incl_tau)}});
  return {{"rank", g.rank}, {"vertices", g.vertices}, {"edges", edges}};
}

// ---------------------------------------------------------------------------
// Complexes and cochains.

inline BaseComplex complex_from_json(json const& j) {
  if (j.contains("kind")) {
    std::string kind = detail::string_field(j, "kind");
    if (kind != "grid") throw ParseError("unknown complex kind '" + kind + "'");
    return grid_complex(detail::size_field(j, "nx"), detail::size_field(j, "ny"));
  }
  BaseComplex cx;
  cx.vertex_count = detail::size_field(j, "vertices");
  for (auto const& e : detail::field(j, "edges")) {
    if (!e.is_array() || e.size() != 2) throw ParseError("an edge is a pair [from, to]");
    long a = long_from_json(e[0]), b = long_from_json(e[1]);
    if (a < 0 || b < 0) throw ParseError("vertex indices are nonnegative");
    cx.edges.push_back({static_cast<std::size_t>(a), static_cast<std::size_t>(b)});
  }
  if (j.contains("faces"))
    for (auto const& f : j["faces"]) cx.faces.push_back(detail::long_list(f));
  if (j.contains("basepoint")) cx.basepoint = detail::size_field(j, "basepoint");
  validate(cx);
  return cx;
}

inline json to_json(BaseComplex const& cx) {
  if (cx.is_grid()) return {{"kind", "grid"}, {"nx", cx.grid_nx}, {"ny", cx.grid_ny}};
  json edges = json::array();
  for (auto const& e : cx.edges) edges.push_back({e.from, e.to});
  return {{"vertices", cx.vertex_count}, {"edges", edges}, {"faces", cx.faces}, {"basepoint", cx.basepoint}};
}

struct CochainDocument {
  int degree = 1;
  std::size_t dim = 1;
  bool exact = true;
  std::string builtin;                         // "heisenberg" or empty
  std::optional<std::vector<Rational>> constant;  // same value on every cell
  std::vector<std::vector<Rational>> values;   // per edge or face
};

inline CochainDocument cochain_from_json(json const& j) {
  CochainDocument d;
  d.degree = static_cast<int>(long_from_json(detail::field(j, "degree")));
  if (d.degree != 1 && d.degree != 2) throw ParseError("degree must be 1 or 2");
  if (j.contains("mode")) {
    std::string mode = detail::string_field(j, "mode");
    if (mode != "exact" && mode != "float") throw ParseError("mode must be 'exact' or 'float'");
    d.exact = mode == "exact";
  }
  d.dim = j.contains("dim") ? detail::size_field(j, "dim") : 1;
  if (d.dim == 0) throw ParseError("dim must be positive");
  auto entry = [&](json const& v) -> std::vector<Rational> {
    std::vector<Rational> out;
    if (v.is_array()) {
      for (auto const& x : v) out.push_back(rational_from_json(x, !d.exact));
    } else {
      out.push_back(rational_from_json(v, !d.exact));
    }
    if (out.size() != d.dim) throw ParseError("cochain entry has " + std::to_string(out.size()) + " coordinates");
    return out;
  };
  int sources = int(j.contains("builtin")) + int(j.contains("constant")) + int(j.contains("values"));
  if (sources != 1) throw ParseError("a cochain needs exactly one of 'builtin', 'constant', 'values'");
  if (j.contains("builtin")) {
    d.builtin = detail::string_field(j, "builtin");
    if (d.builtin != "heisenberg") throw ParseError("unknown builtin cochain '" + d.builtin + "'");
    if (d.degree != 1 || d.dim != 1) throw ParseError("the heisenberg cochain has degree 1 and dim 1");
  } else if (j.contains("constant")) {
    d.constant = entry(j["constant"]);
  } else {
    if (!j["values"].is_array()) throw ParseError("'values' must be an array");
    for (auto const& v : j["values"]) d.values.push_back(entry(v));
  }
  return d;
}

inline json to_json(CochainDocument const& d) {
  json j{{"degree", d.degree}, {"dim", d.dim}, {"mode", d.exact ? "exact" : "float"}};
  auto entry = [](std::vector<Rational> const& v) {
    json a = json::array();
    for (auto const& x : v) a.push_back(to_json(x));
    return a;
  };
  if (!d.builtin.empty()) {
    j["builtin"] = d.builtin;
  } else if (d.constant) {
    j["constant"] = entry(*d.constant);
  } else {
    json vs = json::array();
    for (auto const& v : d.values) vs.push_back(entry(v));
    j["values"] = vs;
  }
  return j;
}

namespace detail {

template <class T>
T scalar_from(Rational const& q) {
  if constexpr (std::is_same_v<T, Rational>)
    return q;
  else
    return T(q.get_d());
}

template <class T>
std::vector<std::vector<T>> cells(CochainDocument const& d, std::size_t count) {
  std::vector<std::vector<T>> out;
  if (d.constant) {
    std::vector<T> row;
    for (auto const& x : *d.constant) row.push_back(scalar_from<T>(x));
    out.assign(count, row);
    return out;
  }
  if (d.values.size() != count)
    throw ParseError("cochain has " + std::to_string(d.values.size()) + " entries, the complex needs " +
                     std::to_string(count));
  for (auto const& v : d.values) {
    std::vector<T> row;
    for (auto const& x : v) row.push_back(scalar_from<T>(x));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace detail

template <class T>
Cochain1<T> materialize1(BaseComplex const& cx, CochainDocument const& d) {
  if (d.degree != 1) throw InvalidArgument("a 1-cochain is required");
  if (d.builtin == "heisenberg") return heisenberg_cochain<T>(cx);
  return {d.dim, detail::cells<T>(d, cx.edges.size())};
}

// Degree-1 documents are differentiated.
template <class T>
Cochain2<T> materialize2(BaseComplex const& cx, CochainDocument const& d) {
  if (d.degree == 1) return d1(cx, materialize1<T>(cx, d));
  return {d.dim, detail::cells<T>(d, cx.faces.size())};
}

// A file may hold {"complex": ..., "cochain": ...} or a bare cochain.
struct CocycleInput {
  std::optional<BaseComplex> complex;
  CochainDocument cochain;
};

inline CocycleInput cocycle_input_from_json(json const& j) {
  CocycleInput in;
  if (j.contains("cochain")) {
    if (j.contains("complex")) in.complex = complex_from_json(j["complex"]);
    in.cochain = cochain_from_json(j["cochain"]);
  } else {
    in.cochain = cochain_from_json(j);
  }
  return in;
}

// ---------------------------------------------------------------------------
// Gluing specs.

inline FiberMap fiber_map_from_json(json const& j, std::size_t fiber_dim) {
  std::string kind = detail::string_field(j, "kind");
  auto shift = [&] {
    auto s = detail::long_list(detail::field(j, "shift"));
    if (s.size() != fiber_dim) throw ParseError("shift length must equal fiber_dim");
    return s;
  };
  auto matrix = [&] {
    IntMatrix m = int_matrix_from_json(detail::field(j, "matrix"));
    if (m.size() != fiber_dim) throw ParseError("matrix size must equal fiber_dim");
    return m;
  };
  if (kind == "translation") return FiberMap::translation(shift());
  if (kind == "linear") return FiberMap::linear(matrix());
  if (kind == "affine") {
    IntMatrix m = matrix();
    return FiberMap::affine(std::move(m), shift());
  }
  if (kind == "tabulated") {
    if (fiber_dim != 1) throw ParseError("tabulated maps need fiber_dim 1");
    std::vector<std::pair<long, long>> t;
    for (auto const& p : detail::field(j, "table")) {
      if (!p.is_array() || p.size() != 2) throw ParseError("table entries are pairs [x, y]");
      t.emplace_back(long_from_json(p[0]), long_from_json(p[1]));
    }
    return FiberMap::tabulated(std::move(t));
  }
  if (kind == "phi") {
    if (fiber_dim != 1) throw ParseError("the phi family needs fiber_dim 1");
    return FiberMap::phi_family();
  }
  throw ParseError("unknown map kind '" + kind + "'");
}

inline json to_json(FiberMap const& m) {
  json j{{"kind", to_string(m.kind)}};
  if (m.kind == FiberMap::Kind::Linear || m.kind == FiberMap::Kind::Affine) j["matrix"] = to_json(m.matrix);
  if (m.kind == FiberMap::Kind::Translation || m.kind == FiberMap::Kind::Affine) j["shift"] = m.shift;
  if (m.kind == FiberMap::Kind::Tabulated) {
    json t = json::array();
    for (auto const& [x, y] : m.table) t.push_back({x, y});
    j["table"] = t;
  }
  return j;
}

inline GluingSpec gluing_spec_from_json(json const& j) {
  GluingSpec s;
  std::string base = detail::string_field(j, "base");
  s.fiber_dim = j.contains("fiber_dim") ? detail::size_field(j, "fiber_dim") : 1;
  if (s.fiber_dim == 0) throw ParseError("fiber_dim must be positive");
  if (base == "line" || base == "grid") {
    s.base = base == "line" ? GluingSpec::Base::Line : GluingSpec::Base::Grid;
    for (auto const& m : detail::field(j, "maps")) s.maps.push_back(fiber_map_from_json(m, s.fiber_dim));
    std::size_t need = base == "line" ? 1 : 2;
    if (s.maps.size() != need) throw ParseError(base + " bases need " + std::to_string(need) + " maps");
  } else if (base == "graph") {
    s.base = GluingSpec::Base::Graph;
    s.graph_vertices = detail::size_field(j, "graph_vertices");
    for (auto const& e : detail::field(j, "graph_edges"))
      s.graph_edges.push_back({detail::size_field(e, "from"), detail::size_field(e, "to"),
                               fiber_map_from_json(detail::field(e, "map"), s.fiber_dim)});
  } else {
    throw ParseError("unknown base '" + base + "'");
  }
  return s;
}

inline json to_json(GluingSpec const& s) {
  json j;
  switch (s.base) {
    case GluingSpec::Base::Line: j["base"] = "line"; break;
    case GluingSpec::Base::Grid: j["base"] = "grid"; break;
    case GluingSpec::Base::Graph: j["base"] = "graph"; break;
  }
  j["fiber_dim"] = s.fiber_dim;
  if (s.base == GluingSpec::Base::Graph) {
    j["graph_vertices"] = s.graph_vertices;
    json edges = json::array();
    for (auto const& e : s.graph_edges) edges.push_back({{"from", e.from}, {"to", e.to}, {"map", to_json(e.map)}});
    j["graph_edges"] = edges;
  } else {
    json maps = json::array();
    for (auto const& m : s.maps) maps.push_back(to_json(m));
    j["maps"] = maps;
  }
  return j;
}

inline std::vector<Interval> intervals_from_json(json const& j) {
  std::vector<Interval> out;
  if (!j.is_array()) throw ParseError("intervals are an array of [lo, hi]");
  for (auto const& p : j) {
    if (!p.is_array() || p.size() != 2) throw ParseError("an interval is a pair [lo, hi]");
    Interval iv{long_from_json(p[0]), long_from_json(p[1])};
    if (iv.lo > iv.hi) throw ParseError("empty interval");
    out.push_back(iv);
  }
  return out;
}

inline json to_json(std::vector<Interval> const& v) {
  json a = json::array();
  for (auto const& iv : v) a.push_back({iv.lo, iv.hi});
  return a;
}

// Gluing spec plus optional "windows", "origin" and "rmax".
struct BundleDocument {
  GluingSpec spec;
  std::optional<Windows> windows;
  std::optional<TotalPoint> origin;
  std::optional<std::size_t> rmax;
};

inline BundleDocument bundle_from_json(json const& j) {
  BundleDocument d;
  d.spec = gluing_spec_from_json(j.contains("spec") ? j["spec"] : j);
  if (j.contains("windows")) {
    auto const& w = j["windows"];
    Windows win;
    if (w.contains("base")) win.base = intervals_from_json(w["base"]);
    win.fiber = intervals_from_json(detail::field(w, "fiber"));
    d.windows = win;
  }
  if (j.contains("origin")) {
    auto const& o = j["origin"];
    d.origin = TotalPoint{detail::long_list(detail::field(o, "fiber")), detail::long_list(detail::field(o, "base"))};
  }
  if (j.contains("rmax")) d.rmax = detail::size_field(j, "rmax");
  return d;
}

// ---------------------------------------------------------------------------
// Subgroups and vectors.

// {"generators": [...]} or a bare list of matrices.
inline Gl2Subgroup subgroup_from_json(json const& j) {
  json const& list = j.is_object() ? detail::field(j, "generators") : j;
  if (!list.is_array() || list.empty()) throw ParseError("need a nonempty list of generator matrices");
  Gl2Subgroup g;
  for (auto const& m : list) g.push_back(rat_matrix_from_json(m));
  for (auto const& m : g)
    if (m.size() != g.front().size()) throw RankMismatch("generators of different sizes");
  return g;
}

inline json to_json(Gl2Subgroup const& g) {
  json a = json::array();
  for (auto const& m : g) a.push_back(to_json(m));
  return {{"generators", a}};
}

// Whitespace- or comma-separated rationals, e.g. "4 6" or "1/2, 3".
inline std::vector<Rational> parse_vector(std::string const& text) {
  std::vector<Rational> out;
  std::string tok;
  auto flush = [&] {
    if (!tok.empty()) out.push_back(parse_decimal(tok));
    tok.clear();
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',')
      flush();
    else
      tok += c;
  }
  flush();
  return out;
}

// ---------------------------------------------------------------------------
// Run reports.

struct RunReport {
  std::string command;
  std::uint64_t seed = 0;
  json parameters = json::object();
  json verdict = json::object();
  json evidence = json::object();
  std::optional<double> timing;  // seconds
};

inline json to_json(RunReport const& r) {
  json j{{"command", r.command}, {"seed", r.seed}, {"parameters", r.parameters},
         {"verdict", r.verdict}, {"evidence", r.evidence}};
  if (r.timing) j["timing"] = {{"seconds", *r.timing}};
  return j;
}

inline RunReport report_from_json(json const& j) {
  RunReport r;
  auto const& cmd = detail::field(j, "command");
  if (!cmd.is_string() || cmd.get<std::string>().empty()) throw ParseError("'command' must be a nonempty string");
  r.command = cmd.get<std::string>();
  auto const& seed = detail::field(j, "seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
    throw ParseError("'seed' must be a nonnegative integer");
  r.seed = seed.get<std::uint64_t>();
  for (char const* key : {"parameters", "verdict", "evidence"})
    if (!detail::field(j, key).is_object()) throw ParseError(std::string("'") + key + "' must be an object");
  r.parameters = j["parameters"];
  r.verdict = j["verdict"];
  r.evidence = j["evidence"];
  if (!detail::field(r.verdict, "kind").is_string()) throw ParseError("'verdict.kind' must be a string");
  if (j.contains("timing")) {
    auto const& s = detail::field(j["timing"], "seconds");
    if (!s.is_number()) throw ParseError("'timing.seconds' must be a number");
    r.timing = s.get<double>();
  }
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "command" && it.key() != "seed" && it.key() != "parameters" && it.key() != "verdict" &&
        it.key() != "evidence" && it.key() != "timing")
      throw ParseError("unexpected report field '" + it.key() + "'");
  return r;
}

}  // namespace coarsebundle
