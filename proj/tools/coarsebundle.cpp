// Command-line front end. Exit codes: 0 decided, 2 undetermined, 1 error.

#include <CLI11.hpp>

#include <coarsebundle/coarsebundle.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

using namespace coarsebundle;

namespace {

constexpr int exit_decided = 0, exit_error = 1, exit_undetermined = 2;

struct Outcome {
  RunReport report;
  std::string text;
  std::string note;  // stderr companion to text output
  int code = exit_decided;
};

struct Globals {
  bool json = false;
  bool timing = false;
  std::uint64_t seed = 0;
};

json scalar(Rational const& q) { return to_json(q); }
json scalar(double x) { return x; }

template <class T>
std::string show(T const& x) {
  json j = scalar(x);
  return j.is_string() ? j.get<std::string>() : j.dump();
}

template <class T>
json vec(std::vector<T> const& v) {
  json a = json::array();
  for (auto const& x : v) a.push_back(scalar(x));
  return a;
}

template <class T>
std::string show_vec(std::vector<T> const& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + show(v[i]);
  return s;
}

// ---------------------------------------------------------------------------
// classify, qi-compare

json coverage_json(EdgeCoverage const& c) {
  return {{"edge", c.edge},
          {"sampled", c.sampled},
          {"iota_covered_fraction", c.iota_side.covered_fraction},
          {"tau_covered_fraction", c.tau_side.covered_fraction},
          {"iota_worst_gap", c.iota_side.worst_gap},
          {"tau_worst_gap", c.tau_side.worst_gap}};
}

json verdict_json(TrichotomyVerdict const& v) {
  json j{{"kind", to_string(v.kind)}};
  if (v.form) {
    j["endomorphism"] = to_json(v.form->endomorphism);
    j["strict"] = v.form->strict;
  }
  j["reason"] = v.reason;
  return j;
}

json evidence_json(TrichotomyEvidence const& e) {
  json j{{"depth", e.depth}, {"R", e.R}, {"rule", e.rule}, {"holonomy_class", e.holonomy_class}};
  j["finite_image"] = {{"decided", e.finite_image.decided}, {"finite", e.finite_image.finite},
                       {"order", e.finite_image.order}};
  j["unimodular_inclusions"] = e.unimodular_inclusions;
  if (e.freeness) {
    json f{{"kind", to_string(e.freeness->kind)}, {"depth", e.freeness->depth}};
    if (e.freeness->kind == FreenessCertificate::Kind::RelationFound) f["relation"] = to_string(e.freeness->relation);
    j["freeness"] = f;
  }
  json cov = json::array();
  for (auto const& c : e.coverage) cov.push_back(coverage_json(c));
  j["coverage"] = cov;
  json cert = json::array();
  for (auto k : e.certified()) cert.push_back(to_string(k));
  j["certified"] = cert;
  return j;
}

std::string verdict_line(TrichotomyVerdict const& v) {
  std::string s = to_string(v.kind);
  if (v.form) s += ", endomorphism " + to_string(v.form->endomorphism);
  return s;
}

Outcome cmd_classify(std::string const& file, int depth, double radius) {
  GraphOfGroups g = gog_from_json(read_json_file(file));
  TrichotomyVerdict v = classify(g, depth, radius);
  Outcome o;
  o.report.command = "classify";
  o.report.parameters = {{"file", file}, {"depth", depth}, {"radius", radius}};
  o.report.verdict = verdict_json(v);
  o.report.evidence = evidence_json(v.evidence);
  o.text = verdict_line(v) + "\nreason: " + v.reason + "\n";
  o.code = v.kind == TrichotomyKind::Undetermined ? exit_undetermined : exit_decided;
  return o;
}

Outcome cmd_qi_compare(std::string const& f1, std::string const& f2, int depth, double radius) {
  GraphOfGroups g1 = gog_from_json(read_json_file(f1)), g2 = gog_from_json(read_json_file(f2));
  QiComparison q = qi_compare(g1, g2, depth, radius);
  Outcome o;
  o.report.command = "qi-compare";
  o.report.parameters = {{"first", f1}, {"second", f2}, {"depth", depth}, {"radius", radius}};
  o.report.verdict = {{"kind", to_string(q.kind)}, {"reason", q.reason}};
  if (!q.endomorphisms.empty()) {
    json ends = json::array();
    for (auto const& m : q.endomorphisms) ends.push_back(to_json(m));
    o.report.verdict["endomorphisms"] = ends;
  }
  o.report.evidence = {{"first", verdict_json(q.first)}, {"second", verdict_json(q.second)}};
  o.text = to_string(q.kind) + "\nfirst: " + verdict_line(q.first) + "\nsecond: " + verdict_line(q.second) +
           "\nreason: " + q.reason + "\n";
  o.code = q.kind == QiComparison::Kind::Undetermined ? exit_undetermined : exit_decided;
  return o;
}

// ---------------------------------------------------------------------------
// cocycle

struct CocycleFiles {
  BaseComplex cx;
  std::vector<CochainDocument> cochains;
};

// Either [complex, cochain...] or [cochain...] with the complex embedded in the first.
CocycleFiles load_cocycle(std::vector<std::string> const& files, std::size_t cochains) {
  if (files.size() != cochains && files.size() != cochains + 1)
    throw InvalidArgument("expected " + std::to_string(cochains) + " cochain file(s) and an optional complex file");
  CocycleFiles out;
  std::size_t first = files.size() - cochains;
  std::optional<BaseComplex> cx;
  if (first == 1) cx = complex_from_json(read_json_file(files[0]));
  for (std::size_t k = first; k < files.size(); ++k) {
    CocycleInput in = cocycle_input_from_json(read_json_file(files[k]));
    if (!cx && in.complex) cx = in.complex;
    out.cochains.push_back(in.cochain);
  }
  if (!cx) throw InvalidArgument("no complex given");
  out.cx = *cx;
  return out;
}

std::size_t default_length_cap(BaseComplex const& cx) {
  return cx.is_grid() ? 2 * (cx.grid_nx + cx.grid_ny - 2) : 64;
}

json loop_json(Loop const& l) { return {{"length", l.length()}, {"steps", l.steps}}; }

template <class T>
void fill_triviality(Outcome& o, TrivialityVerdict<T> const& v, std::string const& kind) {
  o.report.verdict = {{"kind", kind}, {"triviality", to_string(v.kind)}, {"reason", v.reason}};
  json scan = json::array();
  for (auto const& row : v.scan)
    scan.push_back({{"length", row.length}, {"max_abs", scalar(row.max_abs)}, {"ratio", scalar(row.ratio)}});
  json scales = json::array();
  std::string lines;
  for (std::size_t k = 0; k < v.scales.size(); ++k) {
    scales.push_back({{"length", v.scales[k]}, {"cumulative_ratio", scalar(v.cumulative[k])},
                      {"witness", loop_json(v.witnesses[k])}});
    lines += "scale " + std::to_string(v.scales[k]) + " ratio " + show(v.cumulative[k]) + "\n";
  }
  o.report.evidence = {{"scan", scan}, {"scales", scales}};
  if (v.certificate)
    o.report.evidence["certificate"] = {{"C", scalar(v.certificate->C)},
                                        {"bound", scalar(v.certificate->bound)},
                                        {"bound_limit", scalar(v.bound_limit)}};
  o.text = kind + "\n" + lines + "reason: " + v.reason + "\n";
  o.code = v.kind == TrivialityKind::Unknown ? exit_undetermined : exit_decided;
}

template <class T>
Outcome cocycle_check(CocycleFiles const& in, std::size_t cap, std::uint64_t seed) {
  Outcome o;
  auto c = materialize2<T>(in.cx, in.cochains[0]);
  auto v = is_trivial(in.cx, c, cap, {}, seed);
  fill_triviality(o, v, to_string(v.kind));
  return o;
}

template <class T>
Outcome cocycle_compare(CocycleFiles const& in, RatMatrix const& M, std::size_t cap, std::uint64_t seed) {
  Outcome o;
  auto c1 = materialize2<T>(in.cx, in.cochains[0]), c2 = materialize2<T>(in.cx, in.cochains[1]);
  auto v = classes_equivalent_via(in.cx, c1, c2, M, cap, {}, seed);
  std::string kind = v.kind == TrivialityKind::Trivial      ? "Equivalent"
                     : v.kind == TrivialityKind::Nontrivial ? "NotEquivalent"
                                                            : "Unknown";
  fill_triviality(o, v, kind);
  return o;
}

template <class T>
Outcome cocycle_primitive(CocycleFiles const& in, Rational const& C) {
  Outcome o;
  auto a = materialize1<T>(in.cx, in.cochains[0]);
  T c = detail::scalar_from<T>(C);
  T limit = c * T(std::is_same_v<T, Rational> ? 4 : 6);
  try {
    auto p = primitive(in.cx, a, c);
    json f = json::array();
    std::string lines;
    for (std::size_t v = 0; v < p.f.size(); ++v) {
      f.push_back(vec(p.f[v]));
      lines += "f[" + std::to_string(v) + "] = " + show_vec(p.f[v]) + "\n";
    }
    o.report.verdict = {{"kind", "Primitive"}, {"C", scalar(p.C)}, {"bound", scalar(p.bound)},
                        {"bound_limit", scalar(limit)}, {"within_limit", p.bound <= limit}};
    o.report.evidence = {{"f", f}};
    o.text = "Primitive C=" + show(p.C) + " bound=" + show(p.bound) + " limit=" + show(limit) + "\n" + lines;
  } catch (PositiveCycle const& e) {
    o.report.verdict = {{"kind", "PositiveCycle"}, {"C", scalar(c)}, {"coordinate", e.coordinate}};
    auto sum = loop_sum(in.cx, a, e.loop.steps);
    o.report.evidence = {{"witness", loop_json(e.loop)}, {"loop_value", scalar(sum[e.coordinate])}};
    std::string steps;
    for (long s : e.loop.steps) steps += (steps.empty() ? "" : " ") + std::to_string(s);
    o.text = "PositiveCycle coordinate " + std::to_string(e.coordinate) + " length " +
             std::to_string(e.loop.length()) + " value " + show(sum[e.coordinate]) + "\nwitness: " + steps + "\n";
  }
  return o;
}

// ---------------------------------------------------------------------------
// bundle

Interval parse_interval(std::string const& s) {
  auto v = parse_vector(s);
  if (v.size() != 2 || v[0].get_den() != 1 || v[1].get_den() != 1 || v[0] > v[1])
    throw InvalidArgument("window '" + s + "' must be 'lo,hi' with integers lo <= hi");
  return {v[0].get_num().get_si(), v[1].get_num().get_si()};
}

std::vector<long> parse_longs(std::string const& s) {
  std::vector<long> out;
  for (auto const& q : parse_vector(s)) {
    if (q.get_den() != 1 || !q.get_num().fits_slong_p()) throw InvalidArgument("'" + s + "' must list integers");
    out.push_back(q.get_num().get_si());
  }
  return out;
}

struct BundleArgs {
  std::string file;
  std::vector<std::string> base_windows, fiber_windows;
  std::string origin_base, origin_fiber;
  std::size_t rmax = 0;
};

struct LoadedBundle {
  BundleDocument doc;
  Windows windows;
  TotalPoint origin;
};

LoadedBundle load_bundle(BundleArgs const& a) {
  LoadedBundle b;
  b.doc = bundle_from_json(read_json_file(a.file));
  if (b.doc.windows) b.windows = *b.doc.windows;
  if (!a.base_windows.empty()) {
    b.windows.base.clear();
    for (auto const& s : a.base_windows) b.windows.base.push_back(parse_interval(s));
  }
  if (!a.fiber_windows.empty()) {
    b.windows.fiber.clear();
    for (auto const& s : a.fiber_windows) b.windows.fiber.push_back(parse_interval(s));
  }
  if (b.windows.fiber.empty()) throw InvalidArgument("no fiber window given");
  auto const& spec = b.doc.spec;
  std::size_t base_dims = spec.base == GluingSpec::Base::Line ? 1 : spec.base == GluingSpec::Base::Grid ? 2 : 1;
  b.origin = b.doc.origin ? *b.doc.origin : TotalPoint{std::vector<long>(spec.fiber_dim, 0),
                                                       std::vector<long>(base_dims, 0)};
  if (!a.origin_base.empty()) b.origin.base = parse_longs(a.origin_base);
  if (!a.origin_fiber.empty()) b.origin.fiber = parse_longs(a.origin_fiber);
  return b;
}

json windows_json(Windows const& w) { return {{"base", to_json(w.base)}, {"fiber", to_json(w.fiber)}}; }

json bundle_parameters(BundleArgs const& a, LoadedBundle const& b) {
  return {{"file", a.file}, {"windows", windows_json(b.windows)},
          {"origin", {{"fiber", b.origin.fiber}, {"base", b.origin.base}}}};
}

Outcome cmd_bundle_build(BundleArgs const& a) {
  LoadedBundle b = load_bundle(a);
  TotalSpaceBall ball = build_total_space(b.doc.spec, b.windows, b.origin);
  std::vector<TotalSpaceBall::Neighbor> nb;
  bool complete = ball.neighbors(ball.origin(), nb);
  Outcome o;
  o.report.command = "bundle build";
  o.report.parameters = bundle_parameters(a, b);
  o.report.verdict = {{"kind", "Built"}, {"window_vertices", ball.vertex_count()}};
  o.report.evidence = {{"origin_degree", nb.size()},
                       {"origin_complete", complete},
                       {"origin_boundary", ball.is_boundary(ball.origin())}};
  o.text = "Built " + std::to_string(ball.vertex_count()) + " window vertices, origin degree " +
           std::to_string(nb.size()) + "\n";
  return o;
}

Outcome cmd_bundle_grow(BundleArgs const& a) {
  LoadedBundle b = load_bundle(a);
  std::size_t rmax = a.rmax ? a.rmax : b.doc.rmax.value_or(10);
  TotalSpaceBall ball = build_total_space(b.doc.spec, b.windows, b.origin);
  GrowthSeries s = ball_growth(ball, rmax);
  Outcome o;
  o.report.command = "bundle grow";
  o.report.parameters = bundle_parameters(a, b);
  o.report.parameters["rmax"] = rmax;
  json counts = json::array(), clipped = json::array();
  for (std::size_t r = 0; r < s.counts.size(); ++r) {
    counts.push_back(s.counts[r]);
    clipped.push_back(bool(s.clipped[r]));
  }
  o.report.evidence = {{"counts", counts}, {"clipped", clipped}};
  o.text = growth_csv(s);
  try {
    GrowthClass g = growth_class(s);
    o.report.verdict = {{"kind", to_string(g.kind)},          {"degree", g.degree},
                        {"rate", g.rate},                      {"r2_polynomial", g.r2_polynomial},
                        {"r2_exponential", g.r2_exponential}, {"radii", g.radii}};
    char buf[160];
    std::snprintf(buf, sizeof buf, "growth: %s degree=%.4f rate=%.4f r2_polynomial=%.4f r2_exponential=%.4f\n",
                  to_string(g.kind).c_str(), g.degree, g.rate, g.r2_polynomial, g.r2_exponential);
    o.note = buf;
    o.code = g.kind == GrowthClass::Kind::Undetermined ? exit_undetermined : exit_decided;
  } catch (TooFewRadii const& e) {
    o.report.verdict = {{"kind", "Undetermined"}, {"reason", e.what()}};
    o.note = std::string("growth: Undetermined (") + e.what() + ")\n";
    o.code = exit_undetermined;
  }
  return o;
}

// ---------------------------------------------------------------------------
// subgroup

json gl1_json(Gl1Class const& c) {
  json j{{"kind", to_string(c.kind)}};
  if (c.kind == Gl1Class::Kind::Discrete) j["generator"] = to_json(c.generator);
  return j;
}

std::string gl1_line(Gl1Class const& c) {
  return c.kind == Gl1Class::Kind::Discrete ? "Discrete(" + c.generator.get_str() + ")" : to_string(c.kind);
}

std::string hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string class_line(HausdorffClass const& c) {
  std::string s = to_string(c.sl2);
  if (c.sl2 == Sl2Kind::Lattice) s += "(" + std::to_string(c.lattice_index) + ")";
  if (c.sl2 == Sl2Kind::HyperbolicElementary) s += "(" + json(c.translation_length).dump() + ")";
  if (c.sl2 == Sl2Kind::NonElementaryCantor) s += "(" + hex(c.cantor_hash) + ")";
  return s;
}

json class_json(HausdorffClass const& c) {
  json j{{"kind", to_string(c.sl2)}};
  if (c.sl2 == Sl2Kind::Lattice) j["lattice_index"] = c.lattice_index;
  if (c.sl2 == Sl2Kind::HyperbolicElementary) j["translation_length"] = c.translation_length;
  if (c.sl2 == Sl2Kind::NonElementaryCantor) j["cantor_hash"] = hex(c.cantor_hash);
  j["det_part"] = gl1_json(c.det_part);
  if (c.hom_graph) j["hom_graph"] = c.hom_graph->descriptor();
  j["certificate"] = c.certificate;
  return j;
}

std::vector<Rational> scalars_of(Gl2Subgroup const& g) {
  std::vector<Rational> out;
  for (auto const& m : g) out.push_back(m(0, 0));
  return out;
}

Outcome cmd_subgroup_class(std::string const& file, HausdorffOptions const& opt) {
  Gl2Subgroup g = subgroup_from_json(read_json_file(file));
  Outcome o;
  o.report.command = "subgroup class";
  o.report.parameters = {{"file", file}, {"coset_budget", opt.coset_budget}, {"pingpong_depth", opt.pingpong_depth}};
  if (g.front().size() == 1) {
    Gl1Class c = hausdorff_class_gl1(scalars_of(g));
    o.report.verdict = gl1_json(c);
    o.text = gl1_line(c) + "\n";
    return o;
  }
  if (g.front().size() != 2) throw RankUnsupported("subgroup classes need 1x1 or 2x2 generators");
  HausdorffClass c = hausdorff_class(g, opt);
  o.report.verdict = class_json(c);
  o.text = class_line(c) + "\ndet: " + gl1_line(c.det_part) + "\ncertificate: " + c.certificate + "\n";
  o.code = c.sl2 == Sl2Kind::Unknown ? exit_undetermined : exit_decided;
  return o;
}

Outcome cmd_subgroup_equiv(std::string const& f1, std::string const& f2, std::string const& conj,
                           HausdorffOptions const& opt) {
  Gl2Subgroup g1 = subgroup_from_json(read_json_file(f1)), g2 = subgroup_from_json(read_json_file(f2));
  Outcome o;
  o.report.command = "subgroup equiv";
  o.report.parameters = {{"first", f1}, {"second", f2}};
  if (g1.front().size() == 1 && g2.front().size() == 1) {
    Gl1Class c1 = hausdorff_class_gl1(scalars_of(g1)), c2 = hausdorff_class_gl1(scalars_of(g2));
    std::string kind = c1 == c2 ? "Equivalent" : "NotEquivalent";
    o.report.verdict = {{"kind", kind}};
    o.report.evidence = {{"first", gl1_json(c1)}, {"second", gl1_json(c2)}};
    o.text = kind + "\nfirst: " + gl1_line(c1) + "\nsecond: " + gl1_line(c2) + "\n";
    return o;
  }
  std::optional<RatMatrix> M;
  if (!conj.empty()) {
    M = rat_matrix_from_json(parse_json_text(conj, "--conjugator"));
    o.report.parameters["conjugator"] = to_json(*M);
  }
  Equivalence e = hausdorff_equivalent(g1, g2, M, opt);
  HausdorffClass c1 = hausdorff_class(g1, opt), c2 = hausdorff_class(g2, opt);
  o.report.verdict = {{"kind", to_string(e.kind)}, {"detail", e.detail}};
  o.report.evidence = {{"first", class_json(c1)}, {"second", class_json(c2)}};
  o.text = to_string(e.kind) + "\nfirst: " + class_line(c1) + "\nsecond: " + class_line(c2) + "\ndetail: " +
           e.detail + "\n";
  o.code = e.kind == Equivalence::Kind::Unknown ? exit_undetermined : exit_decided;
  return o;
}

Outcome cmd_subgroup_free(std::string const& file, int depth) {
  Gl2Subgroup g = subgroup_from_json(read_json_file(file));
  FreenessCertificate f = free_injectivity(g, depth);
  Outcome o;
  o.report.command = "subgroup free";
  o.report.parameters = {{"file", file}, {"depth", depth}};
  o.report.verdict = {{"kind", to_string(f.kind)}};
  std::string text = to_string(f.kind) + "\n";
  if (f.kind == FreenessCertificate::Kind::RelationFound) {
    o.report.verdict["relation"] = to_string(f.relation);
    text += "relation: " + to_string(f.relation) + "\n";
  }
  if (f.kind == FreenessCertificate::Kind::PingPong) {
    o.report.evidence = {{"cones", f.cones}, {"strict", f.strict}, {"gap", f.gap}};
    for (std::size_t k = 0; k < f.cones.size(); ++k) text += "cone " + std::to_string(k) + ": " + f.cones[k] + "\n";
  }
  o.report.evidence["depth"] = f.depth;
  o.text = text;
  o.code = f.kind == FreenessCertificate::Kind::Unknown ? exit_undetermined : exit_decided;
  return o;
}

Outcome cmd_subgroup_reduce(std::vector<std::string> const& values, std::size_t max_steps) {
  std::string joined;
  for (auto const& v : values) joined += v + " ";
  std::vector<Rational> v = parse_vector(joined);
  OrbitTrace<Rational> tr = orbit_reduce(v, max_steps);
  Outcome o;
  o.report.command = "subgroup reduce";
  o.report.parameters = {{"vector", vec(v)}, {"max_steps", max_steps}};
  std::string stop = tr.stop == OrbitTrace<Rational>::Stop::Terminal ? "Terminal" : "MaxSteps";
  json steps = json::array();
  std::vector<Rational> x = v;
  std::string text = "0: " + show_vec(x) + "\n";
  for (std::size_t k = 0; k < tr.steps.size(); ++k) {
    auto const& s = tr.steps[k];
    x[s.i] -= Rational(s.k) * x[s.j];
    steps.push_back({{"i", s.i}, {"j", s.j}, {"k", to_json(s.k)}, {"norm", scalar(s.norm)}, {"vector", vec(x)}});
    text += std::to_string(k + 1) + ": " + show_vec(x) + "\n";
  }
  o.report.verdict = {{"kind", stop}, {"final", vec(tr.current)}, {"norm", scalar(tr.norms.back())}};
  o.report.evidence = {{"steps", steps}, {"transform", to_json(tr.transform)}};
  o.text = text + stop + " " + show_vec(tr.current) + "\n";
  o.code = tr.stop == OrbitTrace<Rational>::Stop::Terminal ? exit_decided : exit_undetermined;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coarse bundles, graphs of abelian groups and holonomy"};
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  app.add_flag("--json", g.json, "Print the JSON run report");
  app.add_flag("--timing", g.timing, "Add wall-clock timing to the report");
  app.add_option("--seed", g.seed, "Seed for randomized loop families")->capture_default_str();

  std::function<Outcome()> run;

  int depth = default_trichotomy_depth;
  double radius = -1;
  std::string f1, f2;
  auto* classify_cmd = app.add_subcommand("classify", "Trichotomy verdict for a graph of groups");
  classify_cmd->add_option("file", f1, "Graph of groups JSON")->required();
  classify_cmd->add_option("--depth", depth)->capture_default_str();
  classify_cmd->add_option("--radius", radius, "Coverage radius; negative picks the default")->capture_default_str();
  classify_cmd->callback([&] { run = [&] { return cmd_classify(f1, depth, radius); }; });

  auto* qi_cmd = app.add_subcommand("qi-compare", "Compare two graphs of groups up to quasi-isometry");
  qi_cmd->add_option("first", f1)->required();
  qi_cmd->add_option("second", f2)->required();
  qi_cmd->add_option("--depth", depth)->capture_default_str();
  qi_cmd->add_option("--radius", radius)->capture_default_str();
  qi_cmd->callback([&] { run = [&] { return cmd_qi_compare(f1, f2, depth, radius); }; });

  auto* cocycle = app.add_subcommand("cocycle", "Bounded cohomology of 2-cocycles on a base complex");
  cocycle->require_subcommand(1);
  std::vector<std::string> files;
  std::size_t length_cap = 0;
  std::string C_text, matrix_text;
  auto* check = cocycle->add_subcommand("check", "Decide whether a class is bounded-trivial");
  check->add_option("files", files, "[complex] cochain")->required();
  check->add_option("--length-cap", length_cap, "Longest loop scanned (0: whole grid)");
  check->callback([&] {
    run = [&] {
      auto in = load_cocycle(files, 1);
      std::size_t cap = length_cap ? length_cap : default_length_cap(in.cx);
      Outcome o = in.cochains[0].exact ? cocycle_check<Rational>(in, cap, g.seed) : cocycle_check<double>(in, cap, g.seed);
      o.report.command = "cocycle check";
      o.report.parameters = {{"files", files}, {"length_cap", cap}, {"mode", in.cochains[0].exact ? "exact" : "float"}};
      return o;
    };
  });
  auto* prim = cocycle->add_subcommand("primitive", "Bounded primitive of a 1-cochain for a given C");
  prim->add_option("files", files, "[complex] cochain")->required();
  prim->add_option("-C,--C", C_text, "Linear bound constant")->required();
  prim->callback([&] {
    run = [&] {
      auto in = load_cocycle(files, 1);
      Rational C = parse_decimal(C_text);
      Outcome o = in.cochains[0].exact ? cocycle_primitive<Rational>(in, C) : cocycle_primitive<double>(in, C);
      o.report.command = "cocycle primitive";
      o.report.parameters = {{"files", files}, {"C", to_json(C)}, {"mode", in.cochains[0].exact ? "exact" : "float"}};
      return o;
    };
  });
  auto* cmp = cocycle->add_subcommand("compare", "Is c1 - M c2 bounded-trivial");
  cmp->add_option("files", files, "[complex] cochain1 cochain2")->required();
  cmp->add_option("--matrix", matrix_text, "Coefficient map as a JSON matrix (default identity)");
  cmp->add_option("--length-cap", length_cap);
  cmp->callback([&] {
    run = [&] {
      auto in = load_cocycle(files, 2);
      if (in.cochains[0].exact != in.cochains[1].exact) throw InvalidArgument("cochains use different modes");
      RatMatrix M = matrix_text.empty() ? RatMatrix::identity(in.cochains[0].dim)
                                        : rat_matrix_from_json(parse_json_text(matrix_text, "--matrix"));
      std::size_t cap = length_cap ? length_cap : default_length_cap(in.cx);
      Outcome o = in.cochains[0].exact ? cocycle_compare<Rational>(in, M, cap, g.seed)
                                       : cocycle_compare<double>(in, M, cap, g.seed);
      o.report.command = "cocycle compare";
      o.report.parameters = {{"files", files}, {"matrix", to_json(M)}, {"length_cap", cap}};
      return o;
    };
  });

  auto* bundle = app.add_subcommand("bundle", "Coarse bundle total spaces and ball growth");
  bundle->require_subcommand(1);
  BundleArgs ba;
  auto bundle_options = [&](CLI::App* sub) {
    sub->add_option("spec", ba.file, "Gluing spec JSON")->required();
    sub->add_option("--base-window", ba.base_windows, "lo,hi per base coordinate");
    sub->add_option("--fiber-window", ba.fiber_windows, "lo,hi per fiber coordinate");
    sub->add_option("--origin-base", ba.origin_base, "Comma-separated base coordinates");
    sub->add_option("--origin-fiber", ba.origin_fiber, "Comma-separated fiber coordinates");
  };
  auto* build = bundle->add_subcommand("build", "Build the windowed total space");
  bundle_options(build);
  build->callback([&] { run = [&] { return cmd_bundle_build(ba); }; });
  auto* grow = bundle->add_subcommand("grow", "Ball growth CSV and growth class");
  bundle_options(grow);
  grow->add_option("--rmax", ba.rmax, "Largest radius (default from the spec file, else 10)");
  grow->callback([&] { run = [&] { return cmd_bundle_grow(ba); }; });

  auto* subgroup = app.add_subcommand("subgroup", "Subgroups of GL(1,Q) and GL(2,Q)");
  subgroup->require_subcommand(1);
  HausdorffOptions hopt;
  std::string conj;
  int free_depth = 8;
  std::size_t max_steps = 1000;
  std::vector<std::string> values;
  auto* cls = subgroup->add_subcommand("class", "Hausdorff class");
  cls->add_option("file", f1)->required();
  cls->add_option("--coset-budget", hopt.coset_budget)->capture_default_str();
  cls->callback([&] { run = [&] { return cmd_subgroup_class(f1, hopt); }; });
  auto* eq = subgroup->add_subcommand("equiv", "Hausdorff equivalence of two subgroups");
  eq->add_option("first", f1)->required();
  eq->add_option("second", f2)->required();
  eq->add_option("--conjugator", conj, "JSON matrix conjugating the first into the second");
  eq->callback([&] { run = [&] { return cmd_subgroup_equiv(f1, f2, conj, hopt); }; });
  auto* fr = subgroup->add_subcommand("free", "Freeness certificate");
  fr->add_option("file", f1)->required();
  fr->add_option("--depth", free_depth)->capture_default_str();
  fr->callback([&] { run = [&] { return cmd_subgroup_free(f1, free_depth); }; });
  auto* red = subgroup->add_subcommand("reduce", "Greedy GL(n,Z) orbit reduction of a vector");
  red->add_option("values", values, "Entries, e.g. \"4 6\"")->required();
  red->add_option("--max-steps", max_steps)->capture_default_str();
  red->callback([&] { run = [&] { return cmd_subgroup_reduce(values, max_steps); }; });

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : exit_error;
  }

  try {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o = run();
    o.report.seed = g.seed;
    if (g.timing) o.report.timing = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (g.json) {
      std::cout << to_json(o.report).dump(2) << "\n";
    } else {
      std::cout << o.text;
      if (g.timing) std::cout << "time: " << json(*o.report.timing).dump() << " s\n";
      std::cerr << o.note;
    }
    return o.code;
  } catch (std::exception const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_error;
  }
}
