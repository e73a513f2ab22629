#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>

#include "zn2mm/io.hpp"
#include "zn2mm/verify.hpp"

using namespace zn2mm;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitVerify = 4;

int exit_code_for(ErrorCode c) {
  return (c == ErrorCode::QuadratureNotConverged || c == ErrorCode::TruncationNotConverged) ? kExitNumeric : kExitConfig;
}

void print_error(const std::string& name, const std::string& message) {
  std::cerr << json{{"error", name}, {"message", message}}.dump() << "\n";
}

// Flags shared by the job subcommands; unset flags leave the config alone.
struct Overrides {
  std::string config, engine, mode, out, format, rect, window, variant;
  int N = 0, n = 0, m = 0, trunc = 0, points = 0;
  double tol = 0.0;
  bool analytic = false;
  std::vector<CLI::Option*> opts;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON job file");
    auto add = [&](const char* flag, auto& target, const char* help) { opts.push_back(app->add_option(flag, target, help)); };
    add("--engine", engine, "direct | permutation | andreief | double_series | quadruple_series | radial_series");
    add("--variant", variant, "double-series variant: ++, --, +-, -+");
    add("--N", N, "number of eigenvalue pairs");
    add("--n", n, "x-side monomial power");
    add("--m", m, "y-side monomial power");
    add("--trunc", trunc, "series truncation degree d");
    add("--tol", tol, "relative tolerance for series truncation");
    add("--mode", mode, "rational | float");
    add("--out", out, "output path (stdout when absent)");
    add("--format", format, "json | csv");
    add("--rect", rect, "bimoment rectangle i_lo,i_hi,k_lo,k_hi");
    add("--window", window, "bimoment window JSON to evaluate on");
    add("--points", points, "initial quadrature points per axis");
  }

  bool given(const std::string& name) const {
    for (auto* o : opts)
      if (o->get_name() == name) return o->count() > 0;
    return false;
  }

  io::JobConfig build(bool& engine_explicit) const {
    io::JobConfig c;
    engine_explicit = false;
    if (!config.empty()) {
      const json j = io::read_json_file(config);
      c = io::job_from_json(j);
      engine_explicit = j.contains("engine");
    }
    if (given("--engine")) {
      c.engine = engine;
      engine_explicit = true;
    }
    if (given("--variant")) c.variant = io::parse_variant(variant);
    if (given("--N")) c.N = N;
    if (given("--n")) c.deform.n = n;
    if (given("--m")) c.deform.m = m;
    if (given("--trunc")) c.trunc = trunc;
    if (given("--tol")) c.tol = tol;
    if (given("--mode")) c.mode = mode;
    if (given("--out")) c.out = out;
    if (given("--format")) c.format = format;
    if (given("--rect")) c.rect = io::parse_rect(rect);
    if (given("--window")) c.window_path = window;
    if (given("--points")) c.quad.points = points;
    return c;
  }
};

void emit(const io::JobConfig& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
  } else {
    io::write_text(c.out, text.back() == '\n' ? text : text + "\n");
  }
}

// Summary goes to stdout when the payload is written to a file, else stderr.
void summary(const io::JobConfig& c, const std::string& line) { (c.out.empty() ? std::cerr : std::cout) << line << "\n"; }

std::string describe(const ZResult& z) {
  std::string s = "Z_" + std::to_string(z.N) + " = " + io::fmt17(z.value.real());
  if (z.value.imag() != 0.0) s += (z.value.imag() < 0 ? " - " : " + ") + io::fmt17(std::abs(z.value.imag())) + " i";
  if (!z.exact.empty()) s += " (exact " + z.exact + ")";
  s += "  engine=" + z.engine + " n=" + std::to_string(z.n) + " m=" + std::to_string(z.m);
  if (z.truncation >= 0) s += " d=" + std::to_string(z.truncation);
  s += " error_estimate=" + io::fmt17(z.error_estimate);
  return s;
}

ZResult run_on_window(const io::JobConfig& c) {
  const json doc = io::read_json_file(c.window_path);
  const int N = c.N, n = c.deform.n, m = c.deform.m;
  if (c.mode == "rational") {
    const auto w = io::rational_window_from_json(doc);
    const Rational v = c.engine == "permutation" ? permutation_value(w, N, n, m) : andreief_value(w, N, n, m);
    ZResult z;
    z.engine = c.engine;
    z.N = N;
    z.n = n;
    z.m = m;
    z.value = v.get_d();
    z.exact = v.get_str();
    z.deform_fingerprint = deform_fingerprint(w.deform);
    return z;
  }
  const auto w = window_from_json(doc);
  return c.engine == "permutation" ? permutation_Z(w, N, n, m) : andreief_Z(w, N, n, m);
}

ZResult run_engine(const io::JobConfig& c) {
  if (!c.window_path.empty()) return run_on_window(c);
  const MeasureSpec spec = c.measure();
  const auto& d = c.deform;
  if (c.engine == "direct") return direct_Z(spec, d, c.N, c.quad);
  if (c.engine == "andreief") return andreief_Z(spec, d, c.N, c.quad);
  if (c.engine == "permutation") {
    if (c.N <= 0) return andreief_Z(spec, d, c.N, c.quad);
    auto z = permutation_Z(bimoment_window(spec, andreief_rect(c.N, d.n, d.m), d, c.quad), c.N, d.n, d.m);
    z.deform_fingerprint = deform_fingerprint(d);
    return z;
  }
  if (c.engine == "double_series") return double_series_Z(c.variant, spec, d, c.N, c.trunc, c.quad, c.tol).z;
  if (c.engine == "quadruple_series") return quadruple_series_Z(spec, d, c.N, c.trunc, c.quad, c.tol).z;
  return radial_series_Z(std::get<RadialPlanar>(spec), d.n, d.m, d.t1, d.t2, c.N, c.trunc, c.tol);
}

int cmd_zn(const io::JobConfig& c) {
  io::validate_job(c);
  const ZResult z = run_engine(c);
  emit(c, c.format == "csv" ? io::zresult_to_csv(z) : zresult_to_json(z).dump(2));
  summary(c, describe(z));
  return 0;
}

int cmd_series(io::JobConfig c, bool engine_explicit) {
  if (!engine_explicit) c.engine = "double_series";
  if (c.engine != "double_series" && c.engine != "quadruple_series")
    fail(ErrorCode::ConfigError, "series needs the double_series or quadruple_series engine");
  io::validate_job(c);
  const MeasureSpec spec = c.measure();
  const SeriesResult r = c.engine == "double_series" ? double_series_Z(c.variant, spec, c.deform, c.N, c.trunc, c.quad, c.tol)
                                                     : quadruple_series_Z(spec, c.deform, c.N, c.trunc, c.quad, c.tol);
  if (c.format == "csv")
    emit(c, table_to_csv(r.table));
  else
    emit(c, json{{"z", zresult_to_json(r.z)}, {"table", table_to_json(r.table)}}.dump(2));
  summary(c, describe(r.z) + " terms=" + std::to_string(r.table.entries.size()));
  return 0;
}

int cmd_bimoments(const io::JobConfig& c, bool analytic) {
  if (!c.rect) fail(ErrorCode::ConfigError, "bimoments needs --rect i_lo,i_hi,k_lo,k_hi (or \"rect\" in the config)");
  if (c.format != "json" && c.format != "csv") fail(ErrorCode::ConfigError, "format must be json or csv");
  const MeasureSpec spec = c.measure();
  DeformationParams times = c.deform;
  times.n = times.m = 0;
  BimomentWindow w;
  if (analytic || c.analytic) {
    if (!times.times_zero()) fail(ErrorCode::ConfigError, "closed forms cover undeformed bimoments only");
    w = analytic_window(spec, *c.rect);
    w.measure = measure_to_json(spec);
  } else {
    w = bimoment_window(spec, *c.rect, times, c.quad);
  }
  emit(c, c.format == "csv" ? io::window_to_csv(w) : window_to_json(w).dump(2));
  summary(c, "bimoment window [" + std::to_string(w.rect.i_lo) + ".." + std::to_string(w.rect.i_hi) + "]x[" +
                 std::to_string(w.rect.k_lo) + ".." + std::to_string(w.rect.k_hi) + "] provenance=" + w.provenance +
                 " points=" + std::to_string(w.points));
  return 0;
}

Partition parse_partition(std::string s) {
  std::replace(s.begin(), s.end(), ',', '+');
  s.erase(std::remove_if(s.begin(), s.end(), [](char ch) { return ch == ' ' || ch == '(' || ch == ')' || ch == '[' || ch == ']'; }),
          s.end());
  try {
    return Partition::parse(s);
  } catch (const Error&) {
    fail(ErrorCode::ConfigError, "cannot read partition '" + s + "'");
  }
}

struct VevOptions {
  std::string variant = "++", lambda, mu, out;
  int N = 1, n = 0, m = 0;
  bool vandermonde = false;
};

int cmd_fermion_vev(const VevOptions& o) {
  Polynomial vev, expected;
  json doc;
  if (o.vandermonde) {
    vev = fermion::vandermonde_vev(o.N, o.n, o.m);
    expected = fermion::vandermonde_vev_expected(o.N, o.n, o.m);
    doc = {{"kind", "vandermonde"}, {"N", o.N}, {"n", o.n}, {"m", o.m}};
  } else {
    const Variant v = io::parse_variant(o.variant);
    const Partition l = parse_partition(o.lambda), mu = parse_partition(o.mu);
    const int deg = std::max({1, l.weight(), mu.weight()});
    const auto first = TimeSequence<Polynomial>::formal(v == Variant::PP || v == Variant::PM ? VarFamily::T1 : VarFamily::TBar1, deg);
    const auto second = TimeSequence<Polynomial>::formal(v == Variant::PP || v == Variant::MP ? VarFamily::T2 : VarFamily::TBar2, deg);
    vev = fermion::schur_product_vev(v, l, mu, o.N, first, second);
    expected = Polynomial(fermion::schur_product_sign(v, o.N)) * schur_in_times(l, first) * schur_in_times(mu, second);
    doc = {{"kind", "schur_product"}, {"variant", variant_name(v)}, {"lambda", l.parts()}, {"mu", mu.parts()}, {"N", o.N}};
  }
  const bool equal = vev == expected;
  doc["vev"] = vev.str();
  doc["expected"] = expected.str();
  doc["equal"] = equal;
  io::JobConfig sink;
  sink.out = o.out;
  emit(sink, doc.dump(2));
  summary(sink, std::string(equal ? "equal" : "NOT equal") + ": " + vev.str());
  return equal ? 0 : kExitVerify;
}

int cmd_verify(const std::string& suite, int budget, const std::string& out) {
  verify::Report r;
  const bool all = suite == "all";
  if (!all && suite != "schur" && suite != "fermion" && suite != "engines")
    fail(ErrorCode::ConfigError, "suite must be schur, fermion, engines or all");
  if (all || suite == "schur") r.append(verify::schur_suite(budget > 0 ? budget : 6));
  if (all || suite == "fermion") r.append(verify::fermion_suite(3, budget > 0 ? budget : 5));
  if (all || suite == "engines") r.append(verify::engines_suite());
  json checks = json::array();
  for (const auto& c : r.checks) {
    std::cout << verify::format_check(c) << "\n";
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}, {"seconds", c.seconds}});
  }
  if (!out.empty()) io::write_text(out, json{{"suite", suite}, {"passed", r.ok()}, {"checks", checks}}.dump(2) + "\n");
  std::cout << (r.ok() ? "all checks passed" : "verification FAILED") << "\n";
  return r.ok() ? 0 : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deformed two-matrix-model partition functions and fermionic identity checks"};
  app.require_subcommand(1);

  Overrides zn_o, series_o, bim_o;
  auto* zn = app.add_subcommand("zn", "evaluate Z_N with one engine");
  zn_o.attach(zn);
  auto* series = app.add_subcommand("series", "Schur-series evaluation with its coefficient table");
  series_o.attach(series);
  auto* bim = app.add_subcommand("bimoments", "emit a certified bimoment window");
  bim_o.attach(bim);
  bool analytic = false;
  bim->add_flag("--analytic", analytic, "use closed forms instead of quadrature");

  VevOptions vev;
  auto* fv = app.add_subcommand("fermion-vev", "exact fermionic expectation against its Schur-function form");
  fv->add_option("--variant", vev.variant, "++, --, +-, -+");
  fv->add_option("--lambda", vev.lambda, "first partition, e.g. 2,1");
  fv->add_option("--mu", vev.mu, "second partition");
  fv->add_option("--N", vev.N, "charge N");
  fv->add_option("--n", vev.n, "n for --vandermonde");
  fv->add_option("--m", vev.m, "m for --vandermonde");
  fv->add_flag("--vandermonde", vev.vandermonde, "the Vandermonde-monomial expectation instead of a Schur product");
  fv->add_option("--out", vev.out, "output path");

  std::string suite = "all", verify_out;
  int budget = 0;
  auto* ver = app.add_subcommand("verify", "run identity suites");
  ver->add_option("suite", suite, "schur | fermion | engines | all");
  ver->add_option("--budget", budget, "degree budget for the schur and fermion suites");
  ver->add_option("--out", verify_out, "JSON report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("ConfigError", e.what());
    return kExitConfig;
  }

  try {
    bool engine_explicit = false;
    if (zn->parsed()) return cmd_zn(zn_o.build(engine_explicit));
    if (series->parsed()) {
      const auto c = series_o.build(engine_explicit);
      return cmd_series(c, engine_explicit);
    }
    if (bim->parsed()) return cmd_bimoments(bim_o.build(engine_explicit), analytic);
    if (fv->parsed()) return cmd_fermion_vev(vev);
    if (ver->parsed()) return cmd_verify(suite, budget, verify_out);
  } catch (const Error& e) {
    print_error(std::string(error_name(e.code())), e.what());
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    print_error("ConfigError", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    print_error("InternalError", e.what());
    return 1;
  }
  return kExitConfig;
}
