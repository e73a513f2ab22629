#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "engines.hpp"
#include "measures.hpp"

namespace zn2mm::io {

/// Everything one CLI job needs; read from a JSON document, then overridden
/// by flags.
struct JobConfig {
  json measure_doc;  // kept raw so a window-only job needs no measure
  DeformationParams deform;
  std::string engine = "andreief";
  Variant variant = Variant::PP;
  int N = 1;
  int trunc = 8;
  double tol = 0.0;
  QuadratureSpec quad;
  std::string mode = "float";
  std::string format = "json";
  std::string out;
  std::optional<IndexRect> rect;
  std::string window_path;
  bool analytic = false;

  MeasureSpec measure() const {
    if (measure_doc.is_null()) fail(ErrorCode::ConfigError, "config has no measure");
    return measure_from_json(measure_doc);
  }
};

inline const std::vector<std::string>& engine_names() {
  static const std::vector<std::string> names{"direct",          "permutation",      "andreief",
                                              "double_series",   "quadruple_series", "radial_series"};
  return names;
}

inline Variant parse_variant(const std::string& s) {
  if (s == "++" || s == "pp") return Variant::PP;
  if (s == "--" || s == "mm") return Variant::MM;
  if (s == "+-" || s == "pm") return Variant::PM;
  if (s == "-+" || s == "mp") return Variant::MP;
  fail(ErrorCode::ConfigError, "unknown variant '" + s + "' (use ++, --, +-, -+ or pp, mm, pm, mp)");
}

inline IndexRect parse_rect(const json& j) {
  if (!j.is_array() || j.size() != 4) fail(ErrorCode::ConfigError, "rect must be [i_lo, i_hi, k_lo, k_hi]");
  IndexRect r{j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
  if (r.i_hi < r.i_lo || r.k_hi < r.k_lo) fail(ErrorCode::ConfigError, "rect ranges are empty");
  return r;
}

inline IndexRect parse_rect(const std::string& s) {
  json j = json::array();
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      j.push_back(std::stoi(item));
    } catch (const std::exception&) {
      fail(ErrorCode::ConfigError, "rect entries must be integers: '" + s + "'");
    }
  }
  return parse_rect(j);
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "cannot read " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, "malformed JSON in " + path + ": " + e.what());
  }
}

inline JobConfig job_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::ConfigError, "config must be a JSON object");
  static const std::vector<std::string> known{"measure", "deform",  "engine", "variant", "N",      "truncation", "tolerance",
                                              "quadrature", "mode", "format", "out",     "rect",   "window",     "analytic"};
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) fail(ErrorCode::ConfigError, "unknown config key '" + key + "'");
  JobConfig c;
  try {
    c.measure_doc = j.value("measure", json());
    c.deform = deformation_from_json(j.value("deform", json()));
    c.engine = j.value("engine", c.engine);
    c.variant = parse_variant(j.value("variant", std::string("++")));
    c.N = j.value("N", c.N);
    c.trunc = j.value("truncation", c.trunc);
    c.tol = j.value("tolerance", c.tol);
    c.quad = quadrature_from_json(j.value("quadrature", json()));
    c.mode = j.value("mode", c.mode);
    c.format = j.value("format", c.format);
    c.out = j.value("out", c.out);
    if (j.contains("rect")) c.rect = parse_rect(j.at("rect"));
    c.window_path = j.value("window", c.window_path);
    c.analytic = j.value("analytic", false);
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("bad config value: ") + e.what());
  }
  if (!c.measure_doc.is_null()) (void)c.measure();  // fail early on a bad measure
  return c;
}

/// Checks engine, mode and measure combinations before any computation.
inline void validate_job(const JobConfig& c) {
  const auto& names = engine_names();
  if (std::find(names.begin(), names.end(), c.engine) == names.end())
    fail(ErrorCode::ConfigError, "unknown engine '" + c.engine + "'");
  if (c.mode != "float" && c.mode != "rational") fail(ErrorCode::ConfigError, "mode must be rational or float");
  if (c.format != "json" && c.format != "csv") fail(ErrorCode::ConfigError, "format must be json or csv");
  if (c.trunc < 0) fail(ErrorCode::ConfigError, "truncation must be >= 0");
  if (c.tol < 0) fail(ErrorCode::ConfigError, "tolerance must be >= 0");
  if (c.mode == "rational" && (c.window_path.empty() || (c.engine != "permutation" && c.engine != "andreief")))
    fail(ErrorCode::ConfigError, "rational mode needs an exact --window file and the permutation or andreief engine");
  if (!c.window_path.empty() && c.engine != "permutation" && c.engine != "andreief")
    fail(ErrorCode::ConfigError, "a --window file feeds only the permutation and andreief engines");
  if (c.window_path.empty()) {
    const MeasureSpec spec = c.measure();
    if (c.engine == "radial_series" && !std::holds_alternative<RadialPlanar>(spec))
      fail(ErrorCode::ConfigError, "radial_series needs a radial_planar measure");
    if (c.engine == "quadruple_series" && c.deform.has_bar() && !allows_negative_indices(spec))
      fail(ErrorCode::NegativeIndexUnsupported, "quadruple_series with tbar needs a circle_product measure");
    if (c.engine == "direct" && c.N > 2) fail(ErrorCode::NUnsupported, "direct engine supports N <= 2");
    validate_deformation(spec, c.deform);
  }
}

/// Window with exact entries: each value is an integer, a "p/q" string, or
/// a binary64 number taken at its exact value.
inline BimomentWindowT<Rational> rational_window_from_json(const json& j) {
  if (j.value("kind", "") != "bimoment_window") fail(ErrorCode::ConfigError, "not a bimoment_window document");
  BimomentWindowT<Rational> w;
  w.rect = {j.at("i_range")[0].get<int>(), j.at("i_range")[1].get<int>(), j.at("k_range")[0].get<int>(),
            j.at("k_range")[1].get<int>()};
  w.values = Matrix<Rational>(w.rect.rows(), w.rect.cols());
  const auto& rows = j.at("values");
  if (static_cast<int>(rows.size()) != w.rect.rows()) fail(ErrorCode::ConfigError, "window row count mismatch");
  auto exact = [](const json& e) -> Rational {
    if (e.is_number_integer()) return Rational(e.get<long>());
    if (e.is_number_float()) return Rational(e.get<double>());
    if (e.is_string()) {
      try {
        Rational r(e.get<std::string>());
        r.canonicalize();
        if (r.get_den() == 0) throw std::invalid_argument("zero denominator");
        return r;
      } catch (const std::exception&) {
        fail(ErrorCode::ConfigError, "not a rational: " + e.dump());
      }
    }
    if (e.is_array() && e.size() == 2 && e[1].is_number() && e[1].get<double>() == 0.0) {
      if (e[0].is_number_integer()) return Rational(e[0].get<long>());
      return Rational(e[0].get<double>());
    }
    fail(ErrorCode::ConfigError, "rational windows need real exact entries, got " + e.dump());
  };
  for (int i = 0; i < w.rect.rows(); ++i) {
    if (static_cast<int>(rows[i].size()) != w.rect.cols()) fail(ErrorCode::ConfigError, "window column count mismatch");
    for (int k = 0; k < w.rect.cols(); ++k) w.values(i, k) = exact(rows[i][k]);
  }
  w.deform = deformation_from_json(j.value("deform", json()));
  w.provenance = "file";
  return w;
}

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string window_to_csv(const BimomentWindow& w) {
  std::string out = "i,k,re,im\n";
  for (int i = w.rect.i_lo; i <= w.rect.i_hi; ++i)
    for (int k = w.rect.k_lo; k <= w.rect.k_hi; ++k) {
      const Complex z = w.at(i, k);
      out += std::to_string(i) + "," + std::to_string(k) + "," + fmt17(z.real()) + "," + fmt17(z.imag()) + "\n";
    }
  return out;
}

inline std::string zresult_to_csv(const ZResult& z) {
  return "engine,N,n,m,re,im,error_estimate\n" + z.engine + "," + std::to_string(z.N) + "," + std::to_string(z.n) + "," +
         std::to_string(z.m) + "," + fmt17(z.value.real()) + "," + fmt17(z.value.imag()) + "," + fmt17(z.error_estimate) + "\n";
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::ConfigError, "cannot write " + path);
  out << text;
}

}  // namespace zn2mm::io
