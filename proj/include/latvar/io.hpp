#pragma once

// Experiment configuration, hashing and report emission.

#include <boost/math/special_functions/bessel.hpp>
#include <cinttypes>
#include <cstdio>
#include <json.hpp>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "latvar/bessel.hpp"
#include "latvar/convex_body.hpp"
#include "latvar/decomposition.hpp"
#include "latvar/fourier.hpp"
#include "latvar/lattice_count.hpp"
#include "latvar/oracle.hpp"

#ifndef LATVAR_VERSION
#define LATVAR_VERSION "0.0.0"
#endif

namespace latvar {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = LATVAR_VERSION;

// ---------------------------------------------------------------------------
// Body schema.

namespace detail {

inline void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ValidationError(where + ": unknown key '" + key + "'");
  }
}

inline double get_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ValidationError(where + ": missing '" + key + "'");
  if (!j.at(key).is_number()) throw ValidationError(where + ": '" + std::string(key) + "' must be a number");
  return j.at(key).get<double>();
}

inline std::vector<double> get_numbers(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_array()) throw ValidationError(where + ": '" + key + "' must be an array");
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw ValidationError(where + ": '" + std::string(key) + "' entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline std::uint64_t get_count(const json& v, const std::string& what) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ValidationError(what + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

}  // namespace detail

inline ConvexBody body_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw ValidationError("body: expected an object with a string 'type'");
  }
  const auto type = j.at("type").get<std::string>();
  if (type == "ball") {
    detail::require_keys(j, {"type", "radius", "dimension"}, "body");
    int dim = 2;
    if (j.contains("dimension")) {
      if (!j.at("dimension").is_number_integer()) throw ValidationError("body: 'dimension' must be an integer");
      dim = j.at("dimension").get<int>();
    }
    return ConvexBody::ball(dim, detail::get_number(j, "radius", "body"));
  }
  if (type == "ellipsoid") {
    detail::require_keys(j, {"type", "semiaxes"}, "body");
    return ConvexBody::ellipsoid(detail::get_numbers(j, "semiaxes", "body"));
  }
  if (type == "box") {
    detail::require_keys(j, {"type", "halfsides"}, "body");
    return ConvexBody::box(detail::get_numbers(j, "halfsides", "body"));
  }
  if (type == "perturbed_disk") {
    detail::require_keys(j, {"type", "base", "cosine_coeffs"}, "body");
    std::vector<CosineTerm> terms;
    if (j.contains("cosine_coeffs")) {
      if (!j.at("cosine_coeffs").is_array()) throw ValidationError("body: 'cosine_coeffs' must be an array");
      for (const auto& c : j.at("cosine_coeffs")) {
        if (!c.is_array() || c.size() != 3 || !c[0].is_number_integer() || !c[1].is_number() || !c[2].is_number()) {
          throw ValidationError("body: each cosine coefficient is [k, a_k, phase_k] with integer k");
        }
        terms.push_back({c[0].get<int>(), c[1].get<double>(), c[2].get<double>()});
      }
    }
    return ConvexBody::perturbed_disk(detail::get_number(j, "base", "body"), std::move(terms));
  }
  throw ValidationError("body: unknown type '" + type + "'");
}

inline json body_to_json(const ConvexBody& body) {
  json j;
  j["type"] = body.kind_name();
  if (const auto* b = body.as<Ball>()) {
    j["radius"] = b->radius;
    j["dimension"] = b->dim;
  } else if (const auto* e = body.as<Ellipsoid>()) {
    j["semiaxes"] = json::array();
    for (int i = 0; i < body.dim(); ++i) j["semiaxes"].push_back(e->semiaxes[i]);
  } else if (const auto* x = body.as<Box>()) {
    j["halfsides"] = json::array();
    for (int i = 0; i < body.dim(); ++i) j["halfsides"].push_back(x->halfsides[i]);
  } else if (const auto* p = body.as<PerturbedDisk>()) {
    j["base"] = p->base;
    j["cosine_coeffs"] = json::array();
    for (const auto& t : p->terms) j["cosine_coeffs"].push_back(json::array({t.k, t.amplitude, t.phase}));
  } else {
    throw UnsupportedKind("body_to_json: difference bodies have no config schema");
  }
  return j;
}

// ---------------------------------------------------------------------------
// Configuration.

enum class Command { count, variance, decompose, sweep, oracle, selftest };

inline std::string to_string(Command c) {
  switch (c) {
    case Command::count: return "count";
    case Command::variance: return "variance";
    case Command::decompose: return "decompose";
    case Command::sweep: return "sweep";
    case Command::oracle: return "oracle";
    case Command::selftest: return "selftest";
  }
  return "?";
}

inline Command command_from_string(const std::string& s) {
  for (auto c : {Command::count, Command::variance, Command::decompose, Command::sweep, Command::oracle,
                 Command::selftest}) {
    if (to_string(c) == s) return c;
  }
  throw ValidationError("unknown command '" + s + "'");
}

/// Command-line values that take precedence over the config file.
struct ConfigOverrides {
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<double> cutoff;
  std::optional<std::uint64_t> grid;
  std::optional<std::uint64_t> samples;
  std::optional<double> alpha;
};

struct ExperimentConfig {
  Command command = Command::variance;
  std::optional<ConvexBody> body;
  double r = 0.0;
  double t = 0.0;
  std::vector<std::string> estimators{"parseval", "sample"};
  std::optional<double> cutoff;
  std::string scheme = "grid";  // count: grid or random
  std::uint64_t grid = 256;
  std::uint64_t samples = 200000;
  std::uint64_t seed = 42;
  double alpha = 0.5;
  std::vector<double> r_list;
  double parseval_factor = 64.0;
  bool sweep_sample = true;
  bool sweep_decomposition = true;
  std::optional<double> series_cutoff;
  SquareVariant variant = SquareVariant::A;
  std::int64_t n = 3;
  std::optional<std::string> coefficients_out;
  // presentation only; not part of the hash
  std::string format = "json";
  std::optional<std::string> out;
  int workers = 1;

  [[nodiscard]] Annulus annulus() const { return Annulus(*body, r, t); }
  [[nodiscard]] double parseval_cutoff() const { return cutoff.value_or(parseval_factor / t); }
  [[nodiscard]] double decompose_cutoff() const { return cutoff.value_or(default_series_cutoff(t)); }
};

namespace detail {

inline const std::set<std::string> kEstimators{"parseval", "sample", "grid", "exact"};

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(what) + " must be positive and finite");
}

}  // namespace detail

/// Validates the file contents against the command's schema and applies
/// flag overrides. Throws ValidationError before any computation.
inline ExperimentConfig load_config(Command command, const json& file, const ConfigOverrides& flags = {}) {
  ExperimentConfig c;
  c.command = command;
  if (!file.is_null() && !file.is_object()) throw ValidationError("config: expected a JSON object");
  const json j = file.is_null() ? json::object() : file;
  detail::require_keys(j,
                       {"body", "r", "t", "estimators", "cutoff", "scheme", "grid", "samples", "seed", "alpha",
                        "r_list", "parseval_factor", "sample", "decomposition", "series_cutoff", "variant", "n",
                        "coefficients_out", "format", "out", "workers"},
                       "config");
  try {
    if (j.contains("body")) c.body = body_from_json(j.at("body"));
    if (j.contains("r")) c.r = detail::get_number(j, "r", "config");
    if (j.contains("t")) c.t = detail::get_number(j, "t", "config");
    if (j.contains("estimators")) {
      c.estimators.clear();
      for (const auto& e : j.at("estimators")) {
        if (!e.is_string() || !detail::kEstimators.count(e.get<std::string>())) {
          throw ValidationError("config: estimators must be drawn from parseval, sample, grid, exact");
        }
        c.estimators.push_back(e.get<std::string>());
      }
      if (c.estimators.empty()) throw ValidationError("config: estimators is empty");
    }
    if (j.contains("cutoff")) c.cutoff = detail::get_number(j, "cutoff", "config");
    if (j.contains("scheme")) {
      if (!j.at("scheme").is_string()) throw ValidationError("config: scheme must be a string");
      c.scheme = j.at("scheme").get<std::string>();
    }
    if (j.contains("grid")) c.grid = detail::get_count(j.at("grid"), "config: grid");
    if (j.contains("samples")) c.samples = detail::get_count(j.at("samples"), "config: samples");
    if (j.contains("seed")) c.seed = detail::get_count(j.at("seed"), "config: seed");
    if (j.contains("alpha")) c.alpha = detail::get_number(j, "alpha", "config");
    if (j.contains("r_list")) c.r_list = detail::get_numbers(j, "r_list", "config");
    if (j.contains("parseval_factor")) c.parseval_factor = detail::get_number(j, "parseval_factor", "config");
    if (j.contains("sample")) c.sweep_sample = j.at("sample").get<bool>();
    if (j.contains("decomposition")) c.sweep_decomposition = j.at("decomposition").get<bool>();
    if (j.contains("series_cutoff")) c.series_cutoff = detail::get_number(j, "series_cutoff", "config");
    if (j.contains("variant")) {
      const auto v = j.at("variant").get<std::string>();
      if (v != "A" && v != "B") throw ValidationError("config: variant must be A or B");
      c.variant = v == "A" ? SquareVariant::A : SquareVariant::B;
    }
    if (j.contains("n")) {
      if (!j.at("n").is_number_integer()) throw ValidationError("config: n must be an integer");
      c.n = j.at("n").get<std::int64_t>();
    }
    if (j.contains("coefficients_out")) c.coefficients_out = j.at("coefficients_out").get<std::string>();
    if (j.contains("format")) c.format = j.at("format").get<std::string>();
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
    if (j.contains("workers")) c.workers = j.at("workers").get<int>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }

  if (flags.out) c.out = flags.out;
  if (flags.format) c.format = *flags.format;
  if (flags.workers) c.workers = *flags.workers;
  if (flags.seed) c.seed = *flags.seed;
  if (flags.cutoff) c.cutoff = flags.cutoff;
  if (flags.grid) {
    c.grid = *flags.grid;
    if (command == Command::count) c.scheme = "grid";
  }
  if (flags.samples) {
    c.samples = *flags.samples;
    if (command == Command::count && !flags.grid) c.scheme = "random";
  }
  if (flags.alpha) c.alpha = *flags.alpha;

  if (c.format != "csv" && c.format != "json") throw ValidationError("format must be csv or json");
  if (c.workers < 1) throw ValidationError("workers must be >= 1");
  if (c.cutoff) detail::require_positive(*c.cutoff, "cutoff");
  if (c.series_cutoff) detail::require_positive(*c.series_cutoff, "series_cutoff");

  const bool needs_body = command == Command::count || command == Command::variance ||
                          command == Command::decompose || command == Command::sweep;
  if (needs_body && !c.body) throw ValidationError("config: '" + to_string(command) + "' needs a body");
  if (command == Command::count || command == Command::variance || command == Command::decompose) {
    detail::require_positive(c.r, "r");
    if (!(c.t >= 0.0) || c.t > 2.0 * c.r) throw ValidationError("t must satisfy 0 <= t <= 2r");
  }
  if (command == Command::count) {
    if (c.scheme != "grid" && c.scheme != "random") throw ValidationError("scheme must be grid or random");
    if (c.scheme == "grid" && c.grid < 2) throw ValidationError("grid must be >= 2");
    if (c.scheme == "random" && c.samples < 2) throw ValidationError("samples must be >= 2");
  }
  if (command == Command::variance) {
    for (const auto& e : c.estimators) {
      if (e == "grid" && c.grid < 2) throw ValidationError("grid must be >= 2");
      if (e == "sample" && c.samples < 2) throw ValidationError("samples must be >= 2");
    }
  }
  if (command == Command::decompose && !c.body->is_smooth()) {
    throw ValidationError("decompose: the body must be smooth (box bodies have no curvature series)");
  }
  if (command == Command::sweep) {
    detail::require_positive(c.alpha, "alpha");
    if (c.r_list.empty()) throw ValidationError("config: sweep needs a non-empty r_list");
    for (double r : c.r_list) detail::require_positive(r, "r_list entries");
    detail::require_positive(c.parseval_factor, "parseval_factor");
    if (c.sweep_sample && c.samples < 2) throw ValidationError("samples must be >= 2");
  }
  if (command == Command::oracle) {
    if (c.n < 1) throw ValidationError("oracle: n must be >= 1");
    if (!(c.t > 0.0 && c.t < 0.5)) throw ValidationError("oracle: t must lie in (0, 1/2)");
  }
  return c;
}

/// The fully resolved configuration that determines a command's output.
inline json resolved_config(const ExperimentConfig& c) {
  json j;
  j["command"] = to_string(c.command);
  switch (c.command) {
    case Command::count:
      j["body"] = body_to_json(*c.body);
      j["r"] = c.r;
      j["t"] = c.t;
      j["scheme"] = c.scheme;
      if (c.scheme == "grid") {
        j["grid"] = c.grid;
      } else {
        j["samples"] = c.samples;
        j["seed"] = c.seed;
      }
      break;
    case Command::variance: {
      j["body"] = body_to_json(*c.body);
      j["r"] = c.r;
      j["t"] = c.t;
      j["estimators"] = c.estimators;
      for (const auto& e : c.estimators) {
        if (e == "parseval") j["cutoff"] = c.t > 0.0 ? c.parseval_cutoff() : c.cutoff.value_or(1.0);
        if (e == "grid") j["grid"] = c.grid;
        if (e == "sample") {
          j["samples"] = c.samples;
          j["seed"] = c.seed;
        }
      }
      if (c.coefficients_out) j["coefficients_out"] = *c.coefficients_out;
      break;
    }
    case Command::decompose:
      j["body"] = body_to_json(*c.body);
      j["r"] = c.r;
      j["t"] = c.t;
      j["cutoff"] = c.decompose_cutoff();
      break;
    case Command::sweep:
      j["body"] = body_to_json(*c.body);
      j["alpha"] = c.alpha;
      j["r_list"] = c.r_list;
      if (c.cutoff) j["cutoff"] = *c.cutoff;
      else j["parseval_factor"] = c.parseval_factor;
      j["sample"] = c.sweep_sample;
      if (c.sweep_sample) {
        j["samples"] = c.samples;
        j["seed"] = c.seed;
      }
      j["decomposition"] = c.sweep_decomposition;
      if (c.series_cutoff) j["series_cutoff"] = *c.series_cutoff;
      break;
    case Command::oracle:
      j["variant"] = to_string(c.variant);
      j["n"] = c.n;
      j["t"] = c.t;
      break;
    case Command::selftest:
      break;
  }
  return j;
}

/// 64-bit FNV-1a of the compact resolved config, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : resolved_config(c).dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

// ---------------------------------------------------------------------------
// Report plumbing.

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

inline json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

/// Structured report plus the quality flags that map to exit code 2.
struct Report {
  json body;
  std::string csv;
  std::vector<std::string> flags;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, std::string>> extra_files;  // (path, contents)
};

inline json report_header(const ExperimentConfig& c) {
  json j;
  j["version"] = kVersion;
  j["config_hash"] = config_hash(c);
  j["config"] = resolved_config(c);
  return j;
}

inline std::string csv_header(const ExperimentConfig& c) {
  return std::string("# latvar ") + kVersion + " config_hash=" + config_hash(c) + "\n# config " +
         resolved_config(c).dump() + "\n";
}

inline void finish_json(Report& rep) {
  rep.body["warnings"] = rep.warnings;
  rep.body["flags"] = rep.flags;
}

inline json tail_json(const TailEstimate& t) {
  json j;
  j["cutoff_radius"] = t.cutoff_radius;
  j["bound"] = t.bound;
  j["envelope_constant"] = t.envelope_constant;
  j["method"] = t.method;
  return j;
}

// ---------------------------------------------------------------------------
// count

inline json histogram_json(const MomentTable& m) {
  json h = json::object();
  for (const auto& [value, freq] : m.histogram) h[std::to_string(value)] = freq;
  return h;
}

inline std::string count_csv(const ExperimentConfig& c, const CountSampleSet& set) {
  std::ostringstream os;
  os << csv_header(c);
  for (int i = 0; i < set.dim; ++i) os << "x_" << i + 1 << ',';
  os << "count\n";
  for (std::size_t i = 0; i < set.counts.size(); ++i) {
    const Vec x = set.translation(i);
    for (int a = 0; a < set.dim; ++a) os << format_double(x[a]) << ',';
    os << set.counts[i] << '\n';
  }
  return os.str();
}

inline Report run_count(const ExperimentConfig& c, const ExecPolicy& policy = {}) {
  const Annulus ann = c.annulus();
  const auto scheme =
      c.scheme == "grid" ? SamplingScheme::grid(c.grid) : SamplingScheme::random(c.samples, c.seed);
  const auto set = sample_counts(ann, scheme, policy);
  const auto m = moments(set, annulus_volume(ann));
  Report rep;
  rep.body = report_header(c);
  rep.body["scheme"] = scheme.describe();
  rep.body["samples"] = m.samples;
  rep.body["volume"] = m.volume;
  rep.body["mean"] = m.mean;
  rep.body["variance"] = m.variance;
  rep.body["histogram"] = histogram_json(m);
  finish_json(rep);
  rep.csv = count_csv(c, set);
  if (c.format == "csv" && c.out) rep.extra_files.emplace_back(*c.out + ".histogram.json", rep.body.dump(2) + "\n");
  return rep;
}

// ---------------------------------------------------------------------------
// variance

struct EstimatorValue {
  std::string name;
  double variance = 0.0;
  double error = 0.0;
  json detail;
};

inline std::optional<SquareAnnulusStats> exact_square_case(const ExperimentConfig& c) {
  const auto* box = c.body->as<Box>();
  if (!box || c.body->dim() != 2 || box->halfsides[0] != 1.0 || box->halfsides[1] != 1.0) return std::nullopt;
  if (c.r != std::floor(c.r) || c.r < 1.0 || !(c.t > 0.0 && c.t < 0.5)) return std::nullopt;
  return square_stats(SquareVariant::A, static_cast<std::int64_t>(c.r), c.t);
}

inline std::string coefficients_csv(const ExperimentConfig& c, const std::vector<FourierCoefficient>& coeffs) {
  std::ostringstream os;
  os << csv_header(c);
  const int d = c.body->dim();
  for (int i = 0; i < d; ++i) os << "n_" << i + 1 << ',';
  os << "re,im,method\n";
  for (const auto& k : coeffs) {
    for (int i = 0; i < d; ++i) os << k.frequency[i] << ',';
    os << format_double(k.value.real()) << ',' << format_double(k.value.imag()) << ',' << to_string(k.method) << '\n';
  }
  return os.str();
}

inline Report run_variance(const ExperimentConfig& c, const ExecPolicy& policy = {}) {
  const Annulus ann = c.annulus();
  Report rep;
  rep.body = report_header(c);
  const double vol = annulus_volume(ann);
  rep.body["volume"] = vol;
  std::vector<EstimatorValue> values;
  for (const auto& e : c.estimators) {
    EstimatorValue v;
    v.name = e;
    if (e == "parseval") {
      const auto p = parseval_variance(ann, ann.t > 0.0 ? c.parseval_cutoff() : c.cutoff.value_or(1.0), policy);
      v.variance = p.variance;
      v.error = p.tail.bound + p.quadrature_error;
      v.detail["cutoff"] = p.cutoff;
      v.detail["terms"] = p.terms;
      v.detail["method"] = to_string(p.method);
      v.detail["quadrature_error"] = p.quadrature_error;
      v.detail["tail"] = tail_json(p.tail);
      if (p.flagged) rep.flags.push_back("parseval: quadrature error exceeds 1% of the variance");
      if (c.coefficients_out) {
        rep.extra_files.emplace_back(*c.coefficients_out,
                                     coefficients_csv(c, annulus_coefficients(ann, p.cutoff, policy)));
      }
    } else if (e == "sample" || e == "grid") {
      const auto scheme = e == "grid" ? SamplingScheme::grid(c.grid) : SamplingScheme::random(c.samples, c.seed);
      const auto m = sample_moments(ann, scheme, 4, policy);
      v.variance = m.variance;
      v.error = m.variance_stderr;
      v.detail["scheme"] = scheme.describe();
      v.detail["mean"] = m.mean;
      if (e == "sample") {
        v.detail["mean_stderr"] = m.mean_stderr;
        v.detail["variance_stderr"] = m.variance_stderr;
      } else {
        v.detail["mean_error"] = m.mean_error;
      }
    } else if (e == "exact") {
      const auto s = exact_square_case(c);
      if (!s) throw ValidationError("exact estimator needs the box [-1,1]^2 with integer r >= 1 and 0 < t < 1/2");
      v.variance = s->variance_value();
      v.detail["mean"] = s->mean_value();
      v.detail["variance_exact"] = s->variance.str();
    }
    values.push_back(std::move(v));
  }
  json est = json::object();
  for (const auto& v : values) {
    json j;
    j["variance"] = v.variance;
    j["error"] = v.error;
    for (const auto& [k, x] : v.detail.items()) j[k] = x;
    est[v.name] = j;
  }
  rep.body["estimators"] = est;
  json disc = json::array();
  for (std::size_t a = 0; a < values.size(); ++a) {
    for (std::size_t b = a + 1; b < values.size(); ++b) {
      json j;
      j["pair"] = values[a].name + "-" + values[b].name;
      j["difference"] = values[a].variance - values[b].variance;
      const double combined = std::hypot(values[a].error, values[b].error);
      j["combined_error"] = combined;
      j["relative"] = rel_diff(values[a].variance, values[b].variance);
      j["sigmas"] = combined > 0.0 ? json(std::abs(values[a].variance - values[b].variance) / combined) : json(nullptr);
      disc.push_back(j);
    }
  }
  rep.body["discrepancies"] = disc;
  finish_json(rep);

  std::ostringstream os;
  os << csv_header(c) << "estimator,variance,error,ratio\n";
  for (const auto& v : values) {
    os << v.name << ',' << format_double(v.variance) << ',' << format_double(v.error) << ','
       << format_double(vol > 0.0 ? v.variance / vol : 0.0) << '\n';
  }
  rep.csv = os.str();
  return rep;
}

// ---------------------------------------------------------------------------
// decompose

inline Report run_decompose(const ExperimentConfig& c, const ExecPolicy& policy = {}) {
  const Annulus ann = c.annulus();
  const double cutoff = c.decompose_cutoff();
  Report rep;
  rep.body = report_header(c);
  const auto p = parseval_variance(ann, cutoff, policy);
  if (p.flagged) rep.flags.push_back("parseval: quadrature error exceeds 1% of the variance");
  const auto dec = decompose(ann, cutoff, ReferenceVariance{p.variance, p.tail.bound, "parseval"}, policy);
  const double vol = annulus_volume(ann);
  rep.body["volume"] = vol;
  rep.body["cutoff"] = cutoff;
  rep.body["reference"] = dec.reference_label;
  rep.body["variance"] = p.variance;
  rep.body["variance_tail"] = tail_json(p.tail);
  rep.body["X"] = dec.x;
  rep.body["Y"] = dec.y;
  rep.body["Z"] = optional_json(dec.z);
  rep.body["main_term"] = dec.main_term;
  rep.body["W"] = dec.w;
  rep.body["X_tail"] = tail_json(dec.x_tail);
  rep.body["Y_tail"] = tail_json(dec.y_tail);
  finish_json(rep);

  std::ostringstream os;
  os << csv_header(c) << "r,t,volume,cutoff,variance,X,Y,Z,W,main_term,variance_tail,series_tail\n";
  os << format_double(c.r) << ',' << format_double(c.t) << ',' << format_double(vol) << ','
     << format_double(cutoff) << ',' << format_double(p.variance) << ',' << format_double(dec.x) << ','
     << format_double(dec.y) << ',' << format_optional(dec.z) << ',' << format_double(dec.w) << ','
     << format_double(dec.main_term) << ',' << format_double(p.tail.bound) << ','
     << format_double(dec.x_tail.bound) << '\n';
  rep.csv = os.str();
  return rep;
}

// ---------------------------------------------------------------------------
// sweep

inline std::string sweep_csv(const ExperimentConfig& c, const SweepTable& table) {
  std::ostringstream os;
  os << csv_header(c) << "r,t,volume,var_sample,var_parseval,X,Y,Z,W,ratio,beta_fit\n";
  for (const auto& row : table.rows) {
    os << format_double(row.r) << ',' << format_double(row.t) << ',' << format_double(row.volume) << ','
       << format_optional(row.var_sample) << ',' << format_optional(row.var_parseval) << ','
       << format_optional(row.x) << ',' << format_optional(row.y) << ',' << format_optional(row.z) << ','
       << format_optional(row.w) << ',' << format_double(row.ratio) << ',' << format_optional(table.beta_fit)
       << '\n';
  }
  return os.str();
}

inline Report run_sweep(const ExperimentConfig& c, const ExecPolicy& policy = {}) {
  SweepConfig sc;
  sc.parseval_factor = c.parseval_factor;
  sc.parseval_cutoff = c.cutoff;
  sc.sample = c.sweep_sample;
  sc.samples = c.samples;
  sc.seed = c.seed;
  sc.decomposition = c.sweep_decomposition;
  sc.series_cutoff = c.series_cutoff;
  const auto table = theorem_sweep(*c.body, c.alpha, c.r_list, sc, policy);
  Report rep;
  rep.body = report_header(c);
  rep.body["alpha"] = table.alpha;
  rep.body["threshold"] = table.threshold;
  rep.body["beta_fit"] = optional_json(table.beta_fit);
  json rows = json::array();
  for (const auto& row : table.rows) {
    json j;
    j["r"] = row.r;
    j["t"] = row.t;
    j["volume"] = row.volume;
    j["var_sample"] = optional_json(row.var_sample);
    j["sample_stderr"] = row.sample_stderr;
    j["var_parseval"] = optional_json(row.var_parseval);
    j["parseval_cutoff"] = row.parseval_cutoff;
    j["parseval_tail"] = row.parseval_tail;
    j["X"] = optional_json(row.x);
    j["Y"] = optional_json(row.y);
    j["Z"] = optional_json(row.z);
    j["W"] = optional_json(row.w);
    j["series_cutoff"] = row.series_cutoff;
    j["series_tail"] = row.series_tail;
    j["ratio"] = row.ratio;
    j["ratio_error"] = row.ratio_error;
    j["ratio_source"] = row.ratio_source;
    j["used_in_fit"] = row.used_in_fit;
    rows.push_back(j);
  }
  rep.body["rows"] = rows;
  for (const auto& w : table.warnings) {
    if (w.rfind("quadrature", 0) == 0) rep.flags.push_back(w);
    else rep.warnings.push_back(w);
  }
  finish_json(rep);
  rep.csv = sweep_csv(c, table);
  return rep;
}

// ---------------------------------------------------------------------------
// oracle

inline Report run_oracle(const ExperimentConfig& c) {
  const auto s = square_stats(c.variant, c.n, c.t);
  Report rep;
  rep.body = report_header(c);
  rep.body["variant"] = to_string(s.variant);
  rep.body["n"] = s.n;
  rep.body["t"] = s.t;
  rep.body["mean"] = s.mean_value();
  rep.body["variance"] = s.variance_value();
  rep.body["mean_exact"] = s.mean.str();
  rep.body["variance_exact"] = s.variance.str();
  json dist = json::array();
  for (const auto& vm : s.distribution) {
    json j;
    j["value"] = vm.value;
    j["measure"] = static_cast<double>(vm.measure);
    j["measure_exact"] = vm.measure.str();
    dist.push_back(j);
  }
  rep.body["distribution"] = dist;
  finish_json(rep);
  std::ostringstream os;
  os << csv_header(c) << "value,measure,measure_exact\n";
  for (const auto& vm : s.distribution) {
    os << vm.value << ',' << format_double(static_cast<double>(vm.measure)) << ',' << vm.measure.str() << '\n';
  }
  rep.csv = os.str();
  return rep;
}

// ---------------------------------------------------------------------------
// selftest

struct SelfCheck {
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool relative = false;
  [[nodiscard]] double error() const {
    const double e = std::abs(value - expected);
    return relative ? e / std::abs(expected) : e;
  }
  [[nodiscard]] bool ok() const { return error() <= tolerance; }
};

inline std::vector<SelfCheck> selftest_checks() {
  std::vector<SelfCheck> out;
  out.push_back({"residue_integral", residue_integral_check().value, kPi / 2.0, 1e-8, false});
  out.push_back({"curvature_integral_disk", curvature_integral(ConvexBody::ball(2, 1.0)), 2.0 * kPi, 1e-6, true});
  const auto ellipse = ConvexBody::ellipsoid({2.0, 1.0});
  out.push_back({"curvature_integral_ellipse", curvature_integral(ellipse), 2.0 * volume(ellipse), 1e-6, true});
  const auto ellipsoid = ConvexBody::ellipsoid({2.0, 1.0, 1.0});
  out.push_back({"curvature_integral_ellipsoid", curvature_integral(ellipsoid), 3.0 * volume(ellipsoid), 1e-6, true});
  for (double angle : {0.3, 1.1, 2.5}) {
    const Vec xi{std::cos(angle), std::sin(angle)};
    out.push_back({"curvature_fd_ellipse_" + format_short(angle), curvature_fd(ellipse, xi), curvature(ellipse, xi),
                   5e-4, true});
  }
  for (double nu : {0.0, 0.5, 1.0, 1.5, 2.5}) {
    for (double z : {0.7, 5.0, 42.0}) {
      out.push_back({"bessel_j(" + format_short(nu) + "," + format_short(z) + ")", bessel_j(nu, z),
                     boost::math::cyl_bessel_j(nu, z), 1e-12, false});
    }
  }
  out.push_back({"ft_ball_3d_half", ft_ball_radial(3, 1.0, 0.5), 4.0 / kPi, 1e-10, false});
  return out;
}

inline Report run_selftest(const ExperimentConfig& c) {
  Report rep;
  rep.body = report_header(c);
  json checks = json::array();
  std::ostringstream os;
  os << csv_header(c) << "check,value,expected,error,tolerance,ok\n";
  for (const auto& k : selftest_checks()) {
    json j;
    j["name"] = k.name;
    j["value"] = k.value;
    j["expected"] = k.expected;
    j["error"] = k.error();
    j["tolerance"] = k.tolerance;
    j["ok"] = k.ok();
    checks.push_back(j);
    if (!k.ok()) rep.flags.push_back("selftest: " + k.name + " failed");
    os << k.name << ',' << format_double(k.value) << ',' << format_double(k.expected) << ','
       << format_double(k.error()) << ',' << format_double(k.tolerance) << ',' << (k.ok() ? "true" : "false") << '\n';
  }
  rep.body["checks"] = checks;
  finish_json(rep);
  rep.csv = os.str();
  return rep;
}

inline Report run_command(const ExperimentConfig& c) {
  const ExecPolicy policy{c.workers};
  switch (c.command) {
    case Command::count: return run_count(c, policy);
    case Command::variance: return run_variance(c, policy);
    case Command::decompose: return run_decompose(c, policy);
    case Command::sweep: return run_sweep(c, policy);
    case Command::oracle: return run_oracle(c);
    case Command::selftest: return run_selftest(c);
  }
  throw ValidationError("unknown command");
}

/// The bytes written for the configured format.
inline std::string render(const ExperimentConfig& c, const Report& rep) {
  return c.format == "csv" ? rep.csv : rep.body.dump(2) + "\n";
}

}  // namespace latvar
