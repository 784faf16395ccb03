// decomposition.hpp
//
// Var = X + Y + Z with
//
//   X = 2 pi^-2 r^{d-1} sum_n K(sigma(n))^-1 sin^2(pi t h(n)) |n|^{-d-1}
//   Y = -2 pi^-2 r^{d-1} sum_n cos(2 pi r zeta(n) - pi (d-1)/2) (K+ K-)^{-1/2}
//         sin(pi t sigma(n).n) sin(pi t sigma(-n).n) |n|^{-d-1}
//
// where h(n) = sigma(n).n, sigma(-n).n = -h(-n), zeta(n) = h(n) + h(-n) and
// K+- = K(sigma(+-n)). Z is the residual against a reference variance. The
// main term of X is d |Omega| r^{d-1} t.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "latvar/convex_body.hpp"
#include "latvar/fourier.hpp"
#include "latvar/lattice_count.hpp"
#include "latvar/numeric.hpp"
#include "latvar/quadrature.hpp"

namespace latvar {

// ---------------------------------------------------------------------------
// Geometry at lattice frequencies.

struct FrequencyGeometry {
  double h_plus = 0.0;   // h(n)
  double h_minus = 0.0;  // h(-n)
  double kinv_plus = 0.0;
  double kinv_minus = 0.0;
};

namespace detail {

class SeriesGeometry {
 public:
  explicit SeriesGeometry(const ConvexBody& body) : body_(body) {
    if (!body.is_smooth()) throw UnsupportedKind("series: body kind is not smooth");
    d_ = body.dim();
    if (const auto* b = body.as<Ball>()) {
      kind_ = 0;
      radius_ = b->radius;
      kinv_ = std::pow(b->radius, d_ - 1);
    } else if (const auto* e = body.as<Ellipsoid>()) {
      kind_ = 1;
      axes2_ = Vec(d_);
      det2_ = 1.0;
      for (int i = 0; i < d_; ++i) {
        axes2_[i] = e->semiaxes[i] * e->semiaxes[i];
        det2_ *= axes2_[i];
      }
    } else {
      kind_ = 2;
    }
  }

  [[nodiscard]] FrequencyGeometry at(const IVec& n, double norm_n) const {
    FrequencyGeometry g;
    if (kind_ == 0) {
      g.h_plus = g.h_minus = radius_ * norm_n;
      g.kinv_plus = g.kinv_minus = kinv_;
    } else if (kind_ == 1) {
      double s = 0.0;
      for (int i = 0; i < d_; ++i) s += axes2_[i] * static_cast<double>(n[i]) * static_cast<double>(n[i]);
      const double h = std::sqrt(s);
      g.h_plus = g.h_minus = h;
      // K^{-1} = prod a_i^2 / h(u)^{d+1} at the unit direction u
      g.kinv_plus = g.kinv_minus = det2_ / std::pow(h / norm_n, d_ + 1);
    } else {
      const Vec v = n.real();
      const BodyPointData p = support_point(body_, v);
      const BodyPointData m = support_point(body_, -v);
      g.h_plus = dot(p.sigma, v);
      g.h_minus = -dot(m.sigma, v);
      g.kinv_plus = 1.0 / p.curvature;
      g.kinv_minus = 1.0 / m.curvature;
    }
    return g;
  }

 private:
  const ConvexBody& body_;
  int d_ = 2;
  int kind_ = 0;
  double radius_ = 1.0;
  double kinv_ = 1.0;
  Vec axes2_;
  double det2_ = 1.0;
};

}  // namespace detail

struct SeriesResult {
  double x = 0.0;
  double y = 0.0;
  TailEstimate x_tail;
  TailEstimate y_tail;
  double cutoff = 0.0;
  std::uint64_t terms = 0;
};

/// Default truncation radius max(8 / t, 64).
inline double default_series_cutoff(double t) { return t > 0.0 ? std::max(8.0 / t, 64.0) : 64.0; }

/// X and Y truncated to 0 < |n| <= N in one pass, with majorant tails
/// 2 pi^-2 r^{d-1} max K^{-1} sum_{|n|>N} min{1, (pi t max h |n|)^2} |n|^{-d-1}.
inline SeriesResult xy_series(const Annulus& ann, double cutoff, bool want_y = true, const ExecPolicy& policy = {}) {
  const ShellPlan plan = shell_plan(cutoff);
  SeriesResult out;
  out.cutoff = cutoff;
  const int d = ann.dim();
  const auto ext = sphere_extremes(ann.body);
  const double pre = 2.0 / (kPi * kPi) * std::pow(ann.r, d - 1);
  const double majorant = pre * ext.max_inverse_curvature * lattice_tail_sum(d, cutoff, kPi * ann.t * ext.max_support);
  out.x_tail = {cutoff, majorant, 0.0, "curvature-majorant"};
  out.y_tail = out.x_tail;
  if (ann.t == 0.0) return out;

  const detail::SeriesGeometry geo(ann.body);
  const double pt = kPi * ann.t;
  const double tr = 2.0 * kPi * ann.r;
  const double shift = 0.5 * kPi * (d - 1);
  struct Shell {
    CompensatedSum x, y;
    std::uint64_t terms = 0;
  };
  const auto shells = map_shells<Shell>(plan.shells, policy, [&](std::int64_t k) {
    Shell s;
    for_each_in_shell(d, k, plan.max_norm2, [&](const IVec& n) {
      const auto n2 = static_cast<double>(n.norm2());
      const double rho = std::sqrt(n2);
      const double w = 1.0 / (n2 * n2 * std::pow(rho, d - 3));  // |n|^{-d-1}
      const FrequencyGeometry g = geo.at(n, rho);
      const double sp = std::sin(pt * g.h_plus);
      s.x.add(g.kinv_plus * sp * sp * w);
      if (want_y) {
        const double sm = std::sin(pt * g.h_minus);
        // sin(pi t sigma(-n).n) = -sin(pi t h(-n))
        s.y.add(std::cos(tr * (g.h_plus + g.h_minus) - shift) * std::sqrt(g.kinv_plus * g.kinv_minus) * sp * sm * w);
      }
      ++s.terms;
    });
    return s;
  });
  CompensatedSum x;
  CompensatedSum y;
  for (const auto& s : shells) {
    x.add(s.x.value());
    y.add(s.y.value());
    out.terms += s.terms;
  }
  out.x = pre * x.value();
  out.y = pre * y.value();  // -pre * (...) * (-1) from sigma(-n).n = -h(-n)
  return out;
}

inline SeriesResult x_series(const Annulus& ann, double cutoff, const ExecPolicy& policy = {}) {
  return xy_series(ann, cutoff, false, policy);
}

inline SeriesResult y_series(const Annulus& ann, double cutoff, const ExecPolicy& policy = {}) {
  return xy_series(ann, cutoff, true, policy);
}

/// d |Omega| r^{d-1} t
inline double main_term(const Annulus& ann) {
  return ann.dim() * volume(ann.body) * std::pow(ann.r, ann.dim() - 1) * ann.t;
}

// ---------------------------------------------------------------------------
// integral_0^inf sin^2 s / s^2 ds = pi / 2

/// sin^2(s) / s^2, equal to 1 at s = 0.
inline double sinc_squared(double s) {
  if (std::abs(s) < 1e-4) {
    const double s2 = s * s;
    return 1.0 - s2 / 3.0 + 2.0 * s2 * s2 / 45.0;
  }
  const double q = std::sin(s) / s;
  return q * q;
}

struct ResidueCheck {
  double value = 0.0;
  double quadrature_error = 0.0;
  double truncation = 0.0;  // M at which the analytic tail takes over
  double tail = 0.0;
};

/// Adaptive quadrature over [0, M], M = 2000 pi, one panel per half period,
/// plus the tail 1/(2M) + sin(2M)/(4M^2) - cos(2M)/(4M^3) + O(M^-4).
inline ResidueCheck residue_integral_check() {
  constexpr int kPanels = 4000;
  const double step = 0.5 * kPi;
  ResidueCheck out;
  out.truncation = kPanels * step;
  CompensatedSum sum;
  for (int i = 0; i < kPanels; ++i) {
    const auto r = integrate_adaptive(sinc_squared, i * step, (i + 1) * step, 1e-16);
    sum.add(r.value);
    out.quadrature_error += r.error;
  }
  const double m = out.truncation;
  out.tail = 1.0 / (2.0 * m) + std::sin(2.0 * m) / (4.0 * m * m) - std::cos(2.0 * m) / (4.0 * m * m * m);
  sum.add(out.tail);
  out.value = sum.value();
  return out;
}

/// 2 pi^-2 r^{d-1} integral_S K^{-1}(theta) pi t h(theta) dtheta * integral_0^inf sin^2/s^2,
/// the small-t limit of X written as a sphere quadrature; equals main_term.
inline double main_term_by_quadrature(const Annulus& ann, int resolution = 512) {
  const double residue = residue_integral_check().value;
  return 2.0 / (kPi * kPi) * std::pow(ann.r, ann.dim() - 1) * kPi * ann.t * curvature_integral(ann.body, resolution) *
         residue;
}

// ---------------------------------------------------------------------------
// Decomposition.

struct ReferenceVariance {
  double value = 0.0;
  double error = 0.0;
  std::string label;  // "parseval" or "sample"
};

struct DecompositionResult {
  double x = 0.0;
  double y = 0.0;
  double main_term = 0.0;
  double w = 0.0;
  std::optional<double> z;
  bool z_missing = false;
  std::string reference_label;
  double reference = 0.0;
  double cutoff = 0.0;
  TailEstimate x_tail;
  TailEstimate y_tail;
};

inline DecompositionResult decompose(const Annulus& ann, double cutoff,
                                     const std::optional<ReferenceVariance>& reference,
                                     const ExecPolicy& policy = {}) {
  DecompositionResult out;
  out.cutoff = cutoff;
  const auto s = xy_series(ann, cutoff, true, policy);
  out.x = s.x;
  out.y = s.y;
  out.x_tail = s.x_tail;
  out.y_tail = s.y_tail;
  out.main_term = main_term(ann);
  out.w = out.x - out.main_term;
  if (reference) {
    out.reference = reference->value;
    out.reference_label = reference->label;
    out.z = reference->value - out.x - out.y;
  } else {
    out.z_missing = true;
  }
  return out;
}

/// Z through the cross terms sum_n 2 Re(A conj B) + |B|^2, B = chi^ - A (balls only).
inline double z_cross_terms(const Annulus& ann, double cutoff, const ExecPolicy& policy = {}) {
  if (!ann.body.as<Ball>()) throw UnsupportedKind("z_cross_terms: balls only");
  const ShellPlan plan = shell_plan(cutoff);
  const AnnulusTransform ft(ann);
  const auto shells = map_shells<CompensatedSum>(plan.shells, policy, [&](std::int64_t k) {
    CompensatedSum s;
    for_each_in_shell(ann.dim(), k, plan.max_norm2, [&](const IVec& n) {
      const Vec xi = n.real();
      const Complex a = asymptotic_A(ann, xi);
      const Complex b = ft.evaluate(xi).value - a;
      s.add(2.0 * (a * std::conj(b)).real() + std::norm(b));
    });
    return s;
  });
  CompensatedSum total;
  for (const auto& s : shells) total.add(s.value());
  return total.value();
}

// ---------------------------------------------------------------------------
// Sweep over r with t = r^{-alpha}.

struct SweepConfig {
  bool parseval = true;
  double parseval_factor = 64.0;  // Parseval cutoff = factor / t
  std::optional<double> parseval_cutoff;
  bool sample = true;
  std::uint64_t samples = 200000;
  std::uint64_t seed = 42;
  bool decomposition = true;
  std::optional<double> series_cutoff;  // default max(8/t, 64)
};

struct SweepRow {
  double r = 0.0;
  double t = 0.0;
  double volume = 0.0;
  std::optional<double> var_parseval;
  double parseval_tail = 0.0;
  double parseval_cutoff = 0.0;
  std::optional<double> var_sample;
  double sample_stderr = 0.0;
  std::optional<double> x, y, z, w;
  double series_cutoff = 0.0;
  double series_tail = 0.0;
  double ratio = 0.0;        // variance / volume from the primary estimator
  double ratio_error = 0.0;  // its error bar
  std::string ratio_source;
  bool used_in_fit = false;
};

struct SweepTable {
  double alpha = 0.0;
  double threshold = 0.0;  // (d-1)/(d+1)
  std::vector<SweepRow> rows;
  std::optional<double> beta_fit;
  std::vector<std::string> warnings;
};

/// Least-squares slope of log|ratio - 1| against log t over the rows whose
/// deviation exceeds ten times their own error bar.
inline std::optional<double> fit_beta(std::vector<SweepRow>& rows) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (auto& row : rows) {
    const double dev = std::abs(row.ratio - 1.0);
    row.used_in_fit = dev > 10.0 * row.ratio_error && dev > 0.0;
    if (row.used_in_fit) {
      xs.push_back(std::log(row.t));
      ys.push_back(std::log(dev));
    }
  }
  if (xs.size() < 2) return std::nullopt;
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

inline SweepTable theorem_sweep(const ConvexBody& body, double alpha, const std::vector<double>& r_list,
                                const SweepConfig& config, const ExecPolicy& policy = {}) {
  if (!(alpha > 0.0)) throw DomainError("theorem_sweep: alpha must be positive");
  if (r_list.empty()) throw DomainError("theorem_sweep: r list is empty");
  if (!config.parseval && !config.sample) throw DomainError("theorem_sweep: no variance estimator selected");
  SweepTable table;
  const int d = body.dim();
  table.alpha = alpha;
  table.threshold = (d - 1.0) / (d + 1.0);
  if (alpha <= table.threshold) {
    table.warnings.push_back("alpha = " + std::to_string(alpha) + " is at or below (d-1)/(d+1) = " +
                             std::to_string(table.threshold) + "; the ratio is not expected to tend to 1");
  }
  for (double r : r_list) {
    SweepRow row;
    row.r = r;
    row.t = std::pow(r, -alpha);
    const Annulus ann(body, r, row.t);
    row.volume = annulus_volume(ann);
    if (config.parseval) {
      row.parseval_cutoff = config.parseval_cutoff.value_or(config.parseval_factor / row.t);
      const auto p = parseval_variance(ann, row.parseval_cutoff, policy);
      row.var_parseval = p.variance;
      row.parseval_tail = p.tail.bound;
      if (p.flagged) table.warnings.push_back("quadrature error above 1% at r = " + std::to_string(r));
    }
    if (config.sample) {
      const auto m = sample_moments(ann, SamplingScheme::random(config.samples, config.seed), 4, policy);
      row.var_sample = m.variance;
      row.sample_stderr = m.variance_stderr;
    }
    if (config.decomposition && body.is_smooth()) {
      row.series_cutoff = config.series_cutoff.value_or(default_series_cutoff(row.t));
      std::optional<ReferenceVariance> ref;
      if (row.var_parseval) ref = ReferenceVariance{*row.var_parseval, row.parseval_tail, "parseval"};
      else if (row.var_sample) ref = ReferenceVariance{*row.var_sample, row.sample_stderr, "sample"};
      const auto dec = decompose(ann, row.series_cutoff, ref, policy);
      row.x = dec.x;
      row.y = dec.y;
      row.z = dec.z;
      row.w = dec.w;
      row.series_tail = dec.x_tail.bound;
    }
    if (row.var_parseval) {
      row.ratio = *row.var_parseval / row.volume;
      row.ratio_error = row.parseval_tail / row.volume;
      row.ratio_source = "parseval";
    } else {
      row.ratio = *row.var_sample / row.volume;
      row.ratio_error = row.sample_stderr / row.volume;
      row.ratio_source = "sample";
    }
    table.rows.push_back(row);
  }
  table.beta_fit = fit_beta(table.rows);
  if (!table.beta_fit) table.warnings.push_back("fewer than two rows clear ten error bars; no decay exponent fitted");
  return table;
}

}  // namespace latvar
