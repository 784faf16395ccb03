// fourier.hpp
//
// Fourier transforms of bodies and annuli with the convention
//
//     chi^(xi) = integral over Omega of exp(-2 pi i xi.x) dx,
//
// the stationary-phase main terms, and the Parseval variance
//
//     Var = sum_{n != 0} |chi^_{Omega(r,t)}(n)|^2.
//
// Lattice sums run over unit radial shells (k-1)^2 < |n|^2 <= k^2 in
// increasing k, lexicographic inside a shell. Each shell is accumulated with
// compensation into its own slot and the slots are combined in shell order,
// so the result does not depend on the number of workers.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "latvar/bessel.hpp"
#include "latvar/convex_body.hpp"
#include "latvar/lattice_count.hpp"
#include "latvar/numeric.hpp"
#include "latvar/quadrature.hpp"
#include "latvar/vec.hpp"

namespace latvar {

using Complex = std::complex<double>;

enum class CoefficientMethod { closed_form, quadrature, asymptotic };

inline std::string to_string(CoefficientMethod m) {
  switch (m) {
    case CoefficientMethod::closed_form: return "closed_form";
    case CoefficientMethod::quadrature: return "quadrature";
    case CoefficientMethod::asymptotic: return "asymptotic";
  }
  return "unknown";
}

struct FourierCoefficient {
  IVec frequency;
  Complex value;
  CoefficientMethod method = CoefficientMethod::closed_form;
  double error = 0.0;  // quadrature error estimate; 0 for closed forms
};

struct TailEstimate {
  double cutoff_radius = 0.0;
  double bound = 0.0;
  double envelope_constant = 0.0;
  std::string method;
};

// ---------------------------------------------------------------------------
// Shell enumeration.

namespace detail {

inline std::int64_t isqrt_floor(std::int64_t v) {
  if (v < 0) return -1;
  auto s = static_cast<std::int64_t>(std::sqrt(static_cast<double>(v)));
  while (s * s > v) --s;
  while ((s + 1) * (s + 1) <= v) ++s;
  return s;
}

template <class Fn>
void shell_recurse(IVec& n, int axis, std::int64_t used, std::int64_t lo2, std::int64_t hi2, Fn& fn) {
  const int d = n.dim();
  if (axis == d - 1) {
    // last coordinate: lo2 - used < m^2 <= hi2 - used
    const std::int64_t top = isqrt_floor(hi2 - used);
    if (top < 0) return;
    const std::int64_t floor_lo = lo2 - used;
    const std::int64_t bottom = floor_lo < 0 ? 0 : isqrt_floor(floor_lo) + 1;
    if (bottom > top) return;
    for (std::int64_t m = -top; m <= -bottom; ++m) {
      if (m == 0) continue;
      n[axis] = m;
      fn(static_cast<const IVec&>(n));
    }
    for (std::int64_t m = bottom; m <= top; ++m) {
      n[axis] = m;
      fn(static_cast<const IVec&>(n));
    }
    return;
  }
  const std::int64_t reach = isqrt_floor(hi2 - used);
  for (std::int64_t m = -reach; m <= reach; ++m) {
    n[axis] = m;
    shell_recurse(n, axis + 1, used + m * m, lo2, hi2, fn);
  }
}

}  // namespace detail

/// Integer vectors with (k-1)^2 < |n|^2 <= min(k^2, max_norm2), lexicographic.
template <class Fn>
void for_each_in_shell(int d, std::int64_t k, std::int64_t max_norm2, Fn&& fn) {
  IVec n(d);
  const std::int64_t lo2 = (k - 1) * (k - 1);
  const std::int64_t hi2 = std::min(k * k, max_norm2);
  if (hi2 <= lo2) return;
  detail::shell_recurse(n, 0, 0, lo2, hi2, fn);
}

/// Cutoff N as shell count and the largest admissible |n|^2.
struct ShellPlan {
  std::int64_t shells = 0;
  std::int64_t max_norm2 = 0;
};

inline ShellPlan shell_plan(double cutoff) {
  if (!(cutoff >= 1.0)) throw DomainError("cutoff must be >= 1");
  if (cutoff > 1e7) throw DomainError("cutoff too large");
  const auto n2 = static_cast<std::int64_t>(std::floor(static_cast<long double>(cutoff) * cutoff));
  return {static_cast<std::int64_t>(std::ceil(cutoff)), n2};
}

/// Runs fn(k) for every shell k = 1..shells and returns the results by shell.
template <class Result, class ShellFn>
std::vector<Result> map_shells(std::int64_t shells, const ExecPolicy& policy, ShellFn&& fn) {
  std::vector<Result> out(static_cast<std::size_t>(shells));
  for_each_chunk(out.size(), policy, [&](std::size_t c) { out[c] = fn(static_cast<std::int64_t>(c) + 1); });
  return out;
}

// ---------------------------------------------------------------------------
// Closed forms.

/// Ball of radius R in R^d: R^d (2 pi)^{d/2} J_{d/2}(z) / z^{d/2}, z = 2 pi R |xi|.
inline double ft_ball_radial(int d, double radius, double rho) {
  const double z = 2.0 * kPi * radius * rho;
  return std::pow(radius, d) * std::pow(2.0 * kPi, 0.5 * d) * bessel_j_scaled(0.5 * d, z);
}

inline Complex ft_ball(int d, double radius, const Vec& xi) {
  if (d < 2) throw DomainError("ft_ball: d must be >= 2");
  if (xi.dim() != d) throw DomainError("ft_ball: frequency dimension mismatch");
  return {ft_ball_radial(d, radius, norm(xi)), 0.0};
}

/// 1-D transform of [-s, s]: sin(2 pi s x) / (pi x), 2s at x = 0.
inline double ft_interval(double s, double x) {
  if (x == 0.0) return 2.0 * s;
  return std::sin(2.0 * kPi * s * x) / (kPi * x);
}

inline double ft_box(const Vec& halfsides, const Vec& xi) {
  if (xi.dim() != halfsides.dim()) throw DomainError("ft_box: frequency dimension mismatch");
  double p = 1.0;
  for (int i = 0; i < xi.dim(); ++i) p *= ft_interval(halfsides[i], xi[i]);
  return p;
}

/// Affine identity: chi^_E(xi) = (prod a_i) chi^_{unit ball}(A xi).
inline Complex ft_ellipsoid(const Vec& semiaxes, const Vec& xi) {
  const int d = semiaxes.dim();
  if (xi.dim() != d) throw DomainError("ft_ellipsoid: frequency dimension mismatch");
  double det = 1.0;
  double rho2 = 0.0;
  for (int i = 0; i < d; ++i) {
    det *= semiaxes[i];
    rho2 += semiaxes[i] * semiaxes[i] * xi[i] * xi[i];
  }
  return {det * ft_ball_radial(d, 1.0, std::sqrt(rho2)), 0.0};
}

// ---------------------------------------------------------------------------
// Gauss-map quadrature:
//   chi^(xi) = -(2 pi i |xi|)^{-1} integral over S^{d-1} of
//              (xi^ . theta) exp(-2 pi i xi . sigma(theta)) K(sigma(theta))^{-1} dtheta

struct QuadratureResult {
  Complex value;
  double error = 0.0;
  std::int64_t nodes = 0;
};

inline constexpr std::int64_t kDefaultNodeBudget = std::int64_t{1} << 22;

/// Equispaced Gauss-map samples of a planar body, stored at a power-of-two
/// size; coarser rules are read with a stride. Immutable once built.
class CircleTable {
 public:
  CircleTable() = default;
  CircleTable(const ConvexBody& body, std::int64_t size) : size_(size) {
    if (body.dim() != 2) throw DomainError("CircleTable: planar bodies only");
    if (!body.is_smooth()) throw UnsupportedKind("quadrature: body kind is not smooth");
    cos_.resize(size);
    sin_.resize(size);
    sx_.resize(size);
    sy_.resize(size);
    kinv_.resize(size);
    for (std::int64_t j = 0; j < size; ++j) {
      const double a = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(size);
      const Vec u{std::cos(a), std::sin(a)};
      const BodyPointData p = support_point(body, u);
      cos_[j] = u[0];
      sin_[j] = u[1];
      sx_[j] = p.sigma[0];
      sy_[j] = p.sigma[1];
      kinv_[j] = 1.0 / p.curvature;
    }
  }

  [[nodiscard]] std::int64_t size() const { return size_; }

  // scales[i] are dilation factors; returns sum_i coeff[i] * chi^_{scales[i] Omega}(xi)
  // scaled as scales^d chi^(scales xi) (the factor scales^d is applied here).
  [[nodiscard]] QuadratureResult integrate(const Vec& xi, std::int64_t nodes, const double* scales,
                                           const double* coeffs, int terms) const {
    if (nodes > size_ || size_ % nodes != 0) throw DomainError("CircleTable: node count not available");
    const std::int64_t stride = size_ / nodes;
    const double rho = norm(xi);
    const double ux = xi[0] / rho;
    const double uy = xi[1] / rho;
    Complex full{0.0, 0.0};
    Complex half{0.0, 0.0};
    for (std::int64_t j = 0, idx = 0; j < nodes; ++j, idx += stride) {
      const double g = (ux * cos_[idx] + uy * sin_[idx]) * kinv_[idx];
      const double phase = xi[0] * sx_[idx] + xi[1] * sy_[idx];
      Complex acc{0.0, 0.0};
      for (int i = 0; i < terms; ++i) {
        const double arg = -2.0 * kPi * scales[i] * phase;
        // d = 2: the boundary integral of the dilate carries scale^{d-1}
        acc += coeffs[i] * scales[i] * Complex(std::cos(arg), std::sin(arg));
      }
      full += g * acc;
      if ((j & 1) == 0) half += g * acc;
    }
    const double w = 2.0 * kPi / static_cast<double>(nodes);
    const Complex pre = Complex(0.0, 1.0) / (2.0 * kPi * rho);  // -(2 pi i |xi|)^{-1}
    const Complex v_full = pre * (w * full);
    const Complex v_half = pre * (2.0 * w * half);
    return {v_full, std::abs(v_full - v_half), nodes};
  }

 private:
  std::int64_t size_ = 0;
  std::vector<double> cos_, sin_, sx_, sy_, kinv_;
};

namespace detail {

inline std::int64_t next_pow2(double x) {
  std::int64_t p = 128;
  while (static_cast<double>(p) < x) p <<= 1;
  return p;
}

/// At least 8 nodes per oscillation: the phase xi.sigma sweeps at most
/// 2 * scale * diameter * |xi| cycles around the circle.
inline std::int64_t circle_nodes_needed(double scale, double max_support, double rho, std::int64_t min_nodes) {
  const double cycles = 2.0 * scale * 2.0 * max_support * rho;
  return next_pow2(std::max(8.0 * cycles, static_cast<double>(min_nodes)));
}

inline QuadratureResult sphere_quadrature(const ConvexBody& body, const Vec& xi, int polar, int azimuth) {
  const double rho = norm(xi);
  const Vec axis = (1.0 / rho) * xi;
  CompensatedSum re;
  CompensatedSum im;
  for (const auto& node : sphere_rule(polar, azimuth, axis)) {
    const BodyPointData p = support_point(body, node.direction);
    const double g = node.weight * dot(axis, node.direction) / p.curvature;
    const double arg = -2.0 * kPi * dot(xi, p.sigma);
    re.add(g * std::cos(arg));
    im.add(g * std::sin(arg));
  }
  const Complex pre = Complex(0.0, 1.0) / (2.0 * kPi * rho);
  return {pre * Complex(re.value(), im.value()), 0.0, static_cast<std::int64_t>(polar) * azimuth};
}

}  // namespace detail

/// Quadrature transform of a smooth body. The node count is raised to at
/// least 8 per oscillation; exceeding `budget` raises TruncationError.
inline QuadratureResult ft_body_quadrature(const ConvexBody& body, const Vec& xi, std::int64_t min_nodes = 0,
                                           std::int64_t budget = kDefaultNodeBudget) {
  if (!body.is_smooth()) throw UnsupportedKind("ft_body_quadrature: body kind is not smooth");
  detail::require_dim(body, xi, "ft_body_quadrature");
  const double rho = norm(xi);
  if (rho == 0.0) throw DomainError("ft_body_quadrature: xi must be nonzero");
  const double maxh = sphere_extremes(body).max_support;
  if (body.dim() == 2) {
    const std::int64_t nodes = detail::circle_nodes_needed(1.0, maxh, rho, min_nodes);
    if (nodes > budget) throw TruncationError("ft_body_quadrature: node budget exceeded");
    const CircleTable table(body, nodes);
    const double one = 1.0;
    return table.integrate(xi, nodes, &one, &one, 1);
  }
  if (body.dim() == 3) {
    const double cycles = 2.0 * maxh * rho;
    const double side = std::max({64.0, 8.0 * cycles, std::sqrt(static_cast<double>(min_nodes))});
    const int polar = static_cast<int>(std::ceil(side));
    const int azimuth = polar;
    if (static_cast<std::int64_t>(polar) * azimuth > budget) {
      throw TruncationError("ft_body_quadrature: node budget exceeded");
    }
    auto fine = detail::sphere_quadrature(body, xi, polar, azimuth);
    const auto coarse = detail::sphere_quadrature(body, xi, (3 * polar) / 4, (3 * azimuth) / 4);
    fine.error = std::abs(fine.value - coarse.value);
    return fine;
  }
  throw DomainError("ft_body_quadrature: d must be 2 or 3");
}

/// Dispatch: closed form where available, quadrature otherwise.
inline FourierCoefficient ft_body(const ConvexBody& body, const Vec& xi) {
  detail::require_dim(body, xi, "ft_body");
  FourierCoefficient c;
  if (const auto* b = body.as<Ball>()) {
    c.value = ft_ball(b->dim, b->radius, xi);
  } else if (const auto* e = body.as<Ellipsoid>()) {
    c.value = ft_ellipsoid(e->semiaxes, xi);
  } else if (const auto* bx = body.as<Box>()) {
    c.value = {ft_box(bx->halfsides, xi), 0.0};
  } else if (norm(xi) == 0.0) {
    c.value = {volume(body), 0.0};
  } else {
    const auto q = ft_body_quadrature(body, xi);
    c.value = q.value;
    c.error = q.error;
    c.method = CoefficientMethod::quadrature;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Annulus transforms.

/// Evaluates chi^_{Omega(r,t)} = a^d chi^(a xi) - b^d chi^(b xi), a, b = r +- t/2,
/// with kind-specific fast paths. Quadrature tables are built by prepare().
class AnnulusTransform {
 public:
  explicit AnnulusTransform(Annulus ann, std::int64_t budget = kDefaultNodeBudget)
      : ann_(std::move(ann)), budget_(budget) {
    d_ = ann_.dim();
    a_ = ann_.outer();
    b_ = ann_.inner();
    if (const auto* bl = ann_.body.as<Ball>()) {
      kind_ = Kind::ball;
      radius_ = bl->radius;
    } else if (const auto* e = ann_.body.as<Ellipsoid>()) {
      kind_ = Kind::ellipsoid;
      axes_ = e->semiaxes;
      det_ = 1.0;
      for (double s : e->semiaxes) det_ *= s;
    } else if (const auto* bx = ann_.body.as<Box>()) {
      kind_ = Kind::box;
      axes_ = bx->halfsides;
    } else {
      kind_ = Kind::quadrature;
      if (d_ != 2) throw DomainError("annulus quadrature: d must be 2");
      max_support_ = sphere_extremes(ann_.body).max_support;
    }
  }

  [[nodiscard]] const Annulus& annulus() const { return ann_; }
  [[nodiscard]] CoefficientMethod method() const {
    return kind_ == Kind::quadrature ? CoefficientMethod::quadrature : CoefficientMethod::closed_form;
  }

  /// Sizes the quadrature table for frequencies up to max_norm.
  void prepare(double max_norm) {
    if (kind_ != Kind::quadrature) return;
    const std::int64_t nodes = detail::circle_nodes_needed(a_, max_support_, max_norm, 0);
    if (nodes > budget_) throw TruncationError("annulus quadrature: node budget exceeded");
    if (!table_ || table_->size() < nodes) table_ = std::make_shared<const CircleTable>(ann_.body, nodes);
  }

  [[nodiscard]] FourierCoefficient evaluate(const Vec& xi) const {
    detail::require_dim(ann_.body, xi, "ft_annulus");
    FourierCoefficient c;
    c.method = method();
    if (ann_.t == 0.0) return c;
    const double rho = norm(xi);
    if (rho == 0.0) {
      c.value = {annulus_volume(ann_), 0.0};
      return c;
    }
    switch (kind_) {
      case Kind::ball:
        c.value = {ft_ball_radial(d_, radius_ * a_, rho) - ft_ball_radial(d_, radius_ * b_, rho), 0.0};
        break;
      case Kind::ellipsoid: {
        double rho2 = 0.0;
        for (int i = 0; i < d_; ++i) rho2 += axes_[i] * axes_[i] * xi[i] * xi[i];
        const double q = std::sqrt(rho2);
        c.value = {det_ * (ft_ball_radial(d_, a_, q) - ft_ball_radial(d_, b_, q)), 0.0};
        break;
      }
      case Kind::box: {
        double pa = 1.0;
        double pb = 1.0;
        for (int i = 0; i < d_; ++i) {
          pa *= ft_interval(a_ * axes_[i], xi[i]);
          pb *= ft_interval(b_ * axes_[i], xi[i]);
        }
        c.value = {pa - pb, 0.0};
        break;
      }
      case Kind::quadrature: {
        const std::int64_t nodes = detail::circle_nodes_needed(a_, max_support_, rho, 0);
        if (nodes > budget_) throw TruncationError("annulus quadrature: node budget exceeded");
        std::shared_ptr<const CircleTable> table = table_;
        if (!table || table->size() < nodes) table = std::make_shared<const CircleTable>(ann_.body, nodes);
        const double scales[2] = {a_, b_};
        const double coeffs[2] = {1.0, -1.0};
        const auto q = table->integrate(xi, nodes, scales, coeffs, 2);
        c.value = q.value;
        c.error = q.error;
        break;
      }
    }
    return c;
  }

  [[nodiscard]] FourierCoefficient evaluate(const IVec& n) const {
    auto c = evaluate(n.real());
    c.frequency = n;
    return c;
  }

 private:
  enum class Kind { ball, ellipsoid, box, quadrature };
  Annulus ann_;
  std::int64_t budget_;
  Kind kind_ = Kind::ball;
  int d_ = 2;
  double a_ = 1.0, b_ = 1.0;
  double radius_ = 1.0;
  double det_ = 1.0;
  Vec axes_;
  double max_support_ = 1.0;
  std::shared_ptr<const CircleTable> table_;
};

inline FourierCoefficient ft_annulus(const Annulus& ann, const Vec& xi) { return AnnulusTransform(ann).evaluate(xi); }

// ---------------------------------------------------------------------------
// Stationary phase.

/// Two-point amplitude: chi^(xi) ~ a(xi) |xi|^{-(d+1)/2}.
inline Complex asymptotic_a(const ConvexBody& body, const Vec& xi) {
  if (!body.is_smooth()) throw UnsupportedKind("asymptotic_a: body kind is not smooth");
  const int d = body.dim();
  const BodyPointData plus = support_point(body, xi);
  const BodyPointData minus = support_point(body, -xi);
  const double shift = kPi * (d - 1) / 4.0;
  const double ph_minus = -2.0 * kPi * dot(minus.sigma, xi) - shift;
  const double ph_plus = -2.0 * kPi * dot(plus.sigma, xi) + shift;
  const Complex term = std::polar(1.0 / std::sqrt(minus.curvature), ph_minus) -
                       std::polar(1.0 / std::sqrt(plus.curvature), ph_plus);
  return term / Complex(0.0, 2.0 * kPi);
}

/// Main term A(r, t, xi) of the annulus transform.
inline Complex asymptotic_A(const Annulus& ann, const Vec& xi) {
  if (!ann.body.is_smooth()) throw UnsupportedKind("asymptotic_A: body kind is not smooth");
  if (ann.t == 0.0) return {0.0, 0.0};
  const int d = ann.dim();
  const double rho = norm(xi);
  if (rho == 0.0) throw DomainError("asymptotic_A: xi must be nonzero");
  const BodyPointData plus = support_point(ann.body, xi);
  const BodyPointData minus = support_point(ann.body, -xi);
  const double hp = dot(plus.sigma, xi);    // sigma(xi).xi
  const double hm = dot(minus.sigma, xi);   // sigma(-xi).xi
  const double shift = kPi * (d - 1) / 4.0;
  const double scale = std::pow(ann.r, 0.5 * (d - 1)) * std::pow(rho, -0.5 * (d + 1)) / kPi;
  const Complex first = std::polar(std::sin(kPi * ann.t * hm) / std::sqrt(minus.curvature),
                                   -2.0 * kPi * ann.r * hm - shift);
  const Complex second = std::polar(std::sin(kPi * ann.t * hp) / std::sqrt(plus.curvature),
                                    -2.0 * kPi * ann.r * hp + shift);
  return scale * (second - first);
}

/// B = chi^_{Omega(r,t)} - A.
inline Complex remainder_B(const Annulus& ann, const Vec& xi) {
  return ft_annulus(ann, xi).value - asymptotic_A(ann, xi);
}

/// |B| / (r^{(d-3)/2} t |xi|^{-(d+1)/2}); bounded in r|xi| for smooth bodies.
inline double remainder_ratio(const Annulus& ann, const Vec& xi) {
  const int d = ann.dim();
  const double rho = norm(xi);
  return std::abs(remainder_B(ann, xi)) /
         (std::pow(ann.r, 0.5 * (d - 3)) * ann.t * std::pow(rho, -0.5 * (d + 1)));
}

// ---------------------------------------------------------------------------
// Tails.

/// r^{(d-1)/2} |n|^{-(d+1)/2} min{1, t|n|}
inline double envelope(int d, double r, double t, double rho) {
  return std::pow(r, 0.5 * (d - 1)) * std::pow(rho, -0.5 * (d + 1)) * std::min(1.0, t * rho);
}

/// Upper bound for sum_{|n| > N} |n|^{-d-1} min{1, t|n|}^2 over n in Z^d.
/// Explicit sum up to N1 = max(N, 2 sqrt(d)), then the integral comparison
/// sum_{|n|>N1} g(|n|) <= |S^{d-1}| int_{N1 - sqrt(d)}^inf (v + sqrt(d)/2)^{d-1} g(v) dv
/// for the decreasing profile g.
inline double lattice_tail_sum(int d, double cutoff, double t) {
  if (t <= 0.0) return 0.0;
  const double delta = 0.5 * std::sqrt(static_cast<double>(d));
  const double n1 = std::max(cutoff, 4.0 * delta);
  auto g = [&](double u) {
    const double m = std::min(1.0, t * u);
    return m * m * std::pow(u, -(d + 1));
  };
  CompensatedSum explicit_part;
  if (n1 > cutoff) {
    const auto reach = static_cast<std::int64_t>(std::ceil(n1));
    IVec n(d);
    std::vector<std::int64_t> k(d, -reach);
    while (true) {
      std::int64_t s = 0;
      for (int i = 0; i < d; ++i) s += k[i] * k[i];
      const double u = std::sqrt(static_cast<double>(s));
      if (u > cutoff && u <= n1) explicit_part.add(g(u));
      int axis = d - 1;
      while (axis >= 0 && ++k[axis] > reach) k[axis--] = -reach;
      if (axis < 0) break;
    }
  }
  const double lower = n1 - 2.0 * delta;
  const double knee = 1.0 / t;
  double integral = 0.0;
  double binom = 1.0;
  for (int j = 0; j <= d - 1; ++j) {
    if (j > 0) binom = binom * (d - j) / j;
    const double c = binom * std::pow(delta, j);
    // integrand t^2 v^{-j} below the knee, v^{-2-j} above
    double part = 0.0;
    if (lower < knee) {
      if (j == 0) part += t * t * (knee - lower);
      else if (j == 1) part += t * t * std::log(knee / lower);
      else part += t * t * (std::pow(lower, 1 - j) - std::pow(knee, 1 - j)) / (j - 1);
    }
    const double from = std::max(lower, knee);
    part += std::pow(from, -1 - j) / (1 + j);
    integral += c * part;
  }
  return explicit_part.value() + unit_sphere_area(d) * integral;
}

inline TailEstimate envelope_tail(int d, double r, double t, double cutoff, double constant) {
  return {cutoff, constant * constant * std::pow(r, d - 1) * lattice_tail_sum(d, cutoff, t), constant,
          "envelope"};
}

namespace detail {

/// sum_{m in Z} min(c, k/|m|)^2, the m = 0 term being c^2.
inline double capped_inverse_square_total(double c, double k) {
  if (c <= 0.0) return 0.0;
  const double m0 = std::floor(k / c);
  // sum_{m > m0} 1/m^2 by Euler-Maclaurin at x = m0 + 1 after explicit terms
  double tail = 0.0;
  double x = m0 + 1.0;
  while (x < 20.0) {
    tail += 1.0 / (x * x);
    x += 1.0;
  }
  const double x2 = x * x;
  tail += 1.0 / x + 1.0 / (2.0 * x2) + 1.0 / (6.0 * x2 * x) - 1.0 / (30.0 * x2 * x2 * x) +
          1.0 / (42.0 * x2 * x2 * x2 * x);
  return c * c * (1.0 + 2.0 * m0) + 2.0 * k * k * tail;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Parseval.

struct ParsevalResult {
  double variance = 0.0;
  TailEstimate tail;
  double quadrature_error = 0.0;  // aggregated bound on the |c|^2 error
  bool flagged = false;
  std::uint64_t terms = 0;
  double cutoff = 0.0;
  CoefficientMethod method = CoefficientMethod::closed_form;
};

namespace detail {

struct ParsevalShell {
  CompensatedSum sum;
  CompensatedSum majorant;
  double quad_error = 0.0;
  double max_ratio = 0.0;
  std::uint64_t terms = 0;
};

}  // namespace detail

/// Sum of |chi^_{Omega(r,t)}(n)|^2 over 0 < |n| <= N.
inline ParsevalResult parseval_variance(const Annulus& ann, double cutoff, const ExecPolicy& policy = {},
                                        std::int64_t node_budget = kDefaultNodeBudget) {
  const ShellPlan plan = shell_plan(cutoff);
  ParsevalResult out;
  out.cutoff = cutoff;
  const int d = ann.dim();
  const bool is_box = ann.body.as<Box>() != nullptr;
  out.tail.cutoff_radius = cutoff;
  out.tail.method = is_box ? "box-product-majorant" : "envelope";
  if (ann.t == 0.0) return out;

  AnnulusTransform ft(ann, node_budget);
  ft.prepare(cutoff);
  out.method = ft.method();
  const double a = ann.outer();
  const double b = ann.inner();
  Vec halfsides;
  if (is_box) halfsides = ann.body.as<Box>()->halfsides;
  const auto fit_from = static_cast<std::int64_t>(std::ceil(0.8 * static_cast<double>(plan.shells)));

  const auto shells = map_shells<detail::ParsevalShell>(plan.shells, policy, [&](std::int64_t k) {
    detail::ParsevalShell s;
    for_each_in_shell(d, k, plan.max_norm2, [&](const IVec& n) {
      const auto c = ft.evaluate(n.real());
      const double mag = std::abs(c.value);
      s.sum.add(mag * mag);
      s.quad_error += c.error * (2.0 * mag + c.error);
      ++s.terms;
      const double rho = std::sqrt(static_cast<double>(n.norm2()));
      if (k >= fit_from) s.max_ratio = std::max(s.max_ratio, mag / envelope(d, ann.r, ann.t, rho));
      if (is_box) {
        // telescoped majorant: |c|^2 <= d sum_j G_j^2
        double g2 = 0.0;
        for (int j = 0; j < d; ++j) {
          double p = 1.0;
          for (int i = 0; i < d; ++i) {
            const double m = std::abs(static_cast<double>(n[i]));
            double f;
            if (i < j) f = m == 0.0 ? 2.0 * b * halfsides[i] : std::min(2.0 * b * halfsides[i], 1.0 / (kPi * m));
            else if (i > j) f = m == 0.0 ? 2.0 * a * halfsides[i] : std::min(2.0 * a * halfsides[i], 1.0 / (kPi * m));
            else f = m == 0.0 ? 2.0 * halfsides[i] * ann.t : std::min(2.0 * halfsides[i] * ann.t, 2.0 / (kPi * m));
            p *= f * f;
          }
          g2 += p;
        }
        s.majorant.add(g2);
      }
    });
    return s;
  });

  CompensatedSum total;
  CompensatedSum majorant;
  double constant = 0.0;
  for (const auto& s : shells) {
    total.add(s.sum.value());
    majorant.add(s.majorant.value());
    out.quadrature_error += s.quad_error;
    out.terms += s.terms;
    constant = std::max(constant, s.max_ratio);
  }
  out.variance = total.value();
  if (is_box) {
    // sum over all of Z^d of sum_j G_j^2, from 1-D totals; the m = 0 term
    // of the j-th factor is counted in the full-lattice totals and removed
    // again with n = 0 below
    double full = 0.0;
    double at_zero = 0.0;
    for (int j = 0; j < d; ++j) {
      double p = 1.0;
      double z = 1.0;
      for (int i = 0; i < d; ++i) {
        double c, k;
        if (i < j) { c = 2.0 * b * halfsides[i]; k = 1.0 / kPi; }
        else if (i > j) { c = 2.0 * a * halfsides[i]; k = 1.0 / kPi; }
        else { c = 2.0 * halfsides[i] * ann.t; k = 2.0 / kPi; }
        p *= detail::capped_inverse_square_total(c, k);
        z *= c * c;
      }
      full += p;
      at_zero += z;
    }
    out.tail.bound = d * std::max(0.0, full - at_zero - majorant.value());
    out.tail.envelope_constant = std::sqrt(static_cast<double>(d));
  } else {
    out.tail = envelope_tail(d, ann.r, ann.t, cutoff, constant);
  }
  out.flagged = out.quadrature_error > 0.01 * out.variance;
  return out;
}

/// Coefficients over 0 < |n| <= N in shell order (for dumps).
inline std::vector<FourierCoefficient> annulus_coefficients(const Annulus& ann, double cutoff,
                                                            const ExecPolicy& policy = {}) {
  const ShellPlan plan = shell_plan(cutoff);
  AnnulusTransform ft(ann);
  ft.prepare(cutoff);
  const auto shells = map_shells<std::vector<FourierCoefficient>>(plan.shells, policy, [&](std::int64_t k) {
    std::vector<FourierCoefficient> v;
    for_each_in_shell(ann.dim(), k, plan.max_norm2, [&](const IVec& n) { v.push_back(ft.evaluate(n)); });
    return v;
  });
  std::vector<FourierCoefficient> out;
  for (const auto& s : shells) out.insert(out.end(), s.begin(), s.end());
  return out;
}

}  // namespace latvar
