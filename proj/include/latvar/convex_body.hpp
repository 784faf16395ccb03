// convex_body.hpp
//
// Convex bodies described by their support function h(xi) = sup_{y in body} y.xi.
// Everything downstream (support points, Gaussian curvature, the phase
// zeta(x) = h(x) + h(-x), Minkowski differences) is read off h.
//
// Kinds:
//   Ball           radius R, any d >= 2
//   Ellipsoid      semiaxes a_1..a_d (d = 2, 3)
//   PerturbedDisk  d = 2, radial function r(theta) = R + sum_k a_k cos(k theta - phase_k)
//   Box            halfsides s_1..s_d, admitted for counting only (not smooth)
//   DifferenceBody scale * (B + (-B)) for a perturbed disk B
//
// Curvature is reported as the Gaussian curvature of the boundary at the
// support point sigma(xi), i.e. the point whose outward normal is xi/|xi|.

#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "latvar/numeric.hpp"
#include "latvar/quadrature.hpp"
#include "latvar/vec.hpp"

namespace latvar {

struct Ball {
  int dim = 2;
  double radius = 1.0;
};

struct Ellipsoid {
  Vec semiaxes;
};

struct CosineTerm {
  int k = 0;
  double amplitude = 0.0;
  double phase = 0.0;
};

struct PerturbedDisk {
  double base = 1.0;
  std::vector<CosineTerm> terms;

  struct Radial {
    double r, dr, d2r;
  };
  [[nodiscard]] Radial radial(double theta) const {
    Radial out{base, 0.0, 0.0};
    for (const auto& t : terms) {
      const double arg = t.k * theta - t.phase;
      const double c = std::cos(arg);
      const double s = std::sin(arg);
      out.r += t.amplitude * c;
      out.dr -= t.amplitude * t.k * s;
      out.d2r -= t.amplitude * t.k * t.k * c;
    }
    return out;
  }
};

struct Box {
  Vec halfsides;
};

class ConvexBody;

struct DifferenceBody {
  std::shared_ptr<const ConvexBody> base;
  double scale = 1.0;
};

struct BodyPointData {
  Vec sigma;
  double curvature = 0.0;
  Vec normal;
};

class ConvexBody {
 public:
  using Kind = std::variant<Ball, Ellipsoid, PerturbedDisk, Box, DifferenceBody>;

  static ConvexBody ball(int dim, double radius) {
    if (dim < 2 || dim > kMaxDim) throw ValidationError("ball: dimension must be in [2, 8]");
    if (!(radius > 0.0)) throw ValidationError("ball: radius must be positive");
    return ConvexBody(Ball{dim, radius}, dim);
  }

  static ConvexBody ellipsoid(const std::vector<double>& semiaxes) {
    const int d = static_cast<int>(semiaxes.size());
    if (d < 2 || d > 3) throw ValidationError("ellipsoid: supported dimensions are 2 and 3");
    Vec a(d);
    for (int i = 0; i < d; ++i) {
      if (!(semiaxes[i] > 0.0)) throw ValidationError("ellipsoid: semiaxes must be positive");
      a[i] = semiaxes[i];
    }
    return ConvexBody(Ellipsoid{a}, d);
  }

  static ConvexBody box(const std::vector<double>& halfsides) {
    const int d = static_cast<int>(halfsides.size());
    if (d < 2 || d > kMaxDim) throw ValidationError("box: dimension must be in [2, 8]");
    Vec s(d);
    for (int i = 0; i < d; ++i) {
      if (!(halfsides[i] > 0.0)) throw ValidationError("box: halfsides must be positive");
      s[i] = halfsides[i];
    }
    return ConvexBody(Box{s}, d);
  }

  /// Validates r > 0 and strictly positive boundary curvature on 4096 angles.
  static ConvexBody perturbed_disk(double base, std::vector<CosineTerm> terms) {
    if (!(base > 0.0)) throw ValidationError("perturbed_disk: base radius must be positive");
    for (const auto& t : terms) {
      if (t.k < 1) throw ValidationError("perturbed_disk: harmonic index must be >= 1");
    }
    PerturbedDisk disk{base, std::move(terms)};
    constexpr int kChecks = 4096;
    for (int j = 0; j < kChecks; ++j) {
      const double theta = 2.0 * kPi * j / kChecks;
      const auto [r, dr, d2r] = disk.radial(theta);
      if (!(r > 0.0)) {
        throw ValidationError("perturbed_disk: radial function not positive at angle " +
                              std::to_string(theta));
      }
      const double numer = r * r + 2.0 * dr * dr - r * d2r;
      if (!(numer > 0.0)) {
        throw ValidationError("perturbed_disk: boundary curvature not positive at angle " +
                              std::to_string(theta));
      }
    }
    return ConvexBody(std::move(disk), 2);
  }

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] const Kind& kind() const { return kind_; }
  [[nodiscard]] bool is_smooth() const { return !std::holds_alternative<Box>(kind_); }

  [[nodiscard]] std::string kind_name() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, Ball>) return "ball";
          if constexpr (std::is_same_v<T, Ellipsoid>) return "ellipsoid";
          if constexpr (std::is_same_v<T, PerturbedDisk>) return "perturbed_disk";
          if constexpr (std::is_same_v<T, Box>) return "box";
          return "difference";
        },
        kind_);
  }

  template <class T>
  [[nodiscard]] const T* as() const {
    return std::get_if<T>(&kind_);
  }

  ConvexBody(Kind kind, int dim) : kind_(std::move(kind)), dim_(dim) {}

 private:
  Kind kind_;
  int dim_ = 2;
};

// ---------------------------------------------------------------------------

namespace detail {

inline void require_nonzero(const Vec& xi, const char* op) {
  for (double x : xi) {
    if (x != 0.0) return;
  }
  throw DomainError(std::string(op) + ": direction must be nonzero");
}

inline void require_dim(const ConvexBody& body, const Vec& v, const char* op) {
  if (v.dim() != body.dim()) {
    throw DomainError(std::string(op) + ": vector dimension does not match body dimension");
  }
}

// Maximiser theta* of r(theta) cos(theta - phi): the polar angle of sigma at
// normal angle phi. Newton from theta = phi, with a scan fallback.
inline double disk_support_angle(const PerturbedDisk& disk, double phi) {
  auto newton = [&](double theta) -> std::optional<double> {
    for (int it = 0; it < 60; ++it) {
      const auto [r, dr, d2r] = disk.radial(theta);
      const double c = std::cos(theta - phi);
      const double s = std::sin(theta - phi);
      const double g = dr * c - r * s;
      const double gp = d2r * c - 2.0 * dr * s - r * c;
      if (!(gp < 0.0)) return std::nullopt;
      const double step = g / gp;
      theta -= step;
      if (std::abs(step) > 1.0) return std::nullopt;
      if (std::abs(step) < 1e-15) return theta;
    }
    return theta;
  };
  if (auto t = newton(phi)) return *t;
  double best = phi;
  double best_val = -1e300;
  constexpr int kScan = 256;
  for (int j = 0; j < kScan; ++j) {
    const double theta = phi - 0.5 * kPi + kPi * (j + 0.5) / kScan;
    const double v = disk.radial(theta).r * std::cos(theta - phi);
    if (v > best_val) {
      best_val = v;
      best = theta;
    }
  }
  if (auto t = newton(best)) return *t;
  return best;
}

inline double disk_curvature_at(const PerturbedDisk& disk, double theta) {
  const auto [r, dr, d2r] = disk.radial(theta);
  const double denom = std::pow(r * r + dr * dr, 1.5);
  return (r * r + 2.0 * dr * dr - r * d2r) / denom;
}

}  // namespace detail

/// h(xi) = sup_{y in body} y . xi
inline double support(const ConvexBody& body, const Vec& xi) {
  detail::require_dim(body, xi, "support");
  detail::require_nonzero(xi, "support");
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Ball>) {
          return k.radius * norm(xi);
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          double s = 0.0;
          for (int i = 0; i < xi.dim(); ++i) s += k.semiaxes[i] * k.semiaxes[i] * xi[i] * xi[i];
          return std::sqrt(s);
        } else if constexpr (std::is_same_v<T, Box>) {
          double s = 0.0;
          for (int i = 0; i < xi.dim(); ++i) s += k.halfsides[i] * std::abs(xi[i]);
          return s;
        } else if constexpr (std::is_same_v<T, PerturbedDisk>) {
          const double len = norm(xi);
          const double phi = std::atan2(xi[1], xi[0]);
          const double theta = detail::disk_support_angle(k, phi);
          return len * k.radial(theta).r * std::cos(theta - phi);
        } else {
          return k.scale * (support(*k.base, xi) + support(*k.base, -xi));
        }
      },
      body.kind());
}

/// Support point sigma(xi) with its Gaussian curvature and the unit normal.
inline BodyPointData support_point(const ConvexBody& body, const Vec& xi) {
  detail::require_dim(body, xi, "support_point");
  detail::require_nonzero(xi, "support_point");
  const Vec u = normalized(xi);
  const int d = body.dim();
  return std::visit(
      [&](const auto& k) -> BodyPointData {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Ball>) {
          return {k.radius * u, std::pow(k.radius, -(d - 1)), u};
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          double h2 = 0.0;
          for (int i = 0; i < d; ++i) h2 += k.semiaxes[i] * k.semiaxes[i] * u[i] * u[i];
          const double h = std::sqrt(h2);
          Vec sigma(d);
          double prod = 1.0;
          for (int i = 0; i < d; ++i) {
            const double a2 = k.semiaxes[i] * k.semiaxes[i];
            sigma[i] = a2 * u[i] / h;
            prod *= a2;
          }
          return {sigma, std::pow(h, d + 1) / prod, u};
        } else if constexpr (std::is_same_v<T, Box>) {
          throw UnsupportedKind("support_point: box boundary normals are not unique at edges");
          return {};
        } else if constexpr (std::is_same_v<T, PerturbedDisk>) {
          const double phi = std::atan2(u[1], u[0]);
          const double theta = detail::disk_support_angle(k, phi);
          const double r = k.radial(theta).r;
          const double curv = detail::disk_curvature_at(k, theta);
          if (!(curv > 0.0)) {
            throw ValidationError("curvature: nonpositive curvature in direction " + u.str());
          }
          return {Vec{r * std::cos(theta), r * std::sin(theta)}, curv, u};
        } else {
          const BodyPointData plus = support_point(*k.base, u);
          const BodyPointData minus = support_point(*k.base, -u);
          // radii of curvature add under Minkowski sums in the plane
          const double radius = k.scale * (1.0 / plus.curvature + 1.0 / minus.curvature);
          return {k.scale * (plus.sigma - minus.sigma), 1.0 / radius, u};
        }
      },
      body.kind());
}

/// Gaussian curvature of the boundary at sigma(xi).
inline double curvature(const ConvexBody& body, const Vec& xi) {
  const double k = support_point(body, xi).curvature;
  if (!(k > 0.0)) {
    throw ValidationError("curvature: nonpositive curvature in direction " + xi.str());
  }
  return k;
}

/// Curvature from the tangential Hessian of h: 1/K = det D^2 h(u)|_{u-perp},
/// central differences with step 1e-5 and one Richardson level.
inline double curvature_fd(const ConvexBody& body, const Vec& xi, double step = 1e-5) {
  if (!body.is_smooth()) throw UnsupportedKind("curvature_fd: body kind is not smooth");
  detail::require_nonzero(xi, "curvature_fd");
  const Vec u = normalized(xi);
  const int d = body.dim();
  std::vector<Vec> tangents;
  if (d == 2) {
    tangents.push_back(Vec{-u[1], u[0]});
  } else if (d == 3) {
    const auto [e1, e2] = orthonormal_complement(u);
    tangents = {e1, e2};
  } else {
    throw DomainError("curvature_fd: supported for d = 2 and d = 3");
  }
  auto hessian = [&](int i, int j, double eps) {
    const Vec& a = tangents[i];
    const Vec& b = tangents[j];
    if (i == j) {
      return (support(body, u + eps * a) - 2.0 * support(body, u) + support(body, u - eps * a)) /
             (eps * eps);
    }
    return (support(body, u + eps * a + eps * b) - support(body, u + eps * a - eps * b) -
            support(body, u - eps * a + eps * b) + support(body, u - eps * a - eps * b)) /
           (4.0 * eps * eps);
  };
  auto richardson = [&](int i, int j) {
    const double coarse = hessian(i, j, step);
    const double fine = hessian(i, j, 0.5 * step);
    return (4.0 * fine - coarse) / 3.0;
  };
  double inv_k = 0.0;
  if (d == 2) {
    inv_k = richardson(0, 0);
  } else {
    const double h00 = richardson(0, 0);
    const double h11 = richardson(1, 1);
    const double h01 = richardson(0, 1);
    inv_k = h00 * h11 - h01 * h01;
  }
  if (!(inv_k > 0.0)) {
    throw ValidationError("curvature_fd: nonpositive curvature in direction " + u.str());
  }
  return 1.0 / inv_k;
}

/// Minkowski functional inf{lambda > 0 : x in lambda * body}, by duality
/// max_theta x.theta / h(theta) (used where no radial formula exists).
inline double gauge_by_duality(const ConvexBody& body, const Vec& x) {
  if (body.dim() != 2) throw DomainError("gauge_by_duality: implemented for d = 2");
  if (x[0] == 0.0 && x[1] == 0.0) return 0.0;
  auto ratio = [&](double a) {
    const Vec th{std::cos(a), std::sin(a)};
    return dot(x, th) / support(body, th);
  };
  const double center = std::atan2(x[1], x[0]);
  constexpr int kScan = 64;
  double best = center;
  double best_val = -1e300;
  for (int j = 0; j < kScan; ++j) {
    const double a = center - 0.5 * kPi + kPi * (j + 0.5) / kScan;
    const double v = ratio(a);
    if (v > best_val) {
      best_val = v;
      best = a;
    }
  }
  // golden-section refinement on the bracketing cell
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = best - kPi / kScan;
  double hi = best + kPi / kScan;
  double x1 = hi - golden * (hi - lo);
  double x2 = lo + golden * (hi - lo);
  double f1 = ratio(x1);
  double f2 = ratio(x2);
  while (hi - lo > 1e-9) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + golden * (hi - lo);
      f2 = ratio(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - golden * (hi - lo);
      f1 = ratio(x1);
    }
  }
  return std::max({f1, f2, best_val});
}

/// Planar smooth bodies: find the normal angle whose support point is
/// parallel to x (d sigma / d theta = rho * u'), then gauge = |x| / |sigma|.
inline std::optional<double> gauge_by_normal_newton(const ConvexBody& body, const Vec& x) {
  const double len = norm(x);
  if (len == 0.0) return 0.0;
  double theta = std::atan2(x[1], x[0]);
  for (int it = 0; it < 40; ++it) {
    const Vec u{std::cos(theta), std::sin(theta)};
    const BodyPointData p = support_point(body, u);
    const double f = p.sigma[0] * x[1] - p.sigma[1] * x[0];
    const double fp = -dot(u, x) / p.curvature;
    if (!(fp < 0.0)) return std::nullopt;
    const double step = f / fp;
    theta -= step;
    if (std::abs(step) > 0.5) return std::nullopt;
    if (std::abs(step) < 1e-15) {
      const BodyPointData q = support_point(body, Vec{std::cos(theta), std::sin(theta)});
      if (dot(q.sigma, x) <= 0.0) return std::nullopt;
      return len / norm(q.sigma);
    }
  }
  return std::nullopt;
}

inline double gauge(const ConvexBody& body, const Vec& x) {
  detail::require_dim(body, x, "gauge");
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Ball>) {
          return norm(x) / k.radius;
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          double s = 0.0;
          for (int i = 0; i < x.dim(); ++i) {
            const double q = x[i] / k.semiaxes[i];
            s += q * q;
          }
          return std::sqrt(s);
        } else if constexpr (std::is_same_v<T, Box>) {
          double m = 0.0;
          for (int i = 0; i < x.dim(); ++i) m = std::max(m, std::abs(x[i]) / k.halfsides[i]);
          return m;
        } else if constexpr (std::is_same_v<T, PerturbedDisk>) {
          const double len = norm(x);
          if (len == 0.0) return 0.0;
          return len / k.radial(std::atan2(x[1], x[0])).r;
        } else {
          if (auto g = gauge_by_normal_newton(body, x)) return *g;
          return gauge_by_duality(body, x);
        }
      },
      body.kind());
}

inline double volume(const ConvexBody& body) {
  const int d = body.dim();
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Ball>) {
          return unit_ball_volume(d) * std::pow(k.radius, d);
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          double p = unit_ball_volume(d);
          for (double a : k.semiaxes) p *= a;
          return p;
        } else if constexpr (std::is_same_v<T, Box>) {
          double p = 1.0;
          for (double s : k.halfsides) p *= 2.0 * s;
          return p;
        } else if constexpr (std::is_same_v<T, PerturbedDisk>) {
          // (1/2) int r(theta)^2 dtheta; trapezoid is exact for the finite series
          int max_k = 0;
          for (const auto& t : k.terms) max_k = std::max(max_k, t.k);
          const int m = std::max(64, 4 * max_k + 8);
          CompensatedSum s;
          for (int j = 0; j < m; ++j) {
            const double r = k.radial(2.0 * kPi * j / m).r;
            s.add(r * r);
          }
          return 0.5 * (2.0 * kPi / m) * s.value();
        } else {
          // (1/2) int h / K dtheta over the normal angle
          constexpr int kNodes = 4096;
          CompensatedSum s;
          for (const auto& node : circle_rule(kNodes)) {
            const BodyPointData p = support_point(body, node.direction);
            s.add(node.weight * dot(p.sigma, node.direction) / p.curvature);
          }
          return 0.5 * s.value();
        }
      },
      body.kind());
}

/// A = body + (-body), with h_A(xi) = h(xi) + h(-xi).
inline ConvexBody difference_body(const ConvexBody& body) {
  return std::visit(
      [&](const auto& k) -> ConvexBody {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Ball>) {
          return ConvexBody::ball(k.dim, 2.0 * k.radius);
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          std::vector<double> a(k.semiaxes.begin(), k.semiaxes.end());
          for (double& x : a) x *= 2.0;
          return ConvexBody::ellipsoid(a);
        } else if constexpr (std::is_same_v<T, Box>) {
          std::vector<double> s(k.halfsides.begin(), k.halfsides.end());
          for (double& x : s) x *= 2.0;
          return ConvexBody::box(s);
        } else if constexpr (std::is_same_v<T, PerturbedDisk>) {
          return ConvexBody(DifferenceBody{std::make_shared<const ConvexBody>(body), 1.0}, 2);
        } else {
          // already symmetric: A + (-A) = 2A
          return ConvexBody(DifferenceBody{k.base, 2.0 * k.scale}, 2);
        }
      },
      body.kind());
}

/// zeta(x) = (sigma(x) - sigma(-x)) . x = h(x) + h(-x)
inline double zeta(const ConvexBody& body, const Vec& x) { return support(body, x) + support(body, -x); }

// ---------------------------------------------------------------------------
// Extremes over the unit sphere (the constants c <= h(theta) <= C and the
// largest radius of curvature), measured rather than assumed.

struct SphereExtremes {
  double min_support = 0.0;
  double max_support = 0.0;
  double max_inverse_curvature = 0.0;  // 0 for non-smooth kinds
};

inline SphereExtremes sphere_extremes(const ConvexBody& body) {
  const int d = body.dim();
  if (const auto* b = body.as<Ball>()) {
    return {b->radius, b->radius, std::pow(b->radius, d - 1)};
  }
  if (const auto* e = body.as<Ellipsoid>()) {
    const double amin = *std::min_element(e->semiaxes.begin(), e->semiaxes.end());
    const double amax = *std::max_element(e->semiaxes.begin(), e->semiaxes.end());
    double prod = 1.0;
    for (double a : e->semiaxes) prod *= a * a;
    return {amin, amax, prod / std::pow(amin, d + 1)};
  }
  if (const auto* bx = body.as<Box>()) {
    const double smin = *std::min_element(bx->halfsides.begin(), bx->halfsides.end());
    double smax = 0.0;
    for (double s : bx->halfsides) smax += s * s;
    return {smin, std::sqrt(smax), 0.0};
  }
  // sampled; inflated slightly so majorants stay majorants between samples
  SphereExtremes out{1e300, 0.0, 0.0};
  for (const auto& node : default_sphere_rule(d, 4096)) {
    const BodyPointData p = support_point(body, node.direction);
    const double h = dot(p.sigma, node.direction);
    out.min_support = std::min(out.min_support, h);
    out.max_support = std::max(out.max_support, h);
    out.max_inverse_curvature = std::max(out.max_inverse_curvature, 1.0 / p.curvature);
  }
  out.min_support *= 1.0 - 1e-3;
  out.max_support *= 1.0 + 1e-3;
  out.max_inverse_curvature *= 1.0 + 1e-3;
  return out;
}

/// Sphere quadrature of K(sigma(theta))^{-1} h(theta); equals d * volume.
inline double curvature_integral(const ConvexBody& body, int resolution = 512) {
  if (!body.is_smooth()) throw UnsupportedKind("curvature_integral: body kind is not smooth");
  CompensatedSum s;
  for (const auto& node : default_sphere_rule(body.dim(), resolution)) {
    const BodyPointData p = support_point(body, node.direction);
    s.add(node.weight * dot(p.sigma, node.direction) / p.curvature);
  }
  return s.value();
}

// ---------------------------------------------------------------------------
// Chords: {s : gauge(y with y[axis] = s) <= level}, a single interval by
// convexity. Closed forms where available, otherwise golden-section minimum
// of the gauge along the line (stopped once inside) followed by Illinois
// regula falsi to 1e-12 * (level + 1) at each end.

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

inline std::optional<Interval> chord(const ConvexBody& body, Vec y, int axis, double level) {
  if (level < 0.0) return std::nullopt;
  if (const auto* b = body.as<Ball>()) {
    double q = 0.0;
    for (int i = 0; i < y.dim(); ++i) {
      if (i != axis) q += y[i] * y[i];
    }
    const double rem = level * level * b->radius * b->radius - q;
    if (rem < 0.0) return std::nullopt;
    const double half = std::sqrt(rem);
    return Interval{-half, half};
  }
  if (const auto* e = body.as<Ellipsoid>()) {
    double q = 0.0;
    for (int i = 0; i < y.dim(); ++i) {
      if (i != axis) q += (y[i] / e->semiaxes[i]) * (y[i] / e->semiaxes[i]);
    }
    const double rem = level * level - q;
    if (rem < 0.0) return std::nullopt;
    const double half = e->semiaxes[axis] * std::sqrt(rem);
    return Interval{-half, half};
  }
  if (const auto* bx = body.as<Box>()) {
    for (int i = 0; i < y.dim(); ++i) {
      if (i != axis && std::abs(y[i]) > level * bx->halfsides[i]) return std::nullopt;
    }
    return Interval{-level * bx->halfsides[axis], level * bx->halfsides[axis]};
  }
  auto g = [&](double s) {
    y[axis] = s;
    return gauge(body, y);
  };
  const int d = body.dim();
  double lo = -level * support(body, -basis_vector(d, axis)) - 1.0;
  double hi = level * support(body, basis_vector(d, axis)) + 1.0;
  const double tol = 1e-12 * (level + 1.0);
  // golden-section descent, stopped at the first point inside
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo;
  double b = hi;
  double x1 = b - golden * (b - a);
  double x2 = a + golden * (b - a);
  double f1 = g(x1);
  double f2 = g(x2);
  while (f1 > level && f2 > level && b - a > tol) {
    if (f1 > f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + golden * (b - a);
      f2 = g(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - golden * (b - a);
      f1 = g(x1);
    }
  }
  double s_in;
  if (f1 <= level) s_in = x1;
  else if (f2 <= level) s_in = x2;
  else return std::nullopt;
  // Illinois regula falsi on the bracket [inside, outside]
  auto boundary = [&](double inside, double outside) {
    double fin = g(inside) - level;
    double fout = g(outside) - level;
    int kept = 0;
    for (int it = 0; std::abs(outside - inside) > tol; ++it) {
      double mid = 0.5 * (inside + outside);
      if (it < 64 && fout > fin) {
        const double sec = outside - fout * (outside - inside) / (fout - fin);
        if (sec > std::min(inside, outside) && sec < std::max(inside, outside)) mid = sec;
      }
      const double fm = g(mid) - level;
      if (fm <= 0.0) {
        inside = mid;
        fin = fm;
        if (kept == 1) fout *= 0.5;
        kept = 1;
      } else {
        outside = mid;
        fout = fm;
        if (kept == -1) fin *= 0.5;
        kept = -1;
      }
    }
    return inside;
  };
  return Interval{boundary(s_in, lo), boundary(s_in, hi)};
}

}  // namespace latvar
