// lattice_count.hpp
//
// Integer points in translated dilates r*Omega - x and in the half-open shell
//
//     Omega(r, t) - x = { k : r - t/2 < gauge(k + x) <= r + t/2 },
//
// plus empirical moments of the count over translations x in the torus.
//
// Enumeration walks the rows of the axis-aligned bounding box (from support
// values) and obtains each row's run of admissible points from a chord of
// the body, so the cost is proportional to the number of rows. Chord
// endpoints are snapped to integers and then confirmed with the gauge
// itself, so membership is always decided by gauge(k + x) as computed.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "latvar/convex_body.hpp"
#include "latvar/numeric.hpp"
#include "latvar/vec.hpp"

namespace latvar {

struct Annulus {
  ConvexBody body;
  double r = 1.0;
  double t = 0.0;

  Annulus(ConvexBody b, double radius, double thickness) : body(std::move(b)), r(radius), t(thickness) {
    if (!(r > 0.0)) throw DomainError("annulus: r must be positive");
    if (!(t >= 0.0) || t > 2.0 * r) throw DomainError("annulus: thickness must satisfy 0 <= t <= 2r");
  }
  [[nodiscard]] double inner() const { return r - 0.5 * t; }
  [[nodiscard]] double outer() const { return r + 0.5 * t; }
  [[nodiscard]] int dim() const { return body.dim(); }
};

namespace detail {

// Integers k with gauge(y + k e_axis) <= level, where y[axis] holds the
// translation offset; returns [first, last] or empty (first > last).
struct IntRun {
  std::int64_t first = 1;
  std::int64_t last = 0;
  [[nodiscard]] std::int64_t size() const { return last >= first ? last - first + 1 : 0; }
};

inline IntRun row_run(const ConvexBody& body, Vec y, int axis, double offset, double level) {
  const auto c = chord(body, y, axis, level);
  if (!c) return {};
  auto inside = [&](std::int64_t k) {
    y[axis] = static_cast<double>(k) + offset;
    return gauge(body, y) <= level;
  };
  IntRun run{static_cast<std::int64_t>(std::ceil(c->lo - offset)),
             static_cast<std::int64_t>(std::floor(c->hi - offset))};
  // snap to the gauge decision at both ends
  if (run.first > run.last) {
    // the chord may be shorter than the spacing; probe the nearest integer
    const auto k = static_cast<std::int64_t>(std::llround(0.5 * (c->lo + c->hi) - offset));
    if (!inside(k)) return {};
    run = {k, k};
  }
  while (run.first <= run.last && !inside(run.first)) ++run.first;
  while (run.last >= run.first && !inside(run.last)) --run.last;
  if (run.first > run.last) return {};
  while (inside(run.first - 1)) --run.first;
  while (inside(run.last + 1)) ++run.last;
  return run;
}

struct AxisRange {
  std::int64_t lo, hi;
};

inline std::vector<AxisRange> bounding_ranges(const ConvexBody& body, double level, const Vec& x) {
  const int d = body.dim();
  std::vector<AxisRange> out(d);
  for (int i = 0; i < d; ++i) {
    const double up = level * support(body, basis_vector(d, i));
    const double down = level * support(body, -basis_vector(d, i));
    // one extra layer absorbs rounding in the support values
    out[i] = {static_cast<std::int64_t>(std::floor(-x[i] - down)) - 1,
              static_cast<std::int64_t>(std::ceil(-x[i] + up)) + 1};
  }
  return out;
}

// Visits every row (outer coordinates fixed) of the bounding box at `level`.
template <class RowFn>
void for_each_row(const ConvexBody& body, double level, const Vec& x, RowFn&& fn) {
  const int d = body.dim();
  const auto ranges = bounding_ranges(body, level, x);
  Vec y(d);
  std::vector<std::int64_t> k(d, 0);
  for (int i = 0; i < d - 1; ++i) k[i] = ranges[i].lo;
  while (true) {
    for (int i = 0; i < d - 1; ++i) y[i] = static_cast<double>(k[i]) + x[i];
    fn(y);
    int axis = d - 2;
    while (axis >= 0) {
      if (++k[axis] <= ranges[axis].hi) break;
      k[axis] = ranges[axis].lo;
      --axis;
    }
    if (axis < 0) break;
  }
}

}  // namespace detail

/// #{k in Z^d : gauge(k + x) <= r}
inline std::int64_t dilate_count(const ConvexBody& body, double r, const Vec& x) {
  if (!(r > 0.0)) throw DomainError("dilate_count: r must be positive");
  if (x.dim() != body.dim()) throw DomainError("dilate_count: translation dimension mismatch");
  const int last = body.dim() - 1;
  std::int64_t total = 0;
  detail::for_each_row(body, r, x, [&](const Vec& y) {
    total += detail::row_run(body, y, last, x[last], r).size();
  });
  return total;
}

/// #{k in Z^d : r - t/2 < gauge(k + x) <= r + t/2}, one traversal of the outer rows.
inline std::int64_t annulus_count(const Annulus& ann, const Vec& x) {
  if (x.dim() != ann.dim()) throw DomainError("annulus_count: translation dimension mismatch");
  if (ann.t == 0.0) return 0;
  const int last = ann.dim() - 1;
  const double outer = ann.outer();
  const double inner = ann.inner();
  std::int64_t total = 0;
  detail::for_each_row(ann.body, outer, x, [&](const Vec& y) {
    const auto out_run = detail::row_run(ann.body, y, last, x[last], outer);
    if (out_run.size() == 0) return;
    total += out_run.size() - detail::row_run(ann.body, y, last, x[last], inner).size();
  });
  return total;
}

/// |Omega(r, t)| = ((r + t/2)^d - (r - t/2)^d) |Omega|, the mean count.
inline double annulus_volume(const Annulus& ann) {
  const int d = ann.dim();
  const double a = ann.outer();
  const double b = ann.inner();
  // a^d - b^d = (a - b) sum_j a^{d-1-j} b^j, free of cancellation for small t
  double s = 0.0;
  for (int j = 0; j < d; ++j) s += std::pow(a, d - 1 - j) * std::pow(b, j);
  return ann.t * s * volume(ann.body);
}

// ---------------------------------------------------------------------------
// Sampling schemes over the torus [0, 1)^d.

struct SamplingScheme {
  enum class Kind { grid, random };
  Kind kind = Kind::grid;
  std::uint64_t size = 2;  // M (nodes per axis) for grid, N for random
  std::uint64_t seed = 0;

  static SamplingScheme grid(std::uint64_t m) {
    if (m < 2) throw DomainError("grid scheme needs M >= 2");
    return {Kind::grid, m, 0};
  }
  static SamplingScheme random(std::uint64_t n, std::uint64_t seed) {
    if (n < 2) throw DomainError("random scheme needs N >= 2");
    return {Kind::random, n, seed};
  }

  [[nodiscard]] std::uint64_t count(int d) const {
    if (kind == Kind::random) return size;
    std::uint64_t total = 1;
    for (int i = 0; i < d; ++i) total *= size;
    return total;
  }

  /// i-th translation; grid nodes sit at (j + 1/2) / M per axis, first axis slowest.
  [[nodiscard]] Vec translation(std::uint64_t i, int d) const {
    Vec x(d);
    if (kind == Kind::grid) {
      for (int axis = d - 1; axis >= 0; --axis) {
        x[axis] = (static_cast<double>(i % size) + 0.5) / static_cast<double>(size);
        i /= size;
      }
    } else {
      const CounterRng rng(seed);
      for (int axis = 0; axis < d; ++axis) x[axis] = rng.uniform(i * static_cast<std::uint64_t>(d) + axis);
    }
    return x;
  }

  [[nodiscard]] std::string describe() const {
    return kind == Kind::grid ? "grid(" + std::to_string(size) + ")"
                              : "random(" + std::to_string(size) + ", seed=" + std::to_string(seed) + ")";
  }
};

struct CountSampleSet {
  SamplingScheme scheme;
  int dim = 2;
  std::vector<std::int64_t> counts;

  [[nodiscard]] Vec translation(std::size_t i) const { return scheme.translation(i, dim); }
};

inline CountSampleSet sample_counts(const Annulus& ann, const SamplingScheme& scheme,
                                    const ExecPolicy& policy = {}) {
  const int d = ann.dim();
  CountSampleSet out{scheme, d, std::vector<std::int64_t>(scheme.count(d), 0)};
  constexpr std::size_t kChunk = 4096;
  const std::size_t n = out.counts.size();
  for_each_chunk(chunk_count(n, kChunk), policy, [&](std::size_t c) {
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) out.counts[i] = annulus_count(ann, scheme.translation(i, d));
  });
  return out;
}

struct MomentTable {
  std::uint64_t samples = 0;
  double mean = 0.0;
  std::vector<double> central;  // central[k] = mean of (count - mean)^k; central[0] = 1
  double variance = 0.0;
  double variance_stderr = 0.0;  // random scheme only; 0 for grid
  double mean_stderr = 0.0;      // random scheme only
  double volume = 0.0;           // exact mean over the full torus
  double mean_error = 0.0;       // |mean - volume|, the discretisation diagnostic
  std::map<std::int64_t, std::uint64_t> histogram;
};

/// Moments over the sampled translations (population normalisation, the
/// discrete analogue of the torus integral). Computed from the histogram, so
/// the result does not depend on sampling order.
inline MomentTable moments(const CountSampleSet& set, double volume, int max_order = 4) {
  MomentTable m;
  m.samples = set.counts.size();
  m.volume = volume;
  for (auto c : set.counts) ++m.histogram[c];
  const double n = static_cast<double>(m.samples);
  CompensatedSum sum;
  for (const auto& [value, freq] : m.histogram) sum.add(static_cast<double>(value) * static_cast<double>(freq));
  m.mean = sum.value() / n;
  const int top = std::max(max_order, 4);
  std::vector<double> central(top + 1, 0.0);
  central[0] = 1.0;
  for (int k = 1; k <= top; ++k) {
    CompensatedSum s;
    for (const auto& [value, freq] : m.histogram) {
      s.add(static_cast<double>(freq) * std::pow(static_cast<double>(value) - m.mean, k));
    }
    central[k] = s.value() / n;
  }
  m.variance = central[2];
  if (set.scheme.kind == SamplingScheme::Kind::random) {
    m.variance_stderr = std::sqrt(std::max(0.0, central[4] - central[2] * central[2]) / n);
    m.mean_stderr = std::sqrt(central[2] / n);
  }
  m.mean_error = std::abs(m.mean - volume);
  central.resize(max_order + 1);
  m.central = std::move(central);
  return m;
}

inline MomentTable sample_moments(const Annulus& ann, const SamplingScheme& scheme, int max_order = 4,
                                  const ExecPolicy& policy = {}) {
  if (ann.t == 0.0) {
    MomentTable m;
    m.samples = scheme.count(ann.dim());
    m.central.assign(max_order + 1, 0.0);
    m.central[0] = 1.0;
    m.histogram[0] = m.samples;
    return m;
  }
  return moments(sample_counts(ann, scheme, policy), annulus_volume(ann), max_order);
}

/// max_x |#(rA - x) - r^d |A|| / r^{d(d-1)/(d+1)} over the given translations.
inline double hlawka_ratio(const ConvexBody& body, double r, const std::vector<Vec>& translations) {
  const int d = body.dim();
  const double expected = std::pow(r, d) * volume(body);
  double worst = 0.0;
  for (const auto& x : translations) {
    worst = std::max(worst, std::abs(static_cast<double>(dilate_count(body, r, x)) - expected));
  }
  return worst / std::pow(r, d * (d - 1.0) / (d + 1.0));
}

}  // namespace latvar
