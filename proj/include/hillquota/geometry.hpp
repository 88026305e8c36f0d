#pragma once

// feasible-triangle geometry in decimal-part space and the exact violation
// probability under uniform quotas.
//
// For floors (j,k) with R = M-j-k >= 3 the violating decimal parts (d1,d2)
// form the triangle bounded by (s_t = sqrt((R-1)(R-2)/(t(t+1)))):
//   line 1:  y = (-1-s_j) x + (R - j s_j)   (x = 0 when j = 0)
//   line 2:  x = (-1-s_k) y + (R - k s_k)   (y = 0 when k = 0)
//   line 3:  y = 1 - x
// Everything is templated on the real type; long double is the
// high-precision mode used to confirm table values.

#include "numeric.hpp"
#include "core.hpp"

#include <array>
#include <limits>
#include <optional>

namespace hillquota {

struct floor_pair {
  int j, k, M;
  floor_pair(int j_, int k_, int M_) : j(j_), k(k_), M(M_) {
    if (j < 0 || k < 0) throw domain_error("floor pair: floors must be nonnegative");
    if (M < 3) throw domain_error("floor pair: M must be at least 3");
  }
  // probability sums run over j+k < M-j-k; cells outside never hold a
  // feasible triangle but can still intersect the quota simplex
  bool in_summation_domain() const { return j + k < M - j - k; }
  int residual() const { return M - j - k; }
};

// largest cell index whose column/row [i, i+1) can intersect the simplex S
inline int cell_cover_max(int M) { return (M - 1) / 2; }

enum class line_kind { slope_intercept, axis_x0, axis_y0, antidiagonal };

template <class Real>
struct boundary_line {
  line_kind kind;
  Real slope = 0, intercept = 0;
  bool x_of_y = false;  // slope_intercept form is x = slope*y + intercept
};

template <class Real>
struct feasible_triangle {
  std::array<std::array<Real, 2>, 3> vertices{};  // V1, V2 on y=1-x, V3 apex
  Real area = 0;
  bool empty = true;
};

namespace detail {

template <class Real>
struct line_coeffs {  // both constraint boundaries, axis cases folded in
  bool j0, k0;
  Real m1, c1, m2, c2;
};

template <class Real>
line_coeffs<Real> constraint_lines(const floor_pair& fp) {
  const int R = fp.residual();
  line_coeffs<Real> lc{fp.j == 0, fp.k == 0, 0, 0, 0, 0};
  const Real rad = Real(R - 1) * Real(R - 2);
  if (!lc.j0) {
    Real s1 = std::sqrt(rad / (Real(fp.j) * Real(fp.j + 1)));
    lc.m1 = Real(-1) - s1;
    lc.c1 = Real(R) - Real(fp.j) * s1;
  }
  if (!lc.k0) {
    Real s2 = std::sqrt(rad / (Real(fp.k) * Real(fp.k + 1)));
    lc.m2 = Real(-1) - s2;
    lc.c2 = Real(R) - Real(fp.k) * s2;
  }
  return lc;
}

// Sutherland-Hodgman step: keep the side a*x + b*y <= c
template <class Real>
std::vector<std::array<Real, 2>> clip_halfplane(
    const std::vector<std::array<Real, 2>>& poly, Real a, Real b, Real c) {
  std::vector<std::array<Real, 2>> out;
  const std::size_t n = poly.size();
  out.reserve(n + 2);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& P = poly[i];
    const auto& Q = poly[(i + 1) % n];
    Real fp = a * P[0] + b * P[1] - c;
    Real fq = a * Q[0] + b * Q[1] - c;
    if (fp <= 0) out.push_back(P);
    if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) {
      Real t = fp / (fp - fq);
      out.push_back({P[0] + t * (Q[0] - P[0]), P[1] + t * (Q[1] - P[1])});
    }
  }
  return out;
}

template <class Real>
Real polygon_area(const std::vector<std::array<Real, 2>>& poly) {
  if (poly.size() < 3) return 0;
  Real s = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& P = poly[i];
    const auto& Q = poly[(i + 1) % poly.size()];
    s += P[0] * Q[1] - Q[0] * P[1];
  }
  return std::abs(s) / 2;
}

}  // namespace detail

// nullopt is the empty-region sentinel for M - j - k < 3
template <class Real = double>
std::optional<std::array<boundary_line<Real>, 3>> boundary_lines(const floor_pair& fp) {
  if (fp.residual() < 3) return std::nullopt;
  auto lc = detail::constraint_lines<Real>(fp);
  std::array<boundary_line<Real>, 3> out;
  out[0] = lc.j0 ? boundary_line<Real>{line_kind::axis_x0, 0, 0, false}
                 : boundary_line<Real>{line_kind::slope_intercept, lc.m1, lc.c1, false};
  out[1] = lc.k0 ? boundary_line<Real>{line_kind::axis_y0, 0, 0, false}
                 : boundary_line<Real>{line_kind::slope_intercept, lc.m2, lc.c2, true};
  out[2] = {line_kind::antidiagonal, -1, 1, false};
  return out;
}

template <class Real = double>
feasible_triangle<Real> triangle(const floor_pair& fp) {
  feasible_triangle<Real> t;
  if (fp.residual() < 3) return t;
  auto lc = detail::constraint_lines<Real>(fp);

  // crossings with the antidiagonal y = 1 - x
  Real xa = lc.j0 ? Real(0) : (Real(1) - lc.c1) / (lc.m1 + 1);
  Real xb = lc.k0 ? Real(1) : (lc.m2 + lc.c2) / (Real(1) + lc.m2);

  // apex: line 1 x line 2
  Real x3, y3;
  if (lc.j0 && lc.k0) {
    x3 = 0;
    y3 = 0;
  } else if (lc.j0) {
    x3 = 0;
    y3 = -lc.c2 / lc.m2;
  } else if (lc.k0) {
    x3 = -lc.c1 / lc.m1;
    y3 = 0;
  } else {
    Real den = Real(1) - lc.m2 * lc.m1;
    if (den == 0) throw computation_error("constraint boundaries are parallel");
    x3 = (lc.m2 * lc.c1 + lc.c2) / den;
    y3 = lc.m1 * x3 + lc.c1;
  }

  Real x1 = std::max(xa, xb), x2 = std::min(xa, xb);
  Real y1 = Real(1) - x1, y2 = Real(1) - x2;
  t.vertices = {{{x1, y1}, {x2, y2}, {x3, y3}}};

  Real signed_area =
      ((x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1)) / 2;  // right-hand rule
  if (signed_area > 0) {
    t.area = signed_area;
    t.empty = false;
    for (const auto& v : t.vertices)
      for (Real c : v)
        if (c < Real(-1e-9) || c > Real(1) + Real(1e-9))
          throw computation_error("nonempty triangle vertex escaped the unit cell");
  }
  return t;
}

// area of ([j,j+1) x [k,k+1)) intersected with S = {x,y >= 0, 2x+y < M, x+2y < M}
template <class Real = double>
Real cell_overlap_area(const floor_pair& fp) {
  std::vector<std::array<Real, 2>> poly{{Real(fp.j), Real(fp.k)},
                                        {Real(fp.j + 1), Real(fp.k)},
                                        {Real(fp.j + 1), Real(fp.k + 1)},
                                        {Real(fp.j), Real(fp.k + 1)}};
  poly = detail::clip_halfplane(poly, Real(2), Real(1), Real(fp.M));
  poly = detail::clip_halfplane(poly, Real(1), Real(2), Real(fp.M));
  return detail::polygon_area(poly);
}

// P(violation | floors = (j,k)) = Area(triangle) / Area(cell overlap)
template <class Real = double>
Real conditional_violation_probability(const floor_pair& fp) {
  Real overlap = cell_overlap_area<Real>(fp);
  if (!(overlap > 0))
    throw domain_error("floor pair lies outside the quota simplex");
  Real p = triangle<Real>(fp).area / overlap;
  return std::min(Real(1), std::max(Real(0), p));
}

// P(violation) for (q1,q2) uniform on S: (6/M^2) * sum of triangle areas,
// row-major with compensated summation for bit-reproducibility
template <class Real = double>
Real exact_uniform_probability(seat_count seats) {
  if (seats.M < 3) throw domain_error("three-state probability needs M >= 3");
  const int M = seats.M;
  neumaier_acc<Real> acc;
  for (int j = 0; 2 * j < M; ++j)
    for (int k = 0; 2 * (j + k) < M; ++k)
      acc.add(triangle<Real>(floor_pair(j, k, M)).area);
  return Real(6) * acc.total() / (Real(M) * Real(M));
}

// boundary polylines clipped to the unit cell plus the triangle, for export
template <class Real = double>
struct region_data {
  struct polyline {
    int line_id = 0;  // 1..3
    std::vector<std::array<Real, 2>> points;
  };
  std::array<polyline, 3> lines;
  feasible_triangle<Real> tri;
  bool degenerate = false;  // M - j - k < 3: no lines exist at all
};

template <class Real = double>
region_data<Real> region_points(const floor_pair& fp, int resolution) {
  if (resolution < 1) throw domain_error("resolution must be positive");
  region_data<Real> out;
  for (int i = 0; i < 3; ++i) out.lines[i].line_id = i + 1;
  auto lines = boundary_lines<Real>(fp);
  if (!lines) {
    out.degenerate = true;
    return out;
  }
  out.tri = triangle<Real>(fp);

  for (int i = 0; i < 3; ++i) {
    // parametric point + direction for each line, then clip t to the unit square
    Real ax, ay, dx, dy;
    const boundary_line<Real>& bl = (*lines)[i];
    switch (bl.kind) {
      case line_kind::axis_x0:        ax = 0; ay = 0; dx = 0; dy = 1; break;
      case line_kind::axis_y0:        ax = 0; ay = 0; dx = 1; dy = 0; break;
      case line_kind::antidiagonal:   ax = 0; ay = 1; dx = 1; dy = -1; break;
      default:
        if (bl.x_of_y) { ax = bl.intercept; ay = 0; dx = bl.slope; dy = 1; }
        else           { ax = 0; ay = bl.intercept; dx = 1; dy = bl.slope; }
    }
    Real t0 = std::numeric_limits<Real>::lowest();
    Real t1 = std::numeric_limits<Real>::max();
    bool ok = true;
    auto narrow = [&](Real a, Real d) {
      if (d == 0) {
        if (a < 0 || a > 1) ok = false;
        return;
      }
      Real lo = (Real(0) - a) / d, hi = (Real(1) - a) / d;
      if (lo > hi) std::swap(lo, hi);
      t0 = std::max(t0, lo);
      t1 = std::min(t1, hi);
    };
    narrow(ax, dx);
    narrow(ay, dy);
    if (!ok || t0 > t1) continue;  // line misses the unit cell; polyline stays empty
    out.lines[i].points.reserve(resolution + 1);
    for (int sdx = 0; sdx <= resolution; ++sdx) {
      Real t = t0 + (t1 - t0) * Real(sdx) / Real(resolution);
      out.lines[i].points.push_back({ax + t * dx, ay + t * dy});
    }
  }
  return out;
}

}  // namespace hillquota
