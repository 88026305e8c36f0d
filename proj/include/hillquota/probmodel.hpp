#pragma once

// violation probability for general quota densities, via adaptive
// Gauss-Legendre quadrature over the feasible triangles, plus the joint quota
// density induced by three IID populations:
//   g(q1,q2) = (3/M^2) Int z^2 f(q1 z/M) f(q2 z/M) f(q3 z/M) dz,  q3 = M-q1-q2
// with the z-range cut exactly to the support of f.

#include "geometry.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>

namespace hillquota {

enum class density_kind { uniform_simplex, joint_quota_pdf, iid_population_pdf };

struct density_model {
  density_kind kind = density_kind::uniform_simplex;
  std::function<double(double, double)> joint;  // joint_quota_pdf
  std::function<double(double)> pdf;            // iid_population_pdf
  std::function<double(double)> quantile;       // inverse cdf where sampleable
  double support_lo = 0, support_hi = 0;        // iid support [lo, hi]
  std::vector<double> interior_breaks;          // pdf kinks strictly inside support
  std::string spec;                             // textual form, if parsed

  static density_model uniform_simplex() { return {}; }

  static density_model joint_quota(std::function<double(double, double)> f) {
    density_model d;
    d.kind = density_kind::joint_quota_pdf;
    d.joint = std::move(f);
    return d;
  }

  // the constant density 6/M^2, i.e. (q1,q2) uniform on the simplex S
  static density_model uniform_quota(int M) {
    if (M < 3) throw domain_error("uniform quota density needs M >= 3");
    double c = 6.0 / (static_cast<double>(M) * M);
    density_model d = joint_quota([c](double, double) { return c; });
    d.spec = "uniform-simplex";
    return d;
  }

  static density_model uniform_population(double lo, double hi) {
    if (!(lo >= 0) || !(hi > lo) || !std::isfinite(hi))
      throw domain_error("uniform density: need finite support 0 <= lo < hi");
    density_model d;
    d.kind = density_kind::iid_population_pdf;
    d.support_lo = lo;
    d.support_hi = hi;
    double inv = 1.0 / (hi - lo);
    d.pdf = [lo, hi, inv](double p) { return (p >= lo && p <= hi) ? inv : 0.0; };
    d.quantile = [lo, hi](double u) { return lo + u * (hi - lo); };
    return d;
  }

  // heights[i] applies on [breaks[i], breaks[i+1]); normalized to mass 1
  static density_model piecewise_population(std::vector<double> breaks,
                                            std::vector<double> heights) {
    if (breaks.size() < 2 || heights.size() + 1 != breaks.size())
      throw domain_error("piecewise density: need n+1 breakpoints for n heights");
    if (!(breaks.front() >= 0))
      throw domain_error("piecewise density: support must be nonnegative");
    double mass = 0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
      if (!(breaks[i + 1] > breaks[i]))
        throw domain_error("piecewise density: breakpoints must be strictly increasing");
      if (heights[i] < 0) throw domain_error("piecewise density: negative height");
      mass += heights[i] * (breaks[i + 1] - breaks[i]);
    }
    if (!(mass > 0)) throw domain_error("piecewise density: zero total mass");

    std::vector<double> cum(breaks.size(), 0.0);
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
      cum[i + 1] = cum[i] + heights[i] * (breaks[i + 1] - breaks[i]) / mass;
    cum.back() = 1.0;

    density_model d;
    d.kind = density_kind::iid_population_pdf;
    d.support_lo = breaks.front();
    d.support_hi = breaks.back();
    d.interior_breaks.assign(breaks.begin() + 1, breaks.end() - 1);
    d.pdf = [breaks, heights, mass](double p) {
      if (p < breaks.front() || p > breaks.back()) return 0.0;
      auto it = std::upper_bound(breaks.begin(), breaks.end(), p);
      std::size_t i = static_cast<std::size_t>(it - breaks.begin());
      if (i == 0) return heights.front() / mass;
      if (i >= breaks.size()) return heights.back() / mass;
      return heights[i - 1] / mass;
    };
    d.quantile = [breaks, heights, cum, mass](double u) {
      u = std::min(std::max(u, 0.0), 1.0);
      auto it = std::upper_bound(cum.begin(), cum.end(), u);
      std::size_t i = std::min(static_cast<std::size_t>(it - cum.begin()),
                               cum.size() - 1);
      if (i == 0) i = 1;
      double h = heights[i - 1] / mass;
      if (h <= 0) return breaks[i - 1];
      return breaks[i - 1] + (u - cum[i - 1]) / h;
    };
    return d;
  }
};

struct quadrature_spec {
  int triangle_rule_degree = 10;
  int max_subdivision_depth = 12;
  double relative_tolerance = 1e-8;
  int z_integral_nodes = 64;
};

namespace detail {

inline void validate(const quadrature_spec& q) {
  if (q.triangle_rule_degree < 1) throw domain_error("quadrature: degree must be >= 1");
  if (q.max_subdivision_depth < 0) throw domain_error("quadrature: negative depth");
  if (q.z_integral_nodes < 1) throw domain_error("quadrature: need >= 1 z node");
  if (!(q.relative_tolerance >= 100 * std::numeric_limits<double>::epsilon()))
    throw domain_error("quadrature: relative tolerance below 100*epsilon");
}

struct gl_rule {  // nodes/weights on [0,1]
  std::vector<double> x, w;
};

inline gl_rule make_gauss_legendre(int n) {
  gl_rule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton on P_n over [-1,1], cosine initial guess
    double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double w = 2.0 / ((1 - x * x) * pp * pp);
    r.x[i] = 0.5 * (1 - x);  // descending root -> ascending node
    r.w[i] = 0.5 * w;
    r.x[n - 1 - i] = 0.5 * (1 + x);
    r.w[n - 1 - i] = 0.5 * w;
  }
  return r;
}

inline const gl_rule& gauss_legendre(int n) {
  static std::map<int, gl_rule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
  return it->second;
}

using point2 = std::array<double, 2>;

// Duffy-collapsed product rule: exact for total degree <= 2*nodes-2
template <class F>
double triangle_rule(const F& f, const point2& A, const point2& B, const point2& C,
                     const gl_rule& g) {
  const double ux = B[0] - A[0], uy = B[1] - A[1];
  const double vx = C[0] - A[0], vy = C[1] - A[1];
  const double two_area = std::abs(ux * vy - uy * vx);
  if (two_area == 0) return 0;
  double s = 0;
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    const double u = g.x[i], wu = g.w[i], oneu = 1 - u;
    double row = 0;
    for (std::size_t jj = 0; jj < g.x.size(); ++jj) {
      const double b = g.x[jj] * oneu;
      row += g.w[jj] * f(A[0] + u * ux + b * vx, A[1] + u * uy + b * vy);
    }
    s += wu * oneu * row;
  }
  return two_area * s;
}

struct quad_report {
  bool converged = true;
  double worst_err = 0;
  point2 worst_at{0, 0};
};

template <class F>
double adaptive_triangle(const F& f, const point2& A, const point2& B, const point2& C,
                         const gl_rule& g, double rtol, int max_depth,
                         quad_report& rep, int depth, double coarse) {
  const point2 ab{(A[0] + B[0]) / 2, (A[1] + B[1]) / 2};
  const point2 bc{(B[0] + C[0]) / 2, (B[1] + C[1]) / 2};
  const point2 ca{(C[0] + A[0]) / 2, (C[1] + A[1]) / 2};
  const double i0 = triangle_rule(f, A, ab, ca, g);
  const double i1 = triangle_rule(f, ab, B, bc, g);
  const double i2 = triangle_rule(f, ca, bc, C, g);
  const double i3 = triangle_rule(f, ab, bc, ca, g);
  const double fine = i0 + i1 + i2 + i3;
  const double err = std::abs(fine - coarse);
  if (err <= std::max(rtol * std::abs(fine), 1e-16)) return fine;
  if (depth >= max_depth) {
    if (err > rep.worst_err) {
      rep.worst_err = err;
      rep.worst_at = {(A[0] + B[0] + C[0]) / 3, (A[1] + B[1] + C[1]) / 3};
    }
    rep.converged = false;
    return fine;
  }
  return adaptive_triangle(f, A, ab, ca, g, rtol, max_depth, rep, depth + 1, i0) +
         adaptive_triangle(f, ab, B, bc, g, rtol, max_depth, rep, depth + 1, i1) +
         adaptive_triangle(f, ca, bc, C, g, rtol, max_depth, rep, depth + 1, i2) +
         adaptive_triangle(f, ab, bc, ca, g, rtol, max_depth, rep, depth + 1, i3);
}

template <class F>
double integrate_triangle(const F& f, const point2& A, const point2& B,
                          const point2& C, const gl_rule& g, double rtol,
                          int max_depth, quad_report& rep) {
  return adaptive_triangle(f, A, B, C, g, rtol, max_depth, rep, 0,
                           triangle_rule(f, A, B, C, g));
}

}  // namespace detail

// joint quota density induced by three IID populations with bounded support
inline density_model iid_quota_density(const density_model& pop, seat_count seats,
                                       int z_integral_nodes = 64) {
  if (pop.kind != density_kind::iid_population_pdf)
    throw domain_error("iid_quota_density expects a one-dimensional population density");
  if (!pop.pdf) throw domain_error("population density is not evaluable");
  if (z_integral_nodes < 1) throw domain_error("need at least one z node");
  const double a = pop.support_lo, b = pop.support_hi;
  if (!(a >= 0) || !(b > a) || !std::isfinite(b))
    throw domain_error("population density support must satisfy 0 <= lo < hi < inf");
  const double M = seats.M;
  if (seats.M < 3) throw domain_error("three-state quota density needs M >= 3");

  const detail::gl_rule zrule = detail::gauss_legendre(z_integral_nodes);
  std::function<double(double)> f = pop.pdf;
  const std::vector<double> kinks = pop.interior_breaks;

  density_model out;
  out.kind = density_kind::joint_quota_pdf;
  out.spec = pop.spec;
  out.joint = [f, a, b, M, zrule, kinks](double q1, double q2) {
    const double q3 = M - q1 - q2;
    if (!(q1 > 0) || !(q2 > 0) || !(q3 > 0))
      throw domain_error("quota density evaluated outside the open simplex");
    const double qmin = std::min(q1, std::min(q2, q3));
    const double qmax = std::max(q1, std::max(q2, q3));
    const double zlo = a * M / qmin;  // all three p_i = q_i z / M must be >= a
    const double zhi = b * M / qmax;  //                         ... and <= b
    if (!(zlo < zhi)) return 0.0;

    // integrate [lo, hi] with the rule; exact for polynomial pieces
    auto segment = [&](double lo, double hi) {
      const double len = hi - lo;
      double s = 0;
      for (std::size_t t = 0; t < zrule.x.size(); ++t) {
        const double z = lo + len * zrule.x[t];
        s += zrule.w[t] * z * z * f(q1 * z / M) * f(q2 * z / M) * f(q3 * z / M);
      }
      return len * s;
    };

    double s = 0;
    if (kinks.empty()) {
      s = segment(zlo, zhi);
    } else {
      // split at every z where some p_i = q_i z / M crosses a pdf kink, so
      // the rule only ever integrates smooth pieces
      std::vector<double> cuts;
      cuts.reserve(2 + 3 * kinks.size());
      cuts.push_back(zlo);
      for (double bp : kinks)
        for (double q : {q1, q2, q3}) {
          double z = bp * M / q;
          if (z > zlo && z < zhi) cuts.push_back(z);
        }
      cuts.push_back(zhi);
      std::sort(cuts.begin() + 1, cuts.end() - 1);
      for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg)
        s += segment(cuts[seg], cuts[seg + 1]);
    }
    return 3.0 * s / (M * M);
  };
  return out;
}

// P(violation) = sum over feasible cells of Int_triangle f(j+x, k+y) dx dy
inline double general_pdf_probability(seat_count seats, const density_model& density,
                                      quadrature_spec quad = {}) {
  detail::validate(quad);
  if (seats.M < 3) throw domain_error("three-state probability needs M >= 3");
  const density_model& d = density.kind == density_kind::uniform_simplex
                               ? density_model::uniform_quota(seats.M)
                               : density;
  if (d.kind != density_kind::joint_quota_pdf || !d.joint)
    throw domain_error("general_pdf_probability expects an evaluable joint quota density");

  const detail::gl_rule& rule =
      detail::gauss_legendre((quad.triangle_rule_degree + 2 + 1) / 2);
  const int M = seats.M;

  neumaier_acc<double> acc;
  bool failed = false;
  double worst_err = 0;
  int worst_j = 0, worst_k = 0;
  for (int j = 0; 2 * j < M; ++j) {
    for (int k = 0; 2 * (j + k) < M; ++k) {
      feasible_triangle<double> tri = triangle<double>(floor_pair(j, k, M));
      if (tri.empty) continue;
      auto f = [&](double x, double y) { return d.joint(j + x, k + y); };
      detail::quad_report rep;
      double v = detail::integrate_triangle(f, tri.vertices[0], tri.vertices[1],
                                            tri.vertices[2], rule,
                                            quad.relative_tolerance,
                                            quad.max_subdivision_depth, rep);
      if (!rep.converged && rep.worst_err > worst_err) {
        failed = true;
        worst_err = rep.worst_err;
        worst_j = j;
        worst_k = k;
      }
      acc.add(v);
    }
  }
  if (failed) {
    std::ostringstream msg;
    msg << "quadrature did not converge at max depth; worst cell (j=" << worst_j
        << ", k=" << worst_k << "), residual error " << worst_err;
    throw computation_error(msg.str());
  }
  return acc.total();
}

// diagnostic: the joint density integrated over every cell meeting the
// simplex S (not just the feasible-summation domain); should be ~1
inline double density_normalization(seat_count seats, const density_model& density,
                                    quadrature_spec quad = {}) {
  detail::validate(quad);
  if (seats.M < 3) throw domain_error("normalization check needs M >= 3");
  const density_model& d = density.kind == density_kind::uniform_simplex
                               ? density_model::uniform_quota(seats.M)
                               : density;
  if (d.kind != density_kind::joint_quota_pdf || !d.joint)
    throw domain_error("normalization check expects an evaluable joint quota density");

  const detail::gl_rule& rule =
      detail::gauss_legendre((quad.triangle_rule_degree + 2 + 1) / 2);
  const int M = seats.M, top = cell_cover_max(M);
  const double Md = M;

  neumaier_acc<double> acc;
  for (int j = 0; j <= top; ++j) {
    for (int k = 0; k <= top; ++k) {
      std::vector<detail::point2> poly{{double(j), double(k)},
                                       {double(j + 1), double(k)},
                                       {double(j + 1), double(k + 1)},
                                       {double(j), double(k + 1)}};
      poly = detail::clip_halfplane(poly, 2.0, 1.0, Md);
      poly = detail::clip_halfplane(poly, 1.0, 2.0, Md);
      if (poly.size() < 3) continue;
      detail::quad_report rep;
      for (std::size_t t = 1; t + 1 < poly.size(); ++t) {  // fan triangulation
        acc.add(detail::integrate_triangle(d.joint, poly[0], poly[t], poly[t + 1],
                                           rule, quad.relative_tolerance,
                                           quad.max_subdivision_depth, rep));
      }
    }
  }
  return acc.total();
}

// "uniform:lo:hi" or "piecewise:/path/to.csv" (rows "breakpoint,height";
// the last row closes the support, its height is ignored)
inline density_model parse_density(const std::string& spec) {
  auto bad = [&](const std::string& why) {
    throw domain_error("density spec '" + spec + "': " + why);
  };
  std::size_t colon = spec.find(':');
  std::string head = spec.substr(0, colon == std::string::npos ? spec.size() : colon);

  if (head == "uniform") {
    if (colon == std::string::npos) bad("expected uniform:lo:hi");
    std::string rest = spec.substr(colon + 1);
    std::size_t c2 = rest.find(':');
    if (c2 == std::string::npos) bad("expected uniform:lo:hi");
    try {
      density_model d = density_model::uniform_population(
          std::stod(rest.substr(0, c2)), std::stod(rest.substr(c2 + 1)));
      d.spec = spec;
      return d;
    } catch (const std::logic_error&) {
      bad("bounds are not numbers");
    }
  } else if (head == "piecewise") {
    if (colon == std::string::npos) bad("expected piecewise:<csv path>");
    std::ifstream in(spec.substr(colon + 1));
    if (!in) bad("cannot open csv file");
    std::vector<double> breaks, heights;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::size_t comma = line.find(',');
      if (comma == std::string::npos) bad("csv rows must be 'breakpoint,height'");
      try {
        breaks.push_back(std::stod(line.substr(0, comma)));
        heights.push_back(std::stod(line.substr(comma + 1)));
      } catch (const std::logic_error&) {
        bad("csv row is not numeric: '" + line + "'");
      }
    }
    if (breaks.size() < 2) bad("need at least two rows");
    heights.pop_back();  // the final row only closes the support
    density_model d = density_model::piecewise_population(std::move(breaks),
                                                          std::move(heights));
    d.spec = spec;
    return d;
  }
  bad("unknown density kind (expected uniform: or piecewise:)");
  return {};  // unreachable
}

}  // namespace hillquota
