#pragma once

// shared test helpers: an independent polygon-clipping oracle for the
// violation region, reference tables, pinned RNG vectors, and a small
// subprocess runner for CLI tests

#include <hillquota/hillquota.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace helpers {

// ---- independent region oracle ---------------------------------------------
//
// builds the violation region for cell (j,k) by clipping the unit cell with
// the three defining half-planes, instead of the closed-form vertex algebra
// the library uses; corner agreement between the two is a real cross-check

using pt = std::array<double, 2>;

// keep the side a*x + b*y <= c
inline std::vector<pt> clip_keep(const std::vector<pt>& poly, double a, double b,
                                 double c) {
  std::vector<pt> out;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const pt& P = poly[i];
    const pt& Q = poly[(i + 1) % poly.size()];
    double fp = a * P[0] + b * P[1] - c;
    double fq = a * Q[0] + b * Q[1] - c;
    if (fp <= 0) out.push_back(P);
    if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) {
      double t = fp / (fp - fq);
      out.push_back({P[0] + t * (Q[0] - P[0]), P[1] + t * (Q[1] - P[1])});
    }
  }
  return out;
}

inline double poly_area(const std::vector<pt>& poly) {
  if (poly.size() < 3) return 0;
  double s = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const pt& P = poly[i];
    const pt& Q = poly[(i + 1) % poly.size()];
    s += P[0] * Q[1] - Q[0] * P[1];
  }
  return std::abs(s) / 2;
}

// region as a clipped polygon: { y >= m1 x + c1 } (j>0), { x >= m2 y + c2 }
// (k>0), { x + y <= 1 }, intersected with the unit cell
inline std::vector<pt> clip_region(int j, int k, int M) {
  int R = M - j - k;
  if (R < 3) return {};
  std::vector<pt> poly{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  double rad = double(R - 1) * double(R - 2);
  if (j > 0) {
    double s1 = std::sqrt(rad / (double(j) * double(j + 1)));
    double m1 = -1 - s1, c1 = R - j * s1;
    poly = clip_keep(poly, m1, -1, -c1);  // y >= m1 x + c1
  }
  if (k > 0) {
    double s2 = std::sqrt(rad / (double(k) * double(k + 1)));
    double m2 = -1 - s2, c2 = R - k * s2;
    poly = clip_keep(poly, -1, m2, -c2);  // x >= m2 y + c2
  }
  poly = clip_keep(poly, 1, 1, 1);  // x + y <= 1
  return poly;
}

// drop consecutive near-duplicate corners the clipper can emit
inline std::vector<pt> dedupe(std::vector<pt> poly, double tol = 1e-11) {
  std::vector<pt> out;
  for (const pt& p : poly) {
    if (!out.empty() && std::abs(p[0] - out.back()[0]) < tol &&
        std::abs(p[1] - out.back()[1]) < tol)
      continue;
    out.push_back(p);
  }
  while (out.size() > 1 && std::abs(out.front()[0] - out.back()[0]) < tol &&
         std::abs(out.front()[1] - out.back()[1]) < tol)
    out.pop_back();
  return out;
}

// barycentric coordinates of P with respect to triangle (A,B,C)
inline std::array<double, 3> barycentric(const pt& A, const pt& B, const pt& C,
                                         const pt& P) {
  double det = (B[1] - C[1]) * (A[0] - C[0]) + (C[0] - B[0]) * (A[1] - C[1]);
  double l1 = ((B[1] - C[1]) * (P[0] - C[0]) + (C[0] - B[0]) * (P[1] - C[1])) / det;
  double l2 = ((C[1] - A[1]) * (P[0] - C[0]) + (A[0] - C[0]) * (P[1] - C[1])) / det;
  return {l1, l2, 1 - l1 - l2};
}

// float-path criteria verdict for a cell point (x,y) in cell (j,k)
inline bool criteria_at(int j, int k, int M, double x, double y) {
  double q1 = j + x, q2 = k + y;
  hillquota::quota_vector<double> qv;
  qv.quotas = {q1, q2, M - q1 - q2};
  qv.standard_divisor = 1;
  return hillquota::violation_criteria_test(qv, M).satisfied;
}

// ---- pinned reference values ------------------------------------------------

struct prob_row {
  int M;
  double value;
};

// uniform-quota violation probabilities, 10 digits
inline constexpr prob_row uniform_table[] = {
    {3, 1.0 / 3.0},      {5, 0.1309241587},  {10, 0.0490374073},
    {16, 0.0269128305},  {20, 0.0204738597}, {100, 0.0032817147},
};

// IID uniform-population violation probabilities
inline constexpr prob_row iid_table[] = {
    {3, 0.125}, {5, 0.0392274}, {10, 0.0136275}, {15, 0.0080208}};

// published 95% confidence intervals at n = 100000
struct ci_row {
  int M;
  double lo, hi;
};
inline constexpr ci_row uniform_cis[] = {
    {3, 0.33240, 0.33826}, {5, 0.12846, 0.13264},  {10, 0.04781, 0.05049},
    {16, 0.02614, 0.02816}, {20, 0.01981, 0.02157}, {100, 0.00314, 0.00388}};
inline constexpr ci_row iid_cis[] = {{3, 0.12328, 0.12738},
                                     {5, 0.03922, 0.04166},
                                     {10, 0.01287, 0.01431},
                                     {15, 0.00734, 0.00844}};

// ---- subprocess runner --------------------------------------------------------

#ifdef HILLQUOTA_CLI_PATH

struct cli_result {
  int exit_code = -1;
  std::string out, err;
};

inline cli_result run_cli(const std::string& args) {
  static int counter = 0;
  std::string errfile = "/tmp/hillquota_test_err_" + std::to_string(counter++);
  std::string cmd = std::string(HILLQUOTA_CLI_PATH) + " " + args + " 2>" + errfile;
  cli_result r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t got;
  while ((got = ::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
  int status = ::pclose(p);
  if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  std::ifstream ef(errfile);
  r.err.assign(std::istreambuf_iterator<char>(ef), std::istreambuf_iterator<char>());
  std::remove(errfile.c_str());
  return r;
}

#endif  // HILLQUOTA_CLI_PATH

}  // namespace helpers
