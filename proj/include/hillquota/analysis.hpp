#pragma once

// quota-violation detection (any n) and the analytic three-state criteria
// test; the two must agree exactly on the exact path, which the tests and
// the acceptance suite check in bulk

#include "core.hpp"

#include <array>

namespace hillquota {

enum class quota_class { lower, none, upper };

template <class Q>
struct violation_report {
  struct record {
    Q quota;
    long long lower_bound;  // floor(q)
    long long upper_bound;  // ceil(q)
    int seats;
    quota_class cls;
  };
  std::vector<record> per_state;
  bool has_lower = false, has_upper = false;
};

namespace detail {

inline long long quota_floor_ll(const bigrat& q) {
  return rat_floor(q).convert_to<long long>();
}
inline long long quota_ceil_ll(const bigrat& q) {
  return rat_ceil(q).convert_to<long long>();
}
inline long long quota_floor_ll(double q) { return static_cast<long long>(std::floor(q)); }
inline long long quota_ceil_ll(double q) { return static_cast<long long>(std::ceil(q)); }

}  // namespace detail

template <class T>
violation_report<quota_t<T>> detect_violations(const population_vector<T>& pops,
                                               seat_count seats) {
  apportionment app = huntington_hill(pops, seats);
  quota_vector<quota_t<T>> qv = standard_quotas(pops, seats);

  violation_report<quota_t<T>> rep;
  rep.per_state.reserve(pops.n());
  for (std::size_t i = 0; i < pops.n(); ++i) {
    const auto& q = qv.quotas[i];
    long long lo = detail::quota_floor_ll(q), hi = detail::quota_ceil_ll(q);
    int a = app.seats[i];
    quota_class cls = quota_class::none;
    if (a < lo)
      cls = quota_class::lower;
    else if (a > hi)
      cls = quota_class::upper;
    rep.per_state.push_back({q, lo, hi, a, cls});
    rep.has_lower |= cls == quota_class::lower;
    rep.has_upper |= cls == quota_class::upper;
  }
  return rep;
}

// outcome of the three-state criteria test; margins are rhs-lhs for the two
// inequality criteria (positive = satisfied) and (M-1) - floor_sum for the
// third (zero = satisfied), as displayable doubles
struct criteria_result {
  bool satisfied = false;
  std::array<double, 3> margins{0, 0, 0};
  long long floor_sum = 0;
  bool near_boundary = false;  // float path only: |margin| within 1e-12 of scale
  explicit operator bool() const { return satisfied; }
};

// true iff the Huntington-Hill apportionment of three states with these
// standard quotas has a lower quota violation:
//   (1) q3^2 floor(q1) ceil(q1) < q1^2 floor(q3)(floor(q3)-1)
//   (2) q3^2 floor(q2) ceil(q2) < q2^2 floor(q3)(floor(q3)-1)
//   (3) floor(q1) + floor(q2) + floor(q3) = M - 1
// quotas are sorted ascending internally; inequalities are strict
template <class Q>
criteria_result violation_criteria_test(const quota_vector<Q>& quotas,
                                        seat_count seats) {
  static_assert(std::is_same_v<Q, bigrat> || std::is_same_v<Q, double>,
                "criteria test expects rational or double quotas");
  if (quotas.quotas.size() != 3)
    throw domain_error("criteria test requires exactly three quotas");

  std::array<Q, 3> q{quotas.quotas[0], quotas.quotas[1], quotas.quotas[2]};
  std::sort(q.begin(), q.end());
  if (!(q[0] > 0)) throw domain_error("quotas must be positive");

  criteria_result res;

  if constexpr (std::is_same_v<Q, bigrat>) {
    bigint j = rat_floor(q[0]), k = rat_floor(q[1]), f3 = rat_floor(q[2]);
    res.floor_sum = (j + k + f3).convert_to<long long>();
    bigrat rhs_factor = bigrat(q[2] * q[2]);  // reused scale q3^2
    bigrat lhs1 = rhs_factor * j * rat_ceil(q[0]);
    bigrat lhs2 = rhs_factor * k * rat_ceil(q[1]);
    bigrat rhs1 = q[0] * q[0] * (f3 * (f3 - 1));
    bigrat rhs2 = q[1] * q[1] * (f3 * (f3 - 1));
    res.margins = {static_cast<double>(rhs1 - lhs1), static_cast<double>(rhs2 - lhs2),
                   static_cast<double>(seats.M - 1 - res.floor_sum)};
    if (f3 < 2) return res;  // unsatisfiable: a violating state needs floor(q3) >= 2
    res.satisfied = lhs1 < rhs1 && lhs2 < rhs2 && res.floor_sum == seats.M - 1;
  } else {
    long double q1 = q[0], q2 = q[1], q3 = q[2];
    long double j = std::floor(q1), k = std::floor(q2), f3 = std::floor(q3);
    res.floor_sum = static_cast<long long>(j + k + f3);
    long double q3sq = q3 * q3, f3prod = f3 * (f3 - 1);
    long double lhs1 = q3sq * j * std::ceil(q1), rhs1 = q1 * q1 * f3prod;
    long double lhs2 = q3sq * k * std::ceil(q2), rhs2 = q2 * q2 * f3prod;
    res.margins = {static_cast<double>(rhs1 - lhs1), static_cast<double>(rhs2 - lhs2),
                   static_cast<double>(seats.M - 1 - res.floor_sum)};
    // two exact zeros (a floor factor vanished on both sides) compare exactly;
    // only a close nonzero pair is genuinely ambiguous in floating point
    const long double tol = 1e-12L;
    auto ambiguous = [tol](long double lhs, long double rhs) {
      long double scale = std::max(std::abs(lhs), std::abs(rhs));
      return scale > 0 && std::abs(rhs - lhs) <= tol * scale;
    };
    res.near_boundary = ambiguous(lhs1, rhs1) || ambiguous(lhs2, rhs2);
    if (f3 < 2) return res;
    res.satisfied = lhs1 < rhs1 && lhs2 < rhs2 && res.floor_sum == seats.M - 1;
  }
  return res;
}

}  // namespace hillquota
