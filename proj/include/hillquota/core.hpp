#pragma once

// Huntington-Hill apportionment: the priority algorithm, the equivalent
// divisor formulation, and standard quotas.
//
// Two arithmetic paths behind one interface, selected by the population type:
//   exact  - bigint/bigrat populations; every priority comparison is done
//            sqrt-free in arbitrary-precision integers
//   float  - double populations; comparisons in long double with a relative
//            tolerance of 1e-12, ties reported as errors (never broken)

#include "numeric.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <utility>

namespace hillquota {

namespace detail {
template <class T>
inline constexpr bool is_exact_population =
    std::is_same_v<T, bigint> || std::is_same_v<T, bigrat>;
}

// quotas are ratios, so integer populations still yield rational quotas
template <class T>
using quota_t = std::conditional_t<std::is_floating_point_v<T>, double, bigrat>;

template <class T>
struct population_vector {
  std::vector<T> values;

  explicit population_vector(std::vector<T> v) : values(std::move(v)) {
    if (values.empty()) throw domain_error("populations: at least one state required");
    for (const T& p : values)
      if (!(p > 0)) throw domain_error("populations: every value must be positive");
    std::vector<T> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw domain_error("populations: tied values are not allowed");
  }

  std::size_t n() const { return values.size(); }
};

struct seat_count {
  int M;
  seat_count(int m) : M(m) {
    if (m < 1) throw domain_error("seats: M must be a positive integer");
  }
};

template <class T>
struct quota_vector {
  std::vector<T> quotas;
  T standard_divisor;
};

struct grant_step {
  int seat;           // overall seat number handed out (n+1 .. M)
  std::size_t state;  // receiving state (input order, 0-based)
  double priority;    // p/sqrt(r(r+1)) at grant time, for display only
};

struct apportionment {
  std::vector<int> seats;
  std::vector<grant_step> trace;  // filled only when requested
};

enum class ordering { less, equal, greater };

// priority value p/sqrt(r(r+1)) carried as (p^2, r(r+1)) so comparisons stay
// sqrt-free: a < b  iff  pa^2 * rb(rb+1) < pb^2 * ra(ra+1)
template <class S>
struct priority_key {
  S population_squared;
  std::uint64_t seat_product;
};

namespace detail {

inline ordering compare_priority_raw(const bigint& pa2, std::uint64_t sa,
                                     const bigint& pb2, std::uint64_t sb) {
  bigint lhs = pa2 * sb, rhs = pb2 * sa;
  if (lhs < rhs) return ordering::less;
  if (lhs > rhs) return ordering::greater;
  return ordering::equal;
}

inline ordering compare_priority_raw(long double pa2, std::uint64_t sa,
                                     long double pb2, std::uint64_t sb,
                                     long double rel_tol = 1e-12L) {
  long double lhs = pa2 * static_cast<long double>(sb);
  long double rhs = pb2 * static_cast<long double>(sa);
  long double scale = std::max(std::abs(lhs), std::abs(rhs));
  if (std::abs(lhs - rhs) <= rel_tol * scale) return ordering::equal;
  return lhs < rhs ? ordering::less : ordering::greater;
}

inline std::vector<bigint> canonical_ints(const std::vector<bigint>& v) { return v; }

// scale rationals to integers by the lcm of denominators (homogeneity
// makes this apportionment-preserving)
inline std::vector<bigint> canonical_ints(const std::vector<bigrat>& v) {
  bigint l = 1;
  for (const bigrat& q : v) l = boost::multiprecision::lcm(l, denominator(q));
  std::vector<bigint> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = numerator(v[i]) * (l / denominator(v[i]));
  return out;
}

}  // namespace detail

inline ordering compare_priority(const priority_key<bigint>& a,
                                 const priority_key<bigint>& b) {
  return detail::compare_priority_raw(a.population_squared, a.seat_product,
                                      b.population_squared, b.seat_product);
}

inline ordering compare_priority(const priority_key<long double>& a,
                                 const priority_key<long double>& b) {
  return detail::compare_priority_raw(a.population_squared, a.seat_product,
                                      b.population_squared, b.seat_product);
}

template <class T>
quota_vector<quota_t<T>> standard_quotas(const population_vector<T>& pops,
                                         seat_count seats) {
  if (seats.M < static_cast<int>(pops.n()))
    throw domain_error("seats: M must be at least the number of states");
  using Q = quota_t<T>;
  Q total = 0;
  for (const T& p : pops.values) total += static_cast<Q>(p);
  quota_vector<Q> out;
  out.standard_divisor = total / seats.M;
  out.quotas.reserve(pops.n());
  for (const T& p : pops.values)
    out.quotas.push_back(static_cast<Q>(p) * seats.M / total);
  return out;
}

template <class T>
apportionment huntington_hill(const population_vector<T>& pops, seat_count seats,
                              bool want_trace = false) {
  const std::size_t n = pops.n();
  if (seats.M < static_cast<int>(n))
    throw domain_error("seats: M must be at least the number of states");

  using S = std::conditional_t<detail::is_exact_population<T>, bigint, long double>;
  std::vector<S> p2(n);
  std::vector<double> p_approx(n);
  if constexpr (detail::is_exact_population<T>) {
    std::vector<bigint> canon = detail::canonical_ints(pops.values);
    for (std::size_t i = 0; i < n; ++i) {
      p2[i] = canon[i] * canon[i];
      p_approx[i] = static_cast<double>(canon[i]);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      p2[i] = static_cast<long double>(pops.values[i]) * pops.values[i];
      p_approx[i] = static_cast<double>(pops.values[i]);
    }
  }

  std::vector<int> seats_v(n, 1);
  apportionment out;
  auto seat_product = [&](std::size_t i) {
    return static_cast<std::uint64_t>(seats_v[i]) *
           static_cast<std::uint64_t>(seats_v[i] + 1);
  };

  for (int g = static_cast<int>(n); g < seats.M; ++g) {
    std::size_t best = 0;
    std::vector<std::size_t> tied{0};
    for (std::size_t i = 1; i < n; ++i) {
      ordering c = detail::compare_priority_raw(p2[i], seat_product(i),
                                                p2[best], seat_product(best));
      if (c == ordering::greater) {
        best = i;
        tied.assign(1, i);
      } else if (c == ordering::equal) {
        tied.push_back(i);
      }
    }
    if (tied.size() > 1)
      throw tie_error("priority tie while granting seat " + std::to_string(g + 1),
                      std::move(tied));
    if (want_trace)
      out.trace.push_back(
          {g + 1, best,
           p_approx[best] / std::sqrt(static_cast<double>(seat_product(best)))});
    ++seats_v[best];
  }

  out.seats = std::move(seats_v);
  return out;
}

// seats produced by Hill rounding of p_i/d at a fixed divisor d (no sum
// constraint): round m up iff m > sqrt(floor(m) ceil(m)), i.e. m^2 > r(r+1)
template <class T>
std::vector<int> hill_seats_at_divisor(const population_vector<T>& pops, double d) {
  if (!(d > 0)) throw domain_error("divisor must be positive");
  std::vector<int> out(pops.n());
  if constexpr (detail::is_exact_population<T>) {
    const bigrat dr(d);  // doubles are dyadic, so this is exact
    for (std::size_t i = 0; i < pops.n(); ++i) {
      bigrat m = bigrat(pops.values[i]) / dr;
      bigint r = rat_floor(m);
      if (m * m > bigrat(r * (r + 1))) ++r;
      out[i] = static_cast<int>(r);
    }
  } else {
    for (std::size_t i = 0; i < pops.n(); ++i) {
      long double m = static_cast<long double>(pops.values[i]) / d;
      long double r = std::floor(m);
      out[i] = static_cast<int>(r) + (m * m > r * (r + 1) ? 1 : 0);
    }
  }
  return out;
}

// bisection for a modified divisor whose Hill-rounded seats sum to M; the
// seat sum is nonincreasing in d, bracketed by [P/(M+n), 2 max p]
template <class T>
apportionment hill_divisor(const population_vector<T>& pops, seat_count seats) {
  const std::size_t n = pops.n();
  if (seats.M < static_cast<int>(n))
    throw domain_error("seats: M must be at least the number of states");

  double total = 0, maxp = 0;
  for (const T& p : pops.values) {
    double v = static_cast<double>(p);
    total += v;
    maxp = std::max(maxp, v);
  }
  double lo = total / (seats.M + static_cast<int>(n));
  double hi = 2 * maxp;

  auto seats_at = [&](double d) { return hill_seats_at_divisor(pops, d); };
  for (int iter = 0; iter < 200; ++iter) {
    double mid = 0.5 * (lo + hi);
    std::vector<int> s = seats_at(mid);
    int sum = std::accumulate(s.begin(), s.end(), 0);
    if (sum == seats.M) return {std::move(s), {}};
    (sum > seats.M ? lo : hi) = mid;
  }
  throw computation_error(
      "divisor search failed: no divisor reaches the target seat sum "
      "(rounding-boundary tie)");
}

}  // namespace hillquota
