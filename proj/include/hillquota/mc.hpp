#pragma once

// Monte Carlo estimation of the violation rate under two sampling schemes:
//   uniform_quotas   - (q1,q2) uniform on the simplex S, analytic criteria test
//   iid_populations  - three IID populations from a density, full apportionment
//
// RNG scheme (documented for cross-language reproduction): worker w of seed s
// runs xoshiro256++ whose state is four outputs of splitmix64 starting from
// s + w * 0x632BE59BD9B4E019; uniform doubles are (next() >> 11) * 2^-53.
// Estimates are bit-for-bit reproducible for a fixed (seed, n, scheme,
// worker count) because they reduce integer tallies in worker order.

#include "analysis.hpp"
#include "probmodel.hpp"

#include <cstdlib>
#include <optional>
#include <thread>

namespace hillquota {

namespace detail {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

struct xoshiro256pp {
  std::array<std::uint64_t, 4> s{};

  static xoshiro256pp from_seed(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t st = seed + stream * 0x632BE59BD9B4E019ull;
    xoshiro256pp g;
    for (auto& w : g.s) w = detail::splitmix64_next(st);
    if (!(g.s[0] | g.s[1] | g.s[2] | g.s[3])) g.s[0] = 1;
    return g;
  }

  std::uint64_t next() {
    const std::uint64_t result = detail::rotl64(s[0] + s[3], 23) + s[0];
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = detail::rotl64(s[3], 45);
    return result;
  }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

enum class sampling_kind { uniform_quotas, iid_populations };

struct sampling_scheme {
  sampling_kind kind;
  seat_count seats;
  std::optional<density_model> population_density;  // required for iid_populations
};

struct sample_estimate {
  double p_hat = 0;
  long long n_samples = 0;
  double ci_low = 0, ci_high = 0;
  std::uint64_t seed = 0;
  sampling_kind kind = sampling_kind::uniform_quotas;
  int M = 0;
  long long redraws = 0;
  int workers = 1;
};

// rejection from the box [0, M/2)^2: accept iff max(q1,q2) < M - q1 - q2
inline std::pair<double, double> uniform_simplex_draw(seat_count seats,
                                                      xoshiro256pp& rng) {
  if (seats.M < 3) throw domain_error("simplex draw needs M >= 3");
  const double half = seats.M / 2.0;
  for (;;) {
    double x = rng.uniform01() * half;
    double y = rng.uniform01() * half;
    if (std::max(x, y) < seats.M - x - y) return {x, y};
  }
}

// 95% normal-approximation interval, clamped to [0,1]
inline std::pair<double, double> wald_interval(double p_hat, long long n) {
  if (!(p_hat >= 0 && p_hat <= 1)) throw domain_error("p_hat must be in [0,1]");
  if (n < 1) throw domain_error("n must be positive");
  double half = 1.96 * std::sqrt(p_hat * (1 - p_hat) / static_cast<double>(n));
  return {std::max(0.0, p_hat - half), std::min(1.0, p_hat + half)};
}

inline int default_worker_count() {
  if (const char* env = std::getenv("HILLQUOTA_WORKERS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

namespace detail {

struct mc_tally {
  long long violations = 0, redraws = 0;
};

// one attempted draw; returns false when the draw must be repeated (tie or
// degenerate instance), in which case the caller counts a redraw
inline bool mc_attempt(const sampling_scheme& scheme, xoshiro256pp& rng,
                       bool check_both, bool& violation) {
  const int M = scheme.seats.M;
  if (scheme.kind == sampling_kind::uniform_quotas) {
    auto [q1, q2] = uniform_simplex_draw(scheme.seats, rng);
    double q3 = M - q1 - q2;
    criteria_result res =
        violation_criteria_test(quota_vector<double>{{q1, q2, q3}, 1.0}, scheme.seats);
    if (res.near_boundary) return false;
    if (check_both) {
      bool detected;
      try {
        detected = detect_violations(population_vector<double>({q1, q2, q3}),
                                     scheme.seats)
                       .has_lower;
      } catch (const tie_error&) {
        return false;
      }
      if (detected != res.satisfied)
        throw computation_error("analytic criteria disagree with direct detection");
    }
    violation = res.satisfied;
    return true;
  }

  // iid_populations
  const density_model& den = *scheme.population_density;
  double p1 = den.quantile(rng.uniform01());
  double p2 = den.quantile(rng.uniform01());
  double p3 = den.quantile(rng.uniform01());
  if (!(p1 > 0) || !(p2 > 0) || !(p3 > 0)) return false;
  if (p1 == p2 || p1 == p3 || p2 == p3) return false;
  bool detected;
  try {
    detected = detect_violations(population_vector<double>({p1, p2, p3}),
                                 scheme.seats)
                   .has_lower;
  } catch (const tie_error&) {
    return false;
  }
  if (check_both) {
    criteria_result res = violation_criteria_test(
        standard_quotas(population_vector<double>({p1, p2, p3}), scheme.seats),
        scheme.seats);
    if (res.near_boundary) return false;
    if (res.satisfied != detected)
      throw computation_error("analytic criteria disagree with direct detection");
  }
  violation = detected;
  return true;
}

inline mc_tally mc_worker(const sampling_scheme& scheme, long long count,
                          std::uint64_t seed, std::uint64_t stream, bool check_both) {
  constexpr long long redraw_cap = 1'000'000;
  xoshiro256pp rng = xoshiro256pp::from_seed(seed, stream);
  mc_tally t;
  for (long long i = 0; i < count; ++i) {
    bool violation = false;
    long long attempts = 0;
    while (!mc_attempt(scheme, rng, check_both, violation)) {
      ++t.redraws;
      if (++attempts >= redraw_cap)
        throw computation_error("redraw limit exceeded; sampling scheme is degenerate");
    }
    t.violations += violation ? 1 : 0;
  }
  return t;
}

}  // namespace detail

inline sample_estimate sample_violation_rate(const sampling_scheme& scheme,
                                             long long n_samples, std::uint64_t seed,
                                             int workers = 0,
                                             bool check_both = false) {
  if (n_samples < 1) throw domain_error("need at least one sample");
  if (scheme.seats.M < 3) throw domain_error("three-state sampling needs M >= 3");
  if (scheme.kind == sampling_kind::iid_populations) {
    if (!scheme.population_density ||
        scheme.population_density->kind != density_kind::iid_population_pdf)
      throw domain_error("iid sampling requires a population density");
    if (!scheme.population_density->quantile)
      throw domain_error("population density is not sampleable (no quantile)");
  }

  const int W = workers >= 1 ? workers : default_worker_count();
  std::vector<detail::mc_tally> tallies(W);

  if (W == 1) {
    tallies[0] = detail::mc_worker(scheme, n_samples, seed, 0, check_both);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(W);
    const long long base = n_samples / W, rem = n_samples % W;
    pool.reserve(W);
    for (int w = 0; w < W; ++w) {
      const long long count = base + (w < rem ? 1 : 0);
      pool.emplace_back([&, w, count] {
        try {
          tallies[w] = detail::mc_worker(scheme, count, seed,
                                         static_cast<std::uint64_t>(w), check_both);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  long long violations = 0, redraws = 0;
  for (const auto& t : tallies) {  // fixed worker order keeps this deterministic
    violations += t.violations;
    redraws += t.redraws;
  }

  sample_estimate est;
  est.p_hat = static_cast<double>(violations) / static_cast<double>(n_samples);
  est.n_samples = n_samples;
  std::tie(est.ci_low, est.ci_high) = wald_interval(est.p_hat, n_samples);
  est.seed = seed;
  est.kind = scheme.kind;
  est.M = scheme.seats.M;
  est.redraws = redraws;
  est.workers = W;
  return est;
}

}  // namespace hillquota
