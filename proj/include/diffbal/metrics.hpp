#pragma once

// Scalar observables and potential functions. The average load is kept as
// the exact pair (total, n); every comparison against "xbar + fraction"
// cross-multiplies in 128-bit integers, so the checks that sit half a token
// above the average never touch floating point.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "diffbal/balancers.hpp"

namespace diffbal {

inline std::int64_t max_load(const Loads& x) { return *std::max_element(x.begin(), x.end()); }
inline std::int64_t min_load(const Loads& x) { return *std::min_element(x.begin(), x.end()); }

inline std::int64_t discrepancy(const Loads& x) {
  if (x.empty()) throw std::invalid_argument("discrepancy: empty load vector");
  auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *hi - *lo;
}

// max_u |x(u) - m/n|
inline double deviation_to_average(const Loads& x) {
  const double avg = static_cast<double>(total_load(x)) / static_cast<double>(x.size());
  double worst = 0.0;
  for (std::int64_t v : x) worst = std::max(worst, std::abs(static_cast<double>(v) - avg));
  return worst;
}

inline double balancedness(const Loads& x) {
  return static_cast<double>(max_load(x)) -
         static_cast<double>(total_load(x)) / static_cast<double>(x.size());
}

// phi_t(c) = sum_v max{x(v) - c*d+, 0}
inline std::int64_t potential_phi(const Loads& x, std::int64_t c, int d_plus) {
  if (c < 0) throw std::invalid_argument("potential_phi: c must be >= 0");
  const std::int64_t bar = c * d_plus;
  std::int64_t sum = 0;
  for (std::int64_t v : x)
    if (v > bar) sum += v - bar;
  return sum;
}

// phi'_t(c) = sum_v max{c*d+ + s - x(v), 0}
inline std::int64_t potential_phi_prime(const Loads& x, std::int64_t c, std::int64_t s,
                                        int d_plus) {
  if (c < 0) throw std::invalid_argument("potential_phi_prime: c must be >= 0");
  if (s < 1) throw std::invalid_argument("potential_phi_prime: s must be >= 1");
  const std::int64_t bar = c * d_plus + s;
  std::int64_t sum = 0;
  for (std::int64_t v : x)
    if (v < bar) sum += bar - v;
  return sum;
}

// One-step drop credited to a node by the upper potential: positive only
// when the load decreased from above c*d+ to below c*d+ + s.
inline std::int64_t drop_delta(std::int64_t x_prev, std::int64_t x, std::int64_t c,
                               std::int64_t s, int d_plus) {
  const std::int64_t bar = c * d_plus;
  if (!(x_prev > x && x_prev > bar && x < bar + s)) return 0;
  return std::min(x_prev, bar + s) - std::max(x, bar);
}

// Mirror drop for the lower potential: load increased from below c*d+ + s
// to above c*d+.
inline std::int64_t drop_delta_prime(std::int64_t x_prev, std::int64_t x, std::int64_t c,
                                     std::int64_t s, int d_plus) {
  const std::int64_t bar = c * d_plus;
  if (!(x_prev < x && x_prev < bar + s && x > bar)) return 0;
  return std::min(x, bar + s) - std::max(x_prev, bar);
}

// Default tracked levels: {0 .. ceil(max x0 / d+)}, evenly subsampled down
// to at most `cap` values (0 and the top level always kept).
inline std::vector<std::int64_t> default_levels(const Loads& x0, int d_plus, int cap = 64) {
  const std::int64_t top = (max_load(x0) + d_plus - 1) / d_plus;
  std::vector<std::int64_t> levels;
  if (top + 1 <= cap) {
    for (std::int64_t c = 0; c <= top; ++c) levels.push_back(c);
  } else {
    for (int k = 0; k < cap; ++k)
      levels.push_back((top * k + (cap - 1) / 2) / (cap - 1));
    levels.front() = 0;
    levels.back() = top;
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  }
  return levels;
}

// Verifies, for every tracked level c and every round, that phi_t(c) is
// non-increasing and drops by at least the summed per-node Delta_t(c,u),
// and symmetrically for phi'_t(c) with Delta'. Violations are counted, not
// thrown: the monotonicity is a theorem for good s-balancers, and the tests
// assert the counters stay at zero.
class PotentialTracker {
 public:
  PotentialTracker(std::vector<std::int64_t> levels, std::int64_t s, int d_plus)
      : levels_(std::move(levels)), s_(s), d_plus_(d_plus) {
    if (s_ < 1) throw std::invalid_argument("PotentialTracker: s must be >= 1");
    if (!std::is_sorted(levels_.begin(), levels_.end()))
      throw std::invalid_argument("PotentialTracker: levels must be ascending");
  }

  void start(const Loads& x0) {
    phi_.resize(levels_.size());
    phip_.resize(levels_.size());
    for (std::size_t i = 0; i < levels_.size(); ++i) {
      phi_[i] = potential_phi(x0, levels_[i], d_plus_);
      phip_[i] = potential_phi_prime(x0, levels_[i], s_, d_plus_);
    }
    started_ = true;
  }

  void on_step(const Loads& prev, const Loads& next) {
    if (!started_) throw std::logic_error("PotentialTracker: start() not called");
    ++steps_;
    const std::size_t L = levels_.size();
    phi_diff_.assign(L, 0);
    phip_diff_.assign(L, 0);
    drop_.assign(L, 0);
    drop_prime_.assign(L, 0);

    for (std::size_t u = 0; u < prev.size(); ++u) {
      const std::int64_t a = prev[u], b = next[u];
      if (a != b) {
        // phi(c) changes only while c*d+ < max(a,b)
        for (std::size_t i = 0; i < L; ++i) {
          const std::int64_t bar = levels_[i] * d_plus_;
          if (bar >= std::max(a, b)) break;
          phi_diff_[i] += std::max<std::int64_t>(b - bar, 0) - std::max<std::int64_t>(a - bar, 0);
        }
        // phi'(c) changes only while c*d+ + s > min(a,b)
        for (std::size_t i = L; i-- > 0;) {
          const std::int64_t bar = levels_[i] * d_plus_ + s_;
          if (bar <= std::min(a, b)) break;
          phip_diff_[i] += std::max<std::int64_t>(bar - b, 0) - std::max<std::int64_t>(bar - a, 0);
        }
      }
      if (a > b) {
        // Delta_t(c,u) > 0 needs c*d+ < a and c*d+ + s > b
        for (std::size_t i = 0; i < L; ++i) {
          const std::int64_t bar = levels_[i] * d_plus_;
          if (bar >= a) break;
          if (bar + s_ <= b) continue;
          drop_[i] += std::min(a, bar + s_) - std::max(b, bar);
        }
      } else if (a < b) {
        for (std::size_t i = 0; i < L; ++i) {
          const std::int64_t bar = levels_[i] * d_plus_;
          if (bar >= b) break;
          if (bar + s_ <= a) continue;
          drop_prime_[i] += std::min(b, bar + s_) - std::max(a, bar);
        }
      }
    }

    for (std::size_t i = 0; i < L; ++i) {
      if (phi_diff_[i] > 0 || phip_diff_[i] > 0) ++monotone_violations_;
      if (phi_diff_[i] + drop_[i] > 0) ++drop_violations_;
      if (phip_diff_[i] + drop_prime_[i] > 0) ++drop_violations_;
      phi_[i] += phi_diff_[i];
      phip_[i] += phip_diff_[i];
    }
  }

  const std::vector<std::int64_t>& levels() const { return levels_; }
  const std::vector<std::int64_t>& phi() const { return phi_; }
  const std::vector<std::int64_t>& phi_prime() const { return phip_; }
  std::int64_t monotone_violations() const { return monotone_violations_; }
  std::int64_t drop_violations() const { return drop_violations_; }
  std::int64_t steps() const { return steps_; }

 private:
  std::vector<std::int64_t> levels_;
  std::int64_t s_;
  int d_plus_;
  bool started_ = false;
  std::int64_t steps_ = 0;
  std::vector<std::int64_t> phi_, phip_;
  std::vector<std::int64_t> phi_diff_, phip_diff_, drop_, drop_prime_;
  std::int64_t monotone_violations_ = 0;
  std::int64_t drop_violations_ = 0;
};

// ---------------------------------------------------------------------------
// "Drop below the line": every node must visit a load of at most
// xbar + delta*d+ + 2r + 1/2 + lambda inside each window of T_hat rounds.
// lambda is passed doubled so thresholds like d+/2 - 1/2 stay exact.
// ---------------------------------------------------------------------------

struct DipThreshold {
  std::int64_t total = 0;  // m
  std::int64_t n = 1;
  std::int64_t bonus_num2 = 0;  // 2*(delta*d+ + 2r) + 1 + 2*lambda

  static DipThreshold make(std::int64_t total, std::int64_t n, std::int64_t delta,
                           std::int64_t r, int d_plus, std::int64_t lambda_times2) {
    return DipThreshold{total, n, 2 * (delta * d_plus + 2 * r) + 1 + lambda_times2};
  }

  // x <= m/n + bonus/2, exactly
  bool below(std::int64_t x) const {
    return static_cast<__int128>(2 * x) * n <=
           static_cast<__int128>(2) * total + static_cast<__int128>(bonus_num2) * n;
  }
};

// Offline window scan over a recorded series (series[k] is the load vector
// at time t0+k). For each node: does some t' in [t+1, t+T_hat] dip below?
inline std::vector<char> drop_below_line_check(const std::vector<Loads>& series,
                                               std::int64_t t0, std::int64_t t,
                                               std::int64_t t_hat, const DipThreshold& thr) {
  if (t + t_hat - t0 >= static_cast<std::int64_t>(series.size()) || t + 1 < t0)
    throw std::out_of_range("drop_below_line_check: window outside recorded series");
  const std::size_t n = series.front().size();
  std::vector<char> ok(n, 0);
  for (std::int64_t tp = t + 1; tp <= t + t_hat; ++tp) {
    const Loads& x = series[static_cast<std::size_t>(tp - t0)];
    for (std::size_t u = 0; u < n; ++u)
      if (!ok[u] && thr.below(x[u])) ok[u] = 1;
  }
  return ok;
}

// Streaming variant: feeds every round once and tracks, per node, the
// longest stretch without a dip after t_start.
class DipWindowCheck {
 public:
  DipWindowCheck(DipThreshold thr, std::int64_t t_start, int n)
      : thr_(thr), t_start_(t_start), last_dip_(n, t_start) {}

  void observe(std::int64_t t, const Loads& x) {
    if (t <= t_start_) return;
    for (std::size_t u = 0; u < x.size(); ++u) {
      if (thr_.below(x[u]))
        last_dip_[u] = t;
      else
        worst_gap_ = std::max(worst_gap_, t - last_dip_[u]);
    }
  }

  std::int64_t worst_gap() const { return worst_gap_; }
  bool ok(std::int64_t t_hat) const { return worst_gap_ <= t_hat; }

 private:
  DipThreshold thr_;
  std::int64_t t_start_;
  std::vector<std::int64_t> last_dip_;
  std::int64_t worst_gap_ = 0;
};

}  // namespace diffbal
