#pragma once

// Spectral quantities of the balancing graph's random walk: the transition
// matrix P with P(u,v) = 1/d+ on edges and d0/d+ on the diagonal, its
// uniform steady state, the eigenvalue gap mu = 1 - lambda2, the error
// matrices Lambda_t = P^t - Pinf, and the successive-step current sums that
// drive the mixing-based discrepancy bounds. Dense work is capped (default
// n <= 1024); above the cap the gap falls back to a deflated, shifted power
// iteration that only touches the graph.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "diffbal/graph.hpp"

namespace diffbal {

inline bool is_bipartite(const RegularGraph& g) {
  std::vector<int> color(g.n, -1);
  for (int s = 0; s < g.n; ++s) {
    if (color[s] >= 0) continue;
    color[s] = 0;
    std::vector<int> stack{s};
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v : g.adj[u]) {
        if (color[v] < 0) {
          color[v] = color[u] ^ 1;
          stack.push_back(v);
        } else if (color[v] == color[u]) {
          return false;
        }
      }
    }
  }
  return true;
}

struct TransitionMatrix {
  int n = 0;
  int degree = 0;
  int d_loops = 0;
  bool connected = false;
  bool bipartite = false;
  Eigen::MatrixXd P;

  int d_plus() const { return degree + d_loops; }
  bool has_steady_state() const { return connected && (d_loops >= 1 || !bipartite); }
};

constexpr int kDenseSpectralCap = 1024;

inline TransitionMatrix transition_matrix(const BalancingGraph& g,
                                          int dense_cap = kDenseSpectralCap) {
  if (g.n() > dense_cap)
    throw std::invalid_argument("transition_matrix: n exceeds dense cap");
  TransitionMatrix tm;
  tm.n = g.n();
  tm.degree = g.degree();
  tm.d_loops = g.d_loops;
  tm.connected = is_connected(g.base);
  tm.bipartite = is_bipartite(g.base);
  const double inv = 1.0 / g.d_plus();
  tm.P = Eigen::MatrixXd::Zero(tm.n, tm.n);
  for (int u = 0; u < tm.n; ++u) {
    for (int v : g.base.adj[u]) tm.P(u, v) = inv;
    tm.P(u, u) = g.d_loops * inv;
  }
  return tm;
}

// Uniform steady state (1/n per entry); exists only for connected aperiodic
// chains, i.e. with at least one self-loop or a non-bipartite base graph.
inline Eigen::VectorXd steady_state(const BalancingGraph& g) {
  if (!is_connected(g.base))
    throw std::runtime_error("steady_state: chain is disconnected");
  if (g.d_loops == 0 && is_bipartite(g.base))
    throw std::runtime_error("steady_state: bipartite chain without self-loops is periodic");
  return Eigen::VectorXd::Constant(g.n(), 1.0 / g.n());
}

// One continuous diffusion step y = P x, computed edge-wise from the graph.
inline std::vector<double> continuous_step(const BalancingGraph& g,
                                           const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != g.n())
    throw std::invalid_argument("continuous_step: size mismatch");
  const double inv = 1.0 / g.d_plus();
  std::vector<double> y(x.size());
  for (int u = 0; u < g.n(); ++u) {
    double acc = g.d_loops * x[u];
    for (int v : g.base.adj[u]) acc += x[v];
    y[u] = acc * inv;
  }
  return y;
}

struct SpectralSummary {
  int n = 0;
  double lambda2 = 0.0;
  double mu = 0.0;

  double t_mu() const { return 6.0 * std::log(static_cast<double>(n)) / mu; }
  // Balancing horizon of the continuous process for initial discrepancy K.
  double balancing_time(double K) const {
    return 16.0 * std::log(static_cast<double>(n) * std::max(K, 1.0)) / mu;
  }
  std::int64_t balancing_steps(double K) const {
    return static_cast<std::int64_t>(std::ceil(balancing_time(K)));
  }
};

inline Eigen::VectorXd dense_spectrum(const TransitionMatrix& tm) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tm.P, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("dense_spectrum: eigendecomposition failed");
  return es.eigenvalues();  // ascending
}

inline SpectralSummary eigen_gap(const TransitionMatrix& tm) {
  if (tm.n < 2) throw std::invalid_argument("eigen_gap: need n >= 2");
  auto evs = dense_spectrum(tm);
  SpectralSummary s;
  s.n = tm.n;
  s.lambda2 = evs(tm.n - 2);  // second largest by value
  s.mu = 1.0 - s.lambda2;
  return s;
}

namespace detail {

// Power iteration for lambda2 on the shifted walk C = (P+I)/2 restricted to
// the complement of the all-ones eigenvector. The shift maps the spectrum
// into [0,1] so the dominant eigenvalue of the deflated operator is
// (lambda2+1)/2 regardless of negative eigenvalues.
inline double lambda2_power_iteration(const BalancingGraph& g, long max_iters,
                                      double tol) {
  const int n = g.n();
  std::vector<double> v(n);
  SplitMix64 rng(0x5eedULL);
  for (auto& x : v) x = (static_cast<double>(rng.next() >> 11) / 9007199254740992.0) - 0.5;
  auto deflate = [&](std::vector<double>& w) {
    double mean = 0.0;
    for (double x : w) mean += x;
    mean /= n;
    for (double& x : w) x -= mean;
  };
  auto normalize = [&](std::vector<double>& w) {
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) throw std::runtime_error("eigen_gap: degenerate iterate");
    for (double& x : w) x /= norm;
  };
  deflate(v);
  normalize(v);
  double prev = 2.0;
  int stable = 0;
  for (long it = 1; it <= max_iters; ++it) {
    std::vector<double> w = continuous_step(g, v);
    for (int i = 0; i < n; ++i) w[i] = 0.5 * (w[i] + v[i]);
    deflate(w);
    double rayleigh = 0.0;
    for (int i = 0; i < n; ++i) rayleigh += v[i] * w[i];  // v is unit
    if (std::abs(rayleigh - prev) <= tol * std::max(1.0, std::abs(rayleigh))) {
      if (++stable >= 4) return 2.0 * rayleigh - 1.0;
    } else {
      stable = 0;
    }
    prev = rayleigh;
    normalize(w);
    v.swap(w);
  }
  throw std::runtime_error("eigen_gap: power iteration did not converge within " +
                           std::to_string(max_iters) + " iterations");
}

}  // namespace detail

// Gap of the balancing graph's walk. Dense symmetric eigendecomposition up
// to dense_cap nodes, deflated power iteration beyond.
inline SpectralSummary spectral_summary(const BalancingGraph& g,
                                        int dense_cap = kDenseSpectralCap) {
  if (g.n() <= dense_cap) return eigen_gap(transition_matrix(g, dense_cap));
  SpectralSummary s;
  s.n = g.n();
  s.lambda2 = detail::lambda2_power_iteration(g, 200000, 1e-13);
  s.mu = 1.0 - s.lambda2;
  return s;
}

inline Eigen::MatrixXd matrix_power(Eigen::MatrixXd base, long t) {
  const long n = base.rows();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(n, n);
  while (t > 0) {
    if (t & 1) acc = acc * base;
    t >>= 1;
    if (t > 0) base = base * base;
  }
  return acc;
}

// Lambda_t = P^t - Pinf.
inline Eigen::MatrixXd error_matrix(const TransitionMatrix& tm, long t) {
  if (!tm.has_steady_state())
    throw std::runtime_error("error_matrix: chain has no steady state");
  return matrix_power(tm.P, t) -
         Eigen::MatrixXd::Constant(tm.n, tm.n, 1.0 / tm.n);
}

// Walks P^1, P^2, ... by one multiplication per step; cheaper than repeated
// squaring when a whole range of t is needed.
class PowerWalker {
 public:
  explicit PowerWalker(const TransitionMatrix& tm)
      : tm_(&tm), t_(0), pt_(Eigen::MatrixXd::Identity(tm.n, tm.n)) {}

  long t() const { return t_; }
  const Eigen::MatrixXd& pt() const { return pt_; }
  void advance() {
    pt_ = pt_ * tm_->P;
    ++t_;
  }
  void advance_to(long t) {
    while (t_ < t) advance();
  }
  Eigen::MatrixXd lambda() const {
    return pt_ - Eigen::MatrixXd::Constant(tm_->n, tm_->n, 1.0 / tm_->n);
  }

 private:
  const TransitionMatrix* tm_;
  long t_;
  Eigen::MatrixXd pt_;
};

// max over w of sum_v |P_{a+1}(v,w) - P_a(v,w)|.
inline double current_sum_of(const Eigen::MatrixXd& pa, const Eigen::MatrixXd& pa1) {
  return (pa1 - pa).cwiseAbs().colwise().sum().maxCoeff();
}

inline double current_sum(const TransitionMatrix& tm, long a) {
  Eigen::MatrixXd pa = matrix_power(tm.P, a);
  return current_sum_of(pa, pa * tm.P);
}

// current_sum(a) for a = 0..a_max via a single sequential walk.
inline std::vector<double> current_sums(const TransitionMatrix& tm, long a_max) {
  std::vector<double> out;
  out.reserve(a_max + 1);
  PowerWalker walker(tm);
  Eigen::MatrixXd prev = walker.pt();
  for (long a = 0; a <= a_max; ++a) {
    walker.advance();
    out.push_back(current_sum_of(prev, walker.pt()));
    prev = walker.pt();
  }
  return out;
}

// Numerical check of the mixing lemma for a sequence (q_t): claim (i) says
// ||Lambda_t q_t||inf <= 2^-c once t >= 4c log(n max||q-qbar||inf)/mu, and
// claim (ii) bounds sum_{t >= 6c log n / mu} ||Lambda_t q_t||inf by
// n^-c max||q_tau||inf. The sequence is constant-extended past its last
// entry and the geometric tail is bounded analytically via the extreme
// eigenvalue, so the verdicts cover all t, not just the explicit range.
struct LambdaBoundReport {
  long threshold_i = 0;
  long threshold_ii = 0;
  double worst_i = 0.0;    // max ||Lambda_t q_t||inf over t >= threshold_i
  double bound_i = 0.0;    // 2^-c
  double sum_ii = 0.0;     // explicit sum + analytic tail
  double bound_ii = 0.0;   // n^-c * max norm
  bool claim_i = false;
  bool claim_ii = false;
};

inline LambdaBoundReport lambda_bound_check(const TransitionMatrix& tm,
                                            const std::vector<Eigen::VectorXd>& q,
                                            int c) {
  if (!tm.has_steady_state())
    throw std::runtime_error("lambda_bound_check: chain has no steady state");
  if (q.empty()) throw std::invalid_argument("lambda_bound_check: empty sequence");
  if (c < 1) throw std::invalid_argument("lambda_bound_check: c must be >= 1");
  const int n = tm.n;
  const double mu = eigen_gap(tm).mu;
  auto evs = dense_spectrum(tm);
  const double lam_star = std::max(std::abs(evs(0)), std::abs(evs(n - 2)));

  double max_dev = 0.0, max_norm_all = 0.0;
  for (const auto& qt : q) {
    double mean = qt.mean();
    max_dev = std::max(max_dev, (qt.array() - mean).abs().maxCoeff());
    max_norm_all = std::max(max_norm_all, qt.cwiseAbs().maxCoeff());
  }

  LambdaBoundReport rep;
  rep.bound_i = std::pow(2.0, -c);
  if (max_dev == 0.0) {
    // every q_t is constant, so Lambda_t q_t = 0 identically
    rep.threshold_i = 1;
    rep.threshold_ii = static_cast<long>(std::ceil(6.0 * c * std::log(n) / mu));
    rep.bound_ii = std::pow(static_cast<double>(n), -c) * max_norm_all;
    rep.claim_i = rep.claim_ii = true;
    return rep;
  }

  const double arg = static_cast<double>(n) * max_dev;
  rep.threshold_i =
      std::max<long>(1, static_cast<long>(std::ceil(4.0 * c * std::log(std::max(arg, 1.0)) / mu)));
  rep.threshold_ii = std::max<long>(1, static_cast<long>(std::ceil(6.0 * c * std::log(n) / mu)));

  const long t_explicit = static_cast<long>(q.size());
  auto q_at = [&](long t) -> const Eigen::VectorXd& {
    return q[static_cast<std::size_t>(std::min<long>(t, t_explicit) - 1)];
  };

  PowerWalker walker(tm);
  double max_tail_norm = 0.0;  // max ||q_tau||inf over tau >= threshold_ii
  for (long t = 1; t <= t_explicit; ++t) {
    walker.advance();
    Eigen::VectorXd lq = walker.lambda() * q_at(t);
    double v = lq.cwiseAbs().maxCoeff();
    if (t >= rep.threshold_i) rep.worst_i = std::max(rep.worst_i, v);
    if (t >= rep.threshold_ii) {
      rep.sum_ii += v;
      max_tail_norm = std::max(max_tail_norm, q_at(t).cwiseAbs().maxCoeff());
    }
  }

  // Analytic tail for t > t_explicit with the constant extension:
  // ||Lambda_t q||inf <= lam*^t ||q - qbar||2.
  const Eigen::VectorXd& q_last = q.back();
  const double dev2 = (q_last.array() - q_last.mean()).matrix().norm();
  max_tail_norm = std::max(max_tail_norm, q_last.cwiseAbs().maxCoeff());
  if (lam_star >= 1.0)
    throw std::runtime_error("lambda_bound_check: no spectral decay (lambda* >= 1)");
  const long tail_start = std::max(rep.threshold_i, t_explicit + 1);
  rep.worst_i = std::max(rep.worst_i, dev2 * std::pow(lam_star, tail_start));
  const long tail_start_ii = std::max(rep.threshold_ii, t_explicit + 1);
  rep.sum_ii += dev2 * std::pow(lam_star, tail_start_ii) / (1.0 - lam_star);

  rep.bound_ii = std::pow(static_cast<double>(n), -c) * max_tail_norm;
  rep.claim_i = rep.worst_i <= rep.bound_i;
  rep.claim_ii = rep.sum_ii <= rep.bound_ii;
  return rep;
}

}  // namespace diffbal
