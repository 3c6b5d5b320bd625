#pragma once

// Experiment harness: the spec grammar for graphs, loads and balancers, the
// run pipeline (metrics each round, fairness report, spectral summary), and
// CSV input/output. A config determines its run completely, so re-running
// one reproduces the output byte for byte (wall time excluded).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffbal/adversaries.hpp"
#include "diffbal/balancers.hpp"
#include "diffbal/graph.hpp"
#include "diffbal/metrics.hpp"
#include "diffbal/simulation.hpp"
#include "diffbal/spectral.hpp"

namespace diffbal {

constexpr int kSimulationNodeCap = 4096;

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

inline std::int64_t parse_int(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    std::int64_t v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string(what) + ": bad integer '" + s + "'");
  }
}

}  // namespace detail

// Grammar: cycle:<n>, torus:<side>x<r>, hypercube:<dim>, random:<n>:<d>:<seed>,
// circlique:<n>:<d>, file:<path>. For file graphs a negative d_loops means
// "use the count stored in the file".
inline BalancingGraph make_graph(const std::string& spec, int d_loops) {
  auto fail = [&]() -> BalancingGraph {
    throw std::invalid_argument("unknown graph spec '" + spec + "'");
  };
  auto sep = spec.find(':');
  if (sep == std::string::npos) return fail();
  const std::string head = spec.substr(0, sep);
  const std::string rest = spec.substr(sep + 1);
  RegularGraph g;
  int file_loops = -1;
  if (head == "cycle") {
    g = make_cycle(static_cast<int>(detail::parse_int(rest, "cycle")));
  } else if (head == "torus") {
    auto x = rest.find('x');
    if (x == std::string::npos)
      throw std::invalid_argument("torus spec must be torus:<side>x<r>");
    g = make_torus(static_cast<int>(detail::parse_int(rest.substr(0, x), "torus side")),
                   static_cast<int>(detail::parse_int(rest.substr(x + 1), "torus dim")));
  } else if (head == "hypercube") {
    g = make_hypercube(static_cast<int>(detail::parse_int(rest, "hypercube")));
  } else if (head == "random") {
    auto parts = detail::split(rest, ':');
    if (parts.size() != 3) throw std::invalid_argument("random spec must be random:<n>:<d>:<seed>");
    g = make_random_regular(static_cast<int>(detail::parse_int(parts[0], "random n")),
                            static_cast<int>(detail::parse_int(parts[1], "random d")),
                            static_cast<std::uint64_t>(detail::parse_int(parts[2], "random seed")));
  } else if (head == "circlique") {
    auto parts = detail::split(rest, ':');
    if (parts.size() != 2) throw std::invalid_argument("circlique spec must be circlique:<n>:<d>");
    g = make_circulant_clique(static_cast<int>(detail::parse_int(parts[0], "circlique n")),
                              static_cast<int>(detail::parse_int(parts[1], "circlique d")));
  } else if (head == "file") {
    BalancingGraph bg = load_graph_file(rest);
    file_loops = bg.d_loops;
    g = std::move(bg.base);
  } else {
    return fail();
  }
  if (g.n > kSimulationNodeCap)
    throw std::invalid_argument("graph exceeds the simulation cap of 4096 nodes");
  int loops = d_loops >= 0 ? d_loops : std::max(file_loops, 0);
  return augment(std::move(g), loops);
}

// Load grammar: point:<K> (K tokens on node 0), uniform:<m>, random:<m>[:<seed>]
// (m tokens on independently uniform nodes), file:<path> (one integer per line).
inline Loads make_load(const std::string& spec, int n, std::uint64_t default_seed = 0) {
  auto sep = spec.find(':');
  if (sep == std::string::npos)
    throw std::invalid_argument("unknown load spec '" + spec + "'");
  const std::string head = spec.substr(0, sep);
  const std::string rest = spec.substr(sep + 1);
  Loads x(n, 0);
  if (head == "point") {
    std::int64_t k = detail::parse_int(rest, "point load");
    if (k < 0) throw std::invalid_argument("point load must be >= 0");
    x[0] = k;
  } else if (head == "uniform") {
    std::int64_t m = detail::parse_int(rest, "uniform load");
    if (m < 0 || m % n != 0)
      throw std::invalid_argument("uniform load must be a nonnegative multiple of n");
    for (auto& v : x) v = m / n;
  } else if (head == "random") {
    auto parts = detail::split(rest, ':');
    std::int64_t m = detail::parse_int(parts[0], "random load");
    if (m < 0) throw std::invalid_argument("random load must be >= 0");
    std::uint64_t seed = parts.size() > 1
                             ? static_cast<std::uint64_t>(detail::parse_int(parts[1], "load seed"))
                             : default_seed;
    SplitMix64 rng(seed);
    for (std::int64_t i = 0; i < m; ++i) ++x[rng.below(static_cast<std::uint64_t>(n))];
  } else if (head == "file") {
    std::ifstream in(rest);
    if (!in) throw std::runtime_error("cannot open load file: " + rest);
    for (int u = 0; u < n; ++u)
      if (!(in >> x[u])) throw std::runtime_error("load file too short: " + rest);
    total_load(x);  // rejects negatives
  } else {
    throw std::invalid_argument("unknown load spec '" + spec + "'");
  }
  return x;
}

struct BalancerSpec {
  enum class Mode { Discrete, Continuous, AdversaryRotorOdd } mode = Mode::Discrete;
  BalancerKind kind = BalancerKind::SendFloor;
};

inline BalancerSpec parse_balancer(const std::string& name) {
  if (name == "send-floor") return {BalancerSpec::Mode::Discrete, BalancerKind::SendFloor};
  if (name == "send-round") return {BalancerSpec::Mode::Discrete, BalancerKind::SendRound};
  if (name == "rotor-router") return {BalancerSpec::Mode::Discrete, BalancerKind::RotorRouter};
  if (name == "rotor-router-star")
    return {BalancerSpec::Mode::Discrete, BalancerKind::RotorRouterStar};
  if (name == "adversary-steady")
    return {BalancerSpec::Mode::Discrete, BalancerKind::AdversarySteady};
  if (name == "continuous") return {BalancerSpec::Mode::Continuous, BalancerKind::SendFloor};
  if (name == "adversary-rotor-odd")
    return {BalancerSpec::Mode::AdversaryRotorOdd, BalancerKind::RotorRouter};
  throw std::invalid_argument("unknown balancer '" + name + "'");
}

struct ExperimentConfig {
  std::string graph;
  int d_loops = -1;  // negative: file default / 0
  std::string balancer = "send-floor";
  std::string load = "point:0";         // ignored by the adversary modes
  std::string steps = "auto";           // round count or "auto" = ceil(16 ln(nK)/mu)
  std::vector<std::int64_t> levels;     // explicit potential levels; empty = default
  bool track_potentials = false;
  std::int64_t phi_s = 1;
  std::uint64_t seed = 0;               // default seed for random loads
  bool audit = true;                    // maintain the fairness ledger
  int source = 0;                       // adversary-steady BFS source
  std::int64_t base_load = -1;          // adversary-rotor-odd L; negative = phi(G)
  std::string output;                   // CSV path ("" = none)
  std::string flows_output;             // optional per-round flow dump
};

struct MetricsRow {
  std::int64_t t = 0;
  double max_load = 0, min_load = 0, discrepancy = 0;
  double balancedness = 0, dev_to_avg = 0;
  std::vector<std::int64_t> phi, phi_prime;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct RunResult {
  std::vector<MetricsRow> series;
  std::vector<std::int64_t> levels;
  FairnessReport fairness;
  SpectralSummary spectral;
  Loads final_loads;                 // discrete runs
  std::vector<double> final_real;    // continuous runs
  double wall_seconds = 0;
};

inline void emit_csv(const RunResult& result, std::ostream& out);

namespace detail {

inline MetricsRow discrete_row(std::int64_t t, const Loads& x, const PotentialTracker* pot) {
  MetricsRow row;
  row.t = t;
  row.max_load = static_cast<double>(max_load(x));
  row.min_load = static_cast<double>(min_load(x));
  row.discrepancy = row.max_load - row.min_load;
  const double avg = static_cast<double>(total_load(x)) / static_cast<double>(x.size());
  row.balancedness = row.max_load - avg;
  row.dev_to_avg = deviation_to_average(x);
  if (pot) {
    row.phi = pot->phi();
    row.phi_prime = pot->phi_prime();
  }
  return row;
}

inline MetricsRow continuous_row(std::int64_t t, const std::vector<double>& x) {
  MetricsRow row;
  row.t = t;
  row.max_load = *std::max_element(x.begin(), x.end());
  row.min_load = *std::min_element(x.begin(), x.end());
  row.discrepancy = row.max_load - row.min_load;
  double sum = 0;
  for (double v : x) sum += v;
  const double avg = sum / static_cast<double>(x.size());
  row.balancedness = row.max_load - avg;
  row.dev_to_avg = 0;
  for (double v : x) row.dev_to_avg = std::max(row.dev_to_avg, std::abs(v - avg));
  return row;
}

}  // namespace detail

inline RunResult run(const ExperimentConfig& cfg) {
  const auto t_begin = std::chrono::steady_clock::now();
  BalancingGraph g = make_graph(cfg.graph, cfg.d_loops);
  BalancerSpec bal = parse_balancer(cfg.balancer);

  RunResult result;
  result.spectral = spectral_summary(g);

  // initial loads and state
  Loads x0;
  BalancerState state;
  if (bal.kind == BalancerKind::AdversarySteady) {
    if (g.d_loops != 0)
      throw std::invalid_argument("adversary-steady runs on the unaugmented graph (loops 0)");
    auto adv = steady_state_adversary(g.base, cfg.source);
    x0 = adv.loads;
    state = adversary_state(adv);
  } else if (bal.mode == BalancerSpec::Mode::AdversaryRotorOdd) {
    if (g.d_loops != 0)
      throw std::invalid_argument("adversary-rotor-odd runs on the unaugmented graph (loops 0)");
    auto info = odd_girth_info(g.base);
    if (!info) throw std::invalid_argument("adversary-rotor-odd needs a non-bipartite graph");
    std::int64_t L = cfg.base_load >= 0 ? cfg.base_load : (info->length - 1) / 2;
    auto rotor_cfg = odd_cycle_rotor_config(g.base, L);
    x0 = rotor_cfg.loads;
    state = rotor_cfg.state;
  } else {
    x0 = make_load(cfg.load, g.n(), cfg.seed);
    if (bal.mode == BalancerSpec::Mode::Discrete) state = initial_state(bal.kind, g);
  }

  // round budget
  std::int64_t rounds;
  if (cfg.steps == "auto") {
    rounds = result.spectral.balancing_steps(static_cast<double>(discrepancy(x0)));
  } else {
    rounds = detail::parse_int(cfg.steps, "steps");
    if (rounds < 0) throw std::invalid_argument("steps must be >= 0");
  }

  if (bal.mode == BalancerSpec::Mode::Continuous) {
    if (!cfg.flows_output.empty())
      throw std::invalid_argument("the continuous process has no per-port flows to dump");
    std::vector<double> x(x0.begin(), x0.end());
    result.series.push_back(detail::continuous_row(0, x));
    for (std::int64_t t = 1; t <= rounds; ++t) {
      x = continuous_step(g, x);
      result.series.push_back(detail::continuous_row(t, x));
    }
    result.final_real = std::move(x);
  } else {
    SimOptions opt;
    opt.ledger = cfg.audit;
    if (cfg.track_potentials) {
      opt.levels = cfg.levels.empty() ? default_levels(x0, g.d_plus()) : cfg.levels;
      opt.phi_s = cfg.phi_s;
    }
    std::ofstream flows_out;
    if (!cfg.flows_output.empty()) {
      flows_out.open(cfg.flows_output);
      if (!flows_out) throw std::runtime_error("cannot open flow dump: " + cfg.flows_output);
      flows_out << "t,node,remainder";
      for (int p = 0; p < g.d_plus(); ++p) flows_out << ",f" << p;
      flows_out << '\n';
    }
    Simulation sim(g, bal.kind, x0, state, opt);
    result.levels = opt.levels;
    result.series.push_back(detail::discrete_row(0, sim.loads(), sim.potentials()));
    for (std::int64_t t = 1; t <= rounds; ++t) {
      sim.advance_one();
      result.series.push_back(detail::discrete_row(t, sim.loads(), sim.potentials()));
      if (flows_out.is_open()) {
        const auto& f = sim.last_flows();
        for (int u = 0; u < g.n(); ++u) {
          flows_out << t << ',' << u << ',' << f.remainder[u];
          for (std::int64_t v : f.port[u]) flows_out << ',' << v;
          flows_out << '\n';
        }
      }
    }
    if (sim.ledger()) result.fairness = sim.ledger()->report();
    result.final_loads = sim.loads();
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  if (!cfg.output.empty()) {
    std::ofstream out(cfg.output);
    if (!out) throw std::runtime_error("cannot open output file: " + cfg.output);
    emit_csv(result, out);
  }
  return result;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline void write_number(std::ostream& out, double v) {
  if (v == static_cast<double>(static_cast<std::int64_t>(v))) {
    out << static_cast<std::int64_t>(v);
  } else {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  }
}

inline void emit_csv(const RunResult& result, std::ostream& out) {
  out << "t,max,min,discrepancy,balancedness,dev_to_avg";
  for (std::int64_t c : result.levels) out << ",phi_c" << c;
  for (std::int64_t c : result.levels) out << ",phiP_c" << c;
  out << '\n';
  for (const auto& row : result.series) {
    out << row.t << ',';
    write_number(out, row.max_load);
    out << ',';
    write_number(out, row.min_load);
    out << ',';
    write_number(out, row.discrepancy);
    out << ',';
    write_number(out, row.balancedness);
    out << ',';
    write_number(out, row.dev_to_avg);
    for (std::int64_t v : row.phi) out << ',' << v;
    for (std::int64_t v : row.phi_prime) out << ',' << v;
    out << '\n';
  }
}

inline std::vector<MetricsRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv parse: missing header");
  if (line.rfind("t,", 0) != 0) throw std::runtime_error("csv parse: bad header");
  int phi_cols = 0;
  for (const auto& col : detail::split(line, ','))
    if (col.rfind("phi_c", 0) == 0) ++phi_cols;
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto parts = detail::split(line, ',');
    if (static_cast<int>(parts.size()) != 6 + 2 * phi_cols)
      throw std::runtime_error("csv parse: bad column count");
    MetricsRow row;
    row.t = detail::parse_int(parts[0], "csv t");
    row.max_load = std::stod(parts[1]);
    row.min_load = std::stod(parts[2]);
    row.discrepancy = std::stod(parts[3]);
    row.balancedness = std::stod(parts[4]);
    row.dev_to_avg = std::stod(parts[5]);
    for (int k = 0; k < phi_cols; ++k)
      row.phi.push_back(detail::parse_int(parts[6 + k], "csv phi"));
    for (int k = 0; k < phi_cols; ++k)
      row.phi_prime.push_back(detail::parse_int(parts[6 + phi_cols + k], "csv phiP"));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace diffbal
