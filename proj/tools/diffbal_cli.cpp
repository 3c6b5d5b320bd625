// Command-line front end: graph generation, spectral summaries, balancer
// runs with CSV output, fairness audits, and the canned theorem batteries.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "diffbal/harness.hpp"
#include "diffbal/reproduce.hpp"

namespace {

void print_spectral_row(const diffbal::BalancingGraph& g, double gap_load) {
  auto s = diffbal::spectral_summary(g);
  std::printf("%d,%d,%d,%.12g,%.12g,%.12g,%.12g\n", g.n(), g.degree(), g.d_loops, s.lambda2,
              s.mu, s.t_mu(), s.balancing_time(gap_load));
}

int print_report(const diffbal::ReproduceReport& rep) {
  std::printf("name,pass,detail\n");
  for (const auto& line : rep.lines)
    std::printf("%s,%s,%s\n", line.name.c_str(), line.pass ? "pass" : "fail",
                line.detail.c_str());
  return rep.all_pass() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic diffusion load balancing laboratory"};
  app.require_subcommand(1);

  std::string graph_spec, load_spec = "point:0", balancer = "send-floor";
  std::string steps = "auto", output, flows_output, reproduce_id;
  int d_loops = -1, source = 0;
  std::int64_t base_load = -1, phi_s = 1;
  std::uint64_t seed = 0;
  double gap_load = -1.0;
  bool no_audit = false, potentials = false;

  auto* gen = app.add_subcommand("generate", "write a graph in the text format");
  gen->add_option("--graph", graph_spec, "graph spec (cycle:<n>, torus:<s>x<r>, ...)")
      ->required();
  gen->add_option("--loops", d_loops, "self-loops per node stored in the file");
  gen->add_option("-o,--output", output, "output path (default stdout)");

  auto* spectral = app.add_subcommand("spectral", "print n,d,d0,lambda2,mu,t_mu,T(K)");
  spectral->add_option("--graph", graph_spec)->required();
  spectral->add_option("--loops", d_loops, "self-loops per node");
  spectral->add_option("--gap-load", gap_load, "K used for T(K); default n^2");

  auto* run_cmd = app.add_subcommand("run", "simulate a balancer, metrics CSV per round");
  run_cmd->add_option("--graph", graph_spec)->required();
  run_cmd->add_option("--loops", d_loops);
  run_cmd->add_option("--balancer", balancer,
                      "send-floor|send-round|rotor-router|rotor-router-star|continuous|"
                      "adversary-steady|adversary-rotor-odd");
  run_cmd->add_option("--load", load_spec, "point:<K>|uniform:<m>|random:<m>[:<seed>]|file:<p>");
  run_cmd->add_option("--steps", steps, "round count, or 'auto' = ceil(16 ln(nK)/mu)");
  run_cmd->add_option("--seed", seed, "default seed for random loads");
  run_cmd->add_option("-o,--output", output, "metrics CSV path (default stdout)");
  run_cmd->add_option("--dump-flows", flows_output, "companion per-round flow CSV");
  run_cmd->add_option("--source", source, "BFS source (adversary-steady)");
  run_cmd->add_option("--base-load", base_load, "edge base load L (adversary-rotor-odd)");
  run_cmd->add_option("--phi-s", phi_s, "s used for the phi' potentials");
  run_cmd->add_flag("--potentials", potentials, "track the default potential levels");
  run_cmd->add_flag("--no-audit", no_audit, "skip the fairness ledger");

  auto* audit_cmd = app.add_subcommand("audit", "fairness report of a run as CSV");
  audit_cmd->add_option("--graph", graph_spec)->required();
  audit_cmd->add_option("--loops", d_loops);
  audit_cmd->add_option("--balancer", balancer);
  audit_cmd->add_option("--load", load_spec);
  audit_cmd->add_option("--steps", steps)->required();
  audit_cmd->add_option("--seed", seed);

  auto* repro = app.add_subcommand("reproduce", "run a canned theorem battery");
  repro->add_option("id", reproduce_id,
                    "thm1-i|thm1-ii|thm1-iii|thm2|thm4|thm5|thm6|lemmaA1|eq5|all")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      diffbal::BalancingGraph g = diffbal::make_graph(graph_spec, d_loops);
      if (output.empty()) {
        diffbal::write_graph(std::cout, g.base, g.d_loops);
      } else {
        std::ofstream out(output);
        if (!out) throw std::runtime_error("cannot open " + output);
        diffbal::write_graph(out, g.base, g.d_loops);
      }
      return 0;
    }
    if (spectral->parsed()) {
      diffbal::BalancingGraph g = diffbal::make_graph(graph_spec, d_loops);
      if (gap_load < 0) gap_load = static_cast<double>(g.n()) * g.n();
      print_spectral_row(g, gap_load);
      return 0;
    }
    if (run_cmd->parsed()) {
      diffbal::ExperimentConfig cfg;
      cfg.graph = graph_spec;
      cfg.d_loops = d_loops;
      cfg.balancer = balancer;
      cfg.load = load_spec;
      cfg.steps = steps;
      cfg.seed = seed;
      cfg.audit = !no_audit;
      cfg.track_potentials = potentials;
      cfg.phi_s = phi_s;
      cfg.source = source;
      cfg.base_load = base_load;
      cfg.flows_output = flows_output;
      auto result = diffbal::run(cfg);
      if (output.empty()) {
        diffbal::emit_csv(result, std::cout);
      } else {
        std::ofstream out(output);
        if (!out) throw std::runtime_error("cannot open " + output);
        diffbal::emit_csv(result, out);
      }
      return 0;
    }
    if (audit_cmd->parsed()) {
      diffbal::ExperimentConfig cfg;
      cfg.graph = graph_spec;
      cfg.d_loops = d_loops;
      cfg.balancer = balancer;
      cfg.load = load_spec;
      cfg.steps = steps;
      cfg.seed = seed;
      cfg.audit = true;
      auto result = diffbal::run(cfg);
      const auto& rep = result.fairness;
      std::printf("delta_observed,round_fair,max_s,violations\n");
      std::printf("%lld,%d,%d,%zu\n", static_cast<long long>(rep.delta_observed),
                  rep.round_fair ? 1 : 0, rep.good_s, rep.violations.size());
      return 0;
    }
    if (repro->parsed()) {
      if (reproduce_id == "all") {
        int rc = 0;
        for (const auto& id : diffbal::reproduce_ids())
          rc = std::max(rc, print_report(diffbal::reproduce(id)));
        return rc;
      }
      return print_report(diffbal::reproduce(reproduce_id));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
