#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dca/harness.hpp"
#include "dca/lpkit.hpp"
#include "dca/netmodel.hpp"
#include "dca/planner.hpp"
#include "dca/realloc.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void emit_strategy(const std::string& path, const dca::DefendingStrategy& s) {
  if (path.empty() || path == "-") {
    if (path == "-") dca::write_strategy(std::cout, s);
    return;
  }
  dca::save_strategy(path, s);
}

void print_summary(const std::string& algorithm, const dca::Instance& inst,
                   const dca::DefendingStrategy& s, double runtime_ms,
                   nlohmann::json extra = nlohmann::json::object()) {
  nlohmann::json j{{"algorithm", algorithm},
                   {"result", dca::evaluate(inst, s).defending_result},
                   {"runtime_ms", runtime_ms},
                   {"budget", inst.budget()}};
  j.update(extra);
  std::cout << j.dump() << '\n';
}

std::string status_name(dca::lp::Status s) { return dca::lp::to_string(s); }

// Plain edge list: first line "n", then one "u v" pair per line.
dca::SimpleGraph read_simple_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph " + path);
  dca::SimpleGraph g;
  if (!(in >> g.n)) throw std::runtime_error("graph file: missing vertex count");
  for (int a, b; in >> a >> b;) g.edges.push_back({a, b});
  return g;
}

void write_instance_to(const std::string& path, const dca::Instance& inst) {
  if (path.empty() || path == "-")
    dca::write_instance(std::cout, inst);
  else
    dca::save_instance(path, inst);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Defending strategies for networks under contagious attacks"};
  app.require_subcommand(1);

  std::string instance_path, out_path;
  std::int64_t max_nodes = 1'000'000;

  auto add_instance = [&](CLI::App* cmd) {
    cmd->add_option("--instance", instance_path, "instance file")->required()->check(CLI::ExistingFile);
  };
  auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_path, "strategy output file ('-' for stdout)");
  };

  // eval
  std::string strategy_path;
  auto* eval = app.add_subcommand("eval", "evaluate a strategy file");
  add_instance(eval);
  eval->add_option("--strategy", strategy_path)->required()->check(CLI::ExistingFile);

  // realloc
  std::string alloc_path;
  int attack = 0;
  bool lp_bound = false;
  auto* realloc = app.add_subcommand("realloc", "optimal reallocation for one attack");
  add_instance(realloc);
  realloc->add_option("--alloc", alloc_path, "file with alloc lines")->required()->check(CLI::ExistingFile);
  realloc->add_option("--attack", attack)->required();
  realloc->add_flag("--lp-bound", lp_bound, "also print the relaxation bound");

  // solve-exact
  bool no_prune = false;
  auto* exact = app.add_subcommand("solve-exact", "optimal strategy by branch-and-bound");
  add_instance(exact);
  add_out(exact);
  exact->add_option("--max-nodes", max_nodes);
  exact->add_flag("--no-prune", no_prune, "disable scenario and dominance pruning");

  auto* perfect = app.add_subcommand("perfect", "strategy with result 0, if one exists");
  add_instance(perfect);
  add_out(perfect);

  double epsilon = 0.5;
  int tau_grid = 0;
  bool grid = false;
  auto* ba = app.add_subcommand("ba", "LP-rounding approximation");
  add_instance(ba);
  add_out(ba);
  ba->add_option("--epsilon", epsilon)->check(CLI::Range(0.0, 1.0));
  ba->add_option("--tau-grid", tau_grid, "thresholds per epsilon (0: plain rounding)")
      ->check(CLI::NonNegativeNumber);
  ba->add_flag("--grid", grid, "best over epsilon = 0.1..0.9 instead of a single epsilon");

  bool with_realloc = false;
  auto* greedy = app.add_subcommand("greedy", "greedy allocation baseline");
  add_instance(greedy);
  add_out(greedy);
  greedy->add_flag("--realloc", with_realloc, "add greedy reallocation (Greedy-R)");

  // gen
  auto* gen = app.add_subcommand("gen", "generate an instance");
  gen->require_subcommand(1);
  dca::ParamRanges ranges;
  int n = 20, m_attach = 2;
  double p = 0.1, p_tri = 0.5, gadget_budget = 0.0;
  std::uint64_t seed = 1;
  std::string graph_path;
  auto add_ranges = [&](CLI::App* cmd) {
    cmd->add_option("--n", n)->required();
    cmd->add_option("--seed", seed);
    cmd->add_option("--k", ranges.k);
    cmd->add_option("--budget-fraction", ranges.budget_fraction);
    cmd->add_option("--theta-min", ranges.theta_min);
    cmd->add_option("--theta-max", ranges.theta_max);
    cmd->add_option("--alpha-min", ranges.alpha_min);
    cmd->add_option("--alpha-max", ranges.alpha_max);
    cmd->add_option("--w-min", ranges.w_min);
    cmd->add_option("--w-max", ranges.w_max);
    cmd->add_option("--out", out_path, "instance output file");
  };
  auto* gnp = gen->add_subcommand("gnp", "Erdos-Renyi G(n,p)");
  add_ranges(gnp);
  gnp->add_option("--p", p)->required();
  auto* pl = gen->add_subcommand("powerlaw", "preferential attachment with triangle closing");
  add_ranges(pl);
  pl->add_option("--m", m_attach)->required();
  pl->add_option("--p-tri", p_tri);
  auto* vc = gen->add_subcommand("vcgadget", "vertex-cover gadget of a simple graph");
  vc->add_option("--graph", graph_path, "first line n, then 'u v' per edge")
      ->required()
      ->check(CLI::ExistingFile);
  vc->add_option("--budget", gadget_budget);
  vc->add_option("--out", out_path, "instance output file");

  auto* oracle = app.add_subcommand("oracle", "brute-force optimum of a tiny instance");
  add_instance(oracle);

  std::string config_path, perfect_out;
  int threads = 0;
  auto* suite = app.add_subcommand("suite", "batch experiment runner");
  suite->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
  suite->add_option("--out", out_path, "results CSV")->required();
  suite->add_option("--perfect-out", perfect_out, "min perfect budget CSV");
  suite->add_option("--threads", threads, "overrides the config");

  double lp_budget = -1.0;
  bool relax = false;
  auto* export_lp = app.add_subcommand("export-lp", "write MILP(R) in LP file format");
  add_instance(export_lp);
  export_lp->add_option("--budget", lp_budget, "defaults to the instance budget");
  export_lp->add_option("--out", out_path);
  export_lp->add_flag("--relax", relax, "drop integrality");

  CLI11_PARSE(app, argc, argv);

  try {
    if (eval->parsed()) {
      const auto inst = dca::load_instance(instance_path);
      const auto s = dca::load_strategy(strategy_path, inst.num_nodes());
      const auto outcome = dca::evaluate(inst, s);
      std::cout << nlohmann::json{{"result", outcome.defending_result},
                                  {"loss", outcome.loss},
                                  {"allocated", s.allocation.total()},
                                  {"budget", inst.budget()}}
                       .dump()
                << '\n';
    } else if (realloc->parsed()) {
      const auto inst = dca::load_instance(instance_path);
      if (!inst.valid_node(attack)) throw std::invalid_argument("attack node out of range");
      const auto alloc = dca::load_strategy(alloc_path, inst.num_nodes()).allocation;
      const auto res = dca::optimal_reallocation(inst, alloc, attack);
      nlohmann::json transfers = nlohmann::json::array();
      for (const auto& t : res.reallocation.transfers)
        transfers.push_back({{"from", t.from}, {"to", t.to}, {"amount", t.amount}});
      nlohmann::json j{{"attack", attack},
                       {"loss", res.loss},
                       {"status", status_name(res.status)},
                       {"gap", res.gap},
                       {"null_loss", dca::loss_of_attack(inst, alloc, dca::null_reallocation(attack), attack)},
                       {"transfers", transfers}};
      if (lp_bound) j["lp_bound"] = dca::reallocation_lp_bound(inst, alloc, attack);
      std::cout << j.dump() << '\n';
    } else if (exact->parsed()) {
      const auto inst = dca::load_instance(instance_path);
      dca::PlannerConfig cfg;
      cfg.solver.max_nodes = max_nodes;
      cfg.prune_scenarios = cfg.prune_dominance = !no_prune;
      const auto start = Clock::now();
      const auto res = dca::solve_exact(inst, cfg);
      const double ms = ms_since(start);
      emit_strategy(out_path, res.strategy);
      print_summary("exact", inst, res.strategy, ms,
                    {{"status", status_name(res.status)}, {"gap", res.gap}});
    } else if (perfect->parsed()) {
      const auto inst = dca::load_instance(instance_path);
      const auto start = Clock::now();
      const auto s = dca::perfect_defense(inst);
      const double ms = ms_since(start);
      if (!s) {
        std::cout << nlohmann::json{{"algorithm", "perfect"}, {"feasible", false},
                                    {"runtime_ms", ms}, {"budget", inst.budget()}}
                         .dump()
                  << '\n';
        return 2;
      }
      emit_strategy(out_path, *s);
      print_summary("perfect", inst, *s, ms, {{"feasible", true}});
    } else if (ba->parsed()) {
      const auto inst = dca::load_instance(instance_path);
      dca::PlannerConfig cfg;
      if (tau_grid > 0) cfg.tau_points = tau_grid;
      const auto start = Clock::now();
      dca::PlanResult res;
      if (grid)
        res = dca::ba_grid(inst, tau_grid > 0, cfg);
      else if (tau_grid > 0)
        res = dca::ba_epsilon_tau(inst, epsilon, tau_grid);
      else
        res = dca::ba_epsilon(inst, epsilon);
      const double ms = ms_since(start);
      emit_strategy(out_path, res.strategy);
      nlohmann::json extra{{"epsilon", res.epsilon}};
      if (tau_grid > 0) extra["tau"] = res.tau;
      print_summary(tau_grid > 0 ? "ba-tau" : "ba", inst, res.strategy, ms, extra);
    } else if (greedy->parsed()) {
      const auto inst = dca::load_instance(instance_path);
      const auto start = Clock::now();
      const auto s = with_realloc ? dca::greedy_r(inst) : dca::greedy(inst);
      const double ms = ms_since(start);
      emit_strategy(out_path, s);
      print_summary(with_realloc ? "greedy-r" : "greedy", inst, s, ms);
    } else if (gnp->parsed()) {
      write_instance_to(out_path, dca::gen_gnp(n, p, seed, ranges));
    } else if (pl->parsed()) {
      write_instance_to(out_path, dca::gen_powerlaw(n, m_attach, p_tri, seed, ranges));
    } else if (vc->parsed()) {
      write_instance_to(out_path, dca::gen_vc_gadget(read_simple_graph(graph_path), gadget_budget));
    } else if (oracle->parsed()) {
      const auto inst = dca::load_instance(instance_path);
      const auto start = Clock::now();
      const double opt = dca::oracle_exact(inst);
      std::cout << nlohmann::json{{"algorithm", "oracle"}, {"result", opt},
                                  {"runtime_ms", ms_since(start)}, {"budget", inst.budget()}}
                       .dump()
                << '\n';
    } else if (suite->parsed()) {
      auto cfg = dca::SuiteConfig::load(config_path);
      if (threads > 0) cfg.threads = threads;
      if (perfect_out.empty()) cfg.perfect_table = false;
      const auto res = dca::run_suite(cfg);
      std::ofstream out(out_path);
      if (!out) throw std::runtime_error("cannot write " + out_path);
      dca::write_results_csv(out, res.rows);
      if (!perfect_out.empty()) {
        std::ofstream pout(perfect_out);
        if (!pout) throw std::runtime_error("cannot write " + perfect_out);
        dca::write_perfect_csv(pout, res.perfect);
      }
    } else if (export_lp->parsed()) {
      const auto inst = dca::load_instance(instance_path);
      auto model = dca::build_defense_milp(inst, lp_budget >= 0.0 ? lp_budget : inst.budget());
      const auto program = relax ? model.lp.relaxation() : model.lp;
      if (out_path.empty() || out_path == "-") {
        dca::lp::write_lp_format(std::cout, program);
      } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        dca::lp::write_lp_format(out, program);
      }
    }
  } catch (const dca::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    for (const auto& v : e.violations()) std::cerr << "  " << v << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
