#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "dca/planner.hpp"

namespace dca {

namespace {

std::string tag(NodeId a, NodeId b) { return std::to_string(a) + "_" + std::to_string(b); }

}  // namespace

DefenseModel build_defense_milp(const Instance& inst, double budget, const PruneOptions& prune) {
  if (!(budget >= 0.0)) throw std::invalid_argument("budget must be >= 0");
  const std::size_t n = inst.num_nodes();
  DefenseModel m;
  m.budget = budget;

  std::vector<lp::Term> budget_row;
  for (std::size_t v = 0; v < n; ++v) {
    m.r_var.push_back(m.lp.add_variable(0.0, lp::kInf, 0.0, "r_" + std::to_string(v)));
    budget_row.push_back({m.r_var.back(), 1.0});
  }
  const double loss_floor = prune.scenarios ? std::max(0.0, prune.lower_bound) : 0.0;
  m.loss_var = m.lp.add_variable(loss_floor, lp::kInf, 1.0, "Loss");
  m.lp.add_constraint(std::move(budget_row), lp::Relation::LessEqual, budget, "budget");

  // Sender-side facts used by the dominance rules.
  std::vector<double> out_weight(n, 0.0);
  std::vector<bool> all_unit(n, true);
  for (std::size_t z = 0; z < n; ++z) {
    for (const Arc& a : inst.out_arcs(static_cast<NodeId>(z))) {
      out_weight[z] += a.w;
      all_unit[z] = all_unit[z] && a.w == 1.0;
    }
  }

  std::vector<int> slot(n, -1);
  for (std::size_t ui = 0; ui < n; ++ui) {
    const auto u = static_cast<NodeId>(ui);
    Scenario sc;
    sc.attacked = u;
    sc.targets = k_neighborhood(inst, u);
    double total_alpha = 0.0;
    for (NodeId v : sc.targets) total_alpha += inst.alpha(v);
    if (prune.scenarios && total_alpha <= prune.lower_bound + 1e-9) {
      m.dropped.push_back(u);
      continue;
    }
    for (std::size_t i = 0; i < sc.targets.size(); ++i)
      slot[static_cast<std::size_t>(sc.targets[i])] = static_cast<int>(i);

    std::vector<std::vector<lp::Term>> power(sc.targets.size());
    std::vector<std::vector<lp::Term>> outflow(n);
    const std::string su = std::to_string(u);
    for (NodeId v : sc.targets) {
      sc.x_var.push_back(m.lp.add_binary(0.0, "x" + su + "_" + std::to_string(v)));
      // A zero-value node never adds loss, so it is never required to hold.
      if (inst.alpha(v) == 0.0) m.lp.set_bounds(sc.x_var.back(), 0.0, 0.0);
      for (const Arc& a : inst.in_arcs(v)) {
        const auto z = static_cast<std::size_t>(a.from);
        const int t = m.lp.add_variable(0.0, a.w == 0.0 ? 0.0 : lp::kInf, 0.0,
                                        "t" + su + "_" + tag(a.from, v));
        sc.transfers.push_back({a.from, v, t});
        power[static_cast<std::size_t>(slot[static_cast<std::size_t>(v)])].push_back({t, 1.0});
        if (slot[z] >= 0) power[static_cast<std::size_t>(slot[z])].push_back({t, -1.0});
        outflow[z].push_back({t, 1.0});
        // (5) t <= w r_z, implied by (6) when every weight out of z is 1.
        const bool implied = prune.dominance && all_unit[z];
        if (a.w > 0.0 && !implied)
          m.lp.add_constraint({{t, 1.0}, {m.r_var[z], -a.w}}, lp::Relation::LessEqual, 0.0,
                              "cap" + su + "_" + tag(a.from, v));
      }
    }
    // (4) r_v - out + in >= theta_v x_v
    for (std::size_t i = 0; i < sc.targets.size(); ++i) {
      const NodeId v = sc.targets[i];
      auto terms = std::move(power[i]);
      terms.push_back({m.r_var[static_cast<std::size_t>(v)], 1.0});
      terms.push_back({sc.x_var[i], -inst.theta(v)});
      m.lp.add_constraint(std::move(terms), lp::Relation::GreaterEqual, 0.0,
                          "pow" + su + "_" + std::to_string(v));
    }
    // (6) sum_v t(z,v) <= r_z, implied by (5) when the weights out of z sum
    // to at most 1 (unless (5) itself was dropped for z).
    for (std::size_t z = 0; z < n; ++z) {
      if (outflow[z].empty()) continue;
      const bool implied = prune.dominance && !all_unit[z] && out_weight[z] <= 1.0;
      if (implied) continue;
      auto terms = std::move(outflow[z]);
      terms.push_back({m.r_var[z], -1.0});
      m.lp.add_constraint(std::move(terms), lp::Relation::LessEqual, 0.0,
                          "out" + su + "_" + std::to_string(z));
    }
    // (7) sum alpha_v (1 - x_v) <= Loss
    std::vector<lp::Term> agg;
    for (std::size_t i = 0; i < sc.targets.size(); ++i) {
      const double a = inst.alpha(sc.targets[i]);
      if (a != 0.0) agg.push_back({sc.x_var[i], -a});
    }
    agg.push_back({m.loss_var, -1.0});
    m.lp.add_constraint(std::move(agg), lp::Relation::LessEqual, -total_alpha, "loss" + su);

    for (NodeId v : sc.targets) slot[static_cast<std::size_t>(v)] = -1;
    m.scenarios.push_back(std::move(sc));
  }
  return m;
}

DefenseModel prune(const Instance& inst, double budget, double l, double known_upper) {
  if (l > known_upper + 1e-9)
    throw std::invalid_argument("pruning bound " + format_real(l) +
                                " exceeds a known defending result " + format_real(known_upper));
  return build_defense_milp(inst, budget, PruneOptions{true, l, true});
}

DefendingStrategy extract_strategy(const Instance& inst, const DefenseModel& model,
                                   const std::vector<double>& x, double scale) {
  const std::size_t n = inst.num_nodes();
  DefendingStrategy s;
  s.allocation.r.resize(n);
  double total = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    s.allocation.r[v] = std::max(0.0, x[static_cast<std::size_t>(model.r_var[v])] * scale);
    total += s.allocation.r[v];
  }
  const double cap = scale * model.budget;
  if (total > cap && total > 0.0) {
    for (auto& r : s.allocation.r) r *= cap / total;
  }
  s.reallocations.resize(n);
  for (std::size_t u = 0; u < n; ++u) s.reallocations[u] = null_reallocation(static_cast<NodeId>(u));
  for (const auto& sc : model.scenarios) {
    s.reallocations[static_cast<std::size_t>(sc.attacked)] = clean_transfers(
        inst, s.allocation, extract_reallocation(sc.attacked, sc.transfers, x, scale));
  }
  return s;
}

double lp_lower_bound(const Instance& inst, std::optional<double> budget,
                      const lp::SolveOptions& opts) {
  const auto model = build_defense_milp(inst, budget.value_or(inst.budget()),
                                        PruneOptions{false, 0.0, true});
  const auto sol = lp::solve_lp(model.lp, opts);
  if (!sol.optimal())
    throw std::runtime_error(std::string("defense LP relaxation: ") + lp::to_string(sol.status));
  return std::max(0.0, sol.objective);
}

namespace {

// MILP point reproducing a strategy: transfers into each scenario's targets
// are copied, x marks targets whose power then meets the threshold exactly,
// and Loss is the resulting maximum.
std::vector<double> incumbent_from_strategy(const Instance& inst, const DefenseModel& model,
                                            const DefendingStrategy& s) {
  std::vector<double> x(static_cast<std::size_t>(model.lp.num_variables()), 0.0);
  for (std::size_t v = 0; v < inst.num_nodes(); ++v)
    x[static_cast<std::size_t>(model.r_var[v])] = s.allocation.r[v];
  double loss = model.lp.variable(model.loss_var).lower;
  std::vector<double> power(inst.num_nodes());
  for (const auto& sc : model.scenarios) {
    std::map<std::pair<NodeId, NodeId>, double> amount;
    for (const auto& t : s.reallocations[static_cast<std::size_t>(sc.attacked)].transfers)
      amount[{t.from, t.to}] += t.amount;
    power = s.allocation.r;
    for (const auto& tv : sc.transfers) {
      const auto it = amount.find({tv.from, tv.to});
      if (it == amount.end()) continue;
      x[static_cast<std::size_t>(tv.var)] = it->second;
      power[static_cast<std::size_t>(tv.from)] -= it->second;
      power[static_cast<std::size_t>(tv.to)] += it->second;
    }
    double l = 0.0;
    for (std::size_t i = 0; i < sc.targets.size(); ++i) {
      const auto v = static_cast<std::size_t>(sc.targets[i]);
      const bool ok = power[v] >= inst.nodes()[v].theta;
      x[static_cast<std::size_t>(sc.x_var[i])] = ok && inst.nodes()[v].alpha > 0.0 ? 1.0 : 0.0;
      if (!ok) l += inst.nodes()[v].alpha;
    }
    loss = std::max(loss, l);
  }
  x[static_cast<std::size_t>(model.loss_var)] = loss;
  return x;
}

}  // namespace

PlanResult solve_exact(const Instance& inst, const PlannerConfig& cfg) {
  lp::SolveOptions o = cfg.solver;
  if (o.objective_step == 0.0) {
    std::vector<double> alphas;
    for (const auto& nd : inst.nodes()) alphas.push_back(nd.alpha);
    o.objective_step = integral_step(alphas);
  }
  PruneOptions po{false, 0.0, cfg.prune_dominance};
  if (cfg.prune_scenarios) {
    po.scenarios = true;
    po.lower_bound = lp_lower_bound(inst, std::nullopt, cfg.solver);
    // OPT is a multiple of the step, so the bound may be rounded up; this also
    // keeps every objective value of the pruned program on the step grid.
    if (o.objective_step > 0.0)
      po.lower_bound = o.objective_step * std::ceil(po.lower_bound / o.objective_step - 1e-9);
  }
  const auto model = build_defense_milp(inst, inst.budget(), po);

  // Seed the search with the best of the cheap strategies.
  std::vector<DefendingStrategy> seeds{greedy_r(inst)};
  if (inst.budget() > 0.0) seeds.push_back(ba_epsilon_tau(inst, cfg.seed_epsilon, cfg.tau_points, cfg.solver).strategy);
  if (cfg.incumbent) seeds.push_back(*cfg.incumbent);
  DefendingStrategy seed_strategy;
  double seed_result = lp::kInf;
  for (auto& s : seeds) {
    const double r = evaluate(inst, s).defending_result;
    if (r < seed_result) {
      seed_result = r;
      seed_strategy = std::move(s);
    }
  }
  o.incumbent = incumbent_from_strategy(inst, model, seed_strategy);

  const auto sol = lp::solve_mip(model.lp, o);
  PlanResult res;
  res.status = sol.status;
  if (!sol.has_solution()) {
    res.strategy = seed_strategy;
    res.result = seed_result;
    res.gap = lp::kInf;
    return res;
  }
  res.strategy = extract_strategy(inst, model, sol.x);
  res.result = evaluate(inst, res.strategy).defending_result;
  if (res.result > seed_result) {
    res.strategy = seed_strategy;
    res.result = seed_result;
  }
  res.gap = sol.status == lp::Status::Optimal ? 0.0 : std::max(0.0, res.result - sol.bound);
  return res;
}

std::optional<DefendingStrategy> perfect_defense(const Instance& inst,
                                                 const lp::SolveOptions& opts) {
  const auto model = build_defense_milp(inst, inst.budget(), PruneOptions{false, 0.0, true});
  std::vector<lp::BinaryFix> fixes;
  for (const auto& sc : model.scenarios) {
    for (std::size_t i = 0; i < sc.targets.size(); ++i)
      fixes.push_back({sc.x_var[i], inst.alpha(sc.targets[i]) > 0.0});
  }
  const auto sol = lp::check_feasibility(model.lp, fixes, opts);
  if (sol.status == lp::Status::Infeasible) return std::nullopt;
  if (!sol.optimal())
    throw std::runtime_error(std::string("perfect defense LP: ") + lp::to_string(sol.status));
  return extract_strategy(inst, model, sol.x);
}

}  // namespace dca
