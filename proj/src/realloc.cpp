#include "dca/realloc.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dca {

double integral_step(const std::vector<double>& values) {
  for (double a : values) {
    if (a != std::floor(a)) return 0.0;
  }
  return 1.0;
}

ReallocationModel build_reallocation_milp(const Instance& inst, const Allocation& alloc,
                                          NodeId u) {
  if (!inst.valid_node(u))
    throw std::domain_error("build_reallocation_milp: invalid node " + std::to_string(u));
  if (alloc.r.size() != inst.num_nodes())
    throw std::invalid_argument("allocation size does not match the instance");

  ReallocationModel m;
  m.attacked = u;
  m.targets = k_neighborhood(inst, u);
  double total_alpha = 0.0;
  for (NodeId v : m.targets) {
    m.x_var.push_back(m.lp.add_binary(-inst.alpha(v), "x_" + std::to_string(v)));
    total_alpha += inst.alpha(v);
  }
  m.lp.set_objective_offset(total_alpha);

  std::vector<std::vector<lp::Term>> power(m.targets.size());
  std::vector<std::vector<lp::Term>> outflow(inst.num_nodes());
  std::vector<int> slot(inst.num_nodes(), -1);
  for (std::size_t i = 0; i < m.targets.size(); ++i)
    slot[static_cast<std::size_t>(m.targets[i])] = static_cast<int>(i);

  for (NodeId v : m.targets) {
    for (const Arc& a : inst.in_arcs(v)) {
      const double cap = a.w * alloc.r[static_cast<std::size_t>(a.from)];
      const int var = m.lp.add_variable(
          0.0, cap, 0.0, "t_" + std::to_string(a.from) + "_" + std::to_string(v));
      m.transfers.push_back({a.from, v, var});
      power[static_cast<std::size_t>(slot[static_cast<std::size_t>(v)])].push_back({var, 1.0});
      const int s = slot[static_cast<std::size_t>(a.from)];
      if (s >= 0) power[static_cast<std::size_t>(s)].push_back({var, -1.0});
      outflow[static_cast<std::size_t>(a.from)].push_back({var, 1.0});
    }
  }

  // (1) r_v - out + in >= theta_v x_v
  for (std::size_t i = 0; i < m.targets.size(); ++i) {
    const NodeId v = m.targets[i];
    auto terms = power[i];
    terms.push_back({m.x_var[i], -inst.theta(v)});
    m.lp.add_constraint(std::move(terms), lp::Relation::GreaterEqual,
                        -alloc.r[static_cast<std::size_t>(v)], "power_" + std::to_string(v));
  }
  // (3) outflow cap; (2) is carried by the variable bounds. A single
  // outgoing variable is already capped below r by its bound.
  for (std::size_t z = 0; z < outflow.size(); ++z) {
    if (outflow[z].size() < 2) continue;
    m.lp.add_constraint(std::move(outflow[z]), lp::Relation::LessEqual, alloc.r[z],
                        "out_" + std::to_string(z));
  }
  return m;
}

Reallocation extract_reallocation(NodeId attacked, const std::vector<TransferVar>& vars,
                                  const std::vector<double>& x, double scale) {
  Reallocation re{attacked, {}};
  for (const auto& tv : vars) {
    const double amount = x[static_cast<std::size_t>(tv.var)] * scale;
    if (amount > 1e-12) re.transfers.push_back({tv.from, tv.to, amount});
  }
  return re;
}

ReallocationResult optimal_reallocation(const Instance& inst, const Allocation& alloc,
                                        NodeId u, const lp::SolveOptions& opts) {
  auto model = build_reallocation_milp(inst, alloc, u);
  ReallocationResult res;
  res.reallocation = null_reallocation(u);
  const double null_loss = loss_of_attack(inst, alloc, res.reallocation, u);
  res.loss = null_loss;

  bool can_move = false;
  for (const auto& tv : model.transfers) can_move |= model.lp.variable(tv.var).upper > 0.0;
  if (!can_move) return res;

  lp::SolveOptions o = opts;
  if (o.objective_step == 0.0) {
    std::vector<double> alphas;
    for (NodeId v : model.targets) alphas.push_back(inst.alpha(v));
    o.objective_step = integral_step(alphas);
  }
  // The null reallocation with x_v = [r_v >= theta_v] seeds the search.
  std::vector<double> seed(static_cast<std::size_t>(model.lp.num_variables()), 0.0);
  for (std::size_t i = 0; i < model.targets.size(); ++i) {
    const auto v = static_cast<std::size_t>(model.targets[i]);
    seed[static_cast<std::size_t>(model.x_var[i])] = alloc.r[v] >= inst.nodes()[v].theta ? 1.0 : 0.0;
  }
  o.incumbent = seed;

  const auto sol = lp::solve_mip(model.lp, o);
  res.status = sol.status;
  if (!sol.has_solution()) {
    res.gap = null_loss;
    return res;
  }
  auto re = clean_transfers(inst, alloc, extract_reallocation(u, model.transfers, sol.x));
  const double loss = loss_of_attack(inst, alloc, re, u);
  if (loss <= null_loss) {
    res.reallocation = std::move(re);
    res.loss = loss;
  }
  res.gap = sol.status == lp::Status::Optimal ? 0.0 : std::max(0.0, res.loss - sol.bound);
  return res;
}

double reallocation_lp_bound(const Instance& inst, const Allocation& alloc, NodeId u,
                             const lp::SolveOptions& opts) {
  const auto model = build_reallocation_milp(inst, alloc, u);
  const auto sol = lp::solve_lp(model.lp, opts);
  if (!sol.optimal())
    throw std::runtime_error(std::string("reallocation LP relaxation: ") +
                             lp::to_string(sol.status));
  return sol.objective;
}

}  // namespace dca
