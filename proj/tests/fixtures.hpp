#pragma once

// Hand-built instances and independent re-implementations used as test
// oracles. Nothing here calls the library's evaluation code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "dca/harness.hpp"
#include "dca/lpkit.hpp"
#include "dca/netmodel.hpp"

namespace fixtures {

using dca::Instance;
using dca::NodeId;

// Six-node network: a=0 b=1 c=2 d=3 e=4 f=5, edges a-b a-d a-e b-c c-d e-f,
// every weight 0.5. With two units everywhere an attack on a leaves a and e
// short, yet b, d and f can lift them while c refills b and d.
enum : NodeId { A = 0, B = 1, C = 2, D = 3, E = 4, F = 5 };

inline Instance example_network(double budget = 12.0, int k = 1) {
  std::vector<dca::Node> nodes{{4, 5}, {2, 1}, {1, 1}, {2, 1}, {3, 3}, {1, 1}};
  std::vector<dca::Edge> edges{{A, B, 0.5}, {A, D, 0.5}, {A, E, 0.5},
                               {B, C, 0.5}, {C, D, 0.5}, {E, F, 0.5}};
  return Instance(std::move(nodes), std::move(edges), false, k, budget);
}

inline dca::Allocation uniform_allocation(const Instance& inst, double r) {
  return dca::Allocation{std::vector<double>(inst.num_nodes(), r)};
}

// Transfers that defend all of N_1(a) in example_network with r = 2.
inline dca::Reallocation example_witness() {
  return dca::Reallocation{A, {{B, A, 1.0}, {D, A, 1.0}, {C, B, 1.0}, {C, D, 1.0}, {F, E, 1.0}}};
}

// One isolated node with theta = alpha = 1 and resource 1 - eps.
inline Instance lone_node(double budget) {
  return Instance({{1.0, 1.0}}, {}, false, 1, budget);
}

// Star with centre 0 and n - 1 leaves, theta = alpha = 1.
inline Instance star(int n, double budget, double w = 1.0) {
  std::vector<dca::Node> nodes(static_cast<std::size_t>(n), dca::Node{1.0, 1.0});
  std::vector<dca::Edge> edges;
  for (int v = 1; v < n; ++v) edges.push_back({0, v, w});
  return Instance(std::move(nodes), std::move(edges), false, 1, budget);
}

inline std::size_t decision_count(const Instance& inst) {
  std::size_t d = 0;
  for (std::size_t u = 0; u < inst.num_nodes(); ++u)
    d += dca::k_neighborhood(inst, static_cast<NodeId>(u)).size();
  return d;
}

// Deterministic stream of small random instances whose joint decision count
// fits the exhaustive oracle.
inline std::vector<Instance> small_instances(int count, std::uint64_t salt, int k = 1,
                                             int max_n = 6) {
  std::vector<Instance> out;
  dca::ParamRanges pr;
  pr.k = k;
  for (std::uint64_t s = 1; static_cast<int>(out.size()) < count; ++s) {
    const int n = 2 + static_cast<int>((s + salt) % static_cast<std::uint64_t>(max_n - 1));
    const double p = 0.25 + 0.1 * static_cast<double>((s * 7 + salt) % 5);
    pr.budget_fraction = 0.2 + 0.15 * static_cast<double>((s + 3 * salt) % 5);
    auto inst = dca::gen_gnp(n, p, s * 1000 + salt, pr);
    if (decision_count(inst) <= dca::kOracleMaxDecisions) out.push_back(std::move(inst));
  }
  return out;
}

// A feasible strategy drawn at random: the budget is split by random shares
// and every attack gets random transfers, scaled to respect both caps.
inline dca::DefendingStrategy random_strategy(const Instance& inst, std::mt19937_64& rng,
                                              double use = 1.0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = inst.num_nodes();
  dca::DefendingStrategy s;
  s.allocation.r.assign(n, 0.0);
  double total = 0.0;
  for (auto& r : s.allocation.r) total += (r = unit(rng));
  for (auto& r : s.allocation.r) r = total > 0 ? r / total * inst.budget() * use : 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    dca::Reallocation re{static_cast<NodeId>(u), {}};
    for (const auto& e : inst.edges()) {
      for (int dir = 0; dir < (inst.directed() ? 1 : 2); ++dir) {
        const NodeId from = dir == 0 ? e.u : e.v;
        const NodeId to = dir == 0 ? e.v : e.u;
        if (unit(rng) < 0.5) continue;
        re.transfers.push_back({from, to, unit(rng) * e.w * s.allocation.r[static_cast<std::size_t>(from)]});
      }
    }
    // Shrink each sender's transfers so the outflow stays within its stock.
    std::vector<double> out(n, 0.0);
    for (const auto& t : re.transfers) out[static_cast<std::size_t>(t.from)] += t.amount;
    for (auto& t : re.transfers) {
      const double stock = s.allocation.r[static_cast<std::size_t>(t.from)];
      const double o = out[static_cast<std::size_t>(t.from)];
      if (o > stock) t.amount *= stock / o * (1.0 - 1e-12);
    }
    s.reallocations.push_back(std::move(re));
  }
  return s;
}

// Hop distances by repeated relaxation over the raw edge list.
inline std::vector<std::vector<int>> hop_distances(const Instance& inst) {
  const std::size_t n = inst.num_nodes();
  const int inf = std::numeric_limits<int>::max() / 4;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (std::size_t v = 0; v < n; ++v) d[v][v] = 0;
  for (const auto& e : inst.edges()) {
    d[static_cast<std::size_t>(e.u)][static_cast<std::size_t>(e.v)] = 1;
    if (!inst.directed()) d[static_cast<std::size_t>(e.v)][static_cast<std::size_t>(e.u)] = 1;
  }
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][m] + d[m][j]);
  return d;
}

// Straight-line loss formula: sum of alpha over nodes within k hops whose
// power falls short of theta.
inline double independent_loss(const Instance& inst, const std::vector<double>& r,
                               const dca::Reallocation& re) {
  const auto dist = hop_distances(inst);
  std::vector<double> p = r;
  for (const auto& t : re.transfers) {
    p[static_cast<std::size_t>(t.from)] -= t.amount;
    p[static_cast<std::size_t>(t.to)] += t.amount;
  }
  double loss = 0.0;
  for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
    if (dist[static_cast<std::size_t>(re.attacked)][v] > inst.k()) continue;
    if (p[v] < inst.theta(static_cast<NodeId>(v)) - 1e-6) loss += inst.alpha(static_cast<NodeId>(v));
  }
  return loss;
}

inline double independent_result(const Instance& inst, const dca::DefendingStrategy& s) {
  double worst = 0.0;
  for (const auto& re : s.reallocations)
    worst = std::max(worst, independent_loss(inst, s.allocation.r, re));
  return worst;
}

// With k = 0 only the attacked node matters and every neighbour can push its
// full edge share into it: u is safe iff r_u + sum_z w_zu r_z >= theta_u.
inline double p_hat_result(const Instance& inst, const std::vector<double>& r) {
  double worst = 0.0;
  for (std::size_t u = 0; u < inst.num_nodes(); ++u) {
    double p = r[u];
    for (const auto& e : inst.edges()) {
      if (static_cast<std::size_t>(e.v) == u) p += e.w * r[static_cast<std::size_t>(e.u)];
      if (!inst.directed() && static_cast<std::size_t>(e.u) == u)
        p += e.w * r[static_cast<std::size_t>(e.v)];
    }
    if (p < inst.theta(static_cast<NodeId>(u)) - 1e-6) worst = std::max(worst, inst.alpha(static_cast<NodeId>(u)));
  }
  return worst;
}

// Optimum for k = 0: the smallest value level L such that every node worth
// more than L can be lifted to its threshold by one shared allocation.
inline double k0_optimum(const Instance& inst) {
  namespace lp = dca::lp;
  std::vector<double> levels{0.0};
  for (const auto& nd : inst.nodes()) levels.push_back(nd.alpha);
  std::sort(levels.begin(), levels.end());
  for (double level : levels) {
    lp::LinearProgram prog;
    std::vector<lp::Term> budget;
    for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
      prog.add_variable(0.0, lp::kInf);
      budget.push_back({static_cast<int>(v), 1.0});
    }
    prog.add_constraint(budget, lp::Relation::LessEqual, inst.budget());
    for (std::size_t u = 0; u < inst.num_nodes(); ++u) {
      if (inst.alpha(static_cast<NodeId>(u)) <= level) continue;
      std::vector<lp::Term> row{{static_cast<int>(u), 1.0}};
      for (const auto& e : inst.edges()) {
        if (static_cast<std::size_t>(e.v) == u) row.push_back({e.u, e.w});
        if (!inst.directed() && static_cast<std::size_t>(e.u) == u) row.push_back({e.v, e.w});
      }
      prog.add_constraint(row, lp::Relation::GreaterEqual, inst.theta(static_cast<NodeId>(u)));
    }
    if (lp::solve_lp(prog).optimal()) return level;
  }
  return levels.back();
}

}  // namespace fixtures
