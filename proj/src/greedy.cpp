#include <algorithm>
#include <map>
#include <numeric>

#include "dca/planner.hpp"

namespace dca {

namespace {

// Nodes by descending value, ties by ascending id.
std::vector<NodeId> by_value(const Instance& inst, std::vector<NodeId> nodes) {
  std::stable_sort(nodes.begin(), nodes.end(), [&](NodeId a, NodeId b) {
    if (inst.alpha(a) != inst.alpha(b)) return inst.alpha(a) > inst.alpha(b);
    return a < b;
  });
  return nodes;
}

Reallocation greedy_transfers(const Instance& inst, const Allocation& alloc, NodeId u) {
  const auto& r = alloc.r;
  std::vector<double> power(r.begin(), r.end());
  std::vector<double> sent(r.size(), 0.0);
  std::vector<char> secured(r.size(), 0);
  std::map<std::pair<NodeId, NodeId>, double> moved;

  for (NodeId v : by_value(inst, k_neighborhood(inst, u))) {
    const auto vi = static_cast<std::size_t>(v);
    if (inst.alpha(v) == 0.0) continue;
    if (power[vi] >= inst.theta(v)) {
      secured[vi] = 1;
      continue;
    }
    struct Donor {
      NodeId z;
      double avail;
    };
    std::vector<Donor> donors;
    for (const Arc& a : inst.in_arcs(v)) {
      const auto z = static_cast<std::size_t>(a.from);
      double avail = a.w * r[z] - moved[{a.from, v}];
      avail = std::min(avail, r[z] - sent[z]);
      if (secured[z]) avail = std::min(avail, power[z] - inst.theta(a.from));
      if (avail > 1e-12) donors.push_back({a.from, avail});
    }
    std::stable_sort(donors.begin(), donors.end(), [](const Donor& a, const Donor& b) {
      if (a.avail != b.avail) return a.avail > b.avail;
      return a.z < b.z;
    });
    double need = inst.theta(v) - power[vi];
    std::vector<std::pair<NodeId, double>> plan;
    for (const auto& d : donors) {
      if (need <= 0.0) break;
      const double amount = std::min(d.avail, need);
      plan.push_back({d.z, amount});
      need -= amount;
    }
    // Only commit transfers that actually lift v to its threshold.
    if (need > 1e-12) continue;
    for (auto [z, amount] : plan) {
      const auto zi = static_cast<std::size_t>(z);
      moved[{z, v}] += amount;
      sent[zi] += amount;
      power[zi] -= amount;
      power[vi] += amount;
    }
    secured[vi] = 1;
  }

  Reallocation re{u, {}};
  for (auto [key, amount] : moved) {
    if (amount > 0.0) re.transfers.push_back({key.first, key.second, amount});
  }
  re = clean_transfers(inst, alloc, std::move(re));
  const auto null = null_reallocation(u);
  if (loss_of_attack(inst, alloc, re, u) > loss_of_attack(inst, alloc, null, u)) return null;
  return re;
}

}  // namespace

Allocation greedy_allocation(const Instance& inst) {
  std::vector<NodeId> all(inst.num_nodes());
  std::iota(all.begin(), all.end(), 0);
  Allocation alloc;
  alloc.r.assign(inst.num_nodes(), 0.0);
  double left = inst.budget();
  for (NodeId v : by_value(inst, all)) {
    if (left <= 0.0) break;
    const double give = std::min(inst.theta(v), left);
    alloc.r[static_cast<std::size_t>(v)] = give;
    left -= give;
  }
  return alloc;
}

DefendingStrategy greedy(const Instance& inst) {
  return without_reallocation(greedy_allocation(inst));
}

DefendingStrategy greedy_r(const Instance& inst) {
  DefendingStrategy s = greedy(inst);
  for (std::size_t u = 0; u < inst.num_nodes(); ++u)
    s.reallocations[u] = greedy_transfers(inst, s.allocation, static_cast<NodeId>(u));
  return s;
}

}  // namespace dca
