#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dca/harness.hpp"
#include "dca/lpkit.hpp"
#include "dca/planner.hpp"

// The oracles write their own feasibility programs over every arc (no
// variable reduction, no pruning) so they share no modelling code with the
// planner or realloc modules.

namespace dca {

namespace {

struct Demand {
  NodeId attacked;
  std::vector<NodeId> defended;
};

// Is there an allocation (or, with `fixed`, the given one) under which every
// demand can be met by its own reallocation?
bool jointly_feasible(const Instance& inst, const std::vector<Demand>& demands,
                      const Allocation* fixed) {
  const std::size_t n = inst.num_nodes();
  lp::LinearProgram lp;
  std::vector<int> r(n);
  for (std::size_t v = 0; v < n; ++v) {
    const double lo = fixed ? fixed->r[v] : 0.0;
    r[v] = lp.add_variable(lo, fixed ? lo : lp::kInf);
  }
  if (!fixed) {
    std::vector<lp::Term> row;
    for (int j : r) row.push_back({j, 1.0});
    lp.add_constraint(std::move(row), lp::Relation::LessEqual, inst.budget());
  }
  for (const auto& d : demands) {
    if (d.defended.empty()) continue;
    std::vector<std::vector<lp::Term>> balance(n);
    for (std::size_t z = 0; z < n; ++z) {
      std::vector<lp::Term> out{{r[z], -1.0}};
      for (const Arc& a : inst.out_arcs(static_cast<NodeId>(z))) {
        const int t = lp.add_variable(0.0, lp::kInf);
        lp.add_constraint({{t, 1.0}, {r[z], -a.w}}, lp::Relation::LessEqual, 0.0);
        out.push_back({t, 1.0});
        balance[z].push_back({t, -1.0});
        balance[static_cast<std::size_t>(a.to)].push_back({t, 1.0});
      }
      if (out.size() > 1) lp.add_constraint(std::move(out), lp::Relation::LessEqual, 0.0);
    }
    for (NodeId v : d.defended) {
      auto row = balance[static_cast<std::size_t>(v)];
      row.push_back({r[static_cast<std::size_t>(v)], 1.0});
      lp.add_constraint(std::move(row), lp::Relation::GreaterEqual, inst.theta(v));
    }
  }
  const auto sol = lp::solve_lp(lp);
  if (sol.status != lp::Status::Optimal && sol.status != lp::Status::Infeasible)
    throw std::runtime_error(std::string("oracle LP: ") + lp::to_string(sol.status));
  return sol.optimal();
}

std::vector<NodeId> valued(const Instance& inst, const std::vector<NodeId>& nodes) {
  std::vector<NodeId> out;
  for (NodeId v : nodes)
    if (inst.alpha(v) > 0.0) out.push_back(v);
  return out;
}

double mask_value(const Instance& inst, const std::vector<NodeId>& nodes, std::uint32_t mask) {
  double s = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (mask >> i & 1u) s += inst.alpha(nodes[i]);
  return s;
}

std::vector<NodeId> complement(const std::vector<NodeId>& nodes, std::uint32_t undefended) {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (!(undefended >> i & 1u)) out.push_back(nodes[i]);
  return out;
}

class ExactSearch {
 public:
  explicit ExactSearch(const Instance& inst) : inst_(inst) {
    std::size_t decisions = 0;
    for (std::size_t u = 0; u < inst.num_nodes(); ++u) {
      auto hood = k_neighborhood(inst, static_cast<NodeId>(u));
      decisions += hood.size();
      hoods_.push_back(valued(inst, hood));
    }
    if (decisions > kOracleMaxDecisions)
      throw std::invalid_argument("oracle_exact: " + std::to_string(decisions) +
                                  " decisions exceed the limit of " +
                                  std::to_string(kOracleMaxDecisions));
  }

  double run() {
    std::vector<double> candidates{0.0};
    for (const auto& h : hoods_)
      for (std::uint32_t m = 0; m < (1u << h.size()); ++m)
        candidates.push_back(mask_value(inst_, h, m));
    std::sort(candidates.begin(), candidates.end());
    double last = -1.0;
    for (double level : candidates) {
      if (level <= last + 1e-9) continue;
      last = level;
      if (achievable(level)) return level;
    }
    throw std::logic_error("oracle_exact: leaving everything undefended must be feasible");
  }

 private:
  // Every scenario may leave undefended any set worth at most `level`; only
  // inclusion-maximal such sets matter since feasibility is down-closed.
  bool achievable(double level) {
    options_.assign(hoods_.size(), {});
    for (std::size_t u = 0; u < hoods_.size(); ++u) {
      const auto& h = hoods_[u];
      for (std::uint32_t m = 0; m < (1u << h.size()); ++m) {
        const double val = mask_value(inst_, h, m);
        if (val > level + 1e-9) continue;
        bool maximal = true;
        for (std::size_t i = 0; i < h.size() && maximal; ++i)
          if (!(m >> i & 1u) && val + inst_.alpha(h[i]) <= level + 1e-9) maximal = false;
        if (!maximal) continue;
        Demand d{static_cast<NodeId>(u), complement(h, m)};
        if (jointly_feasible(inst_, {d}, nullptr)) options_[u].push_back(std::move(d));
      }
      if (options_[u].empty()) return false;
    }
    chosen_.clear();
    return extend(0);
  }

  bool extend(std::size_t u) {
    if (u == options_.size()) return true;
    for (const auto& d : options_[u]) {
      chosen_.push_back(d);
      if ((u == 0 || jointly_feasible(inst_, chosen_, nullptr)) && extend(u + 1)) return true;
      chosen_.pop_back();
    }
    return false;
  }

  const Instance& inst_;
  std::vector<std::vector<NodeId>> hoods_;
  std::vector<std::vector<Demand>> options_;
  std::vector<Demand> chosen_;
};

}  // namespace

double oracle_exact(const Instance& inst) { return ExactSearch(inst).run(); }

double oracle_reallocation(const Instance& inst, const Allocation& alloc, NodeId u) {
  const auto hood = valued(inst, k_neighborhood(inst, u));
  if (hood.size() > 20) throw std::invalid_argument("oracle_reallocation: neighbourhood too large");
  std::vector<std::uint32_t> masks(1u << hood.size());
  std::iota(masks.begin(), masks.end(), 0u);
  std::stable_sort(masks.begin(), masks.end(), [&](std::uint32_t a, std::uint32_t b) {
    return mask_value(inst, hood, a) < mask_value(inst, hood, b);
  });
  for (std::uint32_t m : masks) {
    if (jointly_feasible(inst, {Demand{u, complement(hood, m)}}, &alloc))
      return mask_value(inst, hood, m);
  }
  throw std::logic_error("oracle_reallocation: the empty demand must be feasible");
}

double min_perfect_budget(const Instance& inst, double precision) {
  if (!(precision > 0.0)) throw std::invalid_argument("precision must be > 0");
  double lo = 0.0;
  double hi = inst.total_theta();
  if (perfect_defense(inst.with_budget(0.0))) return 0.0;
  while (hi - lo > precision) {
    const double mid = 0.5 * (lo + hi);
    if (perfect_defense(inst.with_budget(mid)))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace dca
