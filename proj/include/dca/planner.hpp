#pragma once

// Whole-strategy planning: the joint allocation/reallocation MILP, its LP
// bound and prunings, the perfect-defence test, LP-rounding approximations
// and the greedy baselines.

#include <optional>
#include <vector>

#include "dca/lpkit.hpp"
#include "dca/netmodel.hpp"
#include "dca/realloc.hpp"

namespace dca {

struct PruneOptions {
  /// Drop every attack scenario whose whole neighbourhood is worth at most
  /// `lower_bound`, and require Loss >= lower_bound instead.
  bool scenarios = false;
  double lower_bound = 0.0;
  /// Remove per-edge or per-sender transfer caps implied by the other family.
  bool dominance = false;
};

struct Scenario {
  NodeId attacked = 0;
  std::vector<NodeId> targets;
  std::vector<int> x_var;  // parallel to targets
  std::vector<TransferVar> transfers;
};

struct DefenseModel {
  lp::LinearProgram lp;
  double budget = 0.0;
  std::vector<int> r_var;  // one per node
  int loss_var = -1;
  std::vector<Scenario> scenarios;  // kept scenarios only
  std::vector<NodeId> dropped;      // scenarios removed by pruning
};

/// MILP over budget R: minimize Loss subject to the budget, power, edge-cap,
/// outflow-cap and loss-aggregation constraints of every attack scenario.
DefenseModel build_defense_milp(const Instance& inst, double budget,
                                const PruneOptions& prune = {});

/// Rebuilds the program with both prunings at lower bound `l`. Throws
/// std::invalid_argument when l exceeds `known_upper` (the result of a
/// feasible strategy), since pruning above OPT would be unsound.
DefenseModel prune(const Instance& inst, double budget, double l, double known_upper);

struct PlannerConfig {
  std::vector<double> epsilons{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int tau_points = 20;
  bool prune_scenarios = true;
  bool prune_dominance = true;
  lp::SolveOptions solver;
  /// solve_exact: a known strategy to start the search from.
  std::optional<DefendingStrategy> incumbent;
  /// solve_exact: epsilon of the BA(eps,tau) run that seeds the search.
  double seed_epsilon = 0.5;

  /// Throws std::invalid_argument on an epsilon outside (0,1) or no tau points.
  void validate() const;
};

struct PlanResult {
  DefendingStrategy strategy;
  double result = 0.0;  // evaluate(strategy).defending_result
  lp::Status status = lp::Status::Optimal;
  double gap = 0.0;
  double epsilon = 0.0;  // BA variants
  double tau = 0.0;      // BA(eps,tau): threshold of the chosen candidate
};

/// Optimum of the LP relaxation at the instance budget (or `budget`).
double lp_lower_bound(const Instance& inst, std::optional<double> budget = std::nullopt,
                      const lp::SolveOptions& opts = {});

PlanResult solve_exact(const Instance& inst, const PlannerConfig& cfg = {});

/// A strategy with defending result 0 if one exists at the instance budget.
std::optional<DefendingStrategy> perfect_defense(const Instance& inst,
                                                 const lp::SolveOptions& opts = {});

PlanResult ba_epsilon(const Instance& inst, double epsilon, const lp::SolveOptions& opts = {});
PlanResult ba_epsilon_tau(const Instance& inst, double epsilon, int tau_points = 20,
                          const lp::SolveOptions& opts = {});
/// Best BA(eps) (or BA(eps,tau) with `with_tau`) over the configured epsilons.
PlanResult ba_grid(const Instance& inst, bool with_tau, const PlannerConfig& cfg = {});

Allocation greedy_allocation(const Instance& inst);
DefendingStrategy greedy(const Instance& inst);
DefendingStrategy greedy_r(const Instance& inst);

/// Strategy read from a solution vector of `model`: r clamped into the
/// budget, transfers cleaned, pruned scenarios left without transfers.
DefendingStrategy extract_strategy(const Instance& inst, const DefenseModel& model,
                                   const std::vector<double>& x, double scale = 1.0);

}  // namespace dca
