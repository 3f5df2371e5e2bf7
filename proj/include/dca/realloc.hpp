#pragma once

// Optimal reallocation after an attack, with the allocation held fixed.

#include <vector>

#include "dca/lpkit.hpp"
#include "dca/netmodel.hpp"

namespace dca {

struct TransferVar {
  NodeId from = 0;
  NodeId to = 0;
  int var = 0;
};

/// The reallocation MILP for one attacked node. One binary per target
/// (x_v = 1 means v must be defended) and one transfer variable per arc whose
/// head lies inside the attacked neighbourhood.
struct ReallocationModel {
  lp::LinearProgram lp;
  NodeId attacked = 0;
  std::vector<NodeId> targets;  // N_k(attacked), ascending
  std::vector<int> x_var;       // parallel to targets
  std::vector<TransferVar> transfers;
};

ReallocationModel build_reallocation_milp(const Instance& inst, const Allocation& alloc,
                                          NodeId u);

struct ReallocationResult {
  Reallocation reallocation;
  double loss = 0.0;
  lp::Status status = lp::Status::Optimal;
  /// Distance between loss and the proven lower bound (0 when optimal).
  double gap = 0.0;
};

/// Minimizes Loss(u). The returned transfers are cleaned of round-off and
/// `loss` is their exact evaluation; it never exceeds the loss of doing
/// nothing.
ReallocationResult optimal_reallocation(const Instance& inst, const Allocation& alloc,
                                        NodeId u, const lp::SolveOptions& opts = {});

/// Objective of the relaxation with x in [0,1]: a lower bound on Loss(u).
double reallocation_lp_bound(const Instance& inst, const Allocation& alloc, NodeId u,
                             const lp::SolveOptions& opts = {});

/// Reads transfer variable values out of a solution vector.
Reallocation extract_reallocation(NodeId attacked, const std::vector<TransferVar>& vars,
                                  const std::vector<double>& x, double scale = 1.0);

/// Step for branch-and-bound pruning when every value is integral, else 0.
double integral_step(const std::vector<double>& values);

}  // namespace dca
