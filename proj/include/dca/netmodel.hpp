#pragma once

// Network model for defending against contagious attacks: the graph with
// thresholds/values/transfer weights, defending strategies, and the loss
// semantics every solver in this library is checked against.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dca {

using NodeId = std::int32_t;

/// A node counts as defended iff its power is at least theta - kDefTol.
inline constexpr double kDefTol = 1e-6;
/// Slack allowed when validating transfer caps and the budget.
inline constexpr double kFeasTol = 1e-6;

struct Node {
  double theta = 0.0;  // defending requirement
  double alpha = 0.0;  // damage if under-defended
};

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  double w = 0.0;
};

/// Directed transfer slot; undirected edges expand into two arcs.
struct Arc {
  NodeId from = 0;
  NodeId to = 0;
  double w = 0.0;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

class Instance {
 public:
  Instance() = default;
  /// Throws std::invalid_argument when an invariant is broken (negative
  /// theta/alpha/budget, weight outside [0,1], self-loop, duplicate edge,
  /// endpoint out of range).
  Instance(std::vector<Node> nodes, std::vector<Edge> edges, bool directed,
           int k, double budget);

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  bool directed() const { return directed_; }
  int k() const { return k_; }
  double budget() const { return budget_; }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  double theta(NodeId v) const { return nodes_[static_cast<std::size_t>(v)].theta; }
  double alpha(NodeId v) const { return nodes_[static_cast<std::size_t>(v)].alpha; }

  /// Arcs leaving v (v may transfer along them), sorted by head.
  std::span<const Arc> out_arcs(NodeId v) const;
  /// Arcs entering v, sorted by tail.
  std::span<const Arc> in_arcs(NodeId v) const;
  /// Weight of arc from->to, or a negative value when there is no such arc.
  double arc_weight(NodeId from, NodeId to) const;

  bool valid_node(NodeId v) const {
    return v >= 0 && static_cast<std::size_t>(v) < nodes_.size();
  }

  double total_theta() const;

  Instance with_budget(double budget) const;
  Instance with_k(int k) const;
  /// Same graph with every weight set to 0 (the isolated model).
  Instance with_zero_weights() const;

 private:
  void build_adjacency();

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  bool directed_ = false;
  int k_ = 0;
  double budget_ = 0.0;

  std::vector<Arc> out_;
  std::vector<std::size_t> out_begin_;
  std::vector<Arc> in_;
  std::vector<std::size_t> in_begin_;
};

struct Allocation {
  std::vector<double> r;

  double total() const;
};

struct Transfer {
  NodeId from = 0;
  NodeId to = 0;
  double amount = 0.0;
};

struct Reallocation {
  NodeId attacked = 0;
  std::vector<Transfer> transfers;
};

struct DefendingStrategy {
  Allocation allocation;
  /// reallocations[u].attacked == u for every node u.
  std::vector<Reallocation> reallocations;
};

struct DefenseOutcome {
  std::vector<double> loss;
  double defending_result = 0.0;
};

/// Nodes within distance k of u following arc direction, sorted ascending.
std::vector<NodeId> k_neighborhood(const Instance& inst, NodeId u, int k);
inline std::vector<NodeId> k_neighborhood(const Instance& inst, NodeId u) {
  return k_neighborhood(inst, u, inst.k());
}

/// Lower and upper ends of the power range reachable by reallocation:
/// max(1 - sum_out w, 0) * r_v and r_v + sum_in w * r_z.
std::pair<double, double> power_range(const Instance& inst, const Allocation& alloc,
                                      NodeId v);

double defending_power(const Instance& inst, const Allocation& alloc,
                       const Reallocation& realloc, NodeId v);
std::vector<double> defending_powers(const Instance& inst, const Allocation& alloc,
                                     const Reallocation& realloc);

double loss_of_attack(const Instance& inst, const Allocation& alloc,
                      const Reallocation& realloc, NodeId u);

/// Human-readable list of broken caps; empty when the pair is feasible.
std::vector<std::string> find_violations(const Instance& inst, const Allocation& alloc,
                                         const Reallocation& realloc);
std::vector<std::string> find_violations(const Instance& inst,
                                         const DefendingStrategy& strategy);
void validate(const Instance& inst, const DefendingStrategy& strategy);

/// Throws ValidationError if the strategy is incomplete or infeasible.
DefenseOutcome evaluate(const Instance& inst, const DefendingStrategy& strategy);

Reallocation null_reallocation(NodeId attacked);
DefendingStrategy without_reallocation(Allocation alloc);

/// Clamps solver round-off: every transfer into [0, w*r_from], and each
/// sender's total outflow to at most r_from. Drops transfers below 1e-12.
Reallocation clean_transfers(const Instance& inst, const Allocation& alloc,
                             Reallocation realloc);

// Text formats.

Instance read_instance(std::istream& in);
Instance load_instance(const std::string& path);
void write_instance(std::ostream& out, const Instance& inst);
void save_instance(const std::string& path, const Instance& inst);

/// Reads `alloc` lines and `realloc`/`t` blocks. Missing realloc blocks are
/// filled with null reallocations; the allocation vector has n entries.
DefendingStrategy read_strategy(std::istream& in, std::size_t num_nodes);
DefendingStrategy load_strategy(const std::string& path, std::size_t num_nodes);
void write_strategy(std::ostream& out, const DefendingStrategy& strategy);
void save_strategy(const std::string& path, const DefendingStrategy& strategy);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_real(double value);

}  // namespace dca
