#pragma once

// Small dense LP/MIP engine: bounded-variable primal simplex and best-bound
// branch-and-bound over binary variables.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dca::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
/// Integer variables count as integral within this distance of {0,1}.
inline constexpr double kIntTol = 1e-6;

enum class Relation { LessEqual, GreaterEqual, Equal };

enum class Status {
  Optimal,
  Infeasible,
  Unbounded,
  IterLimit,  // pivot limit or numerical trouble
  NodeLimit,  // branch-and-bound stopped early; see SolveResult::gap
};

const char* to_string(Status s);

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Variable {
  double lower = 0.0;
  double upper = kInf;
  double cost = 0.0;
  bool binary = false;
  std::string name;
};

struct Constraint {
  std::vector<Term> terms;
  Relation rel = Relation::LessEqual;
  double rhs = 0.0;
  std::string name;
};

/// minimize  cost . x + offset  subject to rows and bounds.
class LinearProgram {
 public:
  int add_variable(double lower, double upper, double cost = 0.0, std::string name = {});
  int add_binary(double cost = 0.0, std::string name = {});
  int add_constraint(std::vector<Term> terms, Relation rel, double rhs, std::string name = {});

  void set_cost(int var, double cost) { vars_[static_cast<std::size_t>(var)].cost = cost; }
  void set_bounds(int var, double lower, double upper);
  void set_binary(int var, bool binary);
  void set_objective_offset(double offset) { offset_ = offset; }

  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  int num_binaries() const;
  double objective_offset() const { return offset_; }
  const Variable& variable(int j) const { return vars_[static_cast<std::size_t>(j)]; }
  const Constraint& constraint(int i) const { return rows_[static_cast<std::size_t>(i)]; }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }

  /// Throws std::invalid_argument on inverted bounds, non-finite data, a
  /// binary variable with bounds outside [0,1], or a term naming no variable.
  void validate() const;

  double objective_value(std::span<const double> x) const;
  /// Largest violation of any row or bound at x (0 when feasible).
  double max_violation(std::span<const double> x) const;
  /// Same program with binary flags dropped (bounds stay inside [0,1]).
  LinearProgram relaxation() const;

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  double offset_ = 0.0;
};

/// Resumable simplex state: basic variable per row plus nonbasic positions.
/// Indices >= num_variables() denote row slacks.
struct Basis {
  std::vector<int> head;
  std::vector<std::int8_t> state;
};

struct SolveOptions {
  std::int64_t max_pivots = 1'000'000;
  std::int64_t max_nodes = 1'000'000;
  /// Pivots between refactorizations of the basis inverse.
  int refactor_interval = 100;
  /// Branch-and-bound: when every feasible objective is a multiple of this
  /// step (e.g. integral damage values), subtrees whose bound rounds up to
  /// the incumbent are pruned. 0 disables.
  double objective_step = 0.0;
  /// Branch-and-bound: run a diving heuristic at the root and then every
  /// this many nodes. 0 disables.
  std::int64_t dive_interval = 64;
  /// Branch-and-bound: known feasible assignment used as first incumbent.
  std::optional<std::vector<double>> incumbent;
};

struct SolveResult {
  Status status = Status::IterLimit;
  double objective = kInf;
  std::vector<double> x;
  /// Proven lower bound on the optimum (MIP), equals objective on Optimal.
  double bound = -kInf;
  double gap = kInf;
  std::int64_t pivots = 0;
  std::int64_t nodes = 0;
  std::optional<Basis> basis;

  bool optimal() const { return status == Status::Optimal; }
  bool has_solution() const { return status == Status::Optimal || status == Status::NodeLimit; }
};

/// Solves the continuous relaxation (binary flags are ignored, bounds kept).
SolveResult solve_lp(const LinearProgram& lp, const SolveOptions& opts = {});
SolveResult solve_lp(const LinearProgram& lp, const SolveOptions& opts,
                     const Basis* warm_start);

/// Exact optimum over binary assignments by branch-and-bound.
SolveResult solve_mip(const LinearProgram& lp, const SolveOptions& opts = {});

struct BinaryFix {
  int var = 0;
  bool value = false;
};

/// Fixes every binary variable to the given value and searches for any
/// feasible point (phase 1 only). Status Optimal means a feasible point was
/// found; objective reports the program's objective at that point.
/// Throws std::invalid_argument when `fixed` does not cover every binary.
SolveResult check_feasibility(const LinearProgram& lp, std::span<const BinaryFix> fixed,
                              const SolveOptions& opts = {});

/// One-way export in the CPLEX LP text format.
void write_lp_format(std::ostream& out, const LinearProgram& lp);

}  // namespace dca::lp
