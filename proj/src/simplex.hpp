#pragma once

#include <span>
#include <utility>
#include <vector>

#include "dca/lpkit.hpp"

namespace dca::lp::detail {

/// Rows become equalities a.x + s = b with one bounded slack per row:
/// s >= 0 for <=, s <= 0 for >=, s = 0 for =.
struct StandardForm {
  explicit StandardForm(const LinearProgram& lp);

  int rows = 0;
  int structurals = 0;
  int total() const { return rows + structurals; }

  std::vector<std::vector<std::pair<int, double>>> columns;  // structural columns
  std::vector<double> rhs;
  std::vector<double> cost;   // size total(), slacks cost 0
  std::vector<double> lower;  // size total()
  std::vector<double> upper;
  double offset = 0.0;
};

struct SimplexRun {
  Status status = Status::IterLimit;
  std::vector<double> x;  // structural values
  double objective = kInf;
  std::int64_t pivots = 0;
  Basis basis;
};

/// Basis inverse left behind by a run, reusable by the next run that starts
/// from the same basic columns.
struct FactorCache {
  std::vector<int> head;
  std::vector<double> binv;
  int age = 0;  // eta updates since the last refactorization
};

/// Bounded-variable primal simplex. `lower`/`upper` override the bounds of
/// all total() columns. With `phase_one_only` the run stops at the first
/// feasible point.
SimplexRun run_simplex(const StandardForm& sf, std::span<const double> lower,
                       std::span<const double> upper, const Basis* warm,
                       const SolveOptions& opts, bool phase_one_only,
                       FactorCache* cache = nullptr);

}  // namespace dca::lp::detail
