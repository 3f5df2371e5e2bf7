#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <queue>

#include "simplex.hpp"

namespace dca::lp {

namespace {

struct BranchNode {
  std::vector<BinaryFix> fixes;
  double bound = -kInf;
  int depth = 0;
  std::int64_t seq = 0;
  std::shared_ptr<const Basis> basis;
};

// Best bound first; among equal bounds the deeper node, then the newest.
struct WorseNode {
  bool operator()(const BranchNode& a, const BranchNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.seq < b.seq;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const LinearProgram& lp, const SolveOptions& opts)
      : lp_(lp), sf_(lp), opts_(opts) {
    for (int j = 0; j < lp.num_variables(); ++j) {
      if (lp.variable(j).binary) binaries_.push_back(j);
    }
    is_binary_.assign(static_cast<std::size_t>(sf_.structurals), 0);
    for (int j : binaries_) is_binary_[static_cast<std::size_t>(j)] = 1;
    rows_.resize(static_cast<std::size_t>(sf_.rows));
    for (int j = 0; j < sf_.structurals; ++j)
      for (auto [i, a] : sf_.columns[static_cast<std::size_t>(j)])
        rows_[static_cast<std::size_t>(i)].push_back({j, a});
    for (int j = 0; j < sf_.structurals; ++j)
      if (sf_.cost[static_cast<std::size_t>(j)] != 0.0)
        objective_.push_back({j, sf_.cost[static_cast<std::size_t>(j)]});
  }

  SolveResult solve() {
    if (opts_.incumbent) offer_incumbent(*opts_.incumbent);

    std::priority_queue<BranchNode, std::vector<BranchNode>, WorseNode> open;
    open.push(BranchNode{{}, -kInf, 0, seq_++, nullptr});
    bool hit_limit = false;
    bool trouble = false;

    while (!open.empty()) {
      if (nodes_ >= opts_.max_nodes) {
        hit_limit = true;
        break;
      }
      BranchNode node = open.top();
      open.pop();
      if (dominated(node.bound)) continue;

      auto run = solve_node(node.fixes, node.basis.get());
      ++nodes_;
      if (run.status == Status::IterLimit) run = solve_node(node.fixes, nullptr);
      if (run.status == Status::Infeasible) continue;
      if (run.status == Status::Unbounded) {
        SolveResult res;
        res.status = Status::Unbounded;
        res.nodes = nodes_;
        res.pivots = pivots_;
        return res;
      }
      if (run.status != Status::Optimal) {
        trouble = true;
        open.push(std::move(node));
        break;
      }
      if (dominated(run.objective)) continue;

      int branch_var = -1;
      double best_score = kIntTol;
      for (int j : binaries_) {
        const double v = run.x[static_cast<std::size_t>(j)];
        const double score = std::min(v, 1.0 - v);
        if (score > best_score) {
          best_score = score;
          branch_var = j;
        }
      }
      auto basis = std::make_shared<const Basis>(std::move(run.basis));
      if (branch_var < 0) {
        accept_integral(run, node.fixes, basis.get());
        continue;
      }
      if (opts_.dive_interval > 0 && (nodes_ - 1) % opts_.dive_interval == 0)
        dive(node.fixes, run.x, basis.get());
      const bool up_first = run.x[static_cast<std::size_t>(branch_var)] >= 0.5;
      for (bool value : {!up_first, up_first}) {
        BranchNode child{node.fixes, run.objective, node.depth + 1, seq_++, basis};
        child.fixes.push_back({branch_var, value});
        open.push(std::move(child));
      }
    }

    SolveResult res;
    res.nodes = nodes_;
    res.pivots = pivots_;
    if (!hit_limit && !trouble) {
      if (std::isfinite(incumbent_value_)) {
        res.status = Status::Optimal;
        res.objective = incumbent_value_;
        res.x = incumbent_x_;
        res.bound = incumbent_value_;
        res.gap = 0.0;
      } else {
        res.status = Status::Infeasible;
      }
      return res;
    }
    double bound = incumbent_value_;
    for (; !open.empty(); open.pop()) bound = std::min(bound, open.top().bound);
    res.bound = bound;
    if (std::isfinite(incumbent_value_)) {
      res.status = Status::NodeLimit;
      res.objective = incumbent_value_;
      res.x = incumbent_x_;
      res.gap = incumbent_value_ - bound;
    } else {
      res.status = Status::IterLimit;
    }
    return res;
  }

 private:
  bool dominated(double bound) const {
    if (!std::isfinite(incumbent_value_)) return false;
    const double tol = 1e-7 * std::max(1.0, std::abs(incumbent_value_));
    if (opts_.objective_step > 0.0) {
      const double step = opts_.objective_step;
      const double rounded = std::ceil((bound - 1e-6 * step) / step) * step;
      if (rounded >= incumbent_value_ - tol) return true;
    }
    return bound >= incumbent_value_ - tol;
  }

  // Largest objective an improving solution may have.
  double cutoff() const {
    if (!std::isfinite(incumbent_value_)) return kInf;
    const double tol = 1e-7 * std::max(1.0, std::abs(incumbent_value_));
    if (opts_.objective_step > 0.0) return incumbent_value_ - opts_.objective_step + tol;
    return incumbent_value_ + tol;
  }

  // Activity-based bound propagation with the objective cutoff as an extra
  // row. Continuous bounds are tightened only in a private copy that feeds
  // later rows; binary fixings are exported to `lower`/`upper`. Returns false
  // when some row cannot be satisfied.
  bool propagate(std::vector<double>& lower, std::vector<double>& upper) const {
    const double cut = cutoff();
    std::vector<double> lo(lower.begin(), lower.begin() + sf_.structurals);
    std::vector<double> hi(upper.begin(), upper.begin() + sf_.structurals);
    const int last = std::isfinite(cut) ? sf_.rows : sf_.rows - 1;
    for (int round = 0; round < 8; ++round) {
      bool changed = false;
      for (int i = 0, redo = 0; i <= last; redo = 0, ++i) {
      row_again:
        const bool obj = i == sf_.rows;
        const auto& row = obj ? objective_ : rows_[static_cast<std::size_t>(i)];
        double row_lo = -kInf, row_hi = cut - sf_.offset;
        if (!obj) {
          const auto sl = static_cast<std::size_t>(sf_.structurals + i);
          const double b = sf_.rhs[static_cast<std::size_t>(i)];
          row_lo = b - sf_.upper[sl];
          row_hi = b - sf_.lower[sl];
        }
        double min_act = 0.0, max_act = 0.0;
        int min_inf = 0, max_inf = 0;
        for (auto [j, a] : row) {
          const auto jj = static_cast<std::size_t>(j);
          const double t_lo = a > 0 ? a * lo[jj] : a * hi[jj];
          const double t_hi = a > 0 ? a * hi[jj] : a * lo[jj];
          if (std::isfinite(t_lo)) min_act += t_lo; else ++min_inf;
          if (std::isfinite(t_hi)) max_act += t_hi; else ++max_inf;
        }
        const double tol_hi = 1e-7 * std::max(1.0, std::abs(row_hi));
        const double tol_lo = 1e-7 * std::max(1.0, std::abs(row_lo));
        if (min_inf == 0 && std::isfinite(row_hi) && min_act > row_hi + tol_hi) return false;
        if (max_inf == 0 && std::isfinite(row_lo) && max_act < row_lo - tol_lo) return false;

        for (auto [j, a] : row) {
          const auto jj = static_cast<std::size_t>(j);
          if (lo[jj] == hi[jj]) continue;
          const double t_lo = a > 0 ? a * lo[jj] : a * hi[jj];
          const double t_hi = a > 0 ? a * hi[jj] : a * lo[jj];
          // Bounds on a*x_j implied by the rest of the row.
          double term_max = kInf, term_min = -kInf;
          if (std::isfinite(row_hi)) {
            if (min_inf == 0) term_max = row_hi - (min_act - t_lo);
            else if (min_inf == 1 && !std::isfinite(t_lo)) term_max = row_hi - min_act;
          }
          if (std::isfinite(row_lo)) {
            if (max_inf == 0) term_min = row_lo - (max_act - t_hi);
            else if (max_inf == 1 && !std::isfinite(t_hi)) term_min = row_lo - max_act;
          }
          double new_lo = lo[jj], new_hi = hi[jj];
          if (a > 0) {
            if (std::isfinite(term_max)) new_hi = std::min(new_hi, (term_max + tol_hi) / a);
            if (std::isfinite(term_min)) new_lo = std::max(new_lo, (term_min - tol_lo) / a);
          } else {
            if (std::isfinite(term_max)) new_lo = std::max(new_lo, (term_max + tol_hi) / a);
            if (std::isfinite(term_min)) new_hi = std::min(new_hi, (term_min - tol_lo) / a);
          }
          if (is_binary_[jj]) {
            new_lo = new_lo > kIntTol ? 1.0 : 0.0;
            new_hi = new_hi < 1.0 - kIntTol ? 0.0 : 1.0;
          }
          if (new_lo > new_hi + 1e-9) return false;
          const double scale = 1e-6 * std::max(1.0, std::abs(new_hi) + std::abs(new_lo));
          if (new_lo > lo[jj] + scale || new_hi < hi[jj] - scale ||
              (is_binary_[jj] && (new_lo != lo[jj] || new_hi != hi[jj]))) {
            lo[jj] = std::max(lo[jj], std::min(new_lo, new_hi));
            hi[jj] = std::min(hi[jj], std::max(new_hi, lo[jj]));
            changed = true;
            // Activities are stale; rescan the row a bounded number of times.
            if (++redo <= static_cast<int>(row.size())) goto row_again;
            break;
          }
        }
      }
      if (!changed) break;
    }
    for (int j : binaries_) {
      const auto jj = static_cast<std::size_t>(j);
      lower[jj] = lo[jj];
      upper[jj] = hi[jj];
    }
    return true;
  }

  detail::SimplexRun solve_node(const std::vector<BinaryFix>& fixes, const Basis* warm) {
    std::vector<double> lower = sf_.lower;
    std::vector<double> upper = sf_.upper;
    for (const auto& f : fixes) {
      const double v = f.value ? 1.0 : 0.0;
      lower[static_cast<std::size_t>(f.var)] = v;
      upper[static_cast<std::size_t>(f.var)] = v;
    }
    if (!propagate(lower, upper)) {
      detail::SimplexRun none;
      none.status = Status::Infeasible;
      return none;
    }
    auto run = detail::run_simplex(sf_, lower, upper, warm, opts_, false, &factor_);
    pivots_ += run.pivots;
    return run;
  }

  // Re-solves with every binary pinned to its rounded value so the
  // continuous part is exactly consistent with the integral choice.
  void accept_integral(const detail::SimplexRun& run, const std::vector<BinaryFix>& fixes,
                       const Basis* basis) {
    std::vector<BinaryFix> pinned = fixes;
    for (int j : binaries_) pinned.push_back({j, run.x[static_cast<std::size_t>(j)] >= 0.5});
    auto polished = solve_node(pinned, basis);
    if (polished.status == Status::Optimal && polished.objective < incumbent_value_) {
      incumbent_value_ = polished.objective;
      incumbent_x_ = std::move(polished.x);
    } else if (polished.status != Status::Optimal && run.objective < incumbent_value_) {
      incumbent_value_ = run.objective;
      incumbent_x_ = run.x;
    }
  }

  // Primal heuristic: pins every binary that is already integral, then
  // rounds the least fractional one (trying the other value if that fails)
  // and resolves, until the relaxation is integral or both values fail.
  void dive(std::vector<BinaryFix> fixes, std::vector<double> x, const Basis* warm) {
    std::vector<char> fixed(static_cast<std::size_t>(sf_.structurals), 0);
    for (const auto& f : fixes) fixed[static_cast<std::size_t>(f.var)] = 1;
    std::optional<Basis> basis;
    if (warm) basis = *warm;
    while (true) {
      int pick = -1;
      double pick_score = kInf;
      for (int j : binaries_) {
        const auto jj = static_cast<std::size_t>(j);
        if (fixed[jj]) continue;
        const double score = std::min(x[jj], 1.0 - x[jj]);
        if (score <= kIntTol) {
          fixes.push_back({j, x[jj] >= 0.5});
          fixed[jj] = 1;
        } else if (score < pick_score) {
          pick_score = score;
          pick = j;
        }
      }
      const auto pj = static_cast<std::size_t>(pick);
      bool moved = false;
      for (int attempt = 0; attempt < (pick < 0 ? 1 : 2) && !moved; ++attempt) {
        auto trial = fixes;
        if (pick >= 0) trial.push_back({pick, (x[pj] >= 0.5) != (attempt == 1)});
        auto run = solve_node(trial, basis ? &*basis : nullptr);
        if (run.status != Status::Optimal || dominated(run.objective)) continue;
        fixes = std::move(trial);
        x = std::move(run.x);
        basis = std::move(run.basis);
        moved = true;
      }
      if (!moved) return;
      if (pick < 0) break;
      fixed[pj] = 1;
    }
    detail::SimplexRun last;
    last.status = Status::Optimal;
    last.objective = lp_.objective_value(x);
    last.x = std::move(x);
    accept_integral(last, fixes, basis ? &*basis : nullptr);
  }

  void offer_incumbent(const std::vector<double>& x) {
    if (x.size() != static_cast<std::size_t>(lp_.num_variables())) return;
    for (int j : binaries_) {
      const double v = x[static_cast<std::size_t>(j)];
      if (v != 0.0 && v != 1.0) return;
    }
    if (lp_.max_violation(x) > 1e-9) return;
    incumbent_value_ = lp_.objective_value(x);
    incumbent_x_ = x;
  }

  const LinearProgram& lp_;
  detail::StandardForm sf_;
  const SolveOptions& opts_;
  std::vector<int> binaries_;
  std::vector<char> is_binary_;
  detail::FactorCache factor_;
  std::vector<std::vector<std::pair<int, double>>> rows_;
  std::vector<std::pair<int, double>> objective_;

  double incumbent_value_ = kInf;
  std::vector<double> incumbent_x_;
  std::int64_t nodes_ = 0;
  std::int64_t pivots_ = 0;
  std::int64_t seq_ = 0;
};

}  // namespace

SolveResult solve_mip(const LinearProgram& lp, const SolveOptions& opts) {
  if (lp.num_binaries() == 0) return solve_lp(lp, opts);
  return BranchAndBound(lp, opts).solve();
}

}  // namespace dca::lp
