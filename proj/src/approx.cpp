#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include "dca/planner.hpp"

namespace dca {

void PlannerConfig::validate() const {
  if (epsilons.empty()) throw std::invalid_argument("epsilon grid is empty");
  for (double e : epsilons) {
    if (!(e > 0.0 && e < 1.0))
      throw std::invalid_argument("epsilon must lie in (0,1), got " + format_real(e));
  }
  if (tau_points < 1) throw std::invalid_argument("tau grid needs at least one point");
}

namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("epsilon must lie in (0,1), got " + format_real(epsilon));
}

struct Relaxed {
  DefenseModel model;
  std::vector<double> x;
};

// LP(eps R) with its optimal point.
Relaxed solve_scaled_lp(const Instance& inst, double epsilon, const lp::SolveOptions& opts) {
  Relaxed out{build_defense_milp(inst, epsilon * inst.budget(), PruneOptions{false, 0.0, true}),
              {}};
  const auto sol = lp::solve_lp(out.model.lp, opts);
  if (!sol.optimal())
    throw std::runtime_error(std::string("LP(eps R): ") + lp::to_string(sol.status));
  out.x = sol.x;
  return out;
}

PlanResult finish(const Instance& inst, DefendingStrategy s, double epsilon, double tau) {
  PlanResult res;
  res.result = evaluate(inst, s).defending_result;
  res.strategy = std::move(s);
  res.epsilon = epsilon;
  res.tau = tau;
  return res;
}

// Scaling r and t of LP(eps R) by 1/eps; every x >= eps becomes a defended
// node at full budget.
PlanResult round_at_epsilon(const Instance& inst, const Relaxed& relaxed, double epsilon) {
  auto s = extract_strategy(inst, relaxed.model, relaxed.x, 1.0 / epsilon);
  return finish(inst, std::move(s), epsilon, epsilon);
}

}  // namespace

PlanResult ba_epsilon(const Instance& inst, double epsilon, const lp::SolveOptions& opts) {
  check_epsilon(epsilon);
  return round_at_epsilon(inst, solve_scaled_lp(inst, epsilon, opts), epsilon);
}

PlanResult ba_epsilon_tau(const Instance& inst, double epsilon, int tau_points,
                          const lp::SolveOptions& opts) {
  check_epsilon(epsilon);
  if (tau_points < 1) throw std::invalid_argument("tau grid needs at least one point");
  const auto relaxed = solve_scaled_lp(inst, epsilon, opts);
  PlanResult best = round_at_epsilon(inst, relaxed, epsilon);

  // The full-budget program has the same index sets as LP(eps R).
  const auto full = build_defense_milp(inst, inst.budget(), PruneOptions{false, 0.0, true});
  std::set<std::vector<bool>> tried;
  for (int i = 1; i <= tau_points; ++i) {
    const double tau = epsilon * i / tau_points;
    std::vector<lp::BinaryFix> fixes;
    std::vector<bool> pattern;
    for (const auto& sc : relaxed.model.scenarios) {
      for (int var : sc.x_var) {
        const bool one = relaxed.x[static_cast<std::size_t>(var)] >= tau - 1e-9;
        fixes.push_back({var, one});
        pattern.push_back(one);
      }
    }
    if (!tried.insert(pattern).second) continue;
    const auto sol = lp::check_feasibility(full.lp, fixes, opts);
    if (!sol.optimal()) continue;
    auto cand = finish(inst, extract_strategy(inst, full, sol.x), epsilon, tau);
    if (cand.result < best.result - 1e-12) best = std::move(cand);
  }
  return best;
}

PlanResult ba_grid(const Instance& inst, bool with_tau, const PlannerConfig& cfg) {
  cfg.validate();
  PlanResult best;
  bool have = false;
  for (double e : cfg.epsilons) {
    auto r = with_tau ? ba_epsilon_tau(inst, e, cfg.tau_points, cfg.solver)
                      : ba_epsilon(inst, e, cfg.solver);
    if (!have || r.result < best.result - 1e-12) {
      best = std::move(r);
      have = true;
    }
  }
  return best;
}

}  // namespace dca
