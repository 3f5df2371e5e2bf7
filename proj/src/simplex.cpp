#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dca::lp {
namespace detail {

StandardForm::StandardForm(const LinearProgram& lp) {
  lp.validate();
  rows = lp.num_constraints();
  structurals = lp.num_variables();
  columns.assign(static_cast<std::size_t>(structurals), {});
  rhs.resize(static_cast<std::size_t>(rows));
  cost.assign(static_cast<std::size_t>(total()), 0.0);
  lower.resize(static_cast<std::size_t>(total()));
  upper.resize(static_cast<std::size_t>(total()));
  offset = lp.objective_offset();

  for (int j = 0; j < structurals; ++j) {
    const auto& v = lp.variable(j);
    cost[static_cast<std::size_t>(j)] = v.cost;
    lower[static_cast<std::size_t>(j)] = v.lower;
    upper[static_cast<std::size_t>(j)] = v.upper;
  }
  std::vector<double> acc(static_cast<std::size_t>(structurals), 0.0);
  std::vector<int> seen_in(static_cast<std::size_t>(structurals), -1);
  std::vector<int> touched;
  for (int i = 0; i < rows; ++i) {
    const auto& row = lp.constraint(i);
    // Merge repeated terms for the same variable.
    touched.clear();
    for (const auto& t : row.terms) {
      const auto j = static_cast<std::size_t>(t.var);
      if (seen_in[j] != i) {
        seen_in[j] = i;
        acc[j] = 0.0;
        touched.push_back(t.var);
      }
      acc[j] += t.coef;
    }
    for (int j : touched) {
      const double a = acc[static_cast<std::size_t>(j)];
      if (a != 0.0) columns[static_cast<std::size_t>(j)].emplace_back(i, a);
    }
    rhs[static_cast<std::size_t>(i)] = row.rhs;
    const auto s = static_cast<std::size_t>(structurals + i);
    switch (row.rel) {
      case Relation::LessEqual: lower[s] = 0.0; upper[s] = kInf; break;
      case Relation::GreaterEqual: lower[s] = -kInf; upper[s] = 0.0; break;
      case Relation::Equal: lower[s] = 0.0; upper[s] = 0.0; break;
    }
  }
}

namespace {

enum : std::int8_t { kAtLower = 0, kAtUpper = 1, kAtZero = 2, kBasic = 3 };

constexpr double kPivotTol = 1e-9;
constexpr double kOptTol = 1e-9;
constexpr double kPrimalTol = 1e-9;
constexpr double kLooseTol = 1e-7;
// Harris passes may overshoot a bound by this fraction of the primal
// tolerance, so a recomputed basis never reads as infeasible.
constexpr double kHarrisShare = 0.1;

class Simplex {
 public:
  Simplex(const StandardForm& sf, std::span<const double> lower,
          std::span<const double> upper, const SolveOptions& opts)
      : sf_(sf),
        m_(sf.rows),
        n_(sf.total()),
        lo_(lower.begin(), lower.end()),
        hi_(upper.begin(), upper.end()),
        opts_(opts),
        binv_(static_cast<std::size_t>(m_) * static_cast<std::size_t>(m_), 0.0),
        head_(static_cast<std::size_t>(m_)),
        state_(static_cast<std::size_t>(n_)),
        x_(static_cast<std::size_t>(n_), 0.0),
        alpha_(static_cast<std::size_t>(m_)),
        y_(static_cast<std::size_t>(m_)),
        cb_(static_cast<std::size_t>(m_)) {}

  SimplexRun run(const Basis* warm, bool phase_one_only, FactorCache* cache) {
    SimplexRun out;
    for (int j = 0; j < n_; ++j) {
      if (lo_[static_cast<std::size_t>(j)] > hi_[static_cast<std::size_t>(j)]) {
        out.status = Status::Infeasible;
        return out;
      }
    }
    install_basis(warm);
    if (cache != nullptr && cache->head == head_ && cache->binv.size() == binv_.size()) {
      binv_.swap(cache->binv);
      since_refactor_ = cache->age;
    } else {
      refactor();
    }
    compute_basics();

    Status status = iterate(phase_one_only);
    if (cache != nullptr) {
      cache->head = head_;
      cache->binv.swap(binv_);
      cache->age = since_refactor_;
    }
    out.status = status;
    out.pivots = pivots_;
    out.basis = Basis{head_, state_};
    if (status == Status::Optimal) {
      out.x.assign(x_.begin(), x_.begin() + sf_.structurals);
      out.objective = sf_.offset;
      for (int j = 0; j < sf_.structurals; ++j)
        out.objective += sf_.cost[static_cast<std::size_t>(j)] * x_[static_cast<std::size_t>(j)];
    }
    return out;
  }

 private:
  double& binv(int r, int c) {
    return binv_[static_cast<std::size_t>(r) * static_cast<std::size_t>(m_) + static_cast<std::size_t>(c)];
  }

  bool is_slack(int j) const { return j >= sf_.structurals; }

  void place_nonbasic(int j) {
    const auto i = static_cast<std::size_t>(j);
    if (std::isfinite(lo_[i])) {
      state_[i] = kAtLower;
      x_[i] = lo_[i];
    } else if (std::isfinite(hi_[i])) {
      state_[i] = kAtUpper;
      x_[i] = hi_[i];
    } else {
      state_[i] = kAtZero;
      x_[i] = 0.0;
    }
  }

  // Puts a nonbasic column at the bound named by its state, repairing
  // states that point at an infinite bound.
  void settle_nonbasic(int j) {
    const auto i = static_cast<std::size_t>(j);
    if (state_[i] == kAtUpper && std::isfinite(hi_[i])) {
      x_[i] = hi_[i];
    } else if (state_[i] == kAtLower && std::isfinite(lo_[i])) {
      x_[i] = lo_[i];
    } else {
      place_nonbasic(j);
    }
  }

  void install_basis(const Basis* warm) {
    bool ok = warm != nullptr && warm->head.size() == static_cast<std::size_t>(m_) &&
              warm->state.size() == static_cast<std::size_t>(n_);
    if (ok) {
      std::vector<char> used(static_cast<std::size_t>(n_), 0);
      for (int j : warm->head) {
        if (j < 0 || j >= n_ || used[static_cast<std::size_t>(j)]) {
          ok = false;
          break;
        }
        used[static_cast<std::size_t>(j)] = 1;
      }
    }
    if (!ok) {
      for (int j = 0; j < n_; ++j) place_nonbasic(j);
      for (int i = 0; i < m_; ++i) {
        head_[static_cast<std::size_t>(i)] = sf_.structurals + i;
        state_[static_cast<std::size_t>(sf_.structurals + i)] = kBasic;
      }
      return;
    }
    state_ = warm->state;
    head_ = warm->head;
    for (int j = 0; j < n_; ++j) {
      if (state_[static_cast<std::size_t>(j)] == kBasic) state_[static_cast<std::size_t>(j)] = kAtLower;
    }
    for (int j : head_) state_[static_cast<std::size_t>(j)] = kBasic;
    for (int j = 0; j < n_; ++j) {
      if (state_[static_cast<std::size_t>(j)] != kBasic) settle_nonbasic(j);
    }
  }

  // alpha = B^-1 a_j
  void ftran(int j) {
    if (is_slack(j)) {
      const int c = j - sf_.structurals;
      for (int r = 0; r < m_; ++r) alpha_[static_cast<std::size_t>(r)] = binv(r, c);
      return;
    }
    std::fill(alpha_.begin(), alpha_.end(), 0.0);
    for (const auto& [i, a] : sf_.columns[static_cast<std::size_t>(j)]) {
      for (int r = 0; r < m_; ++r) alpha_[static_cast<std::size_t>(r)] += binv(r, i) * a;
    }
  }

  double dot_y(int j) const {
    if (is_slack(j)) return y_[static_cast<std::size_t>(j - sf_.structurals)];
    double s = 0.0;
    for (const auto& [i, a] : sf_.columns[static_cast<std::size_t>(j)]) s += y_[static_cast<std::size_t>(i)] * a;
    return s;
  }

  void eta_update(int r) {
    const double piv = alpha_[static_cast<std::size_t>(r)];
    double* row_r = &binv(r, 0);
    // The pivot row of B^-1 is usually sparse; touch only its nonzeros.
    nz_.clear();
    for (int c = 0; c < m_; ++c) {
      if (row_r[c] == 0.0) continue;
      row_r[c] /= piv;
      nz_.push_back(c);
    }
    for (int k = 0; k < m_; ++k) {
      if (k == r) continue;
      const double f = alpha_[static_cast<std::size_t>(k)];
      if (f == 0.0) continue;
      double* row_k = &binv(k, 0);
      for (int c : nz_) row_k[c] -= f * row_r[c];
    }
  }

  // Rebuilds B^-1 from scratch by pivoting the wanted columns into an
  // identity basis. Columns that turn out dependent are left nonbasic and
  // their rows keep the slack.
  void refactor() {
    std::fill(binv_.begin(), binv_.end(), 0.0);
    for (int i = 0; i < m_; ++i) binv(i, i) = 1.0;
    const std::vector<int> wanted = head_;
    std::vector<char> locked(static_cast<std::size_t>(m_), 0);
    for (int i = 0; i < m_; ++i) head_[static_cast<std::size_t>(i)] = sf_.structurals + i;
    for (int j : wanted) {
      if (is_slack(j)) locked[static_cast<std::size_t>(j - sf_.structurals)] = 1;
    }
    std::vector<int> dropped;
    for (int j : wanted) {
      if (is_slack(j)) continue;
      ftran(j);
      int best = -1;
      double best_abs = kPivotTol;
      for (int r = 0; r < m_; ++r) {
        if (locked[static_cast<std::size_t>(r)]) continue;
        const double a = std::abs(alpha_[static_cast<std::size_t>(r)]);
        if (a > best_abs) {
          best_abs = a;
          best = r;
        }
      }
      if (best < 0) {
        dropped.push_back(j);
        continue;
      }
      eta_update(best);
      head_[static_cast<std::size_t>(best)] = j;
      locked[static_cast<std::size_t>(best)] = 1;
    }
    // Anything not in head is nonbasic.
    std::vector<char> in_head(static_cast<std::size_t>(n_), 0);
    for (int j : head_) in_head[static_cast<std::size_t>(j)] = 1;
    for (int j = 0; j < n_; ++j) {
      auto& st = state_[static_cast<std::size_t>(j)];
      if (in_head[static_cast<std::size_t>(j)]) {
        st = kBasic;
      } else if (st == kBasic) {
        // Nearest finite bound to the current value.
        const auto i = static_cast<std::size_t>(j);
        const bool lo_ok = std::isfinite(lo_[i]);
        const bool hi_ok = std::isfinite(hi_[i]);
        if (lo_ok && (!hi_ok || std::abs(x_[i] - lo_[i]) <= std::abs(x_[i] - hi_[i]))) {
          st = kAtLower;
          x_[i] = lo_[i];
        } else if (hi_ok) {
          st = kAtUpper;
          x_[i] = hi_[i];
        } else {
          st = kAtZero;
          x_[i] = 0.0;
        }
      }
    }
    since_refactor_ = 0;
  }

  void compute_basics() {
    std::vector<double> rhs(sf_.rhs);
    for (int j = 0; j < n_; ++j) {
      if (state_[static_cast<std::size_t>(j)] == kBasic) continue;
      const double xj = x_[static_cast<std::size_t>(j)];
      if (xj == 0.0) continue;
      if (is_slack(j)) {
        rhs[static_cast<std::size_t>(j - sf_.structurals)] -= xj;
      } else {
        for (const auto& [i, a] : sf_.columns[static_cast<std::size_t>(j)]) rhs[static_cast<std::size_t>(i)] -= a * xj;
      }
    }
    for (int r = 0; r < m_; ++r) {
      double s = 0.0;
      const double* row = &binv(r, 0);
      for (int c = 0; c < m_; ++c) s += row[c] * rhs[static_cast<std::size_t>(c)];
      x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(r)])] = s;
    }
  }

  // Phase-1 cost of each basic variable; returns total infeasibility.
  double infeasibility_costs() {
    double total = 0.0;
    for (int r = 0; r < m_; ++r) {
      const auto j = static_cast<std::size_t>(head_[static_cast<std::size_t>(r)]);
      double c = 0.0;
      if (x_[j] < lo_[j] - ftol_) {
        c = -1.0;
        total += lo_[j] - x_[j];
      } else if (x_[j] > hi_[j] + ftol_) {
        c = 1.0;
        total += x_[j] - hi_[j];
      }
      cb_[static_cast<std::size_t>(r)] = c;
    }
    return total;
  }

  void compute_duals() {
    std::fill(y_.begin(), y_.end(), 0.0);
    for (int r = 0; r < m_; ++r) {
      const double c = cb_[static_cast<std::size_t>(r)];
      if (c == 0.0) continue;
      const double* row = &binv(r, 0);
      for (int i = 0; i < m_; ++i) y_[static_cast<std::size_t>(i)] += c * row[i];
    }
  }

  struct Entering {
    int col = -1;
    int dir = 0;
  };

  Entering price(bool phase_one) const {
    Entering best;
    double best_score = 0.0;
    for (int j = 0; j < n_; ++j) {
      const auto i = static_cast<std::size_t>(j);
      const auto st = state_[i];
      if (st == kBasic) continue;
      if (lo_[i] == hi_[i]) continue;
      const double cj = phase_one ? 0.0 : sf_.cost[i];
      const double d = cj - dot_y(j);
      int dir = 0;
      if (st == kAtLower && d < -kOptTol) dir = 1;
      else if (st == kAtUpper && d > kOptTol) dir = -1;
      else if (st == kAtZero && std::abs(d) > kOptTol) dir = d < 0 ? 1 : -1;
      if (dir == 0) continue;
      if (bland_) return {j, dir};
      if (std::abs(d) > best_score) {
        best_score = std::abs(d);
        best = {j, dir};
      }
    }
    return best;
  }

  // Returns false when the step is unbounded.
  bool ratio_and_update(const Entering& e) {
    const auto q = static_cast<std::size_t>(e.col);
    const double dir = e.dir;
    const double flip = (std::isfinite(lo_[q]) && std::isfinite(hi_[q])) ? hi_[q] - lo_[q] : kInf;

    auto target_of = [&](int r, double rate, double& bound) -> bool {
      const auto j = static_cast<std::size_t>(head_[static_cast<std::size_t>(r)]);
      // An infeasible variable blocks where it becomes feasible; one moving
      // further away from its violated bound never blocks.
      if (rate > 0) {
        if (x_[j] > hi_[j] + ftol_) return false;
        bound = (x_[j] < lo_[j] - ftol_) ? lo_[j] : hi_[j];
        return std::isfinite(bound);
      }
      if (x_[j] < lo_[j] - ftol_) return false;
      bound = (x_[j] > hi_[j] + ftol_) ? hi_[j] : lo_[j];
      return std::isfinite(bound);
    };

    int leave = -1;
    double step = kInf;
    double leave_bound = 0.0;
    if (!bland_) {
      double relaxed = kInf;
      for (int r = 0; r < m_; ++r) {
        const double a = alpha_[static_cast<std::size_t>(r)];
        if (std::abs(a) < kPivotTol) continue;
        const double rate = -dir * a;
        double bound;
        if (!target_of(r, rate, bound)) continue;
        const double xr = x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(r)])];
        const double slack = kHarrisShare * ftol_;
        const double lim = rate > 0 ? (bound + slack - xr) / rate : (bound - slack - xr) / rate;
        relaxed = std::min(relaxed, lim);
      }
      if (relaxed < kInf) {
        double best_abs = 0.0;
        for (int r = 0; r < m_; ++r) {
          const double a = alpha_[static_cast<std::size_t>(r)];
          if (std::abs(a) < kPivotTol) continue;
          const double rate = -dir * a;
          double bound;
          if (!target_of(r, rate, bound)) continue;
          const double xr = x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(r)])];
          const double exact = (bound - xr) / rate;
          if (exact <= relaxed && std::abs(a) > best_abs) {
            best_abs = std::abs(a);
            leave = r;
            step = std::max(exact, 0.0);
            leave_bound = bound;
          }
        }
      }
    } else {
      for (int r = 0; r < m_; ++r) {
        const double a = alpha_[static_cast<std::size_t>(r)];
        if (std::abs(a) < kPivotTol) continue;
        const double rate = -dir * a;
        double bound;
        if (!target_of(r, rate, bound)) continue;
        const double xr = x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(r)])];
        const double exact = std::max((bound - xr) / rate, 0.0);
        const bool better =
            leave < 0 || exact < step - 1e-12 ||
            (exact <= step + 1e-12 && head_[static_cast<std::size_t>(r)] < head_[static_cast<std::size_t>(leave)]);
        if (better) {
          leave = r;
          step = exact;
          leave_bound = bound;
        }
      }
    }

    if (leave < 0 && !std::isfinite(flip)) return false;

    const bool do_flip = leave < 0 || flip <= step;
    const double theta = do_flip ? flip : step;

    if (theta <= 1e-12) {
      ++degenerate_;
      if (degenerate_ > 10 * static_cast<std::int64_t>(m_ + n_)) bland_ = true;
    } else {
      degenerate_ = 0;
      bland_ = false;
    }

    if (theta != 0.0) {
      for (int r = 0; r < m_; ++r) {
        const double a = alpha_[static_cast<std::size_t>(r)];
        if (a == 0.0) continue;
        x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(r)])] -= dir * theta * a;
      }
    }
    if (do_flip) {
      if (e.dir > 0) {
        state_[q] = kAtUpper;
        x_[q] = hi_[q];
      } else {
        state_[q] = kAtLower;
        x_[q] = lo_[q];
      }
      return true;
    }

    x_[q] += dir * theta;
    const auto out = static_cast<std::size_t>(head_[static_cast<std::size_t>(leave)]);
    x_[out] = leave_bound;
    state_[out] = (leave_bound == lo_[out]) ? kAtLower : kAtUpper;
    eta_update(leave);
    head_[static_cast<std::size_t>(leave)] = e.col;
    state_[q] = kBasic;
    ++since_refactor_;
    return true;
  }

  // Residuals of B x_B = b - N x_N and, with `duals`, of y B = c_B. Small
  // residuals make a refactorization before accepting the answer pointless.
  bool accurate(bool duals) const {
    std::vector<double> res(sf_.rhs);
    double scale = 1.0;
    for (int i = 0; i < m_; ++i) {
      scale = std::max(scale, std::abs(sf_.rhs[static_cast<std::size_t>(i)]));
      res[static_cast<std::size_t>(i)] -= x_[static_cast<std::size_t>(sf_.structurals + i)];
    }
    for (int j = 0; j < sf_.structurals; ++j) {
      const double xj = x_[static_cast<std::size_t>(j)];
      if (xj == 0.0) continue;
      for (const auto& [i, a] : sf_.columns[static_cast<std::size_t>(j)])
        res[static_cast<std::size_t>(i)] -= a * xj;
    }
    for (double r : res)
      if (std::abs(r) > 1e-9 * scale) return false;
    if (!duals) return true;
    for (int r = 0; r < m_; ++r) {
      const int j = head_[static_cast<std::size_t>(r)];
      const double c = cb_[static_cast<std::size_t>(r)];
      if (std::abs(dot_y(j) - c) > 1e-9 * std::max(1.0, std::abs(c))) return false;
    }
    return true;
  }

  Status iterate(bool phase_one_only) {
    int final_checks = 0;
    for (;;) {
      if (since_refactor_ >= opts_.refactor_interval) {
        refactor();
        compute_basics();
      }
      const double infeasibility = infeasibility_costs();
      const bool phase_one = infeasibility > 0.0;
      if (!phase_one && phase_one_only) {
        if (final_checks++ < 2 && since_refactor_ > 0 && !accurate(false)) {
          refactor();
          compute_basics();
          continue;
        }
        return Status::Optimal;
      }
      if (!phase_one) {
        for (int r = 0; r < m_; ++r)
          cb_[static_cast<std::size_t>(r)] = sf_.cost[static_cast<std::size_t>(head_[static_cast<std::size_t>(r)])];
      }
      compute_duals();
      const Entering e = price(phase_one);
      if (e.col < 0) {
        if (final_checks++ < 2 && since_refactor_ > 0 && !accurate(!phase_one)) {
          refactor();
          compute_basics();
          continue;
        }
        if (!phase_one) return Status::Optimal;
        if (infeasibility <= kLooseTol && ftol_ < kLooseTol) {
          ftol_ = kLooseTol;
          continue;
        }
        return Status::Infeasible;
      }
      if (pivots_ >= opts_.max_pivots) return Status::IterLimit;
      ftran(e.col);
      if (!ratio_and_update(e)) {
        if (phase_one) return Status::IterLimit;
        return Status::Unbounded;
      }
      ++pivots_;
    }
  }

  const StandardForm& sf_;
  int m_;
  int n_;
  std::vector<double> lo_;
  std::vector<double> hi_;
  const SolveOptions& opts_;

  std::vector<double> binv_;
  std::vector<int> nz_;
  std::vector<int> head_;
  std::vector<std::int8_t> state_;
  std::vector<double> x_;
  std::vector<double> alpha_;
  std::vector<double> y_;
  std::vector<double> cb_;

  double ftol_ = kPrimalTol;
  std::int64_t pivots_ = 0;
  int since_refactor_ = 0;
  std::int64_t degenerate_ = 0;
  bool bland_ = false;
};

}  // namespace

SimplexRun run_simplex(const StandardForm& sf, std::span<const double> lower,
                       std::span<const double> upper, const Basis* warm,
                       const SolveOptions& opts, bool phase_one_only,
                       FactorCache* cache) {
  Simplex s(sf, lower, upper, opts);
  return s.run(warm, phase_one_only, cache);
}

}  // namespace detail

SolveResult solve_lp(const LinearProgram& lp, const SolveOptions& opts, const Basis* warm_start) {
  const detail::StandardForm sf(lp);
  auto run = detail::run_simplex(sf, sf.lower, sf.upper, warm_start, opts, false);
  SolveResult res;
  res.status = run.status;
  res.pivots = run.pivots;
  if (run.status == Status::Optimal) {
    res.x = std::move(run.x);
    res.objective = run.objective;
    res.bound = run.objective;
    res.gap = 0.0;
  }
  res.basis = std::move(run.basis);
  return res;
}

SolveResult solve_lp(const LinearProgram& lp, const SolveOptions& opts) {
  return solve_lp(lp, opts, nullptr);
}

SolveResult check_feasibility(const LinearProgram& lp, std::span<const BinaryFix> fixed,
                              const SolveOptions& opts) {
  const detail::StandardForm sf(lp);
  std::vector<double> lower = sf.lower;
  std::vector<double> upper = sf.upper;
  std::vector<char> covered(static_cast<std::size_t>(lp.num_variables()), 0);
  for (const auto& f : fixed) {
    if (f.var < 0 || f.var >= lp.num_variables() || !lp.variable(f.var).binary)
      throw std::invalid_argument("check_feasibility: fix refers to a non-binary variable");
    const double v = f.value ? 1.0 : 0.0;
    lower[static_cast<std::size_t>(f.var)] = v;
    upper[static_cast<std::size_t>(f.var)] = v;
    covered[static_cast<std::size_t>(f.var)] = 1;
  }
  for (int j = 0; j < lp.num_variables(); ++j) {
    if (lp.variable(j).binary && !covered[static_cast<std::size_t>(j)])
      throw std::invalid_argument("check_feasibility: binary variable " + std::to_string(j) +
                                  " is not fixed");
  }
  auto run = detail::run_simplex(sf, lower, upper, nullptr, opts, true);
  SolveResult res;
  res.status = run.status;
  res.pivots = run.pivots;
  if (run.status == Status::Optimal) {
    res.objective = lp.objective_value(run.x);
    res.x = std::move(run.x);
    res.bound = res.objective;
    res.gap = 0.0;
  }
  return res;
}

}  // namespace dca::lp
