#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dca/lpkit.hpp"

namespace dca::lp {

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterLimit: return "iteration-limit";
    case Status::NodeLimit: return "node-limit";
  }
  return "unknown";
}

int LinearProgram::add_variable(double lower, double upper, double cost, std::string name) {
  vars_.push_back({lower, upper, cost, false, std::move(name)});
  return static_cast<int>(vars_.size()) - 1;
}

int LinearProgram::add_binary(double cost, std::string name) {
  vars_.push_back({0.0, 1.0, cost, true, std::move(name)});
  return static_cast<int>(vars_.size()) - 1;
}

int LinearProgram::add_constraint(std::vector<Term> terms, Relation rel, double rhs,
                                  std::string name) {
  rows_.push_back({std::move(terms), rel, rhs, std::move(name)});
  return static_cast<int>(rows_.size()) - 1;
}

void LinearProgram::set_bounds(int var, double lower, double upper) {
  auto& v = vars_.at(static_cast<std::size_t>(var));
  v.lower = lower;
  v.upper = upper;
}

void LinearProgram::set_binary(int var, bool binary) {
  vars_.at(static_cast<std::size_t>(var)).binary = binary;
}

int LinearProgram::num_binaries() const {
  return static_cast<int>(std::count_if(vars_.begin(), vars_.end(),
                                        [](const Variable& v) { return v.binary; }));
}

void LinearProgram::validate() const {
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    const auto& v = vars_[j];
    const std::string tag = "variable " + std::to_string(j);
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper)
      throw std::invalid_argument(tag + ": lower bound exceeds upper bound");
    if (v.lower == kInf || v.upper == -kInf)
      throw std::invalid_argument(tag + ": empty bound interval");
    if (!std::isfinite(v.cost)) throw std::invalid_argument(tag + ": non-finite cost");
    if (v.binary && (v.lower < 0.0 || v.upper > 1.0))
      throw std::invalid_argument(tag + ": binary variable with bounds outside [0,1]");
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& row = rows_[i];
    const std::string tag = "constraint " + std::to_string(i);
    if (!std::isfinite(row.rhs)) throw std::invalid_argument(tag + ": non-finite rhs");
    for (const auto& t : row.terms) {
      if (t.var < 0 || t.var >= num_variables())
        throw std::invalid_argument(tag + ": unknown variable " + std::to_string(t.var));
      if (!std::isfinite(t.coef)) throw std::invalid_argument(tag + ": non-finite coefficient");
    }
  }
  if (!std::isfinite(offset_)) throw std::invalid_argument("non-finite objective offset");
}

double LinearProgram::objective_value(std::span<const double> x) const {
  double z = offset_;
  for (std::size_t j = 0; j < vars_.size(); ++j) z += vars_[j].cost * x[j];
  return z;
}

double LinearProgram::max_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    worst = std::max(worst, vars_[j].lower - x[j]);
    worst = std::max(worst, x[j] - vars_[j].upper);
  }
  for (const auto& row : rows_) {
    double lhs = 0.0;
    for (const auto& t : row.terms) lhs += t.coef * x[static_cast<std::size_t>(t.var)];
    switch (row.rel) {
      case Relation::LessEqual: worst = std::max(worst, lhs - row.rhs); break;
      case Relation::GreaterEqual: worst = std::max(worst, row.rhs - lhs); break;
      case Relation::Equal: worst = std::max(worst, std::abs(lhs - row.rhs)); break;
    }
  }
  return worst;
}

LinearProgram LinearProgram::relaxation() const {
  LinearProgram copy = *this;
  for (auto& v : copy.vars_) v.binary = false;
  return copy;
}

}  // namespace dca::lp
