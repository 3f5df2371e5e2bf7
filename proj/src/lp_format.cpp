#include <cctype>
#include <cmath>
#include <ostream>

#include "dca/lpkit.hpp"
#include "dca/netmodel.hpp"

namespace dca::lp {

namespace {

// LP-format names: letters, digits and a few symbols, not starting with a
// digit or period.
std::string var_name(const LinearProgram& lp, int j) {
  const auto& raw = lp.variable(j).name;
  std::string name;
  for (char c : raw) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
                    c == '(' || c == ')' || c == '[' || c == ']' || c == ',';
    name += ok ? c : '_';
  }
  if (name.empty() || std::isdigit(static_cast<unsigned char>(name[0])) || name[0] == '.')
    name = "x" + std::to_string(j) + (name.empty() ? "" : "_" + name);
  return name;
}

void write_linear(std::ostream& out, const LinearProgram& lp, const std::vector<Term>& terms) {
  bool first = true;
  int on_line = 0;
  for (const auto& t : terms) {
    if (t.coef == 0.0) continue;
    const double mag = std::abs(t.coef);
    out << (t.coef < 0 ? " - " : (first ? " " : " + "));
    if (mag != 1.0) out << format_real(mag) << ' ';
    out << var_name(lp, t.var);
    first = false;
    if (++on_line % 8 == 0) out << "\n  ";
  }
  if (first) out << " 0 " << var_name(lp, 0);
}

}  // namespace

void write_lp_format(std::ostream& out, const LinearProgram& lp) {
  out << "\\ exported by dca\nMinimize\n obj:";
  std::vector<Term> obj;
  for (int j = 0; j < lp.num_variables(); ++j) {
    if (lp.variable(j).cost != 0.0) obj.push_back({j, lp.variable(j).cost});
  }
  if (lp.num_variables() > 0) write_linear(out, lp, obj);
  if (lp.objective_offset() != 0.0)
    out << (lp.objective_offset() < 0 ? " - " : " + ") << format_real(std::abs(lp.objective_offset()));
  out << "\nSubject To\n";
  for (int i = 0; i < lp.num_constraints(); ++i) {
    const auto& row = lp.constraint(i);
    out << " c" << i << ':';
    write_linear(out, lp, row.terms);
    switch (row.rel) {
      case Relation::LessEqual: out << " <= "; break;
      case Relation::GreaterEqual: out << " >= "; break;
      case Relation::Equal: out << " = "; break;
    }
    out << format_real(row.rhs) << '\n';
  }
  out << "Bounds\n";
  for (int j = 0; j < lp.num_variables(); ++j) {
    const auto& v = lp.variable(j);
    if (v.binary && v.lower == 0.0 && v.upper == 1.0) continue;
    const auto name = var_name(lp, j);
    if (v.lower == v.upper) {
      out << ' ' << name << " = " << format_real(v.lower) << '\n';
    } else if (std::isinf(v.lower) && std::isinf(v.upper)) {
      out << ' ' << name << " free\n";
    } else {
      out << ' ' << (std::isinf(v.lower) ? std::string("-inf") : format_real(v.lower)) << " <= "
          << name << " <= " << (std::isinf(v.upper) ? std::string("+inf") : format_real(v.upper))
          << '\n';
    }
  }
  bool any_binary = false;
  for (int j = 0; j < lp.num_variables(); ++j) {
    if (!lp.variable(j).binary) continue;
    if (!any_binary) out << "Binaries\n";
    any_binary = true;
    out << ' ' << var_name(lp, j) << '\n';
  }
  out << "End\n";
}

}  // namespace dca::lp
