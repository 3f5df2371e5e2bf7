#include "dca/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace dca {

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
  std::string text = "infeasible defending strategy:";
  for (const auto& line : lines) {
    text += "\n  ";
    text += line;
  }
  return text;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error(join_lines(violations)), violations_(std::move(violations)) {}

Instance::Instance(std::vector<Node> nodes, std::vector<Edge> edges, bool directed,
                   int k, double budget)
    : nodes_(std::move(nodes)),
      edges_(std::move(edges)),
      directed_(directed),
      k_(k),
      budget_(budget) {
  if (k_ < 0) throw std::invalid_argument("contagion radius k must be >= 0");
  if (!(budget_ >= 0.0) || !std::isfinite(budget_))
    throw std::invalid_argument("budget must be a finite value >= 0");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& nd = nodes_[i];
    if (!(nd.theta >= 0.0) || !std::isfinite(nd.theta) || !(nd.alpha >= 0.0) ||
        !std::isfinite(nd.alpha))
      throw std::invalid_argument("node " + std::to_string(i) +
                                  ": theta and alpha must be finite and >= 0");
  }
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto& e : edges_) {
    if (!valid_node(e.u) || !valid_node(e.v))
      throw std::invalid_argument("edge endpoint out of range: " + std::to_string(e.u) +
                                  " " + std::to_string(e.v));
    if (e.u == e.v)
      throw std::invalid_argument("self-loop at node " + std::to_string(e.u));
    if (!(e.w >= 0.0 && e.w <= 1.0))
      throw std::invalid_argument("edge weight outside [0,1]");
    auto key = directed_ ? std::pair{e.u, e.v} : std::pair{std::min(e.u, e.v), std::max(e.u, e.v)};
    if (!seen.insert(key).second)
      throw std::invalid_argument("duplicate edge " + std::to_string(e.u) + " " +
                                  std::to_string(e.v));
  }
  build_adjacency();
}

void Instance::build_adjacency() {
  std::vector<Arc> arcs;
  arcs.reserve(directed_ ? edges_.size() : 2 * edges_.size());
  for (const auto& e : edges_) {
    arcs.push_back({e.u, e.v, e.w});
    if (!directed_) arcs.push_back({e.v, e.u, e.w});
  }
  const std::size_t n = nodes_.size();

  out_ = arcs;
  std::sort(out_.begin(), out_.end(), [](const Arc& a, const Arc& b) {
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });
  in_ = arcs;
  std::sort(in_.begin(), in_.end(), [](const Arc& a, const Arc& b) {
    return std::tie(a.to, a.from) < std::tie(b.to, b.from);
  });

  out_begin_.assign(n + 1, 0);
  in_begin_.assign(n + 1, 0);
  for (const auto& a : arcs) {
    ++out_begin_[static_cast<std::size_t>(a.from) + 1];
    ++in_begin_[static_cast<std::size_t>(a.to) + 1];
  }
  std::partial_sum(out_begin_.begin(), out_begin_.end(), out_begin_.begin());
  std::partial_sum(in_begin_.begin(), in_begin_.end(), in_begin_.begin());
}

std::span<const Arc> Instance::out_arcs(NodeId v) const {
  const auto i = static_cast<std::size_t>(v);
  return {out_.data() + out_begin_[i], out_begin_[i + 1] - out_begin_[i]};
}

std::span<const Arc> Instance::in_arcs(NodeId v) const {
  const auto i = static_cast<std::size_t>(v);
  return {in_.data() + in_begin_[i], in_begin_[i + 1] - in_begin_[i]};
}

double Instance::arc_weight(NodeId from, NodeId to) const {
  if (!valid_node(from) || !valid_node(to)) return -1.0;
  auto arcs = out_arcs(from);
  auto it = std::lower_bound(arcs.begin(), arcs.end(), to,
                             [](const Arc& a, NodeId t) { return a.to < t; });
  if (it == arcs.end() || it->to != to) return -1.0;
  return it->w;
}

double Instance::total_theta() const {
  double sum = 0.0;
  for (const auto& nd : nodes_) sum += nd.theta;
  return sum;
}

Instance Instance::with_budget(double budget) const {
  return Instance(nodes_, edges_, directed_, k_, budget);
}

Instance Instance::with_k(int k) const {
  return Instance(nodes_, edges_, directed_, k, budget_);
}

Instance Instance::with_zero_weights() const {
  auto edges = edges_;
  for (auto& e : edges) e.w = 0.0;
  return Instance(nodes_, std::move(edges), directed_, k_, budget_);
}

double Allocation::total() const { return std::accumulate(r.begin(), r.end(), 0.0); }

std::vector<NodeId> k_neighborhood(const Instance& inst, NodeId u, int k) {
  if (!inst.valid_node(u))
    throw std::domain_error("k_neighborhood: invalid node " + std::to_string(u));
  if (k < 0) throw std::domain_error("k_neighborhood: k must be >= 0");

  std::vector<int> dist(inst.num_nodes(), -1);
  std::deque<NodeId> queue{u};
  dist[static_cast<std::size_t>(u)] = 0;
  std::vector<NodeId> reached{u};
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop_front();
    const int d = dist[static_cast<std::size_t>(v)];
    if (d == k) continue;
    for (const auto& arc : inst.out_arcs(v)) {
      auto& dz = dist[static_cast<std::size_t>(arc.to)];
      if (dz >= 0) continue;
      dz = d + 1;
      reached.push_back(arc.to);
      queue.push_back(arc.to);
    }
  }
  std::sort(reached.begin(), reached.end());
  return reached;
}

std::pair<double, double> power_range(const Instance& inst, const Allocation& alloc,
                                      NodeId v) {
  const double rv = alloc.r[static_cast<std::size_t>(v)];
  double out_w = 0.0;
  for (const auto& arc : inst.out_arcs(v)) out_w += arc.w;
  double inflow = 0.0;
  for (const auto& arc : inst.in_arcs(v)) inflow += arc.w * alloc.r[static_cast<std::size_t>(arc.from)];
  return {std::max(1.0 - out_w, 0.0) * rv, rv + inflow};
}

std::vector<double> defending_powers(const Instance& inst, const Allocation& alloc,
                                     const Reallocation& realloc) {
  std::vector<double> p(alloc.r.begin(), alloc.r.end());
  p.resize(inst.num_nodes(), 0.0);
  for (const auto& t : realloc.transfers) {
    p[static_cast<std::size_t>(t.from)] -= t.amount;
    p[static_cast<std::size_t>(t.to)] += t.amount;
  }
  return p;
}

double defending_power(const Instance& inst, const Allocation& alloc,
                       const Reallocation& realloc, NodeId v) {
  if (!inst.valid_node(v))
    throw std::domain_error("defending_power: invalid node " + std::to_string(v));
  double p = alloc.r[static_cast<std::size_t>(v)];
  for (const auto& t : realloc.transfers) {
    if (t.from == v) p -= t.amount;
    if (t.to == v) p += t.amount;
  }
  return p;
}

double loss_of_attack(const Instance& inst, const Allocation& alloc,
                      const Reallocation& realloc, NodeId u) {
  if (!inst.valid_node(u))
    throw std::domain_error("loss_of_attack: invalid node " + std::to_string(u));
  if (realloc.attacked != u)
    throw std::domain_error("loss_of_attack: reallocation prepared for node " +
                            std::to_string(realloc.attacked) + ", attack at " +
                            std::to_string(u));
  const auto p = defending_powers(inst, alloc, realloc);
  double loss = 0.0;
  for (NodeId v : k_neighborhood(inst, u)) {
    const auto i = static_cast<std::size_t>(v);
    if (p[i] < inst.nodes()[i].theta - kDefTol) loss += inst.nodes()[i].alpha;
  }
  return loss;
}

std::vector<std::string> find_violations(const Instance& inst, const Allocation& alloc,
                                         const Reallocation& realloc) {
  std::vector<std::string> out;
  auto note = [&](const std::string& s) {
    out.push_back("attack " + std::to_string(realloc.attacked) + ": " + s);
  };
  if (alloc.r.size() != inst.num_nodes()) {
    out.push_back("allocation has " + std::to_string(alloc.r.size()) + " entries, expected " +
                  std::to_string(inst.num_nodes()));
    return out;
  }
  if (!inst.valid_node(realloc.attacked)) note("invalid attacked node");

  std::vector<double> outflow(inst.num_nodes(), 0.0);
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto& t : realloc.transfers) {
    const std::string tag = "t(" + std::to_string(t.from) + "," + std::to_string(t.to) + ")";
    if (!inst.valid_node(t.from) || !inst.valid_node(t.to)) {
      note(tag + " references an invalid node");
      continue;
    }
    const double w = inst.arc_weight(t.from, t.to);
    if (w < 0.0) {
      note(tag + " is not along an edge");
      continue;
    }
    if (!seen.insert({t.from, t.to}).second) note(tag + " listed twice");
    if (!std::isfinite(t.amount) || t.amount < -kFeasTol) note(tag + " is negative");
    const double cap = w * alloc.r[static_cast<std::size_t>(t.from)];
    if (t.amount > cap + kFeasTol)
      note(tag + "=" + format_real(t.amount) + " exceeds edge cap " + format_real(cap));
    outflow[static_cast<std::size_t>(t.from)] += t.amount;
  }
  for (std::size_t v = 0; v < outflow.size(); ++v) {
    if (outflow[v] > alloc.r[v] + kFeasTol)
      note("node " + std::to_string(v) + " sends " + format_real(outflow[v]) +
           " but owns " + format_real(alloc.r[v]));
  }
  return out;
}

std::vector<std::string> find_violations(const Instance& inst,
                                         const DefendingStrategy& strategy) {
  std::vector<std::string> out;
  const auto& r = strategy.allocation.r;
  if (r.size() != inst.num_nodes()) {
    out.push_back("allocation has " + std::to_string(r.size()) + " entries, expected " +
                  std::to_string(inst.num_nodes()));
    return out;
  }
  for (std::size_t v = 0; v < r.size(); ++v) {
    if (!std::isfinite(r[v]) || r[v] < -kFeasTol)
      out.push_back("r_" + std::to_string(v) + " is negative");
  }
  const double total = strategy.allocation.total();
  if (total > inst.budget() + kFeasTol)
    out.push_back("allocation uses " + format_real(total) + " > budget " +
                  format_real(inst.budget()));
  if (strategy.reallocations.size() != inst.num_nodes()) {
    out.push_back("expected one reallocation per node, got " +
                  std::to_string(strategy.reallocations.size()));
    return out;
  }
  for (std::size_t u = 0; u < strategy.reallocations.size(); ++u) {
    const auto& re = strategy.reallocations[u];
    if (re.attacked != static_cast<NodeId>(u)) {
      out.push_back("reallocation " + std::to_string(u) + " is prepared for node " +
                    std::to_string(re.attacked));
      continue;
    }
    auto v = find_violations(inst, strategy.allocation, re);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

void validate(const Instance& inst, const DefendingStrategy& strategy) {
  auto violations = find_violations(inst, strategy);
  if (!violations.empty()) throw ValidationError(std::move(violations));
}

DefenseOutcome evaluate(const Instance& inst, const DefendingStrategy& strategy) {
  validate(inst, strategy);
  DefenseOutcome outcome;
  outcome.loss.resize(inst.num_nodes(), 0.0);
  for (std::size_t u = 0; u < inst.num_nodes(); ++u) {
    const auto node = static_cast<NodeId>(u);
    outcome.loss[u] =
        loss_of_attack(inst, strategy.allocation, strategy.reallocations[u], node);
    outcome.defending_result = std::max(outcome.defending_result, outcome.loss[u]);
  }
  return outcome;
}

Reallocation null_reallocation(NodeId attacked) { return Reallocation{attacked, {}}; }

DefendingStrategy without_reallocation(Allocation alloc) {
  DefendingStrategy s;
  const auto n = alloc.r.size();
  s.allocation = std::move(alloc);
  s.reallocations.reserve(n);
  for (std::size_t u = 0; u < n; ++u) s.reallocations.push_back(null_reallocation(static_cast<NodeId>(u)));
  return s;
}

Reallocation clean_transfers(const Instance& inst, const Allocation& alloc,
                             Reallocation realloc) {
  std::map<std::pair<NodeId, NodeId>, double> merged;
  for (const auto& t : realloc.transfers) {
    const double w = inst.arc_weight(t.from, t.to);
    if (w <= 0.0) continue;
    merged[{t.from, t.to}] += t.amount;
  }
  std::vector<double> outflow(inst.num_nodes(), 0.0);
  std::vector<Transfer> kept;
  for (auto [key, amount] : merged) {
    const double cap = inst.arc_weight(key.first, key.second) *
                       alloc.r[static_cast<std::size_t>(key.first)];
    amount = std::clamp(amount, 0.0, cap);
    if (amount < 1e-12) continue;
    kept.push_back({key.first, key.second, amount});
    outflow[static_cast<std::size_t>(key.first)] += amount;
  }
  for (auto& t : kept) {
    const auto from = static_cast<std::size_t>(t.from);
    if (outflow[from] > alloc.r[from]) t.amount *= alloc.r[from] / outflow[from];
  }
  realloc.transfers = std::move(kept);
  return realloc;
}

}  // namespace dca
