#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>

#include "dca/harness.hpp"

namespace dca {

namespace {

// Standard distributions are implementation-defined; these keep generated
// instances identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t v;
    do v = eng_(); while (v >= limit);
    return v % bound;
  }

  int integer(int lo, int hi) {
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  double real(double lo, double hi) { return lo + (hi - lo) * unit(); }

 private:
  std::mt19937_64 eng_;
};

void check_ranges(const ParamRanges& pr) {
  if (pr.theta_min < 0 || pr.theta_max < pr.theta_min || pr.alpha_min < 0 ||
      pr.alpha_max < pr.alpha_min)
    throw std::invalid_argument("invalid theta/alpha range");
  if (!(pr.w_min >= 0.0 && pr.w_max <= 1.0 && pr.w_min <= pr.w_max))
    throw std::invalid_argument("weight range must lie in [0,1]");
  if (pr.k < 0 || !(pr.budget_fraction >= 0.0))
    throw std::invalid_argument("k and budget fraction must be >= 0");
}

Instance decorate(int n, const std::vector<std::pair<int, int>>& pairs, Rng& rng,
                  const ParamRanges& pr) {
  std::vector<Node> nodes(static_cast<std::size_t>(n));
  double total_theta = 0.0;
  for (auto& nd : nodes) {
    nd.theta = rng.integer(pr.theta_min, pr.theta_max);
    nd.alpha = rng.integer(pr.alpha_min, pr.alpha_max);
    total_theta += nd.theta;
  }
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (auto [u, v] : pairs) edges.push_back({u, v, rng.real(pr.w_min, pr.w_max)});
  return Instance(std::move(nodes), std::move(edges), false, pr.k,
                  pr.budget_fraction * total_theta);
}

}  // namespace

Instance gen_gnp(int n, double p, std::uint64_t seed, const ParamRanges& ranges) {
  if (n < 0 || !(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("gnp: need n >= 0, p in [0,1]");
  check_ranges(ranges);
  Rng rng(seed);
  std::vector<std::pair<int, int>> pairs;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.unit() < p) pairs.push_back({u, v});
  return decorate(n, pairs, rng, ranges);
}

Instance gen_powerlaw(int n, int m_attach, double p_tri, std::uint64_t seed,
                      const ParamRanges& ranges) {
  if (m_attach < 1 || n < m_attach || !(p_tri >= 0.0 && p_tri <= 1.0))
    throw std::invalid_argument("powerlaw: need 1 <= m_attach <= n and p_tri in [0,1]");
  check_ranges(ranges);
  Rng rng(seed);
  std::vector<std::set<int>> adj(static_cast<std::size_t>(n));
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> repeated;  // node listed once per incident edge end
  for (int v = 0; v < m_attach; ++v) repeated.push_back(v);

  auto link = [&](int a, int b) {
    if (a == b || adj[static_cast<std::size_t>(a)].count(b)) return false;
    adj[static_cast<std::size_t>(a)].insert(b);
    adj[static_cast<std::size_t>(b)].insert(a);
    pairs.push_back({std::min(a, b), std::max(a, b)});
    repeated.push_back(b);
    return true;
  };

  for (int source = m_attach; source < n; ++source) {
    // m distinct preferential targets
    std::vector<int> targets;
    std::set<int> picked;
    while (static_cast<int>(targets.size()) < m_attach) {
      const int c = repeated[rng.below(repeated.size())];
      if (picked.insert(c).second) targets.push_back(c);
    }
    int target = targets.back();
    targets.pop_back();
    link(source, target);
    int count = 1;
    while (count < m_attach) {
      if (rng.unit() < p_tri) {
        std::vector<int> hood;
        for (int nb : adj[static_cast<std::size_t>(target)])
          if (nb != source && !adj[static_cast<std::size_t>(source)].count(nb)) hood.push_back(nb);
        if (!hood.empty()) {
          link(source, hood[rng.below(hood.size())]);
          ++count;
          continue;
        }
      }
      // Skip targets already joined through a closed triangle.
      while (!targets.empty() && adj[static_cast<std::size_t>(source)].count(targets.back()))
        targets.pop_back();
      if (targets.empty()) break;
      target = targets.back();
      targets.pop_back();
      link(source, target);
      ++count;
    }
    for (int i = 0; i < m_attach; ++i) repeated.push_back(source);
  }
  return decorate(n, pairs, rng, ranges);
}

Instance gen_vc_gadget(const SimpleGraph& g, double budget) {
  if (g.n < 0) throw std::invalid_argument("vc gadget: negative vertex count");
  std::vector<Node> nodes(static_cast<std::size_t>(g.n), Node{1.0, 1.0});
  std::vector<Edge> edges;
  for (auto [a, b] : g.edges) {
    if (a < 0 || b < 0 || a >= g.n || b >= g.n || a == b)
      throw std::invalid_argument("vc gadget: bad edge");
    const auto mid = static_cast<NodeId>(nodes.size());
    nodes.push_back(Node{1.0, 0.0});
    edges.push_back({a, mid, 0.0});
    edges.push_back({mid, b, 0.0});
  }
  return Instance(std::move(nodes), std::move(edges), false, 1, budget);
}

}  // namespace dca
