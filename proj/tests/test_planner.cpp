#include <algorithm>
#include <random>

#include "dca/planner.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace dca;

namespace {

int count_rows(const lp::LinearProgram& prog, const std::string& prefix) {
  int n = 0;
  for (const auto& c : prog.constraints()) n += c.name.rfind(prefix, 0) == 0;
  return n;
}

// Variables of the joint program counted straight from the definition:
// one r per node, Loss, and per attack a binary per node within k hops plus
// a transfer per arc ending within k hops.
int expected_variables(const Instance& inst) {
  const auto dist = fixtures::hop_distances(inst);
  int count = static_cast<int>(inst.num_nodes()) + 1;
  for (std::size_t u = 0; u < inst.num_nodes(); ++u) {
    auto near = [&](NodeId v) { return dist[u][static_cast<std::size_t>(v)] <= inst.k(); };
    for (std::size_t v = 0; v < inst.num_nodes(); ++v) count += near(static_cast<NodeId>(v));
    for (const auto& e : inst.edges()) {
      count += near(e.v);
      if (!inst.directed()) count += near(e.u);
    }
  }
  return count;
}

void check_strategy(const Instance& inst, const PlanResult& res) {
  CHECK(find_violations(inst, res.strategy).empty());
  CHECK(evaluate(inst, res.strategy).defending_result == doctest::Approx(res.result));
  CHECK(fixtures::independent_result(inst, res.strategy) == doctest::Approx(res.result));
}

}  // namespace

TEST_CASE("joint program shape") {
  const auto lone = fixtures::lone_node(0.5);
  const auto m1 = build_defense_milp(lone, 0.5);
  CHECK(m1.lp.num_binaries() == 1);
  CHECK(m1.lp.num_variables() == 3);  // r, Loss, x
  CHECK(m1.scenarios.size() == 1);
  CHECK(m1.scenarios[0].x_var.size() == 1);

  const auto net = fixtures::example_network();
  const auto m = build_defense_milp(net, net.budget());
  CHECK(m.lp.num_variables() == expected_variables(net));
  // Hand count: neighbourhood sizes 4,3,3,3,3,2 and arcs into them 9,7,6,7,6,3.
  CHECK(m.lp.num_binaries() == 18);
  CHECK(m.lp.num_variables() == 6 + 1 + 18 + 38);

  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    ParamRanges pr;
    pr.k = static_cast<int>(seed % 3);
    const auto g = gen_gnp(9, 0.3, seed, pr);
    CHECK(build_defense_milp(g, g.budget()).lp.num_variables() == expected_variables(g));
  }

  const auto iso = net.with_zero_weights();
  const auto mi = build_defense_milp(iso, iso.budget());
  for (const auto& sc : mi.scenarios)
    for (const auto& t : sc.transfers) CHECK(mi.lp.variable(t.var).upper == 0.0);

  CHECK_THROWS(build_defense_milp(net, -1.0));
}

TEST_CASE("dominance pruning drops the implied cap family") {
  const auto full = fixtures::star(5, 3.0, 1.0);
  const auto plain = build_defense_milp(full, 3.0);
  const auto dom = build_defense_milp(full, 3.0, PruneOptions{false, 0.0, true});
  CHECK(count_rows(plain.lp, "cap") > 0);
  CHECK(count_rows(dom.lp, "cap") == 0);
  CHECK(count_rows(dom.lp, "out") == count_rows(plain.lp, "out"));

  // Leaves of a half-weight star send along one arc of weight 0.5: the
  // per-sender outflow rows are implied there, the centre (sum 2) keeps its.
  const auto half = fixtures::star(5, 3.0, 0.5);
  const auto hd = build_defense_milp(half, 3.0, PruneOptions{false, 0.0, true});
  for (const auto& c : hd.lp.constraints()) {
    if (c.name.rfind("out", 0) != 0) continue;
    CHECK(c.name.substr(c.name.find('_') + 1) == "0");
  }
  CHECK(solve_exact(half, {}).result == doctest::Approx(solve_exact(half, [] {
                                                         PlannerConfig c;
                                                         c.prune_dominance = false;
                                                         return c;
                                                       }()).result));
}

TEST_CASE("scenario pruning") {
  // Two components: a valued triangle and a worthless pair.
  std::vector<Node> nodes{{2, 3}, {2, 4}, {2, 5}, {1, 0}, {1, 0}};
  std::vector<Edge> edges{{0, 1, 0.6}, {1, 2, 0.6}, {0, 2, 0.6}, {3, 4, 0.9}};
  const Instance inst(nodes, edges, false, 1, 3.0);

  const auto none = build_defense_milp(inst, 3.0, PruneOptions{true, 0.0, false});
  CHECK(none.dropped == std::vector<NodeId>{3, 4});

  const double lb = lp_lower_bound(inst);
  const auto pruned = prune(inst, 3.0, lb, evaluate(inst, greedy(inst)).defending_result);
  const auto full = build_defense_milp(inst, 3.0);
  CHECK(pruned.lp.num_variables() < full.lp.num_variables());

  PlannerConfig on, off;
  off.prune_scenarios = off.prune_dominance = false;
  CHECK(solve_exact(inst, on).result == doctest::Approx(solve_exact(inst, off).result));

  CHECK_THROWS_AS(prune(inst, 3.0, 100.0, 5.0), std::invalid_argument);

  // l = 0 with every value positive: nothing to drop.
  const auto net = fixtures::example_network();
  CHECK(build_defense_milp(net, 12, PruneOptions{true, 0.0, true}).dropped.empty());
}

TEST_CASE("exact solve agrees with the joint-assignment oracle") {
  for (const auto& inst : fixtures::small_instances(15, 3)) {
    const auto res = solve_exact(inst);
    CHECK(res.status == lp::Status::Optimal);
    CHECK(res.gap == 0.0);
    CHECK(res.result == doctest::Approx(oracle_exact(inst)).epsilon(1e-9));
    check_strategy(inst, res);
    CHECK(lp_lower_bound(inst) <= res.result + 1e-6);
  }
}

TEST_CASE("exact solve on stars") {
  CHECK(solve_exact(fixtures::star(4, 4.0)).result == doctest::Approx(0.0));
  for (double w : {0.0, 0.3, 1.0}) CHECK(solve_exact(fixtures::star(4, 3.0, w)).result >= 1.0);
  // A caller strategy is used as the starting point and never lost.
  PlannerConfig cfg;
  cfg.incumbent = without_reallocation(Allocation{{1, 1, 1, 1}});
  CHECK(solve_exact(fixtures::star(4, 4.0), cfg).result == 0.0);
}

TEST_CASE("node limit is reported with a gap") {
  const auto inst = gen_gnp(10, 0.3, 2);
  PlannerConfig cfg;
  cfg.solver.max_nodes = 1;
  cfg.solver.dive_interval = 0;
  const auto res = solve_exact(inst, cfg);
  if (res.status == lp::Status::NodeLimit) CHECK(res.gap > 0.0);
  else CHECK(res.status == lp::Status::Optimal);
  check_strategy(inst, res);
}

TEST_CASE("relaxation bound") {
  for (double eps : {0.5, 0.25, 0.1})
    CHECK(lp_lower_bound(fixtures::lone_node(1.0 - eps)) == doctest::Approx(eps));
  CHECK(lp_lower_bound(fixtures::star(4, 4.0)) == doctest::Approx(0.0));
  CHECK(lp_lower_bound(fixtures::star(4, 0.0), 4.0) == doctest::Approx(0.0));
}

TEST_CASE("perfect defence") {
  CHECK_FALSE(perfect_defense(fixtures::star(4, 3.0)).has_value());
  const auto ok = perfect_defense(fixtures::star(4, 4.0));
  REQUIRE(ok.has_value());
  CHECK(evaluate(fixtures::star(4, 4.0), *ok).defending_result == 0.0);

  std::vector<Node> free_nodes(4, Node{0.0, 3.0});
  const Instance free_inst(free_nodes, {{0, 1, 0.5}}, false, 1, 0.0);
  const auto z = perfect_defense(free_inst);
  REQUIRE(z.has_value());
  for (double r : z->allocation.r) CHECK(r == 0.0);

  for (const auto& inst : fixtures::small_instances(12, 5)) {
    const auto p = perfect_defense(inst);
    CHECK(p.has_value() == (oracle_exact(inst) == 0.0));
    if (p) CHECK(evaluate(inst, *p).defending_result == 0.0);
  }
}

TEST_CASE("rounding approximations") {
  for (const auto& inst : fixtures::small_instances(10, 8)) {
    for (double eps : {0.3, 0.5, 0.7}) {
      const auto ba = ba_epsilon(inst, eps);
      check_strategy(inst, ba);
      CHECK(ba.strategy.allocation.total() <= inst.budget() + kFeasTol);
      const double opt_small = oracle_exact(inst.with_budget(eps * inst.budget()));
      CHECK(ba.result <= opt_small / (1.0 - eps) + 1e-6);
      if (lp_lower_bound(inst, eps * inst.budget()) <= 1e-9) CHECK(ba.result == 0.0);

      const auto bt = ba_epsilon_tau(inst, eps);
      check_strategy(inst, bt);
      CHECK(bt.result <= ba.result + 1e-9);
      CHECK(bt.tau > 0.0);
      CHECK(bt.tau <= eps + 1e-12);
    }
  }
  PlannerConfig bad;
  bad.epsilons = {0.5, 1.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.epsilons = {0.5};
  bad.tau_points = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS(ba_epsilon(fixtures::star(4, 4), 0.0));

  const auto inst = gen_gnp(8, 0.3, 9);
  const auto grid = ba_grid(inst, false);
  for (double eps : PlannerConfig{}.epsilons) CHECK(grid.result <= ba_epsilon(inst, eps).result + 1e-9);
  CHECK(ba_grid(inst, true).result <= grid.result + 1e-9);
}

TEST_CASE("greedy baselines") {
  const Instance two({{4, 5}, {4, 1}}, {}, false, 1, 4.0);
  CHECK(greedy_allocation(two).r == std::vector<double>{4.0, 0.0});
  const Instance partial({{4, 5}, {4, 1}}, {}, false, 1, 6.0);
  CHECK(greedy_allocation(partial).r == std::vector<double>{4.0, 2.0});

  const auto rich = gen_gnp(10, 0.3, 1).with_budget(1000);
  CHECK(evaluate(rich, greedy(rich)).defending_result == 0.0);

  // Triangle cover gadget at R = 2: originals 0 and 1 get one unit each.
  const auto tri = gen_vc_gadget(SimpleGraph{3, {{0, 1}, {1, 2}, {0, 2}}}, 2.0);
  const auto g = greedy(tri);
  CHECK(g.allocation.r[0] == 1.0);
  CHECK(g.allocation.r[1] == 1.0);
  CHECK(g.allocation.r[2] == 0.0);
  CHECK(evaluate(tri, g).defending_result == 1.0);

  const auto net = fixtures::example_network(8.0);
  const auto gr = greedy_r(net);
  CHECK(gr.allocation.r == greedy_allocation(net).r);
  const auto plain = evaluate(net, greedy(net));
  const auto moved = evaluate(net, gr);
  for (std::size_t u = 0; u < 6; ++u) CHECK(moved.loss[u] <= plain.loss[u]);

  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const auto inst = gen_gnp(12, 0.25, seed);
    const auto a = greedy(inst), b = greedy_r(inst);
    CHECK(find_violations(inst, b).empty());
    CHECK(evaluate(inst, b).defending_result <= evaluate(inst, a).defending_result);
    const auto iso = inst.with_zero_weights();
    CHECK(evaluate(iso, greedy_r(iso)).loss == evaluate(iso, greedy(iso)).loss);
  }
}

TEST_CASE("contagion radius zero") {
  ParamRanges pr;
  pr.k = 0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto inst = gen_gnp(7, 0.4, seed, pr);
    const auto res = solve_exact(inst);
    CHECK(res.result == doctest::Approx(fixtures::k0_optimum(inst)));
    CHECK(fixtures::p_hat_result(inst, res.strategy.allocation.r) == doctest::Approx(res.result));
  }
}

TEST_CASE("exact result does not grow with the budget") {
  const auto inst = gen_gnp(9, 0.3, 6);
  double prev = 1e18;
  std::optional<DefendingStrategy> carry;
  for (double f : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    PlannerConfig cfg;
    cfg.incumbent = carry;
    const auto res = solve_exact(inst.with_budget(f * inst.total_theta()), cfg);
    CHECK(res.status == lp::Status::Optimal);
    CHECK(res.result <= prev + 1e-9);
    prev = res.result;
    carry = res.strategy;
  }
}
