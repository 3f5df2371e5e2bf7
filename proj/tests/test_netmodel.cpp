#include <algorithm>
#include <cstdio>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"

using namespace dca;
using fixtures::A;
using fixtures::B;
using fixtures::C;
using fixtures::D;
using fixtures::E;
using fixtures::F;

TEST_CASE("instance invariants are enforced") {
  CHECK_THROWS_AS(Instance({{-1, 1}}, {}, false, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(Instance({{1, -1}}, {}, false, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(Instance({{1, 1}, {1, 1}}, {{0, 1, 1.5}}, false, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(Instance({{1, 1}}, {{0, 0, 0.5}}, false, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(Instance({{1, 1}, {1, 1}}, {{0, 1, 0.5}, {1, 0, 0.5}}, false, 1, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(Instance({{1, 1}}, {}, false, -1, 1), std::invalid_argument);
  CHECK_THROWS_AS(Instance({{1, 1}}, {}, false, 1, -1), std::invalid_argument);
  CHECK_THROWS_AS(Instance({{1, 1}}, {{0, 3, 0.5}}, false, 1, 1), std::invalid_argument);
  // Opposite arcs are distinct edges in directed mode.
  CHECK_NOTHROW(Instance({{1, 1}, {1, 1}}, {{0, 1, 0.5}, {1, 0, 0.5}}, true, 1, 1));
}

TEST_CASE("k-hop neighbourhoods") {
  const auto s = fixtures::star(5, 0);
  CHECK(k_neighborhood(s, 0, 1) == std::vector<NodeId>{0, 1, 2, 3, 4});
  CHECK(k_neighborhood(s, 3, 1) == std::vector<NodeId>{0, 3});
  CHECK(k_neighborhood(s, 3, 2) == std::vector<NodeId>{0, 1, 2, 3, 4});
  for (NodeId u = 0; u < 5; ++u) CHECK(k_neighborhood(s, u, 0) == std::vector<NodeId>{u});

  const Instance path({{1, 1}, {1, 1}, {1, 1}, {1, 1}}, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}}, false, 2, 0);
  CHECK(k_neighborhood(path, 0) == std::vector<NodeId>{0, 1, 2});

  const Instance chain({{1, 1}, {1, 1}, {1, 1}}, {{0, 1, 1}, {1, 2, 1}}, true, 1, 0);
  CHECK(k_neighborhood(chain, 1, 1) == std::vector<NodeId>{1, 2});
  CHECK(k_neighborhood(chain, 2, 5) == std::vector<NodeId>{2});

  CHECK_THROWS_AS(k_neighborhood(s, 7, 1), std::domain_error);
  CHECK_THROWS_AS(k_neighborhood(s, -1, 1), std::domain_error);

  // Against all-pairs hop distances on random graphs.
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ParamRanges pr;
    pr.k = static_cast<int>(seed % 4);
    const auto inst = gen_gnp(12, 0.2, seed, pr);
    const auto dist = fixtures::hop_distances(inst);
    for (NodeId u = 0; u < 12; ++u) {
      std::vector<NodeId> want;
      for (NodeId v = 0; v < 12; ++v)
        if (dist[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] <= pr.k) want.push_back(v);
      CHECK(k_neighborhood(inst, u) == want);
    }
  }
}

TEST_CASE("defending power") {
  const auto inst = fixtures::example_network();
  const auto alloc = fixtures::uniform_allocation(inst, 2.0);
  const auto w = fixtures::example_witness();
  // a keeps its 2 and receives 1 from b and 1 from d.
  CHECK(defending_power(inst, alloc, w, A) == doctest::Approx(4.0));
  CHECK(defending_power(inst, alloc, w, C) == doctest::Approx(0.0));
  CHECK(defending_power(inst, alloc, w, B) == doctest::Approx(2.0));
  for (NodeId v = 0; v < 6; ++v) CHECK(defending_power(inst, alloc, null_reallocation(A), v) == 2.0);

  const Instance pair({{1, 1}, {1, 1}}, {{0, 1, 0.5}}, false, 1, 5);
  const Allocation r{{2.0, 3.0}};
  const Reallocation t{0, {{0, 1, 1.0}}};
  CHECK(defending_power(pair, r, t, 0) == doctest::Approx(1.0));
  CHECK(defending_power(pair, r, t, 1) == doctest::Approx(4.0));
  CHECK_THROWS_AS(defending_power(pair, r, t, 2), std::domain_error);
}

TEST_CASE("loss of an attack") {
  const auto inst = fixtures::example_network();
  const auto alloc = fixtures::uniform_allocation(inst, 2.0);
  CHECK(loss_of_attack(inst, alloc, null_reallocation(A), A) ==
        doctest::Approx(inst.alpha(A) + inst.alpha(E)));
  CHECK(loss_of_attack(inst, alloc, fixtures::example_witness(), A) == 0.0);
  CHECK(find_violations(inst, alloc, fixtures::example_witness()).empty());
  CHECK_THROWS_AS(loss_of_attack(inst, alloc, null_reallocation(B), A), std::domain_error);

  std::vector<Node> zero(inst.nodes());
  for (auto& nd : zero) nd.alpha = 0.0;
  const Instance worthless(zero, inst.edges(), false, 1, 12);
  for (NodeId u = 0; u < 6; ++u)
    CHECK(loss_of_attack(worthless, Allocation{std::vector<double>(6, 0.0)}, null_reallocation(u), u) == 0.0);

  // Power within defTol of theta counts as defended.
  const auto lone = fixtures::lone_node(1);
  CHECK(loss_of_attack(lone, Allocation{{1.0 - 0.5e-6}}, null_reallocation(0), 0) == 0.0);
  CHECK(loss_of_attack(lone, Allocation{{1.0 - 2e-6}}, null_reallocation(0), 0) == 1.0);
}

TEST_CASE("evaluate on stars") {
  for (int n = 2; n <= 6; ++n) {
    const auto s = fixtures::star(n, n);
    const auto out = evaluate(s, without_reallocation(Allocation{std::vector<double>(static_cast<std::size_t>(n), 1.0)}));
    CHECK(out.defending_result == 0.0);

    // Less than n units in total: some node is short whatever moves.
    std::mt19937_64 rng(static_cast<std::uint64_t>(n));
    const auto poor = fixtures::star(n, n - 0.5);
    for (int trial = 0; trial < 20; ++trial) {
      const auto strat = fixtures::random_strategy(poor, rng);
      CHECK(evaluate(poor, strat).defending_result >= 1.0);
    }
  }
}

TEST_CASE("evaluate matches an independent evaluator") {
  std::mt19937_64 rng(99);
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    ParamRanges pr;
    pr.k = static_cast<int>(seed % 3);
    const auto inst = gen_gnp(5, 0.5, seed, pr);
    for (int trial = 0; trial < 5; ++trial) {
      const auto s = fixtures::random_strategy(inst, rng);
      const auto out = evaluate(inst, s);
      CHECK(out.defending_result == doctest::Approx(fixtures::independent_result(inst, s)));
      CHECK(out.defending_result == *std::max_element(out.loss.begin(), out.loss.end()));
      for (NodeId u = 0; u < 5; ++u) {
        double cap = 0.0;
        for (NodeId v : k_neighborhood(inst, u)) cap += inst.alpha(v);
        CHECK(out.loss[static_cast<std::size_t>(u)] >= 0.0);
        CHECK(out.loss[static_cast<std::size_t>(u)] <= cap + 1e-12);
      }
    }
  }
}

TEST_CASE("validation lists broken caps") {
  const auto inst = fixtures::example_network();
  auto s = without_reallocation(fixtures::uniform_allocation(inst, 2.0));
  s.reallocations[A].transfers.push_back({B, A, 1.5});  // cap 0.5 * 2 = 1
  s.reallocations[C].transfers.push_back({C, B, 1.0});
  s.reallocations[C].transfers.push_back({C, D, 1.0});
  s.reallocations[C].transfers.push_back({C, A, 0.1});  // no such arc
  CHECK(find_violations(inst, s).size() >= 2);
  CHECK_THROWS_AS(evaluate(inst, s), ValidationError);
  try {
    evaluate(inst, s);
  } catch (const ValidationError& e) {
    CHECK(!e.violations().empty());
  }

  auto over = without_reallocation(fixtures::uniform_allocation(inst, 2.5));  // 15 > 12
  CHECK_THROWS_AS(evaluate(inst, over), ValidationError);

  auto missing = without_reallocation(fixtures::uniform_allocation(inst, 2.0));
  missing.reallocations.pop_back();
  CHECK_THROWS_AS(evaluate(inst, missing), ValidationError);

  auto negative = without_reallocation(fixtures::uniform_allocation(inst, 2.0));
  negative.reallocations[A].transfers.push_back({B, A, -0.5});
  CHECK_THROWS_AS(evaluate(inst, negative), ValidationError);
}

TEST_CASE("power range, conservation, monotonicity, edge order") {
  std::mt19937_64 rng(7);
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto inst = gen_gnp(7, 0.4, seed);
    const auto s = fixtures::random_strategy(inst, rng);
    for (const auto& re : s.reallocations) {
      const auto p = defending_powers(inst, s.allocation, re);
      double sum_p = 0.0, sum_r = 0.0;
      for (NodeId v = 0; v < 7; ++v) {
        const auto [lo, hi] = power_range(inst, s.allocation, v);
        CHECK(p[static_cast<std::size_t>(v)] >= lo - kFeasTol);
        CHECK(p[static_cast<std::size_t>(v)] <= hi + kFeasTol);
        sum_p += p[static_cast<std::size_t>(v)];
        sum_r += s.allocation.r[static_cast<std::size_t>(v)];
      }
      CHECK(sum_p == doctest::Approx(sum_r));
      for (std::size_t i = 0; i < re.transfers.size(); ++i) {
        if (re.transfers[i].amount <= 0.0) continue;
        auto fewer = re;
        fewer.transfers.erase(fewer.transfers.begin() + static_cast<std::ptrdiff_t>(i));
        const auto& t = re.transfers[i];
        CHECK(defending_power(inst, s.allocation, fewer, t.from) >= p[static_cast<std::size_t>(t.from)]);
        CHECK(defending_power(inst, s.allocation, fewer, t.to) <= p[static_cast<std::size_t>(t.to)]);
      }
    }
    auto edges = inst.edges();
    std::shuffle(edges.begin(), edges.end(), rng);
    const Instance shuffled(inst.nodes(), edges, false, inst.k(), inst.budget());
    const auto a = evaluate(inst, s), b = evaluate(shuffled, s);
    CHECK(a.loss == b.loss);
  }
}

TEST_CASE("clean_transfers repairs round-off only") {
  const auto inst = fixtures::example_network();
  const auto alloc = fixtures::uniform_allocation(inst, 2.0);
  Reallocation noisy{A, {{B, A, 1.0 + 1e-10}, {D, A, -1e-13}, {C, B, 1.0}, {C, D, 1.0 + 1e-10}}};
  const auto clean = clean_transfers(inst, alloc, noisy);
  CHECK(find_violations(inst, alloc, clean).empty());
  CHECK(defending_power(inst, alloc, clean, A) == doctest::Approx(3.0));
}

TEST_CASE("instance and strategy text round trip") {
  const auto inst = gen_gnp(9, 0.4, 3);
  std::stringstream io;
  write_instance(io, inst);
  const auto back = read_instance(io);
  CHECK(back.num_nodes() == inst.num_nodes());
  CHECK(back.k() == inst.k());
  CHECK(back.budget() == inst.budget());
  for (std::size_t e = 0; e < inst.num_edges(); ++e) {
    CHECK(back.edges()[e].u == inst.edges()[e].u);
    CHECK(back.edges()[e].w == inst.edges()[e].w);
  }

  std::mt19937_64 rng(5);
  const auto s = fixtures::random_strategy(inst, rng);
  std::stringstream sio;
  write_strategy(sio, s);
  const auto s2 = read_strategy(sio, inst.num_nodes());
  CHECK(s2.allocation.r == s.allocation.r);
  for (std::size_t u = 0; u < s.reallocations.size(); ++u) {
    REQUIRE(s2.reallocations[u].transfers.size() == s.reallocations[u].transfers.size());
    for (std::size_t i = 0; i < s.reallocations[u].transfers.size(); ++i)
      CHECK(s2.reallocations[u].transfers[i].amount == s.reallocations[u].transfers[i].amount);
  }
  CHECK(evaluate(inst, s2).defending_result == evaluate(inst, s).defending_result);

  std::stringstream directed;
  write_instance(directed, Instance({{1, 2}, {3, 4}}, {{1, 0, 0.25}}, true, 0, 1.5));
  const auto d = read_instance(directed);
  CHECK(d.directed());
  CHECK(d.arc_weight(1, 0) == 0.25);
  CHECK(d.arc_weight(0, 1) < 0.0);
}

TEST_CASE("format_real is exact and short") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 2000; ++i) {
    const double v = u(rng) / (1 + i % 17);
    CHECK(std::stod(format_real(v)) == v);
  }
  CHECK(format_real(2.0) == "2");
  CHECK(format_real(0.1) == "0.1");
  // Twelve significant digits survive the text form.
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.11e", std::stod(format_real(1.0 / 3.0)));
  CHECK(std::string(buf) == "3.33333333333e-01");
}

TEST_CASE("malformed text is rejected") {
  std::stringstream bad_header("dca sideways 1 0 1 1\nnode 0 1 1\n");
  CHECK_THROWS(read_instance(bad_header));
  std::stringstream short_nodes("dca undirected 2 0 1 1\nnode 0 1 1\n");
  CHECK_THROWS(read_instance(short_nodes));
  std::stringstream with_comments("# comment\ndca undirected 1 0 0 2 # trailing\nnode 0 1 1\n");
  CHECK(read_instance(with_comments).budget() == 2.0);
  std::stringstream bad_strategy("alloc 5 1\n");
  CHECK_THROWS(read_strategy(bad_strategy, 2));
}
