#pragma once

// Instance generators, brute-force oracles and the batch experiment runner.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dca/netmodel.hpp"

namespace dca {

/// Integer ranges for node data, the weight range and the budget as a
/// fraction of the total threshold.
struct ParamRanges {
  int theta_min = 1;
  int theta_max = 10;
  int alpha_min = 1;
  int alpha_max = 10;
  double w_min = 0.3;
  double w_max = 1.0;
  int k = 1;
  double budget_fraction = 0.5;
};

/// Erdős–Rényi G(n,p), undirected.
Instance gen_gnp(int n, double p, std::uint64_t seed, const ParamRanges& ranges = {});

/// Holme–Kim growth: preferential attachment of `m_attach` edges per new
/// node, each later edge closing a triangle with probability `p_tri`.
Instance gen_powerlaw(int n, int m_attach, double p_tri, std::uint64_t seed,
                      const ParamRanges& ranges = {});

struct SimpleGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
};

/// Vertex-cover gadget: every edge gets a splitting node of value 0,
/// original nodes have value 1, all thresholds 1, all weights 0, k = 1.
Instance gen_vc_gadget(const SimpleGraph& g, double budget = 0.0);

/// Largest number of binary decisions oracle_exact accepts.
inline constexpr std::size_t kOracleMaxDecisions = 24;

/// Optimal defending result by exhaustive search over which nodes each
/// scenario leaves undefended, with joint feasibility LPs built
/// independently of the planner. Throws std::invalid_argument when the
/// instance has more than kOracleMaxDecisions decisions.
double oracle_exact(const Instance& inst);

/// Minimal Loss(u) over all defended subsets of N_k(u) for a fixed
/// allocation, one feasibility LP per subset.
double oracle_reallocation(const Instance& inst, const Allocation& alloc, NodeId u);

/// Smallest budget (to within `precision`) admitting a perfect defence.
double min_perfect_budget(const Instance& inst, double precision);

struct SuiteConfig {
  std::string generator = "gnp";  // gnp | powerlaw | none
  int n = 20;
  double p = 0.1;
  int m_attach = 2;
  double p_tri = 0.5;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<std::string> instance_files;
  ParamRanges ranges;
  std::vector<std::string> algorithms{"greedy", "greedy-r", "ba", "ba-tau", "exact"};
  double epsilon = 0.5;
  int tau_points = 20;
  bool perfect_table = true;
  int threads = 1;
  std::int64_t max_nodes = 1'000'000;
  std::string strategy_dir;  // empty: strategies are not written

  /// Parses `key = value` lines ('#' starts a comment).
  static SuiteConfig parse(std::istream& in);
  static SuiteConfig load(const std::string& path);
};

struct SuiteRow {
  std::string instance;
  std::string algorithm;
  double result = 0.0;
  double runtime_ms = 0.0;
  double budget = 0.0;
  std::string strategy_file;  // set when strategies are written
};

struct PerfectRow {
  std::string instance;
  double total_theta = 0.0;
  double min_budget_isolated = 0.0;  // all weights 0
  double min_budget = 0.0;           // given weights
};

struct SuiteResult {
  std::vector<SuiteRow> rows;
  std::vector<PerfectRow> perfect;
};

/// Named instances produced by a configuration.
std::vector<std::pair<std::string, Instance>> suite_instances(const SuiteConfig& cfg);

SuiteResult run_suite(const SuiteConfig& cfg);

void write_results_csv(std::ostream& out, const std::vector<SuiteRow>& rows);
void write_perfect_csv(std::ostream& out, const std::vector<PerfectRow>& rows);

}  // namespace dca
