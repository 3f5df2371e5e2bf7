#include <atomic>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dca/harness.hpp"
#include "dca/planner.hpp"

namespace dca {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw std::invalid_argument("config: bad value for " + key + ": '" + text + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": '" + text + "'");
}

std::string number_tag(double v) {
  auto s = format_real(v);
  for (auto& c : s)
    if (c == '.') c = 'p';
  return s;
}

}  // namespace

SuiteConfig SuiteConfig::parse(std::istream& in) {
  SuiteConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto val = trim(line.substr(eq + 1));
    auto& pr = cfg.ranges;
    if (key == "generator") cfg.generator = val;
    else if (key == "n") cfg.n = parse_number<int>(key, val);
    else if (key == "p") cfg.p = parse_number<double>(key, val);
    else if (key == "m_attach") cfg.m_attach = parse_number<int>(key, val);
    else if (key == "p_tri") cfg.p_tri = parse_number<double>(key, val);
    else if (key == "seeds") {
      cfg.seeds.clear();
      for (const auto& s : split_list(val)) cfg.seeds.push_back(parse_number<std::uint64_t>(key, s));
    } else if (key == "instance") cfg.instance_files.push_back(val);
    else if (key == "k") pr.k = parse_number<int>(key, val);
    else if (key == "budget_fraction") pr.budget_fraction = parse_number<double>(key, val);
    else if (key == "theta_min") pr.theta_min = parse_number<int>(key, val);
    else if (key == "theta_max") pr.theta_max = parse_number<int>(key, val);
    else if (key == "alpha_min") pr.alpha_min = parse_number<int>(key, val);
    else if (key == "alpha_max") pr.alpha_max = parse_number<int>(key, val);
    else if (key == "w_min") pr.w_min = parse_number<double>(key, val);
    else if (key == "w_max") pr.w_max = parse_number<double>(key, val);
    else if (key == "algorithms") cfg.algorithms = split_list(val);
    else if (key == "epsilon") cfg.epsilon = parse_number<double>(key, val);
    else if (key == "tau_points") cfg.tau_points = parse_number<int>(key, val);
    else if (key == "perfect_table") cfg.perfect_table = parse_bool(key, val);
    else if (key == "threads") cfg.threads = parse_number<int>(key, val);
    else if (key == "max_nodes") cfg.max_nodes = parse_number<std::int64_t>(key, val);
    else if (key == "strategy_dir") cfg.strategy_dir = val;
    else throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  for (const auto& a : cfg.algorithms) {
    if (a != "greedy" && a != "greedy-r" && a != "ba" && a != "ba-tau" && a != "ba-grid" &&
        a != "ba-tau-grid" && a != "exact")
      throw std::invalid_argument("config: unknown algorithm '" + a + "'");
  }
  if (cfg.generator != "gnp" && cfg.generator != "powerlaw" && cfg.generator != "none")
    throw std::invalid_argument("config: unknown generator '" + cfg.generator + "'");
  if (cfg.threads < 1) cfg.threads = 1;
  return cfg;
}

SuiteConfig SuiteConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  return parse(in);
}

std::vector<std::pair<std::string, Instance>> suite_instances(const SuiteConfig& cfg) {
  std::vector<std::pair<std::string, Instance>> out;
  if (cfg.generator == "gnp") {
    for (auto seed : cfg.seeds)
      out.emplace_back("gnp-n" + std::to_string(cfg.n) + "-p" + number_tag(cfg.p) + "-s" +
                           std::to_string(seed),
                       gen_gnp(cfg.n, cfg.p, seed, cfg.ranges));
  } else if (cfg.generator == "powerlaw") {
    for (auto seed : cfg.seeds)
      out.emplace_back("pl-n" + std::to_string(cfg.n) + "-m" + std::to_string(cfg.m_attach) +
                           "-q" + number_tag(cfg.p_tri) + "-s" + std::to_string(seed),
                       gen_powerlaw(cfg.n, cfg.m_attach, cfg.p_tri, seed, cfg.ranges));
  }
  for (const auto& path : cfg.instance_files)
    out.emplace_back(std::filesystem::path(path).stem().string(), load_instance(path));
  return out;
}

namespace {

DefendingStrategy run_algorithm(const std::string& algo, const Instance& inst,
                                const SuiteConfig& cfg) {
  PlannerConfig pc;
  pc.tau_points = cfg.tau_points;
  pc.solver.max_nodes = cfg.max_nodes;
  pc.seed_epsilon = cfg.epsilon;
  if (algo == "greedy") return greedy(inst);
  if (algo == "greedy-r") return greedy_r(inst);
  if (algo == "ba") return ba_epsilon(inst, cfg.epsilon, pc.solver).strategy;
  if (algo == "ba-tau") return ba_epsilon_tau(inst, cfg.epsilon, cfg.tau_points, pc.solver).strategy;
  if (algo == "ba-grid") return ba_grid(inst, false, pc).strategy;
  if (algo == "ba-tau-grid") return ba_grid(inst, true, pc).strategy;
  return solve_exact(inst, pc).strategy;
}

// Runs `jobs` on `threads` workers; each job writes only its own slot.
void parallel_for(std::size_t jobs, int threads, const std::function<void(std::size_t)>& body) {
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs;) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(threads), jobs);
  for (std::size_t t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace

SuiteResult run_suite(const SuiteConfig& cfg) {
  const auto instances = suite_instances(cfg);
  if (!cfg.strategy_dir.empty()) {
    std::filesystem::create_directories(cfg.strategy_dir);
    for (const auto& [name, inst] : instances)
      save_instance((std::filesystem::path(cfg.strategy_dir) / (name + ".dca")).string(), inst);
  }

  SuiteResult res;
  res.rows.resize(instances.size() * cfg.algorithms.size());
  parallel_for(res.rows.size(), cfg.threads, [&](std::size_t cell) {
    const auto& [name, inst] = instances[cell / cfg.algorithms.size()];
    const auto& algo = cfg.algorithms[cell % cfg.algorithms.size()];
    const auto start = std::chrono::steady_clock::now();
    const auto strategy = run_algorithm(algo, inst, cfg);
    const auto stop = std::chrono::steady_clock::now();
    SuiteRow row{name, algo, evaluate(inst, strategy).defending_result,
                 std::chrono::duration<double, std::milli>(stop - start).count(), inst.budget(),
                 {}};
    if (!cfg.strategy_dir.empty()) {
      row.strategy_file =
          (std::filesystem::path(cfg.strategy_dir) / (name + "." + algo + ".strategy")).string();
      save_strategy(row.strategy_file, strategy);
    }
    res.rows[cell] = std::move(row);
  });

  if (cfg.perfect_table) {
    res.perfect.resize(instances.size());
    parallel_for(instances.size(), cfg.threads, [&](std::size_t i) {
      const auto& [name, inst] = instances[i];
      const double precision = 1e-3 * std::max(inst.total_theta(), 1e-12);
      res.perfect[i] = PerfectRow{name, inst.total_theta(),
                                  min_perfect_budget(inst.with_zero_weights(), precision),
                                  min_perfect_budget(inst, precision)};
    });
  }
  return res;
}

void write_results_csv(std::ostream& out, const std::vector<SuiteRow>& rows) {
  out << "instance,algorithm,result,runtime_ms,budget\n";
  for (const auto& r : rows)
    out << r.instance << ',' << r.algorithm << ',' << format_real(r.result) << ','
        << format_real(r.runtime_ms) << ',' << format_real(r.budget) << '\n';
}

void write_perfect_csv(std::ostream& out, const std::vector<PerfectRow>& rows) {
  out << "instance,total_theta,min_budget_w0,min_budget\n";
  for (const auto& r : rows)
    out << r.instance << ',' << format_real(r.total_theta) << ','
        << format_real(r.min_budget_isolated) << ',' << format_real(r.min_budget) << '\n';
}

}  // namespace dca
