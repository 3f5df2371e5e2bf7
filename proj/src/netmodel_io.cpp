#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "dca/netmodel.hpp"

namespace dca {

namespace {

struct LineReader {
  std::istream& in;
  std::size_t line_no = 0;

  // Next non-empty line with comments stripped, split on whitespace.
  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream ss(line);
      tokens.clear();
      for (std::string tok; ss >> tok;) tokens.push_back(tok);
      if (!tokens.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw std::runtime_error("line " + std::to_string(line_no) + ": " + what);
  }
};

double parse_real(const LineReader& rd, const std::string& tok) {
  double value = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) rd.fail("expected a number, got '" + tok + "'");
  return value;
}

long long parse_int(const LineReader& rd, const std::string& tok) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    rd.fail("expected an integer, got '" + tok + "'");
  return value;
}

NodeId parse_node(const LineReader& rd, const std::string& tok, std::size_t n) {
  const long long v = parse_int(rd, tok);
  if (v < 0 || static_cast<std::size_t>(v) >= n) rd.fail("node id out of range: " + tok);
  return static_cast<NodeId>(v);
}

}  // namespace

std::string format_real(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) return std::to_string(value);
  return std::string(buf, ptr);
}

Instance read_instance(std::istream& in) {
  LineReader rd{in};
  std::vector<std::string> tok;
  if (!rd.next(tok)) throw std::runtime_error("empty instance file");
  if (tok.size() != 6 || tok[0] != "dca")
    rd.fail("header must be 'dca <directed|undirected> n m k R'");
  bool directed = false;
  if (tok[1] == "directed")
    directed = true;
  else if (tok[1] != "undirected")
    rd.fail("graph kind must be 'directed' or 'undirected'");
  const long long n = parse_int(rd, tok[2]);
  const long long m = parse_int(rd, tok[3]);
  const long long k = parse_int(rd, tok[4]);
  const double budget = parse_real(rd, tok[5]);
  if (n < 0 || m < 0 || k < 0) rd.fail("n, m and k must be non-negative");

  std::vector<Node> nodes(static_cast<std::size_t>(n));
  std::vector<bool> have(static_cast<std::size_t>(n), false);
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  long long node_lines = 0;
  while (rd.next(tok)) {
    if (tok[0] == "node") {
      if (tok.size() != 4) rd.fail("expected 'node <id> <theta> <alpha>'");
      const NodeId id = parse_node(rd, tok[1], nodes.size());
      if (have[static_cast<std::size_t>(id)]) rd.fail("node " + tok[1] + " listed twice");
      have[static_cast<std::size_t>(id)] = true;
      nodes[static_cast<std::size_t>(id)] = {parse_real(rd, tok[2]), parse_real(rd, tok[3])};
      ++node_lines;
    } else if (tok[0] == "edge") {
      if (tok.size() != 4) rd.fail("expected 'edge <u> <v> <w>'");
      edges.push_back({parse_node(rd, tok[1], nodes.size()), parse_node(rd, tok[2], nodes.size()),
                       parse_real(rd, tok[3])});
    } else {
      rd.fail("unknown record '" + tok[0] + "'");
    }
  }
  if (node_lines != n)
    throw std::runtime_error("instance declares " + std::to_string(n) + " nodes but lists " +
                             std::to_string(node_lines));
  if (static_cast<long long>(edges.size()) != m)
    throw std::runtime_error("instance declares " + std::to_string(m) + " edges but lists " +
                             std::to_string(edges.size()));
  return Instance(std::move(nodes), std::move(edges), directed, static_cast<int>(k), budget);
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file " + path);
  return read_instance(in);
}

void write_instance(std::ostream& out, const Instance& inst) {
  out << "dca " << (inst.directed() ? "directed" : "undirected") << ' ' << inst.num_nodes()
      << ' ' << inst.num_edges() << ' ' << inst.k() << ' ' << format_real(inst.budget())
      << '\n';
  for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
    const auto& nd = inst.nodes()[v];
    out << "node " << v << ' ' << format_real(nd.theta) << ' ' << format_real(nd.alpha)
        << '\n';
  }
  for (const auto& e : inst.edges())
    out << "edge " << e.u << ' ' << e.v << ' ' << format_real(e.w) << '\n';
}

void save_instance(const std::string& path, const Instance& inst) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_instance(out, inst);
}

DefendingStrategy read_strategy(std::istream& in, std::size_t num_nodes) {
  LineReader rd{in};
  std::vector<std::string> tok;
  DefendingStrategy s;
  s.allocation.r.assign(num_nodes, 0.0);
  std::vector<Reallocation> blocks(num_nodes);
  std::vector<bool> have_block(num_nodes, false);
  Reallocation* current = nullptr;
  while (rd.next(tok)) {
    if (tok[0] == "alloc") {
      if (tok.size() != 3) rd.fail("expected 'alloc <id> <r>'");
      const NodeId id = parse_node(rd, tok[1], num_nodes);
      s.allocation.r[static_cast<std::size_t>(id)] = parse_real(rd, tok[2]);
    } else if (tok[0] == "realloc") {
      if (tok.size() != 2) rd.fail("expected 'realloc <attacked>'");
      const NodeId id = parse_node(rd, tok[1], num_nodes);
      if (have_block[static_cast<std::size_t>(id)]) rd.fail("duplicate realloc block " + tok[1]);
      have_block[static_cast<std::size_t>(id)] = true;
      current = &blocks[static_cast<std::size_t>(id)];
      current->attacked = id;
    } else if (tok[0] == "t") {
      if (tok.size() != 4) rd.fail("expected 't <u> <v> <amount>'");
      if (current == nullptr) rd.fail("transfer outside a realloc block");
      current->transfers.push_back({parse_node(rd, tok[1], num_nodes),
                                    parse_node(rd, tok[2], num_nodes), parse_real(rd, tok[3])});
    } else {
      rd.fail("unknown record '" + tok[0] + "'");
    }
  }
  for (std::size_t u = 0; u < num_nodes; ++u) {
    if (!have_block[u]) blocks[u] = null_reallocation(static_cast<NodeId>(u));
  }
  s.reallocations = std::move(blocks);
  return s;
}

DefendingStrategy load_strategy(const std::string& path, std::size_t num_nodes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open strategy file " + path);
  return read_strategy(in, num_nodes);
}

void write_strategy(std::ostream& out, const DefendingStrategy& strategy) {
  const auto& r = strategy.allocation.r;
  for (std::size_t v = 0; v < r.size(); ++v)
    out << "alloc " << v << ' ' << format_real(r[v]) << '\n';
  for (const auto& re : strategy.reallocations) {
    out << "realloc " << re.attacked << '\n';
    for (const auto& t : re.transfers)
      out << "t " << t.from << ' ' << t.to << ' ' << format_real(t.amount) << '\n';
  }
}

void save_strategy(const std::string& path, const DefendingStrategy& strategy) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_strategy(out, strategy);
}

}  // namespace dca
