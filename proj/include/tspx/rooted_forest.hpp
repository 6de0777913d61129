#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "tspx/metric.hpp"
#include "tspx/rng.hpp"

namespace tspx {

class EmptyTerminalSet : public InputError {
 public:
  explicit EmptyTerminalSet(const std::string& what) : InputError(what) {}
};

class InvalidCover : public InputError {
 public:
  explicit InvalidCover(const std::string& what) : InputError(what) {}
};

// Spanning forest in which every component holds exactly one terminal.
struct RootedForest {
  std::vector<MultiEdge> edges;
  std::vector<int> component_root;  // node -> the terminal of its component
  Rational total_cost;
};

namespace detail {

struct Dsu {
  std::vector<int> parent;
  explicit Dsu(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

// Kruskal on the graph with T contracted to a single node; loops produced by
// the contraction can never join components and are skipped. Ties break on
// the original edge id.
inline RootedForest rooted_forest_kruskal(int n, const std::vector<MultiEdge>& edges,
                                          const std::vector<int>& terminals) {
  if (terminals.empty()) throw EmptyTerminalSet("terminal set must be nonempty");
  std::vector<bool> is_terminal(n, false);
  for (int t : terminals) {
    if (t < 0 || t >= n) throw InputError("terminal id out of range");
    is_terminal[t] = true;
  }
  Dsu dsu(n);
  for (int t : terminals) dsu.unite(terminals.front(), t);
  std::vector<int> order(edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (edges[a].cost != edges[b].cost) return edges[a].cost < edges[b].cost;
    return a < b;
  });
  RootedForest forest;
  forest.total_cost = 0;
  for (int id : order) {
    const auto& e = edges[id];
    if (dsu.find(e.u) == dsu.find(e.v)) continue;
    dsu.unite(e.u, e.v);
    forest.edges.push_back(e);
    forest.total_cost += e.cost;
  }
  for (int v = 0; v < n; ++v)
    if (dsu.find(v) != dsu.find(terminals.front()))
      throw DisconnectedGraph("node " + std::to_string(v) + " cannot reach a terminal");
  // locate each component's terminal by walking the forest from the terminals
  forest.component_root.assign(n, -1);
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : forest.edges) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  std::vector<int> stack;
  for (int t : terminals) {
    if (forest.component_root[t] != -1)
      throw InternalError("forest joined two terminals");
    forest.component_root[t] = t;
    stack.push_back(t);
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int w : adj[u])
        if (forest.component_root[w] == -1) {
          forest.component_root[w] = t;
          stack.push_back(w);
        }
    }
  }
  for (int v = 0; v < n; ++v)
    if (forest.component_root[v] == -1)
      throw InternalError("forest left a node unassigned");
  return forest;
}

inline std::vector<MultiEdge> complete_graph_edges(const MetricInstance& m) {
  std::vector<MultiEdge> edges;
  for (int u = 0; u < m.n(); ++u)
    for (int v = u + 1; v < m.n(); ++v) edges.push_back({u, v, m.d(u, v)});
  return edges;
}

}  // namespace detail

inline RootedForest min_rooted_forest(const WeightedMultigraph& g,
                                      const std::vector<int>& terminals) {
  return detail::rooted_forest_kruskal(g.n, g.edges, terminals);
}

inline RootedForest min_rooted_forest(const MetricInstance& m,
                                      const std::vector<int>& terminals) {
  return detail::rooted_forest_kruskal(m.n(), detail::complete_graph_edges(m), terminals);
}

inline Rational rooted_forest_cost(const MetricInstance& m, const std::vector<int>& terminals) {
  return min_rooted_forest(m, terminals).total_cost;
}

// drop_T(S) = c_T - c_{T ∪ S}, the saving from promoting S to terminals.
inline Rational drop_value(const MetricInstance& m, const std::vector<int>& terminals,
                           const std::vector<int>& promoted) {
  std::set<int> t_set(terminals.begin(), terminals.end());
  for (int v : promoted)
    if (t_set.count(v)) throw InputError("promoted set must be disjoint from terminals");
  std::vector<int> merged = terminals;
  for (int v : promoted)
    if (t_set.insert(v).second) merged.push_back(v);
  Rational drop = rooted_forest_cost(m, terminals) - rooted_forest_cost(m, merged);
  if (drop < 0) throw InternalError("negative drop value");
  return drop;
}

struct CoverSet {
  std::vector<int> nodes;  // subset of V \ T
  Rational weight;         // z_S >= 0
};

using FractionalCover = std::vector<CoverSet>;

struct CoverInequalityReport {
  bool holds = false;
  Rational forest_cost;    // c_T
  Rational weighted_drop;  // sum of drop_T(S) * z_S
  Rational slack;          // weighted_drop - forest_cost
};

// c_T <= sum_S drop_T(S) * z_S for every fractional cover of V \ T. A false
// result signals a bug in the forest or drop computation, not bad input.
inline CoverInequalityReport check_cover_inequality(const MetricInstance& m,
                                                    const std::vector<int>& terminals,
                                                    const FractionalCover& cover) {
  std::set<int> t_set(terminals.begin(), terminals.end());
  std::vector<Rational> coverage(m.n(), Rational(0));
  for (const auto& cs : cover) {
    if (cs.weight < 0) throw InvalidCover("cover weight negative");
    for (int v : cs.nodes) {
      if (v < 0 || v >= m.n()) throw InvalidCover("cover node out of range");
      if (t_set.count(v)) throw InvalidCover("cover set touches a terminal");
      coverage[v] += cs.weight;
    }
  }
  for (int v = 0; v < m.n(); ++v)
    if (!t_set.count(v) && coverage[v] < 1)
      throw InvalidCover("node " + std::to_string(v) + " covered below 1");
  CoverInequalityReport report;
  report.forest_cost = rooted_forest_cost(m, terminals);
  report.weighted_drop = 0;
  for (const auto& cs : cover)
    if (cs.weight > 0) report.weighted_drop += drop_value(m, terminals, cs.nodes) * cs.weight;
  report.slack = report.weighted_drop - report.forest_cost;
  report.holds = report.forest_cost <= report.weighted_drop;
  return report;
}

struct BridgeReport {
  int trials = 0;
  Rational forest_cost;       // c_T
  double gamma = 0.0;         // analytic miss bound
  Rational empirical_mean;    // exact average of c_{T ∪ S}
  double stddev = 0.0;
  double threshold = 0.0;     // gamma * c_T + 3 * stddev / sqrt(trials)
  bool pass = false;
  bool per_sample_monotone = true;  // c_{T ∪ S} <= c_T on every sample
};

// Monte-Carlo check of E[c_{T ∪ S}] <= gamma * c_T for a caller-supplied
// subset sampler whose per-node miss probability is at most gamma.
inline BridgeReport bridge_montecarlo(
    const MetricInstance& m, const std::vector<int>& terminals,
    const std::function<std::vector<int>(CounterRng&)>& sampler, double gamma,
    int trials, std::uint64_t seed) {
  BridgeReport report;
  report.trials = trials;
  report.gamma = gamma;
  report.forest_cost = rooted_forest_cost(m, terminals);
  Rational sum = 0;
  double sum_sq = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    CounterRng rng = CounterRng::stream(seed, static_cast<std::uint64_t>(trial));
    std::vector<int> sampled = sampler(rng);
    std::vector<int> merged = terminals;
    std::set<int> t_set(terminals.begin(), terminals.end());
    for (int v : sampled)
      if (t_set.insert(v).second) merged.push_back(v);
    Rational cost = rooted_forest_cost(m, merged);
    if (cost > report.forest_cost) report.per_sample_monotone = false;
    sum += cost;
    double c = to_double(cost);
    sum_sq += c * c;
  }
  report.empirical_mean = sum / trials;
  double mean = to_double(report.empirical_mean);
  double variance = std::max(0.0, sum_sq / trials - mean * mean);
  report.stddev = std::sqrt(variance);
  report.threshold = gamma * to_double(report.forest_cost) +
                     3.0 * report.stddev / std::sqrt(static_cast<double>(trials));
  report.pass = mean <= report.threshold && report.per_sample_monotone;
  return report;
}

// Independent-inclusion sampler over V \ T with an exact rational miss
// probability of floor(gamma * 10^6) / 10^6 <= gamma per node.
struct IndependentMissSampler {
  std::vector<int> free_nodes;
  std::uint64_t miss_numerator = 0;  // out of 10^6

  static IndependentMissSampler from_gamma(const MetricInstance& m,
                                           const std::vector<int>& terminals, double gamma) {
    IndependentMissSampler s;
    std::set<int> t_set(terminals.begin(), terminals.end());
    for (int v = 0; v < m.n(); ++v)
      if (!t_set.count(v)) s.free_nodes.push_back(v);
    if (gamma < 0 || gamma > 1) throw InputError("gamma must lie in [0, 1]");
    s.miss_numerator = static_cast<std::uint64_t>(std::floor(gamma * 1000000.0));
    return s;
  }

  Rational miss_probability() const {
    Rational q(static_cast<unsigned long>(miss_numerator), 1000000ul);
    q.canonicalize();
    return q;
  }

  std::vector<int> operator()(CounterRng& rng) const {
    std::vector<int> sampled;
    for (int v : free_nodes)
      if (rng.next_below(1000000) >= miss_numerator) sampled.push_back(v);
    return sampled;
  }
};

// Exact expectation of c_{T ∪ S} under independent per-node miss
// probabilities, by enumerating all subsets of V \ T.
inline Rational exact_bridge_expectation(const MetricInstance& m,
                                         const std::vector<int>& terminals,
                                         const std::vector<int>& free_nodes,
                                         const Rational& miss_probability) {
  if (free_nodes.size() > 20) throw InputError("too many free nodes to enumerate");
  const int f = static_cast<int>(free_nodes.size());
  Rational expectation = 0;
  const Rational include = Rational(1) - miss_probability;
  for (unsigned mask = 0; mask < (1u << f); ++mask) {
    Rational probability = 1;
    std::vector<int> merged = terminals;
    for (int b = 0; b < f; ++b) {
      if (mask & (1u << b)) {
        probability *= include;
        merged.push_back(free_nodes[b]);
      } else {
        probability *= miss_probability;
      }
    }
    expectation += probability * rooted_forest_cost(m, merged);
  }
  return expectation;
}

// One simple cycle per multi-node component, from a depth-first walk of the
// doubled component tree; singleton components yield nothing.
inline std::vector<std::pair<int, std::vector<int>>> double_forest_to_cycles(
    const RootedForest& forest) {
  const int n = static_cast<int>(forest.component_root.size());
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : forest.edges) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  std::set<int> roots(forest.component_root.begin(), forest.component_root.end());
  std::vector<std::pair<int, std::vector<int>>> cycles;
  for (int root : roots) {
    std::vector<int> cycle;
    std::vector<bool> seen(n, false);
    std::function<void(int)> dfs = [&](int u) {
      seen[u] = true;
      cycle.push_back(u);
      for (int w : adj[u])
        if (!seen[w]) dfs(w);
    };
    dfs(root);
    if (cycle.size() >= 2) cycles.push_back({root, std::move(cycle)});
  }
  return cycles;
}

}  // namespace tspx
