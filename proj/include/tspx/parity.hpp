#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tspx/instance.hpp"
#include "tspx/metric.hpp"

namespace tspx {

class OddSetTooLarge : public InputError {
 public:
  explicit OddSetTooLarge(const std::string& what) : InputError(what) {}
};

class OddCardinality : public InputError {
 public:
  explicit OddCardinality(const std::string& what) : InputError(what) {}
};

class OddDegreePresent : public InputError {
 public:
  explicit OddDegreePresent(const std::string& what) : InputError(what) {}
};

class Disconnected : public InputError {
 public:
  explicit Disconnected(const std::string& what) : InputError(what) {}
};

class AnchorNotOnAnyPath : public InputError {
 public:
  explicit AnchorNotOnAnyPath(const std::string& what) : InputError(what) {}
};

class ComponentNotAnchored : public InternalError {
 public:
  explicit ComponentNotAnchored(const std::string& what) : InternalError(what) {}
};

// Odd-degree nodes of the edge multiset; loops contribute two to the degree.
inline std::vector<int> odd_degree_nodes(const WeightedMultigraph& mg) {
  std::vector<int> degree(mg.n, 0);
  for (const auto& e : mg.edges) {
    degree[e.u] += 1;
    degree[e.v] += 1;
  }
  std::vector<int> odd;
  for (int v = 0; v < mg.n; ++v)
    if (degree[v] % 2 == 1) odd.push_back(v);
  if (odd.size() % 2 != 0) throw InternalError("odd-degree set has odd cardinality");
  return odd;
}

struct MatchingResult {
  std::vector<std::pair<int, int>> edges;
  Rational cost;
  bool heuristic = false;  // set when the greedy fallback produced the result
};

struct MatchingOptions {
  int exact_cap = 22;
  bool allow_greedy = false;
};

// Minimum-cost perfect matching on the odd set by subset DP, with a
// lexicographically smallest matching among optima. In a metric this equals
// the minimum O-join: shortcutting a join's path decomposition can only
// shrink it to a matching.
inline MatchingResult min_weight_perfect_matching(const MetricInstance& m,
                                                  const std::vector<int>& odd_set,
                                                  const MatchingOptions& opts = {}) {
  MatchingResult result;
  result.cost = 0;
  if (odd_set.size() % 2 != 0)
    throw OddCardinality("perfect matching needs an even node set");
  if (odd_set.empty()) return result;
  std::vector<int> nodes = odd_set;
  std::sort(nodes.begin(), nodes.end());
  const int s = static_cast<int>(nodes.size());
  if (s > opts.exact_cap) {
    if (!opts.allow_greedy)
      throw OddSetTooLarge("odd set of size " + std::to_string(s) +
                           " exceeds the exact cap; enable the greedy heuristic");
    // greedy fallback: cheapest available pair first; no optimality claim
    result.heuristic = true;
    std::vector<bool> used(s, false);
    for (int done = 0; done < s / 2; ++done) {
      int bu = -1, bv = -1;
      Rational best;
      for (int a = 0; a < s; ++a) {
        if (used[a]) continue;
        for (int b = a + 1; b < s; ++b) {
          if (used[b]) continue;
          const Rational& c = m.d(nodes[a], nodes[b]);
          if (bu == -1 || c < best) {
            best = c;
            bu = a;
            bv = b;
          }
        }
      }
      used[bu] = used[bv] = true;
      result.edges.push_back({nodes[bu], nodes[bv]});
      result.cost += best;
    }
    return result;
  }
  const unsigned full = (1u << s) - 1;
  std::vector<Rational> dp(1u << s, Rational(-1));
  dp[0] = 0;
  for (unsigned mask = 1; mask <= full; ++mask) {
    int bits = __builtin_popcount(mask);
    if (bits % 2 != 0) continue;
    int u = __builtin_ctz(mask);
    for (int v = u + 1; v < s; ++v) {
      if (!(mask & (1u << v))) continue;
      unsigned rest = mask & ~(1u << u) & ~(1u << v);
      if (dp[rest] < 0) continue;
      Rational candidate = dp[rest] + m.d(nodes[u], nodes[v]);
      if (dp[mask] < 0 || candidate < dp[mask]) dp[mask] = std::move(candidate);
    }
  }
  unsigned mask = full;
  while (mask != 0) {
    int u = __builtin_ctz(mask);
    for (int v = u + 1; v < s; ++v) {
      if (!(mask & (1u << v))) continue;
      unsigned rest = mask & ~(1u << u) & ~(1u << v);
      if (dp[rest] >= 0 && dp[rest] + m.d(nodes[u], nodes[v]) == dp[mask]) {
        result.edges.push_back({nodes[u], nodes[v]});
        result.cost += m.d(nodes[u], nodes[v]);
        mask = rest;
        break;
      }
    }
  }
  return result;
}

// Hierholzer's algorithm; closed walk repeating the start node at the end.
// Deterministic: adjacency follows edge insertion order.
inline std::vector<int> eulerian_circuit(const WeightedMultigraph& mg) {
  std::vector<int> degree(mg.n, 0);
  std::vector<std::vector<std::pair<int, int>>> adj(mg.n);  // (other end, edge id)
  for (std::size_t id = 0; id < mg.edges.size(); ++id) {
    const auto& e = mg.edges[id];
    adj[e.u].push_back({e.v, static_cast<int>(id)});
    adj[e.v].push_back({e.u, static_cast<int>(id)});
    degree[e.u] += 1;
    degree[e.v] += 1;
  }
  int start = -1;
  for (int v = 0; v < mg.n; ++v) {
    if (degree[v] % 2 != 0)
      throw OddDegreePresent("node " + std::to_string(v) + " has odd degree");
    if (start == -1 && degree[v] > 0) start = v;
  }
  if (start == -1) return {};
  std::vector<bool> used(mg.edges.size(), false);
  std::vector<std::size_t> next(mg.n, 0);
  std::vector<int> stack{start}, circuit;
  while (!stack.empty()) {
    int v = stack.back();
    while (next[v] < adj[v].size() && used[adj[v][next[v]].second]) ++next[v];
    if (next[v] == adj[v].size()) {
      circuit.push_back(v);
      stack.pop_back();
    } else {
      auto [w, id] = adj[v][next[v]];
      used[id] = true;
      stack.push_back(w);
    }
  }
  if (circuit.size() != mg.edges.size() + 1)
    throw Disconnected("multigraph with edges outside the start component");
  std::reverse(circuit.begin(), circuit.end());
  return circuit;
}

// Euler trail from s to t (s and t must be the only odd-degree nodes, or the
// graph must be fully even with s == t).
inline std::vector<int> euler_trail(const WeightedMultigraph& mg, int s, int t) {
  std::vector<int> degree(mg.n, 0);
  std::vector<std::vector<std::pair<int, int>>> adj(mg.n);
  for (std::size_t id = 0; id < mg.edges.size(); ++id) {
    const auto& e = mg.edges[id];
    adj[e.u].push_back({e.v, static_cast<int>(id)});
    adj[e.v].push_back({e.u, static_cast<int>(id)});
    degree[e.u] += 1;
    degree[e.v] += 1;
  }
  for (int v = 0; v < mg.n; ++v) {
    bool should_be_odd = (s != t) && (v == s || v == t);
    if ((degree[v] % 2 == 1) != should_be_odd)
      throw OddDegreePresent("degree parity does not admit an s-t trail");
  }
  std::vector<bool> used(mg.edges.size(), false);
  std::vector<std::size_t> next(mg.n, 0);
  std::vector<int> stack{s}, walk;
  while (!stack.empty()) {
    int v = stack.back();
    while (next[v] < adj[v].size() && used[adj[v][next[v]].second]) ++next[v];
    if (next[v] == adj[v].size()) {
      walk.push_back(v);
      stack.pop_back();
    } else {
      auto [w, id] = adj[v][next[v]];
      used[id] = true;
      stack.push_back(w);
    }
  }
  if (walk.size() != mg.edges.size() + 1)
    throw Disconnected("multigraph with edges outside the trail component");
  std::reverse(walk.begin(), walk.end());
  if (walk.front() != s || walk.back() != t)
    throw InternalError("euler trail endpoints wrong");
  return walk;
}

// Splices each cycle into the first path holding its anchor, at the anchor's
// first occurrence, then shortcuts every path keeping its endpoint last.
inline std::vector<std::vector<int>> graft_cycles_into_paths(
    std::vector<std::vector<int>> paths,
    const std::vector<std::pair<int, std::vector<int>>>& cycles) {
  std::vector<int> endpoints;
  endpoints.reserve(paths.size());
  for (const auto& p : paths) {
    if (p.empty()) throw InputError("empty path");
    endpoints.push_back(p.back());
  }
  for (const auto& [anchor, cycle] : cycles) {
    auto rotated = cycle;
    auto at = std::find(rotated.begin(), rotated.end(), anchor);
    if (at == rotated.end()) throw InputError("anchor missing from its cycle");
    std::rotate(rotated.begin(), at, rotated.end());
    bool placed = false;
    for (auto& path : paths) {
      auto pos = std::find(path.begin(), path.end(), anchor);
      if (pos == path.end()) continue;
      // detour: anchor, cycle nodes, back to anchor, then the old suffix
      std::vector<int> walk(path.begin(), pos + 1);
      walk.insert(walk.end(), rotated.begin() + 1, rotated.end());
      walk.push_back(anchor);
      walk.insert(walk.end(), pos + 1, path.end());
      path = std::move(walk);
      placed = true;
      break;
    }
    if (!placed) throw AnchorNotOnAnyPath("cycle anchor lies on no path");
  }
  for (std::size_t i = 0; i < paths.size(); ++i)
    paths[i] = shortcut_walk(paths[i], endpoints[i]);
  return paths;
}

// Turns the sampled branchings' walks plus the even multigraph (leftover
// branching edges, forest edges and the parity join) into a feasible ordered
// tour: per-component Euler circuits become simple cycles, each is grafted
// into a walk sharing a node with it, the walks are concatenated in order and
// the closed walk is shortcut while protecting one designated visit per
// marker node.
inline SolutionTour assemble_otsp_tour(std::vector<std::vector<int>> walks,
                                       const WeightedMultigraph& extra_edges,
                                       const std::vector<std::pair<int, int>>& join,
                                       const MetricInstance& metric) {
  const int n = metric.n();
  const int k = static_cast<int>(walks.size());
  if (k == 0) throw InputError("need at least one walk");
  for (int i = 0; i < k; ++i) {
    if (walks[i].empty()) throw InternalError("empty walk");
    if (walks[i].back() != walks[(i + 1) % k].front())
      throw InternalError("walk endpoints do not chain in order");
  }

  WeightedMultigraph even = extra_edges;
  even.n = n;
  for (const auto& [u, v] : join) even.add_edge(u, v, metric.d(u, v));
  std::vector<int> degree(n, 0);
  for (const auto& e : even.edges) {
    degree[e.u] += 1;
    degree[e.v] += 1;
  }
  for (int v = 0; v < n; ++v)
    if (degree[v] % 2 != 0)
      throw InternalError("parity correction left an odd-degree node");

  // connected components of the even multigraph, by smallest member
  std::vector<int> component(n, -1);
  std::vector<std::vector<int>> clusters;
  for (int v = 0; v < n; ++v) {
    if (component[v] != -1 || degree[v] == 0) continue;
    std::vector<int> nodes{v}, stack{v};
    component[v] = static_cast<int>(clusters.size());
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (const auto& e : even.edges) {
        int other = -1;
        if (e.u == u) other = e.v;
        if (e.v == u) other = e.u;
        if (other != -1 && component[other] == -1) {
          component[other] = component[v];
          nodes.push_back(other);
          stack.push_back(other);
        }
      }
    }
    clusters.push_back(std::move(nodes));
  }

  for (const auto& cluster : clusters) {
    WeightedMultigraph sub;
    sub.n = n;
    std::set<int> members(cluster.begin(), cluster.end());
    for (const auto& e : even.edges)
      if (members.count(e.u)) sub.add_edge(e.u, e.v, e.cost);
    std::vector<int> circuit = eulerian_circuit(sub);
    std::vector<int> cycle = shortcut_walk(circuit);
    // graft at the first shared node over walks in order
    int target = -1, anchor = -1;
    for (int i = 0; i < k && target == -1; ++i)
      for (int node : walks[i])
        if (members.count(node)) {
          target = i;
          anchor = node;
          break;
        }
    if (target == -1)
      throw ComponentNotAnchored("even component shares no node with the walks");
    auto rotated = cycle;
    auto at = std::find(rotated.begin(), rotated.end(), anchor);
    std::rotate(rotated.begin(), at, rotated.end());
    auto& walk = walks[target];
    auto pos = std::find(walk.begin(), walk.end(), anchor);
    std::vector<int> spliced(walk.begin(), pos + 1);
    spliced.insert(spliced.end(), rotated.begin() + 1, rotated.end());
    spliced.push_back(anchor);
    spliced.insert(spliced.end(), pos + 1, walk.end());
    walk = std::move(spliced);
  }

  // concatenate the walks and record the designated marker visits
  std::vector<int> closed;
  std::map<int, std::size_t> designated;  // marker location -> index in closed
  for (int i = 0; i < k; ++i) {
    if (i == 0) {
      designated[walks[0].front()] = 0;
      closed.insert(closed.end(), walks[0].begin(), walks[0].end());
    } else {
      designated.emplace(walks[i].front(), closed.size() - 1);
      closed.insert(closed.end(), walks[i].begin() + 1, walks[i].end());
    }
  }
  if (closed.back() != closed.front())
    throw InternalError("concatenated walk is not closed");
  closed.pop_back();
  if (closed.empty()) closed.push_back(walks[0].front());  // single-node instance

  SolutionTour tour;
  std::vector<bool> seen(n, false);
  for (std::size_t idx = 0; idx < closed.size(); ++idx) {
    int v = closed[idx];
    auto mark = designated.find(v);
    if (mark != designated.end()) {
      if (idx != mark->second) continue;  // only the designated marker visit survives
    } else if (seen[v]) {
      continue;
    }
    seen[v] = true;
    tour.tour.push_back(v);
  }
  tour.total_cost = tour_cost(metric, tour.tour);
  return tour;
}

}  // namespace tspx
