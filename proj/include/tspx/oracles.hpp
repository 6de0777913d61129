#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "tspx/instance.hpp"
#include "tspx/rooted_forest.hpp"

namespace tspx {

class BudgetExceeded : public InputError {
 public:
  explicit BudgetExceeded(const std::string& what) : InputError(what) {}
};

struct OracleBudget {
  int max_nodes_tour = 10;
  int max_nodes_paths = 8;
  int max_pairs = 3;
  int max_nodes_forest = 10;
  int max_ojoin_nodes = 8;
};

namespace detail {

// Held-Karp sweep with the order constraint folded into the visited mask:
// an order node may be entered only when the visited order nodes are exactly
// its predecessors.
inline std::pair<Rational, std::vector<int>> otsp_dp(const MetricInstance& m,
                                                     const std::vector<int>& order) {
  const int n = m.n();
  const int start = order[0];
  std::vector<int> rank(n, -1);
  unsigned order_mask = 0;
  std::vector<unsigned> prefix_mask(order.size() + 1, 0);
  for (std::size_t r = 0; r < order.size(); ++r) {
    rank[order[r]] = static_cast<int>(r);
    order_mask |= 1u << order[r];
    prefix_mask[r + 1] = prefix_mask[r] | (1u << order[r]);
  }
  const unsigned full = (1u << n) - 1;
  const Rational unseen(-1);
  std::vector<std::vector<Rational>> dp(full + 1, std::vector<Rational>(n, unseen));
  std::vector<std::vector<int>> parent(full + 1, std::vector<int>(n, -1));
  dp[1u << start][start] = 0;
  for (unsigned mask = 1; mask <= full; ++mask) {
    if (!(mask & (1u << start))) continue;
    for (int last = 0; last < n; ++last) {
      if (!(mask & (1u << last)) || dp[mask][last] < 0) continue;
      for (int v = 0; v < n; ++v) {
        if (mask & (1u << v)) continue;
        if (rank[v] >= 0 && (mask & order_mask) != prefix_mask[rank[v]]) continue;
        Rational candidate = dp[mask][last] + m.d(last, v);
        unsigned next = mask | (1u << v);
        if (dp[next][v] < 0 || candidate < dp[next][v]) {
          dp[next][v] = std::move(candidate);
          parent[next][v] = last;
        }
      }
    }
  }
  Rational best(-1);
  int best_last = -1;
  for (int last = 0; last < n; ++last) {
    if (dp[full][last] < 0) continue;
    Rational total = dp[full][last] + m.d(last, start);
    if (best < 0 || total < best) {
      best = std::move(total);
      best_last = last;
    }
  }
  std::vector<int> tour;
  unsigned mask = full;
  int last = best_last;
  while (last != -1) {
    tour.push_back(last);
    int prev = parent[mask][last];
    mask &= ~(1u << last);
    last = prev;
  }
  std::reverse(tour.begin(), tour.end());
  return {best, tour};
}

// Minimum Hamiltonian s-t path on a node block of the metric.
inline std::pair<Rational, std::vector<int>> hamilton_path_dp(const MetricInstance& m,
                                                              const std::vector<int>& block,
                                                              int s, int t) {
  const int b = static_cast<int>(block.size());
  int si = -1, ti = -1;
  for (int i = 0; i < b; ++i) {
    if (block[i] == s) si = i;
    if (block[i] == t) ti = i;
  }
  const unsigned full = (1u << b) - 1;
  const Rational unseen(-1);
  std::vector<std::vector<Rational>> dp(full + 1, std::vector<Rational>(b, unseen));
  std::vector<std::vector<int>> parent(full + 1, std::vector<int>(b, -1));
  dp[1u << si][si] = 0;
  for (unsigned mask = 1; mask <= full; ++mask) {
    for (int last = 0; last < b; ++last) {
      if (!(mask & (1u << last)) || dp[mask][last] < 0) continue;
      for (int v = 0; v < b; ++v) {
        if (mask & (1u << v)) continue;
        Rational candidate = dp[mask][last] + m.d(block[last], block[v]);
        unsigned next = mask | (1u << v);
        if (dp[next][v] < 0 || candidate < dp[next][v]) {
          dp[next][v] = std::move(candidate);
          parent[next][v] = last;
        }
      }
    }
  }
  std::vector<int> path;
  unsigned mask = full;
  int last = ti;
  while (last != -1) {
    path.push_back(block[last]);
    int prev = parent[mask][last];
    mask &= ~(1u << last);
    last = prev;
  }
  std::reverse(path.begin(), path.end());
  return {dp[full][ti], path};
}

}  // namespace detail

// Exact OTSP optimum; both traversal directions of the order are tried.
inline SolutionTour brute_otsp(const OtspInstance& inst, const OracleBudget& budget = {}) {
  validate_otsp(inst);
  const int n = inst.metric.n();
  if (n > budget.max_nodes_tour)
    throw BudgetExceeded("brute_otsp supports up to " +
                         std::to_string(budget.max_nodes_tour) + " nodes");
  auto [cost, tour] = detail::otsp_dp(inst.metric, inst.order);
  if (inst.order.size() >= 3) {
    std::vector<int> reversed{inst.order[0]};
    for (std::size_t i = inst.order.size() - 1; i >= 1; --i)
      reversed.push_back(inst.order[i]);
    auto [rcost, rtour] = detail::otsp_dp(inst.metric, reversed);
    if (rcost >= 0 && (cost < 0 || rcost < cost)) {
      cost = rcost;
      tour = rtour;
    }
  }
  if (cost < 0) throw InternalError("order DP found no tour on a complete metric");
  SolutionTour sol{tour, cost};
  if (auto check = verify_otsp_solution(inst, sol); !check.ok)
    throw InternalError("oracle tour infeasible: " + check.reason);
  return sol;
}

// Exact k-TSPP optimum: every assignment of free nodes to pairs, then an
// exact Hamiltonian s-t path per block.
inline SolutionPaths brute_ktspp(const KtsppInstance& inst, const OracleBudget& budget = {}) {
  const NormalizedKtspp norm = normalize(inst);
  if (inst.metric.n() > budget.max_nodes_paths)
    throw BudgetExceeded("brute_ktspp supports up to " +
                         std::to_string(budget.max_nodes_paths) + " nodes");
  if (norm.k() > budget.max_pairs)
    throw BudgetExceeded("brute_ktspp supports up to " + std::to_string(budget.max_pairs) +
                         " pairs");
  const auto free_nodes = norm.free_nodes();
  const int f = static_cast<int>(free_nodes.size());
  const int k = norm.k();
  std::vector<int> assign(f, 0);
  Rational best(-1);
  std::vector<int> best_assign;
  for (;;) {
    Rational total = 0;
    for (int i = 0; i < k; ++i) {
      std::vector<int> block{norm.pairs[i].s, norm.pairs[i].t};
      for (int j = 0; j < f; ++j)
        if (assign[j] == i) block.push_back(free_nodes[j]);
      total += detail::hamilton_path_dp(norm.metric, block, norm.pairs[i].s,
                                        norm.pairs[i].t)
                   .first;
    }
    if (best < 0 || total < best) {
      best = total;
      best_assign = assign;
    }
    int pos = 0;
    while (pos < f && ++assign[pos] == k) assign[pos++] = 0;
    if (pos == f) break;
  }
  SolutionPaths sol;
  sol.total_cost = 0;
  for (int i = 0; i < k; ++i) {
    std::vector<int> block{norm.pairs[i].s, norm.pairs[i].t};
    for (int j = 0; j < f; ++j)
      if (best_assign[j] == i) block.push_back(free_nodes[j]);
    auto [cost, path] =
        detail::hamilton_path_dp(norm.metric, block, norm.pairs[i].s, norm.pairs[i].t);
    sol.total_cost += cost;
    sol.paths.push_back(std::move(path));
  }
  if (auto check = verify_ktspp_solution(inst, sol); !check.ok)
    throw InternalError("oracle paths infeasible: " + check.reason);
  return sol;
}

// Exact minimum rooted forest: every assignment of free nodes to terminals,
// Prim's algorithm on each part (deliberately a different route than the
// contraction Kruskal it cross-checks).
inline RootedForest brute_rooted_forest(const MetricInstance& m,
                                        const std::vector<int>& terminals,
                                        const OracleBudget& budget = {}) {
  if (terminals.empty()) throw EmptyTerminalSet("terminal set must be nonempty");
  if (m.n() > budget.max_nodes_forest)
    throw BudgetExceeded("brute_rooted_forest supports up to " +
                         std::to_string(budget.max_nodes_forest) + " nodes");
  std::vector<bool> is_terminal(m.n(), false);
  for (int t : terminals) is_terminal[t] = true;
  std::vector<int> free_nodes;
  for (int v = 0; v < m.n(); ++v)
    if (!is_terminal[v]) free_nodes.push_back(v);
  const int f = static_cast<int>(free_nodes.size());
  const int t_count = static_cast<int>(terminals.size());

  auto part_mst = [&](const std::vector<int>& part, std::vector<MultiEdge>* edges) {
    Rational total = 0;
    std::vector<bool> in_tree(part.size(), false);
    std::vector<Rational> key(part.size());
    std::vector<int> link(part.size(), 0);
    in_tree[0] = true;
    for (std::size_t i = 1; i < part.size(); ++i) key[i] = m.d(part[0], part[i]);
    for (std::size_t round = 1; round < part.size(); ++round) {
      int pick = -1;
      for (std::size_t i = 1; i < part.size(); ++i)
        if (!in_tree[i] && (pick == -1 || key[i] < key[pick])) pick = static_cast<int>(i);
      in_tree[pick] = true;
      total += key[pick];
      if (edges) edges->push_back({part[link[pick]], part[pick], key[pick]});
      for (std::size_t i = 1; i < part.size(); ++i)
        if (!in_tree[i] && m.d(part[pick], part[i]) < key[i]) {
          key[i] = m.d(part[pick], part[i]);
          link[i] = pick;
        }
    }
    return total;
  };

  std::vector<int> assign(f, 0);
  Rational best(-1);
  std::vector<int> best_assign;
  for (;;) {
    Rational total = 0;
    for (int ti = 0; ti < t_count; ++ti) {
      std::vector<int> part{terminals[ti]};
      for (int j = 0; j < f; ++j)
        if (assign[j] == ti) part.push_back(free_nodes[j]);
      total += part_mst(part, nullptr);
    }
    if (best < 0 || total < best) {
      best = total;
      best_assign = assign;
    }
    int pos = 0;
    while (pos < f && ++assign[pos] == t_count) assign[pos++] = 0;
    if (pos == f) break;
  }
  RootedForest forest;
  forest.total_cost = 0;
  forest.component_root.assign(m.n(), -1);
  for (int ti = 0; ti < t_count; ++ti) {
    std::vector<int> part{terminals[ti]};
    for (int j = 0; j < f; ++j)
      if (best_assign[j] == ti) part.push_back(free_nodes[j]);
    forest.total_cost += part_mst(part, &forest.edges);
    for (int v : part) forest.component_root[v] = terminals[ti];
  }
  return forest;
}

// Exact minimum O-join value: dynamic program over node-parity vectors with
// each metric edge used 0 or 1 times (doubled edges never help).
inline Rational brute_min_ojoin(const MetricInstance& m, const std::vector<int>& odd,
                                const OracleBudget& budget = {}) {
  if (m.n() > budget.max_ojoin_nodes)
    throw BudgetExceeded("brute_min_ojoin supports up to " +
                         std::to_string(budget.max_ojoin_nodes) + " nodes");
  if (odd.size() % 2 != 0) throw InputError("odd set must have even cardinality");
  unsigned target = 0;
  for (int v : odd) target |= 1u << v;
  const unsigned states = 1u << m.n();
  const Rational unseen(-1);
  std::vector<Rational> dp(states, unseen);
  dp[0] = 0;
  for (int u = 0; u < m.n(); ++u)
    for (int v = u + 1; v < m.n(); ++v) {
      unsigned flip = (1u << u) | (1u << v);
      std::vector<Rational> next = dp;
      for (unsigned p = 0; p < states; ++p) {
        if (dp[p] < 0) continue;
        Rational candidate = dp[p] + m.d(u, v);
        unsigned q = p ^ flip;
        if (next[q] < 0 || candidate < next[q]) next[q] = std::move(candidate);
      }
      dp = std::move(next);
    }
  if (dp[target] < 0) throw InternalError("parity DP missed the target parity");
  return dp[target];
}

}  // namespace tspx
