#pragma once

#include <deque>
#include <vector>

#include "tspx/error.hpp"
#include "tspx/rational.hpp"

namespace tspx {

struct Arc {
  int tail = 0;
  int head = 0;
  Rational capacity;
};

struct CapacitatedDigraph {
  int n = 0;
  int root = 0;
  std::vector<Arc> arcs;

  void add_arc(int tail, int head, Rational capacity) {
    if (capacity < 0) throw InputError("negative arc capacity");
    arcs.push_back({tail, head, std::move(capacity)});
  }

  // in-flow >= out-flow at every node except the root
  bool is_preflow() const {
    std::vector<Rational> balance(n, Rational(0));
    for (const auto& a : arcs) {
      balance[a.head] += a.capacity;
      balance[a.tail] -= a.capacity;
    }
    for (int v = 0; v < n; ++v)
      if (v != root && balance[v] < 0) return false;
    return true;
  }
};

// Edmonds-Karp over an exact capacity type (Rational or a plain integer).
// BFS augmenting paths bound the iteration count by O(V*E) independently of
// capacity values, so rational capacities terminate.
template <typename Cap>
class MaxFlowT {
 public:
  explicit MaxFlowT(int n) : n_(n), first_out_(n, -1) {}

  int add_arc(int u, int v, const Cap& cap) {
    int id = static_cast<int>(to_.size());
    push_arc(u, v, cap);
    push_arc(v, u, Cap(0));
    return id;
  }

  Cap run(int s, int t) {
    Cap total(0);
    std::vector<int> parent_arc(n_);
    for (;;) {
      std::fill(parent_arc.begin(), parent_arc.end(), -1);
      std::deque<int> queue{s};
      parent_arc[s] = -2;
      while (!queue.empty() && parent_arc[t] == -1) {
        int u = queue.front();
        queue.pop_front();
        for (int e = first_out_[u]; e != -1; e = next_out_[e]) {
          int v = to_[e];
          if (parent_arc[v] == -1 && residual_[e] > 0) {
            parent_arc[v] = e;
            queue.push_back(v);
          }
        }
      }
      if (parent_arc[t] == -1) break;
      Cap bottleneck(0);
      bool first = true;
      for (int v = t; v != s;) {
        int e = parent_arc[v];
        if (first || residual_[e] < bottleneck) bottleneck = residual_[e];
        first = false;
        v = to_[e ^ 1];
      }
      for (int v = t; v != s;) {
        int e = parent_arc[v];
        residual_[e] -= bottleneck;
        residual_[e ^ 1] += bottleneck;
        v = to_[e ^ 1];
      }
      total += bottleneck;
    }
    return total;
  }

  // Source side of the minimum cut: nodes reachable from s in the residual
  // graph. This is the inclusion-minimal min cut, hence also the smallest.
  std::vector<bool> residual_reachable(int s) const {
    std::vector<bool> seen(n_, false);
    std::deque<int> queue{s};
    seen[s] = true;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (int e = first_out_[u]; e != -1; e = next_out_[e])
        if (residual_[e] > 0 && !seen[to_[e]]) {
          seen[to_[e]] = true;
          queue.push_back(to_[e]);
        }
    }
    return seen;
  }

  // Nodes that can still reach t in the residual graph; their complement is
  // the largest source side, so this set is the smallest sink side.
  std::vector<bool> residual_coreachable(int t) const {
    std::vector<bool> seen(n_, false);
    std::deque<int> queue{t};
    seen[t] = true;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (int e = 0; e < static_cast<int>(to_.size()); ++e)
        if (to_[e] == u && residual_[e] > 0 && !seen[from_[e]]) {
          seen[from_[e]] = true;
          queue.push_back(from_[e]);
        }
    }
    return seen;
  }

 private:
  void push_arc(int u, int v, const Cap& cap) {
    from_.push_back(u);
    to_.push_back(v);
    residual_.push_back(cap);
    next_out_.push_back(first_out_[u]);
    first_out_[u] = static_cast<int>(to_.size()) - 1;
  }

  int n_;
  std::vector<int> first_out_;
  std::vector<int> from_, to_, next_out_;
  std::vector<Cap> residual_;
};

using MaxFlow = MaxFlowT<Rational>;

struct MaxFlowCut {
  Rational value;
  std::vector<int> source_side;  // sorted, contains s, excludes t
};

inline Rational cut_capacity(const CapacitatedDigraph& g, const std::vector<bool>& in_cut) {
  Rational cap = 0;
  for (const auto& a : g.arcs)
    if (in_cut[a.tail] && !in_cut[a.head]) cap += a.capacity;
  return cap;
}

inline MaxFlowCut max_flow_min_cut(const CapacitatedDigraph& g, int s, int t) {
  if (s == t) throw InputError("max_flow_min_cut: s == t");
  MaxFlow mf(g.n);
  for (const auto& a : g.arcs) mf.add_arc(a.tail, a.head, a.capacity);
  MaxFlowCut result;
  result.value = mf.run(s, t);
  auto reach = mf.residual_reachable(s);
  for (int v = 0; v < g.n; ++v)
    if (reach[v]) result.source_side.push_back(v);
  if (cut_capacity(g, reach) != result.value)
    throw InternalError("max-flow/min-cut duality violated");
  return result;
}

// Smallest sink-side min cut containing t (certificate form used by the LP
// separation oracle).
inline std::vector<int> min_cut_sink_side(const CapacitatedDigraph& g, int s, int t) {
  MaxFlow mf(g.n);
  for (const auto& a : g.arcs) mf.add_arc(a.tail, a.head, a.capacity);
  mf.run(s, t);
  auto coreach = mf.residual_coreachable(t);
  std::vector<int> side;
  for (int v = 0; v < g.n; ++v)
    if (coreach[v]) side.push_back(v);
  return side;
}

// z_v = max-flow value from the root to v, for every v != root; the root's
// entry is left at zero and must not be read.
inline std::vector<Rational> connectivity_vector(const CapacitatedDigraph& g) {
  std::vector<Rational> z(g.n, Rational(0));
  for (int v = 0; v < g.n; ++v)
    if (v != g.root) z[v] = max_flow_min_cut(g, g.root, v).value;
  return z;
}

}  // namespace tspx
