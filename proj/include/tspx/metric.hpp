#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "tspx/error.hpp"
#include "tspx/rational.hpp"

namespace tspx {

class DisconnectedGraph : public InputError {
 public:
  explicit DisconnectedGraph(const std::string& what) : InputError(what) {}
};

struct MultiEdge {
  int u = 0;
  int v = 0;
  Rational cost;
};

// Undirected multigraph; loops and parallel edges permitted.
struct WeightedMultigraph {
  int n = 0;
  std::vector<MultiEdge> edges;

  void add_edge(int u, int v, Rational cost) {
    edges.push_back({u, v, std::move(cost)});
  }
};

// Complete pseudometric: symmetric, zero diagonal, triangle inequality.
// Zero off-diagonal entries are allowed (colocated copies of one location).
struct MetricInstance {
  std::vector<std::string> names;
  std::vector<std::vector<Rational>> cost;

  int n() const { return static_cast<int>(cost.size()); }
  const Rational& d(int u, int v) const { return cost[u][v]; }
};

inline std::vector<std::string> default_names(int n, const std::string& prefix = "v") {
  std::vector<std::string> names;
  names.reserve(n);
  for (int i = 0; i < n; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

struct MetricViolation {
  enum class Kind { Symmetry, Triangle, Diagonal, Negative } kind;
  int u = -1, v = -1, w = -1;
  std::string describe() const {
    switch (kind) {
      case Kind::Symmetry:
        return "symmetry violated at (" + std::to_string(u) + "," + std::to_string(v) + ")";
      case Kind::Triangle:
        return "triangle inequality violated at (" + std::to_string(u) + "," +
               std::to_string(v) + "," + std::to_string(w) + ")";
      case Kind::Diagonal:
        return "nonzero diagonal at " + std::to_string(u);
      case Kind::Negative:
        return "negative cost at (" + std::to_string(u) + "," + std::to_string(v) + ")";
    }
    return "unknown";
  }
};

struct MetricReport {
  std::vector<MetricViolation> violations;
  bool ok() const { return violations.empty(); }
};

inline MetricReport validate_metric(const MetricInstance& m) {
  MetricReport report;
  const int n = m.n();
  for (int u = 0; u < n; ++u) {
    if (static_cast<int>(m.cost[u].size()) != n)
      throw InputError("cost matrix is not square");
    if (m.cost[u][u] != 0)
      report.violations.push_back({MetricViolation::Kind::Diagonal, u, u, -1});
  }
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      if (m.cost[u][v] < 0)
        report.violations.push_back({MetricViolation::Kind::Negative, u, v, -1});
      if (u < v && m.cost[u][v] != m.cost[v][u])
        report.violations.push_back({MetricViolation::Kind::Symmetry, u, v, -1});
    }
  for (int u = 0; u < n; ++u)
    for (int w = 0; w < n; ++w)
      for (int v = 0; v < n; ++v)
        if (u != v && v != w && u != w && m.cost[u][w] > m.cost[u][v] + m.cost[v][w])
          report.violations.push_back({MetricViolation::Kind::Triangle, u, v, w});
  return report;
}

// All-pairs shortest-path pseudometric of a connected multigraph.
inline MetricInstance metric_closure(const WeightedMultigraph& g,
                                     std::vector<std::string> names = {}) {
  const int n = g.n;
  MetricInstance m;
  m.names = names.empty() ? default_names(n) : std::move(names);
  std::vector<Rational> none_row(n);
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  m.cost.assign(n, none_row);
  for (int i = 0; i < n; ++i) reach[i][i] = true;
  for (const auto& e : g.edges) {
    if (e.cost < 0) throw InputError("negative edge cost");
    if (e.u == e.v) continue;
    if (!reach[e.u][e.v] || e.cost < m.cost[e.u][e.v]) {
      m.cost[e.u][e.v] = e.cost;
      m.cost[e.v][e.u] = e.cost;
      reach[e.u][e.v] = reach[e.v][e.u] = true;
    }
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      if (!reach[i][k]) continue;
      for (int j = 0; j < n; ++j) {
        if (!reach[k][j]) continue;
        Rational via = m.cost[i][k] + m.cost[k][j];
        if (!reach[i][j] || via < m.cost[i][j]) {
          m.cost[i][j] = via;
          reach[i][j] = true;
        }
      }
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!reach[i][j])
        throw DisconnectedGraph("nodes " + std::to_string(i) + " and " +
                                std::to_string(j) + " are not connected");
  return m;
}

// Re-close an existing matrix in place (used to restore the triangle
// inequality after rounding).
inline void close_metric(MetricInstance& m) {
  const int n = m.n();
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Rational via = m.cost[i][k] + m.cost[k][j];
        if (via < m.cost[i][j]) m.cost[i][j] = via;
      }
}

inline Rational walk_cost(const MetricInstance& m, const std::vector<int>& walk) {
  Rational total = 0;
  for (std::size_t i = 1; i < walk.size(); ++i) total += m.d(walk[i - 1], walk[i]);
  return total;
}

inline Rational tour_cost(const MetricInstance& m, const std::vector<int>& tour) {
  if (tour.size() < 2) return Rational(0);
  Rational total = walk_cost(m, tour);
  total += m.d(tour.back(), tour.front());
  return total;
}

// Keeps the first occurrence of every node. If keep_last_of is given, that
// node keeps its LAST occurrence instead, so s-t walks still end at t.
inline std::vector<int> shortcut_walk(const std::vector<int>& walk,
                                      std::optional<int> keep_last_of = std::nullopt) {
  if (walk.empty()) throw InputError("shortcut_walk: empty walk");
  std::vector<int> result;
  std::vector<bool> seen;
  int max_id = *std::max_element(walk.begin(), walk.end());
  seen.assign(max_id + 1, false);
  std::size_t last_pos = 0;
  if (keep_last_of) {
    for (std::size_t i = 0; i < walk.size(); ++i)
      if (walk[i] == *keep_last_of) last_pos = i;
  }
  for (std::size_t i = 0; i < walk.size(); ++i) {
    int v = walk[i];
    if (keep_last_of && v == *keep_last_of && i != last_pos) continue;
    if (seen[v]) continue;
    seen[v] = true;
    result.push_back(v);
  }
  return result;
}

}  // namespace tspx
