#pragma once

#include <set>
#include <string>
#include <vector>

#include "tspx/metric.hpp"

namespace tspx {

class InvalidInstance : public InputError {
 public:
  explicit InvalidInstance(const std::string& what) : InputError(what) {}
};

struct OtspInstance {
  MetricInstance metric;
  std::vector<int> order;  // o_1..o_k, distinct
};

struct EndpointPair {
  int s = 0;
  int t = 0;
};

struct KtsppInstance {
  MetricInstance metric;
  std::vector<EndpointPair> pairs;  // duplicate endpoints allowed; split on normalization
};

struct SolutionTour {
  std::vector<int> tour;  // cyclic order, each node exactly once
  Rational total_cost;
};

struct SolutionPaths {
  std::vector<std::vector<int>> paths;  // path i runs s_i .. t_i
  Rational total_cost;
};

struct VerifyOutcome {
  bool ok = false;
  std::string reason;  // first violated condition, empty when ok
};

inline void validate_otsp(const OtspInstance& inst) {
  if (auto report = validate_metric(inst.metric); !report.ok())
    throw InvalidInstance("metric invalid: " + report.violations.front().describe());
  if (inst.order.empty()) throw InvalidInstance("order must be nonempty");
  std::set<int> seen;
  for (int o : inst.order) {
    if (o < 0 || o >= inst.metric.n()) throw InvalidInstance("order id out of range");
    if (!seen.insert(o).second) throw InvalidInstance("order ids must be distinct");
  }
}

inline void validate_ktspp(const KtsppInstance& inst) {
  if (auto report = validate_metric(inst.metric); !report.ok())
    throw InvalidInstance("metric invalid: " + report.violations.front().describe());
  if (inst.pairs.empty()) throw InvalidInstance("at least one endpoint pair required");
  for (const auto& p : inst.pairs)
    if (p.s < 0 || p.s >= inst.metric.n() || p.t < 0 || p.t >= inst.metric.n())
      throw InvalidInstance("endpoint id out of range");
}

// k-TSPP instance with all 2k endpoints distinct. Duplicate endpoints of the
// input (and the wrap-around endpoints of an OTSP order) become colocated
// copies at distance zero, appended after the original nodes; location[]
// maps every normalized node back to its original id.
struct NormalizedKtspp {
  MetricInstance metric;           // original nodes plus appended copies
  std::vector<EndpointPair> pairs;  // distinct normalized ids
  std::vector<int> location;        // normalized id -> original id
  int original_n = 0;
  std::vector<bool> is_terminal;

  int n() const { return metric.n(); }
  int k() const { return static_cast<int>(pairs.size()); }

  std::vector<int> free_nodes() const {
    std::vector<int> out;
    for (int v = 0; v < n(); ++v)
      if (!is_terminal[v]) out.push_back(v);
    return out;
  }
};

namespace detail {

inline int add_colocated_copy(MetricInstance& m, std::vector<int>& location, int of) {
  const int id = m.n();
  const int loc = location[of];
  // distance to the copy equals distance to its location
  for (int v = 0; v < id; ++v) m.cost[v].push_back(m.cost[v][loc]);
  std::vector<Rational> row;
  row.reserve(id + 1);
  for (int v = 0; v < id; ++v) row.push_back(m.cost[v][id]);
  row.push_back(Rational(0));
  m.cost.push_back(std::move(row));
  int prior_copies = 0;
  for (int l : location)
    if (l == loc) ++prior_copies;
  m.names.push_back(m.names[loc] + std::string(prior_copies, '\''));
  location.push_back(loc);
  return id;
}

inline NormalizedKtspp normalize_pairs(const MetricInstance& metric,
                                       const std::vector<EndpointPair>& pairs) {
  NormalizedKtspp norm;
  norm.metric = metric;
  norm.original_n = metric.n();
  norm.location.resize(metric.n());
  for (int v = 0; v < metric.n(); ++v) norm.location[v] = v;
  std::vector<bool> used(metric.n(), false);
  auto place = [&](int original) {
    if (!used[original]) {
      used[original] = true;
      return original;
    }
    return add_colocated_copy(norm.metric, norm.location, original);
  };
  for (const auto& p : pairs) {
    EndpointPair q;
    q.s = place(p.s);
    q.t = place(p.t);
    norm.pairs.push_back(q);
  }
  norm.is_terminal.assign(norm.metric.n(), false);
  for (const auto& p : norm.pairs) norm.is_terminal[p.s] = norm.is_terminal[p.t] = true;
  return norm;
}

}  // namespace detail

inline NormalizedKtspp normalize(const KtsppInstance& inst) {
  validate_ktspp(inst);
  return detail::normalize_pairs(inst.metric, inst.pairs);
}

// OTSP as k-TSPP with wrap-around pairs (o_i, o_{i+1}), o_{k+1} := o_1.
inline NormalizedKtspp normalize(const OtspInstance& inst) {
  validate_otsp(inst);
  const int k = static_cast<int>(inst.order.size());
  std::vector<EndpointPair> pairs;
  pairs.reserve(k);
  for (int i = 0; i < k; ++i)
    pairs.push_back({inst.order[i], inst.order[(i + 1) % k]});
  return detail::normalize_pairs(inst.metric, pairs);
}

inline VerifyOutcome verify_otsp_solution(const OtspInstance& inst,
                                          const SolutionTour& sol) {
  const int n = inst.metric.n();
  if (static_cast<int>(sol.tour.size()) != n)
    return {false, "not Hamiltonian: tour visits " + std::to_string(sol.tour.size()) +
                       " of " + std::to_string(n) + " nodes"};
  std::vector<int> count(n, 0);
  for (int v : sol.tour) {
    if (v < 0 || v >= n) return {false, "tour contains out-of-range node id"};
    if (++count[v] > 1) return {false, "not Hamiltonian: node visited twice"};
  }
  if (tour_cost(inst.metric, sol.tour) != sol.total_cost)
    return {false, "totalCost does not match tour edges"};

  const int k = static_cast<int>(inst.order.size());
  std::vector<int> pos(n, -1);
  for (int i = 0; i < n; ++i) pos[sol.tour[i]] = i;
  auto in_order = [&](bool forward) {
    int prev = 0;  // offset of o_1 from itself
    for (int i = 1; i < k; ++i) {
      int raw = pos[inst.order[i]] - pos[inst.order[0]];
      int off = ((forward ? raw : -raw) % n + n) % n;
      if (off <= prev) return false;
      prev = off;
    }
    return true;
  };
  if (!in_order(true) && !in_order(false))
    return {false, "order violated in both directions"};
  return {true, ""};
}

inline VerifyOutcome verify_ktspp_solution(const KtsppInstance& inst,
                                           const SolutionPaths& sol) {
  const NormalizedKtspp norm = normalize(inst);
  const int n = norm.n();
  if (sol.paths.size() != norm.pairs.size())
    return {false, "expected " + std::to_string(norm.pairs.size()) + " paths"};
  std::vector<int> count(n, 0);
  Rational total = 0;
  for (std::size_t i = 0; i < sol.paths.size(); ++i) {
    const auto& path = sol.paths[i];
    if (path.empty()) return {false, "path " + std::to_string(i) + " is empty"};
    for (int v : path) {
      if (v < 0 || v >= n)
        return {false, "path " + std::to_string(i) + " contains out-of-range node id"};
      ++count[v];
    }
    if (path.front() != norm.pairs[i].s)
      return {false, "path " + std::to_string(i) + " does not start at s"};
    if (path.back() != norm.pairs[i].t)
      return {false, "path " + std::to_string(i) + " does not end at t"};
    std::set<int> distinct(path.begin(), path.end());
    if (distinct.size() != path.size())
      return {false, "path " + std::to_string(i) + " is not simple"};
    total += walk_cost(norm.metric, path);
  }
  for (int v = 0; v < n; ++v) {
    if (count[v] == 0) return {false, "node " + std::to_string(v) + " not covered"};
    if (count[v] > 1) return {false, "node " + std::to_string(v) + " on several paths"};
  }
  if (total != sol.total_cost) return {false, "totalCost does not match path edges"};
  return {true, ""};
}

}  // namespace tspx
