#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tspx/flow.hpp"
#include "tspx/rng.hpp"

namespace tspx {

class NotAPreflow : public InputError {
 public:
  explicit NotAPreflow(const std::string& what) : InputError(what) {}
};

class RequirementExceedsConnectivity : public InputError {
 public:
  explicit RequirementExceedsConnectivity(const std::string& what) : InputError(what) {}
};

class DenominatorOverflow : public InputError {
 public:
  explicit DenominatorOverflow(const std::string& what) : InputError(what) {}
};

// The decomposition theorem guarantees a family exists, so an exhausted
// search indicates an implementation bug and is surfaced loudly.
class SearchExhausted : public InternalError {
 public:
  explicit SearchExhausted(const std::string& what) : InternalError(what) {}
};

struct Branching {
  int root = 0;
  std::vector<std::pair<int, int>> arcs;  // (tail, head), kept sorted

  std::vector<bool> covered(int n) const {
    std::vector<bool> in(n, false);
    in[root] = true;
    for (const auto& [u, v] : arcs) in[v] = true;
    return in;
  }
};

inline std::optional<std::string> branching_structure_error(const Branching& b, int n) {
  std::vector<int> parent(n, -1), indeg(n, 0);
  for (const auto& [u, v] : b.arcs) {
    if (u < 0 || u >= n || v < 0 || v >= n || u == v) return "arc endpoints invalid";
    if (v == b.root) return "arc enters the root";
    if (++indeg[v] > 1) return "node has in-degree above one";
    parent[v] = u;
  }
  // every covered node must reach the root through parents (acyclic, rooted)
  for (const auto& [u, v] : b.arcs) {
    int w = v;
    int steps = 0;
    while (w != b.root) {
      if (parent[w] == -1) return "arc tail not connected to the root";
      w = parent[w];
      if (++steps > n) return "cycle among branching arcs";
    }
    (void)u;
  }
  return std::nullopt;
}

struct WeightedBranching {
  Branching branching;
  Rational weight;
};

struct BranchingFamily {
  int root = 0;
  std::vector<WeightedBranching> members;
};

struct FamilyReport {
  bool ok = true;
  std::vector<std::string> violations;
};

// Exact check of the decomposition contract: weights sum to one, per-arc
// usage stays within the capacities, per-node coverage meets the requirement,
// and every member is a well-formed branching on the family root.
inline FamilyReport verify_branching_family(const CapacitatedDigraph& g,
                                            const std::vector<Rational>& requirement,
                                            const BranchingFamily& fam) {
  FamilyReport report;
  auto flag = [&](std::string msg) {
    report.ok = false;
    report.violations.push_back(std::move(msg));
  };
  Rational weight_sum = 0;
  std::map<std::pair<int, int>, Rational> arc_usage;
  std::vector<Rational> coverage(g.n, Rational(0));
  for (const auto& member : fam.members) {
    if (member.weight <= 0) flag("nonpositive weight");
    weight_sum += member.weight;
    if (member.branching.root != fam.root) flag("member rooted elsewhere");
    if (auto err = branching_structure_error(member.branching, g.n)) flag(*err);
    for (const auto& arc : member.branching.arcs) arc_usage[arc] += member.weight;
    auto in = member.branching.covered(g.n);
    for (int v = 0; v < g.n; ++v)
      if (in[v]) coverage[v] += member.weight;
  }
  if (weight_sum != 1)
    flag("weights sum to " + to_string(weight_sum) + ", expected 1/1");
  std::map<std::pair<int, int>, Rational> capacity;
  for (const auto& a : g.arcs)
    if (a.tail != a.head) capacity[{a.tail, a.head}] += a.capacity;
  for (const auto& [arc, used] : arc_usage) {
    auto it = capacity.find(arc);
    Rational cap = it == capacity.end() ? Rational(0) : it->second;
    if (used > cap)
      flag("arc (" + std::to_string(arc.first) + "," + std::to_string(arc.second) +
           ") used " + to_string(used) + " above capacity " + to_string(cap) +
           " (excess " + to_string(used - cap) + ")");
  }
  for (int v = 0; v < g.n; ++v) {
    if (v >= static_cast<int>(requirement.size())) break;
    if (v != fam.root && coverage[v] < requirement[v])
      flag("node " + std::to_string(v) + " covered " + to_string(coverage[v]) +
           " below requirement " + to_string(requirement[v]));
  }
  return report;
}

struct DecomposeOptions {
  unsigned long denominator_cap = 1000000;
  int family_cap = 4096;
};

namespace detail {

// Integerized peeling state: capacities and requirements are scaled by the
// common denominator D, and D unit-weight branchings are peeled off.
struct PeelState {
  int n = 0;
  int root = 0;
  std::vector<std::pair<int, int>> arcs;  // sorted (tail, head)
  std::vector<long long> cap;
  std::vector<long long> req;
  long long remaining = 0;

  std::vector<bool> in_tree;
  std::vector<int> chosen;
  int forced_outside = 0;

  long long max_flow_to(int w) const {
    MaxFlowT<long long> mf(n);
    for (std::size_t a = 0; a < arcs.size(); ++a)
      if (cap[a] > 0) mf.add_arc(arcs[a].first, arcs[a].second, cap[a]);
    return mf.run(root, w);
  }

  // root connectivity must still support every node's remaining requirement;
  // nodes already in the tree are about to be covered `discount` more times
  bool lambda_ok(long long discount) const {
    for (int w = 0; w < n; ++w) {
      if (w == root) continue;
      long long needed = req[w] - (in_tree[w] ? discount : 0);
      if (needed <= 0) continue;
      if (max_flow_to(w) < needed) return false;
    }
    return true;
  }

  bool grow() {
    if (forced_outside == 0) return true;
    for (std::size_t a = 0; a < arcs.size(); ++a) {
      if (cap[a] < 1) continue;
      auto [u, v] = arcs[a];
      if (!in_tree[u] || in_tree[v]) continue;
      cap[a] -= 1;
      in_tree[v] = true;
      chosen.push_back(static_cast<int>(a));
      if (req[v] == remaining) --forced_outside;
      if (lambda_ok(1) && grow()) return true;
      if (req[v] == remaining) ++forced_outside;
      chosen.pop_back();
      in_tree[v] = false;
      cap[a] += 1;
    }
    return false;
  }

  // Largest multiplicity this branching can be peeled with; validity is
  // monotone decreasing in mu, so binary search applies.
  long long max_multiplicity() {
    long long hi = remaining;
    for (int v = 0; v < n; ++v)
      if (v != root && !in_tree[v]) hi = std::min(hi, remaining - req[v]);
    for (int a : chosen) hi = std::min(hi, cap[a] + 1);
    long long lo = 1;
    auto valid = [&](long long mu) {
      for (int a : chosen) cap[a] -= mu - 1;
      bool ok = lambda_ok(mu);
      for (int a : chosen) cap[a] += mu - 1;
      return ok;
    };
    while (lo < hi) {
      long long mid = lo + (hi - lo + 1) / 2;
      if (valid(mid))
        lo = mid;
      else
        hi = mid - 1;
    }
    return lo;
  }
};

inline long long to_long(const BigInt& v, const char* what) {
  if (!v.fits_slong_p()) throw InputError(std::string("integer overflow in ") + what);
  return v.get_si();
}

}  // namespace detail

// Decomposes a rational preflow into a convex combination of root-out
// branchings meeting the requirement vector: scale by the least common
// denominator D, then peel unit branchings depth-first, validating every arc
// addition by residual root-connectivity checks; identical peels merge into
// one member with the accumulated weight.
inline BranchingFamily decompose_preflow(const CapacitatedDigraph& g,
                                         const std::vector<Rational>& requirement,
                                         const DecomposeOptions& opts = {}) {
  if (static_cast<int>(requirement.size()) != g.n)
    throw InputError("requirement vector must have one entry per node");
  if (!g.is_preflow()) throw NotAPreflow("capacities are not a root preflow");
  auto connectivity = connectivity_vector(g);
  for (int v = 0; v < g.n; ++v) {
    if (v == g.root) continue;
    if (requirement[v] < 0) throw InputError("negative requirement");
    if (requirement[v] > 1)
      throw RequirementExceedsConnectivity("requirement above 1 cannot be met by weights summing to 1");
    if (requirement[v] > connectivity[v])
      throw RequirementExceedsConnectivity(
          "node " + std::to_string(v) + " requires " + to_string(requirement[v]) +
          " but root connectivity is " + to_string(connectivity[v]));
  }

  std::vector<Rational> denominators;
  std::map<std::pair<int, int>, Rational> merged;
  for (const auto& a : g.arcs)
    if (a.tail != a.head && a.capacity > 0) merged[{a.tail, a.head}] += a.capacity;
  for (const auto& [arc, cap] : merged) denominators.push_back(cap);
  for (int v = 0; v < g.n; ++v)
    if (v != g.root) denominators.push_back(requirement[v]);
  BigInt scale = common_denominator(denominators);
  if (scale > BigInt(opts.denominator_cap))
    throw DenominatorOverflow("common denominator " + scale.get_str() +
                              " exceeds cap " + std::to_string(opts.denominator_cap));

  detail::PeelState st;
  st.n = g.n;
  st.root = g.root;
  for (const auto& [arc, cap] : merged) {
    Rational scaled = cap * Rational(scale);
    st.arcs.push_back(arc);
    st.cap.push_back(detail::to_long(BigInt(scaled.get_num()), "scaled capacity"));
  }
  st.req.assign(g.n, 0);
  for (int v = 0; v < g.n; ++v) {
    if (v == g.root) continue;
    Rational scaled = requirement[v] * Rational(scale);
    st.req[v] = detail::to_long(BigInt(scaled.get_num()), "scaled requirement");
  }
  st.remaining = detail::to_long(scale, "denominator");

  std::map<std::vector<std::pair<int, int>>, long long> peels;
  const long long total = st.remaining;
  int distinct = 0;
  while (st.remaining > 0) {
    st.in_tree.assign(st.n, false);
    st.in_tree[st.root] = true;
    st.chosen.clear();
    st.forced_outside = 0;
    for (int v = 0; v < st.n; ++v)
      if (v != st.root && st.req[v] == st.remaining) ++st.forced_outside;
    if (!st.grow())
      throw SearchExhausted("no valid branching peel found; decomposition invariant broken");
    long long mu = st.max_multiplicity();
    std::vector<std::pair<int, int>> arcs;
    for (int a : st.chosen) {
      arcs.push_back(st.arcs[a]);
      st.cap[a] -= mu - 1;  // one unit already removed during growth
    }
    std::sort(arcs.begin(), arcs.end());
    for (int v = 0; v < st.n; ++v)
      if (st.in_tree[v] && v != st.root) st.req[v] = std::max(0LL, st.req[v] - mu);
    st.remaining -= mu;
    auto [it, inserted] = peels.try_emplace(std::move(arcs), mu);
    if (!inserted) it->second += mu;
    if (inserted && ++distinct > opts.family_cap)
      throw InternalError("branching family exceeded the configured cap");
  }
  for (int v = 0; v < st.n; ++v)
    if (st.req[v] > 0) throw InternalError("requirement left unmet after peeling");

  BranchingFamily fam;
  fam.root = g.root;
  for (auto& [arcs, count] : peels) {
    WeightedBranching wb;
    wb.branching.root = g.root;
    wb.branching.arcs = arcs;
    wb.weight = Rational(count) / Rational(total);
    wb.weight.canonicalize();
    fam.members.push_back(std::move(wb));
  }
  auto report = verify_branching_family(g, requirement, fam);
  if (!report.ok)
    throw InternalError("decomposition failed verification: " + report.violations.front());
  return fam;
}

// Draws member j with probability exactly weight_j: the uniform draw lives on
// the common-denominator grid of the weights.
inline const Branching& sample_branching(const BranchingFamily& fam, CounterRng& rng) {
  if (fam.members.empty()) throw InputError("cannot sample from an empty family");
  std::vector<Rational> weights;
  for (const auto& m : fam.members) weights.push_back(m.weight);
  BigInt denom = common_denominator(weights);
  if (!denom.fits_ulong_p()) throw InputError("weight denominator too large to sample");
  const auto grid = denom.get_ui();
  const std::uint64_t draw = rng.next_below(grid);
  BigInt cumulative = 0;
  for (const auto& m : fam.members) {
    Rational scaled = m.weight * Rational(denom);
    cumulative += BigInt(scaled.get_num());
    if (BigInt(static_cast<unsigned long>(draw)) < cumulative) return m.branching;
  }
  return fam.members.back().branching;  // weights sum to 1, not reachable
}

}  // namespace tspx
