#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tspx/branching.hpp"
#include "tspx/instance.hpp"
#include "tspx/ktspp_lp.hpp"
#include "tspx/parity.hpp"
#include "tspx/rooted_forest.hpp"

namespace tspx {

class TerminalNotInBranching : public InputError {
 public:
  explicit TerminalNotInBranching(const std::string& what) : InputError(what) {}
};

struct TauGamma {
  Rational opt_lp;
  Rational delta;  // sum of direct endpoint costs
  Rational tau;    // (1 - tau) * OPT_LP = delta
  double gamma = 1.0;
  bool degenerate = false;  // OPT_LP = 0
};

namespace detail {

// Truncate toward zero at 15 significant digits so the coin bias never
// exceeds the analytic value of ln(1/tau).
inline double truncate_toward_zero_15(double x) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.20e", x);
  // chop the mantissa after 15 significant digits instead of rounding
  char* dot = buffer;
  while (*dot && *dot != '.') ++dot;
  char* e = buffer;
  while (*e && *e != 'e') ++e;
  int kept = 0;
  for (char* p = buffer; p < e; ++p) {
    if (*p < '0' || *p > '9') continue;
    if (++kept > 15) *p = '0';
  }
  return std::strtod(buffer, nullptr);
}

}  // namespace detail

inline TauGamma compute_tau_gamma(const LpSolution& lp, const NormalizedKtspp& inst) {
  TauGamma tg;
  tg.opt_lp = lp.objective;
  tg.delta = 0;
  for (const auto& p : inst.pairs) tg.delta += inst.metric.d(p.s, p.t);
  if (tg.opt_lp == 0) {
    tg.tau = 0;
    tg.gamma = 1.0;
    tg.degenerate = true;
    return tg;
  }
  tg.tau = 1 - tg.delta / tg.opt_lp;
  tg.tau.canonicalize();
  if (tg.tau < 0 || tg.tau > 1)
    throw InternalError("tau outside [0,1]; LP value below the direct-edge sum");
  if (tg.tau == 0) {
    tg.gamma = 1.0;
    return tg;
  }
  // upper-round tau to a double so ln(1/tau) is not overestimated
  double tau_up = to_double(tg.tau);  // mpq_get_d truncates toward zero
  tau_up = std::nextafter(tau_up, 2.0);
  tg.gamma = std::min(1.0, detail::truncate_toward_zero_15(std::log(1.0 / tau_up)));
  if (tg.gamma < 0) tg.gamma = 0;
  return tg;
}

inline Rational branching_cost(const Branching& b, const MetricInstance& m) {
  Rational total = 0;
  for (const auto& [u, v] : b.arcs) total += m.d(u, v);
  return total;
}

// Unique tree path root .. t inside the branching.
inline std::vector<int> branching_tree_path(const Branching& b, int t, int n) {
  std::vector<int> parent(n, -1);
  for (const auto& [u, v] : b.arcs) parent[v] = u;
  std::vector<int> path{t};
  int w = t;
  int steps = 0;
  while (w != b.root) {
    w = parent[w];
    if (w == -1 || ++steps > n)
      throw TerminalNotInBranching("terminal is not reachable in the branching");
    path.push_back(w);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

// Doubles the branching edges off the root-to-t path and shortcuts the Euler
// trail into a simple s-t path covering exactly V(B).
inline std::vector<int> branching_to_path(const Branching& b, int s, int t,
                                          const MetricInstance& m) {
  if (b.root != s) throw TerminalNotInBranching("branching not rooted at s");
  auto tree_path = branching_tree_path(b, t, m.n());
  std::set<std::pair<int, int>> on_path;
  for (std::size_t i = 1; i < tree_path.size(); ++i)
    on_path.insert({tree_path[i - 1], tree_path[i]});
  WeightedMultigraph mg;
  mg.n = m.n();
  for (const auto& [u, v] : b.arcs) {
    mg.add_edge(u, v, m.d(u, v));
    if (!on_path.count({u, v})) mg.add_edge(u, v, m.d(u, v));
  }
  if (mg.edges.empty()) return s == t ? std::vector<int>{s} : std::vector<int>{s, t};
  auto walk = euler_trail(mg, s, t);
  return shortcut_walk(walk, t);
}

struct RunArtifacts {
  std::uint64_t seed = 0;
  std::vector<Branching> sampled;  // per pair, normalized ids; empty on tails
  std::vector<char> coin_heads;    // per pair (always 1 outside the final algorithm)
  std::vector<int> covered;        // T', sorted
  std::vector<MultiEdge> forest_edges;
  Rational branchings_cost;
  Rational paths_cost;  // pre-graft path total (k-TSPP)
  Rational forest_cost;
  std::vector<std::pair<int, int>> join;
  Rational join_cost;
  Rational final_cost;
  Rational ledger_bound;
  bool ledger_ok = false;
  bool degenerate = false;
};

inline nlohmann::json artifacts_to_json(const RunArtifacts& a) {
  nlohmann::json j;
  j["seed"] = a.seed;
  nlohmann::json sampled = nlohmann::json::array();
  for (const auto& b : a.sampled) {
    nlohmann::json arcs = nlohmann::json::array();
    for (const auto& [u, v] : b.arcs) arcs.push_back({u, v});
    sampled.push_back({{"root", b.root}, {"arcs", std::move(arcs)}});
  }
  j["sampledBranchings"] = std::move(sampled);
  j["coinHeads"] = nlohmann::json::array();
  for (char c : a.coin_heads) j["coinHeads"].push_back(static_cast<bool>(c));
  j["covered"] = a.covered;
  nlohmann::json fedges = nlohmann::json::array();
  for (const auto& e : a.forest_edges) fedges.push_back({e.u, e.v, to_string(e.cost)});
  j["forestEdges"] = std::move(fedges);
  nlohmann::json join = nlohmann::json::array();
  for (const auto& [u, v] : a.join) join.push_back({u, v});
  j["join"] = std::move(join);
  j["branchingsCost"] = to_string(a.branchings_cost);
  j["pathsCost"] = to_string(a.paths_cost);
  j["forestCost"] = to_string(a.forest_cost);
  j["joinCost"] = to_string(a.join_cost);
  j["finalCost"] = to_string(a.final_cost);
  j["ledgerBound"] = to_string(a.ledger_bound);
  j["ledgerOk"] = a.ledger_ok;
  j["degenerate"] = a.degenerate;
  return j;
}

struct PipelineOptions {
  KtsppLpOptions lp;
  DecomposeOptions decompose;
  MatchingOptions matching;
};

namespace detail {

struct PipelineCore {
  NormalizedKtspp norm;
  LpSolution lp;
  TauGamma tg;
  std::vector<BranchingFamily> families;  // empty when degenerate

  void build(const PipelineOptions& opts) {
    lp = solve_ktspp_lp(norm, opts.lp);
    tg = compute_tau_gamma(lp, norm);
    if (tg.degenerate) return;
    families.reserve(norm.k());
    for (int i = 0; i < norm.k(); ++i) {
      CapacitatedDigraph g = lp.flow_digraph(i);
      std::vector<Rational> requirement(norm.n(), Rational(0));
      requirement[norm.pairs[i].t] = 1;
      for (const auto& [v, value] : lp.z[i]) requirement[v] = value;
      BranchingFamily fam = decompose_preflow(g, requirement, opts.decompose);
      for (const auto& member : fam.members)
        if (!member.branching.covered(norm.n())[norm.pairs[i].t])
          throw InternalError("family member misses the pair terminal");
      families.push_back(std::move(fam));
    }
  }

  // free nodes attached to the lowest pair serving them at LP cost zero
  std::vector<std::vector<int>> degenerate_buckets() const {
    std::vector<std::vector<int>> bucket(norm.k());
    for (int v : norm.free_nodes()) {
      int owner = -1;
      for (int i = 0; i < norm.k() && owner == -1; ++i)
        if (lp.z_value(i, v) > 0) owner = i;
      if (owner == -1) throw InternalError("free node with no LP coverage");
      bucket[owner].push_back(v);
    }
    return bucket;
  }
};

}  // namespace detail

struct OtspRun {
  SolutionTour tour;
  RunArtifacts artifacts;
};

struct KtsppRun {
  SolutionPaths paths;
  RunArtifacts artifacts;
};

// Deterministic preprocessing (LP solve + preflow decomposition) for an OTSP
// instance; run(seed) performs the sampling stages only.
class OtspPipeline {
 public:
  explicit OtspPipeline(OtspInstance instance, PipelineOptions opts = {})
      : instance_(std::move(instance)), opts_(opts) {
    core_.norm = normalize(instance_);
    core_.build(opts_);
  }

  const OtspInstance& instance() const { return instance_; }
  const NormalizedKtspp& norm() const { return core_.norm; }
  const LpSolution& lp() const { return core_.lp; }
  const TauGamma& tau_gamma() const { return core_.tg; }
  const std::vector<BranchingFamily>& families() const { return core_.families; }

  OtspRun run(std::uint64_t seed) const {
    if (core_.tg.degenerate) return degenerate_run(seed);
    const auto& norm = core_.norm;
    const auto& metric = instance_.metric;
    const int k = norm.k();
    RunArtifacts art;
    art.seed = seed;
    art.coin_heads.assign(k, 1);
    art.branchings_cost = 0;

    std::vector<std::vector<int>> walks(k);
    WeightedMultigraph extras;
    extras.n = metric.n();
    std::set<int> covered;
    for (int i = 0; i < k; ++i) {
      CounterRng rng = CounterRng::stream(seed, static_cast<std::uint64_t>(i));
      const Branching& b = sample_branching(core_.families[i], rng);
      art.sampled.push_back(b);
      art.branchings_cost += branching_cost(b, norm.metric);
      auto tree_path = branching_tree_path(b, norm.pairs[i].t, norm.n());
      std::set<std::pair<int, int>> on_path;
      for (std::size_t j = 1; j < tree_path.size(); ++j)
        on_path.insert({tree_path[j - 1], tree_path[j]});
      // locations: collapse colocated copies back onto their original node
      std::vector<int> walk;
      for (int v : tree_path) {
        int loc = norm.location[v];
        if (walk.empty() || walk.back() != loc) walk.push_back(loc);
      }
      if (walk.empty()) walk.push_back(norm.location[norm.pairs[i].s]);
      walks[i] = std::move(walk);
      for (const auto& arc : b.arcs) {
        covered.insert(norm.location[arc.first]);
        covered.insert(norm.location[arc.second]);
        if (on_path.count(arc)) continue;
        int lu = norm.location[arc.first];
        int lv = norm.location[arc.second];
        if (lu != lv) extras.add_edge(lu, lv, metric.d(lu, lv));
      }
      covered.insert(norm.location[norm.pairs[i].s]);
      covered.insert(norm.location[norm.pairs[i].t]);
    }
    art.covered.assign(covered.begin(), covered.end());

    RootedForest forest = min_rooted_forest(metric, art.covered);
    art.forest_edges = forest.edges;
    art.forest_cost = forest.total_cost;
    for (const auto& e : forest.edges) extras.add_edge(e.u, e.v, e.cost);

    auto odd = odd_degree_nodes(extras);
    MatchingResult join = min_weight_perfect_matching(metric, odd, opts_.matching);
    art.join = join.edges;
    art.join_cost = join.cost;
    if (!join.heuristic && 2 * art.join_cost > core_.lp.objective)
      throw InternalError("parity join exceeded half the LP value");

    OtspRun result;
    result.tour = assemble_otsp_tour(walks, extras, join.edges, metric);
    auto outcome = verify_otsp_solution(instance_, result.tour);
    if (!outcome.ok) throw InternalError("pipeline produced infeasible tour: " + outcome.reason);

    art.final_cost = result.tour.total_cost;
    art.ledger_bound = art.branchings_cost + art.forest_cost + core_.lp.objective / 2;
    art.ledger_ok = art.final_cost <= art.ledger_bound;
    if (!join.heuristic && !art.ledger_ok)
      throw InternalError("per-run cost ledger violated");
    result.artifacts = std::move(art);
    return result;
  }

 private:
  OtspRun degenerate_run(std::uint64_t seed) const {
    const auto& norm = core_.norm;
    auto buckets = core_.degenerate_buckets();
    std::vector<std::vector<int>> walks(norm.k());
    for (int i = 0; i < norm.k(); ++i) {
      std::vector<int> walk{norm.location[norm.pairs[i].s]};
      for (int v : buckets[i]) {
        int loc = norm.location[v];
        if (walk.back() != loc) walk.push_back(loc);
      }
      int end = norm.location[norm.pairs[i].t];
      if (walk.back() != end) walk.push_back(end);
      walks[i] = std::move(walk);
    }
    WeightedMultigraph empty;
    empty.n = instance_.metric.n();
    OtspRun result;
    result.tour = assemble_otsp_tour(walks, empty, {}, instance_.metric);
    auto outcome = verify_otsp_solution(instance_, result.tour);
    if (!outcome.ok) throw InternalError("degenerate tour infeasible: " + outcome.reason);
    result.artifacts.seed = seed;
    result.artifacts.degenerate = true;
    result.artifacts.final_cost = result.tour.total_cost;
    result.artifacts.ledger_bound = 0;
    result.artifacts.ledger_ok = result.tour.total_cost == 0;
    return result;
  }

  OtspInstance instance_;
  PipelineOptions opts_;
  detail::PipelineCore core_;
};

enum class KtsppAlgorithm { Warmup, Final, Baseline3 };

inline const char* to_string(KtsppAlgorithm a) {
  switch (a) {
    case KtsppAlgorithm::Warmup: return "warmup";
    case KtsppAlgorithm::Final: return "final";
    case KtsppAlgorithm::Baseline3: return "baseline3";
  }
  return "?";
}

class KtsppPipeline {
 public:
  explicit KtsppPipeline(KtsppInstance instance, PipelineOptions opts = {})
      : instance_(std::move(instance)), opts_(opts) {
    core_.norm = normalize(instance_);
    core_.build(opts_);
  }

  const KtsppInstance& instance() const { return instance_; }
  const NormalizedKtspp& norm() const { return core_.norm; }
  const LpSolution& lp() const { return core_.lp; }
  const TauGamma& tau_gamma() const { return core_.tg; }
  const std::vector<BranchingFamily>& families() const { return core_.families; }

  KtsppRun run(KtsppAlgorithm algorithm, std::uint64_t seed) const {
    if (algorithm == KtsppAlgorithm::Baseline3) return baseline3(seed);
    if (core_.tg.degenerate) return degenerate_run(seed);
    const auto& norm = core_.norm;
    const int k = norm.k();
    RunArtifacts art;
    art.seed = seed;
    art.paths_cost = 0;
    art.branchings_cost = 0;

    std::vector<std::vector<int>> paths(k);
    std::set<int> covered;
    for (int i = 0; i < k; ++i) {
      CounterRng rng = CounterRng::stream(seed, static_cast<std::uint64_t>(i));
      bool heads = true;
      if (algorithm == KtsppAlgorithm::Final && core_.tg.gamma < 1.0) {
        // threshold floor(gamma * 2^64) keeps the exact bias at most gamma;
        // gamma = 1 skips the draw so the run matches the warmup exactly
        long double scaled = static_cast<long double>(core_.tg.gamma) * 18446744073709551616.0L;
        heads = rng.next_u64() < static_cast<std::uint64_t>(scaled);
      }
      art.coin_heads.push_back(heads ? 1 : 0);
      const auto [s, t] = norm.pairs[i];
      if (heads) {
        const Branching& b = sample_branching(core_.families[i], rng);
        art.sampled.push_back(b);
        Rational b_cost = branching_cost(b, norm.metric);
        art.branchings_cost += b_cost;
        paths[i] = branching_to_path(b, s, t, norm.metric);
        Rational path_cost = walk_cost(norm.metric, paths[i]);
        if (path_cost > 2 * b_cost - norm.metric.d(s, t))
          throw InternalError("path cost exceeded the doubling bound");
      } else {
        art.sampled.push_back(Branching{s, {}});
        paths[i] = {s, t};
      }
      art.paths_cost += walk_cost(norm.metric, paths[i]);
      for (int v : paths[i]) covered.insert(v);
    }
    art.covered.assign(covered.begin(), covered.end());

    // every node keeps exactly one visit: endpoints stay on their own path,
    // free nodes stay on the lowest-index path that covers them
    std::vector<int> owner(norm.n(), -1);
    for (int i = 0; i < k; ++i) {
      owner[norm.pairs[i].s] = i;
      owner[norm.pairs[i].t] = i;
    }
    for (int i = 0; i < k; ++i)
      for (int v : paths[i])
        if (owner[v] == -1) owner[v] = i;
    for (int i = 0; i < k; ++i) {
      std::vector<int> kept;
      for (int v : paths[i])
        if (owner[v] == i) kept.push_back(v);
      paths[i] = std::move(kept);
    }

    RootedForest forest = min_rooted_forest(norm.metric, art.covered);
    art.forest_edges = forest.edges;
    art.forest_cost = forest.total_cost;
    auto cycles = double_forest_to_cycles(forest);
    paths = graft_cycles_into_paths(std::move(paths), cycles);

    KtsppRun result;
    result.paths.paths = std::move(paths);
    result.paths.total_cost = 0;
    for (const auto& p : result.paths.paths)
      result.paths.total_cost += walk_cost(norm.metric, p);
    auto outcome = verify_ktspp_solution(instance_, result.paths);
    if (!outcome.ok)
      throw InternalError("pipeline produced infeasible paths: " + outcome.reason);

    art.final_cost = result.paths.total_cost;
    art.ledger_bound = art.paths_cost + 2 * art.forest_cost;
    art.ledger_ok = art.final_cost <= art.ledger_bound;
    if (!art.ledger_ok) throw InternalError("per-run cost ledger violated");
    result.artifacts = std::move(art);
    return result;
  }

  KtsppRun best_of(const std::vector<KtsppAlgorithm>& algorithms,
                   const std::vector<std::uint64_t>& seeds) const {
    if (algorithms.empty()) throw InputError("best_of needs at least one algorithm");
    std::vector<std::uint64_t> use_seeds = seeds.empty() ? std::vector<std::uint64_t>{0} : seeds;
    const KtsppRun* best = nullptr;
    std::vector<KtsppRun> runs;
    runs.reserve(algorithms.size() * use_seeds.size());
    for (auto algorithm : algorithms)
      for (auto seed : use_seeds) {
        runs.push_back(run(algorithm, seed));
        if (!best || runs.back().paths.total_cost < best->paths.total_cost)
          best = &runs.back();
        if (algorithm == KtsppAlgorithm::Baseline3) break;  // deterministic
      }
    return *best;
  }

 private:
  KtsppRun baseline3(std::uint64_t seed) const {
    const auto& norm = core_.norm;
    const int k = norm.k();
    std::vector<int> terminals;
    for (const auto& p : norm.pairs) {
      terminals.push_back(p.s);
      terminals.push_back(p.t);
    }
    std::sort(terminals.begin(), terminals.end());
    RootedForest forest = min_rooted_forest(norm.metric, terminals);
    KtsppRun result;
    RunArtifacts art;
    art.seed = seed;
    art.forest_edges = forest.edges;
    art.forest_cost = forest.total_cost;
    for (int i = 0; i < k; ++i) {
      const auto [s, t] = norm.pairs[i];
      WeightedMultigraph mg;
      mg.n = norm.n();
      for (const auto& e : forest.edges) {
        int root = forest.component_root[e.u];
        if (root == s || root == t) {
          mg.add_edge(e.u, e.v, e.cost);
          mg.add_edge(e.u, e.v, e.cost);
        }
      }
      mg.add_edge(s, t, norm.metric.d(s, t));
      auto walk = euler_trail(mg, s, t);
      result.paths.paths.push_back(shortcut_walk(walk, t));
    }
    result.paths.total_cost = 0;
    for (const auto& p : result.paths.paths)
      result.paths.total_cost += walk_cost(norm.metric, p);
    auto outcome = verify_ktspp_solution(instance_, result.paths);
    if (!outcome.ok) throw InternalError("baseline produced infeasible paths: " + outcome.reason);
    art.final_cost = result.paths.total_cost;
    Rational delta = 0;
    for (const auto& p : norm.pairs) delta += norm.metric.d(p.s, p.t);
    art.ledger_bound = 2 * forest.total_cost + delta;
    art.ledger_ok = art.final_cost <= art.ledger_bound;
    if (!art.ledger_ok) throw InternalError("baseline cost ledger violated");
    result.artifacts = std::move(art);
    return result;
  }

  KtsppRun degenerate_run(std::uint64_t seed) const {
    const auto& norm = core_.norm;
    auto buckets = core_.degenerate_buckets();
    KtsppRun result;
    for (int i = 0; i < norm.k(); ++i) {
      std::vector<int> path{norm.pairs[i].s};
      for (int v : buckets[i]) path.push_back(v);
      path.push_back(norm.pairs[i].t);
      result.paths.paths.push_back(std::move(path));
    }
    result.paths.total_cost = 0;
    for (const auto& p : result.paths.paths)
      result.paths.total_cost += walk_cost(norm.metric, p);
    auto outcome = verify_ktspp_solution(instance_, result.paths);
    if (!outcome.ok) throw InternalError("degenerate paths infeasible: " + outcome.reason);
    result.artifacts.seed = seed;
    result.artifacts.degenerate = true;
    result.artifacts.final_cost = result.paths.total_cost;
    result.artifacts.ledger_ok = result.paths.total_cost == 0;
    return result;
  }

  KtsppInstance instance_;
  PipelineOptions opts_;
  detail::PipelineCore core_;
};

inline OtspRun solve_otsp(const OtspInstance& inst, std::uint64_t seed,
                          const PipelineOptions& opts = {}) {
  return OtspPipeline(inst, opts).run(seed);
}

inline KtsppRun solve_ktspp_warmup(const KtsppInstance& inst, std::uint64_t seed,
                                   const PipelineOptions& opts = {}) {
  return KtsppPipeline(inst, opts).run(KtsppAlgorithm::Warmup, seed);
}

inline KtsppRun solve_ktspp_final(const KtsppInstance& inst, std::uint64_t seed,
                                  const PipelineOptions& opts = {}) {
  return KtsppPipeline(inst, opts).run(KtsppAlgorithm::Final, seed);
}

inline SolutionPaths solve_ktspp_baseline3(const KtsppInstance& inst,
                                           const PipelineOptions& opts = {}) {
  return KtsppPipeline(inst, opts).run(KtsppAlgorithm::Baseline3, 0).paths;
}

}  // namespace tspx
