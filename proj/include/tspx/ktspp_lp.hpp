#pragma once

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tspx/flow.hpp"
#include "tspx/instance.hpp"
#include "tspx/io.hpp"
#include "tspx/lp.hpp"

namespace tspx {

class CutRoundLimit : public InternalError {
 public:
  explicit CutRoundLimit(const std::string& what) : InternalError(what) {}
};

// Base relaxation of the k-path covering LP over the bidirected metric graph:
// one unit of s_i-t_i flow per pair, coverage variables z_{i,v} for free
// nodes, flow balance at all interior nodes, and sum_i z_{i,v} = 1. The
// exponential cut family x_i(in(U)) >= z_{i,v} is handled by separation.
struct KtsppLpModel {
  LpProblem problem;
  std::vector<std::vector<std::vector<int>>> x_index;  // [i][u][v] -> var (-1 on diagonal)
  std::vector<std::vector<int>> z_index;               // [i][v] -> var or -1
  int n = 0;
  int k = 0;
};

inline KtsppLpModel build_ktspp_base_lp(const NormalizedKtspp& inst) {
  KtsppLpModel model;
  const int n = inst.n();
  const int k = inst.k();
  model.n = n;
  model.k = k;
  model.x_index.assign(k, std::vector<std::vector<int>>(n, std::vector<int>(n, -1)));
  model.z_index.assign(k, std::vector<int>(n, -1));
  auto& lp = model.problem;

  for (int i = 0; i < k; ++i) {
    const auto [s, t] = inst.pairs[i];
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v) {
        if (u == v) continue;
        // arcs into s_i and out of t_i carry no flow; keep the variables and
        // pin them to zero so the model matches the relaxation one-to-one
        bool pinned = (v == s) || (u == t);
        model.x_index[i][u][v] =
            lp.add_variable(inst.metric.d(u, v), Rational(0),
                            pinned ? std::optional<Rational>(Rational(0)) : std::nullopt);
      }
    for (int v : inst.free_nodes()) model.z_index[i][v] = lp.add_variable(Rational(0));
  }

  auto out_arcs = [&](int i, int u) {
    std::vector<std::pair<int, Rational>> row;
    for (int v = 0; v < n; ++v)
      if (v != u) row.push_back({model.x_index[i][u][v], Rational(1)});
    return row;
  };
  auto in_arcs = [&](int i, int v) {
    std::vector<std::pair<int, Rational>> row;
    for (int u = 0; u < n; ++u)
      if (u != v) row.push_back({model.x_index[i][u][v], Rational(1)});
    return row;
  };

  for (int i = 0; i < k; ++i) {
    const auto [s, t] = inst.pairs[i];
    lp.add_row(out_arcs(i, s), '=', Rational(1));
    lp.add_row(in_arcs(i, t), '=', Rational(1));
    for (int v = 0; v < n; ++v) {
      if (v == s || v == t) continue;
      if (model.z_index[i][v] >= 0) {
        auto in_row = in_arcs(i, v);
        in_row.push_back({model.z_index[i][v], Rational(-1)});
        lp.add_row(std::move(in_row), '=', Rational(0));
        auto out_row = out_arcs(i, v);
        out_row.push_back({model.z_index[i][v], Rational(-1)});
        lp.add_row(std::move(out_row), '=', Rational(0));
      } else {
        // other pairs' endpoints: flow may pass through but must balance,
        // so each x_i stays an s_i-preflow
        auto row = in_arcs(i, v);
        for (auto& [j, c] : out_arcs(i, v)) row.push_back({j, -c});
        lp.add_row(std::move(row), '=', Rational(0));
      }
    }
  }
  for (int v : inst.free_nodes()) {
    std::vector<std::pair<int, Rational>> row;
    for (int i = 0; i < k; ++i) row.push_back({model.z_index[i][v], Rational(1)});
    lp.add_row(std::move(row), '=', Rational(1));
  }
  return model;
}

struct LpSolution {
  int n = 0;
  int k = 0;
  std::vector<EndpointPair> pairs;                       // normalized ids
  std::vector<std::map<std::pair<int, int>, Rational>> x;  // per pair, nonzero arcs
  std::vector<std::map<int, Rational>> z;                  // per pair, free-node coverage
  Rational objective;

  Rational x_value(int i, int u, int v) const {
    auto it = x[i].find({u, v});
    return it == x[i].end() ? Rational(0) : it->second;
  }
  Rational z_value(int i, int v) const {
    auto it = z[i].find(v);
    return it == z[i].end() ? Rational(0) : it->second;
  }

  // capacitated digraph of pair i's flow (support only)
  CapacitatedDigraph flow_digraph(int i) const {
    CapacitatedDigraph g;
    g.n = n;
    g.root = pairs[i].s;
    for (const auto& [arc, value] : x[i])
      if (value > 0) g.add_arc(arc.first, arc.second, value);
    return g;
  }
};

struct CutCertificate {
  int pair = 0;
  int witness = 0;             // v with z_{i,v} exceeding the cut
  std::vector<int> cut_set;    // U, sorted; v in U, s_i not in U
  Rational violation;          // z_{i,v} - x_i(in(U)) > 0
};

// Exact separation for the cut family: for every (i, v) compute the min
// s_i-v cut under capacities x_i and report one certificate per violated
// pair, using the smallest sink side as the tie-break.
inline std::vector<CutCertificate> separate(const NormalizedKtspp& inst,
                                            const LpSolution& candidate) {
  std::vector<CutCertificate> cuts;
  for (int i = 0; i < candidate.k; ++i) {
    const int s = inst.pairs[i].s;
    CapacitatedDigraph g = candidate.flow_digraph(i);
    for (int v : inst.free_nodes()) {
      Rational req = candidate.z_value(i, v);
      if (req == 0) continue;
      auto flow = max_flow_min_cut(g, s, v);
      if (flow.value >= req) continue;
      CutCertificate cert;
      cert.pair = i;
      cert.witness = v;
      cert.cut_set = min_cut_sink_side(g, s, v);
      cert.violation = req - flow.value;
      cuts.push_back(std::move(cert));
    }
  }
  return cuts;
}

struct KtsppLpOptions {
  int max_rounds = 200;
  int max_cuts_per_round = 64;
  long max_pivots = 4000000;
};

namespace detail {

inline LpSolution extract_solution(const NormalizedKtspp& inst, const KtsppLpModel& model,
                                   const SimplexSolver& solver) {
  LpSolution sol;
  sol.n = model.n;
  sol.k = model.k;
  sol.pairs = inst.pairs;
  sol.x.resize(model.k);
  sol.z.resize(model.k);
  auto values = solver.variable_values();
  for (int i = 0; i < model.k; ++i) {
    for (int u = 0; u < model.n; ++u)
      for (int v = 0; v < model.n; ++v) {
        int idx = model.x_index[i][u][v];
        if (idx >= 0 && values[idx] != 0) sol.x[i][{u, v}] = values[idx];
      }
    for (int v = 0; v < model.n; ++v) {
      int idx = model.z_index[i][v];
      if (idx >= 0 && values[idx] != 0) sol.z[i][v] = values[idx];
    }
  }
  sol.objective = solver.objective_value();
  return sol;
}

inline LpRow cut_row(const KtsppLpModel& model, const CutCertificate& cert) {
  std::vector<bool> in_cut(model.n, false);
  for (int v : cert.cut_set) in_cut[v] = true;
  LpRow row;
  for (int u = 0; u < model.n; ++u) {
    if (in_cut[u]) continue;
    for (int v = 0; v < model.n; ++v)
      if (v != u && in_cut[v])
        row.coeffs.push_back({model.x_index[cert.pair][u][v], Rational(1)});
  }
  row.coeffs.push_back({model.z_index[cert.pair][cert.witness], Rational(-1)});
  row.sense = '>';
  row.rhs = 0;
  return row;
}

}  // namespace detail

// Exact verification of every LpSolution invariant; violations are listed.
inline std::vector<std::string> check_lp_solution(const NormalizedKtspp& inst,
                                                  const LpSolution& sol) {
  std::vector<std::string> bad;
  auto flow_sum = [&](int i, int node, bool incoming) {
    Rational total = 0;
    for (const auto& [arc, value] : sol.x[i])
      if ((incoming ? arc.second : arc.first) == node) total += value;
    return total;
  };
  Rational objective = 0;
  for (int i = 0; i < sol.k; ++i) {
    const auto [s, t] = inst.pairs[i];
    for (const auto& [arc, value] : sol.x[i]) {
      if (value < 0) bad.push_back("negative x value");
      objective += inst.metric.d(arc.first, arc.second) * value;
    }
    if (flow_sum(i, s, false) != 1) bad.push_back("x_i(out(s_i)) != 1");
    if (flow_sum(i, t, true) != 1) bad.push_back("x_i(in(t_i)) != 1");
    if (flow_sum(i, s, true) != 0) bad.push_back("x_i(in(s_i)) != 0");
    if (flow_sum(i, t, false) != 0) bad.push_back("x_i(out(t_i)) != 0");
    for (int v : inst.free_nodes()) {
      if (flow_sum(i, v, true) != sol.z_value(i, v)) bad.push_back("in-degree != z");
      if (flow_sum(i, v, false) != sol.z_value(i, v)) bad.push_back("out-degree != z");
      if (sol.z_value(i, v) < 0) bad.push_back("negative z value");
    }
  }
  for (int v : inst.free_nodes()) {
    Rational total = 0;
    for (int i = 0; i < sol.k; ++i) total += sol.z_value(i, v);
    if (total != 1) bad.push_back("sum_i z_{i,v} != 1");
  }
  if (objective != sol.objective) bad.push_back("objective mismatch");
  if (!separate(inst, sol).empty()) bad.push_back("violated cut remains");
  return bad;
}

// Cutting-plane solve of the full relaxation. Each round adds at most one
// certificate per (i, v), capped, then reoptimizes with the dual simplex.
inline LpSolution solve_ktspp_lp(const NormalizedKtspp& inst,
                                 const KtsppLpOptions& opts = {}) {
  KtsppLpModel model = build_ktspp_base_lp(inst);
  SimplexSolver solver(model.problem, opts.max_pivots);
  if (solver.solve() != LpStatus::Optimal)
    throw InternalError("base relaxation must be feasible and bounded");
  std::set<std::tuple<int, int, std::vector<int>>> seen;
  for (int round = 0; round < opts.max_rounds; ++round) {
    LpSolution sol = detail::extract_solution(inst, model, solver);
    auto cuts = separate(inst, sol);
    if (cuts.empty()) {
      if (auto bad = check_lp_solution(inst, sol); !bad.empty())
        throw InternalError("LP solution violates an invariant: " + bad.front());
      return sol;
    }
    std::vector<LpRow> rows;
    for (const auto& cert : cuts) {
      if (static_cast<int>(rows.size()) >= opts.max_cuts_per_round) break;
      if (!seen.insert({cert.pair, cert.witness, cert.cut_set}).second) continue;
      rows.push_back(detail::cut_row(model, cert));
    }
    if (rows.empty())
      throw InternalError("separation repeated a cut that is already present");
    if (solver.add_rows_and_reoptimize(rows) != LpStatus::Optimal)
      throw InternalError("cut rows made the relaxation infeasible");
  }
  throw CutRoundLimit("cutting-plane loop exceeded " + std::to_string(opts.max_rounds) +
                      " rounds");
}

inline nlohmann::json lp_solution_to_json(const LpSolution& sol) {
  nlohmann::json j;
  j["n"] = sol.n;
  j["k"] = sol.k;
  j["objective"] = to_string(sol.objective);
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : sol.pairs) pairs.push_back({p.s, p.t});
  j["pairs"] = std::move(pairs);
  nlohmann::json jx = nlohmann::json::array();
  nlohmann::json jz = nlohmann::json::array();
  for (int i = 0; i < sol.k; ++i) {
    nlohmann::json xi = nlohmann::json::array();
    for (const auto& [arc, value] : sol.x[i])
      xi.push_back({arc.first, arc.second, to_string(value)});
    jx.push_back(std::move(xi));
    nlohmann::json zi = nlohmann::json::array();
    for (const auto& [v, value] : sol.z[i]) zi.push_back({v, to_string(value)});
    jz.push_back(std::move(zi));
  }
  j["x"] = std::move(jx);
  j["z"] = std::move(jz);
  return j;
}

inline LpSolution lp_solution_from_json(const nlohmann::json& j) try {
  LpSolution sol;
  sol.n = j.at("n").get<int>();
  sol.k = j.at("k").get<int>();
  sol.objective = parse_rational(j.at("objective").get<std::string>());
  for (const auto& p : j.at("pairs")) sol.pairs.push_back({p[0].get<int>(), p[1].get<int>()});
  sol.x.resize(sol.k);
  sol.z.resize(sol.k);
  for (int i = 0; i < sol.k; ++i) {
    for (const auto& e : j.at("x")[i])
      sol.x[i][{e[0].get<int>(), e[1].get<int>()}] = parse_rational(e[2].get<std::string>());
    for (const auto& e : j.at("z")[i])
      sol.z[i][e[0].get<int>()] = parse_rational(e[1].get<std::string>());
  }
  return sol;
} catch (const nlohmann::json::exception& e) {
  throw ParseError(e.what());
}

}  // namespace tspx
