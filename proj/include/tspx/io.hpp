#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tspx/instance.hpp"

namespace tspx {

using Instance = std::variant<OtspInstance, KtsppInstance>;

namespace detail {

using nlohmann::json;

inline json metric_to_json(const MetricInstance& m, const char* type) {
  json j;
  j["type"] = type;
  j["n"] = m.n();
  j["names"] = m.names;
  json rows = json::array();
  for (const auto& row : m.cost) {
    json r = json::array();
    for (const auto& c : row) r.push_back(to_string(c));
    rows.push_back(std::move(r));
  }
  j["cost"] = std::move(rows);
  return j;
}

inline const json& field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw ParseError(std::string("missing field \"") + name + "\"");
  return *it;
}

inline MetricInstance metric_from_json(const json& j) {
  MetricInstance m;
  const json& jn = field(j, "n");
  if (!jn.is_number_integer() || jn.get<int>() < 1)
    throw ParseError("field \"n\" must be a positive integer");
  const int n = jn.get<int>();
  const json& jcost = field(j, "cost");
  if (!jcost.is_array() || static_cast<int>(jcost.size()) != n)
    throw ParseError("field \"cost\" must be an n-row array");
  m.cost.resize(n);
  for (int u = 0; u < n; ++u) {
    const json& row = jcost[u];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw ParseError("field \"cost\" row " + std::to_string(u) + " must have n entries");
    m.cost[u].reserve(n);
    for (int v = 0; v < n; ++v) {
      if (!row[v].is_string())
        throw ParseError("cost[" + std::to_string(u) + "][" + std::to_string(v) +
                         "] must be a \"p/q\" string");
      m.cost[u].push_back(parse_rational(row[v].get<std::string>()));
    }
  }
  if (auto it = j.find("names"); it != j.end()) {
    if (!it->is_array() || static_cast<int>(it->size()) != n)
      throw ParseError("field \"names\" must list n strings");
    m.names = it->get<std::vector<std::string>>();
  } else {
    m.names = default_names(n);
  }
  return m;
}

inline json parse_document(const std::string& bytes) {
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());  // carries byte position of the failure
  }
  if (!j.is_object()) throw ParseError("top-level JSON value must be an object");
  return j;
}

}  // namespace detail

inline std::string write_instance(const OtspInstance& inst) {
  auto j = detail::metric_to_json(inst.metric, "otsp");
  j["order"] = inst.order;
  return j.dump(2) + "\n";
}

inline std::string write_instance(const KtsppInstance& inst) {
  auto j = detail::metric_to_json(inst.metric, "ktspp");
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : inst.pairs) pairs.push_back({p.s, p.t});
  j["pairs"] = std::move(pairs);
  return j.dump(2) + "\n";
}

inline std::string write_instance(const Instance& inst) {
  return std::visit([](const auto& x) { return write_instance(x); }, inst);
}

inline Instance read_instance(const std::string& bytes) try {
  using detail::field;
  auto j = detail::parse_document(bytes);
  const std::string type = field(j, "type").get<std::string>();
  MetricInstance metric = detail::metric_from_json(j);
  if (type == "otsp") {
    OtspInstance inst;
    inst.metric = std::move(metric);
    const auto& jorder = field(j, "order");
    if (!jorder.is_array() || jorder.empty())
      throw ParseError("field \"order\" must be a nonempty array of node ids");
    inst.order = jorder.get<std::vector<int>>();
    validate_otsp(inst);  // throws InvalidInstance on metric/order violations
    return inst;
  }
  if (type == "ktspp") {
    KtsppInstance inst;
    inst.metric = std::move(metric);
    const auto& jpairs = field(j, "pairs");
    if (!jpairs.is_array() || jpairs.empty())
      throw ParseError("field \"pairs\" must be a nonempty array of [s,t] pairs");
    for (const auto& p : jpairs) {
      if (!p.is_array() || p.size() != 2)
        throw ParseError("each entry of \"pairs\" must be [s,t]");
      inst.pairs.push_back({p[0].get<int>(), p[1].get<int>()});
    }
    validate_ktspp(inst);
    return inst;
  }
  throw ParseError("field \"type\" must be \"otsp\" or \"ktspp\"");
} catch (const nlohmann::json::exception& e) {
  throw ParseError(e.what());
}

inline std::string write_solution(const SolutionTour& sol) {
  nlohmann::json j;
  j["type"] = "tour";
  j["tour"] = sol.tour;
  j["totalCost"] = to_string(sol.total_cost);
  return j.dump(2) + "\n";
}

inline std::string write_solution(const SolutionPaths& sol) {
  nlohmann::json j;
  j["type"] = "paths";
  j["paths"] = sol.paths;
  j["totalCost"] = to_string(sol.total_cost);
  return j.dump(2) + "\n";
}

inline std::variant<SolutionTour, SolutionPaths> read_solution(const std::string& bytes) try {
  using detail::field;
  auto j = detail::parse_document(bytes);
  const std::string type = field(j, "type").get<std::string>();
  if (type == "tour") {
    SolutionTour sol;
    sol.tour = field(j, "tour").get<std::vector<int>>();
    sol.total_cost = parse_rational(field(j, "totalCost").get<std::string>());
    return sol;
  }
  if (type == "paths") {
    SolutionPaths sol;
    sol.paths = field(j, "paths").get<std::vector<std::vector<int>>>();
    sol.total_cost = parse_rational(field(j, "totalCost").get<std::string>());
    return sol;
  }
  throw ParseError("field \"type\" must be \"tour\" or \"paths\"");
} catch (const nlohmann::json::exception& e) {
  throw ParseError(e.what());
}

}  // namespace tspx
