#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "tspx/instance.hpp"
#include "tspx/rng.hpp"

namespace tspx {

class InvalidParams : public InputError {
 public:
  explicit InvalidParams(const std::string& what) : InputError(what) {}
};

enum class GeneratorKind { Euclidean2d, GraphClosure, UniformMatrix };

inline GeneratorKind parse_generator_kind(const std::string& s) {
  if (s == "euclidean2d") return GeneratorKind::Euclidean2d;
  if (s == "graphClosure") return GeneratorKind::GraphClosure;
  if (s == "uniformMatrix") return GeneratorKind::UniformMatrix;
  throw InvalidParams("unknown generator kind '" + s + "'");
}

namespace detail {

constexpr std::uint64_t kGrid = 1000000;  // rational grid denominator 10^6

inline std::uint64_t ceil_sqrt(std::uint64_t s) {
  if (s == 0) return 0;
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(s)));
  while (r > 0 && r * r >= s) --r;  // now r*r < s <= (r+1)^2 eventually
  while ((r + 1) * (r + 1) < s) ++r;
  return r + 1;
}

inline MetricInstance euclidean_metric(int n, CounterRng& rng) {
  std::vector<std::uint64_t> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = rng.next_below(kGrid + 1);
    ys[i] = rng.next_below(kGrid + 1);
  }
  MetricInstance m;
  m.names = default_names(n);
  m.cost.assign(n, std::vector<Rational>(n, Rational(0)));
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      std::uint64_t dx = xs[u] > xs[v] ? xs[u] - xs[v] : xs[v] - xs[u];
      std::uint64_t dy = ys[u] > ys[v] ? ys[u] - ys[v] : ys[v] - ys[u];
      // snapped distance, square root rounded up to the 10^-6 grid
      std::uint64_t num = ceil_sqrt(dx * dx + dy * dy);
      Rational d(static_cast<unsigned long>(num), static_cast<unsigned long>(kGrid));
      d.canonicalize();
      m.cost[u][v] = d;
      m.cost[v][u] = std::move(d);
    }
  close_metric(m);  // rounding is subadditive, but keep the contract explicit
  return m;
}

inline MetricInstance graph_closure_metric(int n, CounterRng& rng) {
  WeightedMultigraph g;
  g.n = n;
  auto weight = [&]() {
    Rational w(static_cast<unsigned long>(1 + rng.next_below(9999)), 1000ul);
    w.canonicalize();
    return w;
  };
  for (int v = 1; v < n; ++v)
    g.add_edge(static_cast<int>(rng.next_below(v)), v, weight());
  const int extra = n / 2;
  for (int e = 0; e < extra; ++e) {
    int u = static_cast<int>(rng.next_below(n));
    int v = static_cast<int>(rng.next_below(n));
    if (u != v) g.add_edge(u, v, weight());
  }
  return metric_closure(g);
}

inline MetricInstance uniform_matrix_metric(int n, CounterRng& rng) {
  MetricInstance m;
  m.names = default_names(n);
  m.cost.assign(n, std::vector<Rational>(n, Rational(0)));
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      Rational w(static_cast<unsigned long>(1000 + rng.next_below(1001)), 1000ul);
      w.canonicalize();
      m.cost[u][v] = w;
      m.cost[v][u] = std::move(w);
    }
  close_metric(m);
  return m;
}

inline std::vector<int> sample_distinct(int count, int n, CounterRng& rng) {
  std::vector<int> ids(n);
  for (int i = 0; i < n; ++i) ids[i] = i;
  for (int i = 0; i < count; ++i) {
    int j = i + static_cast<int>(rng.next_below(n - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(count);
  return ids;
}

}  // namespace detail

inline MetricInstance generate_metric(GeneratorKind kind, int n, std::uint64_t seed) {
  if (n < 2) throw InvalidParams("need at least 2 nodes");
  CounterRng rng = CounterRng::stream(seed, 0x6d657472 /* metric stream */);
  switch (kind) {
    case GeneratorKind::Euclidean2d: return detail::euclidean_metric(n, rng);
    case GeneratorKind::GraphClosure: return detail::graph_closure_metric(n, rng);
    case GeneratorKind::UniformMatrix: return detail::uniform_matrix_metric(n, rng);
  }
  throw InvalidParams("unknown generator kind");
}

inline OtspInstance generate_otsp(GeneratorKind kind, int n, int k, std::uint64_t seed) {
  if (k < 1) throw InvalidParams("k must be at least 1");
  if (n < std::max(2, k)) throw InvalidParams("n too small for k order nodes");
  OtspInstance inst;
  inst.metric = generate_metric(kind, n, seed);
  CounterRng rng = CounterRng::stream(seed, 0x73656c /* selection stream */);
  inst.order = detail::sample_distinct(k, n, rng);
  validate_otsp(inst);
  return inst;
}

inline KtsppInstance generate_ktspp(GeneratorKind kind, int n, int k, std::uint64_t seed) {
  if (k < 1) throw InvalidParams("k must be at least 1");
  if (n < std::max(2, 2 * k)) throw InvalidParams("n too small for 2k distinct endpoints");
  KtsppInstance inst;
  inst.metric = generate_metric(kind, n, seed);
  CounterRng rng = CounterRng::stream(seed, 0x73656c /* selection stream */);
  auto ids = detail::sample_distinct(2 * k, n, rng);
  for (int i = 0; i < k; ++i) inst.pairs.push_back({ids[2 * i], ids[2 * i + 1]});
  validate_ktspp(inst);
  return inst;
}

}  // namespace tspx
