#pragma once

// Small graphs and independent reference computations shared by the unit and
// acceptance suites. Nothing here calls the library routine it is meant to check.

#include "qtps/dynamics.hpp"
#include "qtps/graph.hpp"
#include "qtps/potential.hpp"
#include "qtps/qubo.hpp"
#include "qtps/random.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <utility>
#include <vector>

namespace qtps::testing {

inline std::vector<GraphNode> plain_nodes(std::size_t n) {
  std::vector<GraphNode> nodes;
  for (std::size_t i = 0; i < n; ++i) {
    Point p(2);
    p << static_cast<double>(i), 0.0;
    nodes.push_back({i, p, 0.0});
  }
  return nodes;
}

inline TransitionGraph make_graph(std::size_t n, const std::vector<EdgePair>& edges,
                                  const std::vector<double>& raw, std::size_t s, std::size_t t) {
  return TransitionGraph::from_raw_weights(plain_nodes(n), edges, raw, s, t);
}

/// s=0, a=1, b=2, t=3; routes s-a-t (S 1.0) and s-b-t (S 1.5).
inline TransitionGraph two_path_square() {
  return make_graph(4, {{0, 1}, {1, 3}, {0, 2}, {2, 3}}, {0.5, 0.5, 0.5, 1.0}, 0, 3);
}

/// s=0, a=1, b=2, c=3, t=4; routes through a, b, c with S 1.0, 1.5, 2.0.
inline TransitionGraph three_path_star() {
  return make_graph(5, {{0, 1}, {1, 4}, {0, 2}, {2, 4}, {0, 3}, {3, 4}}, {0.5, 0.5, 0.5, 1.0, 1.0, 1.0}, 0, 4);
}

/// s=0, a=1, t=2.
inline TransitionGraph line_graph() { return make_graph(3, {{0, 1}, {1, 2}}, {0.4, 1.0}, 0, 2); }

/// Six nodes, nine edges, distinct path actions.
inline TransitionGraph six_node_fixture() {
  return make_graph(6, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 4}, {3, 4}, {3, 5}, {4, 5}, {1, 4}},
                    {0.7, 0.4, 0.3, 0.9, 0.8, 0.35, 0.6, 1.0, 1.3}, 0, 5);
}

/// Six nodes with one dominant route s-1-t (probability about 0.5, next 0.11),
/// so the most visited path is identifiable from a few hundred states.
inline TransitionGraph dominant_route_fixture() {
  return make_graph(6, {{0, 1}, {1, 5}, {0, 2}, {2, 5}, {0, 3}, {3, 4}, {4, 5}, {2, 3}, {1, 4}},
                    {0.25, 0.25, 1.0, 1.0, 0.8, 0.8, 0.8, 0.5, 1.0}, 0, 5);
}

/// Connected random graph on n nodes (spanning tree plus extra edges) with
/// weights uniform in [0.05, 1]; s = 0, t = n - 1.
inline TransitionGraph random_graph(std::size_t n, std::size_t extra_edges, RandomStream& rng) {
  std::set<EdgePair> set;
  for (std::size_t v = 1; v < n; ++v) {
    const std::size_t u = rng.below(v);
    set.insert({u, v});
  }
  const std::size_t max_edges = n * (n - 1) / 2;
  const std::size_t want = std::min(max_edges, set.size() + extra_edges);
  while (set.size() < want) {
    std::size_t a = rng.below(n);
    std::size_t b = rng.below(n);
    if (a == b) continue;
    set.insert({std::min(a, b), std::max(a, b)});
  }
  std::vector<EdgePair> edges(set.begin(), set.end());
  std::vector<double> w;
  for (std::size_t e = 0; e < edges.size(); ++e) w.push_back(0.05 + 0.95 * rng.uniform());
  return make_graph(n, edges, w, 0, n - 1);
}

/// H evaluated straight from the constraint and target terms, without the
/// expanded coefficient tables.
inline double direct_hamiltonian(const TransitionGraph& g, double alpha, std::span<const std::uint8_t> bits) {
  const std::size_t nu = g.node_count();
  auto node = [&](std::size_t i) { return static_cast<double>(bits[i]); };
  auto edge = [&](std::size_t e) { return static_cast<double>(bits[nu + e]); };
  std::vector<double> flux(nu, 0.0);
  double target = 0.0;
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    flux[g.edges()[e].i] += edge(e);
    flux[g.edges()[e].j] += edge(e);
    target += g.edges()[e].w_renorm * edge(e);
  }
  const std::size_t s = g.source();
  const std::size_t t = g.target();
  const double hs = -node(s) * node(s) + (node(s) - flux[s]) * (node(s) - flux[s]);
  const double ht = -node(t) * node(t) + (node(t) - flux[t]) * (node(t) - flux[t]);
  double hr = 0.0;
  for (std::size_t j = 0; j < nu; ++j) {
    if (j == s || j == t) continue;
    hr += (2.0 * node(j) - flux[j]) * (2.0 * node(j) - flux[j]);
  }
  return alpha * (hs + ht + hr) + target;
}

/// Minimum s-t action by Bellman-Ford relaxation over renormalized weights.
inline double min_action_bellman_ford(const TransitionGraph& g) {
  std::vector<double> d(g.node_count(), std::numeric_limits<double>::infinity());
  d[g.source()] = 0.0;
  for (std::size_t round = 0; round < g.node_count(); ++round) {
    for (const auto& e : g.edges()) {
      d[e.j] = std::min(d[e.j], d[e.i] + e.w_renorm);
      d[e.i] = std::min(d[e.i], d[e.j] + e.w_renorm);
    }
  }
  return d[g.target()];
}

/// Number of simple s-t paths, counted by dynamic programming over visited
/// node subsets (independent of any depth-first search).
inline std::uint64_t count_paths_subset_dp(const TransitionGraph& g) {
  const std::size_t n = g.node_count();
  const std::size_t full = std::size_t{1} << n;
  // ways[mask][v]: simple paths from s visiting exactly `mask`, ending at v.
  std::vector<std::vector<std::uint64_t>> ways(full, std::vector<std::uint64_t>(n, 0));
  ways[std::size_t{1} << g.source()][g.source()] = 1;
  std::uint64_t total = 0;
  for (std::size_t mask = 1; mask < full; ++mask) {
    for (std::size_t v = 0; v < n; ++v) {
      const auto w = ways[mask][v];
      if (w == 0) continue;
      if (v == g.target()) {
        total += w;
        continue;
      }
      for (const auto& [u, e] : g.incident(v)) {
        (void)e;
        if (mask & (std::size_t{1} << u)) continue;
        ways[mask | (std::size_t{1} << u)][u] += w;
      }
    }
  }
  return total;
}

/// Exact Boltzmann law over all simple paths, keyed by node sequence.
inline std::map<std::vector<std::size_t>, double> boltzmann_law(const TransitionGraph& g) {
  std::map<std::vector<std::size_t>, double> law;
  std::vector<std::size_t> path{g.source()};
  std::vector<bool> seen(g.node_count(), false);
  seen[g.source()] = true;
  auto walk = [&](auto&& self, std::size_t u) -> void {
    if (u == g.target()) {
      law[path] = std::exp(-g.path_action(path));
      return;
    }
    for (const auto& [v, e] : g.incident(u)) {
      (void)e;
      if (seen[v]) continue;
      seen[v] = true;
      path.push_back(v);
      self(self, v);
      path.pop_back();
      seen[v] = false;
    }
  };
  walk(walk, g.source());
  double z = 0.0;
  for (const auto& [p, w] : law) z += w;
  for (auto& [p, w] : law) w /= z;
  return law;
}

/// Total-variation distance between two laws over the same key space.
template <class Key>
double total_variation(const std::map<Key, double>& a, const std::map<Key, double>& b) {
  std::set<Key> keys;
  for (const auto& [k, v] : a) keys.insert(k);
  for (const auto& [k, v] : b) keys.insert(k);
  double tv = 0.0;
  for (const auto& k : keys) {
    const double pa = a.count(k) ? a.at(k) : 0.0;
    const double pb = b.count(k) ? b.at(k) : 0.0;
    tv += std::abs(pa - pb);
  }
  return 0.5 * tv;
}

inline double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

/// One-sample Kolmogorov-Smirnov statistic against a normal law.
inline double ks_statistic_normal(std::vector<double> xs, double mean, double sd) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = normal_cdf(xs[i], mean, sd);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
inline double ks_critical_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

/// Integrated autocorrelation time of a scalar series (initial positive
/// sequence truncation).
inline double integrated_time(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 4) return 1.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  c0 /= static_cast<double>(n);
  if (c0 <= 0.0) return 1.0;
  double tau = 1.0;
  for (std::size_t lag = 1; lag < n / 2; ++lag) {
    double c = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) c += (x[i] - mean) * (x[i + lag] - mean);
    c /= static_cast<double>(n) * c0;
    if (c <= 0.0) break;
    tau += 2.0 * c;
  }
  return tau;
}

/// Orientation-test hull oracle in 2-D: a point is a hull vertex iff some
/// line through it has every other point strictly on one side, checked via
/// all pairs (O(M^3)).
inline std::vector<std::size_t> hull_vertices_bruteforce(const Eigen::MatrixXd& p) {
  const auto m = static_cast<std::size_t>(p.rows());
  auto cross = [&](std::size_t o, std::size_t a, std::size_t b) {
    return (p(a, 0) - p(o, 0)) * (p(b, 1) - p(o, 1)) - (p(a, 1) - p(o, 1)) * (p(b, 0) - p(o, 0));
  };
  // A point is NOT a vertex iff it lies in a triangle of three other points
  // or strictly between two other points on a segment.
  std::vector<std::size_t> out;
  for (std::size_t q = 0; q < m; ++q) {
    bool inside = false;
    for (std::size_t a = 0; a < m && !inside; ++a) {
      if (a == q) continue;
      for (std::size_t b = a + 1; b < m && !inside; ++b) {
        if (b == q) continue;
        if (std::abs(cross(a, b, q)) < 1e-14) {
          const double dot = (p(q, 0) - p(a, 0)) * (p(b, 0) - p(a, 0)) + (p(q, 1) - p(a, 1)) * (p(b, 1) - p(a, 1));
          const double len = (p(b, 0) - p(a, 0)) * (p(b, 0) - p(a, 0)) + (p(b, 1) - p(a, 1)) * (p(b, 1) - p(a, 1));
          if (dot > 0.0 && dot < len) inside = true;
        }
        for (std::size_t c = b + 1; c < m && !inside; ++c) {
          if (c == q || std::abs(cross(a, b, c)) < 1e-14) continue;
          const double d1 = cross(a, b, q);
          const double d2 = cross(b, c, q);
          const double d3 = cross(c, a, q);
          const bool neg = d1 < 0 || d2 < 0 || d3 < 0;
          const bool pos = d1 > 0 || d2 > 0 || d3 > 0;
          if (!(neg && pos)) inside = true;
        }
      }
    }
    if (!inside) out.push_back(q);
  }
  return out;
}

// Fourth-order central stencils; exact (up to rounding) for quartic polynomials.
inline Point fd_gradient(const Potential& u, const Point& q, double h) {
  Point g(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    auto at = [&](double s) {
      Point x = q;
      x[i] += s;
      return u.energy(x);
    };
    g[i] = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
  }
  return g;
}

inline double fd_laplacian(const Potential& u, const Point& q, double h) {
  double lap = 0.0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    auto at = [&](double s) {
      Point x = q;
      x[i] += s;
      return u.energy(x);
    };
    lap += (-at(2 * h) + 16 * at(h) - 30 * at(0) + 16 * at(-h) - at(-2 * h)) / (12 * h * h);
  }
  return lap;
}

inline double fd_veff(const Potential& u, const Point& q, const LangevinParams& lp) {
  const double h = 1e-2;
  const Point g = fd_gradient(u, q, h);
  return (g.squaredNorm() - lp.hbar_eff() * lp.friction * fd_laplacian(u, q, h)) /
         (2.0 * lp.mass * lp.friction * lp.friction);
}

}  // namespace qtps::testing
