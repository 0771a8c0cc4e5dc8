#include "qtps/qubo.hpp"

#include "qtps/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

namespace qtps {
namespace {

using Quadratic = std::map<std::pair<std::size_t, std::size_t>, double>;

// Adds scale * (sum_k c_k b_k)^2 using b^2 = b.
void add_square(const std::vector<std::pair<std::size_t, double>>& terms, double scale,
                std::vector<double>& linear, Quadratic& quadratic) {
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const auto [bk, ck] = terms[k];
    linear[bk] += scale * ck * ck;
    for (std::size_t l = k + 1; l < terms.size(); ++l) {
      const auto [bl, cl] = terms[l];
      quadratic[{std::min(bk, bl), std::max(bk, bl)}] += 2.0 * scale * ck * cl;
    }
  }
}

bool lex_less(const Bits& a, const Bits& b) { return a < b; }

}  // namespace

QuboProblem::QuboProblem(std::size_t node_count, std::vector<EdgePair> edge_nodes,
                         std::vector<double> edge_weights, std::vector<double> linear, Quadratic quadratic,
                         double offset, double alpha, std::size_t source, std::size_t target)
    : node_count_(node_count),
      edge_nodes_(std::move(edge_nodes)),
      edge_weights_(std::move(edge_weights)),
      linear_(std::move(linear)),
      quadratic_(std::move(quadratic)),
      offset_(offset),
      alpha_(alpha),
      source_(source),
      target_(target) {
  if (linear_.size() != node_count_ + edge_nodes_.size()) {
    throw PreconditionError("QUBO bit count must equal nodes + edges");
  }
  if (edge_weights_.size() != edge_nodes_.size()) throw PreconditionError("one weight per edge bit required");
  couplings_.assign(linear_.size(), {});
  for (const auto& [key, c] : quadratic_) {
    const auto [i, j] = key;
    if (i >= j || j >= linear_.size()) {
      throw PreconditionError("quadratic keys must be ordered pairs of distinct bits in range");
    }
    couplings_[i].emplace_back(static_cast<std::uint32_t>(j), c);
    couplings_[j].emplace_back(static_cast<std::uint32_t>(i), c);
  }
}

std::string QuboProblem::bit_label(std::size_t bit) const {
  if (bit < node_count_) return "n" + std::to_string(bit);
  const auto& [i, j] = edge_nodes_.at(bit - node_count_);
  return "e" + std::to_string(i) + "-" + std::to_string(j);
}

double QuboProblem::energy(std::span<const std::uint8_t> bits) const {
  if (bits.size() != num_bits()) throw PreconditionError("assignment size does not match the problem");
  double e = offset_;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) e += linear_[i];
  }
  for (const auto& [key, c] : quadratic_) {
    if (bits[key.first] && bits[key.second]) e += c;
  }
  return e;
}

double QuboProblem::flip_delta(std::span<const std::uint8_t> bits, std::size_t bit) const {
  double field = linear_[bit];
  for (const auto& [other, c] : couplings_[bit]) {
    if (bits[other]) field += c;
  }
  return bits[bit] ? -field : field;
}

bool operator==(const QuboProblem& a, const QuboProblem& b) {
  return a.node_count_ == b.node_count_ && a.edge_nodes_ == b.edge_nodes_ &&
         a.edge_weights_ == b.edge_weights_ && a.linear_ == b.linear_ && a.quadratic_ == b.quadratic_ &&
         a.offset_ == b.offset_ && a.alpha_ == b.alpha_ && a.source_ == b.source_ && a.target_ == b.target_;
}

double default_alpha(const TransitionGraph& graph) { return graph.total_weight(true); }

QuboProblem encode(const TransitionGraph& graph, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw PreconditionError("alpha must be finite and >= 0");
  const std::size_t nu = graph.node_count();
  const std::size_t n_edges = graph.edge_count();
  std::vector<double> linear(nu + n_edges, 0.0);
  Quadratic quadratic;

  std::vector<EdgePair> edge_nodes;
  std::vector<double> weights;
  for (const auto& e : graph.edges()) {
    edge_nodes.emplace_back(e.i, e.j);
    weights.push_back(e.w_renorm);
  }

  for (std::size_t j = 0; j < nu; ++j) {
    const bool terminal = (j == graph.source() || j == graph.target());
    std::vector<std::pair<std::size_t, double>> terms{{j, terminal ? 1.0 : 2.0}};
    for (const auto& [nbr, e] : graph.incident(j)) terms.emplace_back(nu + e, -1.0);
    add_square(terms, alpha, linear, quadratic);
    // -(Gamma_j)^2 = -Gamma_j for the source and target.
    if (terminal) linear[j] -= alpha;
  }
  for (std::size_t e = 0; e < n_edges; ++e) linear[nu + e] += weights[e];

  std::erase_if(quadratic, [](const auto& kv) { return kv.second == 0.0; });
  return QuboProblem(nu, std::move(edge_nodes), std::move(weights), std::move(linear), std::move(quadratic), 0.0,
                     alpha, graph.source(), graph.target());
}

std::string to_string(TopologyRule rule) {
  switch (rule) {
    case TopologyRule::Endpoint: return "endpoint";
    case TopologyRule::Orphan: return "orphan";
    case TopologyRule::Degree: return "degree";
    case TopologyRule::Cycle: return "cycle";
  }
  return "unknown";
}

DecodeResult decode(const QuboProblem& problem, std::span<const std::uint8_t> bits) {
  if (bits.size() != problem.num_bits()) throw PreconditionError("assignment size does not match the problem");
  const std::size_t nu = problem.node_count();
  const std::size_t s = problem.source(), t = problem.target();

  if (!bits[s] || !bits[t]) {
    return TopologyReport{TopologyRule::Endpoint, !bits[s] ? "source not visited" : "target not visited"};
  }

  std::vector<std::vector<std::size_t>> active_adj(nu);
  std::size_t active_edges = 0;
  for (std::size_t e = 0; e < problem.edge_count(); ++e) {
    if (!bits[problem.edge_bit(e)]) continue;
    const auto [i, j] = problem.edge_nodes()[e];
    if (!bits[i] || !bits[j]) {
      return TopologyReport{TopologyRule::Orphan, "edge " + problem.bit_label(problem.edge_bit(e)) +
                                                      " has an inactive endpoint"};
    }
    active_adj[i].push_back(e);
    active_adj[j].push_back(e);
    ++active_edges;
  }
  std::size_t active_nodes = 0;
  for (std::size_t i = 0; i < nu; ++i) {
    if (!bits[i]) continue;
    ++active_nodes;
    const std::size_t deg = active_adj[i].size();
    if (deg == 0) return TopologyReport{TopologyRule::Orphan, "node " + std::to_string(i) + " has no active edge"};
    const std::size_t want = (i == s || i == t) ? 1 : 2;
    if (deg != want) {
      return TopologyReport{TopologyRule::Degree, "node " + std::to_string(i) + " has degree " +
                                                      std::to_string(deg) + ", expected " +
                                                      std::to_string(want)};
    }
  }

  // Degrees are consistent, so the component of s is a simple path ending at t.
  CoarsePath path;
  path.nodes.push_back(s);
  std::size_t prev_edge = std::numeric_limits<std::size_t>::max();
  std::size_t cur = s;
  while (cur != t) {
    const auto& adj = active_adj[cur];
    const std::size_t e = adj[0] != prev_edge ? adj[0] : adj[1];
    const auto [i, j] = problem.edge_nodes()[e];
    cur = (i == cur) ? j : i;
    prev_edge = e;
    path.nodes.push_back(cur);
    path.action += problem.edge_weights()[e];
  }
  if (path.nodes.size() != active_nodes || path.nodes.size() - 1 != active_edges) {
    return TopologyReport{TopologyRule::Cycle,
                          std::to_string(active_nodes - path.nodes.size()) +
                              " active nodes lie on cycles disjoint from the source-target walk"};
  }
  return path;
}

Bits encode_path(const QuboProblem& problem, const std::vector<std::size_t>& path) {
  Bits bits(problem.num_bits(), 0);
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (path[k] >= problem.node_count()) throw PreconditionError("path node out of range");
    bits[problem.node_bit(path[k])] = 1;
    if (k + 1 == path.size()) break;
    const std::size_t a = std::min(path[k], path[k + 1]), b = std::max(path[k], path[k + 1]);
    const auto& en = problem.edge_nodes();
    const auto it = std::find(en.begin(), en.end(), EdgePair{a, b});
    if (it == en.end()) {
      throw PreconditionError("path step " + std::to_string(a) + "-" + std::to_string(b) + " is not an edge");
    }
    bits[problem.edge_bit(static_cast<std::size_t>(it - en.begin()))] = 1;
  }
  return bits;
}

BinaryAssignment brute_force_ground(const QuboProblem& problem) {
  const std::size_t n = problem.num_bits();
  if (n > kMaxBruteForceBits) {
    throw PreconditionError("brute force refuses " + std::to_string(n) + " bits (limit " +
                            std::to_string(kMaxBruteForceBits) + ")");
  }
  if (n == 0) return {{}, problem.offset(), std::nullopt};

  // The top `split` bits are fixed per chunk; the rest are walked in Gray-code order.
  const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::size_t split = 0;
  while ((std::size_t{1} << split) < threads && split + 4 < n) ++split;
  const std::size_t low = n - split;

  struct Best {
    double energy = std::numeric_limits<double>::infinity();
    Bits bits;
  };
  auto tie_tol = [](double e) { return 1e-9 * std::max(1.0, std::abs(e)); };
  auto consider = [&](Best& best, double e, const Bits& bits) {
    if (best.bits.empty() || e < best.energy - tie_tol(best.energy) ||
        (std::abs(e - best.energy) <= tie_tol(best.energy) && lex_less(bits, best.bits))) {
      best.energy = std::min(e, best.energy);
      best.bits = bits;
    }
  };

  auto run_chunk = [&](std::size_t chunk) {
    Bits bits(n, 0);
    for (std::size_t k = 0; k < split; ++k) bits[low + k] = static_cast<std::uint8_t>((chunk >> k) & 1U);
    double e = problem.energy(bits);
    Best best;
    consider(best, e, bits);
    const std::uint64_t count = std::uint64_t{1} << low;
    for (std::uint64_t i = 1; i < count; ++i) {
      const auto bit = static_cast<std::size_t>(std::countr_zero(i));
      e += problem.flip_delta(bits, bit);
      bits[bit] ^= 1U;
      consider(best, e, bits);
    }
    return best;
  };

  std::vector<std::future<Best>> jobs;
  for (std::size_t chunk = 0; chunk < (std::size_t{1} << split); ++chunk) {
    jobs.push_back(std::async(std::launch::async, run_chunk, chunk));
  }
  Best best;
  for (auto& j : jobs) {
    Best b = j.get();
    consider(best, b.energy, b.bits);
  }
  BinaryAssignment out;
  out.bits = std::move(best.bits);
  out.energy = problem.energy(out.bits);
  const DecodeResult decoded = decode(problem, out.bits);
  if (const auto* p = std::get_if<CoarsePath>(&decoded)) out.path = *p;
  return out;
}

std::optional<std::size_t> PathEnsemble::find(const std::vector<std::size_t>& nodes) const {
  for (std::size_t k = 0; k < paths.size(); ++k) {
    if (paths[k].nodes == nodes) return k;
  }
  return std::nullopt;
}

PathEnsemble enumerate_paths(const TransitionGraph& graph, std::size_t max_len) {
  if (graph.node_count() > kMaxEnumerationNodes) {
    throw PreconditionError("path enumeration refuses graphs with " + std::to_string(graph.node_count()) +
                            " nodes (limit " + std::to_string(kMaxEnumerationNodes) + ")");
  }
  PathEnsemble out;
  std::vector<std::size_t> stack{graph.source()};
  std::vector<bool> on_path(graph.node_count(), false);
  on_path[graph.source()] = true;

  auto dfs = [&](auto&& self, std::size_t u, double action) -> void {
    if (u == graph.target()) {
      if (out.paths.size() >= kMaxEnumeratedPaths) {
        throw PreconditionError("path enumeration exceeded " + std::to_string(kMaxEnumeratedPaths) + " paths");
      }
      out.paths.push_back({stack, action});
      return;
    }
    if (stack.size() >= max_len) return;
    for (const auto& [v, e] : graph.incident(u)) {
      if (on_path[v]) continue;
      on_path[v] = true;
      stack.push_back(v);
      self(self, v, action + graph.edges()[e].w_renorm);
      stack.pop_back();
      on_path[v] = false;
    }
  };
  dfs(dfs, graph.source(), 0.0);

  if (!out.paths.empty()) {
    double s_min = std::numeric_limits<double>::infinity();
    for (const auto& p : out.paths) s_min = std::min(s_min, p.action);
    double z = 0.0;
    for (const auto& p : out.paths) {
      out.probabilities.push_back(std::exp(-(p.action - s_min)));
      z += out.probabilities.back();
    }
    for (double& p : out.probabilities) p /= z;
  }
  return out;
}

}  // namespace qtps
