#include "qtps/graph.hpp"

#include "qtps/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

namespace qtps {
namespace {

double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

std::size_t nearest_row(const PointCloud& cloud, const std::vector<std::size_t>& rows, const Point& q) {
  std::size_t best = rows.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t r : rows) {
    const double d = (cloud.point(r) - q).squaredNorm();
    if (d < best_d) best_d = d, best = r;
  }
  return best;
}

std::string describe_components(const std::vector<std::vector<std::size_t>>& comps) {
  std::ostringstream os;
  os << comps.size() << " components:";
  for (const auto& c : comps) {
    os << " {";
    for (std::size_t k = 0; k < c.size() && k < 8; ++k) os << (k ? "," : "") << c[k];
    if (c.size() > 8) os << ",... (" << c.size() << " nodes)";
    os << "}";
  }
  return os.str();
}

}  // namespace

std::string to_string(WeightForm form) {
  return form == WeightForm::HamiltonJacobi ? "hamilton-jacobi" : "time-local";
}

WeightForm weight_form_from_string(const std::string& name) {
  if (name == "hamilton-jacobi") return WeightForm::HamiltonJacobi;
  if (name == "time-local") return WeightForm::TimeLocal;
  throw ConfigError("graph.weight_form: unknown form '" + name + "'");
}

void GraphConfig::validate() const {
  if (!(energy_quantile > 0.0 && energy_quantile <= 1.0)) {
    throw ConfigError("graph.energy_quantile must lie in (0, 1]");
  }
  if (!(diffusion_threshold >= 0.0)) throw ConfigError("graph.diffusion_threshold must be >= 0");
  if (!(edge_diffusion_cutoff > 0.0)) throw ConfigError("graph.edge_diffusion_cutoff must be positive");
  if (!(edge_cartesian_cutoff >= 0.0)) throw ConfigError("graph.edge_cartesian_cutoff must be >= 0");
  if (!(smoothing_radius >= 0.0)) throw ConfigError("graph.smoothing_radius must be >= 0");
  auto positive = [](const std::optional<double>& v, const char* name) {
    if (v && !(*v > 0.0)) throw ConfigError(std::string("graph.") + name + " must be positive");
  };
  positive(coarse_dt, "coarse_dt");
  positive(sigma, "sigma");
  positive(c_t, "c_t");
  positive(c_v, "c_v");
  positive(diffusion, "diffusion");
  if (s0 && !std::isfinite(*s0)) throw ConfigError("graph.s0 must be finite");
}

double kinetic_renormalization(double mass, double sigma, double hbar_eff, double coarse_dt) {
  return 1.0 / (1.0 + mass * sigma * sigma / (hbar_eff * coarse_dt));
}

std::vector<std::size_t> energy_filter(const PointCloud& cloud, double q) {
  if (cloud.energy.size() != cloud.size()) {
    throw PreconditionError("energy filter needs one energy per configuration");
  }
  const double cut = quantile(cloud.energy, q);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.energy[i] <= cut) kept.push_back(i);
  }
  return kept;
}

NodeSet reduce(const PointCloud& cloud, const DiffusionEmbedding& embedding, const GraphConfig& cfg,
               const Point& endpoint_a, const Point& endpoint_b) {
  cloud.validate();
  if (embedding.size() != cloud.size()) {
    throw PreconditionError("cloud and embedding are not aligned (" + std::to_string(cloud.size()) +
                            " vs " + std::to_string(embedding.size()) + " rows)");
  }
  const Eigen::MatrixXd dc = embedding.coordinates(2);
  const std::vector<std::size_t> kept = energy_filter(cloud, cfg.energy_quantile);

  const std::size_t rep_a = nearest_row(cloud, kept, endpoint_a);
  const std::size_t rep_b = nearest_row(cloud, kept, endpoint_b);
  if (rep_a == rep_b) {
    throw PreconditionError("both endpoints map to the same configuration (row " +
                            std::to_string(rep_a) + ")");
  }

  auto ddiff = [&](std::size_t a, std::size_t b) {
    return (dc.row(static_cast<Eigen::Index>(a)) - dc.row(static_cast<Eigen::Index>(b))).norm();
  };

  std::vector<std::size_t> order{rep_a};
  std::vector<std::size_t> remaining;
  for (std::size_t r : kept) {
    if (r != rep_a) remaining.push_back(r);
  }
  std::size_t current = rep_a;
  while (true) {
    std::erase_if(remaining, [&](std::size_t r) { return ddiff(current, r) <= cfg.diffusion_threshold; });
    if (remaining.empty()) break;
    std::size_t next = remaining.front();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r : remaining) {
      const double d = ddiff(current, r);
      if (d < best || (d == best && r < next)) best = d, next = r;
    }
    order.push_back(next);
    std::erase(remaining, next);
    current = next;
  }
  auto pos_b = std::find(order.begin(), order.end(), rep_b);
  if (pos_b == order.end()) {
    order.push_back(rep_b);
    pos_b = order.end() - 1;
  }

  NodeSet nodes;
  nodes.cloud_index = order;
  nodes.coords.resize(static_cast<Eigen::Index>(order.size()), cloud.points.cols());
  nodes.embedding.resize(static_cast<Eigen::Index>(order.size()), 2);
  for (std::size_t k = 0; k < order.size(); ++k) {
    nodes.coords.row(static_cast<Eigen::Index>(k)) = cloud.points.row(static_cast<Eigen::Index>(order[k]));
    nodes.embedding.row(static_cast<Eigen::Index>(k)) = dc.row(static_cast<Eigen::Index>(order[k]));
  }
  nodes.source = 0;
  nodes.target = static_cast<std::size_t>(pos_b - order.begin());
  return nodes;
}

double tune_diffusion_threshold(const PointCloud& cloud, const DiffusionEmbedding& embedding,
                                GraphConfig cfg, const Point& endpoint_a, const Point& endpoint_b,
                                std::size_t target_nodes) {
  const Eigen::MatrixXd dc = embedding.coordinates(2);
  const double diameter = (dc.colwise().maxCoeff() - dc.colwise().minCoeff()).norm();
  double lo = diameter * 1e-6;
  double hi = diameter;
  double best = hi;
  std::size_t best_gap = std::numeric_limits<std::size_t>::max();
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = std::sqrt(lo * hi);
    cfg.diffusion_threshold = mid;
    const std::size_t n = reduce(cloud, embedding, cfg, endpoint_a, endpoint_b).size();
    const std::size_t gap = n > target_nodes ? n - target_nodes : target_nodes - n;
    if (gap < best_gap || (gap == best_gap && mid < best)) best_gap = gap, best = mid;
    if (gap == 0) break;
    (n > target_nodes ? lo : hi) = mid;
  }
  return best;
}

std::pair<double, double> nearest_neighbor_scales(const NodeSet& nodes) {
  const auto n = static_cast<Eigen::Index>(nodes.size());
  if (n < 2) throw PreconditionError("nearest-neighbour scales need at least 2 nodes");
  std::vector<double> diff_nn, cart_nn;
  for (Eigen::Index i = 0; i < n; ++i) {
    double bd = std::numeric_limits<double>::infinity(), bc = bd;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      bd = std::min(bd, (nodes.embedding.row(i) - nodes.embedding.row(j)).norm());
      bc = std::min(bc, (nodes.coords.row(i) - nodes.coords.row(j)).norm());
    }
    diff_nn.push_back(bd);
    cart_nn.push_back(bc);
  }
  return {median(diff_nn), median(cart_nn)};
}

std::vector<std::vector<std::size_t>> components(std::size_t n, const std::vector<EdgePair>& edges) {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [a, b] : edges) {
    const std::size_t ra = find(a), rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> slot(n, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (slot[r] == std::numeric_limits<std::size_t>::max()) {
      slot[r] = out.size();
      out.emplace_back();
    }
    out[slot[r]].push_back(i);
  }
  return out;
}

std::vector<EdgePair> connect(const NodeSet& nodes, const GraphConfig& cfg) {
  const std::size_t n = nodes.size();
  if (n < 2) throw PreconditionError("connect needs at least 2 nodes");
  std::vector<EdgePair> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
      const double dd = (nodes.embedding.row(a) - nodes.embedding.row(b)).norm();
      const double dq = (nodes.coords.row(a) - nodes.coords.row(b)).norm();
      if (dd < cfg.edge_diffusion_cutoff && dq < cfg.edge_cartesian_cutoff) edges.emplace_back(i, j);
    }
  }
  const auto comps = components(n, edges);
  for (const auto& c : comps) {
    const bool has_s = std::binary_search(c.begin(), c.end(), nodes.source);
    const bool has_t = std::binary_search(c.begin(), c.end(), nodes.target);
    if (has_s != has_t) {
      throw GraphError("source " + std::to_string(nodes.source) + " and target " +
                       std::to_string(nodes.target) + " are disconnected; " + describe_components(comps));
    }
  }
  return edges;
}

void assign_effective_potential(NodeSet& nodes, const Potential& potential, const LangevinParams& params,
                                const GraphConfig& cfg) {
  const std::size_t n = nodes.size();
  std::vector<double> raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    raw[i] = effective_potential(nodes.coords.row(static_cast<Eigen::Index>(i)).transpose(), potential, params);
  }
  std::vector<std::vector<std::size_t>> nbhd(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = (nodes.embedding.row(static_cast<Eigen::Index>(i)) -
                        nodes.embedding.row(static_cast<Eigen::Index>(j)))
                           .norm();
      if (i == j || d <= cfg.smoothing_radius) nbhd[i].push_back(j);
    }
  }
  nodes.veff = smooth_effective_potential(raw, nbhd);
}

GraphConfig resolve_renormalization(const NodeSet& nodes, const std::vector<EdgePair>& edges,
                                    GraphConfig cfg, const LangevinParams& params) {
  if (nodes.veff.size() != nodes.size()) {
    throw PreconditionError("renormalization needs a smoothed V_eff per node");
  }
  if (!cfg.diffusion) cfg.diffusion = params.diffusion();
  if (!cfg.sigma) {
    double sum = 0.0;
    for (const auto& [a, b] : edges) {
      sum += (nodes.coords.row(static_cast<Eigen::Index>(a)) - nodes.coords.row(static_cast<Eigen::Index>(b))).norm();
    }
    cfg.sigma = edges.empty() ? nearest_neighbor_scales(nodes).second : sum / static_cast<double>(edges.size());
  }
  // Einstein relation N_a D dt ~ sigma^2.
  if (!cfg.coarse_dt) cfg.coarse_dt = (*cfg.sigma) * (*cfg.sigma) / (params.atoms * (*cfg.diffusion));
  if (!cfg.c_t) cfg.c_t = 1.0 / params.atoms;
  if (!cfg.c_v) {
    std::vector<double> mags;
    for (double v : nodes.veff) mags.push_back(std::abs(v));
    const double med = median(mags);
    cfg.c_v = med > 0.0 ? 1.0 / (med * (*cfg.coarse_dt)) : 1.0;
  }
  if (!cfg.s0) {
    const double lowest = *std::min_element(nodes.veff.begin(), nodes.veff.end()) * (*cfg.c_v);
    cfg.s0 = lowest < 0.0 ? 1.1 * std::abs(lowest) : 0.1 / (*cfg.coarse_dt);
  }
  return cfg;
}

double hamilton_jacobi_weight(double distance, double veff_i, double veff_j, double s0, double diffusion) {
  const double ri = veff_i + s0, rj = veff_j + s0;
  if (ri < 0.0 || rj < 0.0) throw ConfigError("negative radicand in Hamilton-Jacobi weight");
  return distance / (2.0 * std::sqrt(diffusion)) * (std::sqrt(ri) + std::sqrt(rj));
}

TransitionGraph::TransitionGraph(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges,
                                 std::size_t source, std::size_t target, nlohmann::json config_echo)
    : nodes_(std::move(nodes)),
      edges_(std::move(edges)),
      source_(source),
      target_(target),
      config_echo_(std::move(config_echo)) {
  index();
}

TransitionGraph TransitionGraph::from_raw_weights(std::vector<GraphNode> nodes,
                                                  const std::vector<EdgePair>& edges,
                                                  const std::vector<double>& weights, std::size_t source,
                                                  std::size_t target, nlohmann::json config_echo) {
  if (edges.size() != weights.size()) throw PreconditionError("one weight per edge required");
  if (edges.empty()) throw GraphError("graph has no edges");
  const double w_max = *std::max_element(weights.begin(), weights.end());
  std::vector<GraphEdge> out;
  out.reserve(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto [i, j] = edges[e];
    if (i > j) std::swap(i, j);
    if (!(weights[e] > 0.0) || !std::isfinite(weights[e])) {
      throw GraphError("edge (" + std::to_string(i) + "," + std::to_string(j) +
                       ") has non-positive raw weight " + std::to_string(weights[e]));
    }
    out.push_back({i, j, weights[e], weights[e] / w_max});
  }
  std::sort(out.begin(), out.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  });
  TransitionGraph g(std::move(nodes), std::move(out), source, target, std::move(config_echo));
  g.validate();
  return g;
}

void TransitionGraph::index() {
  adjacency_.assign(nodes_.size(), {});
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& ed = edges_[e];
    if (ed.i >= nodes_.size() || ed.j >= nodes_.size()) {
      throw GraphError("edge " + std::to_string(e) + " references a missing node");
    }
    adjacency_[ed.i].emplace_back(ed.j, e);
    adjacency_[ed.j].emplace_back(ed.i, e);
  }
  for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
}

std::optional<std::size_t> TransitionGraph::edge_index(std::size_t i, std::size_t j) const {
  if (i >= adjacency_.size()) return std::nullopt;
  const auto& adj = adjacency_[i];
  auto it = std::lower_bound(adj.begin(), adj.end(), std::pair{j, std::size_t{0}});
  if (it != adj.end() && it->first == j) return it->second;
  return std::nullopt;
}

const std::vector<std::pair<std::size_t, std::size_t>>& TransitionGraph::incident(std::size_t node) const {
  return adjacency_.at(node);
}

double TransitionGraph::path_action(const std::vector<std::size_t>& path, bool renormalized) const {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const auto e = edge_index(path[k], path[k + 1]);
    if (!e) {
      throw GraphError("path step " + std::to_string(path[k]) + " -> " + std::to_string(path[k + 1]) +
                       " is not an edge");
    }
    s += renormalized ? edges_[*e].w_renorm : edges_[*e].w;
  }
  return s;
}

double TransitionGraph::total_weight(bool renormalized) const {
  double s = 0.0;
  for (const auto& e : edges_) s += renormalized ? e.w_renorm : e.w;
  return s;
}

void TransitionGraph::validate() const {
  const std::size_t n = nodes_.size();
  if (source_ >= n || target_ >= n) throw GraphError("graph endpoints out of range");
  if (source_ == target_) throw GraphError("graph source and target coincide");
  double max_r = 0.0;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& ed = edges_[e];
    if (ed.i == ed.j) throw GraphError("self-loop at node " + std::to_string(ed.i));
    if (!(ed.w > 0.0)) throw GraphError("edge " + std::to_string(e) + " has non-positive raw weight");
    if (!(ed.w_renorm > 0.0 && ed.w_renorm <= 1.0)) {
      throw GraphError("edge " + std::to_string(e) + " has renormalized weight outside (0, 1]");
    }
    max_r = std::max(max_r, ed.w_renorm);
  }
  if (max_r != 1.0) throw GraphError("maximum renormalized weight is not exactly 1");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& adj = adjacency_[i];
    for (std::size_t k = 1; k < adj.size(); ++k) {
      if (adj[k].first == adj[k - 1].first) throw GraphError("duplicate edge at node " + std::to_string(i));
    }
  }
  std::vector<EdgePair> pairs;
  for (const auto& e : edges_) pairs.emplace_back(e.i, e.j);
  for (const auto& c : components(n, pairs)) {
    if (std::binary_search(c.begin(), c.end(), source_) != std::binary_search(c.begin(), c.end(), target_)) {
      throw GraphError("source and target are disconnected");
    }
  }
}

bool operator==(const TransitionGraph& a, const TransitionGraph& b) {
  if (a.source_ != b.source_ || a.target_ != b.target_ || a.config_echo_ != b.config_echo_) return false;
  if (a.nodes_.size() != b.nodes_.size() || a.edges_.size() != b.edges_.size()) return false;
  for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
    const auto& x = a.nodes_[i];
    const auto& y = b.nodes_[i];
    if (x.id != y.id || x.veff != y.veff || x.coords.size() != y.coords.size() || x.coords != y.coords) {
      return false;
    }
  }
  for (std::size_t e = 0; e < a.edges_.size(); ++e) {
    const auto& x = a.edges_[e];
    const auto& y = b.edges_[e];
    if (x.i != y.i || x.j != y.j || x.w != y.w || x.w_renorm != y.w_renorm) return false;
  }
  return true;
}

TransitionGraph weigh(const NodeSet& nodes, const std::vector<EdgePair>& edges, const GraphConfig& cfg,
                      nlohmann::json config_echo) {
  cfg.validate();
  if (nodes.veff.size() != nodes.size()) throw PreconditionError("weigh needs a smoothed V_eff per node");
  if (!cfg.s0 || !cfg.c_v || !cfg.diffusion || (cfg.weight_form == WeightForm::TimeLocal && (!cfg.c_t || !cfg.coarse_dt))) {
    throw PreconditionError("weigh needs a resolved configuration (see resolve_renormalization)");
  }
  const double s0 = *cfg.s0, cv = *cfg.c_v, dcoef = *cfg.diffusion;

  std::vector<double> reg(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    reg[i] = cv * nodes.veff[i];
    if (reg[i] + s0 < 0.0) {
      std::ostringstream os;
      os << "negative radicand at node " << i << ": C_V*V_eff = " << reg[i] << ", s0 = " << s0
         << "; s0 must be at least " << -reg[i];
      throw ConfigError(os.str());
    }
  }

  std::vector<double> w;
  w.reserve(edges.size());
  for (const auto& [i, j] : edges) {
    const double dist =
        (nodes.coords.row(static_cast<Eigen::Index>(i)) - nodes.coords.row(static_cast<Eigen::Index>(j))).norm();
    if (cfg.weight_form == WeightForm::HamiltonJacobi) {
      w.push_back(hamilton_jacobi_weight(dist, reg[i], reg[j], s0, dcoef));
    } else {
      const double dt = *cfg.coarse_dt;
      const double kinetic = *cfg.c_t * dist * dist / (4.0 * dcoef * dt);
      // (w_ij + w_ji) / 2 with the potential term shifted by s0.
      w.push_back(kinetic + 0.5 * ((reg[i] + s0) + (reg[j] + s0)) * dt);
    }
  }

  std::vector<GraphNode> gn(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    gn[i] = {i, nodes.coords.row(static_cast<Eigen::Index>(i)).transpose(), nodes.veff[i]};
  }
  return TransitionGraph::from_raw_weights(std::move(gn), edges, w, nodes.source, nodes.target,
                                           std::move(config_echo));
}

CoarsePath dijkstra(const TransitionGraph& graph) {
  return dijkstra(graph, graph.source(), graph.target(), true);
}

CoarsePath dijkstra(const TransitionGraph& graph, std::size_t from, std::size_t to, bool renormalized) {
  const std::size_t n = graph.node_count();
  if (from >= n || to >= n) throw GraphError("dijkstra endpoints out of range");
  constexpr auto kInf = std::numeric_limits<double>::infinity();
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  std::vector<double> dist(n, kInf);
  std::vector<std::size_t> pred(n, kNone);
  std::vector<bool> done(n, false);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[from] = 0.0;
  heap.emplace(0.0, from);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (done[u]) continue;
    done[u] = true;
    if (u == to) break;
    for (const auto& [v, e] : graph.incident(u)) {
      if (done[v]) continue;
      const auto& edge = graph.edges()[e];
      const double nd = d + (renormalized ? edge.w_renorm : edge.w);
      if (nd < dist[v] || (nd == dist[v] && u < pred[v])) {
        dist[v] = nd;
        pred[v] = u;
        heap.emplace(nd, v);
      }
    }
  }
  if (dist[to] == kInf) {
    throw GraphError("no path from node " + std::to_string(from) + " to node " + std::to_string(to));
  }
  CoarsePath path;
  for (std::size_t v = to; v != kNone; v = pred[v]) path.nodes.push_back(v);
  std::reverse(path.nodes.begin(), path.nodes.end());
  path.action = graph.path_action(path.nodes, renormalized);
  return path;
}

}  // namespace qtps
