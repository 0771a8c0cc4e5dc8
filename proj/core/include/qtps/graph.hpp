#pragma once

#include "qtps/dynamics.hpp"
#include "qtps/manifold.hpp"
#include "qtps/potential.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qtps {

enum class WeightForm { HamiltonJacobi, TimeLocal };

std::string to_string(WeightForm form);
WeightForm weight_form_from_string(const std::string& name);

/// Node reduction, edge construction and weighting parameters.
///
/// Optional fields are resolved from the data when absent: `s0`, `c_v` and
/// `coarse_dt` by `resolve_renormalization`, `c_t` from the atom count, and
/// `diffusion` from the Langevin parameters.
struct GraphConfig {
  double energy_quantile = 0.5;        // drop points above this energy quantile
  double diffusion_threshold = 1e-3;   // greedy subsampling radius in DC1/DC2
  double edge_diffusion_cutoff = 1e-2;
  double edge_cartesian_cutoff = 0.5;
  double smoothing_radius = 0.0;       // diffusion-space radius for V_eff averaging
  WeightForm weight_form = WeightForm::HamiltonJacobi;
  std::optional<double> s0;          // HJ frequency offset, 1/time
  std::optional<double> coarse_dt;   // Delta t of the coarse theory
  std::optional<double> sigma;       // spatial resolution
  std::optional<double> c_t;
  std::optional<double> c_v;
  std::optional<double> diffusion;   // D

  void validate() const;
};

/// C_T = (1 + m sigma^2 / (hbar_eff dt))^-1.
double kinetic_renormalization(double mass, double sigma, double hbar_eff, double coarse_dt);

/// Reduced configurations carried into the graph.
struct NodeSet {
  Eigen::MatrixXd coords;      // nu x d Cartesian coordinates
  Eigen::MatrixXd embedding;   // nu x 2 first diffusion coordinates
  std::vector<std::size_t> cloud_index;
  std::vector<double> veff;    // smoothed effective potential, filled by assign_effective_potential
  std::size_t source = 0;
  std::size_t target = 0;

  [[nodiscard]] std::size_t size() const noexcept { return cloud_index.size(); }
};

/// Indices of the cloud points at or below the requested energy quantile.
std::vector<std::size_t> energy_filter(const PointCloud& cloud, double quantile);

/// Energy filter followed by the greedy diffusion-space walk from endpoint A.
/// `embedding` must be aligned row-for-row with `cloud`.
NodeSet reduce(const PointCloud& cloud, const DiffusionEmbedding& embedding, const GraphConfig& cfg,
               const Point& endpoint_a, const Point& endpoint_b);

/// Bisects the subsampling radius so that reduce() keeps about `target_nodes` nodes.
double tune_diffusion_threshold(const PointCloud& cloud, const DiffusionEmbedding& embedding,
                                GraphConfig cfg, const Point& endpoint_a, const Point& endpoint_b,
                                std::size_t target_nodes);

/// Median nearest-neighbour distance between nodes in diffusion and Cartesian space.
std::pair<double, double> nearest_neighbor_scales(const NodeSet& nodes);

using EdgePair = std::pair<std::size_t, std::size_t>;

/// Edges (i < j) with both diffusion and Cartesian distance below their
/// cutoffs. Throws GraphError listing components when source and target are
/// disconnected.
std::vector<EdgePair> connect(const NodeSet& nodes, const GraphConfig& cfg);

/// Evaluates V_eff at every node and averages it over diffusion-space balls
/// of radius cfg.smoothing_radius.
void assign_effective_potential(NodeSet& nodes, const Potential& potential,
                                const LangevinParams& params, const GraphConfig& cfg);

/// Fills s0, c_t, c_v, coarse_dt, sigma and diffusion where absent.
GraphConfig resolve_renormalization(const NodeSet& nodes, const std::vector<EdgePair>& edges,
                                    GraphConfig cfg, const LangevinParams& params);

/// |Qi - Qj| / (2 sqrt(D)) * (Li + Lj), L = sqrt(V + s0).
double hamilton_jacobi_weight(double distance, double veff_i, double veff_j, double s0, double diffusion);

struct GraphNode {
  std::size_t id = 0;
  Point coords;
  double veff = 0.0;
};

struct GraphEdge {
  std::size_t i = 0;
  std::size_t j = 0;
  double w = 0.0;        // raw weight
  double w_renorm = 0.0; // w / w_max
};

/// Ordered node sequence from source to target with its action.
struct CoarsePath {
  std::vector<std::size_t> nodes;
  double action = 0.0;

  friend bool operator==(const CoarsePath&, const CoarsePath&) = default;
};

/// Undirected weighted graph with designated endpoints; immutable once built.
class TransitionGraph {
 public:
  TransitionGraph() = default;
  TransitionGraph(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges, std::size_t source,
                  std::size_t target, nlohmann::json config_echo = {});

  /// Builds from raw weights; renormalized weights are raw / max(raw).
  static TransitionGraph from_raw_weights(std::vector<GraphNode> nodes,
                                          const std::vector<EdgePair>& edges,
                                          const std::vector<double>& weights, std::size_t source,
                                          std::size_t target, nlohmann::json config_echo = {});

  [[nodiscard]] const std::vector<GraphNode>& nodes() const noexcept { return nodes_; }
  [[nodiscard]] const std::vector<GraphEdge>& edges() const noexcept { return edges_; }
  [[nodiscard]] std::size_t node_count() const noexcept { return nodes_.size(); }
  [[nodiscard]] std::size_t edge_count() const noexcept { return edges_.size(); }
  [[nodiscard]] std::size_t source() const noexcept { return source_; }
  [[nodiscard]] std::size_t target() const noexcept { return target_; }
  [[nodiscard]] const nlohmann::json& config_echo() const noexcept { return config_echo_; }

  /// Edge index of {i, j}, if adjacent.
  [[nodiscard]] std::optional<std::size_t> edge_index(std::size_t i, std::size_t j) const;
  /// Incident (neighbor, edge index) pairs, sorted by neighbor id.
  [[nodiscard]] const std::vector<std::pair<std::size_t, std::size_t>>& incident(std::size_t node) const;

  /// Sum of edge weights along `path`; throws GraphError on a missing edge.
  [[nodiscard]] double path_action(const std::vector<std::size_t>& path, bool renormalized = true) const;
  [[nodiscard]] double total_weight(bool renormalized = true) const;

  /// Invariants: positive raw weights, max renormalized weight 1, no
  /// self-loops or duplicate edges, endpoints valid and connected.
  void validate() const;

  friend bool operator==(const TransitionGraph& a, const TransitionGraph& b);

 private:
  void index();

  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::size_t source_ = 0;
  std::size_t target_ = 0;
  nlohmann::json config_echo_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency_;
};

/// Builds the weighted graph. Requires nodes.veff.
TransitionGraph weigh(const NodeSet& nodes, const std::vector<EdgePair>& edges, const GraphConfig& cfg,
                      nlohmann::json config_echo = {});

/// Minimum-action path between two nodes (default: source to target) over
/// renormalized weights. Ties are broken towards smaller node ids.
CoarsePath dijkstra(const TransitionGraph& graph);
CoarsePath dijkstra(const TransitionGraph& graph, std::size_t from, std::size_t to,
                    bool renormalized = true);

/// Connected components of the graph, each sorted ascending.
std::vector<std::vector<std::size_t>> components(std::size_t n, const std::vector<EdgePair>& edges);

}  // namespace qtps
