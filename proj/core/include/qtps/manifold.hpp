#pragma once

#include "qtps/dynamics.hpp"
#include "qtps/potential.hpp"
#include "qtps/random.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace qtps {

/// M configurations (rows) in d dimensions, optionally tagged.
struct PointCloud {
  Eigen::MatrixXd points;
  std::vector<double> energy;   // empty or one per point
  std::vector<int> basin;       // empty or one per point
  std::vector<int> iteration;   // empty or one per point

  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(points.rows()); }
  [[nodiscard]] int dimension() const noexcept { return static_cast<int>(points.cols()); }
  [[nodiscard]] Point point(std::size_t i) const { return points.row(static_cast<Eigen::Index>(i)).transpose(); }

  /// Rows picked by `rows`, carrying their tags along.
  [[nodiscard]] PointCloud subset(const std::vector<std::size_t>& rows) const;
  /// Drops exact duplicate rows, keeping the first occurrence.
  void deduplicate();
  /// M >= 2, finite entries, tag vectors sized consistently.
  void validate() const;
};

using Metric = std::function<double(const Point&, const Point&)>;

double euclidean_distance(const Point& a, const Point& b);

/// Symmetric M x M distance matrix between cloud rows.
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points, const Metric& metric = {});

struct DistanceStats {
  double mean = 0.0;
  double stddev = 0.0;
  double median = 0.0;
};

/// Statistics over the strictly upper triangle of a distance matrix.
DistanceStats distance_stats(const Eigen::MatrixXd& distances);

/// mean - std of pairwise distances, or the median when that is not positive.
double neighborhood_scale(const DistanceStats& stats);

struct DiffusionMapOptions {
  std::optional<double> epsilon;  // kernel bandwidth; default from neighborhood_scale
  bool keep_transition_matrix = false;
  Metric metric;  // default Euclidean
};

/// Spectral embedding of the row-normalized Gaussian kernel.
///
/// Column 0 of `eigenvectors` is the trivial pair (eigenvalue 1, constant
/// vector); columns 1..n_keep are the diffusion coordinates. Every column has
/// unit Euclidean norm and its largest-magnitude entry positive.
struct DiffusionEmbedding {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  double epsilon = 0.0;
  std::optional<Eigen::MatrixXd> transition;

  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(eigenvectors.rows()); }
  [[nodiscard]] std::size_t n_coordinates() const noexcept {
    return eigenvectors.cols() > 0 ? static_cast<std::size_t>(eigenvectors.cols() - 1) : 0;
  }
  /// M x n matrix of the first n diffusion coordinates.
  [[nodiscard]] Eigen::MatrixXd coordinates(std::size_t n) const;
};

DiffusionEmbedding diffusion_map(const PointCloud& cloud, std::size_t n_keep,
                                 const DiffusionMapOptions& options = {});

/// Convex-hull vertices of the first n_dims diffusion coordinates.
std::vector<std::size_t> boundary(const DiffusionEmbedding& embedding, int n_dims = 2);

/// New configuration a distance c beyond boundary point `boundary_idx`,
/// along the direction from its neighbor centroid, built in the local PCA frame.
Point shoot(const PointCloud& cloud, std::size_t boundary_idx, double neighbor_radius, double c,
            const Metric& metric = {});

struct ExploreConfig {
  std::size_t initial_steps = 20000;  // first burst in each basin
  std::size_t burst_steps = 400;      // bursts started from shot configurations
  std::size_t record_stride = 50;     // keep every n-th frame of a burst
  double shoot_distance = 0.1;        // c
  double overlap_threshold = 0.1;
  std::size_t max_iterations = 40;
  int hull_dims = 2;
  std::optional<double> epsilon;          // diffusion kernel bandwidth
  std::optional<double> neighbor_radius;  // shooting neighborhood
  std::size_t max_embedding_points = 600; // larger basins are thinned for the embedding

  void validate() const;
};

struct ExploreResult {
  PointCloud cloud;   // energies, basin (0/1) and iteration tags filled
  bool converged = false;
  std::size_t iterations = 0;
  double min_cross_distance = 0.0;
  std::vector<std::size_t> size_history;  // merged size after each iteration
};

/// Alternates Langevin bursts and boundary shooting from two seed basins
/// until the basins overlap or the iteration cap is reached.
ExploreResult explore(const Potential& potential, const LangevinParams& params, const Point& seed_a,
                      const Point& seed_b, const ExploreConfig& config, const RandomStream& stream);

}  // namespace qtps
