#include "qtps/manifold.hpp"

#include "qtps/error.hpp"
#include "qtps/hull.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

namespace qtps {
namespace {

double apply_metric(const Metric& metric, const Point& a, const Point& b) {
  return metric ? metric(a, b) : (a - b).norm();
}

DiffusionEmbedding embed_from_distances(const Eigen::MatrixXd& dist, std::size_t n_keep,
                                        double epsilon, bool keep_transition) {
  const Eigen::Index m = dist.rows();
  const Eigen::MatrixXd kernel = (-(dist.array() / epsilon).square()).exp().matrix();
  const Eigen::VectorXd row_sum = kernel.rowwise().sum();
  const Eigen::VectorXd inv_sqrt = row_sum.array().rsqrt();

  // P = D^-1 K is similar to the symmetric S = D^-1/2 K D^-1/2.
  const Eigen::MatrixXd sym = inv_sqrt.asDiagonal() * kernel * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericError("diffusion map eigensolver did not converge (M = " + std::to_string(m) + ")");
  }

  const auto cols = static_cast<Eigen::Index>(n_keep + 1);
  DiffusionEmbedding out;
  out.epsilon = epsilon;
  out.eigenvalues.resize(cols);
  out.eigenvectors.resize(m, cols);
  for (Eigen::Index k = 0; k < cols; ++k) {
    const Eigen::Index src = m - 1 - k;  // eigenvalues come in ascending order
    out.eigenvalues[k] = solver.eigenvalues()[src];
    Eigen::VectorXd psi = inv_sqrt.cwiseProduct(solver.eigenvectors().col(src));
    psi.normalize();
    Eigen::Index arg = 0;
    psi.cwiseAbs().maxCoeff(&arg);
    if (psi[arg] < 0.0) psi = -psi;
    out.eigenvectors.col(k) = psi;
  }
  if (keep_transition) out.transition = (1.0 / row_sum.array()).matrix().asDiagonal() * kernel;
  return out;
}

double resolve_bandwidth(const DistanceStats& stats, std::optional<double> requested) {
  const double eps = requested ? *requested : neighborhood_scale(stats);
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    std::ostringstream os;
    os << "diffusion kernel bandwidth " << eps << " is not positive (pairwise distance mean "
       << stats.mean << ", std " << stats.stddev << ", median " << stats.median << ")";
    throw NumericError(os.str());
  }
  return eps;
}

}  // namespace

PointCloud PointCloud::subset(const std::vector<std::size_t>& rows) const {
  PointCloud out;
  out.points.resize(static_cast<Eigen::Index>(rows.size()), points.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.points.row(static_cast<Eigen::Index>(r)) = points.row(static_cast<Eigen::Index>(rows[r]));
    if (!energy.empty()) out.energy.push_back(energy[rows[r]]);
    if (!basin.empty()) out.basin.push_back(basin[rows[r]]);
    if (!iteration.empty()) out.iteration.push_back(iteration[rows[r]]);
  }
  return out;
}

void PointCloud::deduplicate() {
  std::vector<std::size_t> keep;
  std::set<std::vector<double>> seen;
  for (std::size_t i = 0; i < size(); ++i) {
    const Eigen::VectorXd row = points.row(static_cast<Eigen::Index>(i));
    std::vector<double> key(row.data(), row.data() + row.size());
    if (seen.insert(std::move(key)).second) keep.push_back(i);
  }
  if (keep.size() != size()) *this = subset(keep);
}

void PointCloud::validate() const {
  if (size() < 2) throw PreconditionError("point cloud needs at least 2 configurations");
  if (!points.allFinite()) throw PreconditionError("point cloud has non-finite coordinates");
  auto tag_ok = [&](std::size_t n) { return n == 0 || n == size(); };
  if (!tag_ok(energy.size()) || !tag_ok(basin.size()) || !tag_ok(iteration.size())) {
    throw PreconditionError("point cloud tag vectors do not match the number of points");
  }
}

double euclidean_distance(const Point& a, const Point& b) { return (a - b).norm(); }

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points, const Metric& metric) {
  const Eigen::Index m = points.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, m);
  if (!metric) {
    const Eigen::VectorXd sq = points.rowwise().squaredNorm();
    Eigen::MatrixXd g = points * points.transpose();
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = i + 1; j < m; ++j) {
        const double v = std::sqrt(std::max(0.0, sq[i] + sq[j] - 2.0 * g(i, j)));
        // Cancellation can lose precision for close points; recompute directly.
        const double dist = v < 1e-6 * std::sqrt(std::max(sq[i], sq[j]))
                                ? (points.row(i) - points.row(j)).norm()
                                : v;
        d(i, j) = d(j, i) = dist;
      }
    }
    return d;
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      d(i, j) = d(j, i) = metric(points.row(i).transpose(), points.row(j).transpose());
    }
  }
  return d;
}

DistanceStats distance_stats(const Eigen::MatrixXd& distances) {
  const Eigen::Index m = distances.rows();
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) vals.push_back(distances(i, j));
  }
  DistanceStats s;
  if (vals.empty()) return s;
  const double n = static_cast<double>(vals.size());
  s.mean = std::accumulate(vals.begin(), vals.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : vals) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / n);
  const auto mid = vals.begin() + static_cast<std::ptrdiff_t>(vals.size() / 2);
  std::nth_element(vals.begin(), mid, vals.end());
  s.median = *mid;
  if (vals.size() % 2 == 0) {
    s.median = 0.5 * (s.median + *std::max_element(vals.begin(), mid));
  }
  return s;
}

double neighborhood_scale(const DistanceStats& stats) {
  const double scale = stats.mean - stats.stddev;
  return scale > 0.0 ? scale : stats.median;
}

Eigen::MatrixXd DiffusionEmbedding::coordinates(std::size_t n) const {
  if (n > n_coordinates()) {
    throw PreconditionError("embedding holds " + std::to_string(n_coordinates()) +
                            " diffusion coordinates, " + std::to_string(n) + " requested");
  }
  return eigenvectors.middleCols(1, static_cast<Eigen::Index>(n));
}

DiffusionEmbedding diffusion_map(const PointCloud& cloud, std::size_t n_keep,
                                 const DiffusionMapOptions& options) {
  cloud.validate();
  if (cloud.size() < n_keep + 1) {
    throw PreconditionError("diffusion map needs M >= n_keep + 1 (M = " + std::to_string(cloud.size()) +
                            ", n_keep = " + std::to_string(n_keep) + ")");
  }
  const Eigen::MatrixXd dist = pairwise_distances(cloud.points, options.metric);
  const double eps = resolve_bandwidth(distance_stats(dist), options.epsilon);
  return embed_from_distances(dist, n_keep, eps, options.keep_transition_matrix);
}

std::vector<std::size_t> boundary(const DiffusionEmbedding& embedding, int n_dims) {
  if (n_dims != 2 && n_dims != 3) throw PreconditionError("boundary needs n_dims in {2, 3}");
  if (embedding.size() <= static_cast<std::size_t>(n_dims) + 1) {
    throw PreconditionError("boundary needs M > n_dims + 1");
  }
  return convex_hull_vertices(embedding.coordinates(static_cast<std::size_t>(n_dims)));
}

Point shoot(const PointCloud& cloud, std::size_t boundary_idx, double neighbor_radius, double c,
            const Metric& metric) {
  if (boundary_idx >= cloud.size()) throw PreconditionError("boundary index out of range");
  if (!(c > 0.0)) throw PreconditionError("shooting distance c must be positive");
  const Point qb = cloud.point(boundary_idx);

  std::vector<std::size_t> nbrs;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (i != boundary_idx && apply_metric(metric, qb, cloud.point(i)) <= neighbor_radius) {
      nbrs.push_back(i);
    }
  }
  if (nbrs.size() < 2) {
    throw NumericError("boundary point " + std::to_string(boundary_idx) + " has " +
                       std::to_string(nbrs.size()) + " neighbors within radius, need 2");
  }

  const Eigen::MatrixXd local = cloud.subset(nbrs).points;
  const Eigen::RowVectorXd qc = local.colwise().mean();
  const Eigen::MatrixXd centered = local.rowwise() - qc;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(nbrs.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> pca(cov);
  if (pca.info() != Eigen::Success) throw NumericError("local PCA did not converge");
  const Eigen::MatrixXd loadings = pca.eigenvectors().rowwise().reverse();

  // Projections onto the principal axes.
  const Eigen::RowVectorXd delta = (qb.transpose() - qc) * loadings;
  const double norm = delta.norm();
  if (!(norm > 0.0)) {
    throw NumericError("boundary point " + std::to_string(boundary_idx) +
                       " coincides with its neighbor centroid; shooting direction undefined");
  }
  const Eigen::RowVectorXd q_new = delta + c * delta / norm;
  return (q_new * loadings.transpose() + qc).transpose();
}

void ExploreConfig::validate() const {
  if (initial_steps < 1 || burst_steps < 1) throw ConfigError("manifold: burst lengths must be >= 1");
  if (record_stride < 1) throw ConfigError("manifold: record_stride must be >= 1");
  if (!(shoot_distance > 0.0)) throw ConfigError("manifold: shoot_distance must be positive");
  if (!(overlap_threshold > 0.0)) throw ConfigError("manifold: overlap_threshold must be positive");
  if (hull_dims != 2 && hull_dims != 3) throw ConfigError("manifold: hull_dims must be 2 or 3");
  if (epsilon && !(*epsilon > 0.0)) throw ConfigError("manifold: epsilon must be positive");
  if (neighbor_radius && !(*neighbor_radius > 0.0)) {
    throw ConfigError("manifold: neighbor_radius must be positive");
  }
  if (max_embedding_points < 8) throw ConfigError("manifold: max_embedding_points must be >= 8");
}

namespace {

struct Basin {
  std::vector<Point> points;
  std::vector<int> iteration;
};

void record(Basin& basin, const Trajectory& traj, std::size_t stride, bool include_start, int it) {
  for (std::size_t k = include_start ? 0 : stride; k < traj.size(); k += stride) {
    basin.points.push_back(traj.points[k]);
    basin.iteration.push_back(it);
  }
}

Eigen::MatrixXd stack(const std::vector<Point>& pts) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(pts.size()), pts.empty() ? 0 : pts.front().size());
  for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  return m;
}

double min_cross_distance(const Basin& a, const Basin& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : a.points) {
    for (const auto& q : b.points) best = std::min(best, (p - q).squaredNorm());
  }
  return std::sqrt(best);
}

// One shooting round for a basin; returns the new points tagged with `it`.
Basin grow(const Basin& basin, const Potential& potential, const LangevinParams& params,
           const ExploreConfig& cfg, const RandomStream& stream, int it) {
  const std::size_t m = basin.points.size();
  std::vector<std::size_t> rows;
  if (m > cfg.max_embedding_points) {
    for (std::size_t i = 0; i < cfg.max_embedding_points; ++i) rows.push_back(i * m / cfg.max_embedding_points);
  } else {
    rows.resize(m);
    std::iota(rows.begin(), rows.end(), 0);
  }
  std::vector<Point> pts;
  for (std::size_t r : rows) pts.push_back(basin.points[r]);
  PointCloud local;
  local.points = stack(pts);
  local.deduplicate();

  Basin added;
  if (local.size() <= static_cast<std::size_t>(cfg.hull_dims) + 2) return added;

  const Eigen::MatrixXd dist = pairwise_distances(local.points);
  const DistanceStats stats = distance_stats(dist);
  const double eps = resolve_bandwidth(stats, cfg.epsilon);
  const double radius = cfg.neighbor_radius ? *cfg.neighbor_radius : neighborhood_scale(stats);
  const DiffusionEmbedding emb =
      embed_from_distances(dist, static_cast<std::size_t>(cfg.hull_dims), eps, false);

  std::vector<std::size_t> hull;
  try {
    hull = boundary(emb, cfg.hull_dims);
  } catch (const NumericError&) {
    return added;
  }
  for (std::size_t j = 0; j < hull.size(); ++j) {
    Point start;
    try {
      start = shoot(local, hull[j], radius, cfg.shoot_distance);
    } catch (const NumericError&) {
      continue;  // too few neighbors or undefined direction
    }
    RandomStream noise = stream.split(j);
    const Trajectory traj = burst(start, cfg.burst_steps, potential, params, noise);
    record(added, traj, cfg.record_stride, false, it);
  }
  return added;
}

}  // namespace

ExploreResult explore(const Potential& potential, const LangevinParams& params, const Point& seed_a,
                      const Point& seed_b, const ExploreConfig& config, const RandomStream& stream) {
  config.validate();
  params.validate();
  if (seed_a.size() != potential.dimension() || seed_b.size() != potential.dimension()) {
    throw PreconditionError("explore seeds must match the potential dimension");
  }

  std::array<Basin, 2> basins;
  const std::array<const Point*, 2> seeds{&seed_a, &seed_b};
  for (int b = 0; b < 2; ++b) {
    RandomStream noise = stream.split(static_cast<std::uint64_t>(b)).split(0);
    const Trajectory traj = burst(*seeds[b], config.initial_steps, potential, params, noise);
    record(basins[b], traj, config.record_stride, true, 0);
  }

  ExploreResult result;
  result.min_cross_distance = min_cross_distance(basins[0], basins[1]);
  result.size_history.push_back(basins[0].points.size() + basins[1].points.size());
  std::size_t it = 0;
  while (result.min_cross_distance >= config.overlap_threshold && it < config.max_iterations) {
    ++it;
    const int tag = static_cast<int>(it);
    auto job = [&](int b) {
      return grow(basins[b], potential, params, config,
                  stream.split(static_cast<std::uint64_t>(b)).split(it), tag);
    };
    auto far = std::async(std::launch::async, job, 1);
    Basin added0 = job(0);
    Basin added1 = far.get();
    for (auto [b, add] : {std::pair{0, &added0}, std::pair{1, &added1}}) {
      basins[b].points.insert(basins[b].points.end(), add->points.begin(), add->points.end());
      basins[b].iteration.insert(basins[b].iteration.end(), add->iteration.begin(), add->iteration.end());
    }
    result.min_cross_distance = min_cross_distance(basins[0], basins[1]);
    result.size_history.push_back(basins[0].points.size() + basins[1].points.size());
  }
  result.iterations = it;
  result.converged = result.min_cross_distance < config.overlap_threshold;

  std::vector<Point> merged;
  for (int b = 0; b < 2; ++b) {
    for (std::size_t i = 0; i < basins[b].points.size(); ++i) {
      merged.push_back(basins[b].points[i]);
      result.cloud.basin.push_back(b);
      result.cloud.iteration.push_back(basins[b].iteration[i]);
    }
  }
  result.cloud.points = stack(merged);
  for (const auto& p : merged) result.cloud.energy.push_back(potential.energy(p));
  result.cloud.deduplicate();
  return result;
}

}  // namespace qtps
