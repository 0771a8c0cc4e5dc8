#include "qtps/hull.hpp"

#include "qtps/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <utility>

namespace qtps {
namespace {

double extent_of(const Eigen::MatrixXd& pts) {
  const Eigen::VectorXd span = pts.colwise().maxCoeff() - pts.colwise().minCoeff();
  return span.maxCoeff();
}

double cross2(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Andrew's monotone chain, strict turns only.
std::vector<std::size_t> hull2(const Eigen::MatrixXd& pts) {
  const std::size_t m = static_cast<std::size_t>(pts.rows());
  const double scale = extent_of(pts);
  const double eps = 1e-12 * scale * scale;
  auto at = [&](std::size_t i) { return Eigen::Vector2d(pts(i, 0), pts(i, 1)); };

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pts(a, 0) != pts(b, 0)) return pts(a, 0) < pts(b, 0);
    if (pts(a, 1) != pts(b, 1)) return pts(a, 1) < pts(b, 1);
    return a < b;
  });

  std::vector<std::size_t> chain(2 * m);
  std::size_t k = 0;
  for (std::size_t i : order) {
    while (k >= 2 && cross2(at(chain[k - 2]), at(chain[k - 1]), at(i)) <= eps) --k;
    chain[k++] = i;
  }
  for (std::size_t idx = m - 1, lower = k + 1; idx-- > 0;) {
    const std::size_t i = order[idx];
    while (k >= lower && cross2(at(chain[k - 2]), at(chain[k - 1]), at(i)) <= eps) --k;
    chain[k++] = i;
  }
  chain.resize(k - 1);
  if (chain.size() < 3) throw NumericError("degenerate hull: points are collinear in the embedding");
  std::sort(chain.begin(), chain.end());
  chain.erase(std::unique(chain.begin(), chain.end()), chain.end());
  return chain;
}

struct Face {
  std::array<std::size_t, 3> v;
  Eigen::Vector3d normal;
  double offset;  // normal . x = offset on the plane
};

// Incremental hull, O(M * faces).
std::vector<std::size_t> hull3(const Eigen::MatrixXd& pts) {
  const std::size_t m = static_cast<std::size_t>(pts.rows());
  const double scale = extent_of(pts);
  const double eps = 1e-10 * scale;
  auto at = [&](std::size_t i) { return Eigen::Vector3d(pts(i, 0), pts(i, 1), pts(i, 2)); };

  // Initial non-degenerate tetrahedron.
  std::size_t i0 = 0, i1 = 0, i2 = 0, i3 = 0;
  double best = -1.0;
  for (std::size_t i = 1; i < m; ++i) {
    const double d = (at(i) - at(i0)).norm();
    if (d > best) best = d, i1 = i;
  }
  if (best <= eps) throw NumericError("degenerate hull: all points coincide in the embedding");
  best = -1.0;
  const Eigen::Vector3d axis = (at(i1) - at(i0)).normalized();
  for (std::size_t i = 0; i < m; ++i) {
    const double d = (at(i) - at(i0)).cross(axis).norm();
    if (d > best) best = d, i2 = i;
  }
  if (best <= eps) throw NumericError("degenerate hull: points are collinear in the embedding");
  const Eigen::Vector3d plane_n = (at(i1) - at(i0)).cross(at(i2) - at(i0)).normalized();
  best = -1.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double d = std::abs(plane_n.dot(at(i) - at(i0)));
    if (d > best) best = d, i3 = i;
  }
  if (best <= eps) throw NumericError("degenerate hull: points are coplanar in the embedding");

  const Eigen::Vector3d interior = (at(i0) + at(i1) + at(i2) + at(i3)) / 4.0;
  auto make_face = [&](std::size_t a, std::size_t b, std::size_t c) {
    Face f{{a, b, c}, (at(b) - at(a)).cross(at(c) - at(a)).normalized(), 0.0};
    f.offset = f.normal.dot(at(a));
    if (f.normal.dot(interior) - f.offset > 0.0) {
      std::swap(f.v[1], f.v[2]);
      f.normal = -f.normal;
      f.offset = -f.offset;
    }
    return f;
  };
  std::vector<Face> faces{make_face(i0, i1, i2), make_face(i0, i1, i3), make_face(i0, i2, i3),
                          make_face(i1, i2, i3)};

  for (std::size_t p = 0; p < m; ++p) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    const Eigen::Vector3d x = at(p);
    std::vector<bool> visible(faces.size());
    bool any = false;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      visible[f] = faces[f].normal.dot(x) - faces[f].offset > eps;
      any |= visible[f];
    }
    if (!any) continue;

    std::set<std::pair<std::size_t, std::size_t>> directed;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (!visible[f]) continue;
      const auto& v = faces[f].v;
      for (int e = 0; e < 3; ++e) directed.emplace(v[e], v[(e + 1) % 3]);
    }
    std::vector<Face> next;
    next.reserve(faces.size() + 8);
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (!visible[f]) next.push_back(faces[f]);
    }
    for (const auto& [a, b] : directed) {
      if (directed.count({b, a})) continue;  // interior edge of the visible region
      Face nf{{a, b, p}, (at(b) - at(a)).cross(x - at(a)).normalized(), 0.0};
      nf.offset = nf.normal.dot(at(a));
      next.push_back(nf);
    }
    faces = std::move(next);
  }

  std::set<std::size_t> verts;
  for (const auto& f : faces) verts.insert(f.v.begin(), f.v.end());
  return {verts.begin(), verts.end()};
}

}  // namespace

std::vector<std::size_t> convex_hull_vertices(const Eigen::MatrixXd& points) {
  const auto dims = points.cols();
  if (dims != 2 && dims != 3) {
    throw PreconditionError("convex hull supports 2 or 3 dimensions, got " + std::to_string(dims));
  }
  if (points.rows() < dims + 1) {
    throw PreconditionError("convex hull in " + std::to_string(dims) + "-D needs more than " +
                            std::to_string(dims) + " points");
  }
  return dims == 2 ? hull2(points) : hull3(points);
}

}  // namespace qtps
