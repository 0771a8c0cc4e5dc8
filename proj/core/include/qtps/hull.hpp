#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace qtps {

/// Indices of the vertices of the convex hull of the rows of `points`
/// (M x 2 or M x 3), sorted ascending. Points lying on hull edges or faces
/// without being corners are not reported. Throws NumericError when the
/// point set is collinear (2-D) or coplanar (3-D).
std::vector<std::size_t> convex_hull_vertices(const Eigen::MatrixXd& points);

}  // namespace qtps
