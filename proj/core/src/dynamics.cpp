#include "qtps/dynamics.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace qtps {
namespace {

std::string describe(const Point& q) {
  std::ostringstream os;
  os << std::setprecision(17) << "(";
  for (Eigen::Index i = 0; i < q.size(); ++i) os << (i ? ", " : "") << q[i];
  os << ")";
  return os.str();
}

}  // namespace

void LangevinParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string("langevin parameter '") + name + "' must be positive and finite");
    }
  };
  positive(mass, "mass");
  positive(friction, "friction");
  positive(temperature, "temperature");
  positive(dt, "dt");
  if (dimension < 1) throw ConfigError("langevin parameter 'dimension' must be positive");
  if (atoms < 1) throw ConfigError("langevin parameter 'atoms' must be positive");
}

Point step(const Point& q, const Potential& potential, const LangevinParams& params,
           RandomStream& noise) {
  const Point grad = potential.gradient(q);
  if (!grad.allFinite() || !std::isfinite(potential.energy(q))) {
    throw IntegrationError("non-finite energy or gradient at " + describe(q), q);
  }
  const double drift = params.dt / (params.mass * params.friction);
  const double amplitude = std::sqrt(2.0 * params.diffusion() * params.dt);
  Point next = q - drift * grad;
  for (Eigen::Index i = 0; i < next.size(); ++i) next[i] += amplitude * noise.normal();
  return next;
}

Trajectory burst(const Point& q0, std::size_t n_steps, const Potential& potential,
                 const LangevinParams& params, RandomStream& noise) {
  if (n_steps < 1) throw PreconditionError("burst needs at least one step");
  Trajectory traj;
  traj.dt = params.dt;
  traj.seed = noise.key();
  traj.times.reserve(n_steps + 1);
  traj.points.reserve(n_steps + 1);
  traj.times.push_back(0.0);
  traj.points.push_back(q0);
  for (std::size_t i = 0; i < n_steps; ++i) {
    try {
      traj.points.push_back(step(traj.points.back(), potential, params, noise));
    } catch (const IntegrationError& e) {
      throw IntegrationError(std::string(e.what()) + " (step " + std::to_string(i) + ")", e.point(), i);
    }
    traj.times.push_back(static_cast<double>(i + 1) * params.dt);
  }
  return traj;
}

double effective_potential(const Point& q, const Potential& potential,
                           const LangevinParams& params) {
  const Point grad = potential.gradient(q);
  const double lap = potential.laplacian(q);
  return (grad.squaredNorm() - params.hbar_eff() * params.friction * lap) /
         (2.0 * params.mass * params.friction * params.friction);
}

std::vector<double> smooth_effective_potential(std::span<const double> values,
                                               const std::vector<std::vector<std::size_t>>& neighborhoods) {
  if (neighborhoods.size() != values.size()) {
    throw PreconditionError("smoothing needs one neighborhood per node");
  }
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& nb = neighborhoods[i];
    if (nb.empty()) throw PreconditionError("node " + std::to_string(i) + " has an empty neighborhood");
    double sum = 0.0;
    bool has_self = false;
    for (std::size_t j : nb) {
      if (j >= values.size()) {
        throw PreconditionError("neighborhood of node " + std::to_string(i) + " references node " +
                                std::to_string(j) + " out of range");
      }
      has_self |= (j == i);
      sum += values[j];
    }
    if (!has_self) {
      throw PreconditionError("neighborhood of node " + std::to_string(i) + " does not contain the node");
    }
    out[i] = sum / static_cast<double>(nb.size());
  }
  return out;
}

std::optional<double> mean_excursion_time(const Trajectory& trajectory, double sigma,
                                          std::size_t stride) {
  if (stride == 0) stride = 1;
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t start = 0; start < trajectory.size(); start += stride) {
    const Point& origin = trajectory.points[start];
    for (std::size_t k = start + 1; k < trajectory.size(); ++k) {
      if ((trajectory.points[k] - origin).norm() >= sigma) {
        total += trajectory.times[k] - trajectory.times[start];
        ++count;
        break;
      }
    }
  }
  if (count == 0) return std::nullopt;
  return total / static_cast<double>(count);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  const Eigen::Index d = trajectory.points.empty() ? 0 : trajectory.points.front().size();
  out << "t";
  for (Eigen::Index i = 0; i < d; ++i) out << ",x" << i;
  out << "\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    out << trajectory.times[k];
    for (Eigen::Index i = 0; i < d; ++i) out << "," << trajectory.points[k][i];
    out << "\n";
  }
}

}  // namespace qtps
