#pragma once

#include "qtps/error.hpp"
#include "qtps/potential.hpp"
#include "qtps/random.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace qtps {

/// Overdamped Langevin parameters. Toy landscapes use atoms = 1, dimension = 2.
struct LangevinParams {
  double mass = 1.0;
  double friction = 1.0;     // gamma, 1/time
  double temperature = 0.1;  // k_B T, energy units
  double dt = 1e-3;
  int dimension = 2;
  int atoms = 1;

  /// D = k_B T / (m gamma)
  [[nodiscard]] double diffusion() const noexcept { return temperature / (mass * friction); }
  /// hbar_eff = 2 k_B T / gamma
  [[nodiscard]] double hbar_eff() const noexcept { return 2.0 * temperature / friction; }

  /// Throws ConfigError naming the first non-positive field.
  void validate() const;
};

/// Raised when the force field is not finite at the current configuration.
class IntegrationError : public NumericError {
 public:
  IntegrationError(const std::string& what, Point where, std::optional<std::size_t> step = {})
      : NumericError(what), point_(std::move(where)), step_(step) {}

  [[nodiscard]] const Point& point() const noexcept { return point_; }
  [[nodiscard]] std::optional<std::size_t> step_index() const noexcept { return step_; }

 private:
  Point point_;
  std::optional<std::size_t> step_;
};

struct Trajectory {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<Point> points;
  std::uint64_t seed = 0;  // key of the originating stream

  [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
};

/// One Euler-Maruyama step: q - dt/(m gamma) grad U + sqrt(2 D dt) xi.
Point step(const Point& q, const Potential& potential, const LangevinParams& params,
           RandomStream& noise);

/// n_steps integration steps from q0; returns n_steps + 1 points starting at q0.
Trajectory burst(const Point& q0, std::size_t n_steps, const Potential& potential,
                 const LangevinParams& params, RandomStream& noise);

/// (1 / (2 m gamma^2)) * (|grad U|^2 - hbar_eff * gamma * lap U)
double effective_potential(const Point& q, const Potential& potential,
                           const LangevinParams& params);

/// Arithmetic mean of `values` over each node's neighborhood. Every
/// neighborhood must be non-empty and contain its own node.
std::vector<double> smooth_effective_potential(std::span<const double> values,
                                               const std::vector<std::vector<std::size_t>>& neighborhoods);

/// Heuristic coarse time resolution: mean time for the trajectory to move a
/// distance `sigma` away from a starting frame, averaged over starting frames
/// spaced `stride` apart. Empty when no excursion reaches sigma.
std::optional<double> mean_excursion_time(const Trajectory& trajectory, double sigma,
                                          std::size_t stride = 1);

/// CSV with header `t,x0,...,x{d-1}`.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace qtps
