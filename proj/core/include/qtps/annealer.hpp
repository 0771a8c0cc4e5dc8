#pragma once

#include "qtps/qubo.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qtps {

struct AnnealRequest {
  const QuboProblem& problem;
  double budget = 1.0;  // t_sweep, seconds of nominal effort
  std::uint64_t seed = 0;
  std::size_t num_reads = 1;

  void validate() const;
};

struct AnnealOutcome {
  BinaryAssignment best;               // minimal energy among reads
  std::vector<BinaryAssignment> reads; // energies re-evaluated locally
  double wall_seconds = 0.0;
  std::string backend;
};

/// Trial-path generator. Implementations must accept concurrent calls.
class Backend {
 public:
  virtual ~Backend() = default;
  [[nodiscard]] virtual std::string id() const = 0;
  [[nodiscard]] virtual AnnealOutcome anneal(const AnnealRequest& request) const = 0;
};

enum class InitialState { Random, Zero };

std::string to_string(InitialState init);
InitialState initial_state_from_string(const std::string& name);

/// Local simulated annealing: round(kappa * budget) single-bit Metropolis
/// sweeps (at least one) under a geometric inverse-temperature schedule,
/// starting from a uniformly random or an all-zero assignment.
struct AnnealerConfig {
  double sweeps_per_second = 1.0;                    // kappa
  std::size_t num_reads = 1;
  std::optional<std::pair<double, double>> beta_range;  // (hot, cold); heuristic when absent
  std::optional<double> alpha;                       // constraint strength; sum of weights when absent
  InitialState initial_state = InitialState::Zero;

  void validate() const;
};

/// Weight-based range: the hot end sits at ten times the largest edge weight
/// (temperature), the cold end rejects an increase by the median edge weight
/// with probability 0.99. Constraint terms stay frozen throughout when alpha is large.
std::pair<double, double> default_beta_range(const QuboProblem& problem);

class SimulatedAnnealer final : public Backend {
 public:
  explicit SimulatedAnnealer(AnnealerConfig cfg = {});

  [[nodiscard]] std::string id() const override { return "simulated-annealing"; }
  [[nodiscard]] AnnealOutcome anneal(const AnnealRequest& request) const override;
  [[nodiscard]] std::size_t sweeps_for(double budget) const;
  [[nodiscard]] const AnnealerConfig& config() const noexcept { return cfg_; }

 private:
  AnnealerConfig cfg_;
};

struct RemoteConfig {
  std::string url;    // scheme://host[:port]
  std::string token;  // bearer token, may be empty

  /// QTPS_SOLVER_URL and QTPS_SOLVER_TOKEN.
  static RemoteConfig from_environment();
};

/// JSON client for a QUBO sampling service (POST /solve). No retries.
class RemoteBackend final : public Backend {
 public:
  explicit RemoteBackend(RemoteConfig cfg);

  [[nodiscard]] std::string id() const override { return "remote:" + cfg_.url; }
  [[nodiscard]] AnnealOutcome anneal(const AnnealRequest& request) const override;

  /// 2 * budget + 10 s.
  static std::chrono::milliseconds timeout_for(double budget);
  static nlohmann::json request_body(const AnnealRequest& request);
  /// Parses and re-evaluates a service response against the request problem.
  static AnnealOutcome parse_response(const AnnealRequest& request, const std::string& body);

 private:
  RemoteConfig cfg_;
};

inline constexpr double kDeltaFloor = 1e-3;
inline constexpr std::size_t kMinCalibrationAttempts = 20;

struct CalibrationPoint {
  double budget = 0.0;
  double mean = 0.0;    // mean action of valid outcomes
  double stddev = 0.0;  // floored population standard deviation
  std::size_t attempts = 0;
  std::size_t valid = 0;

  [[nodiscard]] double success_rate() const noexcept {
    return attempts == 0 ? 0.0 : static_cast<double>(valid) / static_cast<double>(attempts);
  }
  friend bool operator==(const CalibrationPoint&, const CalibrationPoint&) = default;
};

/// Gaussian model of proposal actions per budget.
struct Calibration {
  std::vector<CalibrationPoint> points;  // strictly increasing budgets
  double delta_floor = kDeltaFloor;

  void validate() const;
  [[nodiscard]] double min_budget() const { return points.front().budget; }
  [[nodiscard]] double max_budget() const { return points.back().budget; }
  [[nodiscard]] bool covers(double budget) const;
  /// (mean, stddev) linearly interpolated between bracketing budgets.
  [[nodiscard]] std::pair<double, double> moments(double budget) const;
  [[nodiscard]] std::size_t total_attempts() const;
  [[nodiscard]] std::size_t total_valid() const;

  friend bool operator==(const Calibration&, const Calibration&) = default;
};

struct CalibrationOptions {
  std::vector<double> budgets;
  std::size_t attempts_per_budget = kMinCalibrationAttempts;
  std::size_t num_reads = 1;
  std::uint64_t seed = 0;
  double delta_floor = kDeltaFloor;

  void validate() const;
};

/// Seed of attempt `attempt` at budget index `budget_index`.
std::uint64_t calibration_seed(std::uint64_t seed, std::size_t budget_index, std::size_t attempt);

/// Anneals every budget `attempts_per_budget` times (budgets concurrently),
/// decodes each best read and fits the action moments of the valid ones.
Calibration calibrate(const QuboProblem& problem, const CalibrationOptions& opts, const Backend& backend);

double log_outcome_density(const Calibration& cal, double energy, double budget);
double outcome_density(const Calibration& cal, double energy, double budget);

}  // namespace qtps
