#pragma once

#include "qtps/annealer.hpp"
#include "qtps/graph.hpp"
#include "qtps/qubo.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qtps {

/// Sweep-time dynamics t' = t - dt k (t - t0) + sqrt(2 dt) xi and chain length.
struct ChainConfig {
  double t0 = 150.0;      // seconds
  double k = 2e-4;        // 1/seconds
  double dt = 250.0;      // proposal step, seconds
  std::size_t steps = 100;
  std::uint64_t seed = 0;
  std::optional<double> initial_budget;  // t0 when absent
  double max_failure_fraction = 0.5;

  void validate() const;
  [[nodiscard]] double start_budget() const { return initial_budget.value_or(t0); }
};

double propose_budget(double t, const ChainConfig& cfg, double xi);
/// log N(t; t0, 1/k).
double log_stationary_density(double t, const ChainConfig& cfg);
/// log N(to; from - dt k (from - t0), 2 dt).
double log_transition_density(double to, double from, const ChainConfig& cfg);

struct ChainState {
  CoarsePath path;
  double budget = 0.0;
  std::size_t step = 0;
};

/// Log of the unclipped Metropolis ratio for moving from `from` to `to`.
double log_acceptance_ratio(const ChainState& from, const ChainState& to, const Calibration& cal,
                            const ChainConfig& cfg);
/// min(1, ratio), evaluated in log space.
double acceptance(const ChainState& from, const ChainState& to, const Calibration& cal, const ChainConfig& cfg);

enum class StepOutcome { Accepted, Rejected, WrongTopology, BackendFailure };

std::string to_string(StepOutcome outcome);
StepOutcome step_outcome_from_string(const std::string& name);

struct ChainStep {
  std::size_t step = 0;
  double proposed_budget = 0.0;
  StepOutcome outcome = StepOutcome::Rejected;
  std::optional<double> proposed_action;
  std::optional<double> accept_prob;
  std::optional<std::vector<std::size_t>> proposed_path;
  std::string note;  // violated rule, range exit or backend message
  // State after the step.
  std::vector<std::size_t> path;
  double action = 0.0;
  double budget = 0.0;

  friend bool operator==(const ChainStep&, const ChainStep&) = default;
};

struct ChainSummary {
  std::size_t steps = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t wrong_topology = 0;
  std::size_t backend_failure = 0;

  [[nodiscard]] bool reconciles() const noexcept {
    return accepted + rejected + wrong_topology + backend_failure == steps;
  }
  /// "steps=13, accepted=8, wrong-topology=2, rejected=3, backend-failure=0"
  [[nodiscard]] std::string format() const;
  friend bool operator==(const ChainSummary&, const ChainSummary&) = default;
};

ChainSummary summarize(const std::vector<ChainStep>& records);

struct ChainResult {
  ChainState initial;
  std::vector<ChainStep> records;
  ChainSummary summary;
  bool aborted = false;
};

/// First valid path among up to `max_attempts` anneals at `budget`; throws
/// CalibrationError when none decodes.
CoarsePath draw_initial_path(const QuboProblem& problem, const Backend& backend, double budget,
                             std::size_t num_reads, std::uint64_t seed, std::size_t max_attempts = 100);

/// Starts from `initial` at cfg.start_budget(). Per step: propose a budget
/// (out-of-range proposals are rejected without annealing), anneal, decode,
/// then accept or reject. Stops early with `aborted` once backend failures
/// exceed cfg.max_failure_fraction of the chain length.
ChainResult run_chain(const QuboProblem& problem, const Calibration& cal, const Backend& backend,
                      std::size_t num_reads, const ChainConfig& cfg, const CoarsePath& initial);

}  // namespace qtps
