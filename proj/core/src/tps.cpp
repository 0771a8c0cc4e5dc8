#include "qtps/tps.hpp"

#include "qtps/error.hpp"
#include "qtps/random.hpp"

#include <cmath>
#include <numbers>

namespace qtps {
namespace {

double log_normal(double x, double mean, double var) {
  return -0.5 * (x - mean) * (x - mean) / var - 0.5 * std::log(2.0 * std::numbers::pi * var);
}

}  // namespace

void ChainConfig::validate() const {
  if (!(t0 > 0.0) || !std::isfinite(t0)) throw ConfigError("tps.t0 must be positive");
  if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("tps.k must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("tps.dt must be positive");
  if (!(dt * k < 1.0)) throw ConfigError("tps.dt * tps.k must be below 1");
  if (steps == 0) throw ConfigError("tps.steps must be at least 1");
  if (initial_budget && !(*initial_budget > 0.0)) throw ConfigError("tps.initial_budget must be positive");
  if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0)) {
    throw ConfigError("tps.max_failure_fraction must lie in [0, 1]");
  }
}

double propose_budget(double t, const ChainConfig& cfg, double xi) {
  if (!std::isfinite(t) || !std::isfinite(xi)) throw PreconditionError("budget and noise must be finite");
  return t - cfg.dt * cfg.k * (t - cfg.t0) + std::sqrt(2.0 * cfg.dt) * xi;
}

double log_stationary_density(double t, const ChainConfig& cfg) { return log_normal(t, cfg.t0, 1.0 / cfg.k); }

double log_transition_density(double to, double from, const ChainConfig& cfg) {
  return log_normal(to, from - cfg.dt * cfg.k * (from - cfg.t0), 2.0 * cfg.dt);
}

double log_acceptance_ratio(const ChainState& from, const ChainState& to, const Calibration& cal,
                            const ChainConfig& cfg) {
  const double budget_term = log_stationary_density(to.budget, cfg) + log_transition_density(from.budget, to.budget, cfg) -
                             log_stationary_density(from.budget, cfg) - log_transition_density(to.budget, from.budget, cfg);
  const double proposal_term = log_outcome_density(cal, from.path.action, from.budget) -
                               log_outcome_density(cal, to.path.action, to.budget);
  const double boltzmann = from.path.action - to.path.action;
  return budget_term + proposal_term + boltzmann;
}

double acceptance(const ChainState& from, const ChainState& to, const Calibration& cal, const ChainConfig& cfg) {
  const double r = log_acceptance_ratio(from, to, cal, cfg);
  if (std::isnan(r)) throw NumericError("acceptance ratio is NaN");
  return r >= 0.0 ? 1.0 : std::exp(r);
}

std::string to_string(StepOutcome outcome) {
  switch (outcome) {
    case StepOutcome::Accepted: return "accepted";
    case StepOutcome::Rejected: return "rejected";
    case StepOutcome::WrongTopology: return "wrong-topology";
    case StepOutcome::BackendFailure: return "backend-failure";
  }
  return "unknown";
}

StepOutcome step_outcome_from_string(const std::string& name) {
  for (auto o : {StepOutcome::Accepted, StepOutcome::Rejected, StepOutcome::WrongTopology,
                 StepOutcome::BackendFailure}) {
    if (to_string(o) == name) return o;
  }
  throw PreconditionError("unknown step outcome '" + name + "'");
}

std::string ChainSummary::format() const {
  return "steps=" + std::to_string(steps) + ", accepted=" + std::to_string(accepted) +
         ", wrong-topology=" + std::to_string(wrong_topology) + ", rejected=" + std::to_string(rejected) +
         ", backend-failure=" + std::to_string(backend_failure);
}

ChainSummary summarize(const std::vector<ChainStep>& records) {
  ChainSummary s;
  s.steps = records.size();
  for (const auto& r : records) {
    switch (r.outcome) {
      case StepOutcome::Accepted: ++s.accepted; break;
      case StepOutcome::Rejected: ++s.rejected; break;
      case StepOutcome::WrongTopology: ++s.wrong_topology; break;
      case StepOutcome::BackendFailure: ++s.backend_failure; break;
    }
  }
  return s;
}

CoarsePath draw_initial_path(const QuboProblem& problem, const Backend& backend, double budget,
                             std::size_t num_reads, std::uint64_t seed, std::size_t max_attempts) {
  const RandomStream root(seed);
  for (std::size_t a = 0; a < max_attempts; ++a) {
    const AnnealOutcome outcome = backend.anneal(AnnealRequest{problem, budget, root.split(a).key(), num_reads});
    const DecodeResult decoded = decode(problem, outcome.best.bits);
    if (const auto* path = std::get_if<CoarsePath>(&decoded)) return *path;
  }
  throw CalibrationError("no valid initial path in " + std::to_string(max_attempts) + " anneals at budget " +
                         std::to_string(budget));
}

ChainResult run_chain(const QuboProblem& problem, const Calibration& cal, const Backend& backend,
                      std::size_t num_reads, const ChainConfig& cfg, const CoarsePath& initial) {
  cfg.validate();
  cal.validate();
  if (!cal.covers(cfg.start_budget())) {
    throw ExtrapolationError("initial budget " + std::to_string(cfg.start_budget()) + " is not calibrated");
  }
  if (!std::holds_alternative<CoarsePath>(decode(problem, encode_path(problem, initial.nodes)))) {
    throw PreconditionError("initial path is not a valid source-target path");
  }

  const RandomStream root(cfg.seed);
  RandomStream budget_noise = root.split(0);
  RandomStream accept_noise = root.split(2);

  ChainResult result;
  ChainState state{initial, cfg.start_budget(), 0};
  // Action is always taken from the problem's weights.
  state.path.action = std::get<CoarsePath>(decode(problem, encode_path(problem, initial.nodes))).action;
  result.initial = state;
  std::size_t failures = 0;

  for (std::size_t i = 0; i < cfg.steps; ++i) {
    ChainStep rec;
    rec.step = i + 1;
    const double xi = budget_noise.normal();
    const double u = accept_noise.uniform();
    rec.proposed_budget = propose_budget(state.budget, cfg, xi);

    if (!cal.covers(rec.proposed_budget)) {
      rec.outcome = StepOutcome::Rejected;
      rec.accept_prob = 0.0;
      rec.note = "budget outside calibrated range";
    } else {
      try {
        const AnnealRequest req{problem, rec.proposed_budget, root.split(1).split(i).key(), num_reads};
        const AnnealOutcome outcome = backend.anneal(req);
        const DecodeResult decoded = decode(problem, outcome.best.bits);
        if (const auto* report = std::get_if<TopologyReport>(&decoded)) {
          rec.outcome = StepOutcome::WrongTopology;
          rec.note = to_string(report->rule) + ": " + report->detail;
        } else {
          const auto& path = std::get<CoarsePath>(decoded);
          const ChainState candidate{path, rec.proposed_budget, i + 1};
          const double p = acceptance(state, candidate, cal, cfg);
          rec.proposed_action = path.action;
          rec.proposed_path = path.nodes;
          rec.accept_prob = p;
          if (u < p) {
            rec.outcome = StepOutcome::Accepted;
            state.path = path;
            state.budget = rec.proposed_budget;
          } else {
            rec.outcome = StepOutcome::Rejected;
          }
        }
      } catch (const BackendError& e) {
        rec.outcome = StepOutcome::BackendFailure;
        rec.note = e.what();
        ++failures;
      }
    }
    state.step = i + 1;
    rec.path = state.path.nodes;
    rec.action = state.path.action;
    rec.budget = state.budget;
    result.records.push_back(std::move(rec));
    if (static_cast<double>(failures) > cfg.max_failure_fraction * static_cast<double>(cfg.steps)) {
      result.aborted = true;
      break;
    }
  }
  result.summary = summarize(result.records);
  return result;
}

}  // namespace qtps
