#include "qtps/annealer.hpp"

#include "qtps/error.hpp"
#include "qtps/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>

namespace qtps {

void AnnealRequest::validate() const {
  if (!(budget > 0.0) || !std::isfinite(budget)) throw PreconditionError("anneal budget must be positive");
  if (num_reads == 0) throw PreconditionError("anneal needs at least one read");
}

void AnnealerConfig::validate() const {
  if (!(sweeps_per_second > 0.0) || !std::isfinite(sweeps_per_second)) {
    throw ConfigError("annealer.sweeps_per_second must be positive");
  }
  if (num_reads == 0) throw ConfigError("annealer.num_reads must be at least 1");
  if (beta_range) {
    const auto [hot, cold] = *beta_range;
    if (!(hot > 0.0) || !(cold >= hot) || !std::isfinite(cold)) {
      throw ConfigError("annealer.beta_range must satisfy 0 < hot <= cold");
    }
  }
  if (alpha && (!(*alpha > 0.0) || !std::isfinite(*alpha))) throw ConfigError("annealer.alpha must be positive");
}

std::string to_string(InitialState init) { return init == InitialState::Random ? "random" : "zero"; }

InitialState initial_state_from_string(const std::string& name) {
  if (name == "random") return InitialState::Random;
  if (name == "zero") return InitialState::Zero;
  throw ConfigError("unknown initial state '" + name + "' (expected random or zero)");
}

std::pair<double, double> default_beta_range(const QuboProblem& problem) {
  std::vector<double> w;
  for (double x : problem.edge_weights()) {
    if (x > 0.0) w.push_back(x);
  }
  if (w.empty()) return {0.1, 1.0};
  std::sort(w.begin(), w.end());
  const double hot = 0.1 / w.back();
  const double cold = std::log(100.0) / w[w.size() / 2];
  return {hot, std::max(hot, cold)};
}

SimulatedAnnealer::SimulatedAnnealer(AnnealerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

std::size_t SimulatedAnnealer::sweeps_for(double budget) const {
  const double s = std::round(cfg_.sweeps_per_second * budget);
  return s < 1.0 ? 1 : static_cast<std::size_t>(s);
}

AnnealOutcome SimulatedAnnealer::anneal(const AnnealRequest& request) const {
  request.validate();
  const auto start = std::chrono::steady_clock::now();
  const QuboProblem& q = request.problem;
  const std::size_t n = q.num_bits();
  const std::size_t sweeps = sweeps_for(request.budget);
  const auto [hot, cold] = cfg_.beta_range ? *cfg_.beta_range : default_beta_range(q);

  std::vector<double> betas(sweeps);
  if (sweeps == 1) {
    betas[0] = cold;
  } else {
    const double ratio = std::pow(cold / hot, 1.0 / static_cast<double>(sweeps - 1));
    double b = hot;
    for (auto& beta : betas) {
      beta = b;
      b *= ratio;
    }
    betas.back() = cold;
  }

  AnnealOutcome out;
  out.backend = id();
  const RandomStream root(request.seed);
  for (std::size_t r = 0; r < request.num_reads; ++r) {
    RandomStream rng = root.split(r);
    Bits bits(n, 0);
    if (cfg_.initial_state == InitialState::Random) {
      for (auto& b : bits) b = static_cast<std::uint8_t>(rng() >> 63);
    }
    std::vector<double> field(q.linear());
    for (std::size_t i = 0; i < n; ++i) {
      if (!bits[i]) continue;
      for (const auto& [j, c] : q.couplings()[i]) field[j] += c;
    }
    for (const double beta : betas) {
      for (std::size_t i = 0; i < n; ++i) {
        const double delta = bits[i] ? -field[i] : field[i];
        if (delta > 0.0 && rng.uniform() >= std::exp(-beta * delta)) continue;
        const double sign = bits[i] ? -1.0 : 1.0;
        bits[i] ^= 1U;
        for (const auto& [j, c] : q.couplings()[i]) field[j] += sign * c;
      }
    }
    BinaryAssignment read;
    read.energy = q.energy(bits);
    read.bits = std::move(bits);
    out.reads.push_back(std::move(read));
  }
  const auto best = std::min_element(out.reads.begin(), out.reads.end(),
                                     [](const auto& a, const auto& b) { return a.energy < b.energy; });
  out.best = *best;
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

void Calibration::validate() const {
  if (points.empty()) throw PreconditionError("calibration has no budgets");
  if (!(delta_floor > 0.0)) throw PreconditionError("calibration delta floor must be positive");
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& p = points[k];
    if (k > 0 && !(p.budget > points[k - 1].budget)) {
      throw PreconditionError("calibration budgets must be strictly increasing");
    }
    if (!(p.stddev >= delta_floor)) throw PreconditionError("calibration stddev below the floor");
    if (p.valid == 0 || p.valid > p.attempts) throw PreconditionError("calibration counts are inconsistent");
    if (!std::isfinite(p.mean)) throw PreconditionError("calibration mean is not finite");
  }
}

bool Calibration::covers(double budget) const {
  return !points.empty() && budget >= min_budget() && budget <= max_budget();
}

std::pair<double, double> Calibration::moments(double budget) const {
  if (!covers(budget)) {
    throw ExtrapolationError("budget " + std::to_string(budget) + " outside calibrated range [" +
                             std::to_string(min_budget()) + ", " + std::to_string(max_budget()) + "]");
  }
  const auto hi = std::lower_bound(points.begin(), points.end(), budget,
                                   [](const CalibrationPoint& p, double b) { return p.budget < b; });
  if (hi->budget == budget || hi == points.begin()) return {hi->mean, hi->stddev};
  const auto lo = hi - 1;
  const double u = (budget - lo->budget) / (hi->budget - lo->budget);
  return {lo->mean + u * (hi->mean - lo->mean), lo->stddev + u * (hi->stddev - lo->stddev)};
}

std::size_t Calibration::total_attempts() const {
  std::size_t n = 0;
  for (const auto& p : points) n += p.attempts;
  return n;
}

std::size_t Calibration::total_valid() const {
  std::size_t n = 0;
  for (const auto& p : points) n += p.valid;
  return n;
}

void CalibrationOptions::validate() const {
  if (budgets.empty()) throw ConfigError("calibration needs at least one budget");
  for (std::size_t k = 0; k < budgets.size(); ++k) {
    if (!(budgets[k] > 0.0)) throw ConfigError("calibration budgets must be positive");
    if (k > 0 && !(budgets[k] > budgets[k - 1])) throw ConfigError("calibration budgets must be increasing");
  }
  if (attempts_per_budget < kMinCalibrationAttempts) {
    throw ConfigError("calibration needs at least " + std::to_string(kMinCalibrationAttempts) +
                      " attempts per budget");
  }
  if (num_reads == 0) throw ConfigError("calibration num_reads must be at least 1");
  if (!(delta_floor > 0.0)) throw ConfigError("calibration delta floor must be positive");
}

std::uint64_t calibration_seed(std::uint64_t seed, std::size_t budget_index, std::size_t attempt) {
  return RandomStream(seed).split(budget_index).split(attempt).key();
}

Calibration calibrate(const QuboProblem& problem, const CalibrationOptions& opts, const Backend& backend) {
  opts.validate();
  auto run_budget = [&](std::size_t b) {
    CalibrationPoint point;
    point.budget = opts.budgets[b];
    std::vector<double> actions;
    for (std::size_t a = 0; a < opts.attempts_per_budget; ++a) {
      const AnnealRequest req{problem, point.budget, calibration_seed(opts.seed, b, a), opts.num_reads};
      const AnnealOutcome outcome = backend.anneal(req);
      ++point.attempts;
      const DecodeResult decoded = decode(problem, outcome.best.bits);
      if (const auto* path = std::get_if<CoarsePath>(&decoded)) actions.push_back(path->action);
    }
    point.valid = actions.size();
    if (actions.empty()) {
      throw CalibrationError("budget " + std::to_string(point.budget) + " produced no valid path in " +
                             std::to_string(point.attempts) + " attempts");
    }
    double mean = 0.0;
    for (double s : actions) mean += s;
    mean /= static_cast<double>(actions.size());
    double var = 0.0;
    for (double s : actions) var += (s - mean) * (s - mean);
    var /= static_cast<double>(actions.size());
    point.mean = mean;
    point.stddev = std::max(std::sqrt(var), opts.delta_floor);
    return point;
  };

  std::vector<std::future<CalibrationPoint>> jobs;
  for (std::size_t b = 0; b < opts.budgets.size(); ++b) jobs.push_back(std::async(std::launch::async, run_budget, b));
  Calibration cal;
  cal.delta_floor = opts.delta_floor;
  // Collect everything before rethrowing so no task outlives the call.
  std::exception_ptr failure;
  for (auto& j : jobs) {
    try {
      cal.points.push_back(j.get());
    } catch (...) {
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return cal;
}

double log_outcome_density(const Calibration& cal, double energy, double budget) {
  const auto [mean, sd] = cal.moments(budget);
  const double z = (energy - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double outcome_density(const Calibration& cal, double energy, double budget) {
  return std::exp(log_outcome_density(cal, energy, budget));
}

}  // namespace qtps
