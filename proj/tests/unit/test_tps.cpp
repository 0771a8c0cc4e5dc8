#include "doctest.h"

#include "fixtures.hpp"
#include "qtps/error.hpp"
#include "qtps/tps.hpp"

#include <atomic>
#include <cmath>
#include <numbers>

using namespace qtps;

namespace {

class EmptyBackend final : public Backend {
 public:
  std::string id() const override { return "empty"; }
  AnnealOutcome anneal(const AnnealRequest& r) const override {
    ++calls;
    AnnealOutcome out;
    out.best.bits.assign(r.problem.num_bits(), 0);
    out.reads.push_back(out.best);
    return out;
  }
  mutable std::atomic<int> calls{0};
};

class FailingBackend final : public Backend {
 public:
  std::string id() const override { return "failing"; }
  AnnealOutcome anneal(const AnnealRequest&) const override { throw TimeoutError("too slow"); }
};

Calibration flat_calibration(double mean, double sd, double lo = 10.0, double hi = 400.0) {
  Calibration cal;
  cal.points = {{lo, mean, sd, 20, 20}, {hi, mean, sd, 20, 20}};
  return cal;
}

// Independent re-statement of the densities entering the balance identity.
double log_gauss(double x, double m, double v) {
  return -0.5 * (x - m) * (x - m) / v - 0.5 * std::log(2 * std::numbers::pi * v);
}

}  // namespace

TEST_CASE("chain config validation") {
  ChainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.k = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.dt = 1.0 / cfg.k;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.steps = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.max_failure_fraction = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  CHECK(cfg.start_budget() == cfg.t0);
  cfg.initial_budget = 90.0;
  CHECK(cfg.start_budget() == 90.0);
}

TEST_CASE("budget proposal") {
  ChainConfig cfg;
  CHECK(propose_budget(cfg.t0, cfg, 0.0) == doctest::Approx(cfg.t0));
  CHECK(propose_budget(cfg.t0 + 100, cfg, 0.0) == doctest::Approx(cfg.t0 + 100 * (1 - cfg.dt * cfg.k)));
  CHECK(propose_budget(cfg.t0, cfg, 1.0) == doctest::Approx(cfg.t0 + std::sqrt(2 * cfg.dt)));
  CHECK(propose_budget(-10.0, cfg, 0.0) == doctest::Approx(-10.0 + cfg.dt * cfg.k * (cfg.t0 + 10.0)));
  CHECK_THROWS_AS(propose_budget(std::nan(""), cfg, 0.0), PreconditionError);
}

TEST_CASE("always-accepted budget walk reaches its stationary law") {
  ChainConfig cfg;
  cfg.dt = 100.0;  // dt k = 0.02
  RandomStream rng(2024);
  double t = cfg.t0;
  const int n = 100000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    t = cfg.t0 + (t - cfg.t0) * (1 - cfg.dt * cfg.k) + std::sqrt(2 * cfg.dt) * rng.normal();
    sum += t;
    sq += t * t;
  }
  // The helper must follow the same update.
  CHECK(propose_budget(200.0, cfg, 0.3) == doctest::Approx(cfg.t0 + 50 * (1 - cfg.dt * cfg.k) + std::sqrt(2 * cfg.dt) * 0.3));
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(mean == doctest::Approx(cfg.t0).epsilon(0.05));
  CHECK(var == doctest::Approx(1.0 / cfg.k).epsilon(0.05 + cfg.dt * cfg.k / 2));
}

TEST_CASE("density helpers") {
  ChainConfig cfg;
  CHECK(log_stationary_density(cfg.t0, cfg) == doctest::Approx(log_gauss(cfg.t0, cfg.t0, 1 / cfg.k)));
  CHECK(log_transition_density(160.0, 200.0, cfg) ==
        doctest::Approx(log_gauss(160.0, 200.0 - cfg.dt * cfg.k * 50.0, 2 * cfg.dt)));
}

TEST_CASE("acceptance examples") {
  ChainConfig cfg;
  const auto cal = flat_calibration(2.0, 0.5);
  const ChainState a{{{0, 1, 3}, 2.0}, 150.0, 0};
  CHECK(acceptance(a, a, cal, cfg) == doctest::Approx(1.0));

  // Equal budgets, mirror-image energies around the mean, action up by ln 2.
  const double l2 = std::log(2.0);
  const ChainState lo{{{0, 1, 3}, 2.0 - l2 / 2}, 150.0, 0};
  const ChainState hi{{{0, 2, 3}, 2.0 + l2 / 2}, 150.0, 0};
  CHECK(acceptance(lo, hi, cal, cfg) == doctest::Approx(0.5));
  CHECK(acceptance(hi, lo, cal, cfg) == doctest::Approx(1.0));

  // Far tails stay finite.
  const ChainState far{{{0, 2, 3}, 400.0}, 150.0, 0};
  const double p = acceptance(a, far, flat_calibration(2.0, kDeltaFloor), cfg);
  CHECK(std::isfinite(p));
  CHECK(p >= 0.0);
  CHECK(p <= 1.0);
}

TEST_CASE("detailed balance holds at the formula level") {
  ChainConfig cfg;
  Calibration cal;
  cal.points = {{10.0, 3.0, 0.4, 20, 12}, {100.0, 2.5, 0.3, 20, 15}, {400.0, 2.2, 0.2, 20, 19}};
  auto g_of = [&](double s, double t) {
    // Piecewise-linear moments, restated here.
    const auto& p = cal.points;
    std::size_t k = t <= p[1].budget ? 0 : 1;
    const double f = (t - p[k].budget) / (p[k + 1].budget - p[k].budget);
    const double m = p[k].mean + f * (p[k + 1].mean - p[k].mean);
    const double sd = p[k].stddev + f * (p[k + 1].stddev - p[k].stddev);
    return log_gauss(s, m, sd * sd);
  };
  RandomStream rng(77);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const ChainState a{{{0, 1}, 1.5 + 1.5 * rng.uniform()}, 10.0 + 390.0 * rng.uniform(), 0};
    const ChainState b{{{0, 2}, 1.5 + 1.5 * rng.uniform()}, 10.0 + 390.0 * rng.uniform(), 0};
    auto side = [&](const ChainState& x, const ChainState& y) {
      return std::log(acceptance(x, y, cal, cfg)) - x.path.action + log_gauss(x.budget, cfg.t0, 1 / cfg.k) +
             log_gauss(y.budget, x.budget - cfg.dt * cfg.k * (x.budget - cfg.t0), 2 * cfg.dt) +
             g_of(y.path.action, y.budget);
    };
    worst = std::max(worst, std::abs(side(a, b) - side(b, a)));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("outcome names and summary bookkeeping") {
  for (auto o : {StepOutcome::Accepted, StepOutcome::Rejected, StepOutcome::WrongTopology, StepOutcome::BackendFailure}) {
    CHECK(step_outcome_from_string(to_string(o)) == o);
  }
  CHECK_THROWS_AS(step_outcome_from_string("maybe"), PreconditionError);

  std::vector<ChainStep> recs;
  auto add = [&](StepOutcome o, int n) {
    for (int i = 0; i < n; ++i) {
      ChainStep s;
      s.outcome = o;
      recs.push_back(s);
    }
  };
  add(StepOutcome::Accepted, 8);
  add(StepOutcome::WrongTopology, 2);
  add(StepOutcome::Rejected, 3);
  const auto sum = summarize(recs);
  CHECK(sum.steps == 13);
  CHECK(sum.accepted == 8);
  CHECK(sum.wrong_topology == 2);
  CHECK(sum.rejected == 3);
  CHECK(sum.reconciles());
  CHECK(sum.format() == "steps=13, accepted=8, wrong-topology=2, rejected=3, backend-failure=0");
  ChainSummary broken = sum;
  broken.steps = 14;
  CHECK_FALSE(broken.reconciles());
}

TEST_CASE("single-path graph accepts every valid proposal") {
  const auto g = testing::line_graph();
  const auto q = encode(g, default_alpha(g));
  const SimulatedAnnealer sa;
  const double s = g.path_action({0, 1, 2});
  ChainConfig cfg;
  cfg.dt = 10.0;
  cfg.steps = 300;
  cfg.seed = 5;
  const auto res = run_chain(q, flat_calibration(s, kDeltaFloor), sa, 1, cfg, dijkstra(g));
  CHECK(res.summary.reconciles());
  for (const auto& r : res.records) {
    if (r.accept_prob && r.proposed_action) CHECK(*r.accept_prob >= 0.999);
  }
}

TEST_CASE("chains replay and never hold an invalid path") {
  const auto g = testing::six_node_fixture();
  const auto q = encode(g, default_alpha(g));
  const SimulatedAnnealer sa;
  const auto cal = calibrate(q, CalibrationOptions{{10.0, 100.0, 300.0}, 20, 1, 1}, sa);
  ChainConfig cfg;
  cfg.steps = 200;
  cfg.seed = 8;
  const auto start = draw_initial_path(q, sa, cfg.start_budget(), 1, 3);
  const auto a = run_chain(q, cal, sa, 1, cfg, start);
  const auto b = run_chain(q, cal, sa, 1, cfg, start);
  CHECK(a.records == b.records);
  CHECK(a.summary == b.summary);
  CHECK(a.summary.steps == 200);
  CHECK(a.summary.reconciles());
  for (const auto& r : a.records) {
    const auto d = decode(q, encode_path(q, r.path));
    REQUIRE(std::holds_alternative<CoarsePath>(d));
    CHECK(std::get<CoarsePath>(d).action == doctest::Approx(r.action));
    CHECK(cal.covers(r.budget));
    if (r.outcome == StepOutcome::Accepted) {
      CHECK(r.path == *r.proposed_path);
      CHECK(r.budget == r.proposed_budget);
    }
  }
}

TEST_CASE("wrong topology retains the state and out-of-range budgets skip the annealer") {
  const auto g = testing::two_path_square();
  const auto q = encode(g, default_alpha(g));
  EmptyBackend empty;
  ChainConfig cfg;
  cfg.steps = 200;
  const CoarsePath start{{0, 2, 3}, 0.0};
  // Narrow range: many proposals leave it.
  const auto res = run_chain(q, flat_calibration(1.2, 0.2, 140.0, 160.0), empty, 1, cfg, start);
  CHECK(res.summary.accepted == 0);
  CHECK(res.summary.wrong_topology == static_cast<std::size_t>(empty.calls.load()));
  CHECK(res.summary.rejected + res.summary.wrong_topology == 200);
  CHECK(res.summary.rejected > 0);
  for (const auto& r : res.records) {
    CHECK(r.path == start.nodes);
    CHECK(r.action == doctest::Approx(1.5));
    CHECK(r.budget == cfg.t0);
  }
}

TEST_CASE("backend failures abort the chain") {
  const auto g = testing::two_path_square();
  const auto q = encode(g, default_alpha(g));
  ChainConfig cfg;
  cfg.steps = 10;
  const auto res = run_chain(q, flat_calibration(1.2, 0.2), FailingBackend{}, 1, cfg, CoarsePath{{0, 1, 3}, 1.0});
  CHECK(res.aborted);
  CHECK(res.records.size() == 6);
  CHECK(res.summary.backend_failure == 6);
  CHECK(res.records.back().note.find("too slow") != std::string::npos);
}

TEST_CASE("chain preconditions") {
  const auto g = testing::two_path_square();
  const auto q = encode(g, default_alpha(g));
  const SimulatedAnnealer sa;
  ChainConfig cfg;
  CHECK_THROWS_AS(run_chain(q, flat_calibration(1.2, 0.2), sa, 1, cfg, CoarsePath{{0, 3}, 0.0}), PreconditionError);
  cfg.initial_budget = 500.0;
  CHECK_THROWS_AS(run_chain(q, flat_calibration(1.2, 0.2), sa, 1, cfg, CoarsePath{{0, 1, 3}, 1.0}), ExtrapolationError);
  CHECK_THROWS_AS(draw_initial_path(q, EmptyBackend{}, 150.0, 1, 0, 5), CalibrationError);
  const auto p = draw_initial_path(q, sa, 150.0, 1, 0);
  CHECK(std::holds_alternative<CoarsePath>(decode(q, encode_path(q, p.nodes))));
}
