#include "doctest.h"

#include "fixtures.hpp"
#include "qtps/analysis.hpp"
#include "qtps/error.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

using namespace qtps;

namespace {

const std::vector<std::size_t> kUpper{0, 1, 3};
const std::vector<std::size_t> kLower{0, 2, 3};

ChainResult chain_of(const std::vector<std::vector<std::size_t>>& paths) {
  ChainResult c;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    ChainStep s;
    s.step = i;
    s.outcome = StepOutcome::Accepted;
    s.path = paths[i];
    c.records.push_back(s);
  }
  c.summary = summarize(c.records);
  return c;
}

}  // namespace

TEST_CASE("autocorrelation of simple series") {
  const auto g = testing::two_path_square();
  SUBCASE("constant") {
    const auto s = EdgeOccupationSeries::from_paths(g, std::vector(20, kUpper));
    for (double v : autocorrelation(s, 5)) CHECK(v == doctest::Approx(0.0));
  }
  SUBCASE("alternating") {
    std::vector<std::vector<std::size_t>> paths;
    for (int i = 0; i < 20; ++i) paths.push_back(i % 2 ? kLower : kUpper);
    const auto G = autocorrelation(EdgeOccupationSeries::from_paths(g, paths), 4);
    CHECK(G[0] == doctest::Approx(0.25));
    CHECK(G[1] / G[0] == doctest::Approx(-1.0));
    CHECK(G[2] / G[0] == doctest::Approx(1.0));
  }
  SUBCASE("independent draws decorrelate") {
    RandomStream rng(3);
    std::vector<std::vector<std::size_t>> paths;
    for (int i = 0; i < 10000; ++i) paths.push_back(rng.uniform() < 0.5 ? kUpper : kLower);
    const auto G = autocorrelation(EdgeOccupationSeries::from_paths(g, paths), 3);
    CHECK(std::abs(G[1] / G[0]) < 0.1);
    CHECK(std::abs(G[3] / G[0]) < 0.1);
  }
  SUBCASE("periodic wrap by hand") {
    std::vector<std::vector<std::size_t>> paths{kUpper, kUpper, kLower};
    const auto G = autocorrelation(EdgeOccupationSeries::from_paths(g, paths), 1);
    // Each edge series is (1,1,0) or (0,0,1): mean m, lag-1 product mean p.
    const double m = 2.0 / 3.0;
    const double g_upper0 = m - m * m;
    const double g_upper1 = 1.0 / 3.0 - m * m;
    const double n = 1.0 / 3.0;
    const double g_lower0 = n - n * n;
    const double g_lower1 = 0.0 - n * n;
    CHECK(G[0] == doctest::Approx((2 * g_upper0 + 2 * g_lower0) / 4));
    CHECK(G[1] == doctest::Approx((2 * g_upper1 + 2 * g_lower1) / 4));
  }
}

TEST_CASE("autocorrelation ignores edge order") {
  const auto g = testing::two_path_square();
  const auto h = testing::make_graph(4, {{2, 3}, {0, 2}, {1, 3}, {0, 1}}, {1.0, 0.5, 0.5, 0.5}, 0, 3);
  RandomStream rng(9);
  std::vector<std::vector<std::size_t>> paths;
  for (int i = 0; i < 300; ++i) paths.push_back(rng.uniform() < 0.3 ? kUpper : kLower);
  const auto a = autocorrelation(EdgeOccupationSeries::from_paths(g, paths), 10);
  const auto b = autocorrelation(EdgeOccupationSeries::from_paths(h, paths), 10);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("autocorrelation preconditions") {
  const auto g = testing::two_path_square();
  const auto s = EdgeOccupationSeries::from_paths(g, {kUpper, kLower});
  CHECK_THROWS_AS(autocorrelation(s, 2), PreconditionError);
  CHECK_THROWS_AS(autocorrelation(EdgeOccupationSeries::from_paths(g, {kUpper}), 0), PreconditionError);
  CHECK_THROWS_AS(EdgeOccupationSeries::from_paths(g, {{0, 3}}), GraphError);
}

TEST_CASE("path density") {
  const auto g = testing::two_path_square();
  const auto d = path_density(g, chain_of({kUpper, kUpper, kLower, kUpper}));
  CHECK(d[0] == doctest::Approx(1.0));
  CHECK(d[3] == doctest::Approx(1.0));
  CHECK(d[1] == doctest::Approx(0.75));
  CHECK(d[2] == doctest::Approx(0.25));
  const auto single = path_density(testing::line_graph(), chain_of({{0, 1, 2}, {0, 1, 2}}));
  for (double v : single) CHECK(v == doctest::Approx(1.0));
  CHECK_THROWS_AS(path_density(g, std::vector<ChainResult>{}), PreconditionError);
}

TEST_CASE("density of exact Boltzmann draws matches the law") {
  const auto g = testing::two_path_square();
  const auto law = testing::boltzmann_law(g);
  const double p_upper = law.at(kUpper);
  RandomStream rng(12);
  std::vector<std::vector<std::size_t>> paths;
  for (int i = 0; i < 4000; ++i) paths.push_back(rng.uniform() < p_upper ? kUpper : kLower);
  const auto d = path_density(g, chain_of(paths));
  CHECK(std::abs(d[1] - p_upper) < 0.05);
  CHECK(std::abs(d[2] - (1 - p_upper)) < 0.05);
}

TEST_CASE("corridor fraction") {
  const auto g = testing::line_graph();
  CHECK(corridor_fraction(g, {1.0, 1.0, 1.0}, {0, 1, 2}) == doctest::Approx(1.0));
  const auto h = testing::make_graph(6, {{0, 1}, {1, 2}, {3, 4}, {4, 5}, {2, 3}}, {1, 1, 1, 1, 1}, 0, 2);
  // Top half is {3,4,5}; 3 is adjacent to the path 0-1-2, 4 and 5 are not.
  CHECK(corridor_fraction(h, {0.1, 0.1, 0.1, 0.9, 0.8, 0.7}, {0, 1, 2}, 0.5) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(corridor_fraction(h, {1.0}, {0, 1, 2}), PreconditionError);
  CHECK_THROWS_AS(corridor_fraction(h, std::vector<double>(6, 0.0), {0, 1, 2}, 0.0), PreconditionError);
}

TEST_CASE("report and files") {
  const auto g = testing::two_path_square();
  const auto c = chain_of({kUpper, kLower, kUpper, kUpper, kLower, kUpper, kUpper, kUpper});
  Calibration cal;
  cal.points = {{10.0, 1.2, 0.2, 20, 18}, {400.0, 1.1, 0.1, 20, 20}};
  const auto rep = report(g, {c, c}, cal, dijkstra(g), {});
  CHECK(rep.total.steps == 16);
  CHECK(rep.total.accepted == 16);
  REQUIRE(rep.chains.size() == 2);
  CHECK(rep.chains[0].distinct_paths == 2);
  CHECK(rep.chains[0].g.size() == 8);
  CHECK(rep.chains[0].reliable_lag == 2);
  CHECK(rep.corridor == doctest::Approx(1.0));

  CHECK_THROWS_AS(report(g, {}, std::nullopt, dijkstra(g), {}), PreconditionError);
  CHECK_THROWS_AS(report(g, {ChainResult{}}, std::nullopt, dijkstra(g), {}), PreconditionError);

  const auto dir = std::filesystem::temp_directory_path() / "qtps-report-test";
  std::filesystem::remove_all(dir);
  write_report(rep, g, dir, {{"stage", "analyze"}});
  for (const char* name : {"calibration_summary.csv", "chain_summary.csv", "autocorrelation_0.csv",
                           "autocorrelation_1.csv", "density.csv", "overlay.json", "report.json"}) {
    CHECK(std::filesystem::exists(dir / name));
  }
  std::ifstream in(dir / "report.json");
  const auto doc = nlohmann::json::parse(in);
  CHECK(doc.at("provenance").at("stage") == "analyze");
  CHECK(doc.at("total").at("steps") == 16);
  std::ifstream csv(dir / "chain_summary.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "chain,steps,accepted,wrong_topology,rejected,backend_failure,distinct_paths");
  std::filesystem::remove_all(dir);
}

TEST_CASE("analysis config validation") {
  AnalysisConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.top_fraction = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
