#pragma once

#include "qtps/analysis.hpp"
#include "qtps/annealer.hpp"
#include "qtps/dynamics.hpp"
#include "qtps/graph.hpp"
#include "qtps/manifold.hpp"
#include "qtps/potential.hpp"
#include "qtps/serialize.hpp"
#include "qtps/tps.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace qtps::pipeline {

namespace fs = std::filesystem;

struct GraphStage {
  GraphConfig graph;
  std::optional<std::size_t> target_nodes;        // tunes the subsampling radius
  std::optional<double> edge_diffusion_factor;    // cutoff = factor * median NN distance
  std::optional<double> edge_cartesian_factor;
  std::optional<double> epsilon;                  // diffusion kernel bandwidth
  std::size_t max_embedding_points = 1500;
};

struct AnnealerStage {
  std::string backend = "local";  // local | remote
  AnnealerConfig annealer;
  std::vector<double> budgets{10.0, 50.0, 100.0, 150.0, 200.0, 300.0, 400.0};
  std::size_t attempts_per_budget = 40;
  double delta_floor = kDeltaFloor;
};

struct TpsStage {
  ChainConfig chain;
  std::size_t chains = 3;
};

struct OracleStage {
  std::optional<std::size_t> max_len;  // node count when absent
};

/// One JSON document with a section per stage.
struct RunConfig {
  Json raw;
  std::uint64_t seed = 0;
  fs::path output_dir = "qtps-run";
  Potential potential = Potential::double_well();
  LangevinParams langevin;
  Point endpoint_a;
  Point endpoint_b;
  ExploreConfig explore;
  GraphStage graph;
  AnnealerStage annealer;
  TpsStage tps;
  AnalysisConfig analysis;
  OracleStage oracle;
};

/// Parses and validates every section. Errors name "section.field".
RunConfig parse_config(const Json& doc, const fs::path& base_dir = {});
RunConfig load_config(const fs::path& path);

enum class Stage { Explore, Graph, Calibrate, Sample, Analyze, Oracle };
std::string to_string(Stage stage);

/// Config sections (plus seed) that determine a stage's output.
Json stage_config(const RunConfig& cfg, Stage stage);
std::string stage_hash(const RunConfig& cfg, Stage stage);
Json provenance(const RunConfig& cfg, Stage stage);
/// Throws ProvenanceError unless `artifact` was produced by `stage` under `cfg`.
void check_provenance(const RunConfig& cfg, Stage stage, const Json& artifact, const fs::path& where);

std::unique_ptr<Backend> make_backend(const RunConfig& cfg);
QuboProblem build_qubo(const RunConfig& cfg, const TransitionGraph& graph);

using Log = std::function<void(const std::string&)>;

struct Paths {
  fs::path cloud, graph, calibration, qubo, chains_dir, report_dir, oracle;
  std::vector<fs::path> chains;  // explicit chain sidecars for analyze
  static Paths defaults(const RunConfig& cfg);
};

ExploreResult run_explore(const RunConfig& cfg, const Paths& paths, const Log& log = {});
TransitionGraph run_graph(const RunConfig& cfg, const Paths& paths, const Log& log = {});
Calibration run_calibrate(const RunConfig& cfg, const Paths& paths, const Log& log = {});
std::vector<ChainResult> run_sample(const RunConfig& cfg, const Paths& paths, const Log& log = {});
Report run_analyze(const RunConfig& cfg, const Paths& paths, const Log& log = {});
Json run_oracle(const RunConfig& cfg, const Paths& paths, const Log& log = {});

/// Graph construction from an in-memory cloud (the graph stage minus I/O).
TransitionGraph build_graph(const RunConfig& cfg, const PointCloud& cloud, const Log& log = {});

/// Exit code for an exception: 2 usage/config, 3 numeric/validation, 4 backend.
int exit_code_for(const std::exception& e);

}  // namespace qtps::pipeline
