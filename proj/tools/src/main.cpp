#include "qtps/error.hpp"
#include "qtps/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace pl = qtps::pipeline;

int main(int argc, char** argv) {
  CLI::App app{"Transition path sampling on coarse-grained graphs with annealer trial moves"};
  app.require_subcommand(1);

  std::string config_path, cloud, graph, calibration, out;
  std::vector<std::string> chains;
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Progress messages on stderr");

  auto add = [&](const char* name, const char* help) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("-c,--config", config_path, "Run configuration (JSON)")->required();
    cmd->add_option("--out", out, "Output file or directory (default: under output_dir)");
    cmd->add_flag("-v,--verbose", verbose, "Progress messages on stderr");
    return cmd;
  };
  auto* explore = add("explore", "Sample the manifold from both basins");
  auto* graph_cmd = add("graph", "Reduce the cloud to a weighted transition graph");
  graph_cmd->add_option("--cloud", cloud, "Cloud file from explore");
  auto* calibrate = add("calibrate", "Calibrate proposal actions per sweep budget");
  calibrate->add_option("--graph", graph, "Graph file");
  auto* sample = add("sample", "Run the Markov chains");
  sample->add_option("--graph", graph, "Graph file");
  sample->add_option("--calibration", calibration, "Calibration file");
  auto* analyze = add("analyze", "Chain statistics and path density");
  analyze->add_option("--graph", graph, "Graph file");
  analyze->add_option("--calibration", calibration, "Calibration file (optional)");
  analyze->add_option("--chains", chains, "Chain sidecar files (default: all in the chains directory)");
  auto* oracle = add("oracle", "Exact ground state and path law for small graphs");
  oracle->add_option("--graph", graph, "Graph file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const pl::Log log = [&](const std::string& msg) {
    if (verbose) std::cerr << msg << '\n';
  };
  try {
    const pl::RunConfig cfg = pl::load_config(config_path);
    pl::Paths paths = pl::Paths::defaults(cfg);
    if (!cloud.empty()) paths.cloud = cloud;
    if (!graph.empty()) paths.graph = graph;
    if (!calibration.empty()) paths.calibration = calibration;
    for (const auto& c : chains) paths.chains.emplace_back(c);

    if (explore->parsed()) {
      if (!out.empty()) paths.cloud = out;
      pl::run_explore(cfg, paths, log);
    } else if (graph_cmd->parsed()) {
      if (!out.empty()) paths.graph = out;
      pl::run_graph(cfg, paths, log);
    } else if (calibrate->parsed()) {
      if (!out.empty()) paths.calibration = out;
      pl::run_calibrate(cfg, paths, log);
    } else if (sample->parsed()) {
      if (!out.empty()) paths.chains_dir = out;
      pl::run_sample(cfg, paths, log);
    } else if (analyze->parsed()) {
      if (!out.empty()) paths.report_dir = out;
      pl::run_analyze(cfg, paths, log);
    } else if (oracle->parsed()) {
      if (!out.empty()) paths.oracle = out;
      pl::run_oracle(cfg, paths, log);
    }
  } catch (const std::exception& e) {
    std::cerr << "qtps: " << e.what() << '\n';
    return pl::exit_code_for(e);
  }
  return 0;
}
