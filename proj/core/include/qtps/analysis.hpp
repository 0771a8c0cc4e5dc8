#pragma once

#include "qtps/annealer.hpp"
#include "qtps/graph.hpp"
#include "qtps/tps.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace qtps {

/// Edge indicators of the chain state at every step.
struct EdgeOccupationSeries {
  std::size_t edge_count = 0;
  std::vector<std::vector<std::uint8_t>> steps;

  [[nodiscard]] std::size_t length() const noexcept { return steps.size(); }
  static EdgeOccupationSeries from_paths(const TransitionGraph& graph,
                                         const std::vector<std::vector<std::size_t>>& paths);
  static EdgeOccupationSeries from_chain(const TransitionGraph& graph, const ChainResult& chain);
};

/// G(N) for N = 0..max_lag: per-edge lagged product mean minus squared mean,
/// averaged over edges, with periodic wrap.
std::vector<double> autocorrelation(const EdgeOccupationSeries& series, std::size_t max_lag);

/// Fraction of chain states whose path visits each node.
std::vector<double> path_density(const TransitionGraph& graph, const ChainResult& chain);
std::vector<double> path_density(const TransitionGraph& graph, const std::vector<ChainResult>& chains);

/// Share of the highest-density nodes (top `fraction`, at least one) lying
/// on `path` or adjacent to it.
double corridor_fraction(const TransitionGraph& graph, const std::vector<double>& density,
                         const std::vector<std::size_t>& path, double fraction = 0.1);

struct AnalysisConfig {
  std::optional<std::size_t> max_lag;  // min(N_MC - 1, 100) when absent
  double top_fraction = 0.1;

  void validate() const;
};

struct ChainAnalysis {
  ChainSummary summary;
  std::vector<double> g;
  std::size_t reliable_lag = 0;  // lags above N_MC / 4 are flagged
  std::size_t distinct_paths = 0;
};

struct Report {
  std::optional<Calibration> calibration;
  std::vector<ChainAnalysis> chains;
  ChainSummary total;
  std::vector<double> density;
  CoarsePath reference;  // minimum-action path
  double corridor = 0.0;
};

Report report(const TransitionGraph& graph, const std::vector<ChainResult>& chains,
              const std::optional<Calibration>& cal, const CoarsePath& reference, const AnalysisConfig& cfg);

/// calibration_summary.csv, chain_summary.csv, autocorrelation_<i>.csv,
/// density.csv, overlay.json and report.json under `dir`.
void write_report(const Report& rep, const TransitionGraph& graph, const std::filesystem::path& dir,
                  const nlohmann::json& provenance = {});

}  // namespace qtps
