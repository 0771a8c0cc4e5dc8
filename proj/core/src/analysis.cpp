#include "qtps/analysis.hpp"

#include "qtps/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

namespace qtps {

EdgeOccupationSeries EdgeOccupationSeries::from_paths(const TransitionGraph& graph,
                                                      const std::vector<std::vector<std::size_t>>& paths) {
  EdgeOccupationSeries s;
  s.edge_count = graph.edge_count();
  s.steps.reserve(paths.size());
  for (const auto& path : paths) {
    std::vector<std::uint8_t> x(s.edge_count, 0);
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      const auto e = graph.edge_index(path[k], path[k + 1]);
      if (!e) throw GraphError("state path uses a missing edge");
      x[*e] = 1;
    }
    s.steps.push_back(std::move(x));
  }
  return s;
}

EdgeOccupationSeries EdgeOccupationSeries::from_chain(const TransitionGraph& graph, const ChainResult& chain) {
  std::vector<std::vector<std::size_t>> paths;
  paths.reserve(chain.records.size());
  for (const auto& r : chain.records) paths.push_back(r.path);
  return from_paths(graph, paths);
}

std::vector<double> autocorrelation(const EdgeOccupationSeries& series, std::size_t max_lag) {
  const std::size_t n = series.length();
  if (n < 2) throw PreconditionError("autocorrelation needs at least two steps");
  if (max_lag >= n) throw PreconditionError("max_lag must be below the chain length");
  if (series.edge_count == 0) throw PreconditionError("autocorrelation needs at least one edge");
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> g(max_lag + 1, 0.0);
  for (std::size_t e = 0; e < series.edge_count; ++e) {
    double mean = 0.0;
    for (const auto& x : series.steps) mean += x[e];
    mean *= inv_n;
    for (std::size_t lag = 0; lag <= max_lag; ++lag) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += series.steps[(k + lag) % n][e] * series.steps[k][e];
      g[lag] += acc * inv_n - mean * mean;
    }
  }
  for (double& v : g) v /= static_cast<double>(series.edge_count);
  return g;
}

std::vector<double> path_density(const TransitionGraph& graph, const std::vector<ChainResult>& chains) {
  std::vector<double> density(graph.node_count(), 0.0);
  std::size_t states = 0;
  std::vector<std::uint8_t> seen(graph.node_count());
  for (const auto& chain : chains) {
    for (const auto& r : chain.records) {
      std::fill(seen.begin(), seen.end(), 0);
      for (std::size_t v : r.path) {
        if (v >= graph.node_count()) throw GraphError("state path node out of range");
        seen[v] = 1;
      }
      for (std::size_t v = 0; v < seen.size(); ++v) density[v] += seen[v];
      ++states;
    }
  }
  if (states == 0) throw PreconditionError("path density needs at least one chain state");
  for (double& d : density) d /= static_cast<double>(states);
  return density;
}

std::vector<double> path_density(const TransitionGraph& graph, const ChainResult& chain) {
  return path_density(graph, std::vector<ChainResult>{chain});
}

double corridor_fraction(const TransitionGraph& graph, const std::vector<double>& density,
                         const std::vector<std::size_t>& path, double fraction) {
  if (density.size() != graph.node_count()) throw PreconditionError("density size does not match the graph");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw PreconditionError("fraction must lie in (0, 1]");
  std::vector<std::uint8_t> near(graph.node_count(), 0);
  for (std::size_t v : path) {
    near.at(v) = 1;
    for (const auto& [u, e] : graph.incident(v)) near[u] = 1;
  }
  std::vector<std::size_t> order(graph.node_count());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return density[a] > density[b]; });
  const auto top = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * graph.node_count())));
  std::size_t hits = 0;
  for (std::size_t k = 0; k < top; ++k) hits += near[order[k]];
  return static_cast<double>(hits) / static_cast<double>(top);
}

void AnalysisConfig::validate() const {
  if (!(top_fraction > 0.0 && top_fraction <= 1.0)) throw ConfigError("analysis.top_fraction must lie in (0, 1]");
}

Report report(const TransitionGraph& graph, const std::vector<ChainResult>& chains,
              const std::optional<Calibration>& cal, const CoarsePath& reference, const AnalysisConfig& cfg) {
  cfg.validate();
  if (chains.empty()) throw PreconditionError("report needs at least one chain");
  Report rep;
  rep.calibration = cal;
  rep.reference = reference;
  for (const auto& chain : chains) {
    if (chain.records.empty()) throw PreconditionError("report refuses an empty chain");
    ChainAnalysis a;
    a.summary = summarize(chain.records);
    if (!a.summary.reconciles()) throw PreconditionError("chain summary does not reconcile");
    const std::size_t n = chain.records.size();
    if (n >= 2) {
      const std::size_t lag = std::min(cfg.max_lag.value_or(100), n - 1);
      a.g = autocorrelation(EdgeOccupationSeries::from_chain(graph, chain), lag);
    }
    a.reliable_lag = n / 4;
    std::set<std::vector<std::size_t>> distinct;
    for (const auto& r : chain.records) distinct.insert(r.path);
    a.distinct_paths = distinct.size();
    rep.total.steps += a.summary.steps;
    rep.total.accepted += a.summary.accepted;
    rep.total.rejected += a.summary.rejected;
    rep.total.wrong_topology += a.summary.wrong_topology;
    rep.total.backend_failure += a.summary.backend_failure;
    rep.chains.push_back(std::move(a));
  }
  rep.density = path_density(graph, chains);
  rep.corridor = corridor_fraction(graph, rep.density, reference.nodes, cfg.top_fraction);
  return rep;
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw PreconditionError("cannot write " + p.string());
  out << std::setprecision(17);
  return out;
}

}  // namespace

void write_report(const Report& rep, const TransitionGraph& graph, const std::filesystem::path& dir,
                  const nlohmann::json& provenance) {
  std::filesystem::create_directories(dir);
  nlohmann::json doc;
  doc["provenance"] = provenance;

  if (rep.calibration) {
    auto out = open_out(dir / "calibration_summary.csv");
    out << "budget,attempts,valid,success_rate,mean_action,stddev_action\n";
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& p : rep.calibration->points) {
      out << p.budget << ',' << p.attempts << ',' << p.valid << ',' << p.success_rate() << ',' << p.mean << ','
          << p.stddev << '\n';
    }
    const auto att = rep.calibration->total_attempts();
    const auto val = rep.calibration->total_valid();
    doc["calibration"] = {{"attempts", att}, {"valid", val},
                          {"success_rate", att ? static_cast<double>(val) / static_cast<double>(att) : 0.0}};
  }

  {
    auto out = open_out(dir / "chain_summary.csv");
    out << "chain,steps,accepted,wrong_topology,rejected,backend_failure,distinct_paths\n";
    nlohmann::json chains = nlohmann::json::array();
    for (std::size_t c = 0; c < rep.chains.size(); ++c) {
      const auto& s = rep.chains[c].summary;
      out << c << ',' << s.steps << ',' << s.accepted << ',' << s.wrong_topology << ',' << s.rejected << ','
          << s.backend_failure << ',' << rep.chains[c].distinct_paths << '\n';
      chains.push_back({{"steps", s.steps}, {"accepted", s.accepted}, {"wrong_topology", s.wrong_topology},
                        {"rejected", s.rejected}, {"backend_failure", s.backend_failure},
                        {"distinct_paths", rep.chains[c].distinct_paths}});
    }
    const auto& t = rep.total;
    out << "total," << t.steps << ',' << t.accepted << ',' << t.wrong_topology << ',' << t.rejected << ','
        << t.backend_failure << ",\n";
    doc["chains"] = chains;
  }

  for (std::size_t c = 0; c < rep.chains.size(); ++c) {
    const auto& a = rep.chains[c];
    auto out = open_out(dir / ("autocorrelation_" + std::to_string(c) + ".csv"));
    out << "lag,G,G_over_G0,flagged\n";
    for (std::size_t lag = 0; lag < a.g.size(); ++lag) {
      const double ratio = a.g[0] > 0.0 ? a.g[lag] / a.g[0] : 0.0;
      out << lag << ',' << a.g[lag] << ',' << ratio << ',' << (lag > a.reliable_lag ? 1 : 0) << '\n';
    }
    if (a.g.size() > 1) doc["chains"][c]["G1_over_G0"] = a.g[0] > 0.0 ? a.g[1] / a.g[0] : 0.0;
  }

  {
    auto out = open_out(dir / "density.csv");
    out << "node,density\n";
    for (std::size_t v = 0; v < rep.density.size(); ++v) out << v << ',' << rep.density[v] << '\n';
  }

  {
    nlohmann::json overlay;
    overlay["reference_path"] = rep.reference.nodes;
    overlay["reference_action"] = rep.reference.action;
    nlohmann::json coords = nlohmann::json::array();
    for (const auto& n : graph.nodes()) coords.push_back(std::vector<double>(n.coords.data(), n.coords.data() + n.coords.size()));
    overlay["node_coords"] = coords;
    overlay["density"] = rep.density;
    auto out = open_out(dir / "overlay.json");
    out << overlay.dump(2) << '\n';
  }

  doc["total"] = {{"steps", rep.total.steps}, {"accepted", rep.total.accepted},
                  {"wrong_topology", rep.total.wrong_topology}, {"rejected", rep.total.rejected},
                  {"backend_failure", rep.total.backend_failure}};
  doc["corridor_fraction"] = rep.corridor;
  auto out = open_out(dir / "report.json");
  out << doc.dump(2) << '\n';
}

}  // namespace qtps
