#include "qtps/pipeline.hpp"

#include "qtps/error.hpp"
#include "qtps/qubo.hpp"
#include "qtps/random.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <map>
#include <set>

namespace qtps::pipeline {
namespace {

// Typed access to one config section; rejects unknown keys.
class Section {
 public:
  Section(const Json& doc, std::string name, std::set<std::string> allowed) : name_(std::move(name)) {
    if (doc.contains(name_)) {
      if (!doc.at(name_).is_object()) throw ConfigError(name_ + ": section must be an object");
      obj_ = doc.at(name_);
    } else {
      obj_ = Json::object();
    }
    for (const auto& [key, v] : obj_.items()) {
      if (!allowed.contains(key)) throw ConfigError(name_ + "." + key + ": unknown field");
    }
  }

  template <class T>
  [[nodiscard]] std::optional<T> opt(const std::string& key) const {
    if (!obj_.contains(key) || obj_.at(key).is_null()) return std::nullopt;
    try {
      return obj_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(field(key) + ": wrong type");
    }
  }

  template <class T>
  [[nodiscard]] T get(const std::string& key, T fallback) const {
    return opt<T>(key).value_or(std::move(fallback));
  }

  [[nodiscard]] Json raw(const std::string& key) const { return obj_.value(key, Json()); }
  [[nodiscard]] std::string field(const std::string& key) const { return name_ + "." + key; }

 private:
  std::string name_;
  Json obj_;
};

Point to_point(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Potential parse_potential(const Json& desc) {
  if (desc.is_null()) return Potential::double_well();
  if (!desc.is_object()) throw ConfigError("dynamics.potential: must be an object");
  const Json wrapper{{"potential", desc}};
  const Section s(wrapper, "potential",
                  {"kind", "y_stiffness", "scale", "stiffness", "center", "dimension", "terms"});
  const auto kind = s.get<std::string>("kind", "double-well");
  try {
    if (kind == "double-well") return Potential::double_well(s.get("y_stiffness", 5.0));
    if (kind == "mueller-brown") return Potential::mueller_brown(s.get("scale", 1.0));
    if (kind == "harmonic") {
      const auto k = s.opt<std::vector<double>>("stiffness");
      if (!k) throw ConfigError("dynamics.potential.stiffness: required for harmonic");
      const auto c = s.opt<std::vector<double>>("center");
      return c ? Potential::harmonic(to_point(*k), to_point(*c)) : Potential::harmonic(to_point(*k));
    }
    if (kind == "custom-polynomial") {
      const auto dim = s.opt<int>("dimension");
      if (!dim) throw ConfigError("dynamics.potential.dimension: required for custom-polynomial");
      std::vector<PolynomialTerm> terms;
      for (const auto& t : s.raw("terms")) {
        terms.push_back({t.at("coefficient").get<double>(), t.at("powers").get<std::vector<int>>()});
      }
      return Potential::polynomial(*dim, std::move(terms));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("dynamics.potential.terms: ") + e.what());
  } catch (const Error& e) {
    throw ConfigError(std::string("dynamics.potential: ") + e.what());
  }
  throw ConfigError("dynamics.potential.kind: unknown potential '" + kind + "'");
}

// Re-raises module validation failures with the section name attached.
template <class F>
void validated(const std::string& section, F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    throw ConfigError(msg.rfind(section + ".", 0) == 0 ? msg : section + ": " + msg);
  } catch (const PreconditionError& e) {
    throw ConfigError(section + ": " + e.what());
  }
}

std::vector<std::size_t> thin_rows(std::size_t m, std::size_t cap) {
  std::vector<std::size_t> rows;
  if (m <= cap) {
    for (std::size_t i = 0; i < m; ++i) rows.push_back(i);
    return rows;
  }
  for (std::size_t k = 0; k < cap; ++k) rows.push_back(k * m / cap);
  return rows;
}

void say(const Log& log, const std::string& msg) {
  if (log) log(msg);
}

Json read_artifact(const RunConfig& cfg, Stage stage, const fs::path& path) {
  Json doc = read_json(path);
  check_provenance(cfg, stage, doc, path);
  return doc;
}

}  // namespace

RunConfig parse_config(const Json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  const std::set<std::string> sections{"seed", "output_dir", "dynamics", "manifold", "graph",
                                       "annealer", "tps", "analysis", "oracle"};
  for (const auto& [key, v] : doc.items()) {
    if (!sections.contains(key)) throw ConfigError(key + ": unknown section");
  }
  RunConfig cfg;
  cfg.raw = doc;
  try {
    cfg.seed = doc.value("seed", std::uint64_t{0});
    cfg.output_dir = doc.value("output_dir", std::string("qtps-run"));
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("seed/output_dir: wrong type");
  }
  if (cfg.output_dir.is_relative() && !base_dir.empty()) cfg.output_dir = base_dir / cfg.output_dir;

  const Section dyn(doc, "dynamics", {"potential", "mass", "friction", "temperature", "dt", "atoms"});
  cfg.potential = parse_potential(dyn.raw("potential"));
  cfg.langevin.mass = dyn.get("mass", cfg.langevin.mass);
  cfg.langevin.friction = dyn.get("friction", cfg.langevin.friction);
  cfg.langevin.temperature = dyn.get("temperature", cfg.langevin.temperature);
  cfg.langevin.dt = dyn.get("dt", cfg.langevin.dt);
  cfg.langevin.atoms = dyn.get("atoms", cfg.langevin.atoms);
  cfg.langevin.dimension = cfg.potential.dimension();
  validated("dynamics", [&] { cfg.langevin.validate(); });

  const Section man(doc, "manifold",
                    {"endpoint_a", "endpoint_b", "initial_steps", "burst_steps", "record_stride", "shoot_distance",
                     "overlap_threshold", "max_iterations", "hull_dims", "epsilon", "neighbor_radius",
                     "max_embedding_points"});
  const int dim = cfg.potential.dimension();
  auto endpoint = [&](const char* key, double x) {
    const auto v = man.opt<std::vector<double>>(key);
    if (!v) {
      Point p = Point::Zero(dim);
      p[0] = x;
      return p;
    }
    if (static_cast<int>(v->size()) != dim) {
      throw ConfigError(man.field(key) + ": expected " + std::to_string(dim) + " coordinates");
    }
    return to_point(*v);
  };
  cfg.endpoint_a = endpoint("endpoint_a", -1.0);
  cfg.endpoint_b = endpoint("endpoint_b", 1.0);
  auto& ex = cfg.explore;
  ex.initial_steps = man.get("initial_steps", ex.initial_steps);
  ex.burst_steps = man.get("burst_steps", ex.burst_steps);
  ex.record_stride = man.get("record_stride", ex.record_stride);
  ex.shoot_distance = man.get("shoot_distance", ex.shoot_distance);
  ex.overlap_threshold = man.get("overlap_threshold", ex.overlap_threshold);
  ex.max_iterations = man.get("max_iterations", ex.max_iterations);
  ex.hull_dims = man.get("hull_dims", ex.hull_dims);
  ex.epsilon = man.opt<double>("epsilon");
  ex.neighbor_radius = man.opt<double>("neighbor_radius");
  ex.max_embedding_points = man.get("max_embedding_points", ex.max_embedding_points);
  validated("manifold", [&] { ex.validate(); });

  const Section gr(doc, "graph",
                   {"energy_quantile", "diffusion_threshold", "edge_diffusion_cutoff", "edge_cartesian_cutoff",
                    "smoothing_radius", "weight_form", "s0", "coarse_dt", "sigma", "c_t", "c_v", "diffusion",
                    "target_nodes", "edge_diffusion_factor", "edge_cartesian_factor", "epsilon",
                    "max_embedding_points"});
  auto& g = cfg.graph.graph;
  g.energy_quantile = gr.get("energy_quantile", g.energy_quantile);
  g.diffusion_threshold = gr.get("diffusion_threshold", g.diffusion_threshold);
  g.edge_diffusion_cutoff = gr.get("edge_diffusion_cutoff", g.edge_diffusion_cutoff);
  g.edge_cartesian_cutoff = gr.get("edge_cartesian_cutoff", g.edge_cartesian_cutoff);
  g.smoothing_radius = gr.get("smoothing_radius", g.smoothing_radius);
  if (const auto wf = gr.opt<std::string>("weight_form")) {
    try {
      g.weight_form = weight_form_from_string(*wf);
    } catch (const Error& e) {
      throw ConfigError(gr.field("weight_form") + ": " + e.what());
    }
  }
  g.s0 = gr.opt<double>("s0");
  g.coarse_dt = gr.opt<double>("coarse_dt");
  g.sigma = gr.opt<double>("sigma");
  g.c_t = gr.opt<double>("c_t");
  g.c_v = gr.opt<double>("c_v");
  g.diffusion = gr.opt<double>("diffusion");
  cfg.graph.target_nodes = gr.opt<std::size_t>("target_nodes");
  cfg.graph.edge_diffusion_factor = gr.opt<double>("edge_diffusion_factor");
  cfg.graph.edge_cartesian_factor = gr.opt<double>("edge_cartesian_factor");
  cfg.graph.epsilon = gr.opt<double>("epsilon");
  cfg.graph.max_embedding_points = gr.get("max_embedding_points", cfg.graph.max_embedding_points);
  validated("graph", [&] { g.validate(); });
  if (cfg.graph.target_nodes && *cfg.graph.target_nodes < 2) throw ConfigError("graph.target_nodes: must be >= 2");
  for (const auto& [key, v] : {std::pair{"edge_diffusion_factor", cfg.graph.edge_diffusion_factor},
                               std::pair{"edge_cartesian_factor", cfg.graph.edge_cartesian_factor},
                               std::pair{"epsilon", cfg.graph.epsilon}}) {
    if (v && !(*v > 0.0)) throw ConfigError(gr.field(key) + ": must be positive");
  }
  if (cfg.graph.max_embedding_points < 3) throw ConfigError("graph.max_embedding_points: must be >= 3");

  const Section an(doc, "annealer",
                   {"backend", "sweeps_per_second", "num_reads", "beta_range", "alpha", "initial_state", "budgets",
                    "attempts_per_budget", "delta_floor"});
  auto& a = cfg.annealer;
  a.backend = an.get<std::string>("backend", a.backend);
  if (a.backend != "local" && a.backend != "remote") {
    throw ConfigError("annealer.backend: expected 'local' or 'remote', got '" + a.backend + "'");
  }
  a.annealer.sweeps_per_second = an.get("sweeps_per_second", a.annealer.sweeps_per_second);
  a.annealer.num_reads = an.get("num_reads", a.annealer.num_reads);
  if (const auto br = an.opt<std::vector<double>>("beta_range")) {
    if (br->size() != 2) throw ConfigError("annealer.beta_range: expected [hot, cold]");
    a.annealer.beta_range = std::pair{(*br)[0], (*br)[1]};
  }
  a.annealer.alpha = an.opt<double>("alpha");
  if (const auto init = an.opt<std::string>("initial_state")) {
    try {
      a.annealer.initial_state = initial_state_from_string(*init);
    } catch (const Error& e) {
      throw ConfigError(an.field("initial_state") + ": " + e.what());
    }
  }
  a.budgets = an.get("budgets", a.budgets);
  a.attempts_per_budget = an.get("attempts_per_budget", a.attempts_per_budget);
  a.delta_floor = an.get("delta_floor", a.delta_floor);
  validated("annealer", [&] {
    a.annealer.validate();
    CalibrationOptions{a.budgets, a.attempts_per_budget, a.annealer.num_reads, 0, a.delta_floor}.validate();
  });

  const Section tp(doc, "tps", {"t0", "k", "dt", "steps", "initial_budget", "chains", "max_failure_fraction"});
  auto& c = cfg.tps.chain;
  c.t0 = tp.get("t0", c.t0);
  c.k = tp.get("k", c.k);
  c.dt = tp.get("dt", c.dt);
  c.steps = tp.get("steps", c.steps);
  c.initial_budget = tp.opt<double>("initial_budget");
  c.max_failure_fraction = tp.get("max_failure_fraction", c.max_failure_fraction);
  cfg.tps.chains = tp.get("chains", cfg.tps.chains);
  validated("tps", [&] { c.validate(); });
  if (cfg.tps.chains == 0) throw ConfigError("tps.chains: must be at least 1");
  if (!(c.start_budget() >= a.budgets.front() && c.start_budget() <= a.budgets.back())) {
    throw ConfigError("tps.initial_budget: must lie within annealer.budgets");
  }

  const Section al(doc, "analysis", {"max_lag", "top_fraction"});
  cfg.analysis.max_lag = al.opt<std::size_t>("max_lag");
  cfg.analysis.top_fraction = al.get("top_fraction", cfg.analysis.top_fraction);
  validated("analysis", [&] { cfg.analysis.validate(); });

  const Section orc(doc, "oracle", {"max_len"});
  cfg.oracle.max_len = orc.opt<std::size_t>("max_len");
  if (cfg.oracle.max_len && *cfg.oracle.max_len < 2) throw ConfigError("oracle.max_len: must be >= 2");
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("missing config file " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse config " + path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::Explore: return "explore";
    case Stage::Graph: return "graph";
    case Stage::Calibrate: return "calibrate";
    case Stage::Sample: return "sample";
    case Stage::Analyze: return "analyze";
    case Stage::Oracle: return "oracle";
  }
  return "unknown";
}

Json stage_config(const RunConfig& cfg, Stage stage) {
  static const std::map<Stage, std::vector<std::string>> sections{
      {Stage::Explore, {"dynamics", "manifold"}},
      {Stage::Graph, {"dynamics", "manifold", "graph"}},
      {Stage::Calibrate, {"dynamics", "manifold", "graph", "annealer"}},
      {Stage::Sample, {"dynamics", "manifold", "graph", "annealer", "tps"}},
      {Stage::Analyze, {"dynamics", "manifold", "graph", "annealer", "tps", "analysis"}},
      {Stage::Oracle, {"dynamics", "manifold", "graph", "oracle"}},
  };
  Json out = Json::object();
  out["seed"] = cfg.seed;
  for (const auto& s : sections.at(stage)) out[s] = cfg.raw.value(s, Json());
  return out;
}

std::string stage_hash(const RunConfig& cfg, Stage stage) { return config_hash(stage_config(cfg, stage)); }

Json provenance(const RunConfig& cfg, Stage stage) {
  return {{"stage", to_string(stage)},
          {"hash", stage_hash(cfg, stage)},
          {"seed", cfg.seed},
          {"config", stage_config(cfg, stage)}};
}

void check_provenance(const RunConfig& cfg, Stage stage, const Json& artifact, const fs::path& where) {
  const Json* prov = artifact.contains("provenance") ? &artifact.at("provenance") : nullptr;
  if (!prov || !prov->contains("hash") || !prov->contains("stage")) {
    throw ProvenanceError(where.string() + " carries no provenance record");
  }
  if (prov->at("stage") != to_string(stage)) {
    throw ProvenanceError(where.string() + " was written by stage '" + prov->at("stage").get<std::string>() +
                          "', expected '" + to_string(stage) + "'");
  }
  const auto expected = stage_hash(cfg, stage);
  if (prov->at("hash") != expected) {
    throw ProvenanceError(where.string() + " is stale: config hash " + prov->at("hash").get<std::string>() +
                          " does not match current " + expected + " for stage '" + to_string(stage) + "'");
  }
}

std::unique_ptr<Backend> make_backend(const RunConfig& cfg) {
  if (cfg.annealer.backend == "remote") return std::make_unique<RemoteBackend>(RemoteConfig::from_environment());
  return std::make_unique<SimulatedAnnealer>(cfg.annealer.annealer);
}

QuboProblem build_qubo(const RunConfig& cfg, const TransitionGraph& graph) {
  return encode(graph, cfg.annealer.annealer.alpha.value_or(default_alpha(graph)));
}

Paths Paths::defaults(const RunConfig& cfg) {
  const auto& d = cfg.output_dir;
  Paths p;
  p.cloud = d / "cloud.json";
  p.graph = d / "graph.json";
  p.calibration = d / "calibration.json";
  p.qubo = d / "qubo.json";
  p.chains_dir = d / "chains";
  p.report_dir = d / "report";
  p.oracle = d / "oracle.json";
  return p;
}

ExploreResult run_explore(const RunConfig& cfg, const Paths& paths, const Log& log) {
  say(log, "explore: seeding basins");
  ExploreResult res = explore(cfg.potential, cfg.langevin, cfg.endpoint_a, cfg.endpoint_b, cfg.explore,
                              RandomStream(cfg.seed).split(0));
  say(log, "explore: " + std::to_string(res.cloud.size()) + " configurations after " +
               std::to_string(res.iterations) + " iterations, converged=" + (res.converged ? "yes" : "no"));
  write_json(paths.cloud, {{"provenance", provenance(cfg, Stage::Explore)},
                           {"converged", res.converged},
                           {"iterations", res.iterations},
                           {"min_cross_distance", res.min_cross_distance},
                           {"size_history", res.size_history},
                           {"cloud", to_json(res.cloud)}});
  return res;
}

TransitionGraph build_graph(const RunConfig& cfg, const PointCloud& full, const Log& log) {
  const PointCloud cloud = full.subset(thin_rows(full.size(), cfg.graph.max_embedding_points));
  DiffusionMapOptions dm;
  dm.epsilon = cfg.graph.epsilon;
  const DiffusionEmbedding emb = diffusion_map(cloud, 2, dm);
  say(log, "graph: embedded " + std::to_string(cloud.size()) + " configurations, epsilon=" +
               std::to_string(emb.epsilon));

  GraphConfig gc = cfg.graph.graph;
  if (cfg.graph.target_nodes) {
    gc.diffusion_threshold =
        tune_diffusion_threshold(cloud, emb, gc, cfg.endpoint_a, cfg.endpoint_b, *cfg.graph.target_nodes);
  }
  NodeSet nodes = reduce(cloud, emb, gc, cfg.endpoint_a, cfg.endpoint_b);
  if (cfg.graph.edge_diffusion_factor || cfg.graph.edge_cartesian_factor) {
    const auto [nn_diff, nn_cart] = nearest_neighbor_scales(nodes);
    if (cfg.graph.edge_diffusion_factor) gc.edge_diffusion_cutoff = *cfg.graph.edge_diffusion_factor * nn_diff;
    if (cfg.graph.edge_cartesian_factor) gc.edge_cartesian_cutoff = *cfg.graph.edge_cartesian_factor * nn_cart;
  }
  const auto edges = connect(nodes, gc);
  assign_effective_potential(nodes, cfg.potential, cfg.langevin, gc);
  gc = resolve_renormalization(nodes, edges, gc, cfg.langevin);
  Json echo{{"diffusion_threshold", gc.diffusion_threshold},
            {"edge_diffusion_cutoff", gc.edge_diffusion_cutoff},
            {"edge_cartesian_cutoff", gc.edge_cartesian_cutoff},
            {"weight_form", to_string(gc.weight_form)},
            {"s0", *gc.s0},
            {"coarse_dt", *gc.coarse_dt},
            {"sigma", *gc.sigma},
            {"c_t", *gc.c_t},
            {"c_v", *gc.c_v},
            {"diffusion", *gc.diffusion},
            {"epsilon", emb.epsilon}};
  TransitionGraph graph = weigh(nodes, edges, gc, echo);
  say(log, "graph: " + std::to_string(graph.node_count()) + " nodes, " + std::to_string(graph.edge_count()) +
               " edges");
  return graph;
}

TransitionGraph run_graph(const RunConfig& cfg, const Paths& paths, const Log& log) {
  const Json doc = read_artifact(cfg, Stage::Explore, paths.cloud);
  const PointCloud cloud = cloud_from_json(doc.at("cloud"));
  TransitionGraph graph = build_graph(cfg, cloud, log);
  write_json(paths.graph, {{"provenance", provenance(cfg, Stage::Graph)}, {"graph", to_json(graph)}});
  return graph;
}

Calibration run_calibrate(const RunConfig& cfg, const Paths& paths, const Log& log) {
  const TransitionGraph graph = graph_from_json(read_artifact(cfg, Stage::Graph, paths.graph).at("graph"));
  const QuboProblem q = build_qubo(cfg, graph);
  write_json(paths.qubo, {{"provenance", provenance(cfg, Stage::Calibrate)}, {"qubo", to_json(q)}});
  const auto backend = make_backend(cfg);
  CalibrationOptions opts{cfg.annealer.budgets, cfg.annealer.attempts_per_budget, cfg.annealer.annealer.num_reads,
                          RandomStream(cfg.seed).split(3).key(), cfg.annealer.delta_floor};
  say(log, "calibrate: " + std::to_string(q.num_bits()) + " bits, alpha=" + std::to_string(q.alpha()) + ", " +
               std::to_string(opts.budgets.size()) + " budgets");
  Calibration cal = calibrate(q, opts, *backend);
  say(log, "calibrate: success rate " + std::to_string(static_cast<double>(cal.total_valid()) /
                                                         static_cast<double>(cal.total_attempts())));
  write_json(paths.calibration, {{"provenance", provenance(cfg, Stage::Calibrate)},
                                 {"backend", backend->id()},
                                 {"calibration", to_json(cal)}});
  return cal;
}

std::vector<ChainResult> run_sample(const RunConfig& cfg, const Paths& paths, const Log& log) {
  const TransitionGraph graph = graph_from_json(read_artifact(cfg, Stage::Graph, paths.graph).at("graph"));
  const Calibration cal =
      calibration_from_json(read_artifact(cfg, Stage::Calibrate, paths.calibration).at("calibration"));
  const QuboProblem q = build_qubo(cfg, graph);
  const auto backend = make_backend(cfg);
  const std::size_t reads = cfg.annealer.annealer.num_reads;

  std::vector<std::future<ChainResult>> jobs;
  for (std::size_t c = 0; c < cfg.tps.chains; ++c) {
    ChainConfig cc = cfg.tps.chain;
    const RandomStream chain_stream = RandomStream(cfg.seed).split(4).split(c);
    cc.seed = chain_stream.split(0).key();
    jobs.push_back(std::async(std::launch::async, [&, cc, chain_stream] {
      const CoarsePath start = draw_initial_path(q, *backend, cc.start_budget(), reads, chain_stream.split(1).key());
      return run_chain(q, cal, *backend, reads, cc, start);
    }));
  }
  std::vector<ChainResult> chains;
  std::exception_ptr failure;
  for (auto& j : jobs) {
    try {
      chains.push_back(j.get());
    } catch (...) {
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  fs::create_directories(paths.chains_dir);
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const auto stem = paths.chains_dir / ("chain_" + std::to_string(c));
    std::ofstream csv(stem.string() + ".csv");
    if (!csv) throw PreconditionError("cannot write " + stem.string() + ".csv");
    write_chain_csv(chains[c], csv);
    Json side = to_json(chains[c]);
    side["provenance"] = provenance(cfg, Stage::Sample);
    side["chain_index"] = c;
    write_json(stem.string() + ".json", side);
    say(log, "sample: chain " + std::to_string(c) + " " + chains[c].summary.format());
  }
  for (const auto& ch : chains) {
    if (ch.aborted) {
      throw BackendError("chain aborted: backend failures exceeded " +
                         std::to_string(cfg.tps.chain.max_failure_fraction) + " of the steps");
    }
  }
  return chains;
}

Report run_analyze(const RunConfig& cfg, const Paths& paths, const Log& log) {
  const TransitionGraph graph = graph_from_json(read_artifact(cfg, Stage::Graph, paths.graph).at("graph"));
  std::vector<fs::path> files = paths.chains;
  if (files.empty() && fs::is_directory(paths.chains_dir)) {
    for (const auto& entry : fs::directory_iterator(paths.chains_dir)) {
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  }
  if (files.empty()) throw InputError("analyze needs chain files; none found in " + paths.chains_dir.string());
  std::vector<ChainResult> chains;
  for (const auto& f : files) chains.push_back(chain_from_json(read_artifact(cfg, Stage::Sample, f)));
  std::optional<Calibration> cal;
  if (fs::exists(paths.calibration)) {
    cal = calibration_from_json(read_artifact(cfg, Stage::Calibrate, paths.calibration).at("calibration"));
  }
  Report rep = report(graph, chains, cal, dijkstra(graph), cfg.analysis);
  write_report(rep, graph, paths.report_dir, provenance(cfg, Stage::Analyze));
  say(log, "analyze: " + rep.total.format() + ", corridor fraction " + std::to_string(rep.corridor));
  return rep;
}

Json run_oracle(const RunConfig& cfg, const Paths& paths, const Log& log) {
  const TransitionGraph graph = graph_from_json(read_artifact(cfg, Stage::Graph, paths.graph).at("graph"));
  if (graph.node_count() > kMaxEnumerationNodes) {
    throw PreconditionError("oracle refuses " + std::to_string(graph.node_count()) + " nodes (limit " +
                            std::to_string(kMaxEnumerationNodes) + ")");
  }
  const QuboProblem q = encode(graph, cfg.annealer.annealer.alpha.value_or(default_alpha(graph)));
  const BinaryAssignment ground = brute_force_ground(q);
  const PathEnsemble ens = enumerate_paths(graph, cfg.oracle.max_len.value_or(graph.node_count()));
  const CoarsePath ref = dijkstra(graph);

  Json paths_json = Json::array();
  for (std::size_t k = 0; k < ens.paths.size(); ++k) {
    paths_json.push_back(
        {{"nodes", ens.paths[k].nodes}, {"action", ens.paths[k].action}, {"probability", ens.probabilities[k]}});
  }
  Json doc{{"provenance", provenance(cfg, Stage::Oracle)},
           {"ground", {{"bits", ground.bits}, {"energy", ground.energy}}},
           {"dijkstra", {{"nodes", ref.nodes}, {"action", ref.action}}},
           {"paths", paths_json}};
  doc["ground"]["path"] = ground.path ? Json(ground.path->nodes) : Json(nullptr);
  doc["ground"]["action"] = ground.path ? Json(ground.path->action) : Json(nullptr);
  write_json(paths.oracle, doc);
  say(log, "oracle: " + std::to_string(ens.paths.size()) + " paths enumerated");
  return doc;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const BackendError*>(&e)) return 4;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InputError*>(&e)) return 2;
  return 3;
}

}  // namespace qtps::pipeline
