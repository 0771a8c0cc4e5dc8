#include "qtps/serialize.hpp"

#include "qtps/error.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace qtps {
namespace {

std::vector<double> to_vector(const Point& p) { return {p.data(), p.data() + p.size()}; }

Point to_point(const Json& arr) {
  const auto v = arr.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <class T>
std::optional<T> optional_from(const Json& doc, const char* key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  return doc.at(key).get<T>();
}

// Wraps json access errors so callers see one error family.
template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const Json& config) { return fnv1a_hex(config.dump()); }

Json to_json(const PointCloud& cloud) {
  Json points = Json::array();
  for (std::size_t i = 0; i < cloud.size(); ++i) points.push_back(to_vector(cloud.point(i)));
  return {{"dimension", cloud.dimension()},
          {"points", points},
          {"energy", cloud.energy},
          {"basin", cloud.basin},
          {"iteration", cloud.iteration}};
}

PointCloud cloud_from_json(const Json& doc) {
  return guarded("point cloud", [&] {
    PointCloud c;
    const auto& pts = doc.at("points");
    const int d = doc.at("dimension").get<int>();
    c.points.resize(static_cast<Eigen::Index>(pts.size()), d);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto row = pts[i].get<std::vector<double>>();
      if (static_cast<int>(row.size()) != d) throw PreconditionError("point cloud row has wrong dimension");
      for (int k = 0; k < d; ++k) c.points(static_cast<Eigen::Index>(i), k) = row[static_cast<std::size_t>(k)];
    }
    c.energy = doc.value("energy", std::vector<double>{});
    c.basin = doc.value("basin", std::vector<int>{});
    c.iteration = doc.value("iteration", std::vector<int>{});
    c.validate();
    return c;
  });
}

Json to_json(const TransitionGraph& graph) {
  Json nodes = Json::array();
  for (const auto& n : graph.nodes()) nodes.push_back({{"id", n.id}, {"coords", to_vector(n.coords)}, {"veff", n.veff}});
  Json edges = Json::array();
  for (const auto& e : graph.edges()) edges.push_back({{"i", e.i}, {"j", e.j}, {"w", e.w}, {"w_renorm", e.w_renorm}});
  return {{"nodes", nodes},
          {"edges", edges},
          {"source", graph.source()},
          {"target", graph.target()},
          {"config_echo", graph.config_echo()}};
}

TransitionGraph graph_from_json(const Json& doc) {
  return guarded("graph", [&] {
    std::vector<GraphNode> nodes;
    for (const auto& n : doc.at("nodes")) {
      nodes.push_back({n.at("id").get<std::size_t>(), to_point(n.at("coords")), n.at("veff").get<double>()});
    }
    std::vector<GraphEdge> edges;
    for (const auto& e : doc.at("edges")) {
      edges.push_back({e.at("i").get<std::size_t>(), e.at("j").get<std::size_t>(), e.at("w").get<double>(),
                       e.at("w_renorm").get<double>()});
    }
    return TransitionGraph(std::move(nodes), std::move(edges), doc.at("source").get<std::size_t>(),
                           doc.at("target").get<std::size_t>(), doc.value("config_echo", Json::object()));
  });
}

Json to_json(const QuboProblem& problem) {
  Json linear = Json::object();
  for (std::size_t i = 0; i < problem.num_bits(); ++i) linear[std::to_string(i)] = problem.linear()[i];
  Json quadratic = Json::object();
  for (const auto& [key, c] : problem.quadratic()) {
    quadratic[std::to_string(key.first) + "," + std::to_string(key.second)] = c;
  }
  Json labels = Json::array();
  for (std::size_t i = 0; i < problem.num_bits(); ++i) labels.push_back(problem.bit_label(i));
  Json edge_nodes = Json::array();
  for (const auto& [i, j] : problem.edge_nodes()) edge_nodes.push_back({i, j});
  return {{"num_bits", problem.num_bits()},
          {"linear", linear},
          {"quadratic", quadratic},
          {"offset", problem.offset()},
          {"bit_labels", labels},
          {"alpha", problem.alpha()},
          {"node_count", problem.node_count()},
          {"edge_nodes", edge_nodes},
          {"edge_weights", problem.edge_weights()},
          {"source", problem.source()},
          {"target", problem.target()}};
}

QuboProblem qubo_from_json(const Json& doc) {
  return guarded("QUBO", [&] {
    const auto n = doc.at("num_bits").get<std::size_t>();
    std::vector<double> linear(n, 0.0);
    for (const auto& [k, v] : doc.at("linear").items()) linear.at(std::stoul(k)) = v.get<double>();
    std::map<std::pair<std::size_t, std::size_t>, double> quadratic;
    for (const auto& [k, v] : doc.at("quadratic").items()) {
      const auto comma = k.find(',');
      if (comma == std::string::npos) throw PreconditionError("quadratic key '" + k + "' is not 'i,j'");
      quadratic[{std::stoul(k.substr(0, comma)), std::stoul(k.substr(comma + 1))}] = v.get<double>();
    }
    std::vector<EdgePair> edge_nodes;
    for (const auto& e : doc.at("edge_nodes")) edge_nodes.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
    return QuboProblem(doc.at("node_count").get<std::size_t>(), std::move(edge_nodes),
                       doc.at("edge_weights").get<std::vector<double>>(), std::move(linear), std::move(quadratic),
                       doc.at("offset").get<double>(), doc.at("alpha").get<double>(),
                       doc.at("source").get<std::size_t>(), doc.at("target").get<std::size_t>());
  });
}

Json to_json(const Calibration& cal) {
  Json points = Json::array();
  for (const auto& p : cal.points) {
    points.push_back({{"budget", p.budget},
                      {"mean", p.mean},
                      {"stddev", p.stddev},
                      {"attempts", p.attempts},
                      {"valid", p.valid},
                      {"success_rate", p.success_rate()}});
  }
  const auto att = cal.total_attempts();
  return {{"delta_floor", cal.delta_floor},
          {"points", points},
          {"attempts", att},
          {"valid", cal.total_valid()},
          {"success_rate", att ? static_cast<double>(cal.total_valid()) / static_cast<double>(att) : 0.0}};
}

Calibration calibration_from_json(const Json& doc) {
  return guarded("calibration", [&] {
    Calibration cal;
    cal.delta_floor = doc.at("delta_floor").get<double>();
    for (const auto& p : doc.at("points")) {
      cal.points.push_back({p.at("budget").get<double>(), p.at("mean").get<double>(), p.at("stddev").get<double>(),
                            p.at("attempts").get<std::size_t>(), p.at("valid").get<std::size_t>()});
    }
    cal.validate();
    return cal;
  });
}

Json to_json(const ChainResult& chain) {
  Json records = Json::array();
  for (const auto& r : chain.records) {
    records.push_back({{"step", r.step},
                       {"proposed_budget", r.proposed_budget},
                       {"outcome", to_string(r.outcome)},
                       {"proposed_action", optional_json(r.proposed_action)},
                       {"accept_prob", optional_json(r.accept_prob)},
                       {"proposed_path", optional_json(r.proposed_path)},
                       {"note", r.note},
                       {"path", r.path},
                       {"action", r.action},
                       {"budget", r.budget}});
  }
  const auto& s = chain.summary;
  return {{"initial", {{"path", chain.initial.path.nodes}, {"action", chain.initial.path.action}, {"budget", chain.initial.budget}}},
          {"aborted", chain.aborted},
          {"summary",
           {{"steps", s.steps},
            {"accepted", s.accepted},
            {"wrong_topology", s.wrong_topology},
            {"rejected", s.rejected},
            {"backend_failure", s.backend_failure}}},
          {"records", records}};
}

ChainResult chain_from_json(const Json& doc) {
  return guarded("chain", [&] {
    ChainResult c;
    const auto& init = doc.at("initial");
    c.initial.path.nodes = init.at("path").get<std::vector<std::size_t>>();
    c.initial.path.action = init.at("action").get<double>();
    c.initial.budget = init.at("budget").get<double>();
    c.aborted = doc.value("aborted", false);
    for (const auto& r : doc.at("records")) {
      ChainStep s;
      s.step = r.at("step").get<std::size_t>();
      s.proposed_budget = r.at("proposed_budget").get<double>();
      s.outcome = step_outcome_from_string(r.at("outcome").get<std::string>());
      s.proposed_action = optional_from<double>(r, "proposed_action");
      s.accept_prob = optional_from<double>(r, "accept_prob");
      s.proposed_path = optional_from<std::vector<std::size_t>>(r, "proposed_path");
      s.note = r.value("note", "");
      s.path = r.at("path").get<std::vector<std::size_t>>();
      s.action = r.at("action").get<double>();
      s.budget = r.at("budget").get<double>();
      c.records.push_back(std::move(s));
    }
    c.summary = summarize(c.records);
    return c;
  });
}

void write_chain_csv(const ChainResult& chain, std::ostream& out) {
  const auto old = out.precision(17);
  out << "step,t_sweep,action,outcome,accept_prob\n";
  for (const auto& r : chain.records) {
    out << r.step << ',' << r.budget << ',' << r.action << ',' << to_string(r.outcome) << ',';
    if (r.accept_prob) out << *r.accept_prob;
    out << '\n';
  }
  out.precision(old);
}

void write_json(const std::filesystem::path& path, const Json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw PreconditionError("cannot write " + path.string());
  out << doc.dump(1) << '\n';
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("missing input file " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError("cannot parse " + path.string() + ": " + e.what());
  }
}

}  // namespace qtps
