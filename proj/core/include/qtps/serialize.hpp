#pragma once

#include "qtps/annealer.hpp"
#include "qtps/graph.hpp"
#include "qtps/manifold.hpp"
#include "qtps/qubo.hpp"
#include "qtps/tps.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>

namespace qtps {

using Json = nlohmann::json;

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);
/// Hash of the compact, key-sorted dump of `config`.
std::string config_hash(const Json& config);

Json to_json(const PointCloud& cloud);
PointCloud cloud_from_json(const Json& doc);

Json to_json(const TransitionGraph& graph);
TransitionGraph graph_from_json(const Json& doc);

/// {num_bits, linear:{bit:coeff}, quadratic:{"i,j":coeff}, offset, bit_labels}
/// plus the node/edge layout needed to rebuild the problem.
Json to_json(const QuboProblem& problem);
QuboProblem qubo_from_json(const Json& doc);

Json to_json(const Calibration& cal);
Calibration calibration_from_json(const Json& doc);

Json to_json(const ChainResult& chain);
ChainResult chain_from_json(const Json& doc);
/// step,t_sweep,action,outcome,accept_prob with the state after each step.
void write_chain_csv(const ChainResult& chain, std::ostream& out);

/// Pretty-printed with a trailing newline; doubles round-trip exactly.
void write_json(const std::filesystem::path& path, const Json& doc);
/// Throws InputError when missing, PreconditionError when unparsable.
Json read_json(const std::filesystem::path& path);

}  // namespace qtps
