#pragma once

#include "qtps/graph.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace qtps {

using Bits = std::vector<std::uint8_t>;

/// Quadratic binary objective over node bits (indices 0..nu-1) and edge bits
/// (indices nu..nu+|E|-1, in graph edge order):
///   H(b) = offset + sum_i linear[i] b_i + sum_{i<j} quadratic[{i,j}] b_i b_j.
class QuboProblem {
 public:
  QuboProblem() = default;
  QuboProblem(std::size_t node_count, std::vector<EdgePair> edge_nodes, std::vector<double> edge_weights,
              std::vector<double> linear, std::map<std::pair<std::size_t, std::size_t>, double> quadratic,
              double offset, double alpha, std::size_t source, std::size_t target);

  [[nodiscard]] std::size_t num_bits() const noexcept { return linear_.size(); }
  [[nodiscard]] std::size_t node_count() const noexcept { return node_count_; }
  [[nodiscard]] std::size_t edge_count() const noexcept { return edge_nodes_.size(); }
  [[nodiscard]] std::size_t node_bit(std::size_t node) const noexcept { return node; }
  [[nodiscard]] std::size_t edge_bit(std::size_t edge) const noexcept { return node_count_ + edge; }
  [[nodiscard]] std::size_t source() const noexcept { return source_; }
  [[nodiscard]] std::size_t target() const noexcept { return target_; }
  [[nodiscard]] double alpha() const noexcept { return alpha_; }
  [[nodiscard]] double offset() const noexcept { return offset_; }
  [[nodiscard]] const std::vector<double>& linear() const noexcept { return linear_; }
  [[nodiscard]] const std::map<std::pair<std::size_t, std::size_t>, double>& quadratic() const noexcept {
    return quadratic_;
  }
  [[nodiscard]] const std::vector<EdgePair>& edge_nodes() const noexcept { return edge_nodes_; }
  /// Renormalized weight per edge, used to recompute path actions.
  [[nodiscard]] const std::vector<double>& edge_weights() const noexcept { return edge_weights_; }
  /// "n<i>" for node bits, "e<i>-<j>" for edge bits.
  [[nodiscard]] std::string bit_label(std::size_t bit) const;

  /// Couplings of each bit: (other bit, coefficient), both directions stored.
  [[nodiscard]] const std::vector<std::vector<std::pair<std::uint32_t, double>>>& couplings() const noexcept {
    return couplings_;
  }

  [[nodiscard]] double energy(std::span<const std::uint8_t> bits) const;
  /// Energy change from flipping `bit` in `bits`.
  [[nodiscard]] double flip_delta(std::span<const std::uint8_t> bits, std::size_t bit) const;

  friend bool operator==(const QuboProblem& a, const QuboProblem& b);

 private:
  std::size_t node_count_ = 0;
  std::vector<EdgePair> edge_nodes_;
  std::vector<double> edge_weights_;
  std::vector<double> linear_;
  std::map<std::pair<std::size_t, std::size_t>, double> quadratic_;
  double offset_ = 0.0;
  double alpha_ = 0.0;
  std::size_t source_ = 0;
  std::size_t target_ = 0;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> couplings_;
};

struct BinaryAssignment {
  Bits bits;
  double energy = 0.0;
  std::optional<CoarsePath> path;
};

/// alpha = sum of renormalized edge weights.
double default_alpha(const TransitionGraph& graph);

/// H = alpha * (H_s + H_t + H_r) + H_T with renormalized weights, expanded
/// using b^2 = b.
QuboProblem encode(const TransitionGraph& graph, double alpha);

enum class TopologyRule {
  Endpoint,  // source or target bit unset
  Orphan,    // active edge with an inactive endpoint, or active node without edges
  Degree,    // endpoint degree != 1 or interior degree != 2
  Cycle,     // active bits outside the source-target walk
};

std::string to_string(TopologyRule rule);

struct TopologyReport {
  TopologyRule rule;
  std::string detail;
};

using DecodeResult = std::variant<CoarsePath, TopologyReport>;

/// Valid iff the active bits form exactly one simple source-target walk.
/// The action is recomputed from the renormalized edge weights.
DecodeResult decode(const QuboProblem& problem, std::span<const std::uint8_t> bits);

/// Bit vector of a node path (node and edge bits set).
Bits encode_path(const QuboProblem& problem, const std::vector<std::size_t>& path);

inline constexpr std::size_t kMaxBruteForceBits = 24;

/// Exhaustive minimum of H; ties go to the lexicographically smallest bit vector.
BinaryAssignment brute_force_ground(const QuboProblem& problem);

struct PathEnsemble {
  std::vector<CoarsePath> paths;
  std::vector<double> probabilities;  // e^-S / Z

  /// Index of `nodes` in `paths`, if present.
  [[nodiscard]] std::optional<std::size_t> find(const std::vector<std::size_t>& nodes) const;
};

inline constexpr std::size_t kMaxEnumerationNodes = 12;
inline constexpr std::size_t kMaxEnumeratedPaths = 1'000'000;

/// All simple source-target paths with at most max_len nodes, with their
/// Boltzmann probabilities under renormalized weights.
PathEnsemble enumerate_paths(const TransitionGraph& graph, std::size_t max_len);

}  // namespace qtps
