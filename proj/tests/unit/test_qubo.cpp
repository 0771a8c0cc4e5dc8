#include "doctest.h"

#include "fixtures.hpp"
#include "qtps/error.hpp"
#include "qtps/qubo.hpp"

#include <cmath>
#include <limits>

using namespace qtps;

namespace {

Bits bits_of(std::uint64_t code, std::size_t n) {
  Bits b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<std::uint8_t>((code >> i) & 1u);
  return b;
}

// Plain exhaustive minimum with explicit lexicographic tie-breaking.
Bits oracle_ground(const TransitionGraph& g, double alpha) {
  const std::size_t n = g.node_count() + g.edge_count();
  Bits best;
  double best_e = std::numeric_limits<double>::infinity();
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
    const Bits b = bits_of(code, n);
    const double e = testing::direct_hamiltonian(g, alpha, b);
    if (e < best_e - 1e-9 || (std::abs(e - best_e) <= 1e-9 && b < best)) {
      best_e = std::min(best_e, e);
      best = b;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("bit layout and labels") {
  const auto g = testing::two_path_square();
  const auto q = encode(g, 2.0);
  CHECK(q.num_bits() == 8);
  CHECK(q.node_bit(3) == 3);
  CHECK(q.edge_bit(0) == 4);
  CHECK(q.bit_label(2) == "n2");
  // Edges are stored sorted: 0-1, 0-2, 1-3, 2-3.
  CHECK(q.bit_label(5) == "e0-2");
  CHECK(q.bit_label(7) == "e2-3");
  for (const auto& [key, v] : q.quadratic()) {
    CHECK(key.first < key.second);
    CHECK(key.second < q.num_bits());
  }
}

TEST_CASE("single edge graph") {
  const auto g = testing::make_graph(2, {{0, 1}}, {0.3}, 0, 1);
  const double w = g.edges()[0].w_renorm;  // 1 after renormalization
  const double alpha = 10.0 * w;
  const auto q = encode(g, alpha);
  const Bits path{1, 1, 1};
  CHECK(q.energy(path) == doctest::Approx(-2.0 * alpha + w));
  CHECK(q.energy(Bits{0, 0, 0}) == doctest::Approx(0.0));
  for (std::uint64_t code = 0; code < 8; ++code) CHECK(q.energy(bits_of(code, 3)) >= q.energy(path) - 1e-12);
  const auto ground = brute_force_ground(q);
  CHECK(ground.bits == path);
  REQUIRE(ground.path.has_value());
  CHECK(ground.path->nodes == std::vector<std::size_t>{0, 1});
}

TEST_CASE("coefficient form equals the direct formula") {
  RandomStream rng(6);
  const auto g = testing::random_graph(6, 5, rng);
  const double alpha = default_alpha(g);
  CHECK(alpha == doctest::Approx(g.total_weight()));
  const auto q = encode(g, alpha);
  for (int i = 0; i < 1000; ++i) {
    Bits b(q.num_bits());
    for (auto& x : b) x = static_cast<std::uint8_t>(rng.below(2));
    CHECK(std::abs(q.energy(b) - testing::direct_hamiltonian(g, alpha, b)) < 1e-9);
    const std::size_t k = rng.below(q.num_bits());
    Bits f = b;
    f[k] ^= 1u;
    CHECK(q.flip_delta(b, k) == doctest::Approx(q.energy(f) - q.energy(b)));
  }
}

TEST_CASE("valid paths sit at -2 alpha plus their action") {
  RandomStream rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const auto g = testing::random_graph(7, 6, rng);
    const double alpha = 1.7 * default_alpha(g);
    const auto q = encode(g, alpha);
    for (const auto& [nodes, p] : testing::boltzmann_law(g)) {
      const Bits b = encode_path(q, nodes);
      CHECK(q.energy(b) == doctest::Approx(-2.0 * alpha + g.path_action(nodes)).epsilon(1e-12));
      const auto d = decode(q, b);
      REQUIRE(std::holds_alternative<CoarsePath>(d));
      CHECK(std::get<CoarsePath>(d).nodes == nodes);
      CHECK(std::get<CoarsePath>(d).action == doctest::Approx(g.path_action(nodes)));
    }
  }
}

TEST_CASE("decode rules") {
  // s=0 - a=1 - t=2 plus a separate triangle 3,4,5
  const auto g = testing::make_graph(6, {{0, 1}, {1, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}},
                                     {0.2, 0.3, 0.5, 0.5, 0.5, 1.0}, 0, 2);
  const auto q = encode(g, default_alpha(g));
  auto eb = [&](std::size_t i, std::size_t j) { return q.edge_bit(*g.edge_index(i, j)); };

  Bits line = encode_path(q, {0, 1, 2});
  const auto ok = decode(q, line);
  REQUIRE(std::holds_alternative<CoarsePath>(ok));
  CHECK(std::get<CoarsePath>(ok).nodes == std::vector<std::size_t>{0, 1, 2});
  CHECK(std::get<CoarsePath>(ok).action == doctest::Approx(0.5));

  Bits cyc = line;
  for (std::size_t i : {3, 4, 5}) cyc[q.node_bit(i)] = 1;
  for (auto [i, j] : {EdgePair{3, 4}, EdgePair{4, 5}, EdgePair{3, 5}}) cyc[eb(i, j)] = 1;
  // The disjoint cycle costs nothing in the constraint part.
  CHECK(testing::direct_hamiltonian(g, q.alpha(), cyc) - q.alpha() * -2.0 ==
        doctest::Approx(0.5 + 1.5));
  const auto c = decode(q, cyc);
  REQUIRE(std::holds_alternative<TopologyReport>(c));
  CHECK(std::get<TopologyReport>(c).rule == TopologyRule::Cycle);

  const auto z = decode(q, Bits(q.num_bits(), 0));
  REQUIRE(std::holds_alternative<TopologyReport>(z));
  CHECK(std::get<TopologyReport>(z).rule == TopologyRule::Endpoint);

  Bits orphan_edge = line;
  orphan_edge[eb(2, 3)] = 1;  // 2-3 with node 3 inactive
  CHECK(std::get<TopologyReport>(decode(q, orphan_edge)).rule == TopologyRule::Orphan);

  Bits orphan_node = line;
  orphan_node[q.node_bit(4)] = 1;
  CHECK(std::get<TopologyReport>(decode(q, orphan_node)).rule == TopologyRule::Orphan);

  Bits degree = line;
  degree[q.node_bit(3)] = 1;
  degree[eb(2, 3)] = 1;  // t now has degree 2
  CHECK(std::get<TopologyReport>(decode(q, degree)).rule == TopologyRule::Degree);

  CHECK_THROWS_AS(decode(q, Bits(3, 0)), PreconditionError);
  CHECK(to_string(TopologyRule::Cycle) != to_string(TopologyRule::Degree));
}

TEST_CASE("encode_path rejects non-edges") {
  const auto g = testing::line_graph();
  const auto q = encode(g, 1.0);
  CHECK_THROWS_AS(encode_path(q, {0, 2}), PreconditionError);
  CHECK_THROWS_AS(encode_path(q, {0, 7}), PreconditionError);
}

TEST_CASE("brute force agrees with an independent exhaustive search") {
  RandomStream rng(10);
  for (int trial = 0; trial < 6; ++trial) {
    const auto g = testing::random_graph(4 + rng.below(2), 2, rng);
    if (g.node_count() + g.edge_count() > 14) continue;
    const double alpha = default_alpha(g);
    const auto q = encode(g, alpha);
    const auto ground = brute_force_ground(q);
    CHECK(ground.bits == oracle_ground(g, alpha));
    CHECK(ground.energy == doctest::Approx(q.energy(ground.bits)));
  }
}

TEST_CASE("triangle ground state takes the detour") {
  const auto g = testing::make_graph(3, {{0, 1}, {0, 2}, {1, 2}}, {5.0, 1.0, 1.0}, 0, 1);
  const auto ground = brute_force_ground(encode(g, default_alpha(g)));
  REQUIRE(ground.path.has_value());
  CHECK(ground.path->nodes == std::vector<std::size_t>{0, 2, 1});
  CHECK(ground.path->nodes == dijkstra(g).nodes);
}

TEST_CASE("zero constraint weight gives the empty assignment") {
  const auto g = testing::six_node_fixture();
  const auto ground = brute_force_ground(encode(g, 0.0));
  CHECK(ground.bits == Bits(ground.bits.size(), 0));
  CHECK(ground.energy == 0.0);
  CHECK_FALSE(ground.path.has_value());
  CHECK_THROWS_AS(encode(g, -1.0), PreconditionError);
}

TEST_CASE("brute force refuses large problems") {
  RandomStream rng(1);
  const auto g = testing::random_graph(9, 20, rng);
  REQUIRE(g.node_count() + g.edge_count() > kMaxBruteForceBits);
  CHECK_THROWS_AS(brute_force_ground(encode(g, 1.0)), PreconditionError);
}

TEST_CASE("low-energy assignments decode to paths when alpha exceeds the total weight") {
  RandomStream rng(14);
  for (int trial = 0; trial < 4; ++trial) {
    const auto g = testing::random_graph(5, 2, rng);
    const std::size_t n = g.node_count() + g.edge_count();
    if (n > 14) continue;
    const double alpha = 1.01 * g.total_weight();
    const auto q = encode(g, alpha);
    const double smin = dijkstra(g).action;
    // Any disjoint cycle adds at least three edges; other defects cost alpha.
    double wmin = 1.0;
    for (const auto& e : g.edges()) wmin = std::min(wmin, e.w_renorm);
    const double gap = 3.0 * wmin;
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
      const Bits b = bits_of(code, n);
      if (q.energy(b) < -2.0 * alpha + smin + gap) {
        CHECK(std::holds_alternative<CoarsePath>(decode(q, b)));
      }
    }
  }
}

TEST_CASE("enumerate_paths") {
  const auto line = enumerate_paths(testing::line_graph(), 3);
  CHECK(line.paths.size() == 1);
  CHECK(line.probabilities[0] == doctest::Approx(1.0));

  const auto sq = enumerate_paths(testing::two_path_square(), 4);
  REQUIRE(sq.paths.size() == 2);
  const auto a = sq.find({0, 1, 3});
  const auto b = sq.find({0, 2, 3});
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  const double z = std::exp(-1.0) + std::exp(-1.5);
  CHECK(sq.probabilities[*a] == doctest::Approx(std::exp(-1.0) / z));
  CHECK(sq.probabilities[*b] == doctest::Approx(std::exp(-1.5) / z));
  CHECK_FALSE(sq.find({0, 3}).has_value());

  // max_len counts nodes
  CHECK(enumerate_paths(testing::six_node_fixture(), 2).paths.empty());
}

TEST_CASE("path counts agree with a subset dynamic program") {
  RandomStream rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const auto g = testing::random_graph(8, 8 + rng.below(8), rng);
    const auto ens = enumerate_paths(g, 8);
    CHECK(ens.paths.size() == testing::count_paths_subset_dp(g));
    double total = 0.0;
    for (double p : ens.probabilities) total += p;
    CHECK(total == doctest::Approx(1.0));
  }
}

TEST_CASE("enumeration refuses large graphs") {
  RandomStream rng(2);
  const auto g = testing::random_graph(13, 3, rng);
  CHECK_THROWS_AS(enumerate_paths(g, 13), PreconditionError);
}

TEST_CASE("problem construction is validated") {
  CHECK_THROWS_AS(QuboProblem(2, {{0, 1}}, {1.0}, {0, 0}, {}, 0.0, 1.0, 0, 1), PreconditionError);
  CHECK_THROWS_AS(QuboProblem(2, {{0, 1}}, {1.0}, {0, 0, 0}, {{{1, 0}, 1.0}}, 0.0, 1.0, 0, 1), PreconditionError);
  CHECK_THROWS_AS(QuboProblem(2, {{0, 1}}, {}, {0, 0, 0}, {}, 0.0, 1.0, 0, 1), PreconditionError);
  const QuboProblem ok(2, {{0, 1}}, {1.0}, {0, 0, 1}, {{{0, 2}, -2.0}}, 0.5, 1.0, 0, 1);
  CHECK(ok.energy(Bits{1, 0, 1}) == doctest::Approx(-0.5));
}
