#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "psma/workload.hpp"

using namespace psma;

TEST_CASE("precision validity") {
  CHECK(is_valid({8, 8}));
  CHECK(is_valid({8, 2}));
  CHECK(is_valid({2, 2}));
  CHECK_FALSE(is_valid({2, 8}));
  CHECK_FALSE(is_valid({3, 3}));
  CHECK_FALSE(is_valid({16, 8}));
  CHECK_THROWS_AS(require_valid({4, 8}), Error);
}

TEST_CASE("precision parsing round trip") {
  for (int a : {2, 4, 8}) {
    for (int w : {2, 4, 8}) {
      if (w > a) continue;
      const Precision p{a, w};
      CHECK(parse_precision(to_string(p)) == p);
    }
  }
  CHECK(parse_precision("8bx4b") == Precision{8, 4});
  CHECK_THROWS(parse_precision("8"));
  CHECK_THROWS(parse_precision("2x4"));
  CHECK_THROWS(parse_precision("axb"));
}

TEST_CASE("bit-group loop dimensions") {
  CHECK(bg_loop_dims({8, 8}) == BgDims{4, 4});
  CHECK(bg_loop_dims({8, 2}) == BgDims{4, 1});
  CHECK(bg_loop_dims({4, 4}) == BgDims{2, 2});
  CHECK(bg_loop_dims({2, 2}) == BgDims{1, 1});
}

TEST_CASE("golden of a hand-computed workload") {
  // out[0][0] = 1*3 + 2*4, out[0][1] = 5*3 + 6*4
  const Workload w = make_workload(1, 2, 2, {8, 8}, {1, 2, 5, 6}, {3, 4});
  const auto out = golden_outputs(w);
  REQUIRE(out.size() == 2);
  CHECK(out[0] == 11);
  CHECK(out[1] == 39);
}

TEST_CASE("golden of the max workload") {
  const Workload w = make_max_workload(2, 3, 100, {8, 4});
  for (Accum v : golden_outputs(w)) CHECK(v == 100u * 255u * 15u);
}

TEST_CASE("make_workload rejects bad operands") {
  CHECK_THROWS(make_workload(1, 1, 2, {4, 4}, {1, 16}, {1, 1}));
  CHECK_THROWS(make_workload(1, 1, 2, {4, 4}, {1}, {1, 1}));
  CHECK_THROWS(make_workload(0, 1, 2, {4, 4}, {}, {}));
}

TEST_CASE("random workloads are deterministic and in range") {
  const Workload a = make_random_workload(4, 5, 33, {4, 2}, 7);
  const Workload b = make_random_workload(4, 5, 33, {4, 2}, 7);
  const Workload c = make_random_workload(4, 5, 33, {4, 2}, 8);
  CHECK(a.activations == b.activations);
  CHECK(a.weights == b.weights);
  CHECK(a.activations != c.activations);
  CHECK(*std::max_element(a.activations.begin(), a.activations.end()) <= 15);
  CHECK(*std::max_element(a.weights.begin(), a.weights.end()) <= 3);
}

TEST_CASE("golden is invariant under a permutation of the OS loop") {
  Workload w = make_random_workload(3, 4, 50, {8, 8}, 11);
  const auto ref = golden_outputs(w);
  std::vector<std::size_t> perm(50);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937 rng(3);
  std::shuffle(perm.begin(), perm.end(), rng);
  Workload shuffled = w;
  for (std::int64_t ws = 0; ws < w.ws_size; ++ws) {
    for (std::size_t k = 0; k < perm.size(); ++k) {
      shuffled.activations[static_cast<std::size_t>(w.act_index(ws, static_cast<std::int64_t>(k)))] =
          w.activations[static_cast<std::size_t>(w.act_index(ws, static_cast<std::int64_t>(perm[k])))];
    }
  }
  for (std::int64_t is = 0; is < w.is_size; ++is) {
    for (std::size_t k = 0; k < perm.size(); ++k) {
      shuffled.weights[static_cast<std::size_t>(w.w_index(is, static_cast<std::int64_t>(k)))] =
          w.weights[static_cast<std::size_t>(w.w_index(is, static_cast<std::int64_t>(perm[k])))];
    }
  }
  CHECK(golden_outputs(shuffled) == ref);
}

TEST_CASE("golden respects the bit bound") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Workload w = make_random_workload(2, 2, 77, {8, 2}, seed);
    const Accum bound = 77u * 255u * 3u;
    for (Accum v : golden_outputs(w)) CHECK(v <= bound);
  }
}

TEST_CASE("ideal workload sizes") {
  const Workload w = make_ideal_workload({4, 4}, 1);
  CHECK(w.is_size == 64);
  CHECK(w.ws_size == 64);
  CHECK(w.os_size == 4096);
}

TEST_CASE("workload json round trip regenerates operands") {
  const Workload w = make_random_workload(3, 2, 40, {8, 4}, 99);
  const auto j = workload_to_json(w);
  CHECK(j.at("schema_version") == kWorkloadSchemaVersion);
  CHECK_FALSE(j.contains("activations"));
  const Workload back = workload_from_json(j);
  CHECK(back.activations == w.activations);
  CHECK(back.weights == w.weights);
  CHECK(back.precision == w.precision);
  auto bad = j;
  bad["schema_version"] = 99;
  CHECK_THROWS(workload_from_json(bad));
}

TEST_CASE("rng algorithm is named") { CHECK(std::string(rng_algorithm()).find("mt19937") != std::string::npos); }
