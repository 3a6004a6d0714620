#include <doctest.h>

#include <set>
#include <sstream>

#include <json.hpp>

#include "psma/simulator.hpp"

using namespace psma;

namespace {

ArchConfig id(const char* s) { return parse_design_id(s); }

SimResult run_checked(const ArchConfig& c, const Workload& w, const SimOptions& o = {}) {
  SimResult r = run_design(c, w, o);
  CHECK(r.completed);
  CHECK(r.outputs == golden_outputs(w));
  return r;
}

}  // namespace

TEST_CASE("l1 multiplier is exact") {
  for (unsigned a = 0; a < 4; ++a)
    for (unsigned b = 0; b < 4; ++b) CHECK(l1_multiply(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)) == a * b);
  static_assert(l1_multiply(3, 3) == 9);
}

TEST_CASE("swu gating mask keeps the diagonal blocks") {
  const auto count = [](const std::array<bool, 16>& m) {
    int n = 0;
    for (bool b : m) n += b ? 1 : 0;
    return n;
  };
  CHECK(count(swu_gating_mask({8, 8})) == 16);
  CHECK(count(swu_gating_mask({4, 4})) == 8);
  CHECK(count(swu_gating_mask({2, 2})) == 4);
  const auto m = swu_gating_mask({2, 2});
  for (int v = 0; v < 4; ++v)
    for (int h = 0; h < 4; ++h) CHECK(m[static_cast<std::size_t>(v * 4 + h)] == (h == v));
  CHECK_THROWS(swu_gating_mask({8, 4}));
}

TEST_CASE("elaborate BitFusion at 8x8 and 2x2") {
  const ArchConfig c = sota_preset("BitFusion");
  {
    const Workload w = make_random_workload(64, 64, 256, {8, 8}, 1);
    const ArrayInstance inst = elaborate(c, {8, 8}, w);
    CHECK(inst.spatial.is == 4);
    CHECK(inst.spatial.ws == 4);
    CHECK(inst.spatial.os == 16);
    CHECK(mapping_stats(inst).active_units == 4096);
  }
  {
    const Workload w = make_random_workload(64, 64, 4096, {2, 2}, 1);
    const ArrayInstance inst = elaborate(c, {2, 2}, w);
    CHECK(inst.spatial.os == 256);
    const MappingStats s = mapping_stats(inst);
    CHECK(s.output_groups == 16);
    CHECK(s.act_words == 4 * 256);
    CHECK(s.w_words == 4 * 256);
  }
}

TEST_CASE("strict elaboration names the deficient category") {
  const Workload w = make_random_workload(64, 64, 256, {2, 2}, 1);
  try {
    elaborate(id("OS-OS/FU-L2-OS"), {2, 2}, w);
    FAIL("expected WorkloadTooSmall");
  } catch (const WorkloadTooSmall& e) {
    const std::string msg = e.what();
    CHECK(msg.find("os_size") != std::string::npos);
    CHECK(msg.find("is_size") == std::string::npos);
  }
  CHECK_NOTHROW(elaborate(id("OS-OS/FU-L2-OS"), {2, 2}, w, {HsOrientation::BroadcastActivations, FillPolicy::Pad}));
}

TEST_CASE("elaborate rejects unsupported precisions and invalid configs") {
  const Workload w = make_random_workload(64, 64, 256, {8, 4}, 1);
  CHECK_THROWS(elaborate(sota_preset("ST"), {8, 4}, w));
  ArchConfig bad = id("IS-OS/FU-L3-OS");
  bad.l2 = LevelSharing::IS;
  CHECK_THROWS(elaborate(bad, {8, 4}, w));
}

TEST_CASE("no duplicate work inside an output group") {
  for (const auto& c : enumerate_design_space()) {
    const Precision p = lowest_precision(c);
    const Workload w = make_random_workload(64, 64, 64, p, 1);
    const ArrayInstance inst = elaborate(c, p, w, {HsOrientation::BroadcastActivations, FillPolicy::Pad});
    for (const auto& step : inst.steps) {
      std::set<std::tuple<int, int, int, int, int, int>> seen;
      for (const auto& a : step) {
        if (a.gated) continue;
        CHECK(seen.insert({a.output_group, a.is_offset, a.ws_offset, a.os_offset, a.act_bg_index, a.w_bg_index}).second);
      }
    }
  }
}

TEST_CASE("BG at L3 keeps one significance per L2") {
  for (const auto& c : enumerate_design_space()) {
    if (c.bg != BgPlacement::AtL3) continue;
    for (const auto& p : supported_precisions(c)) {
      const Workload w = make_random_workload(64, 64, 64, p, 1);
      const ArrayInstance inst = elaborate(c, p, w, {HsOrientation::BroadcastActivations, FillPolicy::Pad});
      for (int l2 = 0; l2 < 256; ++l2) {
        const int s = inst.steps[0][static_cast<std::size_t>(l2 * 16)].shift();
        for (int u = 0; u < 16; ++u) CHECK(inst.steps[0][static_cast<std::size_t>(l2 * 16 + u)].shift() == s);
      }
    }
  }
}

TEST_CASE("oracle on ragged workloads") {
  for (const char* d : {"IS-OS/FU-L2-OS", "HS-OS/FU-L3-HS", "OS-IS/FU-BS-L2-OS", "IS-IS/SWU-L2-IS",
                        "OS-HS/SWU-L2-OS", "HS-HS/FU-L2-IS"}) {
    const ArchConfig c = id(d);
    for (const auto& p : supported_precisions(c)) {
      CAPTURE(d);
      CAPTURE(to_string(p));
      run_checked(c, make_random_workload(5, 7, 33, p, 4));
    }
  }
}

TEST_CASE("both HS orientations match the golden") {
  const ArchConfig c = id("HS-HS/FU-L2-HS");
  for (auto hs : {HsOrientation::BroadcastActivations, HsOrientation::BroadcastWeights}) {
    const Workload w = make_random_workload(20, 20, 70, {4, 2}, 2);
    CHECK(run_design(c, w, {}, hs).outputs == golden_outputs(w));
  }
}

TEST_CASE("SWU without sharing visits every pair through rotation") {
  const ArchConfig c = sota_preset("Envision");
  const Workload w = make_random_workload(64, 64, 16, {2, 2}, 9);
  const ArrayInstance inst = elaborate(c, {2, 2}, w, {HsOrientation::BroadcastActivations, FillPolicy::Pad});
  CHECK(inst.spatial.rotation_steps == 4);
  run_checked(c, w);
}

TEST_CASE("bit-serial cycles per tile scale with n_a * n_w") {
  const ArchConfig c = sota_preset("Loom");
  const Workload w8 = make_random_workload(16, 16, 16, {8, 8}, 1);
  const ArrayInstance inst = elaborate(c, {8, 8}, w8, {HsOrientation::BroadcastActivations, FillPolicy::Pad});
  const std::int64_t tiles = ((16 + inst.spatial.is - 1) / inst.spatial.is) *
                             ((16 + inst.spatial.ws - 1) / inst.spatial.ws) *
                             ((16 + inst.spatial.os - 1) / inst.spatial.os);
  for (const auto& p : supported_precisions(c)) {
    const auto r = run_checked(c, make_random_workload(16, 16, 16, p, 1));
    const BgDims bg = bg_loop_dims(p);
    CHECK(r.cycles == tiles * bg.n_a * bg.n_w);
  }
}

TEST_CASE("observed maxima stay below declared widths") {
  for (const char* d : {"OS-OS/FU-L2-OS", "IS-OS/FU-L3-OS", "IS-IS/FU-BS-L2-OS", "OS-OS/SWU-L2-OS"}) {
    const ArchConfig c = id(d);
    const NodeWidths wd = node_widths(c);
    for (const auto& p : supported_precisions(c)) {
      const auto r = run_checked(c, make_max_workload(16, 16, 4096, p));
      for (NodeClass n : kNodeClasses) CHECK(bits_for(r.max_values.of(n)) <= wd.of(n));
    }
  }
}

TEST_CASE("narrowing a width by one bit overflows") {
  const ArchConfig c = sota_preset("BitFusion");
  const Precision p = worst_case_precision(c, NodeClass::L3Node);
  const Workload w = make_max_workload(64, 64, 64, p);
  ArrayInstance inst = elaborate(c, p, w, {HsOrientation::BroadcastActivations, FillPolicy::Pad});
  inst.reduction_tree.widths.l3_node -= 1;
  try {
    simulate(inst, w);
    FAIL("expected OverflowError");
  } catch (const OverflowError& e) {
    CHECK(e.node() == NodeClass::L3Node);
    CHECK(e.value() >= (Accum{1} << e.width()));
  }
}

TEST_CASE("disabling shifts breaks the oracle") {
  for (const char* d : {"IS-OS/FU-L2-OS", "IS-OS/FU-L3-OS", "IS-IS/FU-BS-L2-OS", "IS-OS/SWU-L2-OS"}) {
    const ArchConfig c = id(d);
    const Workload w = make_random_workload(8, 8, 64, {8, 8}, 5);
    SimOptions o;
    o.disable_shifts = true;
    CHECK(run_design(c, w, o).outputs != golden_outputs(w));
  }
}

TEST_CASE("cycle cap and trace") {
  const ArchConfig c = sota_preset("Stripes");
  const Workload w = make_random_workload(64, 64, 256, {8, 4}, 1);
  std::ostringstream trace;
  SimOptions o;
  o.max_cycles = 40;
  o.trace = &trace;
  const SimResult r = run_design(c, w, o);
  CHECK_FALSE(r.completed);
  CHECK(r.cycles <= 40);
  std::istringstream lines(trace.str());
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("cycle") == n);
    CHECK(j.contains("phase"));
    CHECK(j.contains("active_l1"));
    CHECK(j.contains("register_writes"));
    ++n;
  }
  CHECK(n == r.cycles);
}

TEST_CASE("utilization and measured bandwidth") {
  const ArchConfig st = sota_preset("ST");
  SimOptions o;
  o.max_cycles = 256;
  const double expect[] = {1.0, 0.5, 0.25};
  int i = 0;
  double act_bw = -1;
  for (const auto& p : supported_precisions(st)) {
    const SimResult r = run_design(st, make_ideal_workload(p, 1), o);
    CHECK(r.utilization == expect[i++]);
    if (act_bw < 0) act_bw = r.act_bits_per_cycle;
    CHECK(r.act_bits_per_cycle == act_bw);
  }
}

TEST_CASE("workload precision must match") {
  const ArchConfig c = sota_preset("BitFusion");
  const Workload w = make_random_workload(64, 64, 64, {8, 8}, 1);
  ArrayInstance inst = elaborate(c, {8, 8}, w);
  const Workload other = make_random_workload(64, 64, 64, {4, 4}, 1);
  CHECK_THROWS(simulate(inst, other));
}
