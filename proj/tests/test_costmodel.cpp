#include <doctest.h>

#include <vector>

#include "psma/costmodel.hpp"

using namespace psma;

namespace {

ArchConfig id(const char* s) { return parse_design_id(s); }

bool dominated(const Precision& lo, const Precision& hi) {
  return lo.act_bits <= hi.act_bits && lo.w_bits <= hi.w_bits;
}

}  // namespace

TEST_CASE("bits_for") {
  CHECK(bits_for(0) == 0);
  CHECK(bits_for(1) == 1);
  CHECK(bits_for(9) == 4);
  CHECK(bits_for(144) == 8);
  CHECK(bits_for(255) == 8);
  CHECK(bits_for(256) == 9);
  CHECK(bits_for(65025) == 16);
  CHECK(bits_for(1040400) == 20);
}

TEST_CASE("width_of examples") {
  std::vector<NodeInput> sixteen(16, NodeInput{9, 0});
  CHECK(width_of(sixteen) == 8);

  std::vector<NodeInput> product;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) product.push_back({9, 2 * (i + j)});
  CHECK(width_of(product) == 16);

  std::vector<NodeInput> l3(16, NodeInput{65025, 0});
  CHECK(width_of(l3) == 20);
}

TEST_CASE("BitFusion-like maxima follow the worked widths") {
  const ArchConfig c = sota_preset("BitFusion");
  const NodeMaxima m = node_maxima(c, {8, 8});
  CHECK(m.l1_product == 9);
  CHECK(m.l2_node == 65025);
  CHECK(m.l3_node == 1040400);
  CHECK(bits_for(m.l3_node) == 20);
  CHECK(m.out_register == m.l4_node << 4);
}

TEST_CASE("declared output width is the worst case plus four") {
  for (const auto& c : enumerate_design_space()) {
    int worst = 0;
    for (const auto& p : supported_precisions(c)) worst = std::max(worst, bits_for(node_maxima(c, p).l4_node));
    const NodeWidths w = node_widths(c);
    CHECK(w.out_register == worst + kAccumulationHeadroomBits);
    CHECK(register_layout(c).out_word_bits == w.out_register);
  }
}

TEST_CASE("input words are 8 bits") {
  for (const auto& c : enumerate_design_space()) {
    const auto l = register_layout(c);
    CHECK(l.act_word_bits == 8);
    CHECK(l.w_word_bits == 8);
  }
}

TEST_CASE("bit-serial internal registers") {
  int bs = 0;
  for (const auto& c : enumerate_design_space()) {
    const auto l = register_layout(c);
    if (c.bg == BgPlacement::BsL2) {
      ++bs;
      CHECK(l.bs_internal_regs == 256);
      CHECK(l.bs_internal_bits == 14);
      CHECK(l.bs_stage2_bits > 14);
    } else {
      CHECK(l.bs_internal_regs == 0);
      CHECK(l.bs_internal_bits == 0);
    }
  }
  CHECK(bs == 9);
}

TEST_CASE("extreme output word counts at 2x2") {
  CHECK(register_layout(id("OS-OS/FU-L2-OS")).out_words == 1);
  CHECK(words_at(id("OS-OS/FU-L2-OS"), {2, 2}, Level::L4).out == 1);
  CHECK(register_layout(id("IS-IS/FU-L2-IS")).out_words == 4096);
  CHECK(words_at(id("IS-IS/FU-L2-IS"), {2, 2}, Level::L4).out == 4096);
}

TEST_CASE("DNPU-like L2 at 2x2") {
  const WordCounts w = words_at(id("IS-OS/FU-L2-IS"), {2, 2}, Level::L2);
  CHECK(w.out == 16);
  CHECK(w.act == 4);
  CHECK(w.w == 4);
}

TEST_CASE("HS orientation swaps the operand factors") {
  const ArchConfig c = id("HS-HS/FU-L2-HS");
  const WordCounts a = words_at(c, {2, 2}, Level::L2, HsOrientation::BroadcastActivations);
  const WordCounts b = words_at(c, {2, 2}, Level::L2, HsOrientation::BroadcastWeights);
  CHECK(a.act == 4);
  CHECK(a.w == 16);
  CHECK(a.out == 4);
  CHECK(b.act == 16);
  CHECK(b.w == 4);
  CHECK(b.out == 4);
}

TEST_CASE("BitFusion-like act bits per L2 scale 2x and 4x") {
  const ArchConfig c = sota_preset("BitFusion");
  const auto bits = [&](Precision p) { return words_at(c, p, Level::L2).act * p.act_bits; };
  CHECK(bits({8, 8}) == 8);
  CHECK(bits({4, 4}) == 16);
  CHECK(bits({2, 2}) == 32);
}

TEST_CASE("SWU bandwidth is fixed") {
  for (const auto& c : enumerate_design_space()) {
    if (c.config != UnrollConfig::SWU) continue;
    const auto ref = io_bandwidth(c, {8, 8});
    for (const auto& p : supported_precisions(c)) {
      const auto r = io_bandwidth(c, p);
      CHECK(r.act_bits_per_cycle == ref.act_bits_per_cycle);
      CHECK(r.w_bits_per_cycle == ref.w_bits_per_cycle);
    }
  }
}

TEST_CASE("throughput") {
  for (const auto& c : enumerate_design_space()) {
    for (const auto& p : supported_precisions(c)) {
      const Throughput t = throughput(c, p);
      if (c.config == UnrollConfig::FU) {
        CHECK(t.utilization == 1.0);
        CHECK(t.l1_ops_per_cycle == 4096);
      } else {
        const double expect = p.act_bits == 8 ? 1.0 : p.act_bits == 4 ? 0.5 : 0.25;
        CHECK(t.utilization == expect);
      }
    }
  }
  CHECK(active_l1_per_l2(sota_preset("ST"), {4, 4}) == 8);
  CHECK(throughput(sota_preset("BitFusion"), {8, 8}).paper_ops_per_cycle == 512);
}

TEST_CASE("monotonicity in precision") {
  for (const auto& c : enumerate_design_space()) {
    const auto ps = supported_precisions(c);
    for (const auto& hi : ps) {
      for (const auto& lo : ps) {
        if (!dominated(lo, hi)) continue;
        const WordCounts a = words_at(c, hi, Level::L4);
        const WordCounts b = words_at(c, lo, Level::L4);
        if (c.config == UnrollConfig::FU) {
          CHECK(b.act >= a.act);
          CHECK(b.w >= a.w);
        } else {
          CHECK(active_l1_per_l2(c, lo) <= active_l1_per_l2(c, hi));
        }
      }
    }
  }
}

TEST_CASE("shifter trees") {
  const auto l2 = structural_counts(id("IS-OS/FU-L2-OS"));
  const auto l3 = structural_counts(id("IS-OS/FU-L3-OS"));
  const auto bs = structural_counts(id("IS-IS/FU-BS-L2-OS"));
  CHECK(l2.shifter_trees == 256);
  CHECK(l3.shifter_trees == 16);
  CHECK(l3.shifter_trees * 256 == l2.shifter_trees * 16);
  CHECK(bs.shifter_trees == 0);
  CHECK(bs.configurable_shifter_trees == 0);
  CHECK(structural_counts(id("IS-OS/SWU-L2-OS")).configurable_shifter_trees == 0);
}

TEST_CASE("IS at L3 and L4 needs no upper adder trees") {
  for (const auto& c : enumerate_design_space()) {
    if (c.l4 != LevelSharing::IS || c.l3 != LevelSharing::IS) continue;
    // BG unrolled at L3 still merges significances there.
    if (c.bg == BgPlacement::AtL3) {
      CHECK(structural_counts(c).adder_nodes[1] > 0);
      continue;
    }
    const auto s = structural_counts(c);
    CHECK(s.adder_nodes[1] == 0);
    CHECK(s.adder_nodes[2] == 0);
  }
}

TEST_CASE("register total bits") {
  const auto l = register_layout(sota_preset("Loom"));
  CHECK(l.total_bits() == l.act_words * 8 + l.w_words * 8 + l.out_words * l.out_word_bits +
                              256 * 14 + 256 * l.bs_stage2_bits);
  CHECK(structural_counts(sota_preset("Loom")).total_register_bits == l.total_bits());
}

TEST_CASE("cost report serialization") {
  for (const auto& c : enumerate_design_space()) {
    const CostReport r = cost_report(c);
    CHECK(r.per_precision.size() == supported_precisions(c).size());
    const auto header = cost_csv_header();
    for (const auto& row : cost_csv_rows(r)) CHECK(row.size() == header.size());
    const auto j = to_json(r);
    CHECK(j.at("design_id") == design_id(c));
  }
}

TEST_CASE("worst-case precision reaches the declared width") {
  for (const auto& c : enumerate_design_space()) {
    const NodeWidths w = node_widths(c);
    for (NodeClass n : kNodeClasses) {
      if (!node_class_present(c, n)) continue;
      const Precision p = worst_case_precision(c, n);
      CHECK(bits_for(node_maxima(c, p).of(n)) == w.of(n));
    }
  }
}
