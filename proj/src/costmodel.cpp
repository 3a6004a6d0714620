#include "psma/costmodel.hpp"

#include <algorithm>
#include <bit>

#include "format.hpp"

namespace psma {

namespace {

// Operand, output and merge factors contributed by one level.
// merge counts how many child outputs one output of this level sums through OS.
struct LevelFactors {
  std::int64_t act = 1;
  std::int64_t w = 1;
  std::int64_t out = 1;
  std::int64_t merge = 1;
};

LevelSharing sharing_at(const ArchConfig& c, Level level) {
  switch (level) {
    case Level::L2: return c.l2;
    case Level::L3: return c.l3;
    case Level::L4: return c.l4;
  }
  return c.l4;
}

bool is_bg_level(const ArchConfig& c, Level level) {
  return (c.bg == BgPlacement::AtL2 && level == Level::L2) ||
         (c.bg == BgPlacement::AtL3 && level == Level::L3);
}

LevelFactors plain_factors(LevelSharing s, HsOrientation hs) {
  switch (s) {
    case LevelSharing::IS: return {4, 4, 16, 1};
    case LevelSharing::HS:
      return hs == HsOrientation::BroadcastActivations ? LevelFactors{4, 16, 4, 4}
                                                       : LevelFactors{16, 4, 4, 4};
    case LevelSharing::OS: return {16, 16, 1, 16};
  }
  return {};
}

// Bit groups occupy n_a columns and n_w rows; the residual 4/n_a x 4/n_w
// positions follow the level's sharing. SWU keeps only the diagonal residuals.
LevelFactors bg_level_factors(const ArchConfig& c, LevelSharing s, HsOrientation hs,
                              const BgDims& bg) {
  const std::int64_t eh = kFan / bg.n_a;
  const std::int64_t ev = kFan / bg.n_w;
  if (c.config == UnrollConfig::SWU) {
    if (eh != ev) throw Error("SWU designs require symmetric precision");
    const std::int64_t e = eh;
    if (s == LevelSharing::OS) return {e, e, 1, e};
    return {e, e, e, 1};
  }
  switch (s) {
    case LevelSharing::IS: return {eh, ev, eh * ev, 1};
    case LevelSharing::HS:
      return hs == HsOrientation::BroadcastActivations ? LevelFactors{eh, eh * ev, ev, eh}
                                                       : LevelFactors{eh * ev, eh, ev, eh};
    case LevelSharing::OS: return {eh * ev, eh * ev, 1, eh * ev};
  }
  return {};
}

LevelFactors level_factors(const ArchConfig& c, const Precision& p, Level level,
                           HsOrientation hs) {
  const LevelSharing s = sharing_at(c, level);
  if (is_bg_level(c, level)) return bg_level_factors(c, s, hs, bg_loop_dims(p));
  return plain_factors(s, hs);
}

void require_supported(const ArchConfig& c, const Precision& p) {
  const auto precisions = supported_precisions(c);
  if (std::find(precisions.begin(), precisions.end(), p) == precisions.end()) {
    throw Error("precision " + to_string(p) + " is not supported by " + design_id(c) + " (" +
                to_string(c.mode) + ")");
  }
}

// Sum over the n_a x n_w bit-group grid of child << 2(i+j).
Accum bg_shift_sum(Accum child, int n_a, int n_w) {
  Accum sum = 0;
  for (int i = 0; i < n_a; ++i) {
    for (int j = 0; j < n_w; ++j) sum += child << (kBgBits * (i + j));
  }
  return sum;
}

Accum act_shift_sum(Accum child, int n_a) {
  Accum sum = 0;
  for (int i = 0; i < n_a; ++i) sum += child << (kBgBits * i);
  return sum;
}

constexpr Accum kL1Max = 3 * 3;

}  // namespace

int bits_for(Accum max_value) { return static_cast<int>(std::bit_width(max_value)); }

int width_of(std::span<const NodeInput> inputs) {
  Accum sum = 0;
  for (const NodeInput& in : inputs) sum += in.max_value << in.shift;
  return bits_for(sum);
}

WordCounts words_at(const ArchConfig& c, const Precision& p, Level level, HsOrientation hs) {
  require_supported(c, p);
  WordCounts wc{1, 1, 1};
  for (Level l : {Level::L2, Level::L3, Level::L4}) {
    const LevelFactors f = level_factors(c, p, l, hs);
    wc.act *= f.act;
    wc.w *= f.w;
    wc.out *= f.out;
    if (l == level) break;
  }
  return wc;
}

int cycles_per_step(const ArchConfig& c, const Precision& p) {
  if (c.bg != BgPlacement::BsL2) return 1;
  const BgDims bg = bg_loop_dims(p);
  return bg.n_a * bg.n_w;
}

std::string to_string(NodeClass n) {
  switch (n) {
    case NodeClass::L1Product: return "l1_product";
    case NodeClass::L2Node: return "l2_node";
    case NodeClass::L3Node: return "l3_node";
    case NodeClass::L4Node: return "l4_node";
    case NodeClass::BsStage1: return "bs_stage1";
    case NodeClass::BsStage2: return "bs_stage2";
    case NodeClass::OutRegister: return "out_register";
  }
  return "?";
}

Accum NodeMaxima::of(NodeClass n) const {
  switch (n) {
    case NodeClass::L1Product: return l1_product;
    case NodeClass::L2Node: return l2_node;
    case NodeClass::L3Node: return l3_node;
    case NodeClass::L4Node: return l4_node;
    case NodeClass::BsStage1: return bs_stage1;
    case NodeClass::BsStage2: return bs_stage2;
    case NodeClass::OutRegister: return out_register;
  }
  return 0;
}

int NodeWidths::of(NodeClass n) const { return const_cast<NodeWidths*>(this)->of(n); }

int& NodeWidths::of(NodeClass n) {
  switch (n) {
    case NodeClass::L1Product: return l1_product;
    case NodeClass::L2Node: return l2_node;
    case NodeClass::L3Node: return l3_node;
    case NodeClass::L4Node: return l4_node;
    case NodeClass::BsStage1: return bs_stage1;
    case NodeClass::BsStage2: return bs_stage2;
    case NodeClass::OutRegister: return out_register;
  }
  return out_register;
}

NodeMaxima node_maxima(const ArchConfig& c, const Precision& p, HsOrientation hs) {
  require_supported(c, p);
  const BgDims bg = bg_loop_dims(p);
  const LevelFactors f2 = level_factors(c, p, Level::L2, hs);
  const LevelFactors f3 = level_factors(c, p, Level::L3, hs);
  const LevelFactors f4 = level_factors(c, p, Level::L4, hs);

  NodeMaxima m;
  m.l1_product = kL1Max;
  switch (c.bg) {
    case BgPlacement::AtL2:
      m.l2_node = static_cast<Accum>(f2.merge) * bg_shift_sum(kL1Max, bg.n_a, bg.n_w);
      m.l3_node = m.l2_node * static_cast<Accum>(f3.merge);
      break;
    case BgPlacement::AtL3:
      m.l2_node = static_cast<Accum>(f2.merge) * kL1Max;
      m.l3_node = static_cast<Accum>(f3.merge) * bg_shift_sum(m.l2_node, bg.n_a, bg.n_w);
      break;
    case BgPlacement::BsL2:
      m.l2_node = static_cast<Accum>(f2.merge) * kL1Max;
      m.bs_stage1 = act_shift_sum(m.l2_node, bg.n_a);
      m.bs_stage2 = bg_shift_sum(m.l2_node, bg.n_a, bg.n_w);
      m.l3_node = m.bs_stage2 * static_cast<Accum>(f3.merge);
      break;
  }
  m.l4_node = m.l3_node * static_cast<Accum>(f4.merge);
  m.out_register = m.l4_node << kAccumulationHeadroomBits;
  return m;
}

bool node_class_present(const ArchConfig& c, NodeClass n) {
  if (n == NodeClass::BsStage1 || n == NodeClass::BsStage2) return c.bg == BgPlacement::BsL2;
  return true;
}

NodeWidths node_widths(const ArchConfig& c, HsOrientation hs) {
  NodeWidths w;
  for (const Precision& p : supported_precisions(c)) {
    const NodeMaxima m = node_maxima(c, p, hs);
    for (NodeClass n : kNodeClasses) {
      if (n == NodeClass::OutRegister) continue;
      w.of(n) = std::max(w.of(n), bits_for(m.of(n)));
    }
  }
  // Worst-case accumulator input plus the temporal accumulation headroom.
  w.out_register = w.l4_node + kAccumulationHeadroomBits;
  return w;
}

Precision worst_case_precision(const ArchConfig& c, NodeClass n, HsOrientation hs) {
  const NodeWidths declared = node_widths(c, hs);
  for (const Precision& p : supported_precisions(c)) {
    if (bits_for(node_maxima(c, p, hs).of(n)) == declared.of(n)) return p;
  }
  throw Error("node class " + to_string(n) + " is not present in " + design_id(c));
}

std::int64_t RegisterLayout::total_bits() const {
  return act_words * act_word_bits + w_words * w_word_bits + out_words * out_word_bits +
         static_cast<std::int64_t>(bs_internal_regs) * (bs_internal_bits + bs_stage2_bits);
}

RegisterLayout register_layout(const ArchConfig& c, HsOrientation hs) {
  const Precision low = lowest_precision(c);
  const WordCounts wc = words_at(c, low, Level::L4, hs);
  const NodeWidths widths = node_widths(c, hs);
  RegisterLayout r;
  r.act_words = wc.act;
  r.w_words = wc.w;
  r.out_words = wc.out;
  r.out_word_bits = widths.out_register;
  if (c.bg == BgPlacement::BsL2) {
    r.bs_internal_regs = kBsInternalRegs;
    r.bs_internal_bits = kBsStage1Bits;
    r.bs_stage2_bits = widths.bs_stage2;
  }
  return r;
}

BandwidthRow io_bandwidth(const ArchConfig& c, const Precision& p, HsOrientation hs) {
  const WordCounts wc = words_at(c, p, Level::L4, hs);
  const double cycles = cycles_per_step(c, p);
  const int out_bits = bits_for(node_maxima(c, p, hs).l4_node);
  BandwidthRow row;
  row.precision = p;
  row.act_bits_per_cycle = static_cast<double>(wc.act * p.act_bits) / cycles;
  row.w_bits_per_cycle = static_cast<double>(wc.w * p.w_bits) / cycles;
  row.out_bits_per_cycle = static_cast<double>(wc.out * out_bits) / cycles;
  return row;
}

int active_l1_per_l2(const ArchConfig& c, const Precision& p) {
  require_supported(c, p);
  if (c.config == UnrollConfig::FU) return kUnitsPerLevel;
  const BgDims bg = bg_loop_dims(p);
  // Each of the 4/n diagonal sub-words drives an n_a x n_w block.
  return (kFan / bg.n_a) * bg.n_a * bg.n_w;
}

Throughput throughput(const ArchConfig& c, const Precision& p) {
  const BgDims bg = bg_loop_dims(p);
  const double active = static_cast<double>(active_l1_per_l2(c, p)) * kL2Units;
  Throughput t;
  t.l1_ops_per_cycle = active;
  t.utilization = active / kTotalL1;
  t.paper_ops_per_cycle = 2.0 * active / (bg.n_a * bg.n_w);
  return t;
}

StructuralCounts structural_counts(const ArchConfig& c, HsOrientation hs) {
  StructuralCounts s;
  constexpr int kShiftersPerTree = kUnitsPerLevel;
  switch (c.bg) {
    case BgPlacement::AtL2: s.shifter_trees = kL2Units; break;
    case BgPlacement::AtL3: s.shifter_trees = kL3Units; break;
    case BgPlacement::BsL2: s.shifter_trees = 0; break;
  }
  s.configurable_shifter_trees = c.config == UnrollConfig::FU ? s.shifter_trees : 0;
  s.shifter_count = s.shifter_trees * kShiftersPerTree;

  const NodeWidths widths = node_widths(c, hs);
  const std::array<std::int64_t, 3> units{kL2Units, kL3Units, 1};
  const std::array<int, 3> level_width{widths.l2_node, widths.l3_node, widths.l4_node};
  for (const Precision& p : supported_precisions(c)) {
    std::int64_t child_outputs = active_l1_per_l2(c, p);
    for (int li = 0; li < 3; ++li) {
      const std::int64_t inputs = li == 0 ? child_outputs : kUnitsPerLevel * child_outputs;
      const std::int64_t outputs = words_at(c, p, static_cast<Level>(li), hs).out;
      s.adder_nodes[li] = std::max(s.adder_nodes[li], units[li] * (inputs - outputs));
      child_outputs = outputs;
    }
  }
  const RegisterLayout layout = register_layout(c, hs);
  for (int li = 0; li < 3; ++li) {
    s.adder_widths[li] = level_width[li];
    s.adder_node_count += s.adder_nodes[li];
    s.total_adder_input_bits += 2 * s.adder_nodes[li] * level_width[li];
  }
  s.accumulator_adders = layout.out_words;
  s.accumulator_bits = layout.out_word_bits;
  s.adder_node_count += s.accumulator_adders;
  s.total_adder_input_bits += 2 * s.accumulator_adders * s.accumulator_bits;
  s.total_register_bits = layout.total_bits();
  return s;
}

CostReport cost_report(const ArchConfig& c, HsOrientation hs) {
  CostReport r;
  r.config = c;
  r.hs = hs;
  r.layout = register_layout(c, hs);
  r.widths = node_widths(c, hs);
  r.structural = structural_counts(c, hs);
  for (const Precision& p : supported_precisions(c)) {
    PrecisionCost pc;
    pc.precision = p;
    pc.extended = is_extended_precision(c.mode, p);
    pc.words = words_at(c, p, Level::L4, hs);
    pc.bandwidth = io_bandwidth(c, p, hs);
    pc.throughput = throughput(c, p);
    pc.l4_output_bits = bits_for(node_maxima(c, p, hs).l4_node);
    r.per_precision.push_back(pc);
  }
  return r;
}

nlohmann::json to_json(const CostReport& r) {
  nlohmann::json j;
  j["design_id"] = design_id(r.config);
  j["config"] = config_to_json(r.config);
  j["hs_orientation"] = to_string(r.hs);
  j["layout"] = {{"act_words", r.layout.act_words},
                 {"act_word_bits", r.layout.act_word_bits},
                 {"w_words", r.layout.w_words},
                 {"w_word_bits", r.layout.w_word_bits},
                 {"out_words", r.layout.out_words},
                 {"out_word_bits", r.layout.out_word_bits},
                 {"bs_internal_regs", r.layout.bs_internal_regs},
                 {"bs_internal_bits", r.layout.bs_internal_bits},
                 {"bs_stage2_bits", r.layout.bs_stage2_bits},
                 {"total_bits", r.layout.total_bits()}};
  nlohmann::json widths;
  for (NodeClass n : kNodeClasses) {
    if (node_class_present(r.config, n)) widths[to_string(n)] = r.widths.of(n);
  }
  j["node_widths"] = widths;
  const StructuralCounts& s = r.structural;
  j["structural"] = {{"shifter_trees", s.shifter_trees},
                     {"configurable_shifter_trees", s.configurable_shifter_trees},
                     {"shifter_count", s.shifter_count},
                     {"adder_nodes", s.adder_nodes},
                     {"adder_widths", s.adder_widths},
                     {"accumulator_adders", s.accumulator_adders},
                     {"accumulator_bits", s.accumulator_bits},
                     {"adder_node_count", s.adder_node_count},
                     {"total_adder_input_bits", s.total_adder_input_bits},
                     {"total_register_bits", s.total_register_bits}};
  nlohmann::json rows = nlohmann::json::array();
  for (const PrecisionCost& pc : r.per_precision) {
    rows.push_back({{"precision", to_string(pc.precision)},
                    {"extended", pc.extended},
                    {"act_words", pc.words.act},
                    {"w_words", pc.words.w},
                    {"out_words", pc.words.out},
                    {"act_bits_per_cycle", pc.bandwidth.act_bits_per_cycle},
                    {"w_bits_per_cycle", pc.bandwidth.w_bits_per_cycle},
                    {"out_bits_per_cycle", pc.bandwidth.out_bits_per_cycle},
                    {"l1_ops_per_cycle", pc.throughput.l1_ops_per_cycle},
                    {"paper_ops_per_cycle", pc.throughput.paper_ops_per_cycle},
                    {"utilization", pc.throughput.utilization},
                    {"l4_output_bits", pc.l4_output_bits}});
  }
  j["precisions"] = rows;
  return j;
}

std::vector<std::string> cost_csv_header() {
  return {"design_id",        "mode",
          "precision",        "extended",
          "act_words",        "w_words",
          "out_words",        "act_bw_bits",
          "w_bw_bits",        "out_bw_bits",
          "l1_ops_per_cycle", "paper_ops_per_cycle",
          "utilization",      "out_word_bits",
          "bs_internal_regs", "bs_internal_bits",
          "shifter_trees",    "configurable_shifter_trees",
          "adder_nodes",      "adder_bits",
          "register_bits"};
}

std::vector<std::vector<std::string>> cost_csv_rows(const CostReport& r) {
  using detail::format_double;
  std::vector<std::vector<std::string>> rows;
  for (const PrecisionCost& pc : r.per_precision) {
    rows.push_back({design_id(r.config),
                    to_string(r.config.mode),
                    to_string(pc.precision),
                    pc.extended ? "1" : "0",
                    std::to_string(pc.words.act),
                    std::to_string(pc.words.w),
                    std::to_string(pc.words.out),
                    format_double(pc.bandwidth.act_bits_per_cycle),
                    format_double(pc.bandwidth.w_bits_per_cycle),
                    format_double(pc.bandwidth.out_bits_per_cycle),
                    format_double(pc.throughput.l1_ops_per_cycle),
                    format_double(pc.throughput.paper_ops_per_cycle),
                    format_double(pc.throughput.utilization),
                    std::to_string(r.layout.out_word_bits),
                    std::to_string(r.layout.bs_internal_regs),
                    std::to_string(r.layout.bs_internal_bits),
                    std::to_string(r.structural.shifter_trees),
                    std::to_string(r.structural.configurable_shifter_trees),
                    std::to_string(r.structural.adder_node_count),
                    std::to_string(r.structural.total_adder_input_bits),
                    std::to_string(r.structural.total_register_bits)});
  }
  return rows;
}

}  // namespace psma
