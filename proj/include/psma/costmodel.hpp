#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "psma/taxonomy.hpp"
#include "psma/workload.hpp"

namespace psma {

/// Fixed array geometry: L4 -> 16 L3 -> 16 L2 -> 16 L1.
inline constexpr int kFan = 4;
inline constexpr int kUnitsPerLevel = kFan * kFan;
inline constexpr int kL2Units = kUnitsPerLevel * kUnitsPerLevel;
inline constexpr int kL3Units = kUnitsPerLevel;
inline constexpr int kTotalL1 = kUnitsPerLevel * kUnitsPerLevel * kUnitsPerLevel;

inline constexpr int kInputWordBits = 8;
inline constexpr int kAccumulationHeadroomBits = 4;
inline constexpr int kBsInternalRegs = kL2Units;
inline constexpr int kBsResultBits = 8;
inline constexpr int kBsHeadroomBits = 6;
inline constexpr int kBsStage1Bits = kBsResultBits + kBsHeadroomBits;

enum class Level { L2 = 0, L3 = 1, L4 = 2 };

/// ceil(log2(max_value + 1)); zero needs zero bits.
int bits_for(Accum max_value);

/// One input of a reduction node: its maximum value and the left shift applied.
struct NodeInput {
  Accum max_value = 0;
  int shift = 0;
};

/// Exact width of a node summing its shifted inputs.
int width_of(std::span<const NodeInput> inputs);

/// Operand and output words for one unit at a level, including all levels below.
struct WordCounts {
  std::int64_t act = 0;
  std::int64_t w = 0;
  std::int64_t out = 0;

  friend bool operator==(const WordCounts&, const WordCounts&) = default;
};

WordCounts words_at(const ArchConfig& c, const Precision& p, Level level,
                    HsOrientation hs = HsOrientation::BroadcastActivations);

/// Cycles one spatial mapping step takes: n_a * n_w for bit-serial, else 1.
int cycles_per_step(const ArchConfig& c, const Precision& p);

/// Reduction-tree value classes that carry a declared width.
enum class NodeClass { L1Product, L2Node, L3Node, L4Node, BsStage1, BsStage2, OutRegister };

inline constexpr std::array<NodeClass, 7> kNodeClasses{
    NodeClass::L1Product, NodeClass::L2Node,   NodeClass::L3Node,     NodeClass::L4Node,
    NodeClass::BsStage1,  NodeClass::BsStage2, NodeClass::OutRegister};

std::string to_string(NodeClass n);

/// Exact maximum each node class can reach at one precision.
/// The output register holds 2^headroom accumulations of the L4 result.
struct NodeMaxima {
  Accum l1_product = 0;
  Accum l2_node = 0;
  Accum l3_node = 0;
  Accum l4_node = 0;
  Accum bs_stage1 = 0;  // zero unless bit-serial
  Accum bs_stage2 = 0;
  Accum out_register = 0;

  Accum of(NodeClass n) const;
};

NodeMaxima node_maxima(const ArchConfig& c, const Precision& p,
                       HsOrientation hs = HsOrientation::BroadcastActivations);

/// Declared hardware widths, worst case over every precision the mode supports.
struct NodeWidths {
  int l1_product = 0;
  int l2_node = 0;
  int l3_node = 0;
  int l4_node = 0;
  int bs_stage1 = 0;
  int bs_stage2 = 0;
  int out_register = 0;

  int of(NodeClass n) const;
  int& of(NodeClass n);
};

NodeWidths node_widths(const ArchConfig& c, HsOrientation hs = HsOrientation::BroadcastActivations);

/// Supported precision at which a node class reaches its declared width.
Precision worst_case_precision(const ArchConfig& c, NodeClass n,
                               HsOrientation hs = HsOrientation::BroadcastActivations);

bool node_class_present(const ArchConfig& c, NodeClass n);

struct RegisterLayout {
  std::int64_t act_words = 0;
  int act_word_bits = kInputWordBits;
  std::int64_t w_words = 0;
  int w_word_bits = kInputWordBits;
  std::int64_t out_words = 0;
  int out_word_bits = 0;
  int bs_internal_regs = 0;
  int bs_internal_bits = 0;
  // Second stage of the two-stage BS accumulation (full L2 dot product).
  int bs_stage2_bits = 0;

  std::int64_t total_bits() const;
};

RegisterLayout register_layout(const ArchConfig& c,
                               HsOrientation hs = HsOrientation::BroadcastActivations);

/// Array-boundary traffic at one precision, in bits per cycle.
struct BandwidthRow {
  Precision precision;
  double act_bits_per_cycle = 0;
  double w_bits_per_cycle = 0;
  double out_bits_per_cycle = 0;
};

BandwidthRow io_bandwidth(const ArchConfig& c, const Precision& p,
                          HsOrientation hs = HsOrientation::BroadcastActivations);

struct Throughput {
  double l1_ops_per_cycle = 0;
  // One full multiplication or one addition counts as one op (MAC = 2 ops).
  double paper_ops_per_cycle = 0;
  double utilization = 0;
};

Throughput throughput(const ArchConfig& c, const Precision& p);

/// L1 units left active per L2 unit (SWU gating; 16 otherwise).
int active_l1_per_l2(const ArchConfig& c, const Precision& p);

struct StructuralCounts {
  int shifter_trees = 0;
  int configurable_shifter_trees = 0;
  int shifter_count = 0;
  std::array<std::int64_t, 3> adder_nodes{};  // L2, L3, L4
  std::array<int, 3> adder_widths{};
  std::int64_t accumulator_adders = 0;
  int accumulator_bits = 0;
  std::int64_t adder_node_count = 0;
  std::int64_t total_adder_input_bits = 0;
  std::int64_t total_register_bits = 0;
};

StructuralCounts structural_counts(const ArchConfig& c,
                                   HsOrientation hs = HsOrientation::BroadcastActivations);

struct PrecisionCost {
  Precision precision;
  bool extended = false;
  WordCounts words;
  BandwidthRow bandwidth;
  Throughput throughput;
  int l4_output_bits = 0;
};

struct CostReport {
  ArchConfig config;
  HsOrientation hs = HsOrientation::BroadcastActivations;
  RegisterLayout layout;
  NodeWidths widths;
  StructuralCounts structural;
  std::vector<PrecisionCost> per_precision;
};

CostReport cost_report(const ArchConfig& c, HsOrientation hs = HsOrientation::BroadcastActivations);

nlohmann::json to_json(const CostReport& r);

/// One CSV row per (config, precision).
std::vector<std::string> cost_csv_header();
std::vector<std::vector<std::string>> cost_csv_rows(const CostReport& r);

}  // namespace psma
