#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "psma/costmodel.hpp"
#include "psma/taxonomy.hpp"
#include "psma/workload.hpp"

namespace psma {

/// Exact 2b x 2b product of the L1 multiplier.
constexpr std::uint8_t l1_multiply(std::uint8_t a, std::uint8_t w) {
  return static_cast<std::uint8_t>((a & 3u) * (w & 3u));
}

struct ArrayGeometry {
  static constexpr int levels = 4;
  static constexpr int fan = kFan;
  static constexpr int children = kUnitsPerLevel;
  static constexpr int total_l1 = kTotalL1;
};

/// Raised when a value reaches 2^(declared width) of its node or register.
class OverflowError : public Error {
 public:
  OverflowError(NodeClass node, Accum value, int width);

  NodeClass node() const { return node_; }
  Accum value() const { return value_; }
  int width() const { return width_; }

 private:
  NodeClass node_;
  Accum value_;
  int width_;
};

/// Raised when a strict elaboration cannot fill the spatial mapping.
class WorkloadTooSmall : public Error {
 public:
  using Error::Error;
};

enum class FillPolicy {
  Strict,  // every spatial loop must fit inside the workload
  Pad,     // units mapped past the workload edge idle
};

struct ElaborateOptions {
  HsOrientation hs = HsOrientation::BroadcastActivations;
  FillPolicy fill = FillPolicy::Strict;
};

/// Routing and significance of one L1 unit for one mapping step.
///
/// Offsets are relative to the current tile. The unit multiplies bit group
/// act_bg of act[ws][os] with bit group w_bg of w[is][os]; for bit-serial
/// designs the bit groups advance with the cycle counter and are -1 here.
struct UnitAssignment {
  std::int32_t is_offset = 0;
  std::int32_t ws_offset = 0;
  std::int32_t os_offset = 0;
  std::int32_t act_operand_index = 0;  // ws_offset * os_spatial + os_offset
  std::int32_t w_operand_index = 0;    // is_offset * os_spatial + os_offset
  std::int32_t output_group = 0;       // is_offset * ws_spatial + ws_offset
  std::int8_t act_bg_index = -1;
  std::int8_t w_bg_index = -1;
  bool gated = false;

  int shift() const { return act_bg_index < 0 ? 0 : kBgBits * (act_bg_index + w_bg_index); }
};

/// Loop extents covered by one tile.
struct SpatialFactors {
  std::int64_t is = 1;
  std::int64_t ws = 1;
  std::int64_t os = 1;
  // SWU designs without L2 sharing rotate the weight sub-word pairing over
  // this many steps so every (is, ws) pair of the tile is visited.
  int rotation_steps = 1;
};

/// Per-level reduction structure with declared (worst-case) widths.
struct ReductionTree {
  Level shift_level = Level::L2;  // where bit-group shifts are applied (spatial BG)
  bool bit_serial = false;
  NodeWidths widths;
  int l2_nodes = 0;  // per mapping step
  int l3_nodes = 0;
  int l4_nodes = 0;
};

/// Two-stage shift-add registers of bit-serial designs, one pair per L2 unit.
struct BsState {
  std::vector<Accum> stage1;
  std::vector<Accum> stage2;
  int act_phase = 0;  // activation bit group in flight
  int w_phase = 0;    // weight bit group in flight
};

struct ArrayInstance {
  ArrayGeometry geometry;
  ArchConfig config;
  Precision precision;
  ElaborateOptions options;
  SpatialFactors spatial;
  // steps[s][u]: assignment of L1 unit u (L4-major, then L3, then L2
  // position, each position v * 4 + h) during rotation step s.
  std::vector<std::vector<UnitAssignment>> steps;
  ReductionTree reduction_tree;
  RegisterLayout registers;
  BsState bs_state;
};

ArrayInstance elaborate(const ArchConfig& c, const Precision& p, const Workload& w,
                        const ElaborateOptions& options = {});

/// Active L1 positions inside one L2 of an SWU design, indexed v * 4 + h.
std::array<bool, kUnitsPerLevel> swu_gating_mask(const Precision& p);

/// Counts measured on one full mapping step.
struct MappingStats {
  std::int64_t active_units = 0;
  std::int64_t act_words = 0;  // distinct activation operands
  std::int64_t w_words = 0;    // distinct weight operands
  std::int64_t output_groups = 0;
  std::int64_t l2_nodes = 0;
  std::int64_t l3_nodes = 0;
};

MappingStats mapping_stats(const ArrayInstance& inst, int step = 0);

struct SimOptions {
  std::int64_t max_cycles = 0;   // 0 runs to completion
  std::ostream* trace = nullptr;  // JSON lines, one per cycle
  bool disable_shifts = false;    // mutation hook for tests
};

struct Activity {
  std::int64_t adder_invocations = 0;
  std::int64_t register_write_bits = 0;
  std::int64_t shifter_invocations = 0;
};

struct SimResult {
  std::vector<Accum> outputs;  // [is][ws], same layout as golden_outputs
  bool completed = false;
  std::int64_t cycles = 0;
  std::int64_t l1_ops = 0;
  double paper_ops = 0;
  double utilization = 0;
  double act_bits_per_cycle = 0;
  double w_bits_per_cycle = 0;
  double out_bits_per_cycle = 0;
  Activity activity;
  NodeMaxima max_values;   // observed maxima per node class
  Accum psum_max = 0;      // off-array partial-sum buffer, unbounded width
};

/// Runs the elaborated array over the workload, cycle by cycle.
/// Throws OverflowError when any node reaches its declared width.
SimResult simulate(ArrayInstance& inst, const Workload& w, const SimOptions& options = {});

/// elaborate + simulate with padding allowed.
SimResult run_design(const ArchConfig& c, const Workload& w, const SimOptions& options = {},
                     HsOrientation hs = HsOrientation::BroadcastActivations);

}  // namespace psma
