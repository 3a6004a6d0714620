#include "psma/simulator.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

namespace psma {

OverflowError::OverflowError(NodeClass node, Accum value, int width)
    : Error("overflow in " + to_string(node) + ": value " + std::to_string(value) +
            " does not fit in " + std::to_string(width) + " bits"),
      node_(node),
      value_(value),
      width_(width) {}

namespace {

// ---------------------------------------------------------------------------
// Level decomposition
// ---------------------------------------------------------------------------

enum class Kind { IS, WS, OS, ActBg, WBg, Gate };

struct DimFactor {
  Kind kind;
  int extent;
};

struct LevelSpec {
  std::vector<DimFactor> h;
  std::vector<DimFactor> v;
  bool swu_diagonal = false;
  LevelSharing diag_sharing = LevelSharing::OS;
  int diag_extent = 1;
};

// IS shares along both dimensions: activations vary horizontally (weights
// broadcast) and weights vary vertically (activations broadcast). HS keeps
// one broadcast dimension (vertical) and sums outputs horizontally.
Kind dim_kind(LevelSharing s, HsOrientation hs, bool horizontal) {
  switch (s) {
    case LevelSharing::IS: return horizontal ? Kind::WS : Kind::IS;
    case LevelSharing::HS:
      if (horizontal) return Kind::OS;
      return hs == HsOrientation::BroadcastActivations ? Kind::IS : Kind::WS;
    case LevelSharing::OS: return Kind::OS;
  }
  return Kind::OS;
}

LevelSpec level_spec(const ArchConfig& c, const BgDims& bg, Level level, HsOrientation hs) {
  const LevelSharing s = level == Level::L2 ? c.l2 : level == Level::L3 ? c.l3 : c.l4;
  const bool bg_here = (c.bg == BgPlacement::AtL2 && level == Level::L2) ||
                       (c.bg == BgPlacement::AtL3 && level == Level::L3);
  LevelSpec spec;
  if (!bg_here) {
    spec.h = {{dim_kind(s, hs, true), kFan}};
    spec.v = {{dim_kind(s, hs, false), kFan}};
    return spec;
  }
  // Activation bit groups along the horizontal, weight bit groups vertical.
  spec.h = {{Kind::ActBg, bg.n_a}};
  spec.v = {{Kind::WBg, bg.n_w}};
  const int eh = kFan / bg.n_a;
  const int ev = kFan / bg.n_w;
  if (c.config == UnrollConfig::SWU) {
    if (eh != ev) throw Error("SWU designs require symmetric precision");
    spec.h.push_back({Kind::Gate, eh});
    spec.v.push_back({Kind::Gate, ev});
    spec.swu_diagonal = true;
    spec.diag_sharing = s;
    spec.diag_extent = eh;
  } else {
    spec.h.push_back({dim_kind(s, hs, true), eh});
    spec.v.push_back({dim_kind(s, hs, false), ev});
  }
  return spec;
}

struct Strides {
  std::int64_t is = 1;
  std::int64_t ws = 1;
  std::int64_t os = 1;
};

struct UnitCoords {
  std::int64_t is = 0;
  std::int64_t ws = 0;
  std::int64_t os = 0;
  int act_bg = -1;
  int w_bg = -1;
  bool gated = false;
};

void apply_level(const LevelSpec& spec, int pos, int step, Strides& stride, UnitCoords& u) {
  int gate_h = 0;
  int gate_v = 0;
  const auto walk = [&](const std::vector<DimFactor>& factors, int p, bool horizontal) {
    for (const DimFactor& f : factors) {
      const int digit = p % f.extent;
      p /= f.extent;
      switch (f.kind) {
        case Kind::IS:
          u.is += digit * stride.is;
          stride.is *= f.extent;
          break;
        case Kind::WS:
          u.ws += digit * stride.ws;
          stride.ws *= f.extent;
          break;
        case Kind::OS:
          u.os += digit * stride.os;
          stride.os *= f.extent;
          break;
        case Kind::ActBg: u.act_bg = digit; break;
        case Kind::WBg: u.w_bg = digit; break;
        case Kind::Gate: (horizontal ? gate_h : gate_v) = digit; break;
      }
    }
  };
  walk(spec.h, pos % kFan, true);
  walk(spec.v, pos / kFan, false);
  if (!spec.swu_diagonal) return;

  // Sub-word unrolling keeps only the diagonal residual blocks active.
  const int e = spec.diag_extent;
  if (gate_h != gate_v) u.gated = true;
  const int k = gate_h;
  if (spec.diag_sharing == LevelSharing::OS) {
    u.os += k * stride.os;
    stride.os *= e;
  } else {
    // No sharing: block k pairs activation k with weight (k + step) mod e.
    u.ws += k * stride.ws;
    u.is += ((k + step) % e) * stride.is;
    stride.ws *= e;
    stride.is *= e;
  }
}

void check_invariants(const ArrayInstance& inst) {
  const bool at_l3 = inst.config.bg == BgPlacement::AtL3;
  for (const auto& step : inst.steps) {
    std::set<std::tuple<int, int, int, int, int, int>> seen;
    std::unordered_map<int, int> l2_shift;
    for (std::size_t u = 0; u < step.size(); ++u) {
      const UnitAssignment& a = step[u];
      if (a.gated) continue;
      if (!seen.insert({a.output_group, a.is_offset, a.ws_offset, a.os_offset, a.act_bg_index,
                        a.w_bg_index})
               .second) {
        throw Error("internal: duplicate (operand, significance) tuple in an output group");
      }
      if (at_l3) {
        const int l2 = static_cast<int>(u) / kUnitsPerLevel;
        const auto [it, inserted] = l2_shift.emplace(l2, a.shift());
        if (!inserted && it->second != a.shift()) {
          throw Error("internal: L2 unit mixes bit-group significances");
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Simulation plans: the active units of one tile shape with dense node ids
// ---------------------------------------------------------------------------

struct PlanUnit {
  std::int64_t act_off;
  std::int64_t w_off;
  std::int32_t l2;
  std::uint8_t a_shift;
  std::uint8_t w_shift;
  std::uint8_t shift;
};

struct Plan {
  std::vector<PlanUnit> units;  // grouped by L2 node
  std::vector<std::int32_t> l2_begin;  // units of node n: [l2_begin[n], l2_begin[n + 1])
  std::vector<std::int32_t> l2_parent;
  std::vector<std::uint8_t> l2_shift;
  std::vector<std::int32_t> l2_fanin;
  std::vector<std::int32_t> l2_unit;  // physical L2 unit of the node
  std::vector<std::int32_t> l3_parent;
  std::vector<std::int32_t> l3_fanin;
  std::vector<std::int32_t> l4_group;
  std::vector<std::int32_t> l4_fanin;
  std::int64_t act_words = 0;
  std::int64_t w_words = 0;
  std::int64_t tree_adds = 0;   // L2/L3/L4 adder invocations per evaluation
  std::int64_t l2_adds = 0;
  std::int64_t upper_adds = 0;  // L3 + L4
  std::int64_t unit_shifts = 0;
  std::int64_t node_shifts = 0;
};

struct TileBounds {
  std::int64_t is_limit;  // offsets < limit are inside the workload
  std::int64_t ws_limit;
  std::int64_t os_limit;
};

Plan build_plan(const ArrayInstance& inst, const std::vector<UnitAssignment>& step,
                const TileBounds& bounds, std::int64_t os_size, bool disable_shifts) {
  Plan plan;
  const std::int64_t groups = inst.spatial.is * inst.spatial.ws;
  std::unordered_map<std::int64_t, std::int32_t> l2_ids;
  std::unordered_map<std::int64_t, std::int32_t> l3_ids;
  std::unordered_map<std::int64_t, std::int32_t> l4_ids;
  std::set<std::pair<std::int64_t, std::int64_t>> acts;
  std::set<std::pair<std::int64_t, std::int64_t>> wts;
  const bool shift_at_l3 = inst.reduction_tree.shift_level == Level::L3 &&
                           !inst.reduction_tree.bit_serial;

  for (std::size_t u = 0; u < step.size(); ++u) {
    const UnitAssignment& a = step[u];
    if (a.gated) continue;
    if (a.is_offset >= bounds.is_limit || a.ws_offset >= bounds.ws_limit ||
        a.os_offset >= bounds.os_limit) {
      continue;
    }
    const std::int64_t l2_unit = static_cast<std::int64_t>(u) / kUnitsPerLevel;
    const std::int64_t l3_unit = l2_unit / kUnitsPerLevel;
    const int shift = disable_shifts ? 0 : a.shift();

    const auto [l4_it, l4_new] =
        l4_ids.emplace(a.output_group, static_cast<std::int32_t>(plan.l4_group.size()));
    if (l4_new) {
      plan.l4_group.push_back(a.output_group);
      plan.l4_fanin.push_back(0);
    }
    const auto [l3_it, l3_new] = l3_ids.emplace(l3_unit * groups + a.output_group,
                                                static_cast<std::int32_t>(plan.l3_parent.size()));
    if (l3_new) {
      plan.l3_parent.push_back(l4_it->second);
      plan.l3_fanin.push_back(0);
      ++plan.l4_fanin[l4_it->second];
    }
    const auto [l2_it, l2_new] = l2_ids.emplace(l2_unit * groups + a.output_group,
                                                static_cast<std::int32_t>(plan.l2_parent.size()));
    if (l2_new) {
      plan.l2_parent.push_back(l3_it->second);
      plan.l2_shift.push_back(static_cast<std::uint8_t>(shift_at_l3 ? shift : 0));
      plan.l2_fanin.push_back(0);
      plan.l2_unit.push_back(static_cast<std::int32_t>(l2_unit));
      ++plan.l3_fanin[l3_it->second];
      if (shift_at_l3 && shift > 0) ++plan.node_shifts;
    }
    ++plan.l2_fanin[l2_it->second];

    PlanUnit pu{};
    pu.act_off = a.ws_offset * os_size + a.os_offset;
    pu.w_off = a.is_offset * os_size + a.os_offset;
    pu.l2 = l2_it->second;
    if (!inst.reduction_tree.bit_serial) {
      pu.a_shift = static_cast<std::uint8_t>(kBgBits * a.act_bg_index);
      pu.w_shift = static_cast<std::uint8_t>(kBgBits * a.w_bg_index);
      pu.shift = static_cast<std::uint8_t>(shift_at_l3 ? 0 : shift);
      if (pu.shift > 0) ++plan.unit_shifts;
    }
    plan.units.push_back(pu);
    acts.emplace(a.ws_offset, a.os_offset);
    wts.emplace(a.is_offset, a.os_offset);
  }
  std::stable_sort(plan.units.begin(), plan.units.end(),
                   [](const PlanUnit& a, const PlanUnit& b) { return a.l2 < b.l2; });
  plan.l2_begin.assign(plan.l2_parent.size() + 1, 0);
  for (const PlanUnit& u : plan.units) ++plan.l2_begin[static_cast<std::size_t>(u.l2) + 1];
  for (std::size_t n = 1; n < plan.l2_begin.size(); ++n) plan.l2_begin[n] += plan.l2_begin[n - 1];
  plan.act_words = static_cast<std::int64_t>(acts.size());
  plan.w_words = static_cast<std::int64_t>(wts.size());
  for (auto f : plan.l2_fanin) plan.l2_adds += f - 1;
  for (auto f : plan.l3_fanin) plan.upper_adds += f - 1;
  for (auto f : plan.l4_fanin) plan.upper_adds += f - 1;
  plan.tree_adds = plan.l2_adds + plan.upper_adds;
  return plan;
}

Accum limit_for(int width) {
  if (width >= 64) return std::numeric_limits<Accum>::max();
  if (width <= 0) return 0;
  return (Accum{1} << width) - 1;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

class Runner {
 public:
  Runner(ArrayInstance& inst, const Workload& w, const SimOptions& opt)
      : inst_(inst), w_(w), opt_(opt), bg_(bg_loop_dims(inst.precision)) {
    for (NodeClass n : kNodeClasses) limits_[static_cast<int>(n)] = limit_for(widths().of(n));
    out_bits_ = bits_for(node_maxima(inst.config, inst.precision, inst.options.hs).l4_node);
  }

  SimResult run() {
    const SpatialFactors& sp = inst_.spatial;
    const std::int64_t t_is = ceil_div(w_.is_size, sp.is);
    const std::int64_t t_ws = ceil_div(w_.ws_size, sp.ws);
    const std::int64_t t_os = ceil_div(w_.os_size, sp.os);
    const std::int64_t groups = sp.is * sp.ws;
    res_.outputs.assign(static_cast<std::size_t>(w_.num_outputs()), 0);
    out_reg_.assign(static_cast<std::size_t>(groups), 0);
    acc2_.assign(kTotalL1, 0);
    acc3_.assign(kTotalL1, 0);
    acc4_.assign(kTotalL1, 0);
    inst_.bs_state.stage1.assign(kL2Units, 0);
    inst_.bs_state.stage2.assign(kL2Units, 0);

    const int tile_cycles = bit_serial() ? bg_.n_a * bg_.n_w : 1;
    bool stopped = false;
    for (std::int64_t it = 0; it < t_is && !stopped; ++it) {
      for (std::int64_t jt = 0; jt < t_ws && !stopped; ++jt) {
        for (int rot = 0; rot < sp.rotation_steps && !stopped; ++rot) {
          const std::int64_t is_base = it * sp.is;
          const std::int64_t ws_base = jt * sp.ws;
          const Plan* plan = nullptr;
          int pending = 0;
          for (std::int64_t ot = 0; ot < t_os; ++ot) {
            if (opt_.max_cycles > 0 && res_.cycles + tile_cycles > opt_.max_cycles) {
              stopped = true;
              break;
            }
            const std::int64_t os_base = ot * sp.os;
            plan = &plan_for(rot, it == t_is - 1, jt == t_ws - 1, ot == t_os - 1, is_base,
                             ws_base, os_base);
            const std::int64_t act_base = ws_base * w_.os_size + os_base;
            const std::int64_t w_base = is_base * w_.os_size + os_base;
            load_inputs(*plan);
            if (bit_serial()) {
              run_bit_serial_tile(*plan, act_base, w_base);
            } else {
              run_spatial_tile(*plan, act_base, w_base);
            }
            accumulate_outputs(*plan);
            if (++pending == (1 << kAccumulationHeadroomBits)) {
              drain(*plan, is_base, ws_base);
              pending = 0;
            }
          }
          if (plan != nullptr && pending > 0) drain(*plan, is_base, ws_base);
        }
      }
    }
    res_.completed = !stopped;
    const double cycles = static_cast<double>(std::max<std::int64_t>(res_.cycles, 1));
    res_.utilization = static_cast<double>(res_.l1_ops) / (cycles * kTotalL1);
    res_.paper_ops = 2.0 * static_cast<double>(res_.l1_ops) / (bg_.n_a * bg_.n_w);
    res_.act_bits_per_cycle = act_bits_ / cycles;
    res_.w_bits_per_cycle = w_bits_ / cycles;
    res_.out_bits_per_cycle = out_bits_total_ / cycles;
    if (res_.cycles == 0) res_.utilization = 0;
    return res_;
  }

 private:
  const NodeWidths& widths() const { return inst_.reduction_tree.widths; }
  bool bit_serial() const { return inst_.reduction_tree.bit_serial; }

  void check(NodeClass n, Accum v, Accum& max_seen) {
    if (v > limits_[static_cast<int>(n)]) throw OverflowError(n, v, widths().of(n));
    if (v > max_seen) max_seen = v;
  }

  const Plan& plan_for(int rot, bool last_is, bool last_ws, bool last_os, std::int64_t is_base,
                       std::int64_t ws_base, std::int64_t os_base) {
    const int key = rot * 8 + (last_is ? 4 : 0) + (last_ws ? 2 : 0) + (last_os ? 1 : 0);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    const SpatialFactors& sp = inst_.spatial;
    TileBounds b{sp.is, sp.ws, sp.os};
    if (last_is) b.is_limit = std::min(sp.is, w_.is_size - is_base);
    if (last_ws) b.ws_limit = std::min(sp.ws, w_.ws_size - ws_base);
    if (last_os) b.os_limit = std::min(sp.os, w_.os_size - os_base);
    return plans_
        .emplace(key, build_plan(inst_, inst_.steps[static_cast<std::size_t>(rot)], b,
                                 w_.os_size, opt_.disable_shifts))
        .first->second;
  }

  void load_inputs(const Plan& plan) {
    const std::int64_t bits = (plan.act_words + plan.w_words) * kInputWordBits;
    res_.activity.register_write_bits += bits;
    pending_writes_ += plan.act_words + plan.w_words;
    act_bits_ += static_cast<double>(plan.act_words * w_.precision.act_bits);
    w_bits_ += static_cast<double>(plan.w_words * w_.precision.w_bits);
    out_bits_total_ += static_cast<double>(plan.l4_group.size()) * out_bits_;
  }

  void multiply_into_l2(const Plan& plan, std::int64_t act_base, std::int64_t w_base,
                        int cycle_a_shift, int cycle_w_shift) {
    const Operand* act = w_.activations.data() + act_base;
    const Operand* wt = w_.weights.data() + w_base;
    const Accum l1_limit = limits_[static_cast<int>(NodeClass::L1Product)];
    Accum l1_max = res_.max_values.l1_product;
    const PlanUnit* units = plan.units.data();
    for (std::size_t n = 0; n + 1 < plan.l2_begin.size(); ++n) {
      Accum sum = 0;
      for (std::int32_t i = plan.l2_begin[n]; i < plan.l2_begin[n + 1]; ++i) {
        const PlanUnit& u = units[i];
        const Accum prod =
            l1_multiply(static_cast<std::uint8_t>(act[u.act_off] >> (u.a_shift + cycle_a_shift)),
                        static_cast<std::uint8_t>(wt[u.w_off] >> (u.w_shift + cycle_w_shift)));
        l1_max = std::max(l1_max, prod);
        sum += prod << u.shift;
      }
      acc2_[n] = sum;
    }
    if (l1_max > l1_limit) throw OverflowError(NodeClass::L1Product, l1_max, widths().l1_product);
    res_.max_values.l1_product = l1_max;
    res_.l1_ops += static_cast<std::int64_t>(plan.units.size());
  }

  void reduce_upper(const Plan& plan, const std::vector<Accum>& l2_values, bool apply_l2_shift) {
    std::fill_n(acc3_.begin(), plan.l3_parent.size(), 0);
    std::fill_n(acc4_.begin(), plan.l4_group.size(), 0);
    for (std::size_t n = 0; n < plan.l2_parent.size(); ++n) {
      const int shift = apply_l2_shift ? plan.l2_shift[n] : 0;
      acc3_[static_cast<std::size_t>(plan.l2_parent[n])] += l2_values[n] << shift;
    }
    for (std::size_t n = 0; n < plan.l3_parent.size(); ++n) {
      check(NodeClass::L3Node, acc3_[n], res_.max_values.l3_node);
      acc4_[static_cast<std::size_t>(plan.l3_parent[n])] += acc3_[n];
    }
    for (std::size_t n = 0; n < plan.l4_group.size(); ++n) {
      check(NodeClass::L4Node, acc4_[n], res_.max_values.l4_node);
    }
    res_.activity.adder_invocations += plan.upper_adds;
    res_.activity.shifter_invocations += apply_l2_shift ? plan.node_shifts : 0;
  }

  void run_spatial_tile(const Plan& plan, std::int64_t act_base, std::int64_t w_base) {
    multiply_into_l2(plan, act_base, w_base, 0, 0);
    for (std::size_t n = 0; n < plan.l2_parent.size(); ++n) {
      check(NodeClass::L2Node, acc2_[n], res_.max_values.l2_node);
    }
    res_.activity.adder_invocations += plan.l2_adds;
    res_.activity.shifter_invocations += plan.unit_shifts;
    reduce_upper(plan, acc2_, true);
    end_cycle(plan, 0, static_cast<std::int64_t>(plan.l4_group.size()));
  }

  // Weights outer: phase 1 walks the activation bit groups into the first
  // register, then its content moves into the second register (phase 2).
  // After the last weight bit group the L3/L4 trees and accumulator engage.
  void run_bit_serial_tile(const Plan& plan, std::int64_t act_base, std::int64_t w_base) {
    auto& s1 = inst_.bs_state.stage1;
    auto& s2 = inst_.bs_state.stage2;
    const std::size_t nodes = plan.l2_parent.size();
    for (std::size_t n = 0; n < nodes; ++n) {
      s1[static_cast<std::size_t>(plan.l2_unit[n])] = 0;
      s2[static_cast<std::size_t>(plan.l2_unit[n])] = 0;
    }
    const int shift_unit = opt_.disable_shifts ? 0 : kBgBits;
    for (int j = 0; j < bg_.n_w; ++j) {
      inst_.bs_state.w_phase = j;
      for (int i = 0; i < bg_.n_a; ++i) {
        inst_.bs_state.act_phase = i;
        multiply_into_l2(plan, act_base, w_base, kBgBits * i, kBgBits * j);
        for (std::size_t n = 0; n < nodes; ++n) {
          check(NodeClass::L2Node, acc2_[n], res_.max_values.l2_node);
          Accum& r1 = s1[static_cast<std::size_t>(plan.l2_unit[n])];
          r1 += acc2_[n] << (shift_unit * i);
          check(NodeClass::BsStage1, r1, res_.max_values.bs_stage1);
        }
        res_.activity.adder_invocations += plan.l2_adds + static_cast<std::int64_t>(nodes);
        res_.activity.register_write_bits += static_cast<std::int64_t>(nodes) * widths().bs_stage1;
        if (i > 0 && shift_unit > 0) res_.activity.shifter_invocations += static_cast<std::int64_t>(nodes);
        std::int64_t writes = static_cast<std::int64_t>(nodes);
        const bool transfer = i == bg_.n_a - 1;
        if (transfer) {
          for (std::size_t n = 0; n < nodes; ++n) {
            const auto l2 = static_cast<std::size_t>(plan.l2_unit[n]);
            s2[l2] += s1[l2] << (shift_unit * j);
            s1[l2] = 0;
            check(NodeClass::BsStage2, s2[l2], res_.max_values.bs_stage2);
          }
          res_.activity.adder_invocations += static_cast<std::int64_t>(nodes);
          res_.activity.register_write_bits +=
              static_cast<std::int64_t>(nodes) * widths().bs_stage2;
          if (j > 0 && shift_unit > 0) res_.activity.shifter_invocations += static_cast<std::int64_t>(nodes);
          writes += static_cast<std::int64_t>(nodes);
        }
        const bool last = transfer && j == bg_.n_w - 1;
        if (last) {
          std::vector<Accum>& staged = bs_values_;
          staged.resize(nodes);
          for (std::size_t n = 0; n < nodes; ++n) {
            staged[n] = s2[static_cast<std::size_t>(plan.l2_unit[n])];
          }
          reduce_upper(plan, staged, false);
          writes += static_cast<std::int64_t>(plan.l4_group.size());
        }
        end_cycle(plan, transfer ? 2 : 1, writes);
      }
    }
  }

  void accumulate_outputs(const Plan& plan) {
    for (std::size_t n = 0; n < plan.l4_group.size(); ++n) {
      Accum& reg = out_reg_[static_cast<std::size_t>(plan.l4_group[n])];
      reg += acc4_[n];
      check(NodeClass::OutRegister, reg, res_.max_values.out_register);
    }
    const auto groups = static_cast<std::int64_t>(plan.l4_group.size());
    res_.activity.adder_invocations += groups;
    res_.activity.register_write_bits += groups * widths().out_register;
  }

  // Moves the output registers into the off-array partial-sum buffer.
  void drain(const Plan& plan, std::int64_t is_base, std::int64_t ws_base) {
    const SpatialFactors& sp = inst_.spatial;
    for (std::int32_t g : plan.l4_group) {
      const std::int64_t is = is_base + g / sp.ws;
      const std::int64_t ws = ws_base + g % sp.ws;
      Accum& out = res_.outputs[static_cast<std::size_t>(w_.out_index(is, ws))];
      out += out_reg_[static_cast<std::size_t>(g)];
      out_reg_[static_cast<std::size_t>(g)] = 0;
      res_.psum_max = std::max(res_.psum_max, out);
    }
  }

  void end_cycle(const Plan& plan, int phase, std::int64_t register_writes) {
    if (opt_.trace != nullptr) {
      *opt_.trace << "{\"cycle\":" << res_.cycles << ",\"phase\":" << phase
                  << ",\"active_l1\":" << plan.units.size()
                  << ",\"register_writes\":" << register_writes + pending_writes_ << "}\n";
    }
    pending_writes_ = 0;
    ++res_.cycles;
  }

  ArrayInstance& inst_;
  const Workload& w_;
  const SimOptions& opt_;
  BgDims bg_;
  std::array<Accum, kNodeClasses.size()> limits_{};
  int out_bits_ = 0;
  std::map<int, Plan> plans_;
  std::vector<Accum> out_reg_;
  std::vector<Accum> acc2_;
  std::vector<Accum> acc3_;
  std::vector<Accum> acc4_;
  std::vector<Accum> bs_values_;
  std::int64_t pending_writes_ = 0;
  double act_bits_ = 0;
  double w_bits_ = 0;
  double out_bits_total_ = 0;
  SimResult res_;
};

}  // namespace

ArrayInstance elaborate(const ArchConfig& c, const Precision& p, const Workload& w,
                        const ElaborateOptions& options) {
  const auto violations = validate_config(c);
  if (!violations.empty()) throw Error("invalid config: " + violations.front().message);
  const auto supported = supported_precisions(c);
  if (std::find(supported.begin(), supported.end(), p) == supported.end()) {
    throw Error("precision " + to_string(p) + " is not supported by " + design_id(c) + " (" +
                to_string(c.mode) + ")");
  }
  if (w.precision != p) {
    throw Error("workload precision " + to_string(w.precision) + " differs from " +
                to_string(p));
  }

  const BgDims bg = bg_loop_dims(p);
  const std::array<Level, 3> order{Level::L4, Level::L3, Level::L2};
  std::array<LevelSpec, 3> specs;
  for (std::size_t i = 0; i < order.size(); ++i) specs[i] = level_spec(c, bg, order[i], options.hs);

  ArrayInstance inst;
  inst.config = c;
  inst.precision = p;
  inst.options = options;
  const bool swu_pairs = c.config == UnrollConfig::SWU && c.l2 == LevelSharing::IS;
  inst.spatial.rotation_steps = swu_pairs ? kFan / bg.n_a : 1;

  for (int step = 0; step < inst.spatial.rotation_steps; ++step) {
    std::vector<UnitAssignment> units(kTotalL1);
    Strides stride;
    for (int u = 0; u < kTotalL1; ++u) {
      const std::array<int, 3> pos{u / (kUnitsPerLevel * kUnitsPerLevel),
                                   (u / kUnitsPerLevel) % kUnitsPerLevel, u % kUnitsPerLevel};
      Strides s;
      UnitCoords coords;
      for (std::size_t li = 0; li < specs.size(); ++li) apply_level(specs[li], pos[li], step, s, coords);
      stride = s;
      UnitAssignment& a = units[static_cast<std::size_t>(u)];
      a.is_offset = static_cast<std::int32_t>(coords.is);
      a.ws_offset = static_cast<std::int32_t>(coords.ws);
      a.os_offset = static_cast<std::int32_t>(coords.os);
      a.act_bg_index = static_cast<std::int8_t>(coords.act_bg);
      a.w_bg_index = static_cast<std::int8_t>(coords.w_bg);
      a.gated = coords.gated;
    }
    inst.spatial.is = stride.is;
    inst.spatial.ws = stride.ws;
    inst.spatial.os = stride.os;
    for (UnitAssignment& a : units) {
      a.act_operand_index = static_cast<std::int32_t>(a.ws_offset * stride.os + a.os_offset);
      a.w_operand_index = static_cast<std::int32_t>(a.is_offset * stride.os + a.os_offset);
      a.output_group = static_cast<std::int32_t>(a.is_offset * stride.ws + a.ws_offset);
    }
    inst.steps.push_back(std::move(units));
  }
  check_invariants(inst);

  if (options.fill == FillPolicy::Strict) {
    std::ostringstream msg;
    const auto deficient = [&](const char* name, std::int64_t have, std::int64_t need) {
      if (have < need) msg << " " << name << "_size " << have << " < spatial " << need << ";";
    };
    deficient("is", w.is_size, inst.spatial.is);
    deficient("ws", w.ws_size, inst.spatial.ws);
    deficient("os", w.os_size, inst.spatial.os);
    if (!msg.str().empty()) {
      throw WorkloadTooSmall("workload too small for " + design_id(c) + " at " + to_string(p) +
                             ":" + msg.str());
    }
  }

  inst.reduction_tree.bit_serial = c.bg == BgPlacement::BsL2;
  inst.reduction_tree.shift_level = c.bg == BgPlacement::AtL3 ? Level::L3 : Level::L2;
  inst.reduction_tree.widths = node_widths(c, options.hs);
  inst.registers = register_layout(c, options.hs);
  const MappingStats stats = mapping_stats(inst);
  inst.reduction_tree.l2_nodes = static_cast<int>(stats.l2_nodes);
  inst.reduction_tree.l3_nodes = static_cast<int>(stats.l3_nodes);
  inst.reduction_tree.l4_nodes = static_cast<int>(stats.output_groups);
  inst.bs_state.stage1.assign(kL2Units, 0);
  inst.bs_state.stage2.assign(kL2Units, 0);
  return inst;
}

std::array<bool, kUnitsPerLevel> swu_gating_mask(const Precision& p) {
  const BgDims bg = bg_loop_dims(p);
  if (bg.n_a != bg.n_w) throw Error("SWU gating requires symmetric precision");
  std::array<bool, kUnitsPerLevel> mask{};
  for (int pos = 0; pos < kUnitsPerLevel; ++pos) {
    const int h = pos % kFan;
    const int v = pos / kFan;
    mask[static_cast<std::size_t>(pos)] = h / bg.n_a == v / bg.n_w;
  }
  return mask;
}

MappingStats mapping_stats(const ArrayInstance& inst, int step) {
  const auto& units = inst.steps.at(static_cast<std::size_t>(step));
  std::set<std::int32_t> acts;
  std::set<std::int32_t> wts;
  std::set<std::int32_t> groups;
  std::set<std::pair<int, std::int32_t>> l2;
  std::set<std::pair<int, std::int32_t>> l3;
  MappingStats s;
  for (std::size_t u = 0; u < units.size(); ++u) {
    const UnitAssignment& a = units[u];
    if (a.gated) continue;
    ++s.active_units;
    acts.insert(a.act_operand_index);
    wts.insert(a.w_operand_index);
    groups.insert(a.output_group);
    l2.emplace(static_cast<int>(u) / kUnitsPerLevel, a.output_group);
    l3.emplace(static_cast<int>(u) / (kUnitsPerLevel * kUnitsPerLevel), a.output_group);
  }
  s.act_words = static_cast<std::int64_t>(acts.size());
  s.w_words = static_cast<std::int64_t>(wts.size());
  s.output_groups = static_cast<std::int64_t>(groups.size());
  s.l2_nodes = static_cast<std::int64_t>(l2.size());
  s.l3_nodes = static_cast<std::int64_t>(l3.size());
  return s;
}

SimResult simulate(ArrayInstance& inst, const Workload& w, const SimOptions& options) {
  validate_workload(w);
  if (w.precision != inst.precision) {
    throw Error("workload precision " + to_string(w.precision) +
                " differs from the elaborated precision " + to_string(inst.precision));
  }
  Runner runner(inst, w, options);
  return runner.run();
}

SimResult run_design(const ArchConfig& c, const Workload& w, const SimOptions& options,
                     HsOrientation hs) {
  ArrayInstance inst = elaborate(c, w.precision, w, {hs, FillPolicy::Pad});
  return simulate(inst, w, options);
}

}  // namespace psma
