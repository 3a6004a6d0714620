#include "psma/taxonomy.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace psma {

namespace {

struct Column {
  UnrollConfig config;
  BgPlacement bg;
  LevelSharing l2;
};

constexpr std::array<Column, 8> kColumns{{
    {UnrollConfig::FU, BgPlacement::AtL2, LevelSharing::IS},
    {UnrollConfig::FU, BgPlacement::AtL2, LevelSharing::HS},
    {UnrollConfig::FU, BgPlacement::AtL2, LevelSharing::OS},
    {UnrollConfig::FU, BgPlacement::AtL3, LevelSharing::HS},
    {UnrollConfig::FU, BgPlacement::AtL3, LevelSharing::OS},
    {UnrollConfig::FU, BgPlacement::BsL2, LevelSharing::OS},
    {UnrollConfig::SWU, BgPlacement::AtL2, LevelSharing::IS},
    {UnrollConfig::SWU, BgPlacement::AtL2, LevelSharing::OS},
}};

constexpr std::array<LevelSharing, 3> kSharings{LevelSharing::IS, LevelSharing::HS,
                                                LevelSharing::OS};

ScalabilityMode widest_mode(UnrollConfig c) {
  return c == UnrollConfig::SWU ? ScalabilityMode::TwoDSym : ScalabilityMode::TwoDAsym;
}

struct Preset {
  const char* name;
  ArchConfig config;
};

using LS = LevelSharing;
using BP = BgPlacement;
using UC = UnrollConfig;
using SM = ScalabilityMode;

const std::array<Preset, 8> kPresets{{
    {"DNPU", {LS::IS, LS::OS, LS::IS, BP::AtL2, UC::FU, SM::OneD}},
    {"BitFusion", {LS::IS, LS::OS, LS::OS, BP::AtL2, UC::FU, SM::TwoDAsym}},
    {"BitBlade", {LS::IS, LS::OS, LS::OS, BP::AtL3, UC::FU, SM::TwoDAsym}},
    {"Ghodrati", {LS::IS, LS::OS, LS::OS, BP::AtL3, UC::FU, SM::TwoDAsym}},
    {"Stripes", {LS::IS, LS::IS, LS::OS, BP::BsL2, UC::FU, SM::OneD}},
    {"Loom", {LS::IS, LS::IS, LS::OS, BP::BsL2, UC::FU, SM::TwoDAsym}},
    // Low-precision "no sharing" at L2 is the gated SWU IS variant.
    {"Envision", {LS::IS, LS::IS, LS::IS, BP::AtL2, UC::SWU, SM::TwoDSym}},
    {"ST", {LS::IS, LS::OS, LS::OS, BP::AtL2, UC::SWU, SM::TwoDSym}},
}};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

std::string to_string(LevelSharing s) {
  switch (s) {
    case LevelSharing::IS: return "IS";
    case LevelSharing::HS: return "HS";
    case LevelSharing::OS: return "OS";
  }
  return "?";
}

std::string to_string(BgPlacement b) {
  switch (b) {
    case BgPlacement::AtL2: return "L2";
    case BgPlacement::AtL3: return "L3";
    case BgPlacement::BsL2: return "BS-L2";
  }
  return "?";
}

std::string to_string(UnrollConfig c) { return c == UnrollConfig::FU ? "FU" : "SWU"; }

std::string to_string(ScalabilityMode m) {
  switch (m) {
    case ScalabilityMode::OneD: return "1D";
    case ScalabilityMode::TwoDAsym: return "2D-A";
    case ScalabilityMode::TwoDSym: return "2D-S";
  }
  return "?";
}

LevelSharing parse_level_sharing(const std::string& s) {
  if (s == "IS") return LevelSharing::IS;
  if (s == "HS") return LevelSharing::HS;
  if (s == "OS") return LevelSharing::OS;
  throw Error("unknown level sharing '" + s + "' (expected IS, HS or OS)");
}

BgPlacement parse_bg_placement(const std::string& s) {
  if (s == "L2") return BgPlacement::AtL2;
  if (s == "L3") return BgPlacement::AtL3;
  if (s == "BS-L2") return BgPlacement::BsL2;
  throw Error("unknown BG placement '" + s + "' (expected L2, L3 or BS-L2)");
}

UnrollConfig parse_unroll_config(const std::string& s) {
  if (s == "FU") return UnrollConfig::FU;
  if (s == "SWU") return UnrollConfig::SWU;
  throw Error("unknown unroll config '" + s + "' (expected FU or SWU)");
}

ScalabilityMode parse_mode(const std::string& s) {
  if (s == "1D") return ScalabilityMode::OneD;
  if (s == "2D-A") return ScalabilityMode::TwoDAsym;
  if (s == "2D-S") return ScalabilityMode::TwoDSym;
  throw Error("unknown scalability mode '" + s + "' (expected 1D, 2D-A or 2D-S)");
}

std::string to_string(HsOrientation o) {
  return o == HsOrientation::BroadcastActivations ? "broadcast-activations" : "broadcast-weights";
}

HsOrientation parse_hs_orientation(const std::string& s) {
  if (s == "broadcast-activations") return HsOrientation::BroadcastActivations;
  if (s == "broadcast-weights") return HsOrientation::BroadcastWeights;
  throw Error("unknown HS orientation '" + s +
              "' (expected broadcast-activations or broadcast-weights)");
}

std::vector<Violation> validate_config(const ArchConfig& c) {
  std::vector<Violation> out;
  if (c.bg == BgPlacement::AtL3 && c.l2 == LevelSharing::IS) {
    out.push_back({1, "constraint 1: BG unrolled at L3 requires L2 != IS"});
  }
  if (c.bg == BgPlacement::BsL2 && c.l2 != LevelSharing::OS) {
    out.push_back({2, "constraint 2: bit-serial BG requires L2 = OS with registers at L2"});
  }
  if (c.config == UnrollConfig::SWU) {
    if (c.bg != BgPlacement::AtL2) {
      out.push_back({3, "constraint 3: SWU requires BG unrolled spatially at L2"});
    }
    if (c.l2 == LevelSharing::HS) {
      out.push_back({3, "constraint 3: SWU requires L2 to be OS or unshared (IS)"});
    }
    if (c.mode != ScalabilityMode::TwoDSym) {
      out.push_back({3, "constraint 3: SWU supports only 2D symmetric scalability"});
    }
  }
  return out;
}

std::vector<ArchConfig> enumerate_design_space() {
  std::vector<ArchConfig> out;
  out.reserve(72);
  for (LevelSharing l4 : kSharings) {
    for (LevelSharing l3 : kSharings) {
      for (const Column& col : kColumns) {
        out.push_back({l4, l3, col.l2, col.bg, col.config, widest_mode(col.config)});
      }
    }
  }
  return out;
}

int design_column(const ArchConfig& c) {
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    const Column& col = kColumns[i];
    if (col.config == c.config && col.bg == c.bg && col.l2 == c.l2) return static_cast<int>(i);
  }
  throw Error("config is outside the constrained design space");
}

const std::vector<std::string>& design_columns() {
  static const std::vector<std::string> labels = [] {
    std::vector<std::string> v;
    for (const Column& col : kColumns) {
      v.push_back(to_string(col.config) + "-" + to_string(col.bg) + "-" + to_string(col.l2));
    }
    return v;
  }();
  return labels;
}

std::string design_id(const ArchConfig& c) {
  return to_string(c.l4) + "-" + to_string(c.l3) + "/" + to_string(c.config) + "-" +
         to_string(c.bg) + "-" + to_string(c.l2);
}

ArchConfig parse_design_id(const std::string& id) {
  const auto slash = id.find('/');
  const auto bad = [&] { return Error("malformed design id '" + id + "'"); };
  if (slash == std::string::npos) throw bad();
  const std::string levels = id.substr(0, slash);
  const std::string rest = id.substr(slash + 1);
  const auto dash = levels.find('-');
  const auto first = rest.find('-');
  const auto last = rest.rfind('-');
  if (dash == std::string::npos || first == std::string::npos || first == last) throw bad();
  ArchConfig c;
  c.l4 = parse_level_sharing(levels.substr(0, dash));
  c.l3 = parse_level_sharing(levels.substr(dash + 1));
  c.config = parse_unroll_config(rest.substr(0, first));
  c.bg = parse_bg_placement(rest.substr(first + 1, last - first - 1));
  c.l2 = parse_level_sharing(rest.substr(last + 1));
  c.mode = widest_mode(c.config);
  return c;
}

std::vector<std::string> sota_preset_names() {
  std::vector<std::string> names;
  for (const Preset& p : kPresets) names.emplace_back(p.name);
  return names;
}

ArchConfig sota_preset(const std::string& name) {
  if (lower(name) == "unpu") {
    throw UnsupportedPreset(
        "UNPU is unsupported by the template: bit-serial registers at L1 (BS-L1) are not "
        "expressible; internal registers are fixed at L2");
  }
  for (const Preset& p : kPresets) {
    if (lower(name) == lower(p.name)) return p.config;
  }
  throw Error("unknown preset '" + name + "'");
}

std::optional<std::string> preset_name_of(const ArchConfig& c) {
  for (const Preset& p : kPresets) {
    if (p.config == c) return std::string(p.name);
  }
  return std::nullopt;
}

std::vector<Precision> mode_precisions(ScalabilityMode m) {
  switch (m) {
    case ScalabilityMode::OneD: return {{8, 8}, {8, 4}, {8, 2}};
    case ScalabilityMode::TwoDAsym: return {{8, 8}, {8, 4}, {8, 2}, {4, 4}, {4, 2}, {2, 2}};
    case ScalabilityMode::TwoDSym: return {{8, 8}, {4, 4}, {2, 2}};
  }
  return {};
}

std::vector<Precision> supported_precisions(const ArchConfig& c) {
  const auto violations = validate_config(c);
  if (!violations.empty()) throw Error("invalid config: " + violations.front().message);
  return mode_precisions(c.mode);
}

Precision lowest_precision(const ArchConfig& c) { return supported_precisions(c).back(); }

bool is_extended_precision(ScalabilityMode m, const Precision& p) {
  return m == ScalabilityMode::TwoDAsym && p == Precision{4, 2};
}

nlohmann::json config_to_json(const ArchConfig& c) {
  return {{"l4", to_string(c.l4)},         {"l3", to_string(c.l3)},
          {"l2", to_string(c.l2)},         {"bg", to_string(c.bg)},
          {"config", to_string(c.config)}, {"mode", to_string(c.mode)}};
}

ArchConfig config_from_json(const nlohmann::json& j) {
  try {
    ArchConfig c;
    c.l4 = parse_level_sharing(j.at("l4").get<std::string>());
    c.l3 = parse_level_sharing(j.at("l3").get<std::string>());
    c.l2 = parse_level_sharing(j.at("l2").get<std::string>());
    c.bg = parse_bg_placement(j.at("bg").get<std::string>());
    c.config = parse_unroll_config(j.at("config").get<std::string>());
    c.mode = parse_mode(j.at("mode").get<std::string>());
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed config json: ") + e.what());
  }
}

}  // namespace psma
