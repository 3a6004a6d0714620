#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "psma/workload.hpp"

namespace psma {

/// Spatial sharing of one 4x4 array level.
enum class LevelSharing { IS, HS, OS };

/// Where the bit-group loops unroll: spatially at L2 or L3, or bit-serially
/// with the internal shift-add registers at L2.
enum class BgPlacement { AtL2, AtL3, BsL2 };

enum class UnrollConfig { FU, SWU };

enum class ScalabilityMode { OneD, TwoDAsym, TwoDSym };

/// Which operand an HS level broadcasts along its sharing dimension.
/// The other dimension of an HS level is always output sharing.
enum class HsOrientation { BroadcastActivations, BroadcastWeights };

/// One point of the taxonomy.
///
/// l2 and l3 carry the low-precision residual sharing of whichever level
/// hosts the bit groups; at full precision that level is filled by bit groups.
struct ArchConfig {
  LevelSharing l4 = LevelSharing::IS;
  LevelSharing l3 = LevelSharing::OS;
  LevelSharing l2 = LevelSharing::OS;
  BgPlacement bg = BgPlacement::AtL2;
  UnrollConfig config = UnrollConfig::FU;
  ScalabilityMode mode = ScalabilityMode::TwoDAsym;

  friend bool operator==(const ArchConfig&, const ArchConfig&) = default;
};

std::string to_string(LevelSharing s);
std::string to_string(BgPlacement b);
std::string to_string(UnrollConfig c);
std::string to_string(ScalabilityMode m);
std::string to_string(HsOrientation o);

LevelSharing parse_level_sharing(const std::string& s);
BgPlacement parse_bg_placement(const std::string& s);
UnrollConfig parse_unroll_config(const std::string& s);
ScalabilityMode parse_mode(const std::string& s);
HsOrientation parse_hs_orientation(const std::string& s);

/// A violated design-space constraint (numbered 1..3).
struct Violation {
  int constraint = 0;
  std::string message;
};

/// Every violated constraint, empty when the config is legal.
std::vector<Violation> validate_config(const ArchConfig& c);

inline bool is_legal(const ArchConfig& c) { return validate_config(c).empty(); }

/// The 72 benchmarked designs: L4-major, then L3, then the eight
/// Config/BG/L2 columns.
std::vector<ArchConfig> enumerate_design_space();

/// Column index 0..7 of a legal config in the Config/BG/L2 ordering.
int design_column(const ArchConfig& c);

/// Column labels in enumeration order, e.g. "FU-L3-OS".
const std::vector<std::string>& design_columns();

/// Stable identifier "L4-L3/CONFIG-BG-L2", e.g. "IS-OS/FU-L3-OS".
std::string design_id(const ArchConfig& c);

/// Inverse of design_id. The mode is the widest the column supports.
ArchConfig parse_design_id(const std::string& id);

/// Thrown for a preset the template cannot express.
class UnsupportedPreset : public Error {
 public:
  using Error::Error;
};

std::vector<std::string> sota_preset_names();
ArchConfig sota_preset(const std::string& name);

/// Name of the preset matching c exactly, if any.
std::optional<std::string> preset_name_of(const ArchConfig& c);

/// Precisions of c's scalability mode, descending.
std::vector<Precision> supported_precisions(const ArchConfig& c);
std::vector<Precision> mode_precisions(ScalabilityMode m);

/// The lowest precision c supports (the worst case for word counts).
Precision lowest_precision(const ArchConfig& c);

/// True for 4x2 under 2D-A: admitted by the mode definition, tagged "extended" in reports.
bool is_extended_precision(ScalabilityMode m, const Precision& p);

nlohmann::json config_to_json(const ArchConfig& c);
ArchConfig config_from_json(const nlohmann::json& j);

}  // namespace psma
