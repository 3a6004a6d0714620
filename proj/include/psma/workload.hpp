#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace psma {

/// Base error for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand precision as an (activation bits, weight bits) pair.
///
/// Valid pairs use 2, 4 or 8 bits per operand with act_bits >= w_bits.
struct Precision {
  int act_bits = 8;
  int w_bits = 8;

  friend bool operator==(const Precision&, const Precision&) = default;
  friend auto operator<=>(const Precision&, const Precision&) = default;
};

bool is_valid(const Precision& p);

/// Throws psma::Error when the pair violates the precision invariants.
void require_valid(const Precision& p);

/// "8x4" style label.
std::string to_string(const Precision& p);

/// Parses "AxW" (also accepts "AbxWb").
Precision parse_precision(const std::string& text);

/// Number of 2-bit bit groups per operand.
struct BgDims {
  int n_a = 1;
  int n_w = 1;

  friend bool operator==(const BgDims&, const BgDims&) = default;
};

inline constexpr int kBgBits = 2;

BgDims bg_loop_dims(const Precision& p);

using Operand = std::uint8_t;
using Accum = std::uint64_t;

/// DNN workload collapsed into the three loop categories.
///
/// Activations are indexed act[ws][os] and weights w[is][os]; each of the
/// is_size x ws_size outputs reduces os_size products:
///   out[is][ws] = sum_k act[ws][k] * w[is][k]
struct Workload {
  std::int64_t is_size = 1;
  std::int64_t ws_size = 1;
  std::int64_t os_size = 1;
  Precision precision;
  std::uint64_t seed = 0;
  std::vector<Operand> activations;  // ws_size * os_size, row-major
  std::vector<Operand> weights;      // is_size * os_size, row-major

  std::int64_t act_index(std::int64_t ws, std::int64_t os) const { return ws * os_size + os; }
  std::int64_t w_index(std::int64_t is, std::int64_t os) const { return is * os_size + os; }
  std::int64_t out_index(std::int64_t is, std::int64_t ws) const { return is * ws_size + ws; }
  std::int64_t num_outputs() const { return is_size * ws_size; }
};

/// Checks sizes, operand counts and operand ranges.
void validate_workload(const Workload& w);

/// Builds a workload from explicit operand tables (validated).
Workload make_workload(std::int64_t is_size, std::int64_t ws_size, std::int64_t os_size,
                       Precision precision, std::vector<Operand> activations,
                       std::vector<Operand> weights);

/// Random workload; operands are uniform in [0, 2^bits) and fully determined by the seed.
Workload make_random_workload(std::int64_t is_size, std::int64_t ws_size, std::int64_t os_size,
                              Precision precision, std::uint64_t seed);

/// Every operand at its maximum value 2^bits - 1.
Workload make_max_workload(std::int64_t is_size, std::int64_t ws_size, std::int64_t os_size,
                           Precision precision);

inline constexpr std::int64_t kIdealIsSize = 64;
inline constexpr std::int64_t kIdealWsSize = 64;
inline constexpr std::int64_t kIdealOsSize = 4096;

/// Smallest workload that keeps every design fully utilized at every precision.
Workload make_ideal_workload(const Precision& precision, std::uint64_t seed);

/// Identifier of the operand generator, recorded in report metadata.
const char* rng_algorithm();

/// Reference reduction, row-major [is][ws]. Independent of any array model.
std::vector<Accum> golden_outputs(const Workload& w);

/// Serialization. Operands are never stored; they are regenerated from the seed.
inline constexpr int kWorkloadSchemaVersion = 1;
nlohmann::json workload_to_json(const Workload& w);
Workload workload_from_json(const nlohmann::json& j);

}  // namespace psma
