#include "psma/workload.hpp"

#include <random>
#include <sstream>

namespace psma {

namespace {

bool valid_bits(int bits) { return bits == 2 || bits == 4 || bits == 8; }

// Splits one seed into independent streams through seed_seq so activations
// and weights never share a generator state.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

std::vector<Operand> draw(std::mt19937_64& gen, std::int64_t count, int bits) {
  std::vector<Operand> out(static_cast<std::size_t>(count));
  // Top bits of each draw; unlike uniform_int_distribution this is identical
  // across standard library implementations.
  for (auto& v : out) v = static_cast<Operand>(gen() >> (64 - bits));
  return out;
}

void require_sizes(std::int64_t is_size, std::int64_t ws_size, std::int64_t os_size) {
  if (is_size < 1 || ws_size < 1 || os_size < 1) {
    std::ostringstream msg;
    msg << "workload sizes must be >= 1 (is=" << is_size << ", ws=" << ws_size
        << ", os=" << os_size << ")";
    throw Error(msg.str());
  }
  // 255 * 255 * os_size must stay far from 2^64.
  if (os_size > (std::int64_t{1} << 40)) throw Error("os_size too large");
}

}  // namespace

bool is_valid(const Precision& p) {
  return valid_bits(p.act_bits) && valid_bits(p.w_bits) && p.act_bits >= p.w_bits;
}

void require_valid(const Precision& p) {
  if (!is_valid(p)) throw Error("invalid precision " + to_string(p));
}

std::string to_string(const Precision& p) {
  return std::to_string(p.act_bits) + "x" + std::to_string(p.w_bits);
}

Precision parse_precision(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (c != 'b' && c != 'B' && c != ' ') s.push_back(c);
  }
  const auto x = s.find_first_of("xX*");
  if (x == std::string::npos || x == 0 || x + 1 == s.size()) {
    throw Error("malformed precision '" + text + "', expected AxW such as 8x4");
  }
  Precision p;
  try {
    std::size_t used = 0;
    p.act_bits = std::stoi(s.substr(0, x), &used);
    if (used != x) throw Error("");
    const std::string rhs = s.substr(x + 1);
    p.w_bits = std::stoi(rhs, &used);
    if (used != rhs.size()) throw Error("");
  } catch (const std::exception&) {
    throw Error("malformed precision '" + text + "', expected AxW such as 8x4");
  }
  require_valid(p);
  return p;
}

BgDims bg_loop_dims(const Precision& p) {
  require_valid(p);
  return {p.act_bits / kBgBits, p.w_bits / kBgBits};
}

void validate_workload(const Workload& w) {
  require_sizes(w.is_size, w.ws_size, w.os_size);
  require_valid(w.precision);
  if (static_cast<std::int64_t>(w.activations.size()) != w.ws_size * w.os_size) {
    throw Error("activation table must hold ws_size * os_size operands");
  }
  if (static_cast<std::int64_t>(w.weights.size()) != w.is_size * w.os_size) {
    throw Error("weight table must hold is_size * os_size operands");
  }
  const unsigned act_limit = 1u << w.precision.act_bits;
  const unsigned w_limit = 1u << w.precision.w_bits;
  for (Operand a : w.activations) {
    if (a >= act_limit) throw Error("activation operand exceeds act_bits");
  }
  for (Operand v : w.weights) {
    if (v >= w_limit) throw Error("weight operand exceeds w_bits");
  }
}

Workload make_workload(std::int64_t is_size, std::int64_t ws_size, std::int64_t os_size,
                       Precision precision, std::vector<Operand> activations,
                       std::vector<Operand> weights) {
  Workload w;
  w.is_size = is_size;
  w.ws_size = ws_size;
  w.os_size = os_size;
  w.precision = precision;
  w.activations = std::move(activations);
  w.weights = std::move(weights);
  validate_workload(w);
  return w;
}

Workload make_random_workload(std::int64_t is_size, std::int64_t ws_size, std::int64_t os_size,
                              Precision precision, std::uint64_t seed) {
  require_sizes(is_size, ws_size, os_size);
  require_valid(precision);
  Workload w;
  w.is_size = is_size;
  w.ws_size = ws_size;
  w.os_size = os_size;
  w.precision = precision;
  w.seed = seed;
  auto act_gen = make_stream(seed, 0);
  auto w_gen = make_stream(seed, 1);
  w.activations = draw(act_gen, ws_size * os_size, precision.act_bits);
  w.weights = draw(w_gen, is_size * os_size, precision.w_bits);
  return w;
}

Workload make_max_workload(std::int64_t is_size, std::int64_t ws_size, std::int64_t os_size,
                           Precision precision) {
  require_sizes(is_size, ws_size, os_size);
  require_valid(precision);
  Workload w;
  w.is_size = is_size;
  w.ws_size = ws_size;
  w.os_size = os_size;
  w.precision = precision;
  w.activations.assign(static_cast<std::size_t>(ws_size * os_size),
                       static_cast<Operand>((1u << precision.act_bits) - 1));
  w.weights.assign(static_cast<std::size_t>(is_size * os_size),
                   static_cast<Operand>((1u << precision.w_bits) - 1));
  return w;
}

Workload make_ideal_workload(const Precision& precision, std::uint64_t seed) {
  return make_random_workload(kIdealIsSize, kIdealWsSize, kIdealOsSize, precision, seed);
}

const char* rng_algorithm() { return "mt19937_64/seed_seq(lo32,hi32,stream)/top-bits"; }

std::vector<Accum> golden_outputs(const Workload& w) {
  validate_workload(w);
  std::vector<Accum> out(static_cast<std::size_t>(w.num_outputs()), 0);
  for (std::int64_t is = 0; is < w.is_size; ++is) {
    const Operand* wrow = &w.weights[static_cast<std::size_t>(w.w_index(is, 0))];
    for (std::int64_t ws = 0; ws < w.ws_size; ++ws) {
      const Operand* arow = &w.activations[static_cast<std::size_t>(w.act_index(ws, 0))];
      Accum sum = 0;
      for (std::int64_t k = 0; k < w.os_size; ++k) sum += Accum{arow[k]} * Accum{wrow[k]};
      out[static_cast<std::size_t>(w.out_index(is, ws))] = sum;
    }
  }
  return out;
}

nlohmann::json workload_to_json(const Workload& w) {
  return {{"schema_version", kWorkloadSchemaVersion},
          {"is_size", w.is_size},
          {"ws_size", w.ws_size},
          {"os_size", w.os_size},
          {"act_bits", w.precision.act_bits},
          {"w_bits", w.precision.w_bits},
          {"seed", w.seed}};
}

Workload workload_from_json(const nlohmann::json& j) {
  try {
    const int version = j.value("schema_version", kWorkloadSchemaVersion);
    if (version != kWorkloadSchemaVersion) {
      throw Error("unsupported workload schema_version " + std::to_string(version));
    }
    Precision p{j.at("act_bits").get<int>(), j.at("w_bits").get<int>()};
    return make_random_workload(j.at("is_size").get<std::int64_t>(),
                                j.at("ws_size").get<std::int64_t>(),
                                j.at("os_size").get<std::int64_t>(), p,
                                j.at("seed").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed workload json: ") + e.what());
  }
}

}  // namespace psma
