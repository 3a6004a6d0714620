#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "psma/costmodel.hpp"
#include "psma/simulator.hpp"
#include "psma/taxonomy.hpp"
#include "psma/workload.hpp"

namespace psma {

inline constexpr const char* kToolVersion = "0.3.0";
// Bumped on any change to the bench CSV columns.
inline constexpr int kReportSchemaVersion = 1;

/// Designs matching a filter expression.
///
/// The expression is empty, "all", or comma-separated key=value terms with
/// keys l4, l3, l2, bg, config, mode, id, preset. Terms combine with AND. A
/// preset term keeps the preset's own scalability mode.
std::vector<ArchConfig> select_designs(const std::string& filter);

/// Maps a named CNN loop (K, C, OX, ...) to its category: 'i', 'w' or 'o'.
char loop_category(const std::string& name);

struct WorkloadSpec {
  std::int64_t is_size = 64;
  std::int64_t ws_size = 64;
  std::int64_t os_size = 256;
  std::int64_t max_cycles = 0;  // 0: run every tile and check the oracle

  friend bool operator==(const WorkloadSpec&, const WorkloadSpec&) = default;
};

struct RunMetadata {
  std::string tool_version = kToolVersion;
  std::string rng_algorithm;
  std::string timestamp;  // ISO 8601 UTC; written to the sidecar only
};

struct BenchmarkRun {
  std::string filter = "all";
  std::vector<std::string> presets;  // replaces the filter when non-empty
  std::vector<Precision> precisions;  // empty: every supported precision
  std::vector<std::uint64_t> seeds{1};
  WorkloadSpec workload;
  HsOrientation hs = HsOrientation::BroadcastActivations;
  std::string matrix_metric = "reg_write_bits_per_op";
  std::string csv_path;
  std::string matrix_path;
  std::string metadata_path;
  RunMetadata metadata;
};

nlohmann::json to_json(const BenchmarkRun& run);
BenchmarkRun benchmark_run_from_json(const nlohmann::json& j);

/// The ordered design list a run covers.
std::vector<ArchConfig> run_designs(const BenchmarkRun& run);

enum class OracleStatus { Pass, Fail, Skipped };

std::string to_string(OracleStatus s);

struct BenchRow {
  ArchConfig config;
  Precision precision;
  bool extended = false;
  std::uint64_t seed = 0;
  WorkloadSpec workload;
  SimResult sim;
  CostReport cost;
  OracleStatus oracle = OracleStatus::Skipped;
  std::string error;  // non-empty when the run threw
};

/// One row per (design, precision, seed) in that order.
struct BenchResult {
  std::vector<BenchRow> rows;
  bool all_pass = true;
};

BenchRow bench_one(const ArchConfig& c, const Precision& p, std::uint64_t seed,
                   const WorkloadSpec& spec, HsOrientation hs = HsOrientation::BroadcastActivations);

BenchResult run_bench(const BenchmarkRun& run);

std::vector<std::string> bench_csv_header();
std::vector<std::string> bench_csv_row(const BenchRow& row);
std::string bench_csv(const BenchResult& result);
nlohmann::json to_json(const BenchRow& row);

/// Metrics the comparison matrix can show.
const std::vector<std::string>& matrix_metrics();
double row_metric(const BenchRow& row, const std::string& metric);

/// Text matrix: rows are the nine L4/L3 combinations, columns the eight
/// Config/BG/L2 columns. Each cell averages the metric over the rows of that
/// design; "-" marks designs without rows.
std::string bench_matrix(const BenchResult& result, const std::string& metric);

/// Same layout, filled from the cost model.
/// Metrics: register_bits, adder_bits, shifter_trees, out_words.
std::string cost_matrix(const std::vector<CostReport>& reports, const std::string& metric);

/// CSV line with minimal quoting.
std::string csv_line(const std::vector<std::string>& fields);

std::string utc_timestamp();

}  // namespace psma
