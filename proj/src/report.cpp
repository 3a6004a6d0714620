#include "psma/report.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "format.hpp"

namespace psma {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

std::string upper(std::string s) {
  for (char& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

bool same_structure(const ArchConfig& a, const ArchConfig& b) {
  return a.l4 == b.l4 && a.l3 == b.l3 && a.l2 == b.l2 && a.bg == b.bg && a.config == b.config;
}

const std::array<LevelSharing, 3> kSharings{LevelSharing::IS, LevelSharing::HS, LevelSharing::OS};

template <typename Cell>
std::string render_matrix(const std::string& title, Cell cell) {
  const auto& cols = design_columns();
  std::vector<std::vector<std::string>> table;
  table.push_back({"L4-L3"});
  for (const auto& c : cols) table.back().push_back(c);
  for (LevelSharing l4 : kSharings) {
    for (LevelSharing l3 : kSharings) {
      std::vector<std::string> line{to_string(l4) + "-" + to_string(l3)};
      for (int col = 0; col < static_cast<int>(cols.size()); ++col) line.push_back(cell(l4, l3, col));
      table.push_back(std::move(line));
    }
  }
  std::vector<std::size_t> width(table.front().size(), 0);
  for (const auto& line : table) {
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  std::ostringstream out;
  out << title << "\n";
  for (const auto& line : table) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (i == 0) {
        out << std::left << std::setw(static_cast<int>(width[i])) << line[i];
      } else {
        out << "  " << std::right << std::setw(static_cast<int>(width[i])) << line[i];
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace

char loop_category(const std::string& name) {
  const std::string n = upper(name);
  if (n == "K") return 'i';
  if (n == "B" || n == "OX" || n == "OY") return 'w';
  if (n == "C" || n == "FX" || n == "FY") return 'o';
  throw Error("unknown loop '" + name + "' (expected B, K, C, OX, OY, FX or FY)");
}

std::vector<ArchConfig> select_designs(const std::string& filter) {
  std::vector<ArchConfig> designs = enumerate_design_space();
  const std::string f = trim(filter);
  if (f.empty() || f == "all") return designs;
  for (const std::string& term : split(f, ',')) {
    const auto eq = term.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == term.size()) {
      throw Error("malformed filter term '" + term + "' (expected key=value)");
    }
    const std::string key = trim(term.substr(0, eq));
    const std::string value = trim(term.substr(eq + 1));
    std::vector<ArchConfig> kept;
    if (key == "preset") {
      const ArchConfig p = sota_preset(value);
      for (const ArchConfig& c : designs) {
        if (same_structure(c, p)) kept.push_back(p);
      }
    } else {
      std::function<bool(const ArchConfig&)> match;
      if (key == "l4") {
        const auto s = parse_level_sharing(value);
        match = [s](const ArchConfig& c) { return c.l4 == s; };
      } else if (key == "l3") {
        const auto s = parse_level_sharing(value);
        match = [s](const ArchConfig& c) { return c.l3 == s; };
      } else if (key == "l2") {
        const auto s = parse_level_sharing(value);
        match = [s](const ArchConfig& c) { return c.l2 == s; };
      } else if (key == "bg") {
        const auto b = parse_bg_placement(value);
        match = [b](const ArchConfig& c) { return c.bg == b; };
      } else if (key == "config") {
        const auto u = parse_unroll_config(value);
        match = [u](const ArchConfig& c) { return c.config == u; };
      } else if (key == "mode") {
        const auto m = parse_mode(value);
        match = [m](const ArchConfig& c) { return c.mode == m; };
      } else if (key == "id") {
        const ArchConfig id = parse_design_id(value);
        match = [id](const ArchConfig& c) { return same_structure(c, id); };
      } else {
        throw Error("unknown filter key '" + key +
                    "' (expected l4, l3, l2, bg, config, mode, id or preset)");
      }
      std::copy_if(designs.begin(), designs.end(), std::back_inserter(kept), match);
    }
    designs = std::move(kept);
  }
  return designs;
}

nlohmann::json to_json(const BenchmarkRun& run) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["filter"] = run.filter;
  j["presets"] = run.presets;
  j["precisions"] = nlohmann::json::array();
  for (const Precision& p : run.precisions) j["precisions"].push_back(to_string(p));
  j["seeds"] = run.seeds;
  j["workload"] = {{"is_size", run.workload.is_size},
                   {"ws_size", run.workload.ws_size},
                   {"os_size", run.workload.os_size},
                   {"max_cycles", run.workload.max_cycles}};
  j["hs_orientation"] = to_string(run.hs);
  j["matrix_metric"] = run.matrix_metric;
  j["outputs"] = {{"csv", run.csv_path},
                  {"matrix", run.matrix_path},
                  {"metadata", run.metadata_path}};
  j["metadata"] = {{"tool_version", run.metadata.tool_version},
                   {"rng_algorithm", run.metadata.rng_algorithm},
                   {"timestamp", run.metadata.timestamp}};
  return j;
}

BenchmarkRun benchmark_run_from_json(const nlohmann::json& j) {
  if (j.value("schema_version", 0) != kReportSchemaVersion) {
    throw Error("unsupported benchmark run schema_version");
  }
  BenchmarkRun run;
  run.filter = j.value("filter", std::string("all"));
  run.presets = j.value("presets", std::vector<std::string>{});
  for (const auto& p : j.value("precisions", std::vector<std::string>{})) {
    run.precisions.push_back(parse_precision(p));
  }
  run.seeds = j.value("seeds", std::vector<std::uint64_t>{1});
  const auto& w = j.at("workload");
  run.workload.is_size = w.at("is_size").get<std::int64_t>();
  run.workload.ws_size = w.at("ws_size").get<std::int64_t>();
  run.workload.os_size = w.at("os_size").get<std::int64_t>();
  run.workload.max_cycles = w.value("max_cycles", std::int64_t{0});
  run.hs = parse_hs_orientation(j.value("hs_orientation", std::string("broadcast-activations")));
  run.matrix_metric = j.value("matrix_metric", run.matrix_metric);
  if (j.contains("outputs")) {
    const auto& o = j["outputs"];
    run.csv_path = o.value("csv", std::string());
    run.matrix_path = o.value("matrix", std::string());
    run.metadata_path = o.value("metadata", std::string());
  }
  if (j.contains("metadata")) {
    const auto& m = j["metadata"];
    run.metadata.tool_version = m.value("tool_version", std::string(kToolVersion));
    run.metadata.rng_algorithm = m.value("rng_algorithm", std::string());
    run.metadata.timestamp = m.value("timestamp", std::string());
  }
  return run;
}

std::vector<ArchConfig> run_designs(const BenchmarkRun& run) {
  if (run.presets.empty()) return select_designs(run.filter);
  std::vector<ArchConfig> out;
  for (const std::string& name : run.presets) out.push_back(sota_preset(name));
  return out;
}

std::string to_string(OracleStatus s) {
  switch (s) {
    case OracleStatus::Pass: return "true";
    case OracleStatus::Fail: return "false";
    case OracleStatus::Skipped: return "skipped";
  }
  return "?";
}

BenchRow bench_one(const ArchConfig& c, const Precision& p, std::uint64_t seed,
                   const WorkloadSpec& spec, HsOrientation hs) {
  BenchRow row;
  row.config = c;
  row.precision = p;
  row.extended = is_extended_precision(c.mode, p);
  row.seed = seed;
  row.workload = spec;
  row.cost = cost_report(c, hs);
  try {
    const Workload w = make_random_workload(spec.is_size, spec.ws_size, spec.os_size, p, seed);
    SimOptions opt;
    opt.max_cycles = spec.max_cycles;
    row.sim = run_design(c, w, opt, hs);
    if (row.sim.completed) {
      row.oracle = row.sim.outputs == golden_outputs(w) ? OracleStatus::Pass : OracleStatus::Fail;
    }
  } catch (const std::exception& e) {
    row.error = e.what();
    row.oracle = OracleStatus::Fail;
  }
  row.sim.outputs.clear();
  row.sim.outputs.shrink_to_fit();
  return row;
}

BenchResult run_bench(const BenchmarkRun& run) {
  BenchResult result;
  for (const ArchConfig& c : run_designs(run)) {
    const auto supported = supported_precisions(c);
    std::vector<Precision> precisions;
    if (run.precisions.empty()) {
      precisions = supported;
    } else {
      for (const Precision& p : run.precisions) {
        if (std::find(supported.begin(), supported.end(), p) != supported.end()) {
          precisions.push_back(p);
        }
      }
    }
    for (const Precision& p : precisions) {
      for (std::uint64_t seed : run.seeds) {
        result.rows.push_back(bench_one(c, p, seed, run.workload, run.hs));
        if (result.rows.back().oracle == OracleStatus::Fail) result.all_pass = false;
      }
    }
  }
  return result;
}

std::vector<std::string> bench_csv_header() {
  return {"schema_version",     "design_id",       "mode",
          "precision",          "extended",        "seed",
          "is_size",            "ws_size",         "os_size",
          "cycles",             "completed",       "l1_ops",
          "paper_ops",          "utilization",     "act_bw_bits",
          "w_bw_bits",          "out_bw_bits",     "out_words",
          "out_word_bits",      "shifter_trees",   "adder_bits",
          "register_bits",      "adder_invocations", "register_write_bits",
          "shifter_invocations", "oracle_pass",    "error"};
}

std::vector<std::string> bench_csv_row(const BenchRow& row) {
  using detail::format_double;
  std::int64_t out_words = 0;
  for (const PrecisionCost& pc : row.cost.per_precision) {
    if (pc.precision == row.precision) out_words = pc.words.out;
  }
  return {std::to_string(kReportSchemaVersion),
          design_id(row.config),
          to_string(row.config.mode),
          to_string(row.precision),
          row.extended ? "1" : "0",
          std::to_string(row.seed),
          std::to_string(row.workload.is_size),
          std::to_string(row.workload.ws_size),
          std::to_string(row.workload.os_size),
          std::to_string(row.sim.cycles),
          row.sim.completed ? "1" : "0",
          std::to_string(row.sim.l1_ops),
          format_double(row.sim.paper_ops),
          format_double(row.sim.utilization),
          format_double(row.sim.act_bits_per_cycle),
          format_double(row.sim.w_bits_per_cycle),
          format_double(row.sim.out_bits_per_cycle),
          std::to_string(out_words),
          std::to_string(row.cost.layout.out_word_bits),
          std::to_string(row.cost.structural.shifter_trees),
          std::to_string(row.cost.structural.total_adder_input_bits),
          std::to_string(row.cost.structural.total_register_bits),
          std::to_string(row.sim.activity.adder_invocations),
          std::to_string(row.sim.activity.register_write_bits),
          std::to_string(row.sim.activity.shifter_invocations),
          to_string(row.oracle),
          row.error};
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n") == std::string::npos) {
      out += f;
      continue;
    }
    out += '"';
    for (char ch : f) {
      if (ch == '"') out += '"';
      out += ch;
    }
    out += '"';
  }
  return out;
}

std::string bench_csv(const BenchResult& result) {
  std::string out = csv_line(bench_csv_header()) + "\n";
  for (const BenchRow& row : result.rows) out += csv_line(bench_csv_row(row)) + "\n";
  return out;
}

nlohmann::json to_json(const BenchRow& row) {
  std::int64_t out_words = 0;
  for (const PrecisionCost& pc : row.cost.per_precision) {
    if (pc.precision == row.precision) out_words = pc.words.out;
  }
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["design_id"] = design_id(row.config);
  j["config"] = config_to_json(row.config);
  j["mode"] = to_string(row.config.mode);
  j["precision"] = to_string(row.precision);
  j["extended"] = row.extended;
  j["seed"] = row.seed;
  j["is_size"] = row.workload.is_size;
  j["ws_size"] = row.workload.ws_size;
  j["os_size"] = row.workload.os_size;
  j["cycles"] = row.sim.cycles;
  j["completed"] = row.sim.completed;
  j["l1_ops"] = row.sim.l1_ops;
  j["paper_ops"] = row.sim.paper_ops;
  j["utilization"] = row.sim.utilization;
  j["act_bw_bits"] = row.sim.act_bits_per_cycle;
  j["w_bw_bits"] = row.sim.w_bits_per_cycle;
  j["out_bw_bits"] = row.sim.out_bits_per_cycle;
  j["out_words"] = out_words;
  j["out_word_bits"] = row.cost.layout.out_word_bits;
  j["shifter_trees"] = row.cost.structural.shifter_trees;
  j["adder_bits"] = row.cost.structural.total_adder_input_bits;
  j["register_bits"] = row.cost.structural.total_register_bits;
  j["adder_invocations"] = row.sim.activity.adder_invocations;
  j["register_write_bits"] = row.sim.activity.register_write_bits;
  j["shifter_invocations"] = row.sim.activity.shifter_invocations;
  j["oracle_pass"] = to_string(row.oracle);
  j["error"] = row.error;
  return j;
}

const std::vector<std::string>& matrix_metrics() {
  static const std::vector<std::string> m{"utilization",   "paper_ops_per_cycle",
                                          "reg_write_bits_per_op", "adder_invocations_per_op",
                                          "register_bits", "adder_bits",
                                          "shifter_trees", "out_words"};
  return m;
}

double row_metric(const BenchRow& row, const std::string& metric) {
  const double ops = row.sim.paper_ops > 0 ? row.sim.paper_ops : 1.0;
  const double cycles = row.sim.cycles > 0 ? static_cast<double>(row.sim.cycles) : 1.0;
  if (metric == "utilization") return row.sim.utilization;
  if (metric == "paper_ops_per_cycle") return row.sim.paper_ops / cycles;
  if (metric == "reg_write_bits_per_op") {
    return static_cast<double>(row.sim.activity.register_write_bits) / ops;
  }
  if (metric == "adder_invocations_per_op") {
    return static_cast<double>(row.sim.activity.adder_invocations) / ops;
  }
  if (metric == "register_bits") return static_cast<double>(row.cost.structural.total_register_bits);
  if (metric == "adder_bits") return static_cast<double>(row.cost.structural.total_adder_input_bits);
  if (metric == "shifter_trees") return row.cost.structural.shifter_trees;
  if (metric == "out_words") return static_cast<double>(row.cost.layout.out_words);
  throw Error("unknown matrix metric '" + metric + "'");
}

std::string bench_matrix(const BenchResult& result, const std::string& metric) {
  row_metric(BenchRow{}, metric);
  std::map<std::string, std::pair<double, int>> sums;
  for (const BenchRow& row : result.rows) {
    auto& [sum, n] = sums[design_id(row.config)];
    sum += row_metric(row, metric);
    ++n;
  }
  const auto configs = enumerate_design_space();
  return render_matrix("metric: " + metric + " (mean over precisions and seeds)",
                       [&](LevelSharing l4, LevelSharing l3, int col) -> std::string {
                         for (const ArchConfig& c : configs) {
                           if (c.l4 != l4 || c.l3 != l3 || design_column(c) != col) continue;
                           const auto it = sums.find(design_id(c));
                           if (it == sums.end()) return "-";
                           char buf[32];
                           std::snprintf(buf, sizeof(buf), "%.4g",
                                         it->second.first / it->second.second);
                           return buf;
                         }
                         return "-";
                       });
}

std::string cost_matrix(const std::vector<CostReport>& reports, const std::string& metric) {
  const auto value = [&](const CostReport& r) -> std::int64_t {
    if (metric == "register_bits") return r.structural.total_register_bits;
    if (metric == "adder_bits") return r.structural.total_adder_input_bits;
    if (metric == "shifter_trees") return r.structural.shifter_trees;
    if (metric == "out_words") return r.layout.out_words;
    throw Error("unknown cost metric '" + metric +
                "' (expected register_bits, adder_bits, shifter_trees or out_words)");
  };
  if (!reports.empty()) value(reports.front());
  return render_matrix("metric: " + metric,
                       [&](LevelSharing l4, LevelSharing l3, int col) -> std::string {
                         for (const CostReport& r : reports) {
                           const ArchConfig& c = r.config;
                           if (c.l4 == l4 && c.l3 == l3 && is_legal(c) && design_column(c) == col) {
                             return std::to_string(value(r));
                           }
                         }
                         return "-";
                       });
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace psma
