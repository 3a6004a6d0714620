// psma: enumerate, validate, simulate and benchmark precision-scalable MAC arrays.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "format.hpp"
#include "psma/costmodel.hpp"
#include "psma/report.hpp"
#include "psma/simulator.hpp"
#include "psma/taxonomy.hpp"
#include "psma/workload.hpp"

using namespace psma;
using nlohmann::json;

namespace {

struct WorkloadFlags {
  std::int64_t is_size = 64;
  std::int64_t ws_size = 64;
  std::int64_t os_size = 256;
  bool paper_scale = false;
  std::vector<std::string> loops;
  std::int64_t max_cycles = 0;

  void add_to(CLI::App* app) {
    app->add_option("--is-size", is_size, "Product of the input-sharing loops")->check(CLI::PositiveNumber);
    app->add_option("--ws-size", ws_size, "Product of the weight-sharing loops")->check(CLI::PositiveNumber);
    app->add_option("--os-size", os_size, "Product of the output-sharing loops")->check(CLI::PositiveNumber);
    app->add_flag("--paper-scale", paper_scale, "Ideal workload: is=64, ws=64, os=4096");
    app->add_option("--loop", loops,
                    "Named loop NAME=N (B, K, C, OX, OY, FX, FY); replaces the category sizes");
    app->add_option("--max-cycles", max_cycles, "Stop after this many cycles (oracle skipped)");
  }

  WorkloadSpec spec() const {
    WorkloadSpec s{is_size, ws_size, os_size, max_cycles};
    if (paper_scale) {
      s.is_size = kIdealIsSize;
      s.ws_size = kIdealWsSize;
      s.os_size = kIdealOsSize;
    }
    if (!loops.empty()) {
      std::map<char, std::int64_t> size{{'i', 1}, {'w', 1}, {'o', 1}};
      for (const std::string& l : loops) {
        const auto eq = l.find('=');
        if (eq == std::string::npos) throw Error("malformed --loop '" + l + "' (expected NAME=N)");
        const std::int64_t n = std::stoll(l.substr(eq + 1));
        if (n <= 0) throw Error("loop size must be positive in '" + l + "'");
        size[loop_category(l.substr(0, eq))] *= n;
      }
      s.is_size = size['i'];
      s.ws_size = size['w'];
      s.os_size = size['o'];
    }
    return s;
  }
};

struct DesignFlags {
  std::string config;
  std::string preset;
  std::string mode;
  std::string hs = "broadcast-activations";

  void add_to(CLI::App* app) {
    app->add_option("--config", config, "Design id L4-L3/CONFIG-BG-L2, or a JSON config file");
    app->add_option("--preset", preset, "Named state-of-the-art preset");
    app->add_option("--mode", mode, "Override the scalability mode (1D, 2D-A, 2D-S)");
    app->add_option("--hs", hs, "HS orientation: broadcast-activations or broadcast-weights");
  }

  ArchConfig resolve() const {
    if (config.empty() == preset.empty()) throw Error("give exactly one of --config or --preset");
    ArchConfig c;
    if (!preset.empty()) {
      c = sota_preset(preset);
    } else if (config.find('/') == std::string::npos && config.ends_with(".json")) {
      std::ifstream in(config);
      if (!in) throw Error("cannot open " + config);
      c = config_from_json(json::parse(in));
    } else {
      c = parse_design_id(config);
    }
    if (!mode.empty()) c.mode = parse_mode(mode);
    return c;
  }

  HsOrientation orientation() const { return parse_hs_orientation(hs); }
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

std::vector<Precision> parse_precisions(const std::vector<std::string>& texts) {
  std::vector<Precision> out;
  for (const auto& t : texts) out.push_back(parse_precision(t));
  return out;
}

int cmd_enumerate(const std::string& filter, const std::vector<std::string>& presets,
                  const std::string& format, const std::string& out) {
  std::vector<ArchConfig> designs;
  if (presets.empty()) {
    designs = select_designs(filter);
  } else {
    for (const auto& p : presets) {
      for (const ArchConfig& c : select_designs("preset=" + p)) designs.push_back(c);
    }
  }
  std::ostringstream s;
  if (format == "json") {
    json arr = json::array();
    for (const ArchConfig& c : designs) {
      json j = config_to_json(c);
      j["design_id"] = design_id(c);
      arr.push_back(j);
    }
    s << arr.dump(2) << "\n";
  } else if (format == "csv") {
    s << "design_id,l4,l3,config,bg,l2,mode,presets\n";
    for (const ArchConfig& c : designs) {
      std::string names;
      for (const auto& n : sota_preset_names()) {
        const ArchConfig p = sota_preset(n);
        if (p.l4 == c.l4 && p.l3 == c.l3 && p.l2 == c.l2 && p.bg == c.bg && p.config == c.config) {
          names += (names.empty() ? "" : ";") + n;
        }
      }
      s << csv_line({design_id(c), to_string(c.l4), to_string(c.l3), to_string(c.config),
                     to_string(c.bg), to_string(c.l2), to_string(c.mode), names})
        << "\n";
    }
  } else {
    for (const ArchConfig& c : designs) s << design_id(c) << "  " << to_string(c.mode) << "\n";
  }
  emit(s.str(), out);
  return 0;
}

int cmd_validate(const DesignFlags& d) {
  const ArchConfig c = d.resolve();
  const auto v = validate_config(c);
  if (v.empty()) {
    std::cout << design_id(c) << " (" << to_string(c.mode) << "): valid\n";
    return 0;
  }
  std::cout << design_id(c) << " (" << to_string(c.mode) << "): invalid\n";
  for (const Violation& x : v) std::cout << "  " << x.message << "\n";
  return 1;
}

int cmd_preset(const std::vector<std::string>& names, const std::string& format) {
  const auto list = names.empty() ? sota_preset_names() : names;
  json arr = json::array();
  for (const auto& n : list) {
    const ArchConfig c = sota_preset(n);
    if (format == "json") {
      json j = config_to_json(c);
      j["name"] = n;
      j["design_id"] = design_id(c);
      arr.push_back(j);
    } else {
      std::cout << n << ": " << design_id(c) << " " << to_string(c.mode) << " ("
                << (is_legal(c) ? "valid" : "invalid") << ")\n";
    }
  }
  if (format == "json") std::cout << arr.dump(2) << "\n";
  return 0;
}

int cmd_simulate(const DesignFlags& d, const WorkloadFlags& wf,
                 const std::vector<std::string>& precision_texts, std::uint64_t seed,
                 const std::string& trace_path, const std::string& format, const std::string& out) {
  const ArchConfig c = d.resolve();
  const auto v = validate_config(c);
  if (!v.empty()) throw Error("invalid config: " + v.front().message);
  std::vector<Precision> precisions = parse_precisions(precision_texts);
  if (precisions.empty()) precisions.push_back(supported_precisions(c).front());
  const WorkloadSpec spec = wf.spec();

  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path);
    if (!trace) throw Error("cannot write " + trace_path);
  }
  bool pass = true;
  std::vector<BenchRow> rows;
  for (const Precision& p : precisions) {
    BenchRow row;
    row.config = c;
    row.precision = p;
    row.extended = is_extended_precision(c.mode, p);
    row.seed = seed;
    row.workload = spec;
    row.cost = cost_report(c, d.orientation());
    const Workload w = make_random_workload(spec.is_size, spec.ws_size, spec.os_size, p, seed);
    SimOptions opt;
    opt.max_cycles = spec.max_cycles;
    opt.trace = trace.is_open() ? &trace : nullptr;
    row.sim = run_design(c, w, opt, d.orientation());
    if (row.sim.completed) {
      row.oracle = row.sim.outputs == golden_outputs(w) ? OracleStatus::Pass : OracleStatus::Fail;
    }
    row.sim.outputs.clear();
    if (row.oracle == OracleStatus::Fail) pass = false;
    rows.push_back(std::move(row));
  }

  std::ostringstream s;
  if (format == "csv") {
    s << csv_line(bench_csv_header()) << "\n";
    for (const auto& r : rows) s << csv_line(bench_csv_row(r)) << "\n";
  } else {
    json arr = json::array();
    for (const auto& r : rows) arr.push_back(to_json(r));
    s << arr.dump(2) << "\n";
  }
  emit(s.str(), out);
  return pass ? 0 : 1;
}

int cmd_bench(BenchmarkRun run, const std::string& out, const std::string& save_run) {
  if (!out.empty()) {
    run.csv_path = out + ".csv";
    run.matrix_path = out + ".matrix.txt";
    run.metadata_path = out + ".meta.json";
  }
  run.metadata.rng_algorithm = rng_algorithm();
  run.metadata.timestamp = utc_timestamp();
  if (!save_run.empty()) {
    std::ofstream f(save_run);
    if (!f) throw Error("cannot write " + save_run);
    f << to_json(run).dump(2) << "\n";
  }
  const BenchResult result = run_bench(run);
  const std::string csv = bench_csv(result);
  const std::string matrix = bench_matrix(result, run.matrix_metric);
  if (run.csv_path.empty()) {
    std::cout << csv;
  } else {
    emit(csv, run.csv_path);
  }
  if (run.matrix_path.empty()) {
    std::cerr << matrix;
  } else {
    emit(matrix, run.matrix_path);
  }
  if (!run.metadata_path.empty()) {
    json meta = to_json(run);
    std::int64_t failed = 0;
    for (const BenchRow& r : result.rows) failed += r.oracle == OracleStatus::Fail ? 1 : 0;
    meta["rows"] = result.rows.size();
    meta["oracle_failures"] = failed;
    emit(meta.dump(2) + "\n", run.metadata_path);
  }
  for (const BenchRow& r : result.rows) {
    if (r.oracle == OracleStatus::Fail) {
      std::cerr << "oracle failure: " << design_id(r.config) << " " << to_string(r.precision)
                << " seed " << r.seed << (r.error.empty() ? "" : ": " + r.error) << "\n";
    }
  }
  return result.all_pass ? 0 : 1;
}

int cmd_report(const std::string& filter, const std::vector<std::string>& presets,
               const std::string& hs, const std::string& format, const std::string& metric,
               const std::string& out) {
  std::vector<ArchConfig> designs;
  if (presets.empty()) {
    designs = select_designs(filter);
  } else {
    for (const auto& p : presets) designs.push_back(sota_preset(p));
  }
  std::vector<CostReport> reports;
  for (const ArchConfig& c : designs) reports.push_back(cost_report(c, parse_hs_orientation(hs)));
  std::ostringstream s;
  if (format == "json") {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    s << arr.dump(2) << "\n";
  } else if (format == "text") {
    s << cost_matrix(reports, metric);
  } else {
    s << csv_line(cost_csv_header()) << "\n";
    for (const auto& r : reports) {
      for (const auto& row : cost_csv_rows(r)) s << csv_line(row) << "\n";
    }
  }
  emit(s.str(), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and cost model for precision-scalable MAC arrays"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string format;
  std::string out;
  std::string filter = "all";
  std::vector<std::string> presets;

  auto* enumerate = app.add_subcommand("enumerate", "List the design space");
  enumerate->add_option("--filter", filter, "key=value[,key=value] over l4,l3,l2,bg,config,mode,id,preset");
  enumerate->add_option("--preset", presets, "Only the design of this preset (repeatable)");
  enumerate->add_option("--format", format, "text, csv or json")->check(CLI::IsMember({"text", "csv", "json"}));
  enumerate->add_option("--out", out, "Output file");

  DesignFlags design;
  auto* validate = app.add_subcommand("validate", "Check a config against the design constraints");
  design.add_to(validate);

  std::vector<std::string> preset_names;
  auto* preset = app.add_subcommand("preset", "Show state-of-the-art presets");
  preset->add_option("names", preset_names, "Preset names (default: all)");
  preset->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

  WorkloadFlags workload;
  std::vector<std::string> precisions;
  std::vector<std::uint64_t> seeds;
  std::string trace;
  auto* simulate = app.add_subcommand("simulate", "Simulate one design and check the oracle");
  design.add_to(simulate);
  workload.add_to(simulate);
  simulate->add_option("--precision", precisions, "AxW, e.g. 8x4 (repeatable)");
  simulate->add_option("--seed", seeds, "Workload seed");
  simulate->add_option("--trace", trace, "Write a JSON-lines cycle trace");
  simulate->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  simulate->add_option("--out", out, "Output file");

  std::string metric = "reg_write_bits_per_op";
  std::string run_file;
  std::string save_run;
  std::string hs = "broadcast-activations";
  auto* bench = app.add_subcommand("bench", "Sweep designs x precisions x seeds");
  bench->add_option("--filter", filter, "Design filter (see enumerate)");
  bench->add_option("--preset", presets, "Preset names (repeatable); replaces --filter");
  bench->add_option("--precision", precisions, "AxW (repeatable; default: all supported)");
  bench->add_option("--seed", seeds, "Seeds (repeatable; default 1)");
  workload.add_to(bench);
  bench->add_option("--metric", metric, "Matrix metric");
  bench->add_option("--hs", hs, "HS orientation");
  bench->add_option("--run", run_file, "Load the run spec from JSON (other flags ignored)");
  bench->add_option("--save-run", save_run, "Write the run spec as JSON");
  bench->add_option("--out", out, "Output prefix: PREFIX.csv, PREFIX.matrix.txt, PREFIX.meta.json");

  auto* report = app.add_subcommand("report", "Emit cost-model reports");
  report->add_option("--filter", filter, "Design filter (see enumerate)");
  report->add_option("--preset", presets, "Preset names (repeatable)");
  report->add_option("--hs", hs, "HS orientation");
  report->add_option("--format", format, "csv, json or text (matrix)")
      ->check(CLI::IsMember({"csv", "json", "text"}));
  report->add_option("--metric", metric, "Matrix metric for --format text");
  report->add_option("--out", out, "Output file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*enumerate) return cmd_enumerate(filter, presets, format.empty() ? "text" : format, out);
    if (*validate) return cmd_validate(design);
    if (*preset) return cmd_preset(preset_names, format.empty() ? "text" : format);
    if (*simulate) {
      return cmd_simulate(design, workload, precisions, seeds.empty() ? 1 : seeds.front(), trace,
                          format.empty() ? "json" : format, out);
    }
    if (*bench) {
      BenchmarkRun run;
      if (!run_file.empty()) {
        std::ifstream in(run_file);
        if (!in) throw Error("cannot open " + run_file);
        run = benchmark_run_from_json(json::parse(in));
      } else {
        run.filter = filter;
        run.presets = presets;
        run.precisions = parse_precisions(precisions);
        if (!seeds.empty()) run.seeds = seeds;
        run.workload = workload.spec();
        run.hs = parse_hs_orientation(hs);
        run.matrix_metric = metric;
      }
      return cmd_bench(run, out, save_run);
    }
    if (*report) {
      if (metric == "reg_write_bits_per_op") metric = "register_bits";
      return cmd_report(filter, presets, hs, format.empty() ? "csv" : format, metric, out);
    }
  } catch (const UnsupportedPreset& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
