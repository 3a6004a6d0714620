#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "psma/costmodel.hpp"
#include "psma/report.hpp"
#include "psma/simulator.hpp"
#include "psma/taxonomy.hpp"
#include "psma/workload.hpp"

namespace py = pybind11;
using namespace psma;

namespace {

ArchConfig resolve(const std::string& design, const std::string& mode) {
  ArchConfig c = design.find('/') == std::string::npos ? sota_preset(design) : parse_design_id(design);
  if (!mode.empty()) c.mode = parse_mode(mode);
  return c;
}

std::string simulate_json(const std::string& design, const std::string& precision,
                          std::int64_t is_size, std::int64_t ws_size, std::int64_t os_size,
                          std::uint64_t seed, std::int64_t max_cycles, const std::string& mode,
                          const std::string& hs) {
  const ArchConfig c = resolve(design, mode);
  const Precision p = parse_precision(precision);
  const Workload w = make_random_workload(is_size, ws_size, os_size, p, seed);
  SimOptions opt;
  opt.max_cycles = max_cycles;
  SimResult r;
  {
    py::gil_scoped_release release;
    r = run_design(c, w, opt, parse_hs_orientation(hs));
  }
  nlohmann::json j;
  j["design_id"] = design_id(c);
  j["mode"] = to_string(c.mode);
  j["precision"] = to_string(p);
  j["completed"] = r.completed;
  j["cycles"] = r.cycles;
  j["l1_ops"] = r.l1_ops;
  j["paper_ops"] = r.paper_ops;
  j["utilization"] = r.utilization;
  j["act_bits_per_cycle"] = r.act_bits_per_cycle;
  j["w_bits_per_cycle"] = r.w_bits_per_cycle;
  j["out_bits_per_cycle"] = r.out_bits_per_cycle;
  j["outputs"] = r.outputs;
  j["oracle_pass"] = r.completed && r.outputs == golden_outputs(w);
  return j.dump();
}

}  // namespace

PYBIND11_MODULE(_psma, m) {
  m.doc() = "Precision-scalable MAC array simulator and cost model";
  m.attr("__version__") = kToolVersion;

  static py::exception<Error> error(m, "PsmaError", PyExc_RuntimeError);
  static py::exception<UnsupportedPreset> unsupported(m, "UnsupportedPreset", error.ptr());
  static py::exception<OverflowError> overflow(m, "OverflowError", error.ptr());
  static py::exception<WorkloadTooSmall> too_small(m, "WorkloadTooSmall", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const UnsupportedPreset& e) {
      unsupported(e.what());
    } catch (const OverflowError& e) {
      overflow(e.what());
    } catch (const WorkloadTooSmall& e) {
      too_small(e.what());
    } catch (const Error& e) {
      error(e.what());
    }
  });

  m.def("enumerate_designs", [](const std::string& filter) {
        nlohmann::json arr = nlohmann::json::array();
        for (const ArchConfig& c : select_designs(filter)) {
          auto j = config_to_json(c);
          j["design_id"] = design_id(c);
          arr.push_back(j);
        }
        return arr.dump();
      }, py::arg("filter") = "all");

  m.def("validate", [](const std::string& config_json) {
        std::vector<std::string> out;
        for (const Violation& v : validate_config(config_from_json(nlohmann::json::parse(config_json)))) {
          out.push_back(v.message);
        }
        return out;
      }, py::arg("config_json"));

  m.def("preset", [](const std::string& name) {
        const ArchConfig c = sota_preset(name);
        auto j = config_to_json(c);
        j["design_id"] = design_id(c);
        return j.dump();
      }, py::arg("name"));
  m.def("preset_names", &sota_preset_names);

  m.def("supported_precisions", [](const std::string& design, const std::string& mode) {
        std::vector<std::string> out;
        for (const Precision& p : supported_precisions(resolve(design, mode))) out.push_back(to_string(p));
        return out;
      }, py::arg("design"), py::arg("mode") = "");

  m.def("cost_report", [](const std::string& design, const std::string& mode, const std::string& hs) {
        return to_json(cost_report(resolve(design, mode), parse_hs_orientation(hs))).dump();
      }, py::arg("design"), py::arg("mode") = "", py::arg("hs") = "broadcast-activations");

  m.def("golden", [](const std::string& precision, std::int64_t is_size, std::int64_t ws_size,
                     std::int64_t os_size, std::uint64_t seed) {
        return golden_outputs(make_random_workload(is_size, ws_size, os_size, parse_precision(precision), seed));
      }, py::arg("precision"), py::arg("is_size"), py::arg("ws_size"), py::arg("os_size"), py::arg("seed"));

  m.def("simulate", &simulate_json, py::arg("design"), py::arg("precision"), py::arg("is_size") = 64,
        py::arg("ws_size") = 64, py::arg("os_size") = 256, py::arg("seed") = 1, py::arg("max_cycles") = 0,
        py::arg("mode") = "", py::arg("hs") = "broadcast-activations");

  m.def("bench_csv", [](const std::string& filter, const std::vector<std::string>& precisions,
                        const std::vector<std::uint64_t>& seeds, std::int64_t is_size, std::int64_t ws_size,
                        std::int64_t os_size) {
        BenchmarkRun run;
        run.filter = filter;
        for (const auto& p : precisions) run.precisions.push_back(parse_precision(p));
        run.seeds = seeds;
        run.workload = {is_size, ws_size, os_size, 0};
        BenchResult result;
        {
          py::gil_scoped_release release;
          result = run_bench(run);
        }
        return py::make_tuple(bench_csv(result), result.all_pass);
      }, py::arg("filter") = "all", py::arg("precisions") = std::vector<std::string>{},
      py::arg("seeds") = std::vector<std::uint64_t>{1}, py::arg("is_size") = 64, py::arg("ws_size") = 64,
      py::arg("os_size") = 256);

  m.def("rng_algorithm", [] { return std::string(rng_algorithm()); });
}
