#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "dwc/circuit.hpp"
#include "dwc/config.hpp"
#include "dwc/diag.hpp"
#include "dwc/encoding.hpp"
#include "dwc/env.hpp"
#include "dwc/errors.hpp"
#include "dwc/model_io.hpp"
#include "dwc/policy.hpp"
#include "dwc/resources.hpp"
#include "dwc/rtl.hpp"
#include "dwc/train.hpp"

namespace py = pybind11;

namespace {

dwc::DwcPolicy trained_policy(const dwc::RunConfig& config) {
  auto result = dwc::train(config);
  return result.policy();
}

py::dict report_dict(const dwc::ResourceReport& r) {
  py::dict d;
  d["lut_count"] = r.lut_count;
  d["popcount_luts"] = r.popcount_luts;
  d["ff_estimate"] = r.ff_estimate;
  d["pipeline_stages"] = r.pipeline_stages;
  d["logic_depth"] = r.logic_depth;
  d["latency_cycles"] = r.latency_cycles;
  d["sram_words"] = r.sram_words;
  d["output_bits"] = r.output_bits;
  return d;
}

}  // namespace

PYBIND11_MODULE(_dwc, m) {
  m.doc() = "Weightless controllers: encoding, training, compilation";

  py::register_exception<dwc::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<dwc::ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<dwc::DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<dwc::StateError>(m, "StateError", PyExc_RuntimeError);
  py::register_exception<dwc::FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<dwc::ProtocolError>(m, "ProtocolError", PyExc_RuntimeError);
  py::register_exception<dwc::NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("compute_thresholds", [](int bits) { return dwc::compute_thresholds(bits).thresholds; },
        py::arg("bits"), "Thermometer thresholds in normalized units.");
  m.def("inverse_normal_cdf", &dwc::inverse_normal_cdf, py::arg("p"));

  py::class_<dwc::DwcPolicy>(m, "Policy")
      .def_property_readonly("obs_dim", &dwc::DwcPolicy::obs_dim)
      .def_property_readonly("act_dim", &dwc::DwcPolicy::act_dim)
      .def_property_readonly("bits", &dwc::DwcPolicy::bits)
      .def_property_readonly("group_size", [](const dwc::DwcPolicy& p) { return p.head.group_size; })
      .def_property_readonly("frozen", [](const dwc::DwcPolicy& p) { return p.stats.frozen(); })
      .def("action",
           [](const dwc::DwcPolicy& p, const std::vector<double>& obs) {
             return dwc::policy_action(dwc::with_mode(p, dwc::PolicyMode::kHard), obs);
           },
           py::arg("obs"), "Discrete-mode action in [-1, 1] for a raw observation.")
      .def("hard_logits",
           [](const dwc::DwcPolicy& p, const std::vector<double>& x) { return dwc::hard_logits(p, x); },
           py::arg("normalized"))
      .def("relaxed_logits",
           [](const dwc::DwcPolicy& p, const std::vector<double>& x) {
             return dwc::relaxed_logits(p, x);
           },
           py::arg("normalized"))
      .def("save",
           [](const dwc::DwcPolicy& p, const std::string& path) { dwc::save_policy(p, path); },
           py::arg("path"))
      .def("connection_histogram",
           [](const dwc::DwcPolicy& p) { return dwc::input_connection_histogram(p).counts; })
      .def("bit_histogram", &dwc::bit_index_histogram);

  m.def("random_policy",
        [](int obs_dim, int act_dim, int layers, int width, int arity, int bits,
           std::uint64_t seed) {
          dwc::PolicyShape s;
          s.obs_dim = obs_dim;
          s.act_dim = act_dim;
          s.layers = layers;
          s.width = width;
          s.arity = arity;
          s.bits = bits;
          auto p = dwc::init_policy(s, seed);
          // Identity statistics so the policy can be evaluated and compiled.
          p.stats = dwc::RunningStats(2, std::vector<double>(static_cast<std::size_t>(obs_dim), 0.0),
                                      std::vector<double>(static_cast<std::size_t>(obs_dim), 2.0),
                                      true);
          p.mode = dwc::PolicyMode::kHard;
          return p;
        },
        py::arg("obs_dim"), py::arg("act_dim"), py::arg("layers") = 2, py::arg("width") = 64,
        py::arg("arity") = 6, py::arg("bits") = 15, py::arg("seed") = 0,
        "Untrained policy with identity statistics.");
  m.def("load_policy", &dwc::load_policy, py::arg("path"));

  m.def("config_hash",
        [](const std::string& text) { return dwc::config_hash(dwc::parse_config(text)); },
        py::arg("text"));
  m.def("preset_names", &dwc::preset_names);
  m.def("train",
        [](const std::string& text) {
          auto config = dwc::parse_config(text);
          py::gil_scoped_release release;
          return trained_policy(config);
        },
        py::arg("config_text"), "Trains from config text and returns the frozen policy.");
  m.def("evaluate",
        [](const dwc::DwcPolicy& p, const std::string& env, int episodes, double noise,
           std::uint64_t seed) {
          auto e = dwc::make_env(env);
          return dwc::evaluate(p, *e, {episodes, noise, seed}).returns;
        },
        py::arg("policy"), py::arg("env") = "pendulum", py::arg("episodes") = 10,
        py::arg("noise") = 0.0, py::arg("seed") = 0, "Per-episode returns.");

  py::class_<dwc::CompiledCircuit>(m, "Circuit")
      .def_readonly("obs_dim", &dwc::CompiledCircuit::obs_dim)
      .def_readonly("act_dim", &dwc::CompiledCircuit::act_dim)
      .def_readonly("group_size", &dwc::CompiledCircuit::group_size)
      .def_readonly("adc_bits", &dwc::CompiledCircuit::adc_bits)
      .def_readonly("out_frac", &dwc::CompiledCircuit::out_frac)
      .def("eval",
           [](const dwc::CompiledCircuit& c, const std::vector<std::int64_t>& raw) {
             return dwc::circuit_eval(c, raw);
           },
           py::arg("raw"), "Action words for raw ADC words.")
      .def("action_table",
           [](const dwc::CompiledCircuit& c, int d) {
             const auto t = c.action_table(d);
             return std::vector<std::int32_t>(t.begin(), t.end());
           },
           py::arg("action"))
      .def("rtl", &dwc::emit_rtl, py::arg("stages") = 0, py::arg("module_name") = "dwc_policy")
      .def("resources",
           [](const dwc::CompiledCircuit& c, int stages) {
             return report_dict(dwc::resource_report(c, stages));
           },
           py::arg("stages") = 0)
      .def("save", &dwc::save_circuit, py::arg("path"));

  m.def("compile",
        [](const dwc::DwcPolicy& p, int adc_bits, int out_frac) {
          return dwc::binarize(p, dwc::default_adc(p.stats, adc_bits), out_frac);
        },
        py::arg("policy"), py::arg("adc_bits") = 16, py::arg("out_frac") = dwc::kDefaultOutFrac);
  m.def("load_circuit", &dwc::load_circuit, py::arg("path"));
  m.def("reference_action_words",
        [](const dwc::DwcPolicy& p, const dwc::CompiledCircuit& c,
           const std::vector<std::int64_t>& raw) {
          dwc::AdcSpec adc;
          adc.bits = c.adc_bits;
          adc.scale = c.adc_scale;
          return dwc::reference_action_words(p, adc, raw, c.out_frac);
        },
        py::arg("policy"), py::arg("circuit"), py::arg("raw"));
}
