#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sequnet/checkpoint.hpp"
#include "sequnet/cli.hpp"
#include "sequnet/codec.hpp"
#include "sequnet/generate.hpp"
#include "sequnet/gradcheck_suite.hpp"
#include "sequnet/profile.hpp"
#include "sequnet/stream.hpp"

namespace py = pybind11;
using namespace sequnet;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

py::array_t<float> to_numpy(const Tensor<float>& t) {
  py::array_t<float> a({t.channels(), t.time()});
  std::copy(t.data().begin(), t.data().end(), a.mutable_data());
  return a;
}

py::array_t<float> to_numpy(const std::vector<float>& v) {
  py::array_t<float> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

// [channels, time] array.
Tensor<float> to_tensor(const FloatArray& a) {
  if (a.ndim() != 2) throw ShapeError("expected a [channels, time] array");
  const auto c = static_cast<int>(a.shape(0));
  const auto t = static_cast<int>(a.shape(1));
  return Tensor<float>(c, t, std::vector<float>(a.data(), a.data() + a.size()));
}

py::array_t<float> predict_any(Model<float>& m, const py::object& x) {
  if (m.config().io_mode == IoMode::embedding_tied) {
    const auto s = x.cast<std::vector<int>>();
    return to_numpy(predict(m, std::span<const int>(s)));
  }
  return to_numpy(predict(m, to_tensor(x.cast<FloatArray>())));
}

std::unique_ptr<Stream<float>> make_stream(Model<float>& m, const py::object& context) {
  if (m.config().io_mode == IoMode::embedding_tied) {
    const auto s = context.cast<std::vector<int>>();
    return std::make_unique<Stream<float>>(m, std::span<const int>(s));
  }
  return std::make_unique<Stream<float>>(m, to_tensor(context.cast<FloatArray>()));
}

py::dict activations_dict(const ActivationCounts& a) {
  py::dict d;
  d["input_length"] = a.input_length;
  d["frames"] = a.frames;
  d["channel_frames"] = a.channel_frames;
  d["total"] = a.total();
  return d;
}

}  // namespace

PYBIND11_MODULE(_sequnet, m) {
  m.doc() = "Causal multi-scale convolutional sequence models";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  py::enum_<Variant>(m, "Variant")
      .value("plain", Variant::plain)
      .value("residual", Variant::residual)
      .value("dilated_baseline", Variant::dilated_baseline);
  py::enum_<IoMode>(m, "IoMode")
      .value("embedding_tied", IoMode::embedding_tied)
      .value("linear", IoMode::linear)
      .value("pitch_logits", IoMode::pitch_logits);

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("variant", &ModelConfig::variant)
      .def_readwrite("levels", &ModelConfig::levels)
      .def_readwrite("stride", &ModelConfig::stride)
      .def_readwrite("filter_width", &ModelConfig::filter_width)
      .def_readwrite("hidden", &ModelConfig::hidden)
      .def_readwrite("channels", &ModelConfig::channels)
      .def_readwrite("residual_features", &ModelConfig::residual_features)
      .def_readwrite("depth", &ModelConfig::depth)
      .def_readwrite("stacks", &ModelConfig::stacks)
      .def_readwrite("dropout", &ModelConfig::dropout)
      .def_readwrite("input_dropout", &ModelConfig::input_dropout)
      .def_readwrite("leaky_slope", &ModelConfig::leaky_slope)
      .def_readwrite("weight_norm", &ModelConfig::weight_norm)
      .def_readwrite("io_mode", &ModelConfig::io_mode)
      .def_readwrite("vocab_size", &ModelConfig::vocab_size)
      .def_readwrite("embedding_dim", &ModelConfig::embedding_dim)
      .def_readwrite("in_channels", &ModelConfig::in_channels)
      .def_readwrite("out_channels", &ModelConfig::out_channels)
      .def("set", &ModelConfig::set, py::arg("key"), py::arg("value"))
      .def("validate", &ModelConfig::validate)
      .def("to_text", &ModelConfig::to_text)
      .def_static("from_text", &ModelConfig::from_text)
      .def("__eq__", [](const ModelConfig& a, const ModelConfig& b) { return a == b; })
      .def("__repr__", &ModelConfig::to_text);

  m.def("receptive_field", &receptive_field_analytic, py::arg("config"));
  m.def("min_input_length", &min_input_length, py::arg("config"));

  py::class_<Model<float>>(m, "Model")
      .def_property_readonly("config", &Model<float>::config)
      .def_property_readonly("min_input_length", &Model<float>::min_input_length)
      .def_property_readonly("receptive_field", [](const Model<float>& x) { return x.graph().receptive_field(); })
      .def_property_readonly("phase_period", [](const Model<float>& x) { return x.graph().phase_period(); })
      .def_property_readonly("parameter_count", [](const Model<float>& x) { return x.params().element_count(); })
      .def("parameter_names",
           [](Model<float>& x) {
             std::vector<std::string> names;
             for (auto* p : x.params().pointers()) names.push_back(p->name);
             return names;
           })
      .def("predict", &predict_any, py::arg("inputs"),
           "Logits [out, frames]; inputs are symbols (embedding io) or a [channels, time] array.")
      .def("save", [](const Model<float>& x, const std::string& path) { save_checkpoint(path, x); }, py::arg("path"));

  m.def("build_model", &build_model, py::arg("config"), py::arg("seed") = 1);
  m.def("load_model", [](const std::string& path) { return model_from_checkpoint(load_checkpoint(path)); },
        py::arg("path"));

  py::class_<Stream<float>>(m, "Stream")
      .def(py::init(&make_stream), py::arg("model"), py::arg("context"), py::keep_alive<1, 2>())
      .def_property_readonly("first_logits", [](const Stream<float>& s) { return to_numpy(s.first_logits()); })
      .def("step",
           [](Stream<float>& s, const py::object& x) {
             if (py::isinstance<py::int_>(x)) return to_numpy(s.step(x.cast<int>()));
             const auto f = x.cast<std::vector<float>>();
             return to_numpy(s.step(std::span<const float>(f)));
           })
      .def_property_readonly("steps", &Stream<float>::steps)
      .def_property_readonly("updates_performed", &Stream<float>::updates_performed)
      .def_property_readonly("last_step_levels", &Stream<float>::last_step_levels)
      .def("amortized_updates", &Stream<float>::amortized_updates);

  m.def(
      "generate_symbols",
      [](Model<float>& model, const std::vector<int>& seed, long n, double temperature, std::uint64_t rng_seed,
         bool naive) {
        std::mt19937_64 rng(rng_seed);
        return generate_symbols(model, seed, n, temperature, rng, naive);
      },
      py::arg("model"), py::arg("seed"), py::arg("steps"), py::arg("temperature") = 0.95, py::arg("rng_seed") = 1,
      py::arg("naive") = false);

  m.def(
      "count_activations",
      [](Model<float>& model, long input_length) { return activations_dict(count_activations(model, input_length)); },
      py::arg("model"), py::arg("input_length"));
  m.def(
      "activation_series",
      [](int levels, int stride, long input_length) {
        const auto b = analytic_activation_bound(levels, stride, input_length);
        py::dict d;
        d["per_level"] = b.per_level;
        d["series"] = b.series;
        d["cap"] = b.cap;
        return d;
      },
      py::arg("levels"), py::arg("stride"), py::arg("input_length"));
  m.def(
      "measure_updates",
      [](Model<float>& model, long steps) {
        const auto u = measure_updates(model, steps);
        py::dict d;
        d["per_level"] = u.per_level;
        d["amortized"] = u.amortized;
        d["expected"] = u.expected;
        return d;
      },
      py::arg("model"), py::arg("steps"));

  m.def("mu_law_encode", py::overload_cast<double>(&mu_law_encode), py::arg("x"));
  m.def("mu_law_decode", py::overload_cast<int>(&mu_law_decode), py::arg("code"));

  m.def(
      "gradcheck",
      [](int instances, std::uint64_t seed) {
        std::vector<std::tuple<std::string, double, bool>> rows;
        for (const auto& e : run_gradcheck_suite(instances, seed)) rows.emplace_back(e.name, e.max_rel_error, e.passed);
        return rows;
      },
      py::arg("instances") = 20, py::arg("seed") = 1, "(name, max relative error, passed) per check.");

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "sequnet");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs one command; returns (exit code, stdout, stderr).");
}
