#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cope/checkpoint.hpp"
#include "cope/config.hpp"
#include "cope/models.hpp"
#include "cope/rng.hpp"
#include "cope/tensor.hpp"
#include "cope/verify.hpp"

namespace py = pybind11;
using cope::Matrix;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() == 1) return Matrix(1, a.shape(0), std::vector<double>(a.data(), a.data() + a.size()));
  if (a.ndim() != 2) throw std::invalid_argument("expected a 1-d or 2-d array, got " + std::to_string(a.ndim()) + "-d");
  return Matrix(a.shape(0), a.shape(1), std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

Array to_array(const cope::DenseTensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array out(shape);
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

// nlohmann::json <-> Python via the json module; configs are small.
nlohmann::json to_json(const py::object& o) {
  const std::string text = py::module_::import("json").attr("dumps")(o).cast<std::string>();
  return nlohmann::json::parse(text);
}

py::object from_json(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

cope::ExperimentConfig make_config(const std::string& command, const py::dict& overrides) {
  cope::ExperimentConfig c = cope::default_config(cope::command_from_string(command));
  return cope::apply_json(std::move(c), to_json(overrides));
}

class Model {
 public:
  explicit Model(cope::ModelSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

  static Model from_config(const py::dict& overrides, std::uint64_t seed) {
    const cope::ExperimentConfig c = make_config("train-regression", overrides);
    cope::validate(c);
    cope::ModelSpec spec = cope::build_model(c);
    auto rng = cope::make_stream(seed, "python.init");
    cope::initialize(spec, rng, cope::InitOptions{c.init_scale});
    return Model(std::move(spec));
  }

  Array forward(const std::vector<Array>& variables) const {
    std::vector<Matrix> inputs;
    for (const auto& v : variables) inputs.push_back(to_matrix(v));
    return to_array(cope::product_compose(spec_, inputs));
  }

  std::vector<std::size_t> variable_dims() const { return spec_.variable_dims; }
  std::size_t output_dim() const { return spec_.output_dim(); }
  std::size_t parameter_count() const { return spec_.parameter_count(); }

  py::dict parameters() const {
    py::dict out;
    spec_.for_each_parameter([&](const std::string& name, const Matrix& m) { out[py::str(name)] = to_array(m); });
    return out;
  }

  void save(const std::string& path) const { cope::save_checkpoint(spec_, path); }
  static Model load(const std::string& path) { return Model(cope::load_checkpoint(path)); }
  py::object to_dict() const { return from_json(cope::model_to_json(spec_)); }

 private:
  cope::ModelSpec spec_;
};

py::dict suite_dict(const cope::SuiteReport& r) {
  py::dict metrics;
  for (const auto& [k, v] : r.metrics) metrics[py::str(k)] = v;
  py::dict d;
  d["suite"] = r.suite;
  d["trials"] = r.trials;
  d["max_deviation"] = r.max_deviation;
  d["tolerance"] = r.tolerance;
  d["passed"] = r.passed;
  d["metrics"] = metrics;
  d["seconds"] = r.seconds;
  return d;
}

}  // namespace

PYBIND11_MODULE(_cope, m) {
  m.doc() = "Coupled polynomial expansions: models, tensor kernels and verification suites";

  py::register_exception<std::invalid_argument>(m, "InvalidArgument", PyExc_ValueError);

  m.def("khatri_rao", [](const Array& a, const Array& b) { return to_array(cope::khatri_rao(to_matrix(a), to_matrix(b))); },
        py::arg("a"), py::arg("b"), "Column-wise Kronecker product of two matrices with equal column counts.");

  m.def(
      "mode_unfold",
      [](const Array& t, std::size_t mode) {
        cope::Shape shape(t.shape(), t.shape() + t.ndim());
        cope::DenseTensor dense(shape, std::vector<double>(t.data(), t.data() + t.size()));
        return to_array(cope::mode_unfold(dense, mode));
      },
      py::arg("tensor"), py::arg("mode"), "Mode-`mode` unfolding (1-based) of a dense tensor.");

  m.def(
      "cp_reconstruct",
      [](const std::vector<Array>& factors) {
        std::vector<Matrix> fs;
        for (const auto& f : factors) fs.push_back(to_matrix(f));
        return to_array(cope::cp_reconstruct(fs));
      },
      py::arg("factors"), "Dense tensor sum_r a1[:, r] o a2[:, r] o ... from CP factor matrices.");

  m.def("derive_seed", &cope::derive_seed, py::arg("master"), py::arg("concern"));
  m.def("suite_names", &cope::suite_names);
  m.def(
      "run_suite", [](const std::string& name, std::uint64_t seed) { return suite_dict(cope::run_suite(name, seed)); },
      py::arg("name"), py::arg("seed") = 0);

  m.def(
      "default_config",
      [](const std::string& command) {
        return from_json(cope::to_json(cope::default_config(cope::command_from_string(command))));
      },
      py::arg("command"), "Fully materialized default config for a command, as a dict.");

  m.def(
      "run_experiment",
      [](const std::string& command, const py::dict& overrides) {
        const cope::ExperimentConfig c = make_config(command, overrides);
        std::ostringstream log;
        int status = 0;
        {
          py::gil_scoped_release release;
          status = cope::run_experiment(c, log);
        }
        return py::make_tuple(status, log.str());
      },
      py::arg("command"), py::arg("overrides") = py::dict(),
      "Runs a command with config overrides; returns (exit status, log text).");

  py::class_<Model>(m, "Model")
      .def_static("from_config", &Model::from_config, py::arg("overrides") = py::dict(), py::arg("seed") = 0,
                  "Builds and initializes the model described by train-regression config keys.")
      .def_static("load", &Model::load, py::arg("path"))
      .def("save", &Model::save, py::arg("path"))
      .def("forward", &Model::forward, py::arg("variables"),
           "One (batch, dim) array per input variable; returns (batch, out_dim).")
      .def("parameters", &Model::parameters)
      .def("to_dict", &Model::to_dict)
      .def_property_readonly("variable_dims", &Model::variable_dims)
      .def_property_readonly("output_dim", &Model::output_dim)
      .def_property_readonly("parameter_count", &Model::parameter_count);
}
