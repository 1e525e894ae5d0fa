#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tvsvm/cpd.hpp"
#include "tvsvm/error.hpp"
#include "tvsvm/gradcheck.hpp"
#include "tvsvm/model_io.hpp"
#include "tvsvm/skeleton.hpp"
#include "tvsvm/trainer.hpp"

namespace py = pybind11;
using namespace tvsvm;

namespace {

std::span<const double> as_span(const Eigen::Ref<const Vector>& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

Dataset make_dataset(const RowMatrix& X, const Eigen::VectorXi& y) {
  Dataset d{X, y, {}};
  d.validate();
  return d;
}

py::dict report_dict(const CpdReport& r) {
  py::dict d;
  d["verdict"] = std::string(verdict_name(r.verdict));
  d["passed"] = r.passed();
  d["trials"] = r.trials;
  d["tolerance"] = r.tolerance;
  d["min_normalized_form"] = r.min_normalized_form;
  d["min_eig_after_berg"] = r.min_eig_after_berg;
  if (r.witness) {
    d["witness_form"] = r.witness->quadratic_form;
    d["witness_coefficients"] = r.witness->coefficients;
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_tvsvm, m) {
  m.doc() = "Total variation SVM with learned virtual support vectors and deep multiple kernels";

  auto base = py::register_exception<Error>(m, "TvsvmError", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<NonDifferentiable>(m, "NonDifferentiable", numerical.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());

  py::class_<KernelSpec>(m, "KernelSpec")
      .def(py::init([](const std::string& record) { return KernelSpec::from_record(record); }), py::arg("record"))
      .def_property_readonly("family", [](const KernelSpec& k) { return std::string(family_name(k.family())); })
      .def_property_readonly("params", &KernelSpec::params)
      .def("to_record", &KernelSpec::to_record)
      .def("__repr__", [](const KernelSpec& k) { return "KernelSpec('" + k.to_record() + "')"; })
      .def(py::self == py::self);

  m.def("kernel_families", [] {
    std::vector<std::string> out;
    for (auto f : kAllFamilies) out.emplace_back(family_name(f));
    return out;
  });
  m.def(
      "kernel_forward",
      [](const KernelSpec& k, const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& z) {
        return kernel_forward(k, as_span(x), as_span(z));
      },
      py::arg("kernel"), py::arg("x"), py::arg("z"), "Closed-form kernel value.");
  m.def(
      "neural_forward",
      [](const KernelSpec& k, const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& z) {
        return neural_forward(k, as_span(x), encode_support(k, as_span(z)));
      },
      py::arg("kernel"), py::arg("x"), py::arg("z"), "Kernel value through the activation decomposition.");

  m.def("simplex_weights", &simplex_weights, py::arg("raw"));

  m.def(
      "make_two_moons",
      [](int n, double noise, std::uint64_t seed) {
        auto d = make_two_moons(n, noise, seed);
        return py::make_tuple(d.X, d.y);
      },
      py::arg("n"), py::arg("noise"), py::arg("seed"));
  m.def(
      "make_xor_gaussians",
      [](int n, double spread, std::uint64_t seed) {
        auto d = make_xor_gaussians(n, spread, seed);
        return py::make_tuple(d.X, d.y);
      },
      py::arg("n"), py::arg("spread"), py::arg("seed"));

  m.def("temporal_chunking", &temporal_chunking, py::arg("trajectory"), py::arg("chunks") = 4);
  m.def(
      "video_descriptor",
      [](const std::vector<RowMatrix>& frames, int chunks) {
        if (frames.empty()) throw DataError("a video needs at least one frame");
        SkeletonSequence s{static_cast<int>(frames[0].rows()), static_cast<int>(frames[0].cols()), frames};
        return video_descriptor(s, chunks);
      },
      py::arg("frames"), py::arg("chunks") = 4, "Descriptor of a list of joints x coords frames.");

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("C", &TrainConfig::C)
      .def_readwrite("num_support", &TrainConfig::num_support)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("lr0", &TrainConfig::lr0)
      .def_readwrite("lr_decay", &TrainConfig::lr_decay)
      .def_readwrite("lr_min", &TrainConfig::lr_min)
      .def_readwrite("lr_max", &TrainConfig::lr_max)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("jitter_scale", &TrainConfig::jitter_scale)
      .def_readwrite("freeze_support", &TrainConfig::freeze_support)
      .def_readwrite("mkl_layers", &TrainConfig::mkl_layers)
      .def_readwrite("hidden_units", &TrainConfig::hidden_units)
      .def_readwrite("leak_slope", &TrainConfig::leak_slope)
      .def_property(
          "kernels", [](const TrainConfig& c) { return format_kernel_list(c.kernels); },
          [](TrainConfig& c, const std::string& list) { c.kernels = parse_kernel_list(list); })
      .def_property(
          "init", [](const TrainConfig& c) { return std::string(init_strategy_name(c.init)); },
          [](TrainConfig& c, const std::string& s) { c.init = parse_init_strategy(s); })
      .def_property(
          "activation", [](const TrainConfig& c) { return std::string(activation_name(c.activation)); },
          [](TrainConfig& c, const std::string& s) { c.activation = parse_activation(s); })
      .def_property(
          "normalize", [](const TrainConfig& c) { return std::string(normalize_mode_name(c.normalize)); },
          [](TrainConfig& c, const std::string& s) { c.normalize = parse_normalize_mode(s); });

  py::class_<TvSvmModel>(m, "Model")
      .def_readonly("support", &TvSvmModel::support)
      .def_readonly("alpha", &TvSvmModel::alpha)
      .def_readonly("bias", &TvSvmModel::bias)
      .def_readonly("classes", &TvSvmModel::classes)
      .def_readonly("frozen_support", &TvSvmModel::frozen_support)
      .def_property_readonly("layer_sizes", [](const TvSvmModel& mo) { return mo.net.layer_sizes(); })
      .def_property_readonly("simplex_weights", [](const TvSvmModel& mo) { return mo.net.weights(); })
      .def_property_readonly("kernels", [](const TvSvmModel& mo) { return format_kernel_list(mo.kernels); })
      .def(
          "decision",
          [](const TvSvmModel& mo, const RowMatrix& X) {
            const RowMatrix Xt = mo.input_transform.apply(X);
            Eigen::MatrixXd out(Xt.rows(), mo.num_heads());
            for (Eigen::Index i = 0; i < Xt.rows(); ++i) out.row(i) = decision_scores(mo, row_span(Xt, i)).transpose();
            return out;
          },
          py::arg("X"), "Scores, one column per head.")
      .def(
          "predict",
          [](const TvSvmModel& mo, const RowMatrix& X) {
            const RowMatrix Xt = mo.input_transform.apply(X);
            Eigen::VectorXi out(Xt.rows());
            for (Eigen::Index i = 0; i < Xt.rows(); ++i) out[i] = predict_label(mo, row_span(Xt, i));
            return out;
          },
          py::arg("X"))
      .def(
          "accuracy",
          [](const TvSvmModel& mo, const RowMatrix& X, const Eigen::VectorXi& y) {
            return evaluate_accuracy(mo, make_dataset(X, y));
          },
          py::arg("X"), py::arg("y"))
      .def(
          "objective",
          [](const TvSvmModel& mo, const RowMatrix& X, const Eigen::VectorXi& y, double C) {
            const auto o = objective(mo, mo.input_transform.apply(X), y, C);
            return py::make_tuple(o.regularizer, o.loss, o.total);
          },
          py::arg("X"), py::arg("y"), py::arg("C"), "(regularizer, loss, total)")
      .def("save", [](const TvSvmModel& mo, const std::filesystem::path& p) { save_model(mo, p); })
      .def("to_json", &model_to_json)
      .def_static("load", &load_model)
      .def_static("from_json", [](const std::string& text) { return model_from_json(text); });

  m.def(
      "train",
      [](const RowMatrix& X, const Eigen::VectorXi& y, const TrainConfig& config, std::optional<RowMatrix> X_val,
         std::optional<Eigen::VectorXi> y_val) {
        const Dataset data = make_dataset(X, y);
        std::optional<Dataset> val;
        if (X_val && y_val) val = make_dataset(*X_val, *y_val);
        TrainReport r;
        {
          py::gil_scoped_release release;
          r = train(data, config, val ? &*val : nullptr);
        }
        py::list epochs;
        for (const auto& e : r.epochs) {
          py::dict d;
          d["epoch"] = e.epoch;
          d["J_total"] = e.objective.total;
          d["J_reg"] = e.objective.regularizer;
          d["J_loss"] = e.objective.loss;
          d["lr"] = e.lr;
          d["train_acc"] = e.train_accuracy;
          d["val_acc"] = e.validation_accuracy ? py::cast(*e.validation_accuracy) : py::none();
          epochs.append(d);
        }
        py::dict report;
        report["epochs"] = epochs;
        report["diverged"] = r.diverged;
        report["failure"] = r.failure;
        report["seconds"] = r.seconds;
        return py::make_tuple(std::move(r.model), report);
      },
      py::arg("X"), py::arg("y"), py::arg("config") = TrainConfig{}, py::arg("X_val") = py::none(),
      py::arg("y_val") = py::none(), "Returns (model, report).");

  m.def(
      "cpd_check",
      [](const KernelSpec& k, const RowMatrix& points, int trials, std::uint64_t seed, bool certified) {
        CpdOptions o;
        o.trials = trials;
        o.seed = seed;
        const GramMatrix gram = gram_matrix(k, points);
        return report_dict(certified ? cpd_certified_check(gram, points, o) : cpd_sampled_check(gram, points, o));
      },
      py::arg("kernel"), py::arg("points"), py::arg("trials") = 1000, py::arg("seed") = 0,
      py::arg("certified") = true);
  m.def(
      "gram_matrix", [](const KernelSpec& k, const RowMatrix& points) { return gram_matrix(k, points).values; },
      py::arg("kernel"), py::arg("points"));
  m.def(
      "berg_transform",
      [](const Eigen::MatrixXd& gram) { return berg_transform(GramMatrix{gram, {}}).values; }, py::arg("gram"));
  m.def(
      "gradcheck",
      [](const std::string& kernels, int mkl_layers, bool frozen, const std::string& mode, std::uint64_t seed) {
        auto inst = random_gradcheck_instance(parse_kernel_list(kernels), mkl_layers, frozen, parse_activation(mode), seed);
        const auto r = check_gradients(inst.model, inst.X, inst.y, inst.C);
        py::dict d;
        d["passed"] = r.passed;
        d["max_error"] = r.max_error;
        d["worst_parameter"] = r.worst_parameter;
        d["parameters"] = r.parameters;
        return d;
      },
      py::arg("kernels"), py::arg("mkl_layers") = 2, py::arg("frozen") = false, py::arg("mode") = "smoothed",
      py::arg("seed") = 0, "Central-difference check of the model gradients on a random small problem.");
}
