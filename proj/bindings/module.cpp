#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "vropt/harness.hpp"

namespace py = pybind11;
using namespace vropt;

PYBIND11_MODULE(_vropt, m) {
  m.doc() = "Variance-reduced stochastic optimization toolkit";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::class_<SparseVector>(m, "SparseVector")
      .def(py::init<>())
      .def_readwrite("indices", &SparseVector::indices)
      .def_readwrite("values", &SparseVector::values)
      .def("dot", &SparseVector::dot)
      .def("squared_norm", &SparseVector::squared_norm);

  py::class_<SparseDataset, std::shared_ptr<SparseDataset>>(m, "SparseDataset")
      .def(py::init<>())
      .def_readwrite("rows", &SparseDataset::rows)
      .def_readwrite("labels", &SparseDataset::labels)
      .def_readwrite("dim", &SparseDataset::dim)
      .def_readwrite("normalized", &SparseDataset::normalized)
      .def_readonly("zero_rows", &SparseDataset::zero_rows)
      .def("__len__", &SparseDataset::size);

  m.def("parse_libsvm", [](const std::string& text) { return parse_libsvm(text); });
  m.def("load_libsvm_file", &load_libsvm_file);
  m.def("to_libsvm", &to_libsvm);
  m.def("normalize_rows", [](const SparseDataset& ds) { return normalize_rows(ds); });
  m.def("synth_regression", &synth_regression, py::arg("n"), py::arg("d"), py::arg("noise_std"),
        py::arg("seed"));
  m.def("synth_classification", &synth_classification, py::arg("n"), py::arg("d"),
        py::arg("noise_std"), py::arg("seed"));

  py::enum_<LossKind>(m, "LossKind")
      .value("Logistic", LossKind::Logistic)
      .value("Squared", LossKind::Squared);

  py::class_<Regularizer>(m, "Regularizer")
      .def(py::init<double, double>(), py::arg("lambda1") = 0.0, py::arg("lambda2") = 0.0)
      .def_readwrite("lambda1", &Regularizer::lambda1)
      .def_readwrite("lambda2", &Regularizer::lambda2)
      .def("value", &Regularizer::value)
      .def("smooth", &Regularizer::smooth);

  m.def("prox", [](const Regularizer& reg, double eta, const DenseVec& y) {
    return prox(reg, eta, y);
  });
  m.def("soft_threshold", &soft_threshold);

  py::enum_<LipschitzSource>(m, "LipschitzSource")
      .value("Analytic", LipschitzSource::Analytic)
      .value("Override", LipschitzSource::Override);

  py::class_<LipschitzInfo>(m, "LipschitzInfo")
      .def_readonly("value", &LipschitzInfo::value)
      .def_readonly("source", &LipschitzInfo::source);

  py::class_<CompositeObjective>(m, "CompositeObjective")
      .def(py::init<std::shared_ptr<const SparseDataset>, LossKind, Regularizer, bool>(),
           py::arg("data"), py::arg("loss"), py::arg("reg"), py::arg("smooth_fold"))
      .def_property_readonly("n", &CompositeObjective::n)
      .def_property_readonly("dim", &CompositeObjective::dim)
      .def_property_readonly("smooth_fold", &CompositeObjective::smooth_fold)
      .def_property_readonly("remapped_labels", &CompositeObjective::remapped_labels)
      .def("component_value", &CompositeObjective::component_value)
      .def("component_grad", &CompositeObjective::component_grad)
      .def("loss_value", &CompositeObjective::loss_value)
      .def("full_grad", &CompositeObjective::full_grad)
      .def("value", &CompositeObjective::value)
      .def("lipschitz", &CompositeObjective::lipschitz)
      .def("set_lipschitz_override", &CompositeObjective::set_lipschitz_override)
      .def("set_eval_chunks", &CompositeObjective::set_eval_chunks);

  py::class_<SnapshotContext>(m, "SnapshotContext")
      .def_readonly("x_tilde", &SnapshotContext::x_tilde)
      .def_readonly("mu_tilde", &SnapshotContext::mu_tilde);

  m.def("make_snapshot", &make_snapshot);
  m.def("svrg_estimate", &svrg_estimate);
  m.def("minibatch_estimate",
        [](const CompositeObjective& obj, const SnapshotContext& ctx,
           const std::vector<std::size_t>& batch, const DenseVec& x) {
          return minibatch_estimate(obj, ctx, batch, x);
        });
  m.def("delta_b", &delta_b);

  py::class_<VarianceDiag>(m, "VarianceDiag")
      .def_readonly("empirical_mse", &VarianceDiag::empirical_mse)
      .def_readonly("bound", &VarianceDiag::bound)
      .def_readonly("delta_b", &VarianceDiag::delta_b)
      .def_readonly("std_error", &VarianceDiag::std_error)
      .def_readonly("exhaustive", &VarianceDiag::exhaustive);

  m.def("variance_diag", &variance_diag, py::arg("obj"), py::arg("ctx"), py::arg("x"),
        py::arg("b"), py::arg("f_star"), py::arg("sample_seed") = 0);

  py::enum_<Algo>(m, "Algo")
      .value("SvrgI", Algo::SvrgI)
      .value("SvrgII", Algo::SvrgII)
      .value("ProxSvrg", Algo::ProxSvrg)
      .value("VrsgdI", Algo::VrsgdI)
      .value("VrsgdII", Algo::VrsgdII)
      .value("KatyushaI", Algo::KatyushaI)
      .value("KatyushaII", Algo::KatyushaII)
      .value("Sgd", Algo::Sgd)
      .value("FullProxGd", Algo::FullProxGd);

  m.def("algo_name", &algo_name);

  py::enum_<UpdateMode>(m, "UpdateMode")
      .value("SmoothGradient", UpdateMode::SmoothGradient)
      .value("Proximal", UpdateMode::Proximal);

  py::class_<OptimizerSpec>(m, "OptimizerSpec")
      .def(py::init<>())
      .def_readwrite("algo", &OptimizerSpec::algo)
      .def_readwrite("eta0", &OptimizerSpec::eta0)
      .def_readwrite("eta_is_auto", &OptimizerSpec::eta_is_auto)
      .def_readwrite("alpha", &OptimizerSpec::alpha)
      .def_readwrite("fixed_lr", &OptimizerSpec::fixed_lr)
      .def_readwrite("m", &OptimizerSpec::m)
      .def_readwrite("epochs", &OptimizerSpec::epochs)
      .def_readwrite("batch", &OptimizerSpec::batch)
      .def_readwrite("seed", &OptimizerSpec::seed)
      .def_readwrite("update_mode", &OptimizerSpec::update_mode)
      .def_readwrite("init", &OptimizerSpec::init)
      .def_readwrite("pinned_indices", &OptimizerSpec::pinned_indices);

  py::class_<TraceRecord>(m, "TraceRecord")
      .def_readonly("epoch", &TraceRecord::epoch)
      .def_readonly("passes", &TraceRecord::passes)
      .def_readonly("wall_s", &TraceRecord::wall_s)
      .def_readonly("objective", &TraceRecord::objective)
      .def_readonly("gap", &TraceRecord::gap);

  py::class_<Trace>(m, "Trace")
      .def_readonly("records", &Trace::records)
      .def_readonly("final_point", &Trace::final_point)
      .def_readonly("final_objective", &Trace::final_objective)
      .def_readonly("diverged", &Trace::diverged)
      .def_readonly("diverged_epoch", &Trace::diverged_epoch)
      .def_readonly("candidate_last", &Trace::candidate_last)
      .def_readonly("candidate_mean", &Trace::candidate_mean);

  m.def("vrsgd_step_size", &vrsgd_step_size);
  m.def("sgd_step_size", &sgd_step_size);
  m.def("katyusha_combine", &katyusha_combine);
  m.def("katyusha_w1", &katyusha_w1);

  m.def("run", &run);
  m.def("run_vrsgd_sc", &run_vrsgd_sc);
  m.def("run_vrsgd_nsc", &run_vrsgd_nsc);
  m.def("run_svrg", &run_svrg);
  m.def("run_katyusha", &run_katyusha);
  m.def("run_sgd", &run_sgd);

  py::class_<ProxGdResult>(m, "ProxGdResult")
      .def_readonly("x_star", &ProxGdResult::x_star)
      .def_readonly("f_star", &ProxGdResult::f_star)
      .def_readonly("residual", &ProxGdResult::residual)
      .def_readonly("converged", &ProxGdResult::converged)
      .def_readonly("iterations", &ProxGdResult::iterations);

  m.def("run_full_proxgd", &run_full_proxgd, py::arg("obj"), py::arg("eta"), py::arg("tol"),
        py::arg("max_iters"), py::arg("init") = DenseVec{});

  py::class_<ReferenceSolution>(m, "ReferenceSolution")
      .def_readonly("x_star", &ReferenceSolution::x_star)
      .def_readonly("f_star", &ReferenceSolution::f_star)
      .def_readonly("residual", &ReferenceSolution::residual);

  m.def("compute_reference", &compute_reference, py::arg("obj"), py::arg("tol") = 1e-12,
        py::arg("cache_path") = std::string{}, py::arg("max_iters") = std::size_t{1000000});
  m.def("run_experiment", &run_experiment);
  m.def("sweep_learning_rates", &sweep_learning_rates, py::arg("obj"), py::arg("base"),
        py::arg("etas"), py::arg("ref"), py::arg("parallel") = true);
  m.def("content_hash", &content_hash);
  m.def("trace_filename", &trace_filename);
  m.def("trace_csv", [](const Trace& t) {
    std::ostringstream os;
    write_trace_csv(os, t);
    return os.str();
  });
  m.def("write_trace_csv_file", &write_trace_csv_file);
  m.def("read_trace_csv_file", &read_trace_csv_file);
}
