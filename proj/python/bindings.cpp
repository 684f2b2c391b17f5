#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "robustmargin/analysis.hpp"
#include "robustmargin/dataset.hpp"
#include "robustmargin/experiments.hpp"
#include "robustmargin/gd_trainer.hpp"
#include "robustmargin/loss.hpp"
#include "robustmargin/margin_solvers.hpp"
#include "robustmargin/version.hpp"

namespace py = pybind11;
using namespace robustmargin;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Robust max-margin classification: losses, solvers, and gradient descent";
  m.attr("__version__") = kVersion;

  py::register_exception<GenerationError>(m, "GenerationError");
  py::register_exception<ParseError>(m, "CsvParseError");
  py::register_exception<InfeasibleError>(m, "InfeasibleError");
  py::register_exception<DivergenceError>(m, "DivergenceError");

  py::class_<Dataset>(m, "Dataset")
      .def(py::init([](Eigen::MatrixXd features, Eigen::VectorXd labels,
                       Eigen::VectorXd budgets) {
             Dataset d{std::move(features), std::move(labels), std::move(budgets)};
             d.validate();
             return d;
           }),
           py::arg("features"), py::arg("labels"), py::arg("budgets"))
      .def_readonly("features", &Dataset::features)
      .def_readonly("labels", &Dataset::labels)
      .def_readonly("budgets", &Dataset::budgets)
      .def_property_readonly("n", &Dataset::n)
      .def_property_readonly("p", &Dataset::p);

  py::class_<GroundTruth>(m, "GroundTruth")
      .def(py::init<Eigen::VectorXd>(), py::arg("true_weights"))
      .def_readonly("true_weights", &GroundTruth::true_weights);

  m.def("generate_gaussian", &generate_gaussian, py::arg("n"), py::arg("p"),
        py::arg("seed"), py::arg("min_margin") = 0.0);

  py::class_<BudgetScheme>(m, "BudgetScheme")
      .def_static("uniform", &BudgetScheme::uniform, py::arg("eps"))
      .def_static("fraction", &BudgetScheme::fraction, py::arg("q"), py::arg("eps"),
                  py::arg("seed"))
      .def_static("uniform_random", &BudgetScheme::uniform_random, py::arg("lo"),
                  py::arg("hi"), py::arg("seed"));

  m.def("assign_budgets", &assign_budgets, py::arg("dataset"), py::arg("scheme"));
  m.def("apply_adversarial_shift", &apply_adversarial_shift, py::arg("dataset"),
        py::arg("truth"));
  m.def("is_linearly_separable", &is_linearly_separable, py::arg("dataset"));
  m.def("save_csv", &save_csv, py::arg("dataset"), py::arg("path"));
  m.def("load_csv", &load_csv, py::arg("path"));

  py::class_<TailParams>(m, "TailParams")
      .def_readonly("a", &TailParams::a)
      .def_readonly("c", &TailParams::c)
      .def_readonly("tau", &TailParams::tau)
      .def_readonly("mu", &TailParams::mu);

  py::class_<LossSpec>(m, "LossSpec")
      .def_readonly("name", &LossSpec::name)
      .def_readonly("smoothness", &LossSpec::smoothness)
      .def_readonly("tail", &LossSpec::tail)
      .def("value", [](const LossSpec& s, double u) { return s.value(u); }, py::arg("u"))
      .def("first_derivative",
           [](const LossSpec& s, double u) { return s.first_derivative(u); }, py::arg("u"))
      .def("second_derivative",
           [](const LossSpec& s, double u) { return s.second_derivative(u); }, py::arg("u"));

  m.def("logistic", &logistic);
  m.def("robust_margins", &robust_margins, py::arg("dataset"), py::arg("w"));
  m.def("robust_loss", &robust_loss, py::arg("spec"), py::arg("dataset"), py::arg("w"));
  m.def("robust_loss_gradient", &robust_loss_gradient, py::arg("spec"), py::arg("dataset"),
        py::arg("w"));
  m.def("inner_max_oracle", &inner_max_oracle, py::arg("spec"), py::arg("x"), py::arg("y"),
        py::arg("eps"), py::arg("w"), py::arg("trials"), py::arg("seed"));
  m.def("spectral_norm", &spectral_norm, py::arg("X"));
  m.def("max_step_size", &max_step_size, py::arg("spec"), py::arg("dataset"));

  py::enum_<SolverStatus>(m, "SolverStatus")
      .value("optimal", SolverStatus::optimal)
      .value("infeasible", SolverStatus::infeasible)
      .value("not_converged", SolverStatus::not_converged);

  py::class_<MarginSolution>(m, "MarginSolution")
      .def_readonly("weights", &MarginSolution::weights)
      .def_readonly("duals", &MarginSolution::duals)
      .def_readonly("support_set", &MarginSolution::support_set)
      .def_readonly("objective_norm", &MarginSolution::objective_norm)
      .def_readonly("status", &MarginSolution::status)
      .def("__repr__", [](const MarginSolution& s) {
        return "<MarginSolution status=" + to_string(s.status) +
               " norm=" + std::to_string(s.objective_norm) + ">";
      });

  m.def("solve_svm", &solve_svm, py::arg("dataset"), py::arg("margins"));
  m.def("max_margin", &max_margin, py::arg("dataset"));
  m.def("rm_existence_bound", &rm_existence_bound, py::arg("dataset"));
  m.def("rm_uniform_closed_form", &rm_uniform_closed_form, py::arg("max_margin_solution"),
        py::arg("eps"));
  m.def("rm_solve", &rm_solve, py::arg("dataset"));
  m.def("support_vectors", &support_vectors, py::arg("solution"), py::arg("dataset"),
        py::arg("tol") = kSupportTol);
  m.def("kkt_residual", &kkt_residual, py::arg("solution"), py::arg("dataset"));
  m.def("theta", &theta, py::arg("solution"), py::arg("dataset"));
  m.def("save_solution_json", &save_solution_json, py::arg("solution"), py::arg("path"));
  m.def("load_solution_json", &load_solution_json, py::arg("path"));

  py::class_<GDConfig>(m, "GDConfig")
      .def(py::init([](double step_size, std::size_t max_iters,
                       std::vector<std::size_t> schedule,
                       std::optional<Eigen::VectorXd> initial_weights) {
             GDConfig cfg;
             cfg.step_size = step_size;
             cfg.max_iters = max_iters;
             cfg.checkpoint_schedule = std::move(schedule);
             cfg.initial_weights = std::move(initial_weights);
             return cfg;
           }),
           py::arg("step_size"), py::arg("max_iters"),
           py::arg("checkpoint_schedule") = std::vector<std::size_t>{},
           py::arg("initial_weights") = std::nullopt)
      .def_readwrite("step_size", &GDConfig::step_size)
      .def_readwrite("max_iters", &GDConfig::max_iters)
      .def_readwrite("checkpoint_schedule", &GDConfig::checkpoint_schedule);

  py::class_<Checkpoint>(m, "Checkpoint")
      .def_readonly("t", &Checkpoint::t)
      .def_readonly("weights", &Checkpoint::weights)
      .def_readonly("loss", &Checkpoint::loss)
      .def_readonly("grad_norm", &Checkpoint::grad_norm)
      .def_readonly("weight_norm", &Checkpoint::weight_norm)
      .def_readonly("s_value", &Checkpoint::s_value)
      .def_readonly("robust_margins", &Checkpoint::robust_margins);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("checkpoints", &Trajectory::checkpoints)
      .def_readonly("step_size", &Trajectory::step_size)
      .def_readonly("reference", &Trajectory::reference);

  m.def("geometric_checkpoints", &geometric_checkpoints, py::arg("total_iters"),
        py::arg("ratio") = 1.3);
  m.def("default_initial_weights", &default_initial_weights, py::arg("dataset"));
  m.def("train", &train, py::arg("spec"), py::arg("dataset"), py::arg("config"),
        py::arg("reference") = std::nullopt);
  m.def("direction", &direction, py::arg("w"));
  m.def("s_sequence", &s_sequence, py::arg("trajectory"), py::arg("reference"),
        py::arg("eta"));
  m.def("save_trajectory_csv", &save_trajectory_csv, py::arg("trajectory"), py::arg("path"));

  m.def("direction_distance", &direction_distance, py::arg("w1"), py::arg("w2"));
  m.def("generalization_error", &generalization_error, py::arg("w"), py::arg("truth"));
  m.def("generalization_error_mc", &generalization_error_mc, py::arg("w"), py::arg("truth"),
        py::arg("samples"), py::arg("seed"), py::arg("eps") = 0.0);

  py::class_<ConvergenceFit>(m, "ConvergenceFit")
      .def_readonly("coefficient", &ConvergenceFit::coefficient)
      .def_readonly("r_squared", &ConvergenceFit::r_squared)
      .def_readonly("checkpoints_used", &ConvergenceFit::checkpoints_used);

  m.def("fit_log_rate", &fit_log_rate, py::arg("trajectory"), py::arg("target"));
}
