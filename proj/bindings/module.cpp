#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "seqgrad/parse.hpp"
#include "seqgrad/perturb.hpp"
#include "seqgrad/report.hpp"
#include "seqgrad/scenarios.hpp"

namespace py = pybind11;
using namespace seqgrad;

namespace {

std::string run_summary_json(const ProcessRun& run, const Scenario& scenario,
                             const Schedule& schedule, const FlowSettings& flow,
                             const StoppingCriteria& stop) {
  RunMetadata meta;
  meta.scenario = scenario.name;
  return run_to_json(run, scenario.f, scenario.domain, schedule, flow, stop, meta).dump(2);
}

std::string trajectory_csv(const ProcessRun& run, int dim) {
  std::ostringstream out;
  write_trajectory_csv(out, run, dim);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "sequential block-coordinate gradient flow lab (C++ core)";

  py::register_exception<EvalError>(m, "EvalError");
  py::register_exception<ParseError>(m, "ExprParseError");

  py::class_<AnalyticFunction>(m, "AnalyticFunction")
      .def_property_readonly("arity", &AnalyticFunction::arity)
      .def("value", [](const AnalyticFunction& f, const Point& x) { return f.value(x); })
      .def("gradient", [](const AnalyticFunction& f, const Point& x) { return f.gradient(x); })
      .def("hessian",
           [](const AnalyticFunction& f, const Point& x) {
             const int mdim = f.arity();
             const auto flat = f.hessian(x);
             std::vector<std::vector<double>> rows(mdim, std::vector<double>(mdim));
             for (int i = 0; i < mdim; ++i)
               for (int j = 0; j < mdim; ++j) rows[i][j] = flat[i * mdim + j];
             return rows;
           })
      .def("__str__", [](const AnalyticFunction& f) { return to_string(f); });

  m.def("parse_function", &parse_function, py::arg("text"), py::arg("arity"),
        "Parse the scenario expression grammar into an analytic function.");
  m.def("function_to_string", [](const AnalyticFunction& f) { return to_string(f); });

  py::class_<AnalyticMap>(m, "AnalyticMap")
      .def_readonly("arity", &AnalyticMap::arity)
      .def("value", &AnalyticMap::value)
      .def_readonly("components", &AnalyticMap::components);

  m.def("compose", &compose, py::arg("f"), py::arg("h"));

  py::class_<Domain>(m, "Domain")
      .def_static("ball", &Domain::ball, py::arg("center"), py::arg("radius"))
      .def_static("level_set", &Domain::level_set, py::arg("boundary_fns"), py::arg("anchor"))
      .def_property_readonly("dim", &Domain::dim)
      .def("contains", &Domain::contains, py::arg("x"), py::arg("tol") = 0.0)
      .def("sample_boundary", &Domain::sample_boundary, py::arg("n"), py::arg("seed"));

  py::class_<BoundaryViolation>(m, "BoundaryViolation")
      .def_readonly("point", &BoundaryViolation::point)
      .def_readonly("component", &BoundaryViolation::component)
      .def_readonly("dphi", &BoundaryViolation::dphi)
      .def_readonly("dfa", &BoundaryViolation::dfa);

  py::class_<BoundaryReport>(m, "BoundaryReport")
      .def_readonly("samples_checked", &BoundaryReport::samples_checked)
      .def_readonly("violations", &BoundaryReport::violations)
      .def("passed", &BoundaryReport::passed);

  m.def("check_inward", &check_inward);
  m.def("check_condition_ii_prime", &check_condition_ii_prime, py::arg("phi"), py::arg("domain"),
        py::arg("samples"), py::arg("eps_sign") = 1e-10);

  py::class_<FlowSettings>(m, "FlowSettings")
      .def(py::init<>())
      .def_readwrite("eps_stat", &FlowSettings::eps_stat)
      .def_readwrite("h_init", &FlowSettings::h_init)
      .def_readwrite("h_min", &FlowSettings::h_min)
      .def_readwrite("h_max", &FlowSettings::h_max)
      .def_readwrite("rtol", &FlowSettings::rtol)
      .def_readwrite("atol", &FlowSettings::atol)
      .def_readwrite("t_max", &FlowSettings::t_max)
      .def_readwrite("newton_polish", &FlowSettings::newton_polish)
      .def_readwrite("newton_tol", &FlowSettings::newton_tol)
      .def_readwrite("max_polish_iters", &FlowSettings::max_polish_iters)
      .def_readwrite("polish_trust_radius", &FlowSettings::polish_trust_radius);

  py::enum_<TerminationReason>(m, "TerminationReason")
      .value("stationary", TerminationReason::Stationary)
      .value("time_budget", TerminationReason::TimeBudget)
      .value("left_domain", TerminationReason::LeftDomain);

  py::class_<TrajectorySample>(m, "TrajectorySample")
      .def_readonly("t", &TrajectorySample::t)
      .def_readonly("x", &TrajectorySample::x)
      .def_readonly("phi", &TrajectorySample::phi)
      .def_readonly("grad_norm", &TrajectorySample::grad_norm)
      .def_readonly("slice_grad_norm", &TrajectorySample::slice_grad_norm);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("samples", &Trajectory::samples)
      .def_readonly("arc_length", &Trajectory::arc_length)
      .def_readonly("terminal", &Trajectory::terminal)
      .def_readonly("reason", &Trajectory::reason)
      .def_readonly("polished", &Trajectory::polished)
      .def_readonly("polish_singular", &Trajectory::polish_singular);

  m.def("project_gradient", &project_gradient, py::arg("f"), py::arg("x"), py::arg("free"));
  m.def("integrate_slice", &integrate_slice, py::arg("f"), py::arg("domain"), py::arg("start"),
        py::arg("free"), py::arg("settings") = FlowSettings{});
  m.def("arc_length", &arc_length);

  py::class_<Schedule>(m, "Schedule")
      .def_static("cyclic_blocks", &Schedule::cyclic_blocks, py::arg("d"), py::arg("blocks"),
                  py::arg("first_block") = 0)
      .def_static("explicit_sets", &Schedule::explicit_sets, py::arg("sets"))
      .def_static("random_fair", &Schedule::random_fair, py::arg("blocks"), py::arg("seed"),
                  py::arg("window"))
      .def_property_readonly("period", &Schedule::period)
      .def("block_for_step", &Schedule::block_for_step, py::arg("k"));

  m.def("next_block", &next_block, py::arg("schedule"), py::arg("k"));

  py::class_<FairnessReport>(m, "FairnessReport")
      .def_readonly("passed", &FairnessReport::passed)
      .def_readonly("horizon", &FairnessReport::horizon)
      .def_readonly("appearances", &FairnessReport::appearances)
      .def_readonly("max_gap", &FairnessReport::max_gap)
      .def_readonly("missing", &FairnessReport::missing);

  m.def("fairness_check", &fairness_check, py::arg("schedule"), py::arg("dim"),
        py::arg("horizon"));

  py::class_<StoppingCriteria>(m, "StoppingCriteria")
      .def(py::init<>())
      .def_readwrite("eps_crit", &StoppingCriteria::eps_crit)
      .def_readwrite("eps_move", &StoppingCriteria::eps_move)
      .def_readwrite("window", &StoppingCriteria::window)
      .def_readwrite("max_steps", &StoppingCriteria::max_steps);

  py::enum_<CriticalPointInfo::Kind>(m, "CriticalKind")
      .value("minimum", CriticalPointInfo::Kind::Minimum)
      .value("saddle", CriticalPointInfo::Kind::Saddle)
      .value("maximum", CriticalPointInfo::Kind::Maximum)
      .value("degenerate", CriticalPointInfo::Kind::Degenerate);

  py::class_<CriticalPointInfo>(m, "CriticalPointInfo")
      .def_readonly("point", &CriticalPointInfo::point)
      .def_readonly("grad_norm", &CriticalPointInfo::grad_norm)
      .def_readonly("is_critical", &CriticalPointInfo::is_critical)
      .def_readonly("morse_index", &CriticalPointInfo::morse_index)
      .def_readonly("nondegenerate", &CriticalPointInfo::nondegenerate)
      .def_readonly("classification", &CriticalPointInfo::classification)
      .def_readonly("eigenvalues", &CriticalPointInfo::eigenvalues);

  m.def("classify_point", &classify_point, py::arg("f"), py::arg("q"),
        py::arg("eps_crit") = 1e-7, py::arg("eps_eig") = 1e-6);
  m.def("refine_critical_point", &refine_critical_point, py::arg("f"), py::arg("guess"),
        py::arg("tol") = 1e-12, py::arg("max_iters") = 50);

  py::enum_<ProcessRun::Status>(m, "RunStatus")
      .value("converged", ProcessRun::Status::Converged)
      .value("max_steps_reached", ProcessRun::Status::MaxStepsReached)
      .value("error", ProcessRun::Status::Error);

  py::class_<ProcessStep>(m, "ProcessStep")
      .def_readonly("k", &ProcessStep::k)
      .def_readonly("block", &ProcessStep::block)
      .def_readonly("terminal", &ProcessStep::terminal)
      .def_readonly("phi", &ProcessStep::phi)
      .def_readonly("grad_norm", &ProcessStep::grad_norm)
      .def_readonly("slice_grad_norm", &ProcessStep::slice_grad_norm)
      .def_readonly("arc_length", &ProcessStep::arc_length)
      .def_readonly("reason", &ProcessStep::reason)
      .def_readonly("trajectory", &ProcessStep::trajectory);

  py::class_<ProcessRun>(m, "ProcessRun")
      .def_readonly("initial", &ProcessRun::initial)
      .def_readonly("phi_initial", &ProcessRun::phi_initial)
      .def_readonly("steps", &ProcessRun::steps)
      .def_readonly("status", &ProcessRun::status)
      .def_readonly("classification", &ProcessRun::classification)
      .def_readonly("error", &ProcessRun::error)
      .def_readonly("error_step", &ProcessRun::error_step)
      .def_readonly("total_arc_length", &ProcessRun::total_arc_length)
      .def_property_readonly("final_point",
                             [](const ProcessRun& r) { return r.final_point(); });

  m.def("run_process", &run_process, py::arg("f"), py::arg("domain"), py::arg("q0"),
        py::arg("schedule"), py::arg("flow") = FlowSettings{},
        py::arg("stop") = StoppingCriteria{}, py::arg("keep_trajectories") = false);
  m.def("component_zero_locus_sample", &component_zero_locus_sample, py::arg("f"), py::arg("j"),
        py::arg("box_lo"), py::arg("box_hi"), py::arg("grid"));

  py::class_<LojaEstimate>(m, "LojaEstimate")
      .def_readonly("center", &LojaEstimate::center)
      .def_readonly("radius", &LojaEstimate::radius)
      .def_readonly("c", &LojaEstimate::c)
      .def_readonly("mu", &LojaEstimate::mu)
      .def_readonly("phi_at_center", &LojaEstimate::phi_at_center)
      .def_readonly("samples_used", &LojaEstimate::samples_used);

  m.def("estimate_exponent", &estimate_exponent, py::arg("f"), py::arg("q"), py::arg("r"),
        py::arg("nsamples"), py::arg("seed"));
  m.def("verify_inequality", &verify_inequality, py::arg("f"), py::arg("est"),
        py::arg("nsamples"), py::arg("seed"));

  py::class_<AngleReport>(m, "AngleReport")
      .def_readonly("delta_min", &AngleReport::delta_min)
      .def_readonly("delta", &AngleReport::delta);

  m.def("angle_condition", &angle_condition, py::arg("f"), py::arg("traj"), py::arg("free"));

  py::class_<LengthBoundReport>(m, "LengthBoundReport")
      .def_readonly("l", &LengthBoundReport::l)
      .def_readonly("n", &LengthBoundReport::n)
      .def_readonly("r", &LengthBoundReport::r)
      .def_readonly("c_prime", &LengthBoundReport::c_prime)
      .def_readonly("hypothesis_value", &LengthBoundReport::hypothesis_value)
      .def_readonly("hypothesis_holds", &LengthBoundReport::hypothesis_holds)
      .def_readonly("total_length", &LengthBoundReport::total_length)
      .def_readonly("bound_holds", &LengthBoundReport::bound_holds);

  m.def("length_bound_check", &length_bound_check, py::arg("run"), py::arg("est"),
        py::arg("safety") = 1.05);

  py::class_<RadialPerturbation>(m, "RadialPerturbation")
      .def_static("make", &RadialPerturbation::make, py::arg("o"), py::arg("p"), py::arg("k"),
                  py::arg("b"), py::arg("r_max"))
      .def_readonly("o", &RadialPerturbation::o)
      .def_readonly("p", &RadialPerturbation::p)
      .def_readonly("k", &RadialPerturbation::k)
      .def_readonly("b", &RadialPerturbation::b)
      .def_readonly("a", &RadialPerturbation::a);

  m.def("injectivity_bound", &injectivity_bound, py::arg("a"), py::arg("r_max"));
  m.def("make_h", &make_h);
  m.def("perturb_function", &perturb_function, py::arg("f"), py::arg("pert"));

  py::class_<EscapeReport>(m, "EscapeReport")
      .def_readonly("trials", &EscapeReport::trials)
      .def_readonly("to_minimum", &EscapeReport::to_minimum)
      .def_readonly("to_saddle", &EscapeReport::to_saddle)
      .def_readonly("to_other", &EscapeReport::to_other)
      .def_readonly("unresolved", &EscapeReport::unresolved)
      .def_readonly("outcomes", &EscapeReport::outcomes);

  m.def("saddle_escape_test", &saddle_escape_test, py::arg("f"), py::arg("pert"),
        py::arg("domain"), py::arg("saddle"), py::arg("trials"), py::arg("offset"),
        py::arg("schedule"), py::arg("flow") = FlowSettings{},
        py::arg("stop") = StoppingCriteria{}, py::arg("seed") = 1);

  py::class_<StartRegion>(m, "StartRegion")
      .def_readonly("center", &StartRegion::center)
      .def_readonly("radius", &StartRegion::radius)
      .def_readonly("coords", &StartRegion::coords)
      .def_readonly("margin", &StartRegion::margin);

  py::class_<KnownCriticalPoint>(m, "KnownCriticalPoint")
      .def_readonly("point", &KnownCriticalPoint::point)
      .def_readonly("kind", &KnownCriticalPoint::kind)
      .def_readonly("morse_index", &KnownCriticalPoint::morse_index);

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("name", &Scenario::name)
      .def_readonly("description", &Scenario::description)
      .def_readonly("f", &Scenario::f)
      .def_readonly("domain", &Scenario::domain)
      .def_readonly("schedule_default", &Scenario::schedule_default)
      .def_readonly("suggested_starts", &Scenario::suggested_starts)
      .def_readonly("known_critical_points", &Scenario::known_critical_points)
      .def_readonly("start_region", &Scenario::start_region)
      .def_readonly("notes", &Scenario::notes);

  m.def("builtin", &builtin, py::arg("name"));
  m.def("list_scenarios", &list_scenarios);
  m.def("sample_starts", &sample_starts, py::arg("scenario"), py::arg("count"), py::arg("seed"));
  m.def("load_scenario_file", &load_scenario_file, py::arg("path"));
  m.def("save_scenario_file", &save_scenario_file, py::arg("scenario"), py::arg("path"));
  m.def("scenario_to_text", &scenario_to_text);
  m.def("scenario_from_text", &scenario_from_text);

  m.def("run_summary_json", &run_summary_json, py::arg("run"), py::arg("scenario"),
        py::arg("schedule"), py::arg("flow") = FlowSettings{},
        py::arg("stop") = StoppingCriteria{},
        "Stable JSON run summary (see schemas/run_summary.schema.json).");
  m.def("trajectory_csv", &trajectory_csv, py::arg("run"), py::arg("dim"),
        "Trajectory CSV text (step, t, y_1..y_M, phi, grad_norm, slice_grad_norm).");

  m.attr("__version__") = "0.1.0";
}
