// seqgrad: sequential block-coordinate gradient flow lab.
//
// Subcommands: run, verify, estimate, perturb, list. Exit codes: 0 success,
// 1 usage/config/IO error, 2 mathematical non-convergence or a violated
// invariant.

#include <CLI11.hpp>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "seqgrad/parse.hpp"
#include "seqgrad/perturb.hpp"
#include "seqgrad/report.hpp"
#include "seqgrad/scenarios.hpp"

namespace fs = std::filesystem;
using namespace seqgrad;

namespace {

Point parse_point(const std::string& text, int dim) {
  Point out;
  std::string cell;
  std::istringstream in(text);
  while (std::getline(in, cell, ',')) out.push_back(std::strtod(cell.c_str(), nullptr));
  if (dim > 0 && static_cast<int>(out.size()) != dim)
    throw std::invalid_argument("point '" + text + "' does not have dimension " +
                                std::to_string(dim));
  return out;
}

std::vector<std::vector<int>> parse_sets(const std::string& text) {
  std::vector<std::vector<int>> sets;
  std::string group;
  std::istringstream in(text);
  while (std::getline(in, group, '|')) {
    std::vector<int> set;
    std::string cell;
    std::istringstream gs(group);
    while (std::getline(gs, cell, ',')) set.push_back(std::atoi(cell.c_str()) - 1);
    sets.push_back(std::move(set));
  }
  return sets;
}

// Schedule override grammar: cyclic:D,N | explicit:1|2,3 (sets split by '|',
// 1-based indices split by ',') | random:WINDOW,SEED[:SETS].
Schedule parse_schedule(const std::string& text, const Schedule& scenario_default) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("schedule must look like kind:args");
  const std::string kind = text.substr(0, colon);
  const std::string args = text.substr(colon + 1);
  if (kind == "cyclic") {
    int d = 0, n = 0;
    if (std::sscanf(args.c_str(), "%d,%d", &d, &n) != 2)
      throw std::invalid_argument("cyclic schedule needs cyclic:D,N");
    return Schedule::cyclic_blocks(d, n);
  }
  if (kind == "explicit") return Schedule::explicit_sets(parse_sets(args));
  if (kind == "random") {
    const auto second = args.find(':');
    const std::string head = second == std::string::npos ? args : args.substr(0, second);
    int window = 0;
    long long seed = 0;
    if (std::sscanf(head.c_str(), "%d,%lld", &window, &seed) != 2)
      throw std::invalid_argument("random schedule needs random:WINDOW,SEED[:SETS]");
    auto blocks = second == std::string::npos ? scenario_default.sets()
                                              : parse_sets(args.substr(second + 1));
    if (blocks.empty())
      throw std::invalid_argument("random schedule needs explicit sets for this scenario");
    return Schedule::random_fair(blocks, static_cast<std::uint64_t>(seed), window);
  }
  throw std::invalid_argument("unknown schedule kind '" + kind + "'");
}

Scenario resolve_scenario(const std::string& name_or_path) {
  if (fs::exists(name_or_path) && !fs::is_directory(name_or_path))
    return load_scenario_file(name_or_path);
  return builtin(name_or_path);
}

std::string default_outdir() {
  if (const char* env = std::getenv("SEQGRAD_OUT")) return env;
  return "seqgrad_out";
}

struct RunOptions {
  std::string scenario;
  std::string start;
  int random_starts = 0;
  std::uint64_t seed = 1;
  std::string schedule;
  int first_block = 0;
  std::string outdir;
  bool no_csv = false;
  bool quiet = false;
  std::vector<std::string> analyses;
  double loja_radius = 0.5;
  int loja_samples = 20000;
  int verify_samples = 10000;
  int boundary_samples = 10000;
  double safety = 1.05;
  FlowSettings flow;
  StoppingCriteria stop;
};

bool wants(const RunOptions& opt, const std::string& what) {
  for (const auto& a : opt.analyses)
    if (a == what || a == "all") return true;
  return false;
}

json analyze_run(const RunOptions& opt, const Scenario& scenario, const ProcessRun& run) {
  json analyses;

  if (wants(opt, "loja") || wants(opt, "length")) {
    json loja;
    try {
      if (run.status != ProcessRun::Status::Converged)
        throw std::runtime_error("run did not converge; no critical point to estimate at");
      const Point center = run.final_point();
      const auto est = estimate_exponent(scenario.f, center, opt.loja_radius, opt.loja_samples,
                                         Rng::mix(opt.seed, 0x10aa));
      loja = loja_to_json(est);
      loja["verified"] =
          verify_inequality(scenario.f, est, opt.verify_samples, Rng::mix(opt.seed, 0xf2e5));
      loja["verify_samples"] = opt.verify_samples;
      if (wants(opt, "length")) {
        json lb;
        try {
          lb = length_bound_to_json(length_bound_check(run, est, opt.safety));
        } catch (const std::exception& e) {
          lb["error"] = e.what();
        }
        analyses["length_bound"] = lb;
      }
    } catch (const std::exception& e) {
      loja["error"] = e.what();
    }
    analyses["lojasiewicz"] = loja;
  }

  if (wants(opt, "angle")) {
    json per_step = json::array();
    double overall = 1.0;
    for (const auto& step : run.steps) {
      const auto rep = angle_condition(scenario.f, step.trajectory, step.block);
      per_step.push_back(json{{"k", step.k}, {"delta_min", rep.delta_min}});
      overall = std::min(overall, rep.delta_min);
    }
    analyses["angle"] = json{{"delta_min_overall", overall}, {"per_step", per_step}};
  }

  if (wants(opt, "boundary")) {
    const auto samples =
        scenario.domain.sample_boundary(opt.boundary_samples, Rng::mix(opt.seed, 0xb0d));
    const auto inward = check_inward(scenario.f, scenario.domain, samples);
    const auto signs = check_condition_ii_prime(scenario.f, scenario.domain, samples);
    json b{{"samples", static_cast<int>(samples.size())},
           {"inward_violations", static_cast<int>(inward.violations.size())},
           {"sign_violations", static_cast<int>(signs.violations.size())},
           {"passed", inward.passed() && signs.passed()}};
    if (!signs.violations.empty()) {
      const auto& v = signs.violations.front();
      b["first_violation"] = json{{"point", point_to_json(v.point)},
                                  {"component", v.component + 1},
                                  {"dphi", v.dphi},
                                  {"dfa", v.dfa}};
    }
    analyses["boundary"] = b;
  }
  return analyses;
}

int cmd_run(const RunOptions& opt) {
  Scenario scenario = resolve_scenario(opt.scenario);
  const int dim = scenario.f.arity();

  Schedule schedule = opt.schedule.empty()
                          ? scenario.schedule_default
                          : parse_schedule(opt.schedule, scenario.schedule_default);
  if (opt.first_block > 0) {
    if (schedule.kind() != Schedule::Kind::CyclicBlocks)
      throw std::invalid_argument("--first-block applies to cyclic schedules only");
    schedule = Schedule::cyclic_blocks(schedule.d(), schedule.block_count(), opt.first_block);
  }

  std::vector<Point> starts;
  if (!opt.start.empty() && opt.random_starts > 0)
    throw std::invalid_argument("--start and --random-starts are mutually exclusive");
  if (!opt.start.empty()) {
    starts.push_back(parse_point(opt.start, dim));
  } else if (opt.random_starts > 0) {
    starts = sample_starts(scenario, opt.random_starts, opt.seed);
  } else if (!scenario.suggested_starts.empty()) {
    starts.push_back(scenario.suggested_starts.front());
  } else {
    starts = sample_starts(scenario, 1, opt.seed);
  }

  fs::create_directories(opt.outdir);

  std::vector<std::string> lines(starts.size());
  std::vector<int> statuses(starts.size(), 0);

  auto work = [&](size_t i) {
    try {
      const ProcessRun run = run_process(scenario.f, scenario.domain, starts[i], schedule,
                                         opt.flow, opt.stop, true);
      RunMetadata meta;
      meta.scenario = scenario.name;
      meta.function_text = to_string(scenario.f);
      meta.seed = opt.seed;
      meta.has_seed = true;
      json doc = run_to_json(run, scenario.f, scenario.domain, schedule, opt.flow, opt.stop, meta);
      const json analyses = analyze_run(opt, scenario, run);
      if (!analyses.empty()) doc["analyses"] = analyses;

      write_text_file(opt.outdir + "/run_" + std::to_string(i) + ".json", doc.dump(2) + "\n");
      if (!opt.no_csv) {
        std::ostringstream csv;
        write_trajectory_csv(csv, run, dim);
        write_text_file(opt.outdir + "/trajectory_" + std::to_string(i) + ".csv", csv.str());
      }

      std::ostringstream line;
      line << "run " << i << ": " << to_cstring(run.status) << " after " << run.steps.size()
           << " steps";
      if (run.status == ProcessRun::Status::Converged)
        line << ", |grad| = " << run.classification.grad_norm << ", "
             << to_cstring(run.classification.classification);
      if (run.status == ProcessRun::Status::Error)
        line << " (" << run.error << " at step " << run.error_step << ")";
      lines[i] = line.str();
      statuses[i] = run.status == ProcessRun::Status::Converged ? 0 : 2;
    } catch (const std::exception& e) {
      lines[i] = "run " + std::to_string(i) + ": error: " + e.what();
      statuses[i] = 2;
    }
  };

  const int workers =
      std::clamp(static_cast<int>(std::thread::hardware_concurrency()), 1,
                 std::max(1, static_cast<int>(starts.size())));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (size_t i = w; i < starts.size(); i += workers) work(i);
    });
  for (auto& th : pool) th.join();

  int exit_code = 0;
  for (size_t i = 0; i < starts.size(); ++i) {
    if (!opt.quiet) std::cout << lines[i] << "\n";
    exit_code = std::max(exit_code, statuses[i]);
  }
  if (!opt.quiet) std::cout << "artifacts in " << opt.outdir << "\n";
  return exit_code;
}

int cmd_verify(const std::vector<std::string>& paths, bool quiet) {
  std::vector<fs::path> files;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      for (const auto& entry : fs::directory_iterator(p)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("run_", 0) == 0 && entry.path().extension() == ".json")
          files.push_back(entry.path());
      }
    } else {
      files.push_back(p);
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    std::cerr << "verify: no run_*.json artifacts found\n";
    return 1;
  }

  int exit_code = 0;
  for (const auto& file : files) {
    json doc;
    try {
      doc = json::parse(read_text_file(file.string()));
    } catch (const std::exception& e) {
      std::cerr << file.string() << ": unreadable (" << e.what() << ")\n";
      exit_code = std::max(exit_code, 1);
      continue;
    }

    std::string csv_text;
    const std::string* csv_ptr = nullptr;
    const std::string stem = file.stem().string();  // run_<i>
    if (stem.rfind("run_", 0) == 0) {
      const fs::path csv = file.parent_path() / ("trajectory_" + stem.substr(4) + ".csv");
      if (fs::exists(csv)) {
        csv_text = read_text_file(csv.string());
        csv_ptr = &csv_text;
      }
    }

    const auto issues = verify_run_artifacts(doc, csv_ptr);
    if (issues.empty()) {
      if (!quiet) std::cout << file.string() << ": ok\n";
    } else {
      for (const auto& issue : issues)
        std::cout << file.string() << ": " << issue.invariant << ": " << issue.detail << "\n";
      exit_code = std::max(exit_code, 2);
    }
  }
  return exit_code;
}

int cmd_estimate(const std::string& scenario_name, const std::string& at, double radius,
                 int samples, int verify_samples, std::uint64_t seed, const std::string& out) {
  const Scenario scenario = resolve_scenario(scenario_name);
  Point center;
  if (!at.empty()) {
    center = parse_point(at, scenario.f.arity());
  } else if (!scenario.known_critical_points.empty()) {
    center = scenario.known_critical_points.front().point;
  } else {
    throw std::invalid_argument("no --at point and the scenario lists no critical points");
  }
  center = refine_critical_point(scenario.f, center);

  const auto est = estimate_exponent(scenario.f, center, radius, samples, seed);
  const bool ok = verify_inequality(scenario.f, est, verify_samples, Rng::mix(seed, 1));

  json doc = loja_to_json(est);
  doc["scenario"] = scenario.name;
  doc["verified"] = ok;
  doc["verify_samples"] = verify_samples;
  const std::string text = doc.dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    write_text_file(out, text);
  return ok ? 0 : 2;
}

int cmd_perturb(const std::string& scenario_name, const std::string& center, int k, double b,
                double r_max, const std::string& out_scenario, const std::string& out_report) {
  const Scenario scenario = resolve_scenario(scenario_name);
  const Point o = parse_point(center, scenario.f.arity());
  const auto p = scenario.designated_minimum();
  if (!p) throw std::invalid_argument("scenario has no designated minimum to fix");

  if (r_max <= 0.0) {
    r_max = scenario.domain.kind() == Domain::Kind::Ball
                ? distance(o, scenario.domain.center()) + scenario.domain.radius()
                : 10.0;
  }
  const auto pert = RadialPerturbation::make(o, *p, k, b, r_max);
  const auto h = make_h(pert);
  const auto psi = perturb_function(scenario.f, pert);

  const Point refined = refine_critical_point(psi, *p);
  const auto info = classify_point(psi, refined);

  json report;
  report["scenario"] = scenario.name;
  report["o"] = point_to_json(pert.o);
  report["p"] = point_to_json(pert.p);
  report["k"] = pert.k;
  report["b"] = pert.b;
  report["a"] = pert.a;
  report["injectivity_bound"] = injectivity_bound(pert.a, r_max);
  report["r_max"] = r_max;
  report["fixes"] = json{{"o_error", distance(h.value(pert.o), pert.o)},
                         {"p_error", distance(h.value(pert.p), pert.p)}};
  report["minimum"] = json{{"point", point_to_json(refined)},
                           {"distance_to_p", distance(refined, *p)},
                           {"classification", classification_to_json(info)}};

  Scenario perturbed = scenario;
  perturbed.name = scenario.name + "_perturbed";
  perturbed.description = scenario.description + " (radially perturbed)";
  perturbed.f = psi;
  perturbed.known_critical_points = {{refined, info.classification, info.morse_index}};
  perturbed.notes = scenario.notes +
                    " Perturbed by h(x) = x + b (x-o) a sinc(a r^2); see the perturb report.";

  if (!out_scenario.empty()) save_scenario_file(perturbed, out_scenario);
  const std::string text = report.dump(2) + "\n";
  if (out_report.empty())
    std::cout << text;
  else
    write_text_file(out_report, text);

  const bool minimum_kept =
      info.classification == CriticalPointInfo::Kind::Minimum && info.is_critical;
  return minimum_kept ? 0 : 2;
}

int cmd_list(bool as_json, const std::string& export_dir) {
  const auto list = list_scenarios();
  if (!export_dir.empty()) {
    fs::create_directories(export_dir);
    for (const auto& [name, dim, desc] : list)
      save_scenario_file(builtin(name), export_dir + "/" + name + ".json");
    std::cout << "wrote " << list.size() << " scenario files to " << export_dir << "\n";
    return 0;
  }
  if (as_json) {
    json out = json::array();
    for (const auto& [name, dim, desc] : list)
      out.push_back(json{{"name", name}, {"dim", dim}, {"description", desc}});
    std::cout << out.dump(2) << "\n";
  } else {
    for (const auto& [name, dim, desc] : list)
      std::cout << name << " (M=" << dim << "): " << desc << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sequential block-coordinate gradient flow lab"};
  app.require_subcommand(1);

  RunOptions opt;
  opt.outdir = default_outdir();

  auto* run = app.add_subcommand("run", "run the sequential process and write artifacts");
  run->add_option("--scenario", opt.scenario, "builtin name or scenario file")->required();
  run->add_option("--start", opt.start, "explicit start point, comma separated");
  run->add_option("--random-starts", opt.random_starts, "number of seeded random starts");
  run->add_option("--seed", opt.seed, "seed for random starts and analyses");
  run->add_option("--schedule", opt.schedule,
                  "override: cyclic:D,N | explicit:1|2,3 | random:W,SEED[:SETS]");
  run->add_option("--first-block", opt.first_block,
                  "cyclic schedules: block used by step 1 (default: the (k mod N)+1 rule)");
  run->add_option("--out", opt.outdir, "output directory (default $SEQGRAD_OUT or seqgrad_out)");
  run->add_flag("--no-csv", opt.no_csv, "skip trajectory CSV files");
  run->add_flag("--quiet", opt.quiet, "suppress per-run lines");
  run->add_option("--verify-samples", opt.verify_samples, "fresh Lojasiewicz verification samples");
  run->add_option("--analyze", opt.analyses,
                  "analyses to attach: loja, length, angle, boundary, all")
      ->delimiter(',');
  run->add_option("--loja-radius", opt.loja_radius, "estimate radius");
  run->add_option("--loja-samples", opt.loja_samples, "estimate sample count");
  run->add_option("--safety", opt.safety, "length-bound safety factor (> 1)");
  run->add_option("--boundary-samples", opt.boundary_samples, "boundary check samples");
  run->add_option("--max-steps", opt.stop.max_steps, "step budget");
  run->add_option("--eps-crit", opt.stop.eps_crit, "full-gradient threshold");
  run->add_option("--eps-move", opt.stop.eps_move, "movement threshold");
  run->add_option("--window", opt.stop.window, "quiet window (0 = schedule period)");
  run->add_option("--eps-stat", opt.flow.eps_stat, "slice stationarity threshold");
  run->add_option("--rtol", opt.flow.rtol, "integrator relative tolerance");
  run->add_option("--atol", opt.flow.atol, "integrator absolute tolerance");
  run->add_option("--t-max", opt.flow.t_max, "flow-time budget per step");

  std::vector<std::string> verify_paths;
  bool verify_quiet = false;
  auto* verify = app.add_subcommand("verify", "re-check written run artifacts");
  verify->add_option("paths", verify_paths, "run_*.json files or directories")->required();
  verify->add_flag("--quiet", verify_quiet, "only report problems");

  std::string est_scenario, est_at, est_out;
  double est_radius = 0.5;
  int est_samples = 20000, est_verify = 10000;
  std::uint64_t est_seed = 1;
  auto* estimate = app.add_subcommand("estimate", "fit the gradient-inequality data (c, mu)");
  estimate->add_option("--scenario", est_scenario, "builtin name or scenario file")->required();
  estimate->add_option("--at", est_at, "critical point (default: first known)");
  estimate->add_option("--radius", est_radius, "fit radius");
  estimate->add_option("--samples", est_samples, "fit sample count");
  estimate->add_option("--verify-samples", est_verify, "fresh verification samples");
  estimate->add_option("--seed", est_seed, "sampling seed");
  estimate->add_option("--out", est_out, "write the JSON report here instead of stdout");

  std::string pert_scenario, pert_center, pert_out_scenario, pert_out_report;
  int pert_k = 1;
  double pert_b = 1e-3, pert_rmax = 0.0;
  auto* perturb = app.add_subcommand("perturb", "radially perturb a scenario, fixing its minimum");
  perturb->add_option("--scenario", pert_scenario, "builtin name or scenario file")->required();
  perturb->add_option("--center", pert_center, "perturbation center o")->required();
  perturb->add_option("--k", pert_k, "oscillation count (a = 2 pi k / |op|^2)");
  perturb->add_option("--b", pert_b, "amplitude");
  perturb->add_option("--r-max", pert_rmax, "injectivity certification radius");
  perturb->add_option("--out-scenario", pert_out_scenario, "write the perturbed scenario file");
  perturb->add_option("--out-report", pert_out_report, "write the JSON report");

  bool list_json = false;
  std::string list_export;
  auto* list = app.add_subcommand("list", "list builtin scenarios");
  list->add_flag("--json", list_json, "emit JSON");
  list->add_option("--export", list_export, "write every builtin as a scenario file here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(opt);
    if (verify->parsed()) return cmd_verify(verify_paths, verify_quiet);
    if (estimate->parsed())
      return cmd_estimate(est_scenario, est_at, est_radius, est_samples, est_verify, est_seed,
                          est_out);
    if (perturb->parsed())
      return cmd_perturb(pert_scenario, pert_center, pert_k, pert_b, pert_rmax,
                         pert_out_scenario, pert_out_report);
    if (list->parsed()) return cmd_list(list_json, list_export);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
