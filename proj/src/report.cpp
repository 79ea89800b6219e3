#include "seqgrad/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "schema_data.hpp"
#include "seqgrad/parse.hpp"

namespace seqgrad {

namespace {

json index_set_to_json(const std::vector<int>& set) {
  json out = json::array();
  for (int j : set) out.push_back(j + 1);
  return out;
}

std::vector<int> index_set_from_json(const json& j) {
  std::vector<int> out;
  for (const auto& v : j) out.push_back(v.get<int>() - 1);
  return out;
}

}  // namespace

json point_to_json(const Point& p) {
  json out = json::array();
  for (double c : p) out.push_back(c);
  return out;
}

Point point_from_json(const json& j) {
  Point out;
  for (const auto& v : j) out.push_back(v.get<double>());
  return out;
}

json schedule_to_json(const Schedule& s) {
  json out;
  switch (s.kind()) {
    case Schedule::Kind::CyclicBlocks:
      out["kind"] = "cyclic_blocks";
      out["d"] = s.d();
      out["blocks"] = s.block_count();
      out["first_block"] = s.first_block();
      break;
    case Schedule::Kind::ExplicitSets: {
      out["kind"] = "explicit_sets";
      json sets = json::array();
      for (const auto& set : s.sets()) sets.push_back(index_set_to_json(set));
      out["sets"] = sets;
      break;
    }
    case Schedule::Kind::RandomFair: {
      out["kind"] = "random_fair";
      json blocks = json::array();
      for (const auto& set : s.sets()) blocks.push_back(index_set_to_json(set));
      out["sets"] = blocks;
      out["seed"] = s.seed();
      out["window"] = s.window();
      break;
    }
  }
  return out;
}

Schedule schedule_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "cyclic_blocks")
    return Schedule::cyclic_blocks(j.at("d").get<int>(), j.at("blocks").get<int>(),
                                   j.value("first_block", 0));
  if (kind == "explicit_sets") {
    std::vector<std::vector<int>> sets;
    for (const auto& s : j.at("sets")) sets.push_back(index_set_from_json(s));
    return Schedule::explicit_sets(std::move(sets));
  }
  if (kind == "random_fair") {
    std::vector<std::vector<int>> blocks;
    for (const auto& s : j.at("sets")) blocks.push_back(index_set_from_json(s));
    return Schedule::random_fair(std::move(blocks), j.at("seed").get<std::uint64_t>(),
                                 j.at("window").get<int>());
  }
  throw std::invalid_argument("unknown schedule kind '" + kind + "'");
}

json domain_to_json(const Domain& d) {
  json out;
  if (d.kind() == Domain::Kind::Ball) {
    out["kind"] = "ball";
    out["center"] = point_to_json(d.center());
    out["radius"] = d.radius();
  } else {
    out["kind"] = "level_set";
    json fns = json::array();
    for (const auto& f : d.boundary_fns()) fns.push_back(to_string(f));
    out["boundary"] = fns;
    out["anchor"] = point_to_json(d.anchor());
  }
  return out;
}

Domain domain_from_json(const json& j, int dim) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "ball")
    return Domain::ball(point_from_json(j.at("center")), j.at("radius").get<double>());
  if (kind == "level_set") {
    std::vector<AnalyticFunction> fns;
    for (const auto& text : j.at("boundary"))
      fns.push_back(parse_function(text.get<std::string>(), dim));
    return Domain::level_set(std::move(fns), point_from_json(j.at("anchor")));
  }
  throw std::invalid_argument("unknown domain kind '" + kind + "'");
}

json flow_settings_to_json(const FlowSettings& s) {
  return json{{"eps_stat", s.eps_stat},
              {"h_init", s.h_init},
              {"h_min", s.h_min},
              {"h_max", s.h_max},
              {"rtol", s.rtol},
              {"atol", s.atol},
              {"t_max", s.t_max},
              {"newton_polish", s.newton_polish},
              {"newton_tol", s.newton_tol},
              {"max_polish_iters", s.max_polish_iters},
              {"polish_trust_radius", s.polish_trust_radius}};
}

FlowSettings flow_settings_from_json(const json& j) {
  FlowSettings s;
  s.eps_stat = j.at("eps_stat").get<double>();
  s.h_init = j.at("h_init").get<double>();
  s.h_min = j.at("h_min").get<double>();
  s.h_max = j.at("h_max").get<double>();
  s.rtol = j.at("rtol").get<double>();
  s.atol = j.at("atol").get<double>();
  s.t_max = j.at("t_max").get<double>();
  s.newton_polish = j.at("newton_polish").get<bool>();
  s.newton_tol = j.at("newton_tol").get<double>();
  s.max_polish_iters = j.at("max_polish_iters").get<int>();
  s.polish_trust_radius = j.at("polish_trust_radius").get<double>();
  return s;
}

json stopping_to_json(const StoppingCriteria& s) {
  return json{{"eps_crit", s.eps_crit},
              {"eps_move", s.eps_move},
              {"window", s.window},
              {"max_steps", s.max_steps}};
}

StoppingCriteria stopping_from_json(const json& j) {
  StoppingCriteria s;
  s.eps_crit = j.at("eps_crit").get<double>();
  s.eps_move = j.at("eps_move").get<double>();
  s.window = j.at("window").get<int>();
  s.max_steps = j.at("max_steps").get<long>();
  return s;
}

json classification_to_json(const CriticalPointInfo& info) {
  json eig = json::array();
  for (double ev : info.eigenvalues) eig.push_back(ev);
  return json{{"grad_norm", info.grad_norm},
              {"is_critical", info.is_critical},
              {"morse_index", info.morse_index},
              {"nondegenerate", info.nondegenerate},
              {"kind", to_cstring(info.classification)},
              {"eigenvalues", eig}};
}

json loja_to_json(const LojaEstimate& est) {
  return json{{"center", point_to_json(est.center)},
              {"radius", est.radius},
              {"c", est.c},
              {"mu", est.mu},
              {"phi_at_center", est.phi_at_center},
              {"samples_used", est.samples_used}};
}

json length_bound_to_json(const LengthBoundReport& r) {
  return json{{"l", r.l},
              {"n", r.n},
              {"r", r.r},
              {"c_prime", r.c_prime},
              {"hypothesis_value", r.hypothesis_value},
              {"hypothesis_holds", r.hypothesis_holds},
              {"total_length", r.total_length},
              {"bound_holds", r.bound_holds}};
}

json run_to_json(const ProcessRun& run, const AnalyticFunction& f, const Domain& domain,
                 const Schedule& schedule, const FlowSettings& flow,
                 const StoppingCriteria& stop, const RunMetadata& meta) {
  json out;
  out["schema_version"] = 1;
  out["kind"] = "process_run";
  if (!meta.scenario.empty()) out["scenario"] = meta.scenario;
  if (meta.has_seed) out["seed"] = meta.seed;
  out["dim"] = f.arity();
  out["function"] = meta.function_text.empty() ? to_string(f) : meta.function_text;
  out["domain"] = domain_to_json(domain);
  out["schedule"] = schedule_to_json(schedule);
  out["settings"] = json{{"flow", flow_settings_to_json(flow)}, {"stopping", stopping_to_json(stop)}};
  out["initial"] = point_to_json(run.initial);
  out["phi_initial"] = run.phi_initial;

  json steps = json::array();
  for (const auto& s : run.steps) {
    steps.push_back(json{{"k", s.k},
                         {"block", index_set_to_json(s.block)},
                         {"terminal", point_to_json(s.terminal)},
                         {"phi", s.phi},
                         {"grad_norm", s.grad_norm},
                         {"slice_grad_norm", s.slice_grad_norm},
                         {"arc_length", s.arc_length},
                         {"samples", s.trajectory.samples.size()},
                         {"termination_reason", to_cstring(s.reason)}});
  }
  out["steps"] = steps;

  json verdict;
  verdict["status"] = to_cstring(run.status);
  verdict["point"] = point_to_json(run.final_point());
  if (run.status == ProcessRun::Status::Converged)
    verdict["classification"] = classification_to_json(run.classification);
  if (run.status == ProcessRun::Status::Error) {
    verdict["error"] = run.error;
    verdict["step"] = run.error_step;
  }
  out["verdict"] = verdict;
  out["total_arc_length"] = run.total_arc_length;
  return out;
}

void write_trajectory_csv(std::ostream& out, const ProcessRun& run, int dim) {
  out << "step,t";
  for (int j = 1; j <= dim; ++j) out << ",y_" << j;
  out << ",phi,grad_norm,slice_grad_norm\n";
  char buf[40];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << ',' << buf;
  };
  for (const auto& step : run.steps) {
    for (const auto& s : step.trajectory.samples) {
      out << step.k;
      emit(s.t);
      for (int j = 0; j < dim; ++j) emit(s.x[j]);
      emit(s.phi);
      emit(s.grad_norm);
      emit(s.slice_grad_norm);
      out << '\n';
    }
  }
}

const json& run_summary_schema() {
  static const json schema = json::parse(detail::kRunSummarySchema);
  return schema;
}

namespace {

const char* json_type_name(const json& v) {
  if (v.is_object()) return "object";
  if (v.is_array()) return "array";
  if (v.is_string()) return "string";
  if (v.is_boolean()) return "boolean";
  if (v.is_number_integer() || v.is_number_unsigned()) return "integer";
  if (v.is_number()) return "number";
  return "null";
}

bool type_matches(const std::string& want, const json& v) {
  if (want == "number") return v.is_number();
  if (want == "integer") return v.is_number_integer() || v.is_number_unsigned();
  if (want == "object") return v.is_object();
  if (want == "array") return v.is_array();
  if (want == "string") return v.is_string();
  if (want == "boolean") return v.is_boolean();
  return true;
}

void validate_node(const json& doc, const json& schema, const std::string& path,
                   std::vector<std::string>& problems) {
  if (schema.contains("type")) {
    const std::string want = schema["type"].get<std::string>();
    if (!type_matches(want, doc)) {
      problems.push_back(path + ": expected " + want + ", got " + json_type_name(doc));
      return;
    }
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& v : schema["enum"])
      if (v == doc) found = true;
    if (!found) problems.push_back(path + ": value not in enum");
  }
  if (doc.is_object()) {
    if (schema.contains("required"))
      for (const auto& key : schema["required"])
        if (!doc.contains(key.get<std::string>()))
          problems.push_back(path + ": missing required field '" + key.get<std::string>() + "'");
    if (schema.contains("properties"))
      for (auto it = schema["properties"].begin(); it != schema["properties"].end(); ++it)
        if (doc.contains(it.key()))
          validate_node(doc[it.key()], it.value(), path + "." + it.key(), problems);
  }
  if (doc.is_array() && schema.contains("items")) {
    size_t i = 0;
    for (const auto& item : doc)
      validate_node(item, schema["items"], path + "[" + std::to_string(i++) + "]", problems);
  }
}

}  // namespace

std::vector<std::string> validate_schema(const json& doc, const json& schema) {
  std::vector<std::string> problems;
  validate_node(doc, schema, "$", problems);
  return problems;
}

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    if (first) {
      while (std::getline(ls, cell, ',')) table.header.push_back(cell);
      first = false;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (row.size() != table.header.size())
      throw std::runtime_error("CSV row width does not match header");
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace

std::vector<VerifyIssue> verify_run_artifacts(const json& run, const std::string* csv_text) {
  std::vector<VerifyIssue> issues;
  constexpr double kSlack = 1e-10;

  for (const auto& p : validate_schema(run, run_summary_schema()))
    issues.push_back({"schema", p});
  if (!issues.empty()) return issues;

  const int dim = run.at("dim").get<int>();
  const double eps_crit = run.at("settings").at("stopping").at("eps_crit").get<double>();
  const Point initial = point_from_json(run.at("initial"));
  double prev_phi = run.at("phi_initial").get<double>();
  Point prev = initial;
  double arc_sum = 0.0;

  for (const auto& step : run.at("steps")) {
    const Point terminal = point_from_json(step.at("terminal"));
    const double phi = step.at("phi").get<double>();
    const auto block = index_set_from_json(step.at("block"));
    const long k = step.at("k").get<long>();

    if (phi > prev_phi + kSlack)
      issues.push_back({"monotone_descent",
                        "phi increased at step " + std::to_string(k) + " (" +
                            format_double(prev_phi) + " -> " + format_double(phi) + ")"});

    std::vector<bool> mask(dim, false);
    for (int j : block)
      if (j >= 0 && j < dim) mask[j] = true;
    for (int j = 0; j < dim; ++j)
      if (!mask[j] && terminal[j] != prev[j])
        issues.push_back({"slice_consistency", "frozen coordinate y" + std::to_string(j + 1) +
                                                   " moved at step " + std::to_string(k)});

    arc_sum += step.at("arc_length").get<double>();
    prev_phi = phi;
    prev = terminal;
  }

  const double total = run.at("total_arc_length").get<double>();
  if (std::abs(total - arc_sum) > 1e-9 * (1.0 + std::abs(total)))
    issues.push_back({"arc_length_total", "total_arc_length does not match the step sum"});

  const auto& verdict = run.at("verdict");
  const std::string status = verdict.at("status").get<std::string>();
  if (status == "converged") {
    const double gn = verdict.at("classification").at("grad_norm").get<double>();
    if (gn > eps_crit)
      issues.push_back({"limit_criticality",
                        "converged verdict with |grad| = " + format_double(gn) + " > eps_crit"});
  }
  const Point vp = point_from_json(verdict.at("point"));
  if (vp != prev)
    issues.push_back({"verdict_point", "verdict point does not equal the last stationary point"});

  if (run.contains("analyses") && run.at("analyses").contains("length_bound")) {
    const auto& lb = run.at("analyses").at("length_bound");
    if (lb.contains("hypothesis_holds") && lb.at("hypothesis_holds").get<bool>() &&
        !lb.at("bound_holds").get<bool>())
      issues.push_back({"length_bound", "hypothesis holds but the length bound fails"});
  }

  if (csv_text != nullptr) {
    try {
      const CsvTable table = parse_csv(*csv_text);
      std::string expect = "step,t";
      for (int j = 1; j <= dim; ++j) expect += ",y_" + std::to_string(j);
      expect += ",phi,grad_norm,slice_grad_norm";
      std::string got;
      for (size_t i = 0; i < table.header.size(); ++i)
        got += (i ? "," : "") + table.header[i];
      if (got != expect) {
        issues.push_back({"csv_schema", "unexpected CSV header '" + got + "'"});
        return issues;
      }
      const int phi_col = 2 + dim;
      const auto& steps = run.at("steps");
      size_t row = 0;
      for (const auto& step : steps) {
        const long k = step.at("k").get<long>();
        const size_t count = step.at("samples").get<size_t>();
        if (row + count > table.rows.size()) {
          issues.push_back({"csv_rows", "CSV has fewer rows than the summary records"});
          return issues;
        }
        double sphi = table.rows[row][phi_col];
        for (size_t i = 0; i < count; ++i) {
          const auto& r = table.rows[row + i];
          if (static_cast<long>(r[0]) != k)
            issues.push_back({"csv_rows", "step column mismatch at row " + std::to_string(row + i)});
          if (r[phi_col] > sphi + kSlack)
            issues.push_back({"monotone_descent", "phi increased inside the step " +
                                                      std::to_string(k) + " trajectory"});
          sphi = r[phi_col];
        }
        row += count;
      }
      if (row != table.rows.size())
        issues.push_back({"csv_rows", "CSV has more rows than the summary records"});
    } catch (const std::exception& e) {
      issues.push_back({"csv_parse", e.what()});
    }
  }
  return issues;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

}  // namespace seqgrad
