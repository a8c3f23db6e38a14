#include "spe/analysis.hpp"

#include <fmt/core.h>

#include <algorithm>

#include "json_util.hpp"
#include "spe/error.hpp"

namespace spe {

using detail::child;
using detail::Json;

std::string_view to_string(SolverChoice choice) {
  switch (choice) {
    case SolverChoice::Auto: return "auto";
    case SolverChoice::Exact: return "exact";
    case SolverChoice::Amva: return "amva";
    case SolverChoice::Simulation: return "sim";
  }
  return "auto";
}

SolverChoice parse_solver_choice(std::string_view text) {
  if (text == "auto") return SolverChoice::Auto;
  if (text == "exact") return SolverChoice::Exact;
  if (text == "amva") return SolverChoice::Amva;
  if (text == "sim") return SolverChoice::Simulation;
  throw Error(Errc::InvalidArgument, "unknown solver '" + std::string(text) + "' (expected auto, exact, amva or sim)");
}

SolverResult analyze_qn(const QnModel& qn, const AnalysisOptions& options) {
  switch (options.solver) {
    case SolverChoice::Exact: return solve_exact_mva(qn, options.mva);
    case SolverChoice::Amva: return solve_amva(qn, options.mva.amvaTolerance, options.mva.amvaMaxIterations);
    case SolverChoice::Simulation: return simulate(qn, options.simulation).estimate;
    case SolverChoice::Auto: break;
  }
  return solve(qn, options.mva);
}

std::vector<std::string> RequirementReport::violated_classes() const {
  std::vector<std::string> out;
  for (const ResponseCheck& r : responses)
    if (r.violated) out.push_back(r.qnClass);
  return out;
}

std::vector<std::string> RequirementReport::violated_centers() const {
  std::vector<std::string> out;
  for (const UtilizationCheck& u : utilizations)
    if (u.violated && std::find(out.begin(), out.end(), u.center) == out.end()) out.push_back(u.center);
  return out;
}

RequirementReport check_requirements(const SolverResult& result, const std::vector<Requirement>& requirements) {
  RequirementReport report;
  for (const Requirement& req : requirements) {
    if (const auto* rt = std::get_if<ResponseTimeRequirement>(&req)) {
      auto c = result.class_index(rt->workload);
      if (!c) throw Error(Errc::UnknownElement, "requirement '" + rt->id + "' names unknown class '" + rt->workload + "'");
      const double value = result.serverResponse(*c);
      report.responses.push_back({rt->id, rt->workload, value, rt->maxResponse, value > rt->maxResponse});
    } else {
      const auto& ut = std::get<UtilizationRequirement>(req);
      for (std::size_t k = 0; k < result.centerIds.size(); ++k) {
        if (result.centerKinds[k] != CenterKind::Queueing) continue;
        const double value = result.utilization(static_cast<Eigen::Index>(k));
        report.utilizations.push_back({ut.id, result.centerIds[k], value, ut.maxUtilization, value > ut.maxUtilization});
      }
    }
  }
  report.satisfied = report.violated_classes().empty() && report.violated_centers().empty();
  return report;
}

// ---------------------------------------------------------------------------

namespace {

Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(std::move(row));
  }
  return a;
}

Eigen::VectorXd read_vector(const Json& obj, const std::string& ptr, std::string_view key, std::size_t n) {
  const Json& a = detail::get_array(obj, ptr, key);
  if (a.size() != n) throw SchemaError(child(ptr, key), "expected " + std::to_string(n) + " entries");
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!a[i].is_number()) throw SchemaError(child(child(ptr, key), i), "expected a number");
    v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd read_matrix(const Json& obj, const std::string& ptr, std::string_view key, std::size_t rows,
                            std::size_t cols) {
  const Json& a = detail::get_array(obj, ptr, key);
  if (a.size() != rows) throw SchemaError(child(ptr, key), "expected " + std::to_string(rows) + " rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = child(child(ptr, key), r);
    if (!a[r].is_array() || a[r].size() != cols) throw SchemaError(rp, "expected " + std::to_string(cols) + " columns");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!a[r][c].is_number()) throw SchemaError(child(rp, c), "expected a number");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = a[r][c].get<double>();
    }
  }
  return m;
}

std::vector<std::string> read_strings(const Json& obj, const std::string& ptr, std::string_view key) {
  std::vector<std::string> out;
  const Json& a = detail::get_array(obj, ptr, key);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_string()) throw SchemaError(child(child(ptr, key), i), "expected a string");
    out.push_back(a[i].get<std::string>());
  }
  return out;
}

}  // namespace

Json result_to_json(const SolverResult& r) {
  Json j;
  j["solver"] = to_string(r.solver);
  j["approximate"] = r.approximate;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["classes"] = r.classIds;
  Json kinds = Json::array();
  for (CenterKind k : r.centerKinds) kinds.push_back(k == CenterKind::Delay ? "delay" : "ps");
  j["centers"] = r.centerIds;
  j["centerKinds"] = std::move(kinds);
  j["thinkTimeSec"] = vector_json(r.thinkTime);
  j["population"] = vector_json(r.population);
  j["throughput"] = vector_json(r.throughput);
  j["cycleTimeSec"] = vector_json(r.cycleTime);
  j["serverSideResponseSec"] = vector_json(r.serverResponse);
  j["residenceSec"] = matrix_json(r.residence);
  j["queueLength"] = matrix_json(r.queueLength);
  j["utilization"] = vector_json(r.utilization);
  return j;
}

SolverResult result_from_json(const Json& j, const std::string& ptr) {
  detail::expect_object(j, ptr);
  SolverResult r;
  const std::string solver = detail::get_string(j, ptr, "solver");
  if (solver == "exact") r.solver = SolverKind::Exact;
  else if (solver == "amva") r.solver = SolverKind::Amva;
  else if (solver == "sim") r.solver = SolverKind::Simulation;
  else throw SchemaError(child(ptr, "solver"), "unknown solver '" + solver + "'");
  r.approximate = detail::get_bool(j, ptr, "approximate", false);
  r.converged = detail::get_bool(j, ptr, "converged", true);
  r.iterations = static_cast<int>(detail::get_integer(j, ptr, "iterations"));
  r.classIds = read_strings(j, ptr, "classes");
  r.centerIds = read_strings(j, ptr, "centers");
  for (const std::string& k : read_strings(j, ptr, "centerKinds")) {
    if (k != "delay" && k != "ps") throw SchemaError(child(ptr, "centerKinds"), "expected 'delay' or 'ps'");
    r.centerKinds.push_back(k == "delay" ? CenterKind::Delay : CenterKind::Queueing);
  }
  const std::size_t nc = r.classIds.size(), nk = r.centerIds.size();
  if (r.centerKinds.size() != nk) throw SchemaError(child(ptr, "centerKinds"), "one kind per center expected");
  r.thinkTime = read_vector(j, ptr, "thinkTimeSec", nc);
  r.population = read_vector(j, ptr, "population", nc);
  r.throughput = read_vector(j, ptr, "throughput", nc);
  r.cycleTime = read_vector(j, ptr, "cycleTimeSec", nc);
  r.serverResponse = read_vector(j, ptr, "serverSideResponseSec", nc);
  r.residence = read_matrix(j, ptr, "residenceSec", nk, nc);
  r.queueLength = read_matrix(j, ptr, "queueLength", nk, nc);
  r.utilization = read_vector(j, ptr, "utilization", nk);
  return r;
}

Json sim_to_json(const SimResult& sim) {
  Json j = result_to_json(sim.estimate);
  j["halfWidths"] = {{"throughput", vector_json(sim.throughputHalfWidth)},
                     {"cycleTimeSec", vector_json(sim.cycleTimeHalfWidth)},
                     {"serverSideResponseSec", vector_json(sim.serverResponseHalfWidth)},
                     {"utilization", vector_json(sim.utilizationHalfWidth)},
                     {"queueLength", matrix_json(sim.queueLengthHalfWidth)}};
  j["seed"] = sim.seed;
  j["warmupSec"] = sim.warmup;
  j["horizonSec"] = sim.horizon;
  j["batches"] = sim.batches;
  j["events"] = sim.events;
  return j;
}

Json report_to_json(const RequirementReport& report) {
  Json responses = Json::array();
  for (const ResponseCheck& r : report.responses)
    responses.push_back({{"requirement", r.requirement}, {"class", r.qnClass}, {"serverSideResponseSec", r.value},
                         {"thresholdSec", r.threshold}, {"violated", r.violated}});
  Json utilizations = Json::array();
  for (const UtilizationCheck& u : report.utilizations)
    utilizations.push_back({{"requirement", u.requirement}, {"center", u.center}, {"utilization", u.value},
                            {"threshold", u.threshold}, {"violated", u.violated}});
  Json violations = Json::array();
  for (const ResponseCheck& r : report.responses)
    if (r.violated) violations.push_back({{"requirement", r.requirement}, {"class", r.qnClass}});
  for (const UtilizationCheck& u : report.utilizations)
    if (u.violated) violations.push_back({{"requirement", u.requirement}, {"center", u.center}});
  return {{"responseTimes", responses},
          {"utilizations", utilizations},
          {"violations", violations},
          {"satisfied", report.satisfied}};
}

RequirementReport report_from_json(const Json& j, const std::string& ptr) {
  RequirementReport report;
  const Json& responses = detail::get_array(j, ptr, "responseTimes");
  for (std::size_t i = 0; i < responses.size(); ++i) {
    const std::string p = child(child(ptr, "responseTimes"), i);
    report.responses.push_back({detail::get_string(responses[i], p, "requirement"),
                                detail::get_string(responses[i], p, "class"),
                                detail::get_number(responses[i], p, "serverSideResponseSec"),
                                detail::get_number(responses[i], p, "thresholdSec"),
                                detail::get_bool(responses[i], p, "violated", false)});
  }
  const Json& utilizations = detail::get_array(j, ptr, "utilizations");
  for (std::size_t i = 0; i < utilizations.size(); ++i) {
    const std::string p = child(child(ptr, "utilizations"), i);
    report.utilizations.push_back({detail::get_string(utilizations[i], p, "requirement"),
                                   detail::get_string(utilizations[i], p, "center"),
                                   detail::get_number(utilizations[i], p, "utilization"),
                                   detail::get_number(utilizations[i], p, "threshold"),
                                   detail::get_bool(utilizations[i], p, "violated", false)});
  }
  report.satisfied = detail::get_bool(j, ptr, "satisfied", true);
  return report;
}

std::string format_tables(const SolverResult& r, const RequirementReport& report, const SimResult* sim) {
  std::string out;
  out += fmt::format("solver: {}{}\n\n", to_string(r.solver),
                     r.approximate ? (r.converged ? " (approximate)" : " (approximate, not converged)") : "");
  out += fmt::format("{:<20} {:>6} {:>8} {:>12} {:>11} {:>13} {:>8}  {}\n", "class", "N", "Z (s)", "X (req/s)",
                     "cycle (s)", "response (s)", "limit", "");
  for (std::size_t c = 0; c < r.classIds.size(); ++c) {
    const auto i = static_cast<Eigen::Index>(c);
    std::string limit = "-", mark;
    for (const ResponseCheck& rc : report.responses)
      if (rc.qnClass == r.classIds[c]) {
        limit = fmt::format("{:.2f}", rc.threshold);
        mark = rc.violated ? "VIOLATED " + rc.requirement : "ok";
      }
    out += fmt::format("{:<20} {:>6.0f} {:>8.2f} {:>12.4f} {:>11.4f} {:>13.4f} {:>8}  {}\n", r.classIds[c],
                       r.population(i), r.thinkTime(i), r.throughput(i), r.cycleTime(i), r.serverResponse(i), limit,
                       mark);
    if (sim)
      out += fmt::format("{:<20} {:>6} {:>8} {:>12} {:>11} {:>13}\n", "", "", "+/-",
                         fmt::format("{:.4f}", sim->throughputHalfWidth(i)),
                         fmt::format("{:.4f}", sim->cycleTimeHalfWidth(i)),
                         fmt::format("{:.4f}", sim->serverResponseHalfWidth(i)));
  }
  out += fmt::format("\n{:<20} {:>11} {:>8}  {}\n", "center", "U (%)", "limit", "");
  for (std::size_t k = 0; k < r.centerIds.size(); ++k) {
    if (r.centerKinds[k] != CenterKind::Queueing) continue;
    const auto i = static_cast<Eigen::Index>(k);
    std::string limit = "-", mark;
    for (const UtilizationCheck& u : report.utilizations)
      if (u.center == r.centerIds[k]) {
        limit = fmt::format("{:.2f}", 100.0 * u.threshold);
        if (u.violated || mark.empty()) mark = u.violated ? "VIOLATED " + u.requirement : "ok";
      }
    std::string value = fmt::format("{:.2f}", 100.0 * r.utilization(i));
    if (sim) value += fmt::format(" +/- {:.2f}", 100.0 * sim->utilizationHalfWidth(i));
    out += fmt::format("{:<20} {:>11} {:>8}  {}\n", r.centerIds[k], value, limit, mark);
  }
  out += fmt::format("\nrequirements: {}\n", report.satisfied ? "satisfied" : "violated");
  return out;
}

}  // namespace spe
