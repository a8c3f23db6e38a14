#include "spe/qn.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "spe/error.hpp"
#include "spe/mva.hpp"

namespace spe {

std::optional<Eigen::Index> QnModel::center_index(const std::string& id) const {
  for (std::size_t k = 0; k < centers.size(); ++k)
    if (centers[k].id == id) return static_cast<Eigen::Index>(k);
  return std::nullopt;
}

std::optional<Eigen::Index> QnModel::class_index(const std::string& id) const {
  for (std::size_t c = 0; c < classes.size(); ++c)
    if (classes[c].id == id) return static_cast<Eigen::Index>(c);
  return std::nullopt;
}

Eigen::Index QnModel::delay_index() const {
  for (std::size_t k = 0; k < centers.size(); ++k)
    if (centers[k].kind == CenterKind::Delay) return static_cast<Eigen::Index>(k);
  return -1;
}

std::vector<Eigen::Index> QnModel::queueing_indices() const {
  std::vector<Eigen::Index> out;
  for (std::size_t k = 0; k < centers.size(); ++k)
    if (centers[k].kind == CenterKind::Queueing) out.push_back(static_cast<Eigen::Index>(k));
  return out;
}

Eigen::VectorXd QnModel::total_delay() const {
  Eigen::VectorXd z(static_cast<Eigen::Index>(classes.size()));
  const Eigen::Index d = delay_index();
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    z(ci) = classes[c].thinkTime + (d >= 0 ? demand(d, ci) : 0.0);
  }
  return z;
}

Eigen::MatrixXd QnModel::queueing_demand() const {
  const auto rows = queueing_indices();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), demand.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = demand.row(rows[i]);
  return out;
}

std::vector<int> QnModel::populations() const {
  std::vector<int> out;
  for (const QnClass& c : classes) out.push_back(c.population);
  return out;
}

void validate_qn(const QnModel& qn) {
  auto fail = [](const std::string& why) { throw Error(Errc::InvalidModel, "invalid queueing network: " + why); };
  if (qn.classes.empty()) fail("no classes");
  if (qn.demand.rows() != static_cast<Eigen::Index>(qn.centers.size()) ||
      qn.demand.cols() != static_cast<Eigen::Index>(qn.classes.size()))
    fail("demand matrix shape does not match centers x classes");
  int delays = 0;
  std::set<std::string> ids;
  for (const QnCenter& k : qn.centers) {
    if (k.kind == CenterKind::Delay) ++delays;
    if (!ids.insert(k.id).second) fail("duplicate center '" + k.id + "'");
  }
  if (delays != 1) fail("expected exactly one delay center, found " + std::to_string(delays));
  ids.clear();
  for (const QnClass& c : qn.classes) {
    if (!ids.insert(c.id).second) fail("duplicate class '" + c.id + "'");
    if (c.population < 1) fail("class '" + c.id + "' has population < 1");
    if (!(c.thinkTime >= 0.0) || !std::isfinite(c.thinkTime)) fail("class '" + c.id + "' has invalid think time");
  }
  if (!qn.demand.allFinite() || (qn.demand.array() < 0.0).any()) fail("demands must be finite and >= 0");
  const auto rows = qn.queueing_indices();
  for (std::size_t c = 0; c < qn.classes.size(); ++c) {
    const bool any = std::any_of(rows.begin(), rows.end(), [&](Eigen::Index k) {
      return qn.demand(k, static_cast<Eigen::Index>(c)) > 0.0;
    });
    if (!any) fail("class '" + qn.classes[c].id + "' has no positive demand at a queueing center");
  }
}

bool equivalent(const QnModel& a, const QnModel& b, double tolerance) {
  if (a.centers.size() != b.centers.size() || a.classes.size() != b.classes.size()) return false;
  for (std::size_t c = 0; c < a.classes.size(); ++c) {
    auto bc = b.class_index(a.classes[c].id);
    if (!bc) return false;
    const QnClass& other = b.classes[static_cast<std::size_t>(*bc)];
    if (other.population != a.classes[c].population) return false;
    if (std::abs(other.thinkTime - a.classes[c].thinkTime) > tolerance * std::max(1.0, std::abs(other.thinkTime)))
      return false;
  }
  for (std::size_t k = 0; k < a.centers.size(); ++k) {
    auto bk = b.center_index(a.centers[k].id);
    if (!bk || b.centers[static_cast<std::size_t>(*bk)].kind != a.centers[k].kind) return false;
    for (std::size_t c = 0; c < a.classes.size(); ++c) {
      const double x = a.demand(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c));
      const double y = b.demand(*bk, *b.class_index(a.classes[c].id));
      if (std::abs(x - y) > tolerance * std::max(1.0, std::abs(x))) return false;
    }
  }
  return true;
}

namespace {

template <typename A, typename B>
bool same_matrix(const A& a, const B& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

bool close(double x, double y, double tolerance) {
  return std::abs(x - y) <= tolerance * std::max(1.0, std::abs(x));
}

}  // namespace

bool operator==(const QnModel& a, const QnModel& b) {
  return a.classes == b.classes && a.centers == b.centers && same_matrix(a.demand, b.demand);
}

bool operator==(const SolverResult& a, const SolverResult& b) {
  return a.solver == b.solver && a.approximate == b.approximate && a.converged == b.converged &&
         a.iterations == b.iterations && a.classIds == b.classIds && a.centerIds == b.centerIds &&
         a.centerKinds == b.centerKinds && same_matrix(a.thinkTime, b.thinkTime) &&
         same_matrix(a.population, b.population) && same_matrix(a.throughput, b.throughput) &&
         same_matrix(a.cycleTime, b.cycleTime) && same_matrix(a.serverResponse, b.serverResponse) &&
         same_matrix(a.residence, b.residence) && same_matrix(a.queueLength, b.queueLength) &&
         same_matrix(a.utilization, b.utilization);
}

bool agree(const SolverResult& a, const SolverResult& b, double tolerance) {
  if (a.classIds.size() != b.classIds.size() || a.centerIds.size() != b.centerIds.size()) return false;
  for (std::size_t c = 0; c < a.classIds.size(); ++c) {
    auto bc = b.class_index(a.classIds[c]);
    if (!bc) return false;
    const auto ac = static_cast<Eigen::Index>(c);
    if (!close(a.throughput(ac), b.throughput(*bc), tolerance) || !close(a.cycleTime(ac), b.cycleTime(*bc), tolerance))
      return false;
  }
  for (std::size_t k = 0; k < a.centerIds.size(); ++k) {
    auto bk = b.center_index(a.centerIds[k]);
    if (!bk) return false;
    const auto ak = static_cast<Eigen::Index>(k);
    if (!close(a.utilization(ak), b.utilization(*bk), tolerance)) return false;
    for (std::size_t c = 0; c < a.classIds.size(); ++c) {
      const auto ac = static_cast<Eigen::Index>(c);
      const auto bc = *b.class_index(a.classIds[c]);
      if (!close(a.residence(ak, ac), b.residence(*bk, bc), tolerance) ||
          !close(a.queueLength(ak, ac), b.queueLength(*bk, bc), tolerance))
        return false;
    }
  }
  return true;
}

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::Exact: return "exact";
    case SolverKind::Amva: return "amva";
    case SolverKind::Simulation: return "sim";
  }
  return "unknown";
}

std::optional<Eigen::Index> SolverResult::class_index(const std::string& id) const {
  for (std::size_t c = 0; c < classIds.size(); ++c)
    if (classIds[c] == id) return static_cast<Eigen::Index>(c);
  return std::nullopt;
}

std::optional<Eigen::Index> SolverResult::center_index(const std::string& id) const {
  for (std::size_t k = 0; k < centerIds.size(); ++k)
    if (centerIds[k] == id) return static_cast<Eigen::Index>(k);
  return std::nullopt;
}

std::uint64_t lattice_size(const QnModel& qn) { return mva::lattice_size(qn.populations()); }

namespace {

/// Expands a queueing-center kernel solution to the full result layout.
SolverResult assemble(const QnModel& qn, const mva::Solution<double>& sol, SolverKind kind) {
  const auto C = static_cast<Eigen::Index>(qn.classes.size());
  const auto K = static_cast<Eigen::Index>(qn.centers.size());
  const Eigen::VectorXd delay = qn.total_delay();
  const auto rows = qn.queueing_indices();
  const Eigen::Index d = qn.delay_index();

  SolverResult r;
  r.solver = kind;
  r.approximate = kind != SolverKind::Exact;
  r.converged = sol.converged;
  r.iterations = sol.iterations;
  for (const QnClass& c : qn.classes) r.classIds.push_back(c.id);
  for (const QnCenter& k : qn.centers) {
    r.centerIds.push_back(k.id);
    r.centerKinds.push_back(k.kind);
  }
  r.thinkTime.resize(C);
  r.population.resize(C);
  for (Eigen::Index c = 0; c < C; ++c) {
    r.thinkTime(c) = qn.classes[static_cast<std::size_t>(c)].thinkTime;
    r.population(c) = qn.classes[static_cast<std::size_t>(c)].population;
  }
  r.throughput = sol.throughput;
  r.residence = Eigen::MatrixXd::Zero(K, C);
  for (std::size_t i = 0; i < rows.size(); ++i) r.residence.row(rows[i]) = sol.residence.row(static_cast<Eigen::Index>(i));
  r.residence.row(d) = delay.transpose();
  r.queueLength = r.residence * r.throughput.asDiagonal();
  r.cycleTime = r.residence.colwise().sum().transpose();
  r.serverResponse = r.cycleTime - r.thinkTime;
  r.utilization = Eigen::VectorXd::Zero(K);
  for (Eigen::Index k : rows) r.utilization(k) = qn.demand.row(k).dot(r.throughput);
  return r;
}

}  // namespace

SolverResult solve_exact_mva(const QnModel& qn, const SolverOptions& options) {
  validate_qn(qn);
  const std::uint64_t size = lattice_size(qn);
  if (size > options.latticeBudget)
    throw Error(Errc::BudgetExceeded, "population lattice has " + std::to_string(size) +
                                          " vectors, budget is " + std::to_string(options.latticeBudget));
  const auto sol = mva::exact<double>(qn.queueing_demand(), qn.total_delay(), qn.populations());
  return assemble(qn, sol, SolverKind::Exact);
}

SolverResult solve_amva(const QnModel& qn, double tolerance, int maxIterations) {
  validate_qn(qn);
  if (!(tolerance > 0.0)) throw Error(Errc::InvalidArgument, "AMVA tolerance must be > 0");
  if (maxIterations < 1) throw Error(Errc::InvalidArgument, "AMVA needs at least one iteration");
  const auto sol =
      mva::schweitzer<double>(qn.queueing_demand(), qn.total_delay(), qn.populations(), tolerance, maxIterations);
  return assemble(qn, sol, SolverKind::Amva);
}

SolverResult solve(const QnModel& qn, const SolverOptions& options) {
  if (lattice_size(qn) <= options.latticeBudget) return solve_exact_mva(qn, options);
  return solve_amva(qn, options.amvaTolerance, options.amvaMaxIterations);
}

std::vector<ClassBounds> asymptotic_bounds(const QnModel& qn) {
  validate_qn(qn);
  const Eigen::MatrixXd D = qn.queueing_demand();
  const Eigen::VectorXd Z = qn.total_delay();
  std::vector<ClassBounds> out;
  for (std::size_t c = 0; c < qn.classes.size(); ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    const double total = D.col(ci).sum();
    const double peak = D.col(ci).maxCoeff();
    const double n = qn.classes[c].population;
    ClassBounds b;
    b.classId = qn.classes[c].id;
    b.throughputUpper = std::min(1.0 / peak, n / (total + Z(ci)));
    b.responseLower = std::max(total, n * peak - Z(ci));
    out.push_back(b);
  }
  return out;
}

std::string bottleneck(const SolverResult& result) {
  constexpr double kTie = 1e-12;
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < result.centerIds.size(); ++k) {
    if (result.centerKinds[k] != CenterKind::Queueing) continue;
    if (!best) {
      best = k;
      continue;
    }
    const double u = result.utilization(static_cast<Eigen::Index>(k));
    const double b = result.utilization(static_cast<Eigen::Index>(*best));
    if (u > b + kTie || (std::abs(u - b) <= kTie && result.centerIds[k] < result.centerIds[*best])) best = k;
  }
  if (!best) throw Error(Errc::InvalidArgument, "result has no queueing center");
  return result.centerIds[*best];
}

double server_side_response(double cycleTime, double thinkTime) { return cycleTime - thinkTime; }

double server_side_response(const SolverResult& result, const std::string& classId) {
  auto c = result.class_index(classId);
  if (!c) throw Error(Errc::UnknownElement, "unknown class '" + classId + "'");
  return server_side_response(result.cycleTime(*c), result.thinkTime(*c));
}

double throughput_from_cycle(int population, double cycleTime) {
  if (!(cycleTime > 0.0)) throw Error(Errc::InvalidArgument, "cycle time must be > 0");
  return population / cycleTime;
}

}  // namespace spe
