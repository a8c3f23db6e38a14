#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spe {

enum class CenterKind { Delay, Queueing };  // Queueing centers are processor sharing

struct QnClass {
  std::string id;
  int population = 1;
  double thinkTime = 0.0;  // seconds
  bool operator==(const QnClass&) const = default;
};

struct QnCenter {
  std::string id;
  CenterKind kind = CenterKind::Queueing;
  bool operator==(const QnCenter&) const = default;
};

/// Closed multi-class product-form network. `demand(k, c)` is the aggregate
/// service demand (seconds per system-level request) of class c at center k.
/// Demand listed on the delay center adds to the class think time.
struct QnModel {
  std::vector<QnClass> classes;
  std::vector<QnCenter> centers;
  Eigen::MatrixXd demand;  // centers x classes

  std::optional<Eigen::Index> center_index(const std::string& id) const;
  std::optional<Eigen::Index> class_index(const std::string& id) const;
  Eigen::Index delay_index() const;  // -1 when absent
  std::vector<Eigen::Index> queueing_indices() const;

  /// Total delay per cycle for each class: think time plus delay-center demand.
  Eigen::VectorXd total_delay() const;
  /// Demands restricted to queueing centers (rows in queueing_indices order).
  Eigen::MatrixXd queueing_demand() const;
  std::vector<int> populations() const;
};

/// Throws Error(InvalidModel) when the structural invariants do not hold:
/// exactly one delay center, unique ids, finite non-negative demands, every
/// class with positive demand at some queueing center.
void validate_qn(const QnModel& qn);

/// Equality up to center and class ordering, demands within `tolerance`
/// (absolute, scaled by max(1, |value|)).
bool equivalent(const QnModel& a, const QnModel& b, double tolerance = 1e-12);

/// Exact equality including ordering.
bool operator==(const QnModel& a, const QnModel& b);

enum class SolverKind { Exact, Amva, Simulation };
std::string_view to_string(SolverKind kind);

struct SolverResult {
  SolverKind solver = SolverKind::Exact;
  bool approximate = false;
  bool converged = true;
  int iterations = 0;

  std::vector<std::string> classIds;
  std::vector<std::string> centerIds;
  std::vector<CenterKind> centerKinds;
  Eigen::VectorXd thinkTime;       // per class
  Eigen::VectorXd population;      // per class
  Eigen::VectorXd throughput;      // per class, requests per second
  Eigen::VectorXd cycleTime;       // per class, includes think time
  Eigen::VectorXd serverResponse;  // per class, cycle time minus think time
  Eigen::MatrixXd residence;       // centers x classes, delay row includes think time
  Eigen::MatrixXd queueLength;     // centers x classes
  Eigen::VectorXd utilization;     // per center, 0 for the delay center

  std::optional<Eigen::Index> class_index(const std::string& id) const;
  std::optional<Eigen::Index> center_index(const std::string& id) const;
};

/// Exact equality including ordering.
bool operator==(const SolverResult& a, const SolverResult& b);

/// Same classes and centers up to ordering, with every index (throughput,
/// cycle time, residence, queue length, utilization) within `tolerance`
/// relative to max(1, |value|).
bool agree(const SolverResult& a, const SolverResult& b, double tolerance);

struct SolverOptions {
  std::uint64_t latticeBudget = 10'000'000;
  double amvaTolerance = 1e-8;
  int amvaMaxIterations = 10'000;
};

/// Number of population vectors in the exact recursion, saturating at
/// UINT64_MAX.
std::uint64_t lattice_size(const QnModel& qn);

/// Exact multi-class MVA. Throws BudgetExceeded when the lattice is larger
/// than `options.latticeBudget`, InvalidModel for malformed networks.
SolverResult solve_exact_mva(const QnModel& qn, const SolverOptions& options = {});

/// Bard-Schweitzer approximate MVA. A run that hits the iteration cap
/// returns the last iterate with `converged == false`.
SolverResult solve_amva(const QnModel& qn, double tolerance = 1e-8, int maxIterations = 10'000);

/// Exact when the lattice fits the budget, AMVA otherwise.
SolverResult solve(const QnModel& qn, const SolverOptions& options = {});

struct ClassBounds {
  std::string classId;
  double throughputUpper = 0.0;
  double responseLower = 0.0;  // server side, think time excluded
};

/// Optimistic per-class bounds that ignore contention from the other classes:
/// X <= min(1 / max_k D_k, N / (sum_k D_k + Z)).
std::vector<ClassBounds> asymptotic_bounds(const QnModel& qn);

/// Queueing center with the largest utilization; ties go to the smaller id.
std::string bottleneck(const SolverResult& result);

double server_side_response(const SolverResult& result, const std::string& classId);
double server_side_response(double cycleTime, double thinkTime);

double throughput_from_cycle(int population, double cycleTime);

}  // namespace spe
